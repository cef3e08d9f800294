//! CSV and JSON artifacts, and the baseline comparison.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::run::{SpectrumRow, WindowReport};

#[derive(Serialize)]
struct CsvRecord<'a> {
    window: usize,
    block: &'a str,
    index: usize,
    eigenvalue: String,
    multiplicity: usize,
}

#[derive(Deserialize)]
struct BaselineRecord {
    #[allow(dead_code)]
    window: usize,
    block: String,
    #[allow(dead_code)]
    index: usize,
    eigenvalue: f64,
    multiplicity: usize,
}

/// 17 significant digits round-trip every f64.
pub fn format_eigenvalue(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(rows: &[SpectrumRow], w: W) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(CsvRecord {
            window: r.window,
            block: &r.block,
            index: r.index,
            eigenvalue: format_eigenvalue(r.eigenvalue),
            multiplicity: r.multiplicity,
        })
        .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn csv_bytes(rows: &[SpectrumRow]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(buf)
}

pub fn json_bytes(reports: &[WindowReport]) -> Result<Vec<u8>, CliError> {
    let mut buf = serde_json::to_vec_pretty(reports).map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Block label → eigenvalues (expanded by multiplicity) from the largest
/// window in which the block appears.
pub type BlockSpectra = BTreeMap<String, Vec<f64>>;

pub fn spectra_from_rows(rows: &[SpectrumRow]) -> BlockSpectra {
    collect(rows.iter().map(|r| (r.window, r.block.clone(), r.eigenvalue, r.multiplicity)))
}

fn collect(items: impl Iterator<Item = (usize, String, f64, usize)>) -> BlockSpectra {
    let mut best: BTreeMap<String, (usize, Vec<f64>)> = BTreeMap::new();
    for (window, block, value, mult) in items {
        let entry = best.entry(block).or_insert((window, Vec::new()));
        if window > entry.0 {
            *entry = (window, Vec::new());
        }
        if window == entry.0 {
            entry.1.extend(std::iter::repeat(value).take(mult));
        }
    }
    best.into_iter()
        .map(|(k, (_, mut v))| {
            v.sort_by(f64::total_cmp);
            (k, v)
        })
        .collect()
}

pub fn read_baseline<R: Read>(r: R) -> Result<BlockSpectra, CliError> {
    let mut rd = csv::Reader::from_reader(r);
    let mut items = Vec::new();
    for (line, rec) in rd.deserialize::<BaselineRecord>().enumerate() {
        let rec = rec.map_err(|e| CliError::Baseline(format!("row {}: {e}", line + 1)))?;
        items.push((rec.window, rec.block, rec.eigenvalue, rec.multiplicity));
    }
    Ok(collect(items.into_iter()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffEntry {
    pub block: String,
    /// Position in the ascending list; `None` when the counts differ.
    pub index: Option<usize>,
    pub baseline: Option<f64>,
    pub current: Option<f64>,
}

/// Eigenvalue-multiset differences on blocks present in both runs.
pub fn diff(baseline: &BlockSpectra, current: &BlockSpectra, tolerance: f64) -> Vec<DiffEntry> {
    let mut out = Vec::new();
    for (block, b) in baseline {
        let Some(c) = current.get(block) else { continue };
        if b.len() != c.len() {
            out.push(DiffEntry {
                block: block.clone(),
                index: None,
                baseline: Some(b.len() as f64),
                current: Some(c.len() as f64),
            });
            continue;
        }
        for (i, (x, y)) in b.iter().zip(c).enumerate() {
            if (x - y).abs() > tolerance {
                out.push(DiffEntry {
                    block: block.clone(),
                    index: Some(i),
                    baseline: Some(*x),
                    current: Some(*y),
                });
            }
        }
    }
    out
}

pub fn write_diff<W: Write>(entries: &[DiffEntry], w: W) -> Result<(), CliError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["block", "index", "baseline", "current"])
        .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    for e in entries {
        let f = |x: Option<f64>| x.map(format_eigenvalue).unwrap_or_default();
        let idx = e.index.map(|i| i.to_string()).unwrap_or_else(|| "count".into());
        wr.write_record([e.block.clone(), idx, f(e.baseline), f(e.current)])
            .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(window: usize, block: &str, index: usize, eigenvalue: f64, multiplicity: usize) -> SpectrumRow {
        SpectrumRow {
            window,
            block: block.into(),
            index,
            eigenvalue,
            multiplicity,
        }
    }

    #[test]
    fn csv_roundtrips_seventeen_digits() {
        let x = std::f64::consts::PI / 3.0;
        let rows = vec![row(1, "[0]", 0, x, 2), row(1, "[0]", 1, -0.0, 1)];
        let bytes = csv_bytes(&rows).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("window,block,index,eigenvalue,multiplicity\n"));
        assert!(text.contains("1.0471975511965976e0"));
        assert!(!text.contains("-0.0"));
        let back = read_baseline(&bytes[..]).unwrap();
        assert_eq!(back["[0]"], vec![0.0, x, x]);
    }

    #[test]
    fn diff_uses_the_largest_window_and_shared_blocks() {
        let base = spectra_from_rows(&[row(1, "a", 0, 1.0, 1), row(2, "a", 0, 1.5, 1), row(2, "b", 0, 2.0, 1)]);
        let cur = spectra_from_rows(&[row(4, "a", 0, 1.5, 1), row(4, "c", 0, 9.0, 1)]);
        assert!(diff(&base, &cur, 1e-12).is_empty());
        let moved = spectra_from_rows(&[row(4, "a", 0, 1.6, 1)]);
        let d = diff(&base, &moved, 1e-12);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].index, Some(0));
    }
}
