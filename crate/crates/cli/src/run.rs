//! Builds each configured example per window and runs its checks.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use spectral_lift::clifford::{build_clifford, CliffordRep};
use spectral_lift::dirac_lift::{
    assemble, check_lift, horizontal_lift, multiset_distance, vertical_block_spectrum_deviation, vertical_commutator_sweep, vertical_dirac, AssembledTriple,
    BaseTriple,
};
use spectral_lift::free_systems::{CovariantRep, FactorSystem, RepresentedBase};
use spectral_lift::groups::{GroupKind, GroupModel, IrrepLabel, TruncationWindow};
use spectral_lift::models::crossed_product::{build_crossed_product, diagonal_base, handcoded_deviation, Automorphism, CrossedProductSpec, ShiftGroup};
use spectral_lift::models::homogeneous::{build_homogeneous, Homogeneous, HomogeneousSpec};
use spectral_lift::models::quantum_torus::{assembled_spectrum, build_quantum_torus, canonical_d4_spectrum, QuantumTorusSpec};
use spectral_lift::VerificationReport;

use crate::config::{
    AbelianGroupSpec, AutomorphismSpec, BaseSpec, CrossedProductConfig, CustomFactorConfig, ExampleConfig, ExperimentConfig, HomogeneousConfig, LieGroupSpec,
    QuantumTorusConfig, ThetaSpec,
};
use crate::error::CliError;

/// One CSV row: a cluster of numerically equal eigenvalues in one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub window: usize,
    pub block: String,
    pub index: usize,
    pub eigenvalue: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub kind: String,
    pub window: usize,
    #[serde(flatten)]
    pub report: VerificationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<SpectrumRow>,
    pub reports: Vec<WindowReport>,
}

impl RunOutput {
    /// First failing pass/fail check over all windows.
    pub fn first_failure(&self) -> Option<CliError> {
        self.reports
            .iter()
            .flat_map(|w| w.report.failures().map(move |e| (w.window, e)))
            .next()
            .map(|(n, e)| CliError::CheckFailed {
                check: format!("{} (window {n})", e.name),
                deviation: e.max_deviation,
                tolerance: e.tolerance,
            })
    }
}

/// Eigenvalues within this relative distance form one row.
const CLUSTER: f64 = 1e-9;

pub fn cluster_rows(window: usize, block: &str, eigenvalues: &[f64]) -> Vec<SpectrumRow> {
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut rows: Vec<SpectrumRow> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        let split = i == sorted.len() || sorted[i] - sorted[start] > CLUSTER * (1.0 + sorted[start].abs());
        if split {
            let group = &sorted[start..i];
            rows.push(SpectrumRow {
                window,
                block: block.to_string(),
                index: rows.len(),
                eigenvalue: group.iter().sum::<f64>() / group.len() as f64,
                multiplicity: group.len(),
            });
            start = i;
        }
    }
    rows
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let mut out = RunOutput {
        rows: Vec::new(),
        reports: Vec::new(),
    };
    for &n in &cfg.windows {
        let (blocks, report) = match &cfg.example {
            ExampleConfig::CrossedProduct(c) => crossed_product(cfg, c, n)?,
            ExampleConfig::QuantumTorus(q) => quantum_torus(cfg, q, n)?,
            ExampleConfig::Homogeneous(h) => homogeneous(cfg, h, n)?,
            ExampleConfig::CustomFactorSystem(c) => custom(cfg, c, n)?,
        };
        for (label, eig) in blocks {
            out.rows.extend(cluster_rows(n, &label, &eig));
        }
        out.reports.push(WindowReport {
            kind: cfg.kind().to_string(),
            window: n,
            report,
        });
    }
    Ok(out)
}

type Blocks = Vec<(String, Vec<f64>)>;

fn base_algebra(spec: &BaseSpec) -> Result<RepresentedBase, CliError> {
    match spec {
        BaseSpec::Diagonal(0) => Err(CliError::config("base", "dimension must be positive")),
        BaseSpec::Diagonal(m) => Ok(diagonal_base(*m)),
        BaseSpec::Generators(gens) => {
            let mats = gens
                .iter()
                .map(|g| Ok((g.name.clone(), g.matrix.to_matrix(&format!("base.{}", g.name))?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            let n = mats.first().map(|(_, m)| m.nrows()).ok_or_else(|| CliError::config("base", "no generators"))?;
            if let Some((name, _)) = mats.iter().find(|(_, m)| m.nrows() != n) {
                return Err(CliError::config("base", format!("generator {name} has a different size")));
            }
            RepresentedBase::new(n, mats).map_err(|e| CliError::config("base", e.to_string()))
        }
    }
}

fn base_triple(base: &RepresentedBase, d_b: &crate::config::MatrixSpec) -> Result<BaseTriple, CliError> {
    let d = d_b.to_matrix("d_b")?;
    if d.nrows() != base.hb_dim {
        return Err(CliError::config(
            "d_b",
            format!("size {} does not match the base dimension {}", d.nrows(), base.hb_dim),
        ));
    }
    BaseTriple::new(base.clone(), d).map_err(|e| CliError::config("d_b", e.to_string()))
}

fn block_spectra(t: &AssembledTriple) -> Result<Blocks, CliError> {
    let spectra = t.spectrum()?;
    Ok(t.rep.blocks.iter().zip(spectra).map(|(b, e)| (b.label.to_string(), e)).collect())
}

/// Checks every assembled example shares: factor-system identities, lift
/// property, self-adjointness and the vertical identities.
fn common_checks(cfg: &ExperimentConfig, t: &AssembledTriple, base: &RepresentedBase, cliff: &CliffordRep) -> Result<VerificationReport, CliError> {
    let fs = &t.rep.fs;
    let tol = cfg.tolerance;
    let mut report = fs.verify(base, tol, cfg.seed)?;
    report.check("self-adjointness", "assembled Dirac operator is self-adjoint", t.hermiticity_deviation(), tol);
    let lift = check_lift(t)?;
    report.check("lift dirac", "lift isometry intertwines D_A with D_B", lift.dirac_deviation, tol);
    report.check(
        "lift representation",
        "lift isometry intertwines the algebra representations",
        lift.representation_deviation,
        tol,
    );
    let worst = vertical_commutator_sweep(t, cliff, base, cfg.samples, cfg.seed ^ 0x7e57)?;
    report.check(
        "vertical commutator",
        "commutator with the vertical operator equals the derivative of the action",
        worst,
        tol,
    );
    report.check(
        "vertical block spectrum",
        "each vertical block repeats the bare vertical spectrum with the multiplicity",
        vertical_block_spectrum_deviation(t)?,
        tol,
    );
    Ok(report)
}

fn crossed_product(cfg: &ExperimentConfig, c: &CrossedProductConfig, n: usize) -> Result<(Blocks, VerificationReport), CliError> {
    let base = base_algebra(&c.base)?;
    let triple = base_triple(&base, &c.d_b)?;
    let automorphism = match &c.automorphism {
        AutomorphismSpec::Permutation(p) => Automorphism::Permutation(p.clone()),
        AutomorphismSpec::Unitary(m) => Automorphism::Unitary(m.to_matrix("automorphism")?),
    };
    let group = match c.cyclic_order {
        Some(order) => ShiftGroup::Cyclic { order },
        None => ShiftGroup::Integers { radius: n },
    };
    let cliff = build_clifford(1, true);
    let spec = CrossedProductSpec {
        base: base.clone(),
        automorphism,
        group,
    };
    let (cp, t) = build_crossed_product(spec, &triple, &cliff)?;
    let mut report = common_checks(cfg, &t, &base, &cliff)?;
    if c.cyclic_order.is_none() {
        report.check(
            "closed-form blocks",
            "generic mode blocks equal the closed-form mode blocks",
            handcoded_deviation(&cp, &t),
            cfg.tolerance,
        );
    }
    Ok((block_spectra(&t)?, report))
}

fn quantum_torus(cfg: &ExperimentConfig, q: &QuantumTorusConfig, n: usize) -> Result<(Blocks, VerificationReport), CliError> {
    let base_radius = q.base_radius.unwrap_or(n);
    let spec = match q.theta {
        ThetaSpec::Matrix(theta) => QuantumTorusSpec { theta, radius: n, base_radius },
        ThetaSpec::Mixed(t) => QuantumTorusSpec {
            base_radius,
            ..QuantumTorusSpec::mixed(t, n)
        },
    };
    spec.validate().map_err(|e| CliError::config("theta", e.to_string()))?;
    let cliff = build_clifford(2, true);
    let (qt, _, t) = build_quantum_torus(spec, &cliff)?;
    let tol = cfg.tolerance;
    let mut report = common_checks(cfg, &t, &qt.base, &cliff)?;
    let ours = assembled_spectrum(&t)?;
    let d4 = canonical_d4_spectrum(base_radius, n)?;
    report.check(
        "canonical spectrum",
        "assembled spectrum equals the canonical four-torus Dirac spectrum",
        multiset_distance(&ours, &d4),
        tol,
    );
    report.check(
        "gauge invariance",
        "gauge action preserves commutator norms with the base Dirac operator",
        qt.gauge_deviation()?,
        tol,
    );
    let (comm, interior, boundary) = qt.commutation_residual();
    report
        .check("commutation relations", "generators satisfy the twisted commutation relations", comm, tol)
        .counts(interior, boundary);
    let (eq, interior, boundary) = qt.equivalence_residual()?;
    report
        .check("equivalence", "covariant representation is unitarily equivalent to the defining one", eq, tol)
        .counts(interior, boundary);
    Ok((block_spectra(&t)?, report))
}

fn homogeneous(cfg: &ExperimentConfig, h: &HomogeneousConfig, n: usize) -> Result<(Blocks, VerificationReport), CliError> {
    let group = match h.group {
        LieGroupSpec::Torus(d) => GroupKind::Torus(d),
        LieGroupSpec::Su2 => GroupKind::SU2,
    };
    let spec = HomogeneousSpec {
        group,
        subgroup: h.subgroup.clone(),
        radius: n,
        quadrature: h.quadrature.unwrap_or(0),
    };
    let built = build_homogeneous(&spec).map_err(|e| match e {
        spectral_lift::Error::UnsupportedSubgroup(m) => CliError::config("subgroup", m),
        other => CliError::Numerical(other),
    })?;
    let residuals = built.residuals(cfg.samples.max(1), cfg.seed)?;
    let report_only = matches!(built, Homogeneous::Su2(_));
    Ok((built.canonical_spectrum()?, residuals.to_report(cfg.tolerance, report_only)))
}

fn custom(cfg: &ExperimentConfig, c: &CustomFactorConfig, n: usize) -> Result<(Blocks, VerificationReport), CliError> {
    let base = base_algebra(&c.base)?;
    let triple = base_triple(&base, &c.d_b)?;
    let (group, window) = match c.group {
        AbelianGroupSpec::Torus(d) => (GroupModel::torus(d), TruncationWindow::torus_box(d, n as i64)),
        AbelianGroupSpec::Cyclic(order) => (GroupModel::cyclic(order), TruncationWindow::cyclic_all(order)),
    };
    let label = |field: &str, v: &[i64]| -> Result<IrrepLabel, CliError> {
        match c.group {
            AbelianGroupSpec::Torus(d) if v.len() == d => Ok(IrrepLabel::Torus(v.to_vec())),
            AbelianGroupSpec::Cyclic(order) if v.len() == 1 => Ok(IrrepLabel::Cyclic {
                m: v[0].rem_euclid(order as i64) as u32,
                n: order,
            }),
            _ => Err(CliError::config(field, format!("label {v:?} does not fit the group"))),
        }
    };
    let unitaries = c
        .unitaries
        .iter()
        .enumerate()
        .map(|(i, m)| m.to_matrix(&format!("unitaries[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, u) in unitaries.iter().enumerate() {
        if u.nrows() != base.hb_dim {
            return Err(CliError::config(&format!("unitaries[{i}]"), "size does not match the base dimension"));
        }
    }
    let mut cocycles = BTreeMap::new();
    for (i, e) in c.cocycles.iter().enumerate() {
        let field = format!("cocycles[{i}]");
        let m = e.matrix.to_matrix(&field)?;
        cocycles.insert((label(&field, &e.sigma)?, label(&field, &e.tau)?), m);
    }
    let fs = FactorSystem::custom_abelian(group.clone(), window, &unitaries, cocycles)?;
    let rep = CovariantRep::new(Arc::new(fs))?;
    let cliff = build_clifford(group.lie_dim.max(1), true);
    let hl = horizontal_lift(&triple, &rep)?;
    let v = vertical_dirac(&rep, &cliff)?;
    let t = assemble(&triple, &rep, &hl, &v, &cliff)?;
    let report = common_checks(cfg, &t, &base, &cliff)?;
    Ok((block_spectra(&t)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_merge_degenerate_eigenvalues() {
        let rows = cluster_rows(2, "k", &[1.0, -1.0, 1.0 + 1e-13, 0.0]);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2].multiplicity, 2);
        assert_eq!(rows.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 1, 2]);
    }
}
