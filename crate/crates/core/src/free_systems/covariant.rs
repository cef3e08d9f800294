//! The covariant representation (π_A, u_A) on H_p = ⊕_σ p(σ)(H_B⊗H_σ) ⊗ V̄_σ,
//! block operators on it, saturation checks and the classification search.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::base::RepresentedBase;
use super::element::{rows_of_block, split_components, stack_components, AlgebraElement};
use super::factor::FactorSystem;
use crate::error::{Error, Result};
use crate::groups::{GroupPoint, IrrepData, IrrepLabel};
use crate::linalg::{identity, kron, max_abs, mul_auto, null_space, polar_unitary, random, rank, zeros, CMatrix, C64, ZERO};

/// One isotypic block of H_p, legs (range p(σ), V̄_σ).
#[derive(Debug, Clone)]
pub struct HpBlock {
    pub label: IrrepLabel,
    pub offset: usize,
    pub rank: usize,
    pub mult: usize,
    pub dim: usize,
}

impl HpBlock {
    pub fn size(&self) -> usize {
        self.rank * self.dim
    }
}

/// Block-sparse operator on H_p (or on H_p ⊗ ℂ^s), keyed by (row block, column block).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockOp {
    pub blocks: BTreeMap<(usize, usize), CMatrix>,
}

impl BlockOp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, row: usize, col: usize, m: CMatrix) {
        match self.blocks.get_mut(&(row, col)) {
            Some(existing) => *existing += m,
            None => {
                self.blocks.insert((row, col), m);
            }
        }
    }

    pub fn adjoint(&self) -> BlockOp {
        BlockOp {
            blocks: self.blocks.iter().map(|(&(r, c), m)| ((c, r), m.adjoint())).collect(),
        }
    }

    pub fn mul(&self, other: &BlockOp) -> BlockOp {
        let mut out = BlockOp::new();
        for (&(r, k), a) in &self.blocks {
            for (&(k2, c), b) in other.blocks.range((k, 0)..(k + 1, 0)) {
                debug_assert_eq!(k, k2);
                out.add_block(r, c, mul_auto(a, b));
            }
        }
        out
    }

    pub fn sub(&self, other: &BlockOp) -> BlockOp {
        let mut out = self.clone();
        for (&(r, c), m) in &other.blocks {
            out.add_block(r, c, -m);
        }
        out
    }

    pub fn commutator(&self, other: &BlockOp) -> BlockOp {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.values().map(max_abs).fold(0.0, f64::max)
    }

    /// Amplify every block by a fixed factor on the right: X ↦ X ⊗ f.
    pub fn kron_right(&self, f: &CMatrix) -> BlockOp {
        BlockOp {
            blocks: self.blocks.iter().map(|(&k, m)| (k, kron(m, f))).collect(),
        }
    }

    /// Dense matrix for the given block sizes.
    pub fn to_dense(&self, sizes: &[usize]) -> CMatrix {
        let offsets: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        let n: usize = sizes.iter().sum();
        let mut out = zeros(n, n);
        for (&(r, c), m) in &self.blocks {
            out.view_mut((offsets[r], offsets[c]), m.shape()).copy_from(m);
        }
        out
    }

    /// Operator norm by power iteration on X*X from a fixed start vector.
    pub fn op_norm(&self, sizes: &[usize]) -> f64 {
        let n: usize = sizes.iter().sum();
        if n <= 1200 {
            return crate::linalg::op_norm(&self.to_dense(sizes));
        }
        let gram = self.adjoint().mul(self);
        let offsets: Vec<usize> = sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        let mut v: Vec<C64> = (0..n).map(|i| C64::new(1.0 + (i % 7) as f64 * 0.1, 0.0)).collect();
        let mut lambda = 0.0;
        for _ in 0..300 {
            let mut w = vec![ZERO; n];
            for (&(r, c), m) in &gram.blocks {
                for i in 0..m.nrows() {
                    let mut acc = ZERO;
                    for j in 0..m.ncols() {
                        acc += m[(i, j)] * v[offsets[c] + j];
                    }
                    w[offsets[r] + i] += acc;
                }
            }
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next = norm.sqrt();
            v = w.into_iter().map(|z| z / norm).collect();
            if (next - lambda).abs() <= 1e-13 * next.max(1.0) {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda
    }
}

/// (π_A, u_A) on H_p with blocks ordered by label.
#[derive(Debug, Clone)]
pub struct CovariantRep {
    pub fs: Arc<FactorSystem>,
    pub blocks: Vec<HpBlock>,
    pub index: BTreeMap<IrrepLabel, usize>,
    pub total_dim: usize,
}

impl CovariantRep {
    pub fn new(fs: Arc<FactorSystem>) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut index = BTreeMap::new();
        let mut offset = 0;
        for label in fs.window.iter() {
            let data = fs.label(label)?;
            let b = HpBlock {
                label: label.clone(),
                offset,
                rank: data.rank(),
                mult: data.mult,
                dim: data.irrep.dim,
            };
            offset += b.size();
            index.insert(label.clone(), blocks.len());
            blocks.push(b);
        }
        Ok(CovariantRep {
            fs,
            blocks,
            index,
            total_dim: offset,
        })
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size()).collect()
    }

    pub fn trivial_block(&self) -> usize {
        self.index[&self.fs.trivial()]
    }

    /// Q_σ ⊗ 1: block coordinates → H_B⊗H_σ⊗V̄_σ.
    fn lift(&self, block: &HpBlock) -> Option<CMatrix> {
        let q = self.fs.labels[&block.label].range.as_ref()?;
        Some(kron(q, &identity(block.dim)))
    }

    /// (Q_ρ⊗1)* m (Q_τ⊗1).
    fn compress_block(&self, row: &HpBlock, col: &HpBlock, m: CMatrix) -> CMatrix {
        let m = match self.lift(col) {
            Some(q) => m * q,
            None => m,
        };
        match self.lift(row) {
            Some(q) => q.adjoint() * m,
            None => m,
        }
    }

    /// π_A(a) as a block operator; products leaving the window are dropped.
    pub fn represent(&self, a: &AlgebraElement) -> Result<BlockOp> {
        self.represent_filtered(a, |_, _| true)
    }

    fn represent_filtered(&self, a: &AlgebraElement, keep: impl Fn(usize, usize) -> bool + Sync) -> Result<BlockOp> {
        let fs = &self.fs;
        let hb = fs.hb_dim;
        let mut jobs = Vec::new();
        for (sigma, xs) in &a.terms {
            for (ci, col) in self.blocks.iter().enumerate() {
                jobs.push((sigma, xs, ci, col));
            }
        }
        let pieces: Vec<Vec<(usize, usize, CMatrix)>> = jobs
            .par_iter()
            .map(|(sigma, xs, ci, col)| -> Result<Vec<(usize, usize, CMatrix)>> {
                let tau = &col.label;
                let w = fs.cocycle(sigma, tau)?;
                let ms = fs.mult(sigma)?;
                let mut out = Vec::new();
                let targets: Vec<_> = w
                    .parts
                    .iter()
                    .filter_map(|part| self.index.get(&part.0).map(|&ri| (ri, part)))
                    .filter(|(ri, _)| keep(*ri, *ci))
                    .collect();
                if targets.is_empty() {
                    return Ok(out);
                }
                let zs: Vec<CMatrix> = xs.iter().map(|x| Ok(&w.matrix * fs.coact(tau, x, ms, 1)?)).collect::<Result<_>>()?;
                for (ri, (rho, iota, off, m)) in targets {
                    let row = &self.blocks[ri];
                    let dr = row.dim;
                    let mut full = zeros(hb * m * dr, hb * col.mult * col.dim);
                    for (a_idx, z) in zs.iter().enumerate() {
                        let n_a = CMatrix::from_fn(dr, col.dim, |r, c| iota[(a_idx * col.dim + c, r)]);
                        if n_a.iter().all(|v| *v == ZERO) {
                            continue;
                        }
                        let block = rows_of_block(z, hb, *off, *m, w.total_mult);
                        full += kron(&block, &n_a);
                    }
                    debug_assert_eq!(rho, &row.label);
                    out.push((ri, *ci, self.compress_block(row, col, full)));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut op = BlockOp::new();
        for list in pieces {
            for (r, c, m) in list {
                op.add_block(r, c, m);
            }
        }
        Ok(op)
    }

    /// π_A(b) for b ∈ B.
    pub fn represent_base(&self, b: &CMatrix) -> Result<BlockOp> {
        self.represent(&AlgebraElement::base(&self.fs, b))
    }

    /// u_A(g) = ⊕ 1 ⊗ σ̄_g.
    pub fn u(&self, g: &GroupPoint) -> Result<BlockOp> {
        let mut op = BlockOp::new();
        for (i, b) in self.blocks.iter().enumerate() {
            let conj = IrrepData::new(&self.fs.group, &b.label)?.sample_conj(g);
            op.add_block(i, i, kron(&identity(b.rank), &conj));
        }
        Ok(op)
    }

    /// Recover the coefficients of an operator from its (σ ← 𝟙) blocks.
    pub fn recover(&self, op: &BlockOp) -> Result<AlgebraElement> {
        let t = self.trivial_block();
        let hb = self.fs.hb_dim;
        let mut out = AlgebraElement::zero();
        for (i, b) in self.blocks.iter().enumerate() {
            let Some(m) = op.blocks.get(&(i, t)) else { continue };
            let lifted = match self.lift(b) {
                Some(q) => q * m,
                None => m.clone(),
            };
            // rows indexed ((i·m + h)·d + a): split off the V̄ leg
            let coeffs: Vec<CMatrix> = split_components(&lifted, b.dim);
            debug_assert!(coeffs.iter().all(|c| c.nrows() == hb * b.mult));
            out = out.add(&AlgebraElement::monomial(b.label.clone(), coeffs));
        }
        Ok(out)
    }

    /// a* computed from π_A(a)* and coefficient recovery.
    pub fn involution(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        let t = self.trivial_block();
        let pi = self.represent_filtered(a, |row, _| row == t)?;
        self.recover(&pi.adjoint())
    }

    /// Rank of span{π_A(a)ξ : a ∈ A₀(σ), ξ ∈ H_B} against the block dimension.
    pub fn isotypic_saturation(&self, base: &RepresentedBase, label: &IrrepLabel, word_len: usize) -> Result<SaturationReport> {
        let bi = *self.index.get(label).ok_or_else(|| Error::OutOfWindow(label.to_string()))?;
        let block = &self.blocks[bi];
        let data = self.fs.label(label)?;
        let hb = self.fs.hb_dim;
        let span = base.span_basis(word_len);
        let mut cols = Vec::new();
        for b in &span {
            for h in 0..block.mult {
                let mut comps = vec![zeros(hb, hb); block.mult];
                comps[h] = b.clone();
                let x = &data.p * stack_components(&comps);
                let x = match &data.range {
                    Some(q) => q.adjoint() * x,
                    None => x,
                };
                for j in 0..hb {
                    cols.push(x.column(j).into_owned());
                }
            }
        }
        let mut m = zeros(block.rank, cols.len());
        for (j, c) in cols.iter().enumerate() {
            m.set_column(j, c);
        }
        let achieved = rank(&m, 1e-9) * block.dim;
        Ok(SaturationReport {
            label: label.to_string(),
            achieved,
            block_dim: block.size(),
            deficiency: block.size() - achieved,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationReport {
    pub label: String,
    pub achieved: usize,
    pub block_dim: usize,
    pub deficiency: usize,
}

#[derive(Debug, Clone)]
pub enum Classification {
    Equivalent { intertwiner: CMatrix, residual: f64 },
    Distinct { reason: String },
}

/// Search for a unitary Φ = ⊕_σ φ_σ ⊗ 1 with Φπ(x_i) = π'(x_i)Φ for paired
/// generator images. Φ then also intertwines u_A by construction.
pub fn classify_covariant_reps(a: &CovariantRep, b: &CovariantRep, generators: &[(BlockOp, BlockOp)], seed: u64) -> Result<Classification> {
    let la: Vec<&IrrepLabel> = a.blocks.iter().map(|x| &x.label).collect();
    let lb: Vec<&IrrepLabel> = b.blocks.iter().map(|x| &x.label).collect();
    if la != lb || a.fs.hb_dim != b.fs.hb_dim || a.fs.group != b.fs.group {
        return Err(Error::NotComparable("representations use different windows, groups or bases".into()));
    }
    for (x, y) in a.blocks.iter().zip(&b.blocks) {
        if x.rank != y.rank {
            return Ok(Classification::Distinct {
                reason: format!("block {} has rank {} vs {}", x.label, x.rank, y.rank),
            });
        }
    }
    let sizes = a.sizes();
    let dense: Vec<(CMatrix, CMatrix)> = generators.iter().map(|(p, q)| (p.to_dense(&sizes), q.to_dense(&sizes))).collect();
    let residual = |phi: &CMatrix| -> f64 { dense.iter().map(|(p, q)| max_abs(&(phi * p - q * phi))).fold(0.0, f64::max) };
    let one = identity(a.total_dim);
    let r1 = residual(&one);
    if r1 < 1e-9 {
        return Ok(Classification::Equivalent {
            intertwiner: one,
            residual: r1,
        });
    }
    // unknowns: entries of each φ_σ (rank × rank), column-major per block
    let mut param_offsets = Vec::new();
    let mut n_params = 0;
    for blk in &a.blocks {
        param_offsets.push(n_params);
        n_params += blk.rank * blk.rank;
    }
    let build_phi = |theta: &[C64]| -> CMatrix {
        let mut phi = zeros(a.total_dim, a.total_dim);
        for (blk, &po) in a.blocks.iter().zip(&param_offsets) {
            let f = CMatrix::from_fn(blk.rank, blk.rank, |r, c| theta[po + c * blk.rank + r]);
            let full = kron(&f, &identity(blk.dim));
            phi.view_mut((blk.offset, blk.offset), full.shape()).copy_from(&full);
        }
        phi
    };
    let n = a.total_dim;
    let mut lin = zeros(dense.len() * n * n, n_params);
    let mut theta = vec![ZERO; n_params];
    for k in 0..n_params {
        theta[k] = C64::new(1.0, 0.0);
        let phi = build_phi(&theta);
        theta[k] = ZERO;
        for (g, (p, q)) in dense.iter().enumerate() {
            let r = &phi * p - q * &phi;
            for (idx, v) in r.iter().enumerate() {
                lin[(g * n * n + idx, k)] = *v;
            }
        }
    }
    let kernel = null_space(&lin, 1e-8);
    if kernel.ncols() == 0 {
        return Ok(Classification::Distinct {
            reason: "no nonzero intertwiner".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = random::gaussian_matrix(&mut rng, kernel.ncols(), 1);
    let combo = &kernel * coeffs;
    let phi = build_phi(combo.as_slice());
    if rank(&phi, 1e-8 * crate::linalg::op_norm(&phi)) < n {
        return Ok(Classification::Distinct {
            reason: "intertwiners are not invertible".into(),
        });
    }
    let u = polar_unitary(&phi);
    let res = residual(&u);
    Ok(Classification::Equivalent { intertwiner: u, residual: res })
}

/// Covariance residual max_g ‖u_g π(x) u_g* − π(α_g x)‖ on sampled points.
pub fn covariance_deviation(rep: &CovariantRep, a: &AlgebraElement, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = rep.represent(a)?;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let g = GroupPoint::sample(&rep.fs.group, &mut rng);
        let u = rep.u(&g)?;
        let lhs = u.mul(&pi).mul(&u.adjoint());
        let rhs = rep.represent(&a.act(&rep.fs, &g)?)?;
        worst = worst.max(lhs.sub(&rhs).max_abs());
    }
    Ok(worst)
}
