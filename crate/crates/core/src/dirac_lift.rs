//! Horizontal lift, vertical Dirac operator and the assembled D_A on
//! H_A = H_p ⊗ H_spin, with the lift and commutator checks.

use rayon::prelude::*;

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::free_systems::{AlgebraElement, BlockOp, CovariantRep, RepresentedBase};
use crate::groups::IrrepData;
use crate::linalg::{compress, eigvals_hermitian, hermiticity_deviation, identity, kron, max_abs, op_norm, zeros, CMatrix};
use crate::report::VerificationReport;

/// Base spectral triple at truncation scale.
#[derive(Debug, Clone)]
pub struct BaseTriple {
    pub base: RepresentedBase,
    pub d_b: CMatrix,
}

impl BaseTriple {
    pub fn new(base: RepresentedBase, d_b: CMatrix) -> Result<Self> {
        if d_b.shape() != (base.hb_dim, base.hb_dim) {
            return Err(Error::ShapeMismatch(format!("D_B is {:?}, base dimension {}", d_b.shape(), base.hb_dim)));
        }
        let deviation = hermiticity_deviation(&d_b);
        if deviation > 1e-12 * max_abs(&d_b).max(1.0) {
            return Err(Error::NotHermitian { deviation, tolerance: 1e-12 });
        }
        Ok(BaseTriple { base, d_b })
    }
}

/// D_h blocks D_σ ⊗ 1_{V̄_σ}, one per H_p block.
#[derive(Debug, Clone)]
pub struct HorizontalLift {
    pub blocks: Vec<CMatrix>,
}

/// Vertical Dirac blocks v_σ = Σ_k dσ̄(X_k) ⊗ F_k on V̄_σ ⊗ H_spin; the
/// H_p-level block is 1_rank ⊗ v_σ.
#[derive(Debug, Clone)]
pub struct VerticalDirac {
    pub blocks: Vec<CMatrix>,
    pub spin_dim: usize,
}

#[derive(Debug, Clone)]
pub struct AssembledTriple {
    pub rep: CovariantRep,
    pub d_b: CMatrix,
    /// D_A blocks on (range p(σ)) ⊗ V̄_σ ⊗ H_spin.
    pub blocks: Vec<CMatrix>,
    pub vertical: VerticalDirac,
    pub generators: Vec<CMatrix>,
    pub spin_dim: usize,
    /// Unit spinor χ of the lift isometry t(ξ) = ξ ⊗ χ.
    pub chi: CMatrix,
}

/// D_σ = compress(p(σ), d_b ⊗ 1_{m_σ}), amplified by 1_{V̄_σ}.
pub fn horizontal_lift(triple: &BaseTriple, rep: &CovariantRep) -> Result<HorizontalLift> {
    let fs = &rep.fs;
    if triple.base.hb_dim != fs.hb_dim {
        return Err(Error::ShapeMismatch(format!(
            "base dimension {} vs factor system {}",
            triple.base.hb_dim, fs.hb_dim
        )));
    }
    let blocks = rep
        .blocks
        .par_iter()
        .map(|b| {
            let data = fs.label(&b.label)?;
            let amplified = kron(&triple.d_b, &identity(b.mult));
            let d_sigma = match &data.range {
                None => amplified,
                Some(_) => compress(&data.p, &amplified)?,
            };
            Ok(kron(&d_sigma, &identity(b.dim)))
        })
        .collect::<Result<_>>()?;
    Ok(HorizontalLift { blocks })
}

/// v_σ = Σ_k dσ̄(X_k) ⊗ F_k per block; zero blocks for discrete groups.
pub fn vertical_dirac(rep: &CovariantRep, cliff: &CliffordRep) -> Result<VerticalDirac> {
    let group = &rep.fs.group;
    if group.lie_dim > 0 && cliff.n != group.lie_dim {
        return Err(Error::DimensionMismatch {
            expected: group.lie_dim,
            found: cliff.n,
        });
    }
    let s = cliff.spin_dim;
    let mut blocks = Vec::with_capacity(rep.blocks.len());
    for b in &rep.blocks {
        let irrep = IrrepData::new(group, &b.label)?;
        let mut v = zeros(b.dim * s, b.dim * s);
        for (dk, fk) in irrep.derived_conj().iter().zip(&cliff.generators) {
            v += kron(dk, fk);
        }
        blocks.push(v);
    }
    Ok(VerticalDirac { blocks, spin_dim: s })
}

fn lift_spinor(cliff: &CliffordRep) -> Result<CMatrix> {
    cliff.even_unit_vector()
}

/// D_A = D_h ⊗ γ_spin + 1 ⊗ v_σ blockwise.
pub fn assemble(triple: &BaseTriple, rep: &CovariantRep, h: &HorizontalLift, v: &VerticalDirac, cliff: &CliffordRep) -> Result<AssembledTriple> {
    let gamma = cliff.grading.as_ref().ok_or(Error::GradingMissing)?;
    let blocks = rep
        .blocks
        .par_iter()
        .zip(h.blocks.par_iter().zip(v.blocks.par_iter()))
        .map(|(b, (dh, dv))| kron(dh, gamma) + kron(&identity(b.rank), dv))
        .collect();
    Ok(AssembledTriple {
        rep: rep.clone(),
        d_b: triple.d_b.clone(),
        blocks,
        vertical: v.clone(),
        generators: triple.base.generators.iter().map(|(_, g)| g.clone()).collect(),
        spin_dim: cliff.spin_dim,
        chi: lift_spinor(cliff)?,
    })
}

/// Even variant D' = D_h ⊗ 1 + Γ ⊗ v_σ, with Γ the compression of γ_B ⊗ 1.
pub fn assemble_even(triple: &BaseTriple, rep: &CovariantRep, h: &HorizontalLift, v: &VerticalDirac, gamma_b: &CMatrix) -> Result<AssembledTriple> {
    let n = triple.base.hb_dim;
    if gamma_b.shape() != (n, n) {
        return Err(Error::NotAGrading(format!("grading has shape {:?}", gamma_b.shape())));
    }
    let checks = [
        ("self-adjoint", max_abs(&(gamma_b - gamma_b.adjoint()))),
        ("unitary", max_abs(&(gamma_b * gamma_b - identity(n)))),
        ("anticommutes with D_B", max_abs(&(gamma_b * &triple.d_b + &triple.d_b * gamma_b))),
    ];
    for (what, dev) in checks {
        if dev > 1e-10 {
            return Err(Error::NotAGrading(format!("grading is not {what} (deviation {dev:.3e})")));
        }
    }
    for (name, g) in &triple.base.generators {
        let dev = max_abs(&(gamma_b * g - g * gamma_b));
        if dev > 1e-10 {
            return Err(Error::NotAGrading(format!(
                "grading does not commute with generator {name} (deviation {dev:.3e})"
            )));
        }
    }
    let s = v.spin_dim;
    let fs = &rep.fs;
    let mut blocks = Vec::with_capacity(rep.blocks.len());
    for ((b, dh), dv) in rep.blocks.iter().zip(&h.blocks).zip(&v.blocks) {
        let data = fs.label(&b.label)?;
        let amplified = kron(gamma_b, &identity(b.mult));
        let g_sigma = match &data.range {
            None => amplified,
            Some(q) => q.adjoint() * amplified * q,
        };
        blocks.push(kron(dh, &identity(s)) + kron(&g_sigma, dv));
    }
    let mut chi = zeros(s, 1);
    chi[(0, 0)] = crate::linalg::ONE;
    Ok(AssembledTriple {
        rep: rep.clone(),
        d_b: triple.d_b.clone(),
        blocks,
        vertical: v.clone(),
        generators: triple.base.generators.iter().map(|(_, g)| g.clone()).collect(),
        spin_dim: s,
        chi,
    })
}

impl AssembledTriple {
    pub fn block_sizes(&self) -> Vec<usize> {
        self.rep.blocks.iter().map(|b| b.size() * self.spin_dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.block_sizes().iter().sum()
    }

    pub fn d_a(&self) -> BlockOp {
        let mut op = BlockOp::new();
        for (i, m) in self.blocks.iter().enumerate() {
            op.add_block(i, i, m.clone());
        }
        op
    }

    /// π_A(a) ⊗ 1_spin.
    pub fn represent(&self, a: &AlgebraElement) -> Result<BlockOp> {
        Ok(self.rep.represent(a)?.kron_right(&identity(self.spin_dim)))
    }

    /// Eigenvalues of every block, ascending, in block order.
    pub fn spectrum(&self) -> Result<Vec<Vec<f64>>> {
        self.blocks.par_iter().map(eigvals_hermitian).collect()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.blocks.iter().map(hermiticity_deviation).fold(0.0, f64::max)
    }

    /// t: H_B → trivial block of H_A, ξ ↦ ξ ⊗ χ (lifted by Q when p(𝟙) ≠ 1).
    pub fn lift_isometry(&self) -> CMatrix {
        self.lift_isometry_with(&self.chi)
    }

    pub fn lift_isometry_with(&self, chi: &CMatrix) -> CMatrix {
        let t0 = self.rep.trivial_block();
        let data = &self.rep.fs.labels[&self.rep.blocks[t0].label];
        let base = match &data.range {
            None => identity(self.rep.fs.hb_dim),
            Some(q) => q.adjoint(),
        };
        kron(&base, chi)
    }

    /// ‖[D̂_v, 1 ⊗ γ_spin]_+‖ given the grading.
    pub fn vertical_anticommutation(&self, cliff: &CliffordRep) -> Result<f64> {
        let g = cliff.grading.as_ref().ok_or(Error::GradingMissing)?;
        Ok(self
            .vertical
            .blocks
            .iter()
            .map(|v| {
                let d = v.nrows() / self.spin_dim;
                let gg = kron(&identity(d), g);
                max_abs(&(&gg * v + v * &gg))
            })
            .fold(0.0, f64::max))
    }
}

/// Both clauses of the lift property for spinor χ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftReport {
    pub dirac_deviation: f64,
    pub representation_deviation: f64,
}

pub fn check_lift(t: &AssembledTriple) -> Result<LiftReport> {
    check_lift_with(t, &t.chi)
}

pub fn check_lift_with(t: &AssembledTriple, chi: &CMatrix) -> Result<LiftReport> {
    let iso = t.lift_isometry_with(chi);
    let t0 = t.rep.trivial_block();
    let dirac_deviation = op_norm(&(&t.blocks[t0] * &iso - &iso * &t.d_b));
    let mut rep_dev: f64 = 0.0;
    for g in &t.generators {
        let pi = t.rep.represent_base(g)?;
        for (i, _) in t.rep.blocks.iter().enumerate() {
            let Some(block) = pi.blocks.get(&(i, t0)) else { continue };
            let amplified = kron(block, &identity(t.spin_dim)) * &iso;
            let diff = if i == t0 { amplified - &iso * g } else { amplified };
            rep_dev = rep_dev.max(op_norm(&diff));
        }
    }
    Ok(LiftReport {
        dirac_deviation,
        representation_deviation: rep_dev,
    })
}

/// Both sides of [D̂_v, π_A(a)] = Σ_k π_A(∂_{X_k} a) ⊗ F_k and their difference.
pub struct VerticalCommutator {
    pub lhs: BlockOp,
    pub rhs: BlockOp,
    pub residual: f64,
}

pub fn vertical_commutator(t: &AssembledTriple, cliff: &CliffordRep, a: &AlgebraElement) -> Result<VerticalCommutator> {
    let fs = &t.rep.fs;
    let mut dv = BlockOp::new();
    for (i, (b, v)) in t.rep.blocks.iter().zip(&t.vertical.blocks).enumerate() {
        dv.add_block(i, i, kron(&identity(b.rank), v));
    }
    let pi = t.represent(a)?;
    let lhs = dv.commutator(&pi);
    let mut rhs = BlockOp::new();
    for k in 0..fs.group.lie_dim {
        let dk = t.rep.represent(&a.derive(fs, k)?)?.kron_right(&cliff.generators[k]);
        for ((r, c), m) in dk.blocks {
            rhs.add_block(r, c, m);
        }
    }
    let residual = lhs.sub(&rhs).max_abs();
    Ok(VerticalCommutator { lhs, rhs, residual })
}

/// Worst vertical commutator residual over `samples` random elements, each
/// supported on three window labels.
pub fn vertical_commutator_sweep(t: &AssembledTriple, cliff: &CliffordRep, base: &RepresentedBase, samples: usize, seed: u64) -> Result<f64> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let a = AlgebraElement::random(&t.rep.fs, base, &mut rng, 3)?;
        worst = worst.max(vertical_commutator(t, cliff, &a)?.residual);
    }
    Ok(worst)
}

/// Largest multiset distance between the spectrum of each vertical block
/// built on H (1_m ⊗ v_σ) and on H_p (1_rank ⊗ v_σ) and the replicated
/// spectrum of the bare v_σ.
pub fn vertical_block_spectrum_deviation(t: &AssembledTriple) -> Result<f64> {
    let fs = &t.rep.fs;
    let deviations: Vec<f64> = t
        .rep
        .blocks
        .par_iter()
        .zip(t.vertical.blocks.par_iter())
        .map(|(b, v)| -> Result<f64> {
            let oracle = eigvals_hermitian(v)?;
            let mut worst: f64 = 0.0;
            for copies in [fs.label(&b.label)?.mult, b.rank] {
                if copies == 0 {
                    continue;
                }
                let full = eigvals_hermitian(&kron(&identity(copies), v))?;
                let mut expected: Vec<f64> = oracle.iter().flat_map(|&x| std::iter::repeat(x).take(copies)).collect();
                expected.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                worst = worst.max(multiset_distance(&full, &expected));
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    Ok(deviations.into_iter().fold(0.0, f64::max))
}

/// Max |a_i − b_i| of two ascending lists; infinite on a length mismatch.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Report-only commutator profile: sup_τ ‖[D_B⊗1, γ_τ(b)]‖ per generator,
/// sup_τ ‖[D_B⊗1, ω(σ,τ)]‖ per element label and ‖[D_A, π_A(a)]‖.
pub fn commutator_report(t: &AssembledTriple, elements: &[(String, AlgebraElement)]) -> Result<VerificationReport> {
    let fs = &t.rep.fs;
    let hb = fs.hb_dim;
    let mut report = VerificationReport::new();
    for (gi, g) in t.generators.iter().enumerate() {
        let mut sup: f64 = 0.0;
        for b in &t.rep.blocks {
            let m = b.mult;
            let db = kron(&t.d_b, &identity(m));
            let gamma = fs.gamma(&b.label, g)?;
            sup = sup.max(op_norm(&(&db * &gamma - &gamma * &db)));
        }
        report.record(&format!("coaction_commutator_sup[{gi}]"), "sup over window of ||[D_B x 1, gamma_t(b)]||", sup);
    }
    let d_a = t.d_a();
    let sizes = t.block_sizes();
    for (name, a) in elements {
        for sigma in a.terms.keys() {
            let mut sup: f64 = 0.0;
            for b in &t.rep.blocks {
                let w = fs.cocycle(sigma, &b.label)?;
                if w.parts.is_empty() {
                    continue;
                }
                let ms = fs.mult(sigma)?;
                let left = kron(&t.d_b, &identity(w.total_mult));
                let right = kron(&t.d_b, &identity(ms * b.mult));
                sup = sup.max(op_norm(&(&left * &w.matrix - &w.matrix * &right)));
            }
            debug_assert!(hb > 0);
            report.record(
                &format!("cocycle_commutator_sup[{name},{sigma}]"),
                "sup over window of ||[D_B x 1, omega(s,t)]||",
                sup,
            );
        }
        let pi = t.represent(a)?;
        let norm = d_a.commutator(&pi).op_norm(&sizes);
        report.record(&format!("dirac_commutator[{name}]"), "||[D_A, pi_A(a)]||", norm);
    }
    Ok(report)
}

/// Outcome of the compression identity and Weyl bound for one (D, p) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionReport {
    pub identity_residual: f64,
    pub bound: f64,
    pub max_shift: f64,
    pub violations: usize,
}

/// pDp + (1−p)D(1−p) = D + [[D,p],(1−p)] and |λ_i(D̃_p) − λ_i(D)| ≤ ‖[[D,p],(1−p)]‖.
pub fn check_compression_bound(d: &CMatrix, p: &CMatrix) -> Result<CompressionReport> {
    let deviation = crate::linalg::projection_deviation(p);
    if deviation > 1e-9 {
        return Err(Error::NotProjection { deviation });
    }
    if d.shape() != p.shape() {
        return Err(Error::ShapeMismatch(format!("D {:?} vs p {:?}", d.shape(), p.shape())));
    }
    let n = d.nrows();
    let q = identity(n) - p;
    let split = p * d * p + &q * d * &q;
    let inner = d * p - p * d;
    let correction = &inner * &q - &q * &inner;
    let identity_residual = max_abs(&(&split - (d + &correction)));
    let bound = op_norm(&correction);
    let before = eigvals_hermitian(d)?;
    let after = eigvals_hermitian(&split)?;
    let slack = 1e-10 * max_abs(d).max(1.0);
    let mut max_shift: f64 = 0.0;
    let mut violations = 0;
    for (x, y) in before.iter().zip(&after) {
        let shift = (x - y).abs();
        max_shift = max_shift.max(shift);
        if shift > bound + slack {
            violations += 1;
        }
    }
    Ok(CompressionReport {
        identity_residual,
        bound,
        max_shift,
        violations,
    })
}

/// Counting function and nested-window stabilization of low-lying spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    /// (window, Λ, #{|λ| ≤ Λ})
    pub counts: Vec<(usize, f64, usize)>,
    /// (smaller window, larger window, max deviation of eigenvalues with |λ| < cutoff)
    pub stabilization: Vec<(usize, usize, f64)>,
}

/// `family` holds (window size, all eigenvalues, cutoff below which the
/// spectrum of that window is complete).
pub fn spectrum_growth_report(family: &[(usize, Vec<f64>, f64)], levels: &[f64]) -> Result<GrowthReport> {
    if family.len() < 2 {
        return Err(Error::InsufficientData);
    }
    let mut counts = Vec::new();
    for (n, eig, _) in family {
        for &lambda in levels {
            counts.push((*n, lambda, eig.iter().filter(|x| x.abs() <= lambda + 1e-12).count()));
        }
    }
    let mut stabilization = Vec::new();
    for pair in family.windows(2) {
        let (n0, e0, cut) = &pair[0];
        let (n1, e1, _) = &pair[1];
        let mut low0: Vec<f64> = e0.iter().copied().filter(|x| x.abs() < *cut).collect();
        let mut low1: Vec<f64> = e1.iter().copied().filter(|x| x.abs() < *cut).collect();
        low0.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        low1.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        stabilization.push((*n0, *n1, multiset_distance(&low0, &low1)));
    }
    Ok(GrowthReport { counts, stabilization })
}

/// ‖[D_B ⊗ 1, γ_τ(b)]‖ for every window label τ.
pub fn gauge_commutator_norms(t: &AssembledTriple, b: &CMatrix) -> Result<Vec<(String, f64)>> {
    let fs = &t.rep.fs;
    t.rep
        .blocks
        .iter()
        .map(|blk| {
            let db = kron(&t.d_b, &identity(blk.mult));
            let g = fs.gamma(&blk.label, b)?;
            Ok((blk.label.to_string(), op_norm(&(&db * &g - &g * &db))))
        })
        .collect()
}
