//! Quantum 4-tori A⁴_θ as free 𝕋²-systems over A²_θ' (gauge action on u₃, u₄).
//!
//! Modes are e_k = u₁^{k₁}u₂^{k₂}u₃^{k₃}u₄^{k₄}Ω on a Fourier box, so u_j acts
//! as the shift k ↦ k + e_j with phase Π_{a<j} λ_{j,a}^{k_a}. K carries the
//! base modes (k₁,k₂) ⊗ ℂ² as H_B and (k₃,k₄) as fibers; V is the identity.
//! The gauge action multiplies e_k by z^{−(k₃,k₄)}, making s(k,ℓ) = u(k,ℓ)*
//! with u(k,ℓ) = u₄^ℓ u₃^k equivariant for the character z^{(k,ℓ)}.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::clifford::{build_clifford, CliffordRep};
use crate::dirac_lift::{assemble, horizontal_lift, vertical_dirac, AssembledTriple, BaseTriple};
use crate::error::{Error, Result};
use crate::free_systems::total::SparseVec;
use crate::free_systems::{AlgebraElement, CovariantRep, FactorSystem, Monomial, RepresentedBase, TotalOp, TotalSystem};
use crate::groups::{box_points, GroupModel, GroupPoint, TruncationWindow};
use crate::linalg::{c64, eigvals_hermitian, op_norm, zeros, CMatrix, C64, I, ONE, ZERO};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumTorusSpec {
    /// Real skew-symmetric; u_j u_l = exp(2πiθ_jl) u_l u_j.
    pub theta: [[f64; 4]; 4],
    /// Label window |k₃|,|k₄| ≤ radius.
    pub radius: usize,
    /// Base Fourier box |k₁|,|k₂| ≤ base_radius.
    pub base_radius: usize,
}

impl QuantumTorusSpec {
    pub fn new(theta: [[f64; 4]; 4], radius: usize) -> Self {
        QuantumTorusSpec {
            theta,
            radius,
            base_radius: radius,
        }
    }

    /// θ₁₃ = θ₁₄ = θ₂₃ = θ₂₄ = t, all other independent entries 0.
    pub fn mixed(t: f64, radius: usize) -> Self {
        let mut theta = [[0.0; 4]; 4];
        for (a, b) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            theta[a][b] = t;
            theta[b][a] = -t;
        }
        Self::new(theta, radius)
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..4 {
            for b in 0..4 {
                let (x, y) = (self.theta[a][b], self.theta[b][a]);
                if !x.is_finite() {
                    return Err(Error::BadTheta(format!("theta[{a}][{b}] is not finite")));
                }
                if (x + y).abs() > 1e-12 {
                    return Err(Error::BadTheta(format!("theta[{a}][{b}] = {x} but theta[{b}][{a}] = {y}")));
                }
            }
        }
        Ok(())
    }
}

/// Mode boxes and the index maps of H_B and K.
#[derive(Debug, Clone, Copy)]
struct Layout {
    base_radius: i64,
    fiber_radius: i64,
}

impl Layout {
    fn base_side(&self) -> usize {
        2 * self.base_radius as usize + 1
    }

    fn fiber_side(&self) -> usize {
        2 * self.fiber_radius as usize + 1
    }

    fn hb_dim(&self) -> usize {
        self.base_side().pow(2) * 2
    }

    fn fiber_dim(&self) -> usize {
        self.fiber_side().pow(2)
    }

    fn base_index(&self, k1: i64, k2: i64, spin: usize) -> Option<usize> {
        let r = self.base_radius;
        (k1.abs() <= r && k2.abs() <= r).then(|| ((k1 + r) as usize * self.base_side() + (k2 + r) as usize) * 2 + spin)
    }

    fn fiber_index(&self, k3: i64, k4: i64) -> Option<usize> {
        let r = self.fiber_radius;
        (k3.abs() <= r && k4.abs() <= r).then(|| (k3 + r) as usize * self.fiber_side() + (k4 + r) as usize)
    }

    fn decode_base(&self, i: usize) -> (i64, i64, usize) {
        let (mode, spin) = (i / 2, i % 2);
        let s = self.base_side();
        ((mode / s) as i64 - self.base_radius, (mode % s) as i64 - self.base_radius, spin)
    }

    fn decode_fiber(&self, l: usize) -> (i64, i64) {
        let s = self.fiber_side();
        ((l / s) as i64 - self.fiber_radius, (l % s) as i64 - self.fiber_radius)
    }

    /// (k, spin) of a K index.
    fn decode_k(&self, idx: usize) -> ([i64; 4], usize) {
        let (i, l) = (idx / self.fiber_dim(), idx % self.fiber_dim());
        let (k1, k2, spin) = self.decode_base(i);
        let (k3, k4) = self.decode_fiber(l);
        ([k1, k2, k3, k4], spin)
    }

    fn encode_k(&self, k: [i64; 4], spin: usize) -> Option<usize> {
        Some(self.base_index(k[0], k[1], spin)? * self.fiber_dim() + self.fiber_index(k[2], k[3])?)
    }
}

#[derive(Debug, Clone)]
pub struct QuantumTorus {
    pub spec: QuantumTorusSpec,
    /// λ_{j,l} = exp(2πiθ_{j,l}).
    pub lambda: [[C64; 4]; 4],
    pub base: RepresentedBase,
    pub d2: CMatrix,
    pub total: Arc<TotalSystem>,
    pub factor: Arc<FactorSystem>,
    pub rep: CovariantRep,
    layout: Layout,
}

fn lambdas(theta: &[[f64; 4]; 4]) -> [[C64; 4]; 4] {
    let mut out = [[ONE; 4]; 4];
    for (a, row) in theta.iter().enumerate() {
        for (b, t) in row.iter().enumerate() {
            out[a][b] = (I * (2.0 * PI * t)).exp();
        }
    }
    out
}

/// u_j on the mode box: shift by e_j with phase Π_{a<j} λ_{j,a}^{k_a}.
fn generator_monomial(layout: &Layout, lambda: &[[C64; 4]; 4], j: usize) -> Monomial {
    let n = layout.hb_dim() * layout.fiber_dim();
    let cols = (0..n)
        .map(|col| {
            let (mut k, spin) = layout.decode_k(col);
            let phase = (0..j).fold(ONE, |acc, a| acc * lambda[j][a].powi(k[a] as i32));
            k[j] += 1;
            layout.encode_k(k, spin).map(|row| (row, phase))
        })
        .collect();
    Monomial { rows: n, cols }
}

fn monomial_power(m: &Monomial, k: i64) -> Monomial {
    let step = if k < 0 { m.adjoint() } else { m.clone() };
    (0..k.unsigned_abs()).fold(Monomial::identity(m.rows), |acc, _| step.compose(&acc))
}

/// Restriction of a K operator that preserves the fiber (0,0) to H_B.
fn slice_restriction(layout: &Layout, m: &Monomial) -> CMatrix {
    let hb = layout.hb_dim();
    let l0 = layout.fiber_index(0, 0).expect("origin fiber");
    let mut out = zeros(hb, hb);
    for i in 0..hb {
        if let Some((row, c)) = m.cols[i * layout.fiber_dim() + l0] {
            let (ri, rl) = (row / layout.fiber_dim(), row % layout.fiber_dim());
            if rl == l0 {
                out[(ri, i)] = c;
            }
        }
    }
    out
}

/// Canonical D₂ = Σ_j ∂_j ⊗ F_j on the base box, ∂_j e_k = i k_j e_k.
fn canonical_d2(layout: &Layout) -> CMatrix {
    let cl = build_clifford(2, true);
    let hb = layout.hb_dim();
    let mut d = zeros(hb, hb);
    for mode in 0..hb / 2 {
        let (k1, k2, _) = layout.decode_base(mode * 2);
        let block = (&cl.generators[0] * c64(0.0, k1 as f64)) + (&cl.generators[1] * c64(0.0, k2 as f64));
        d.view_mut((mode * 2, mode * 2), (2, 2)).copy_from(&block);
    }
    d
}

impl QuantumTorus {
    pub fn new(spec: QuantumTorusSpec) -> Result<Self> {
        spec.validate()?;
        let radius = spec.radius as i64;
        let layout = Layout {
            base_radius: spec.base_radius as i64,
            fiber_radius: radius + 1,
        };
        let lambda = lambdas(&spec.theta);
        let gens: Vec<Monomial> = (0..4).map(|j| generator_monomial(&layout, &lambda, j)).collect();
        let base = RepresentedBase::new(
            layout.hb_dim(),
            (0..2).map(|j| (format!("u{}", j + 1), slice_restriction(&layout, &gens[j]))).collect(),
        )?;
        let window = TruncationWindow::torus_box(2, radius);
        let mut isometries = BTreeMap::new();
        for label in window.margin.iter() {
            let k = label.torus().expect("torus label");
            let u = monomial_power(&gens[3], k[1]).compose(&monomial_power(&gens[2], k[0]));
            isometries.insert(label.clone(), (1, TotalOp::Monomial(u.adjoint())));
        }
        let hb = layout.hb_dim();
        let l_dim = layout.fiber_dim();
        let action = Arc::new(move |g: &GroupPoint| {
            let GroupPoint::Torus(t) = g else { unreachable!("torus gauge action") };
            let phases: Vec<C64> = (0..hb * l_dim)
                .map(|idx| {
                    let (k, _) = layout.decode_k(idx);
                    (I * (-(k[2] as f64 * t[0] + k[3] as f64 * t[1]))).exp()
                })
                .collect();
            TotalOp::Monomial(Monomial::diagonal(&phases))
        });
        let interior = (0..l_dim)
            .map(|l| {
                let (a, b) = layout.decode_fiber(l);
                a.abs().max(b.abs()) <= layout.fiber_radius - radius
            })
            .collect();
        let total = Arc::new(TotalSystem::new(
            GroupModel::torus(2),
            window,
            hb,
            l_dim,
            layout.fiber_index(0, 0).expect("origin fiber"),
            TotalOp::Monomial(Monomial::identity(hb * l_dim)),
            isometries,
            action,
            interior,
        )?);
        let factor = Arc::new(FactorSystem::from_total(total.clone(), 1e-10)?);
        let rep = CovariantRep::new(factor.clone())?;
        Ok(QuantumTorus {
            d2: canonical_d2(&layout),
            spec,
            lambda,
            base,
            total,
            factor,
            rep,
            layout,
        })
    }

    /// u_j (j = 0..4) on K.
    pub fn generator(&self, j: usize) -> Monomial {
        generator_monomial(&self.layout, &self.lambda, j)
    }

    /// Decomposition of an operator on K into window components.
    pub fn element(&self, x: &TotalOp) -> Result<AlgebraElement> {
        let coeffs = self.total.decompose(x, self.factor.window.iter().cloned())?;
        let mut out = AlgebraElement::zero();
        for (label, c) in coeffs {
            out = out.add(&AlgebraElement::monomial(label, vec![c]));
        }
        Ok(out)
    }

    pub fn generator_element(&self, j: usize) -> Result<AlgebraElement> {
        self.element(&TotalOp::Monomial(self.generator(j)))
    }

    /// max over pairs j < l of |u_j u_l − λ_{jl} u_l u_j| on modes where both
    /// products stay in the box; returns (residual, interior, boundary).
    pub fn commutation_residual(&self) -> (f64, usize, usize) {
        let gens: Vec<Monomial> = (0..4).map(|j| self.generator(j)).collect();
        let (mut worst, mut interior, mut boundary) = (0.0_f64, 0, 0);
        for j in 0..4 {
            for l in j + 1..4 {
                let a = gens[j].compose(&gens[l]);
                let b = gens[l].compose(&gens[j]);
                for (x, y) in a.cols.iter().zip(&b.cols) {
                    match (x, y) {
                        (Some((ra, ca)), Some((rb, cb))) if ra == rb => {
                            interior += 1;
                            worst = worst.max((ca - self.lambda[j][l] * cb).norm());
                        }
                        (Some(_), Some(_)) => {
                            interior += 1;
                            worst = f64::INFINITY;
                        }
                        _ => boundary += 1,
                    }
                }
            }
        }
        (worst, interior, boundary)
    }

    /// max over window labels τ and j = 1, 2 of | ‖[D₂, γ_τ(u_j)]‖ − ‖[D₂, u_j]‖ |.
    pub fn gauge_deviation(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (_, u) in &self.base.generators {
            let reference = op_norm(&(&self.d2 * u - u * &self.d2));
            for tau in self.factor.window.iter() {
                let g = self.factor.gamma(tau, u)?;
                worst = worst.max((op_norm(&(&self.d2 * &g - &g * &self.d2)) - reference).abs());
            }
        }
        Ok(worst)
    }

    /// Φ: H_p → K, ψ_τ(ξ) ↦ s(τ)* e ξ, checked to intertwine π_A(u_j) with
    /// u_j on H_p columns whose modes stay one step inside both boxes.
    /// Returns (residual, interior, boundary).
    pub fn equivalence_residual(&self) -> Result<(f64, usize, usize)> {
        let lay = &self.layout;
        let hb = lay.hb_dim();
        let radius = self.spec.radius as i64;
        let (mut worst, mut interior, mut boundary) = (0.0_f64, 0, 0);
        for j in 0..4 {
            let u = TotalOp::Monomial(self.generator(j));
            let pi = self.rep.represent(&self.generator_element(j)?)?;
            for (c, blk) in self.rep.blocks.iter().enumerate() {
                let tau = blk.label.torus().expect("torus label");
                for i in 0..hb {
                    let (k1, k2, _) = lay.decode_base(i);
                    let inside = [k1, k2].iter().all(|k| k.abs() < lay.base_radius) && tau.iter().all(|k| k.abs() < radius);
                    if !inside {
                        boundary += 1;
                        continue;
                    }
                    interior += 1;
                    let unit = (0..hb).map(|r| if r == i { ONE } else { ZERO });
                    let rhs = u.apply_sparse(&phi(self, c, unit)?);
                    let mut lhs: BTreeMap<usize, C64> = BTreeMap::new();
                    for ((r, cc), m) in &pi.blocks {
                        if *cc != c {
                            continue;
                        }
                        let image = phi(self, *r, m.column(i).iter().copied())?;
                        for (idx, v) in image {
                            *lhs.entry(idx).or_insert(ZERO) += v;
                        }
                    }
                    for (idx, v) in rhs {
                        *lhs.entry(idx).or_insert(ZERO) -= v;
                    }
                    worst = worst.max(lhs.values().fold(0.0, |m, z| m.max(z.norm())));
                }
            }
        }
        Ok((worst, interior, boundary))
    }

    /// Mode (k₁, k₂) of every H_B index.
    pub fn base_modes(&self) -> Vec<(i64, i64)> {
        (0..self.layout.hb_dim())
            .map(|i| {
                let (a, b, _) = self.layout.decode_base(i);
                (a, b)
            })
            .collect()
    }
}

/// Φ applied to a vector supported on H_p block `block`.
fn phi(qt: &QuantumTorus, block: usize, coeffs: impl Iterator<Item = C64>) -> Result<SparseVec> {
    let label = &qt.rep.blocks[block].label;
    let iso = qt.total.isometry(label)?;
    let mut x: SparseVec = Vec::new();
    for (i, c) in coeffs.enumerate() {
        if c != ZERO {
            x.extend(qt.total.embed(i, qt.total.slice).into_iter().map(|(k, v)| (k, v * c)));
        }
    }
    Ok(iso.adjoint.apply_sparse(&x))
}

/// Base triple (A²_θ' on its Fourier box, canonical D₂), factor system and
/// the assembled D_A = D_h ⊗ γ + 1 ⊗ D_v.
pub fn build_quantum_torus(spec: QuantumTorusSpec, cliff: &CliffordRep) -> Result<(QuantumTorus, BaseTriple, AssembledTriple)> {
    let qt = QuantumTorus::new(spec)?;
    let triple = BaseTriple::new(qt.base.clone(), qt.d2.clone())?;
    let h = horizontal_lift(&triple, &qt.rep)?;
    let v = vertical_dirac(&qt.rep, cliff)?;
    let t = assemble(&triple, &qt.rep, &h, &v, cliff)?;
    Ok((qt, triple, t))
}

/// Spectrum of the canonical D₄ = Σ_j ∂_j ⊗ F_j (Cℓ(4) irrep) on the box
/// |k₁|,|k₂| ≤ base_radius, |k₃|,|k₄| ≤ radius, ascending.
pub fn canonical_d4_spectrum(base_radius: usize, radius: usize) -> Result<Vec<f64>> {
    let cl = build_clifford(4, true);
    let (rb, r) = (base_radius as i64, radius as i64);
    let mut out = Vec::new();
    for k12 in box_points(2, rb) {
        for k34 in box_points(2, r) {
            let k = [k12[0], k12[1], k34[0], k34[1]];
            let mut m = zeros(cl.spin_dim, cl.spin_dim);
            for (kj, f) in k.iter().zip(&cl.generators) {
                m += f * c64(0.0, *kj as f64);
            }
            out.extend(eigvals_hermitian(&m)?);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// All eigenvalues of the assembled operator, ascending.
pub fn assembled_spectrum(t: &AssembledTriple) -> Result<Vec<f64>> {
    let mut all: Vec<f64> = t.spectrum()?.into_iter().flatten().collect();
    all.sort_by(f64::total_cmp);
    Ok(all)
}
