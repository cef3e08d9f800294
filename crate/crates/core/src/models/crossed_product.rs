//! Crossed products B ⋊_α ℤ (with the dual circle action) and B ⋊_α ℤ_n.
//!
//! K = H_B ⊗ ℓ²(fibers) carries π(b) = α^{−n}(b) on fiber n and the shift
//! v: fiber n → n+1, so that v π(b) v* = π(α(b)). The dual action multiplies
//! fiber n by z^{−n}; then s(k) = v^{−k} is equivariant for the character
//! z^k and γ_k = α^{−k}.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::clifford::CliffordRep;
use crate::dirac_lift::{assemble, horizontal_lift, vertical_dirac, AssembledTriple, BaseTriple};
use crate::error::{Error, Result};
use crate::free_systems::{AlgebraElement, BlockOp, CovariantRep, FactorSystem, Monomial, RepresentedBase, TotalOp, TotalSystem};
use crate::groups::{GroupModel, GroupPoint, IrrepLabel, TruncationWindow};
use crate::linalg::{c64, identity, kron, max_abs, pauli, zeros, CMatrix, C64, I, ONE};

/// How α acts on H_B: α(b) = U b U*.
#[derive(Debug, Clone)]
pub enum Automorphism {
    Unitary(CMatrix),
    /// U e_i = e_{perm[i]}.
    Permutation(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftGroup {
    /// ℤ with labels |k| ≤ radius of the dual circle.
    Integers { radius: usize },
    /// ℤ_n, untruncated; needs α^n = id on B.
    Cyclic { order: u32 },
}

#[derive(Debug, Clone)]
pub struct CrossedProductSpec {
    pub base: RepresentedBase,
    pub automorphism: Automorphism,
    pub group: ShiftGroup,
}

#[derive(Debug, Clone)]
pub struct CrossedProduct {
    pub spec: CrossedProductSpec,
    pub implementer: CMatrix,
    pub total: Arc<TotalSystem>,
    pub factor: Arc<FactorSystem>,
    pub rep: CovariantRep,
    /// Fiber index n of every fiber slot.
    fibers: Vec<i64>,
}

fn implementer(a: &Automorphism, hb: usize) -> Result<CMatrix> {
    match a {
        Automorphism::Unitary(u) => {
            if u.shape() != (hb, hb) {
                return Err(Error::ShapeMismatch(format!("implementer is {:?}, base dimension {hb}", u.shape())));
            }
            Ok(u.clone())
        }
        Automorphism::Permutation(perm) => {
            if perm.len() != hb {
                return Err(Error::DimensionMismatch {
                    expected: hb,
                    found: perm.len(),
                });
            }
            let mut u = zeros(hb, hb);
            for (i, &j) in perm.iter().enumerate() {
                if j >= hb {
                    return Err(Error::ShapeMismatch(format!("permutation target {j} out of range")));
                }
                u[(j, i)] = ONE;
            }
            Ok(u)
        }
    }
}

fn power(u: &CMatrix, k: i64) -> CMatrix {
    let step = if k < 0 { u.adjoint() } else { u.clone() };
    (0..k.unsigned_abs()).fold(identity(u.nrows()), |acc, _| acc * &step)
}

/// Distance of x from span(basis), basis Frobenius-orthonormal.
fn span_residual(basis: &[CMatrix], x: &CMatrix) -> f64 {
    let mut r = x.clone();
    for b in basis {
        let c = b.iter().zip(x.iter()).map(|(p, q)| p.conj() * q).sum::<C64>();
        r -= b * c;
    }
    max_abs(&r)
}

/// Worst deviation of b ↦ U b U* from a *-automorphism of B: unitarity of U,
/// α^{±1}(generators) ∈ B, and α^n = id for ℤ_n.
pub fn automorphism_deviation(base: &RepresentedBase, u: &CMatrix, group: ShiftGroup) -> f64 {
    let n = u.nrows();
    let mut dev = max_abs(&(u.adjoint() * u - identity(n))).max(max_abs(&(u * u.adjoint() - identity(n))));
    let basis = base.span_basis(4);
    for (_, g) in &base.generators {
        dev = dev.max(span_residual(&basis, &(u * g * u.adjoint())));
        dev = dev.max(span_residual(&basis, &(u.adjoint() * g * u)));
        if let ShiftGroup::Cyclic { order } = group {
            let un = power(u, order as i64);
            dev = dev.max(max_abs(&(&un * g * un.adjoint() - g)));
        }
    }
    dev
}

impl CrossedProduct {
    pub fn new(spec: CrossedProductSpec) -> Result<Self> {
        Self::with_twist(spec, |_| None)
    }

    /// Same algebra with isometries s'(k) = π(w_k) s(k), w_k a unitary of B
    /// (None keeps s(k)). The factor system changes; the algebra does not.
    pub fn with_twist(spec: CrossedProductSpec, twist: impl Fn(i64) -> Option<CMatrix>) -> Result<Self> {
        let hb = spec.base.hb_dim;
        let u = implementer(&spec.automorphism, hb)?;
        let deviation = automorphism_deviation(&spec.base, &u, spec.group);
        if !(deviation <= 1e-10) {
            return Err(Error::AutomorphismInvalid { deviation });
        }
        let (group, window, fibers, slice, periodic) = match spec.group {
            ShiftGroup::Integers { radius } => {
                let far = 2 * radius as i64 + 2;
                let fibers: Vec<i64> = (-far..=far).collect();
                (GroupModel::torus(1), TruncationWindow::torus_box(1, radius as i64), fibers, far as usize, false)
            }
            ShiftGroup::Cyclic { order } => (
                GroupModel::cyclic(order),
                TruncationWindow::cyclic_all(order),
                (0..order as i64).collect(),
                0,
                true,
            ),
        };
        let l_dim = fibers.len();
        let amplification = TotalOp::fiberwise(&fibers.iter().map(|&n| power(&u, -n)).collect::<Vec<_>>());
        let mut isometries = BTreeMap::new();
        for label in window.margin.iter() {
            let k = label_integer(label);
            let s_k = TotalOp::Monomial(shift_power(hb, l_dim, -k, periodic));
            let s_k = match twist(k) {
                Some(w) => {
                    if w.shape() != (hb, hb) || max_abs(&(w.adjoint() * &w - identity(hb))) > 1e-10 {
                        return Err(Error::ShapeMismatch(format!("twist for label {k} is not a unitary on H_B")));
                    }
                    let on_k = TotalOp::fiberwise(
                        &fibers
                            .iter()
                            .map(|&n| {
                                let p = power(&u, -n);
                                &p * &w * p.adjoint()
                            })
                            .collect::<Vec<_>>(),
                    );
                    on_k.compose(&s_k)
                }
                None => s_k,
            };
            isometries.insert(label.clone(), (1, s_k));
        }
        let fiber_ids = fibers.clone();
        let order = match spec.group {
            ShiftGroup::Cyclic { order } => order as f64,
            ShiftGroup::Integers { .. } => 0.0,
        };
        let action = Arc::new(move |g: &GroupPoint| {
            let t = match g {
                GroupPoint::Torus(t) => t[0],
                GroupPoint::Cyclic(j) => 2.0 * PI * *j as f64 / order,
                GroupPoint::Euler { .. } => unreachable!("abelian dual group"),
            };
            let phases: Vec<C64> = (0..hb).flat_map(|_| fiber_ids.iter().map(|&n| (I * (-(n as f64) * t)).exp())).collect();
            TotalOp::Monomial(Monomial::diagonal(&phases))
        });
        let interior = match spec.group {
            ShiftGroup::Integers { radius } => {
                let reach = (fibers.len() as i64 - 1) / 2 - (radius as i64 + 1);
                fibers.iter().map(|n| n.abs() <= reach).collect()
            }
            ShiftGroup::Cyclic { .. } => vec![true; l_dim],
        };
        let total = Arc::new(TotalSystem::new(group, window, hb, l_dim, slice, amplification, isometries, action, interior)?);
        let factor = Arc::new(FactorSystem::from_total(total.clone(), 1e-10)?);
        let rep = CovariantRep::new(factor.clone())?;
        Ok(CrossedProduct {
            spec,
            implementer: u,
            total,
            factor,
            rep,
            fibers,
        })
    }

    /// α^k(b).
    pub fn alpha(&self, b: &CMatrix, k: i64) -> CMatrix {
        let u = power(&self.implementer, k);
        &u * b * u.adjoint()
    }

    pub fn label(&self, k: i64) -> IrrepLabel {
        match self.spec.group {
            ShiftGroup::Integers { .. } => IrrepLabel::Torus(vec![k]),
            ShiftGroup::Cyclic { order } => IrrepLabel::Cyclic {
                m: k.rem_euclid(order as i64) as u32,
                n: order,
            },
        }
    }

    /// π(b) on K.
    pub fn base_on_k(&self, b: &CMatrix) -> TotalOp {
        TotalOp::fiberwise(&self.fibers.iter().map(|&n| self.alpha(b, -n)).collect::<Vec<_>>())
    }

    /// v^k on K (truncated at the outer fibers for ℤ).
    pub fn shift(&self, k: i64) -> TotalOp {
        let periodic = matches!(self.spec.group, ShiftGroup::Cyclic { .. });
        TotalOp::Monomial(shift_power(self.spec.base.hb_dim, self.fibers.len(), k, periodic))
    }

    /// b v^k as an element of the algebra, read off the slice.
    pub fn element(&self, b: &CMatrix, k: i64) -> Result<AlgebraElement> {
        let x = self.base_on_k(b).compose(&self.shift(k));
        let label = self.label(k);
        let mut coeffs = self.total.decompose(&x, [label.clone()])?;
        let coeff = coeffs.remove(&label).unwrap_or_else(|| zeros(self.spec.base.hb_dim, self.spec.base.hb_dim));
        Ok(AlgebraElement::monomial(label, vec![coeff]))
    }
}

fn label_integer(label: &IrrepLabel) -> i64 {
    match label {
        IrrepLabel::Torus(k) => k[0],
        IrrepLabel::Cyclic { m, .. } => *m as i64,
        IrrepLabel::Spin(_) => unreachable!("abelian dual group"),
    }
}

/// Fiber shift l → l + k on H_B ⊗ ℂ^L, periodic or truncated.
fn shift_power(hb: usize, l_dim: usize, k: i64, periodic: bool) -> Monomial {
    let l = l_dim as i64;
    let cols = (0..hb * l_dim)
        .map(|col| {
            let (i, f) = (col / l_dim, (col % l_dim) as i64);
            let target = if periodic {
                Some((f + k).rem_euclid(l))
            } else {
                Some(f + k).filter(|t| (0..l).contains(t))
            };
            target.map(|t| (i * l_dim + t as usize, ONE))
        })
        .collect();
    Monomial { rows: hb * l_dim, cols }
}

/// B = ℂ^m acting diagonally, generated by the matrix units e_jj.
pub fn diagonal_base(m: usize) -> RepresentedBase {
    let gens = (0..m)
        .map(|j| {
            let mut e = zeros(m, m);
            e[(j, j)] = ONE;
            (format!("e{j}"), e)
        })
        .collect();
    RepresentedBase::new(m, gens).expect("square generators")
}

/// Runs the generic pipeline: factor system, covariant representation,
/// horizontal and vertical lifts, assembly.
pub fn build_crossed_product(spec: CrossedProductSpec, triple: &BaseTriple, cliff: &CliffordRep) -> Result<(CrossedProduct, AssembledTriple)> {
    if triple.base.hb_dim != spec.base.hb_dim {
        return Err(Error::ShapeMismatch("base triple and crossed-product base differ".into()));
    }
    let cp = CrossedProduct::new(spec)?;
    let h = horizontal_lift(triple, &cp.rep)?;
    let v = vertical_dirac(&cp.rep, cliff)?;
    let t = assemble(triple, &cp.rep, &h, &v, cliff)?;
    Ok((cp, t))
}

/// W with W σ₃ W* = σ₁ and W σ₁ W* = σ₂: rotation by 2π/3 about (1,1,1).
pub fn pauli_cycle() -> CMatrix {
    (identity(2) - (pauli(1) + pauli(2) + pauli(3)) * I) * c64(0.5, 0.0)
}

/// Closed-form mode blocks d_b ⊗ σ₁ + k·1 ⊗ σ₂ for |k| ≤ radius.
pub fn handcoded_blocks(d_b: &CMatrix, radius: i64) -> Vec<(i64, CMatrix)> {
    let one = identity(d_b.nrows());
    (-radius..=radius)
        .map(|k| (k, kron(d_b, &pauli(1)) + kron(&one, &pauli(2)) * c64(k as f64, 0.0)))
        .collect()
}

/// Generic D_A blocks rotated by 1 ⊗ W into the closed-form spinor basis;
/// needs the doubled one-generator Clifford representation.
pub fn aligned_blocks(cp: &CrossedProduct, t: &AssembledTriple) -> Vec<(i64, CMatrix)> {
    let w = kron(&identity(cp.spec.base.hb_dim), &pauli_cycle());
    cp.rep
        .blocks
        .iter()
        .zip(&t.blocks)
        .map(|(b, m)| (label_integer(&b.label), &w * m * w.adjoint()))
        .collect()
}

/// Largest entrywise difference between the aligned generic blocks and the
/// closed-form ones.
pub fn handcoded_deviation(cp: &CrossedProduct, t: &AssembledTriple) -> f64 {
    let ShiftGroup::Integers { radius } = cp.spec.group else {
        return f64::INFINITY;
    };
    let closed: BTreeMap<i64, CMatrix> = handcoded_blocks(&t.d_b, radius as i64).into_iter().collect();
    aligned_blocks(cp, t)
        .iter()
        .map(|(k, m)| {
            closed
                .get(k)
                .map_or(f64::INFINITY, |c| if c.shape() == m.shape() { max_abs(&(c - m)) } else { f64::INFINITY })
        })
        .fold(0.0, f64::max)
}

/// ℂ⁴ ⋊ ℤ₄ built twice: with s(k) = v^{−k} and with s'(k) = π(w_k) s(k) for
/// diagonal phase unitaries w_k. Returns both constructions and the paired
/// images of the generators e_j and v.
pub fn twisted_cyclic_pair(seed: u64) -> Result<(CrossedProduct, CrossedProduct, Vec<(BlockOp, BlockOp)>)> {
    use rand::{Rng, SeedableRng};
    let spec = CrossedProductSpec {
        base: diagonal_base(4),
        automorphism: Automorphism::Permutation(vec![1, 2, 3, 0]),
        group: ShiftGroup::Cyclic { order: 4 },
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<Vec<C64>> = (0..4).map(|_| (0..4).map(|_| (I * rng.gen_range(0.0..2.0 * PI)).exp()).collect()).collect();
    let plain = CrossedProduct::new(spec.clone())?;
    let twisted = CrossedProduct::with_twist(spec, |k| (k != 0).then(|| crate::linalg::diag(&phases[k.rem_euclid(4) as usize])))?;
    let mut gens = Vec::new();
    let mut pair = |b: &CMatrix, k: i64| -> Result<()> {
        gens.push((plain.rep.represent(&plain.element(b, k)?)?, twisted.rep.represent(&twisted.element(b, k)?)?));
        Ok(())
    };
    for (_, g) in &plain.spec.base.generators.clone() {
        pair(g, 0)?;
    }
    pair(&identity(4), 1)?;
    Ok((plain, twisted, gens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_clifford;
    use crate::linalg::{diag_real, null_space};

    fn cyclic_spec(radius: usize) -> CrossedProductSpec {
        CrossedProductSpec {
            base: diagonal_base(4),
            automorphism: Automorphism::Permutation(vec![1, 2, 3, 0]),
            group: ShiftGroup::Integers { radius },
        }
    }

    #[test]
    fn pauli_cycle_matches_a_solved_alignment() {
        // Solve W σ₃ = σ₁ W and W σ₁ = σ₂ W as a linear system in vec(W).
        let mut rows = zeros(16, 4);
        for (r, (a, b)) in [(pauli(3), pauli(1)), (pauli(1), pauli(2))].iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        // (W a)_{ij} − (b W)_{ij} on W_{ik} and W_{kj}
                        rows[(r * 8 + i * 2 + j, i * 2 + k)] += a[(k, j)];
                        rows[(r * 8 + i * 2 + j, k * 2 + j)] -= b[(i, k)];
                    }
                }
            }
        }
        let ns = null_space(&rows, 1e-6);
        assert_eq!(ns.ncols(), 1);
        let w = CMatrix::from_fn(2, 2, |i, j| ns[(i * 2 + j, 0)]);
        let ours = pauli_cycle();
        // Equal up to a phase.
        let phase = (ours.adjoint() * &w).trace() / c64(2.0, 0.0);
        assert!((phase.norm() - w.norm() / 2f64.sqrt()).abs() < 1e-10);
        assert!(max_abs(&(&ours * phase - &w)) < 1e-10);
        assert!(max_abs(&(&ours * pauli(3) * ours.adjoint() - pauli(1))) < 1e-15);
        assert!(max_abs(&(&ours * pauli(1) * ours.adjoint() - pauli(2))) < 1e-15);
    }

    #[test]
    fn gamma_is_inverse_powers_of_alpha() {
        let cp = CrossedProduct::new(cyclic_spec(2)).unwrap();
        let b = diag_real(&[1.0, 2.0, 3.0, 4.0]);
        for k in -2..=2 {
            let g = cp.factor.gamma(&cp.label(k), &b).unwrap();
            assert!(max_abs(&(g - cp.alpha(&b, -k))) < 1e-14);
        }
        let w = cp.factor.cocycle(&cp.label(1), &cp.label(-2)).unwrap();
        assert!(max_abs(&(&w.matrix - identity(4))) < 1e-14);
    }

    #[test]
    fn products_match_crossed_product_arithmetic() {
        let cp = CrossedProduct::new(cyclic_spec(2)).unwrap();
        let b = diag_real(&[1.0, -2.0, 0.5, 3.0]);
        let c = diag_real(&[0.0, 1.0, 2.0, -1.0]);
        for (k, l) in [(1, 0), (1, 1), (-1, 2), (2, -1), (0, -2)] {
            let lhs = cp.element(&b, k).unwrap().multiply(&cp.element(&c, l).unwrap(), &cp.factor).unwrap();
            let oracle = cp.element(&(&b * cp.alpha(&c, k)), k + l).unwrap();
            assert!(lhs.distance(&oracle, &cp.factor).unwrap() < 1e-14, "k={k} l={l}");
        }
    }

    #[test]
    fn involution_matches_crossed_product_adjoint() {
        let cp = CrossedProduct::new(cyclic_spec(2)).unwrap();
        let b = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(1.0, 1.0), c64(0.0, 2.0), c64(-1.0, 0.0), c64(0.5, -0.5)]));
        for k in [-2, -1, 1, 2] {
            let star = cp.rep.involution(&cp.element(&b, k).unwrap()).unwrap();
            let oracle = cp.element(&cp.alpha(&b.adjoint(), -k), -k).unwrap();
            assert!(star.distance(&oracle, &cp.factor).unwrap() < 1e-14);
        }
    }

    #[test]
    fn v_shifts_modes_up_by_one() {
        let cp = CrossedProduct::new(cyclic_spec(2)).unwrap();
        let v = cp.element(&identity(4), 1).unwrap();
        let pi = cp.rep.represent(&v).unwrap();
        for (i, bi) in cp.rep.blocks.iter().enumerate() {
            for (j, bj) in cp.rep.blocks.iter().enumerate() {
                let k_i = label_integer(&bi.label);
                let k_j = label_integer(&bj.label);
                let want = if k_i == k_j + 1 { identity(4) } else { zeros(4, 4) };
                let got = pi.blocks.get(&(i, j)).cloned().unwrap_or_else(|| zeros(4, 4));
                assert!(max_abs(&(got - want)) < 1e-15, "block ({k_i},{k_j})");
            }
        }
    }

    #[test]
    fn non_automorphism_is_rejected() {
        let mut spec = cyclic_spec(1);
        spec.automorphism = Automorphism::Permutation(vec![1, 1, 2, 3]);
        assert!(matches!(CrossedProduct::new(spec), Err(Error::AutomorphismInvalid { .. })));
        // Unitary, but mixes B out of the diagonal algebra.
        let mut spec = cyclic_spec(1);
        let h = (pauli(1) + pauli(3)) * c64(1.0 / 2f64.sqrt(), 0.0);
        spec.automorphism = Automorphism::Unitary(kron(&identity(2), &h));
        assert!(matches!(CrossedProduct::new(spec), Err(Error::AutomorphismInvalid { .. })));
    }

    #[test]
    fn generic_pipeline_matches_closed_form() {
        let spec = cyclic_spec(3);
        let d_b = diag_real(&[0.5, -1.0, 2.0, 3.0]);
        let triple = BaseTriple::new(spec.base.clone(), d_b).unwrap();
        let (cp, t) = build_crossed_product(spec, &triple, &build_clifford(1, true)).unwrap();
        assert!(handcoded_deviation(&cp, &t) < 1e-14);
    }

    #[test]
    fn cyclic_crossed_product_is_periodic() {
        let spec = CrossedProductSpec {
            base: diagonal_base(4),
            automorphism: Automorphism::Permutation(vec![1, 2, 3, 0]),
            group: ShiftGroup::Cyclic { order: 4 },
        };
        let cp = CrossedProduct::new(spec).unwrap();
        let v = cp.element(&identity(4), 1).unwrap();
        let v4 = (0..3).try_fold(v.clone(), |acc, _| acc.multiply(&v, &cp.factor)).unwrap();
        assert!(v4.distance(&AlgebraElement::unit(&cp.factor), &cp.factor).unwrap() < 1e-14);
    }
}

#[cfg(test)]
mod saturation_tests {
    use super::*;

    #[test]
    fn cyclic_blocks_are_saturated() {
        let base = diagonal_base(3);
        let spec = CrossedProductSpec { base: base.clone(), automorphism: Automorphism::Permutation(vec![1, 2, 0]), group: ShiftGroup::Cyclic { order: 3 } };
        let cp = CrossedProduct::new(spec).unwrap();
        for label in cp.factor.window.iter() {
            let r = cp.rep.isotypic_saturation(&base, label, 2).unwrap();
            assert_eq!(r.deficiency, 0, "{r:?}");
            assert_eq!(r.achieved, 3);
        }
    }

    #[test]
    fn truncated_integer_window_loses_nothing_at_the_edge() {
        // Every window block is built from its own coefficient data, so the
        // edge modes |k| = N are reached as well as the interior ones.
        let base = diagonal_base(4);
        let cp = CrossedProduct::new(CrossedProductSpec {
            base: base.clone(),
            automorphism: Automorphism::Permutation(vec![1, 2, 3, 0]),
            group: ShiftGroup::Integers { radius: 2 },
        })
        .unwrap();
        for k in -2..=2 {
            let r = cp.rep.isotypic_saturation(&base, &cp.label(k), 1).unwrap();
            assert_eq!((r.achieved, r.deficiency), (4, 0), "mode {k}");
        }
    }
}

#[cfg(test)]
mod twist_tests {
    use super::*;
    use crate::free_systems::{classify_covariant_reps, Classification};

    #[test]
    fn twisted_isometries_give_an_equivalent_representation() {
        let (plain, twisted, gens) = twisted_cyclic_pair(11).unwrap();
        let w = twisted.factor.cocycle(&twisted.label(1), &twisted.label(1)).unwrap();
        assert!(max_abs(&(&w.matrix - identity(4))) > 0.1, "twist should change the cocycle");
        match classify_covariant_reps(&plain.rep, &twisted.rep, &gens, 3).unwrap() {
            Classification::Equivalent { residual, intertwiner } => {
                assert!(residual < 1e-9, "{residual}");
                let n = intertwiner.nrows();
                assert!(max_abs(&(intertwiner.adjoint() * &intertwiner - identity(n))) < 1e-10);
            }
            Classification::Distinct { reason } => panic!("{reason}"),
        }
    }
}
