//! Homogeneous spaces G/H with H acting by right translation: the canonical
//! Dirac operator on G split along the module frames Y_k, Z_k, the lifted
//! operators D̂_h, D̂_v on the equivariant space and the comparison unitary U.
//!
//! The equivariant space is modelled through the trivialization ψ = s(g)*φ:
//! a state is a function Ψ(g, k) on G × H with values in Cℓ(G/H) ⊗ Cℓ(H)
//! satisfying Ψ(gh, kh) = Ad_h⁻¹ Ψ(g, k), and U reads off Ψ(g, 1).

mod su2;
mod torus;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::clifford::{exterior_clifford, parity, CliffordRep};
use crate::error::{Error, Result};
use crate::groups::{GroupKind, GroupPoint, IrrepData, IrrepLabel};
use crate::linalg::{c64, identity, kron, zeros, CMatrix, ONE};
use crate::report::VerificationReport;

pub use su2::{refinement_report, Su2Homogeneous};
pub use torus::TorusHomogeneous;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupSpec {
    /// Sub-torus t ↦ Σ_c t_c d_c for the listed integer directions d_c.
    Directions(Vec<Vec<i64>>),
    /// {exp(t X₃)} ⊂ SU(2).
    DiagonalU1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousSpec {
    pub group: GroupKind,
    pub subgroup: SubgroupSpec,
    /// Fourier box radius on a torus, 2j_max of the sampled states on SU(2).
    pub radius: usize,
    /// Quadrature resolution (SU(2) only).
    #[serde(default)]
    pub quadrature: usize,
}

impl HomogeneousSpec {
    pub fn torus(dim: usize, directions: Vec<Vec<i64>>, radius: usize) -> Self {
        HomogeneousSpec {
            group: GroupKind::Torus(dim),
            subgroup: SubgroupSpec::Directions(directions),
            radius,
            quadrature: 0,
        }
    }

    pub fn su2(twice_max_spin: usize, quadrature: usize) -> Self {
        HomogeneousSpec {
            group: GroupKind::SU2,
            subgroup: SubgroupSpec::DiagonalU1,
            radius: twice_max_spin,
            quadrature,
        }
    }

    pub fn lie_dim(&self) -> usize {
        match self.group {
            GroupKind::Torus(d) => d,
            GroupKind::SU2 => 3,
            GroupKind::Cyclic(_) => 0,
        }
    }
}

/// Orthonormal bases of Lie(G/H) (columns of `horizontal`) and Lie(H)
/// (columns of `vertical`) inside Lie(G) ≅ ℝⁿ.
#[derive(Debug, Clone)]
pub struct LieSplit {
    pub horizontal: DMatrix<f64>,
    pub vertical: DMatrix<f64>,
}

impl LieSplit {
    pub fn p_horizontal(&self) -> DMatrix<f64> {
        &self.horizontal * self.horizontal.transpose()
    }

    pub fn p_vertical(&self) -> DMatrix<f64> {
        &self.vertical * self.vertical.transpose()
    }
}

fn integer_det(m: &DMatrix<f64>) -> i64 {
    if m.nrows() == 0 {
        return 1;
    }
    m.determinant().round() as i64
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m & (1 << i) != 0).collect())
        .collect()
}

/// Gram–Schmidt of `candidates` against the columns already in `basis`.
fn extend_orthonormal(basis: &mut Vec<Vec<f64>>, candidates: impl IntoIterator<Item = Vec<f64>>) {
    for mut v in candidates {
        for b in basis.iter() {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
    }
}

fn columns(n: usize, vs: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(n, vs.len(), |r, c| vs[c][r])
}

/// Validate the subgroup data and split Lie(G).
pub fn lie_split(spec: &HomogeneousSpec) -> Result<LieSplit> {
    match (&spec.group, &spec.subgroup) {
        (GroupKind::Torus(d), SubgroupSpec::Directions(dirs)) => {
            let d = *d;
            let r = dirs.len();
            if r == 0 || r >= d {
                return Err(Error::UnsupportedSubgroup(format!(
                    "need between 1 and {} directions, got {r}",
                    d.saturating_sub(1)
                )));
            }
            if let Some(bad) = dirs.iter().find(|v| v.len() != d) {
                return Err(Error::UnsupportedSubgroup(format!("direction {bad:?} does not have length {d}")));
            }
            // t ↦ Dt is injective on T^r exactly when the maximal minors are coprime
            let dm = DMatrix::from_fn(d, r, |i, c| dirs[c][i] as f64);
            let g = subsets(d, r).iter().fold(0, |acc, rows| {
                let sub = DMatrix::from_fn(r, r, |i, c| dm[(rows[i], c)]);
                gcd(acc, integer_det(&sub))
            });
            if g != 1 {
                return Err(Error::UnsupportedSubgroup(format!(
                    "directions {dirs:?} do not span a primitive rank-{r} sublattice (minor gcd {g})"
                )));
            }
            let mut vertical = Vec::new();
            extend_orthonormal(&mut vertical, dirs.iter().map(|v| v.iter().map(|&x| x as f64).collect()));
            let mut all = vertical.clone();
            extend_orthonormal(&mut all, (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()));
            Ok(LieSplit {
                horizontal: columns(d, &all[r..]),
                vertical: columns(d, &vertical),
            })
        }
        (GroupKind::SU2, SubgroupSpec::DiagonalU1) => {
            let e = |k: usize| (0..3).map(|i| if i == k { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
            Ok(LieSplit {
                horizontal: columns(3, &[e(0), e(1)]),
                vertical: columns(3, &[e(2)]),
            })
        }
        (g, h) => Err(Error::UnsupportedSubgroup(format!("{h:?} in {g:?}"))),
    }
}

/// Ad_g on Lie(G) in the orthonormal basis X_k.
pub fn adjoint_matrix(group: GroupKind, g: &GroupPoint) -> DMatrix<f64> {
    match group {
        GroupKind::SU2 => {
            let half = IrrepData::new(&crate::groups::GroupModel::su2(), &IrrepLabel::Spin(1)).expect("spin 1/2");
            let u = half.sample(g);
            let x = &half.derived;
            // Ad_g X_b = Σ_a R_ab X_a with ⟨X, Y⟩ = −2 tr(XY)
            DMatrix::from_fn(3, 3, |a, b| (-2.0 * (&x[a] * &u * &x[b] * u.adjoint()).trace()).re)
        }
        GroupKind::Torus(d) => DMatrix::identity(d, d),
        GroupKind::Cyclic(_) => DMatrix::zeros(0, 0),
    }
}

/// ad_X on Lie(G) for X = Σ x_k X_k.
pub fn ad_matrix(group: GroupKind, x: &[f64]) -> DMatrix<f64> {
    match group {
        GroupKind::SU2 => {
            let half = IrrepData::new(&crate::groups::GroupModel::su2(), &IrrepLabel::Spin(1)).expect("spin 1/2");
            let gens = &half.derived;
            let mut xm = zeros(2, 2);
            for (c, g) in x.iter().zip(gens) {
                xm += g * c64(*c, 0.0);
            }
            DMatrix::from_fn(3, 3, |a, b| {
                let br = &xm * &gens[b] - &gens[b] * &xm;
                (-2.0 * (&gens[a] * br).trace()).re
            })
        }
        _ => DMatrix::zeros(x.len(), x.len()),
    }
}

/// Pointwise frames Y_k(g) = Ad_g P_{G/H} Ad_g⁻¹ X_k and Z_k(g) likewise;
/// column k of `horizontal[q]` is Y_k at `points[q]`.
#[derive(Debug, Clone)]
pub struct FrameField {
    pub points: Vec<GroupPoint>,
    pub ad: Vec<DMatrix<f64>>,
    pub horizontal: Vec<DMatrix<f64>>,
    pub vertical: Vec<DMatrix<f64>>,
}

impl FrameField {
    /// Worst of |Y_k + Z_k − X_k| and |⟨Y_k, Z_l⟩| over all points.
    pub fn deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (y, z) in self.horizontal.iter().zip(&self.vertical) {
            let n = y.nrows();
            worst = worst.max((y + z - DMatrix::<f64>::identity(n, n)).abs().max());
            worst = worst.max((y.transpose() * z).abs().max());
        }
        worst
    }

    /// Σ_k |Y_k(g)|² + |Z_k(g)|² at every point.
    pub fn norm_sums(&self) -> Vec<f64> {
        self.horizontal
            .iter()
            .zip(&self.vertical)
            .map(|(y, z)| y.norm_squared() + z.norm_squared())
            .collect()
    }
}

pub fn frame_field(spec: &HomogeneousSpec, points: &[GroupPoint]) -> Result<FrameField> {
    let split = lie_split(spec)?;
    Ok(frames_with(&split, spec.group, points))
}

fn frames_with(split: &LieSplit, group: GroupKind, points: &[GroupPoint]) -> FrameField {
    let (ph, pv) = (split.p_horizontal(), split.p_vertical());
    let mut out = FrameField {
        points: points.to_vec(),
        ad: vec![],
        horizontal: vec![],
        vertical: vec![],
    };
    for g in points {
        let ad = adjoint_matrix(group, g);
        out.horizontal.push(&ad * &ph * ad.transpose());
        out.vertical.push(&ad * &pv * ad.transpose());
        out.ad.push(ad);
    }
    out
}

fn blades(n: usize, k: usize) -> impl Iterator<Item = usize> {
    (0usize..1 << n).filter(move |b| b.count_ones() as usize == k)
}

fn bits(blade: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|&i| blade & (1 << i) != 0).collect()
}

/// Λ(M) on the blade basis of Λℂⁿ: entry (I, J) is the minor det M[I, J].
pub fn exterior_power(m: &DMatrix<f64>) -> CMatrix {
    let n = m.nrows();
    let mut out = zeros(1 << n, 1 << n);
    for k in 0..=n {
        for col in blades(n, k) {
            let cj = bits(col);
            for row in blades(n, k) {
                let ri = bits(row);
                let sub = DMatrix::from_fn(k, k, |a, b| m[(ri[a], cj[b])]);
                out[(row, col)] = c64(if k == 0 { 1.0 } else { sub.determinant() }, 0.0);
            }
        }
    }
    out
}

/// Derivation extension of A to Λℂⁿ, d/dt Λ(1 + tA) at t = 0.
pub fn exterior_derivation(a: &DMatrix<f64>) -> CMatrix {
    let n = a.nrows();
    let mut out = zeros(1 << n, 1 << n);
    for k in 1..=n {
        for col in blades(n, k) {
            let cj = bits(col);
            for row in blades(n, k) {
                let ri = bits(row);
                let mut total = 0.0;
                for r in 0..k {
                    let sub = DMatrix::from_fn(k, k, |x, y| {
                        if y == r {
                            a[(ri[x], cj[y])]
                        } else if ri[x] == cj[y] {
                            1.0
                        } else {
                            0.0
                        }
                    });
                    total += sub.determinant();
                }
                out[(row, col)] = c64(total, 0.0);
            }
        }
    }
    out
}

/// Clifford data on Cℓ(G) and Cℓ(G/H) ⊗ Cℓ(H), each acting on itself by left
/// multiplication, and the gluing map W(X ⊗ Z) = Z·X.
#[derive(Debug, Clone)]
pub struct CliffordGlue {
    pub split: LieSplit,
    pub cl_g: CliffordRep,
    pub cl_gh: CliffordRep,
    pub cl_h: CliffordRep,
    pub w: CMatrix,
}

impl CliffordGlue {
    pub fn new(split: LieSplit) -> Self {
        let (n, p, q) = (split.horizontal.nrows(), split.horizontal.ncols(), split.vertical.ncols());
        let cl_g = exterior_clifford(n);
        let cl_gh = exterior_clifford(p);
        let cl_h = exterior_clifford(q);
        let left = |v: &[f64]| {
            let mut out = zeros(1 << n, 1 << n);
            for (c, f) in v.iter().zip(&cl_g.generators) {
                out += f * c64(*c, 0.0);
            }
            out
        };
        let e: Vec<CMatrix> = (0..p).map(|a| left(split.horizontal.column(a).as_slice())).collect();
        let z: Vec<CMatrix> = (0..q).map(|b| left(split.vertical.column(b).as_slice())).collect();
        let mut w = zeros(1 << n, 1 << (p + q));
        for x in 0..1usize << p {
            for zb in 0..1usize << q {
                let mut v = zeros(1 << n, 1);
                v[(0, 0)] = ONE;
                for &a in bits(x).iter().rev() {
                    v = &e[a] * v;
                }
                for &b in bits(zb).iter().rev() {
                    v = &z[b] * v;
                }
                w.set_column((x << q) | zb, &v.column(0));
            }
        }
        CliffordGlue { split, cl_g, cl_gh, cl_h, w }
    }

    pub fn lie_dim(&self) -> usize {
        self.cl_g.n
    }

    pub fn lifted_dim(&self) -> usize {
        self.cl_gh.spin_dim * self.cl_h.spin_dim
    }

    /// F_v on Cℓ(G).
    pub fn f_g(&self, v: &[f64]) -> CMatrix {
        self.cl_g.mul_vector(v).expect("vector length matches Lie(G)")
    }

    /// F_{P v} ⊗ Ω on Cℓ(G/H) ⊗ Cℓ(H).
    pub fn f_horizontal(&self, v: &[f64]) -> CMatrix {
        let coords: Vec<f64> = (0..self.cl_gh.n).map(|a| dot(self.split.horizontal.column(a).as_slice(), v)).collect();
        let f = if coords.is_empty() {
            zeros(1, 1)
        } else {
            self.cl_gh.mul_vector(&coords).expect("dims")
        };
        kron(&f, &parity(self.cl_h.n))
    }

    /// 1 ⊗ F_{Q v} on Cℓ(G/H) ⊗ Cℓ(H).
    pub fn f_vertical(&self, v: &[f64]) -> CMatrix {
        let coords: Vec<f64> = (0..self.cl_h.n).map(|b| dot(self.split.vertical.column(b).as_slice(), v)).collect();
        kron(&identity(self.cl_gh.spin_dim), &self.cl_h.mul_vector(&coords).expect("dims"))
    }

    /// Worst defect of the gluing relations F_E W = W(F_E ⊗ Ω), F_Z W = W(1 ⊗ F_Z)
    /// and W*W = 1.
    pub fn glue_deviation(&self) -> f64 {
        let n = self.lie_dim();
        let mut worst = crate::linalg::max_abs(&(self.w.adjoint() * &self.w - identity(self.lifted_dim())));
        for k in 0..n {
            let v: Vec<f64> = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
            let ph: Vec<f64> = (&self.split.p_horizontal() * nalgebra::DVector::from_vec(v.clone())).iter().copied().collect();
            let pv: Vec<f64> = (&self.split.p_vertical() * nalgebra::DVector::from_vec(v.clone())).iter().copied().collect();
            worst = worst.max(crate::linalg::max_abs(&(self.f_g(&ph) * &self.w - &self.w * self.f_horizontal(&v))));
            worst = worst.max(crate::linalg::max_abs(&(self.f_g(&pv) * &self.w - &self.w * self.f_vertical(&v))));
        }
        worst
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Residuals comparing D_G = D_h + D_v with the lifted operators through U.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResiduals {
    /// D_G − D_h − D_v.
    pub split: f64,
    /// D_v − U D̂_v U*.
    pub vertical: f64,
    /// D_h − U D̂_h U* − Σ_k F_{Y_k}(d_{Y_k}U)U*.
    pub horizontal: f64,
    /// Size of the correction Σ_k F_{Y_k}(d_{Y_k}U)U*.
    pub correction_norm: f64,
    /// [D_h − U D̂_h U*, π_G(f)] over sampled f.
    pub correction_commutator: f64,
    /// U π(f) − π_G(f) U over sampled f.
    pub intertwining: f64,
    /// r_h U − U μ_h over sampled h.
    pub equivariance: f64,
    /// U*U − 1 on the sampled states.
    pub unitarity: f64,
    /// Frame invariants at the sample points.
    pub frames: f64,
}

impl ComparisonResiduals {
    pub fn named(&self) -> Vec<(&'static str, &'static str, f64)> {
        vec![
            ("frame split", "canonical Dirac operator equals horizontal plus vertical part", self.split),
            (
                "vertical comparison",
                "vertical part is conjugate to the lifted vertical operator",
                self.vertical,
            ),
            (
                "horizontal comparison",
                "horizontal part equals the conjugated lift plus the frame derivative of U",
                self.horizontal,
            ),
            (
                "correction commutator",
                "the horizontal correction commutes with the function algebra",
                self.correction_commutator,
            ),
            ("intertwining", "U intertwines the function representations", self.intertwining),
            ("equivariance", "U intertwines right translation with the fiber action", self.equivariance),
            ("unitarity", "U is isometric on the sampled states", self.unitarity),
            ("frame invariants", "frames sum to the basis and are pointwise orthogonal", self.frames),
        ]
    }

    pub fn to_report(&self, tolerance: f64, report_only: bool) -> VerificationReport {
        let mut rep = VerificationReport::new();
        for (name, anchor, value) in self.named() {
            if report_only {
                rep.record(name, anchor, value);
            } else {
                rep.check(name, anchor, value, tolerance);
            }
        }
        rep.record("correction norm", "size of the frame derivative of U", self.correction_norm);
        rep
    }
}

/// Either realization of a homogeneous example.
#[derive(Debug, Clone)]
pub enum Homogeneous {
    Torus(TorusHomogeneous),
    Su2(Su2Homogeneous),
}

impl Homogeneous {
    pub fn residuals(&self, samples: usize, seed: u64) -> Result<ComparisonResiduals> {
        match self {
            Homogeneous::Torus(t) => t.residuals(samples, seed),
            Homogeneous::Su2(s) => s.residuals(samples, seed),
        }
    }
}

impl Homogeneous {
    /// Per-block spectrum of the canonical Dirac operator D_G.
    pub fn canonical_spectrum(&self) -> Result<Vec<(String, Vec<f64>)>> {
        match self {
            Homogeneous::Torus(t) => t.canonical_spectrum(),
            Homogeneous::Su2(s) => s.canonical_spectrum(),
        }
    }

    pub fn spec(&self) -> &HomogeneousSpec {
        match self {
            Homogeneous::Torus(t) => &t.spec,
            Homogeneous::Su2(s) => &s.spec,
        }
    }
}

/// Build the example: exact Fourier realization on a torus, quadrature
/// realization on SU(2).
pub fn build_homogeneous(spec: &HomogeneousSpec) -> Result<Homogeneous> {
    match spec.group {
        GroupKind::Torus(_) => Ok(Homogeneous::Torus(TorusHomogeneous::new(spec)?)),
        GroupKind::SU2 => Ok(Homogeneous::Su2(Su2Homogeneous::new(spec)?)),
        GroupKind::Cyclic(_) => Err(Error::UnsupportedSubgroup("homogeneous spaces need a Lie group".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{haar_quadrature, GroupModel};
    use crate::linalg::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subgroup_validation() {
        assert!(lie_split(&HomogeneousSpec::torus(2, vec![vec![1, 1]], 2)).is_ok());
        for bad in [vec![vec![2, 0]], vec![vec![1, 1], vec![1, -1]], vec![], vec![vec![1, 0, 0]]] {
            let err = lie_split(&HomogeneousSpec::torus(2, bad, 2)).unwrap_err();
            assert!(matches!(err, Error::UnsupportedSubgroup(_)));
        }
        let mixed = HomogeneousSpec {
            group: GroupKind::SU2,
            subgroup: SubgroupSpec::Directions(vec![vec![1]]),
            radius: 2,
            quadrature: 8,
        };
        assert!(matches!(lie_split(&mixed), Err(Error::UnsupportedSubgroup(_))));
    }

    #[test]
    fn diagonal_split_is_orthogonal() {
        let s = lie_split(&HomogeneousSpec::torus(2, vec![vec![1, 1]], 2)).unwrap();
        let r = 0.5f64.sqrt();
        assert!((s.vertical[(0, 0)] - r).abs() < 1e-15 && (s.vertical[(1, 0)] - r).abs() < 1e-15);
        assert!((s.horizontal.transpose() * &s.vertical).abs().max() < 1e-15);
        assert!((s.p_horizontal() + s.p_vertical() - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-15);
    }

    #[test]
    fn abelian_frames_are_constant() {
        let spec = HomogeneousSpec::torus(2, vec![vec![1, 1]], 2);
        let pts = haar_quadrature(&GroupModel::torus(2), 3).unwrap().points;
        let f = frame_field(&spec, &pts).unwrap();
        let p = lie_split(&spec).unwrap().p_horizontal();
        assert!(f.horizontal.iter().all(|y| (y - &p).abs().max() < 1e-15));
        assert!(f.deviation() < 1e-15);
    }

    #[test]
    fn su2_frames_have_unit_total_norm() {
        let spec = HomogeneousSpec::su2(2, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<GroupPoint> = (0..20).map(|_| GroupPoint::sample(&GroupModel::su2(), &mut rng)).collect();
        let f = frame_field(&spec, &pts).unwrap();
        assert!(f.deviation() < 1e-13);
        assert!(f.norm_sums().iter().all(|s| (s - 3.0).abs() < 1e-13));
        let at_one = frame_field(&spec, &[GroupPoint::identity(&GroupModel::su2())]).unwrap();
        assert!((&at_one.horizontal[0] - lie_split(&spec).unwrap().p_horizontal()).abs().max() < 1e-15);
        // Ad is a rotation
        assert!(f
            .ad
            .iter()
            .all(|r| (r.transpose() * r - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-13 && (r.determinant() - 1.0).abs() < 1e-13));
    }

    #[test]
    fn exterior_power_is_multiplicative_and_derivation_matches() {
        let g = GroupPoint::Euler {
            alpha: 0.3,
            beta: 1.1,
            gamma: -0.7,
        };
        let h = GroupPoint::Euler {
            alpha: -1.2,
            beta: 0.4,
            gamma: 2.0,
        };
        let (rg, rh) = (adjoint_matrix(GroupKind::SU2, &g), adjoint_matrix(GroupKind::SU2, &h));
        assert!(max_abs(&(exterior_power(&(&rg * &rh)) - exterior_power(&rg) * exterior_power(&rh))) < 1e-13);
        let a = ad_matrix(GroupKind::SU2, &[0.2, -0.5, 0.9]);
        let eps = 1e-6;
        let step = (&a * eps).exp();
        let fd = (exterior_power(&step) - exterior_power(&(&step.transpose()))) * c64(0.5 / eps, 0.0);
        assert!(max_abs(&(fd - exterior_derivation(&a))) < 1e-9);
    }

    #[test]
    fn ad_matches_finite_difference_of_adjoint() {
        let t = 1e-6;
        let g = crate::groups::GroupModel::su2().exp_lie(2, t);
        let fd = (adjoint_matrix(GroupKind::SU2, &g) - DMatrix::<f64>::identity(3, 3)) / t;
        assert!((fd - ad_matrix(GroupKind::SU2, &[0.0, 0.0, 1.0])).abs().max() < 1e-5);
    }

    #[test]
    fn gluing_map_satisfies_the_clifford_relations() {
        for spec in [
            HomogeneousSpec::torus(2, vec![vec![1, 1]], 1),
            HomogeneousSpec::torus(3, vec![vec![1, 2, 0]], 1),
            HomogeneousSpec::su2(2, 4),
        ] {
            let glue = CliffordGlue::new(lie_split(&spec).unwrap());
            assert!(glue.glue_deviation() < 1e-14, "{:?}", spec.group);
        }
    }

    #[test]
    fn literal_gluing_convention_fails_the_relations() {
        // X·Ω(Z) instead of Z·X breaks F_Z W = W(1 ⊗ F_Z) by a sign on odd Z
        let glue = CliffordGlue::new(lie_split(&HomogeneousSpec::torus(2, vec![vec![0, 1]], 1)).unwrap());
        let omega_h = parity(1);
        let mut literal = zeros(4, 4);
        for x in 0..2usize {
            for z in 0..2usize {
                let col = glue.w.column((x << 1) | z) * omega_h[(z, z)];
                let sign = if x == 1 && z == 1 { -1.0 } else { 1.0 };
                literal.set_column((x << 1) | z, &(col * c64(sign, 0.0)));
            }
        }
        let fz = glue.f_g(&[0.0, 1.0]);
        let dev = max_abs(&(fz * &literal - &literal * glue.f_vertical(&[0.0, 1.0])));
        assert!(dev > 1.0);
    }
}
