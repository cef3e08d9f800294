//! Compact groups: irreps, derived representations, truncation windows,
//! tensor-product decomposition and Haar quadrature.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, diag, expm_skew, identity, kron, zeros, CMatrix, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Torus(usize),
    Cyclic(u32),
    SU2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupModel {
    pub kind: GroupKind,
    pub lie_dim: usize,
}

impl GroupModel {
    pub fn new(kind: GroupKind) -> Self {
        let lie_dim = match kind {
            GroupKind::Torus(d) => d,
            GroupKind::Cyclic(_) => 0,
            GroupKind::SU2 => 3,
        };
        GroupModel { kind, lie_dim }
    }

    pub fn torus(d: usize) -> Self {
        Self::new(GroupKind::Torus(d))
    }

    pub fn cyclic(n: u32) -> Self {
        assert!(n >= 1, "cyclic group needs n >= 1");
        Self::new(GroupKind::Cyclic(n))
    }

    pub fn su2() -> Self {
        Self::new(GroupKind::SU2)
    }

    pub fn is_abelian(&self) -> bool {
        !matches!(self.kind, GroupKind::SU2)
    }

    pub fn lie_basis(&self) -> Vec<String> {
        (1..=self.lie_dim).map(|k| format!("X{k}")).collect()
    }

    /// Normalization of the Ad-invariant inner product, printed in reports.
    pub fn inner_product_convention(&self) -> &'static str {
        match self.kind {
            GroupKind::Torus(_) => "torus: X_j orthonormal, character k has derivative i*k_j (no 2*pi)",
            GroupKind::Cyclic(_) => "cyclic: discrete, no Lie algebra",
            GroupKind::SU2 => "su2: X_k -> (i/2)sigma_k orthonormal, <X,Y> = -Killing(X,Y)/2",
        }
    }

    pub fn trivial(&self) -> IrrepLabel {
        match self.kind {
            GroupKind::Torus(d) => IrrepLabel::Torus(vec![0; d]),
            GroupKind::Cyclic(n) => IrrepLabel::Cyclic { m: 0, n },
            GroupKind::SU2 => IrrepLabel::Spin(0),
        }
    }

    /// Irreps whose tensor products generate every label.
    pub fn generator_labels(&self) -> Vec<IrrepLabel> {
        match self.kind {
            GroupKind::Torus(d) => {
                let mut out = Vec::new();
                for j in 0..d {
                    for s in [1, -1] {
                        let mut k = vec![0; d];
                        k[j] = s;
                        out.push(IrrepLabel::Torus(k));
                    }
                }
                out
            }
            GroupKind::Cyclic(n) => {
                let mut v = vec![IrrepLabel::Cyclic { m: 1 % n, n }];
                if n > 2 {
                    v.push(IrrepLabel::Cyclic { m: n - 1, n });
                }
                v
            }
            GroupKind::SU2 => vec![IrrepLabel::Spin(1)],
        }
    }

    fn check_label(&self, label: &IrrepLabel) -> Result<()> {
        let ok = match (&self.kind, label) {
            (GroupKind::Torus(d), IrrepLabel::Torus(k)) => k.len() == *d,
            (GroupKind::Cyclic(n), IrrepLabel::Cyclic { m, n: ln }) => n == ln && m < n,
            (GroupKind::SU2, IrrepLabel::Spin(_)) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnsupportedGroup(format!("label {label} does not belong to {:?}", self.kind)))
        }
    }

    /// Group point exp(t X_k) in this group's coordinates.
    pub fn exp_lie(&self, k: usize, t: f64) -> GroupPoint {
        assert!(k < self.lie_dim, "Lie basis index out of range");
        match self.kind {
            GroupKind::Torus(d) => {
                let mut v = vec![0.0; d];
                v[k] = t;
                GroupPoint::Torus(v)
            }
            GroupKind::Cyclic(_) => unreachable!(),
            GroupKind::SU2 => match k {
                0 => GroupPoint::Euler {
                    alpha: PI / 2.0,
                    beta: t,
                    gamma: -PI / 2.0,
                },
                1 => GroupPoint::Euler {
                    alpha: 0.0,
                    beta: t,
                    gamma: 0.0,
                },
                _ => GroupPoint::Euler {
                    alpha: t,
                    beta: 0.0,
                    gamma: 0.0,
                },
            },
        }
    }
}

/// Irrep class. Spin labels store 2j.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IrrepLabel {
    Torus(Vec<i64>),
    Cyclic { m: u32, n: u32 },
    Spin(u32),
}

impl IrrepLabel {
    pub fn conjugate(&self) -> IrrepLabel {
        match self {
            IrrepLabel::Torus(k) => IrrepLabel::Torus(k.iter().map(|x| -x).collect()),
            IrrepLabel::Cyclic { m, n } => IrrepLabel::Cyclic { m: (n - m) % n, n: *n },
            IrrepLabel::Spin(j2) => IrrepLabel::Spin(*j2),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            IrrepLabel::Spin(j2) => *j2 as usize + 1,
            _ => 1,
        }
    }

    pub fn is_trivial(&self) -> bool {
        match self {
            IrrepLabel::Torus(k) => k.iter().all(|&x| x == 0),
            IrrepLabel::Cyclic { m, .. } => *m == 0,
            IrrepLabel::Spin(j2) => *j2 == 0,
        }
    }

    pub fn torus(&self) -> Option<&[i64]> {
        match self {
            IrrepLabel::Torus(k) => Some(k),
            _ => None,
        }
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::Torus(k) => {
                let parts: Vec<String> = k.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(";"))
            }
            IrrepLabel::Cyclic { m, n } => write!(f, "{m}mod{n}"),
            IrrepLabel::Spin(j2) if j2 % 2 == 0 => write!(f, "j={}", j2 / 2),
            IrrepLabel::Spin(j2) => write!(f, "j={j2}/2"),
        }
    }
}

/// Group element in coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupPoint {
    /// Angles t with character value exp(i k·t).
    Torus(Vec<f64>),
    /// Power of the generator.
    Cyclic(u32),
    /// exp(α X₃) exp(β X₂) exp(γ X₃).
    Euler { alpha: f64, beta: f64, gamma: f64 },
}

impl GroupPoint {
    pub fn identity(g: &GroupModel) -> GroupPoint {
        match g.kind {
            GroupKind::Torus(d) => GroupPoint::Torus(vec![0.0; d]),
            GroupKind::Cyclic(_) => GroupPoint::Cyclic(0),
            GroupKind::SU2 => GroupPoint::Euler {
                alpha: 0.0,
                beta: 0.0,
                gamma: 0.0,
            },
        }
    }

    /// Deterministic pseudo-random point.
    pub fn sample<R: rand::Rng>(g: &GroupModel, rng: &mut R) -> GroupPoint {
        match g.kind {
            GroupKind::Torus(d) => GroupPoint::Torus((0..d).map(|_| rng.gen_range(0.0..2.0 * PI)).collect()),
            GroupKind::Cyclic(n) => GroupPoint::Cyclic(rng.gen_range(0..n)),
            GroupKind::SU2 => GroupPoint::Euler {
                alpha: rng.gen_range(0.0..2.0 * PI),
                beta: rng.gen_range(0.0..PI),
                gamma: rng.gen_range(0.0..4.0 * PI),
            },
        }
    }
}

/// Spin-j angular momentum matrices J₁, J₂, J₃ in the basis m = j, j−1, …, −j.
pub fn spin_matrices(j2: u32) -> [CMatrix; 3] {
    let d = j2 as usize + 1;
    let j = j2 as f64 / 2.0;
    let mut jp = zeros(d, d);
    for a in 1..d {
        // column a has m = j − a, raised to row a − 1
        let m = j - a as f64;
        jp[(a - 1, a)] = c64((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let j1 = (&jp + &jm) * c64(0.5, 0.0);
    let j2m = (&jp - &jm) * c64(0.0, -0.5);
    let j3 = diag(&(0..d).map(|a| c64(j - a as f64, 0.0)).collect::<Vec<_>>());
    [j1, j2m, j3]
}

#[derive(Debug, Clone)]
pub struct IrrepData {
    pub label: IrrepLabel,
    pub dim: usize,
    /// dσ(X_k), skew-adjoint.
    pub derived: Vec<CMatrix>,
}

impl IrrepData {
    pub fn new(g: &GroupModel, label: &IrrepLabel) -> Result<Self> {
        g.check_label(label)?;
        let derived = match label {
            IrrepLabel::Torus(k) => k.iter().map(|&kj| CMatrix::from_element(1, 1, c64(0.0, kj as f64))).collect(),
            IrrepLabel::Cyclic { .. } => vec![],
            IrrepLabel::Spin(j2) => spin_matrices(*j2).iter().map(|m| m * I).collect(),
        };
        Ok(IrrepData {
            label: label.clone(),
            dim: label.dim(),
            derived,
        })
    }

    /// σ_g.
    pub fn sample(&self, g: &GroupPoint) -> CMatrix {
        match (&self.label, g) {
            (IrrepLabel::Torus(k), GroupPoint::Torus(t)) => {
                let phase: f64 = k.iter().zip(t).map(|(&kj, &tj)| kj as f64 * tj).sum();
                CMatrix::from_element(1, 1, (I * phase).exp())
            }
            (IrrepLabel::Cyclic { m, n }, GroupPoint::Cyclic(p)) => {
                let phase = 2.0 * PI * (*m as f64) * (*p as f64) / (*n as f64);
                CMatrix::from_element(1, 1, (I * phase).exp())
            }
            (IrrepLabel::Spin(j2), GroupPoint::Euler { alpha, beta, gamma }) => {
                let j = *j2 as f64 / 2.0;
                let d = self.dim;
                let z = |angle: f64| diag(&(0..d).map(|a| (I * angle * (j - a as f64)).exp()).collect::<Vec<_>>());
                let mid = expm_skew(&(&self.derived[1] * c64(*beta, 0.0))).expect("skew generator");
                z(*alpha) * mid * z(*gamma)
            }
            _ => panic!("group point does not match irrep label {}", self.label),
        }
    }

    /// σ̄_g.
    pub fn sample_conj(&self, g: &GroupPoint) -> CMatrix {
        self.sample(g).map(|z| z.conj())
    }

    /// dσ̄(X_k) = conj(dσ(X_k)).
    pub fn derived_conj(&self) -> Vec<CMatrix> {
        self.derived.iter().map(|m| m.map(|z| z.conj())).collect()
    }

    pub fn character(&self, g: &GroupPoint) -> C64 {
        self.sample(g).trace()
    }
}

/// Finite, conjugation-closed set of labels plus the one-step margin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationWindow {
    pub labels: BTreeSet<IrrepLabel>,
    pub margin: BTreeSet<IrrepLabel>,
}

impl TruncationWindow {
    pub fn from_labels(g: &GroupModel, labels: impl IntoIterator<Item = IrrepLabel>) -> Result<Self> {
        let mut set: BTreeSet<IrrepLabel> = labels.into_iter().collect();
        for l in &set {
            g.check_label(l)?;
        }
        let conj: Vec<IrrepLabel> = set.iter().map(|l| l.conjugate()).collect();
        set.extend(conj);
        set.insert(g.trivial());
        let mut margin = set.clone();
        for l in &set {
            for gen in g.generator_labels() {
                for (rho, _) in tensor_decompose(g, l, &gen)? {
                    margin.insert(rho);
                }
            }
        }
        Ok(TruncationWindow { labels: set, margin })
    }

    /// Box |k|_∞ ≤ radius in ℤ^d.
    pub fn torus_box(d: usize, radius: i64) -> Self {
        let labels = box_points(d, radius).into_iter().map(IrrepLabel::Torus);
        Self::from_labels(&GroupModel::torus(d), labels).expect("torus labels")
    }

    pub fn cyclic_all(n: u32) -> Self {
        Self::from_labels(&GroupModel::cyclic(n), (0..n).map(|m| IrrepLabel::Cyclic { m, n })).expect("cyclic labels")
    }

    /// Spins 0, ½, …, up to j_max = twice_max/2.
    pub fn spin_up_to(twice_max: u32) -> Self {
        Self::from_labels(&GroupModel::su2(), (0..=twice_max).map(IrrepLabel::Spin)).expect("spin labels")
    }

    pub fn contains(&self, l: &IrrepLabel) -> bool {
        self.labels.contains(l)
    }

    pub fn in_margin(&self, l: &IrrepLabel) -> bool {
        self.margin.contains(l)
    }

    pub fn check_margin(&self, l: &IrrepLabel) -> Result<()> {
        if self.in_margin(l) {
            Ok(())
        } else {
            Err(Error::OutOfWindow(l.to_string()))
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &IrrepLabel> {
        self.labels.iter()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// All integer points of the box |k|_∞ ≤ radius, lexicographic.
pub fn box_points(d: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for p in &out {
            for x in -radius..=radius {
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// Isometric intertwiners ι_ρ: V_ρ → V_σ⊗V_τ with Σ ι_ρι_ρ* = 1.
pub fn tensor_decompose(g: &GroupModel, sigma: &IrrepLabel, tau: &IrrepLabel) -> Result<Vec<(IrrepLabel, CMatrix)>> {
    g.check_label(sigma)?;
    g.check_label(tau)?;
    match (sigma, tau) {
        (IrrepLabel::Torus(k), IrrepLabel::Torus(l)) => {
            let s = k.iter().zip(l).map(|(a, b)| a + b).collect();
            Ok(vec![(IrrepLabel::Torus(s), identity(1))])
        }
        (IrrepLabel::Cyclic { m: a, n }, IrrepLabel::Cyclic { m: b, .. }) => Ok(vec![(IrrepLabel::Cyclic { m: (a + b) % n, n: *n }, identity(1))]),
        (IrrepLabel::Spin(a), IrrepLabel::Spin(b)) => Ok(clebsch_gordan(*a, *b).into_iter().map(|(j2, iota)| (IrrepLabel::Spin(j2), iota)).collect()),
        _ => unreachable!("labels were checked against the group"),
    }
}

/// Clebsch–Gordan isometries for spins a/2 ⊗ b/2, Condon–Shortley phases,
/// ordered by total spin descending.
pub fn clebsch_gordan(a2: u32, b2: u32) -> Vec<(u32, CMatrix)> {
    let (da, db) = (a2 as usize + 1, b2 as usize + 1);
    let n = da * db;
    let (ja, jb) = (a2 as f64 / 2.0, b2 as f64 / 2.0);
    let lower = |j2: u32| spin_matrices(j2)[0].clone() - spin_matrices(j2)[1].clone() * I;
    let total_lower = kron(&lower(a2), &identity(db)) + kron(&identity(da), &lower(b2));
    // m_a + m_b in units of ½ for each product basis vector
    let twice_m = |idx: usize| (a2 as i64 - 2 * (idx / db) as i64) + (b2 as i64 - 2 * (idx % db) as i64);

    let mut built: Vec<CMatrix> = Vec::new();
    let mut out = Vec::new();
    let mut j2 = a2 + b2;
    loop {
        let support: Vec<usize> = (0..n).filter(|&i| twice_m(i) == j2 as i64).collect();
        // highest-weight vector: orthogonal complement of earlier states at M = J
        let mut best = zeros(n, 1);
        let mut best_norm = 0.0;
        for &i in &support {
            let mut v = zeros(n, 1);
            v[(i, 0)] = ONE;
            for b in &built {
                for c in 0..b.ncols() {
                    let col = b.column(c);
                    let overlap = col.dotc(&v.column(0));
                    v -= col * overlap;
                }
            }
            let nv = v.norm();
            if nv > best_norm + 1e-12 {
                best_norm = nv;
                best = v;
            }
        }
        let mut top = best / c64(best_norm, 0.0);
        // Condon–Shortley: ⟨ja, ja; jb, J − ja | J, J⟩ > 0
        let mb = j2 as f64 / 2.0 - ja;
        let pin = (jb - mb).round() as usize;
        let anchor = top[(pin, 0)];
        top *= anchor.conj() / c64(anchor.norm(), 0.0);
        let dj = j2 as usize + 1;
        let jj = j2 as f64 / 2.0;
        let mut iota = zeros(n, dj);
        iota.set_column(0, &top.column(0));
        for c in 1..dj {
            let m = jj - (c - 1) as f64;
            let norm = (jj * (jj + 1.0) - m * (m - 1.0)).sqrt();
            let next = &total_lower * iota.column(c - 1) / c64(norm, 0.0);
            iota.set_column(c, &next);
        }
        // clean rounding noise in exact zeros
        for z in iota.iter_mut() {
            if z.norm() < 1e-15 {
                *z = ZERO;
            }
        }
        built.push(iota.clone());
        out.push((j2, iota));
        if j2 == a2.abs_diff(b2) {
            break;
        }
        j2 -= 2;
    }
    out
}

/// Block layout of the truncated Peter–Weyl space ⊕_σ V_σ ⊗ V̄_σ.
#[derive(Debug, Clone)]
pub struct RegularBlocks {
    pub blocks: Vec<RegularBlock>,
    pub total_dim: usize,
}

#[derive(Debug, Clone)]
pub struct RegularBlock {
    pub irrep: IrrepData,
    pub offset: usize,
}

impl RegularBlocks {
    /// λ_g = ⊕ 1 ⊗ σ̄_g.
    pub fn left(&self, g: &GroupPoint) -> CMatrix {
        self.assemble(|b| kron(&identity(b.irrep.dim), &b.irrep.sample_conj(g)))
    }

    /// r_g = ⊕ σ_g ⊗ 1.
    pub fn right(&self, g: &GroupPoint) -> CMatrix {
        self.assemble(|b| kron(&b.irrep.sample(g), &identity(b.irrep.dim)))
    }

    fn assemble(&self, f: impl Fn(&RegularBlock) -> CMatrix) -> CMatrix {
        let mut out = zeros(self.total_dim, self.total_dim);
        for b in &self.blocks {
            let m = f(b);
            out.view_mut((b.offset, b.offset), m.shape()).copy_from(&m);
        }
        out
    }
}

pub fn left_regular_blocks(g: &GroupModel, w: &TruncationWindow) -> Result<RegularBlocks> {
    let mut blocks = Vec::new();
    let mut offset = 0;
    for l in w.iter() {
        let irrep = IrrepData::new(g, l)?;
        let d = irrep.dim;
        blocks.push(RegularBlock { irrep, offset });
        offset += d * d;
    }
    Ok(RegularBlocks { blocks, total_dim: offset })
}

/// Haar quadrature: points with positive weights summing to 1.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<GroupPoint>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn integrate(&self, f: impl Fn(&GroupPoint) -> C64) -> C64 {
        self.points.iter().zip(&self.weights).map(|(p, &w)| f(p) * w).sum()
    }

    /// Largest |∫χ_σ χ̄_τ − δ_στ| over the given labels.
    pub fn orthogonality_deviation(&self, irreps: &[IrrepData]) -> f64 {
        let chars: Vec<Vec<C64>> = irreps.iter().map(|ir| self.points.iter().map(|p| ir.character(p)).collect()).collect();
        let mut worst: f64 = 0.0;
        for (a, ca) in chars.iter().enumerate() {
            for (b, cb) in chars.iter().enumerate() {
                let s: C64 = ca.iter().zip(cb).zip(&self.weights).map(|((x, y), &w)| x * y.conj() * w).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }
}

pub fn haar_quadrature(g: &GroupModel, resolution: usize) -> Result<Quadrature> {
    if resolution == 0 {
        return Err(Error::ResolutionTooLow { deviation: f64::INFINITY });
    }
    match g.kind {
        GroupKind::Torus(d) => {
            let r = resolution as i64;
            let n = resolution.pow(d as u32);
            let mut points = Vec::with_capacity(n);
            for idx in 0..n {
                let mut rem = idx;
                let mut t = vec![0.0; d];
                for slot in t.iter_mut().rev() {
                    *slot = 2.0 * PI * (rem as i64 % r) as f64 / r as f64;
                    rem /= resolution;
                }
                points.push(GroupPoint::Torus(t));
            }
            Ok(Quadrature {
                weights: vec![1.0 / n as f64; n],
                points,
            })
        }
        GroupKind::Cyclic(n) => Ok(Quadrature {
            points: (0..n).map(GroupPoint::Cyclic).collect(),
            weights: vec![1.0 / n as f64; n as usize],
        }),
        GroupKind::SU2 => {
            let r = resolution;
            let betas: Vec<f64> = (0..r).map(|i| PI * (i as f64 + 0.5) / r as f64).collect();
            let sin_total: f64 = betas.iter().map(|b| b.sin()).sum();
            let mut points = Vec::with_capacity(2 * r * r * r);
            let mut weights = Vec::with_capacity(2 * r * r * r);
            for a in 0..r {
                let alpha = 2.0 * PI * a as f64 / r as f64;
                for &beta in &betas {
                    let wb = beta.sin() / sin_total;
                    for c in 0..2 * r {
                        let gamma = 4.0 * PI * c as f64 / (2 * r) as f64;
                        points.push(GroupPoint::Euler { alpha, beta, gamma });
                        weights.push(wb / (2 * r * r) as f64);
                    }
                }
            }
            Ok(Quadrature { points, weights })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spin(j2: u32) -> IrrepData {
        IrrepData::new(&GroupModel::su2(), &IrrepLabel::Spin(j2)).unwrap()
    }

    #[test]
    fn torus1_derivatives() {
        let g = GroupModel::torus(1);
        let w = TruncationWindow::torus_box(1, 1);
        let vals: Vec<C64> = w.iter().map(|l| IrrepData::new(&g, l).unwrap().derived[0][(0, 0)]).collect();
        assert_eq!(vals, vec![-I, ZERO, I]);
    }

    #[test]
    fn spin_half_derived_is_half_pauli() {
        let ir = spin(1);
        for k in 0..3 {
            let expect = crate::linalg::pauli(k + 1) * c64(0.0, 0.5);
            assert!(max_abs(&(&ir.derived[k] - expect)) < 1e-15);
        }
    }

    #[test]
    fn su2_commutator_table() {
        for j2 in 0..5 {
            let d = spin(j2).derived;
            for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                let comm = &d[a] * &d[b] - &d[b] * &d[a];
                assert!(max_abs(&(comm + &d[c])) < 1e-12);
            }
        }
    }

    #[test]
    fn cyclic_label_two() {
        let g = GroupModel::cyclic(4);
        let ir = IrrepData::new(&g, &IrrepLabel::Cyclic { m: 2, n: 4 }).unwrap();
        for p in 0..4 {
            let expect = I.powu(2 * p);
            assert!((ir.sample(&GroupPoint::Cyclic(p))[(0, 0)] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn singlet_intertwiner() {
        let g = GroupModel::su2();
        let dec = tensor_decompose(&g, &IrrepLabel::Spin(1), &IrrepLabel::Spin(1)).unwrap();
        let labels: Vec<_> = dec.iter().map(|(l, _)| l.clone()).collect();
        assert_eq!(labels, vec![IrrepLabel::Spin(2), IrrepLabel::Spin(0)]);
        let s = &dec[1].1;
        let r = 0.5f64.sqrt();
        let expect = [0.0, r, -r, 0.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((s[(i, 0)] - c64(*e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn clebsch_gordan_intertwines() {
        let g = GroupModel::su2();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for a in 0..4 {
            for b in 0..4 {
                let dec = tensor_decompose(&g, &IrrepLabel::Spin(a), &IrrepLabel::Spin(b)).unwrap();
                let n = (a as usize + 1) * (b as usize + 1);
                let mut sum = zeros(n, n);
                for (_, iota) in &dec {
                    assert!(max_abs(&(iota.adjoint() * iota - identity(iota.ncols()))) < 1e-12);
                    sum += iota * iota.adjoint();
                }
                assert!(max_abs(&(sum - identity(n))) < 1e-12);
                for _ in 0..3 {
                    let p = GroupPoint::sample(&g, &mut rng);
                    let big = kron(&spin(a).sample(&p), &spin(b).sample(&p));
                    for (l, iota) in &dec {
                        let rho = IrrepData::new(&g, l).unwrap().sample(&p);
                        assert!(max_abs(&(&big * iota - iota * rho)) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_factor_is_identity() {
        let g = GroupModel::su2();
        let dec = tensor_decompose(&g, &IrrepLabel::Spin(3), &IrrepLabel::Spin(0)).unwrap();
        assert_eq!(dec.len(), 1);
        assert_eq!(dec[0].0, IrrepLabel::Spin(3));
        assert!(max_abs(&(&dec[0].1 - identity(4))) < 1e-15);
        let t = GroupModel::torus(2);
        let dec = tensor_decompose(&t, &IrrepLabel::Torus(vec![1, 0]), &IrrepLabel::Torus(vec![0, 1])).unwrap();
        assert_eq!(dec, vec![(IrrepLabel::Torus(vec![1, 1]), identity(1))]);
    }

    #[test]
    fn exponential_consistency() {
        let g = GroupModel::su2();
        for j2 in 0..4 {
            let ir = spin(j2);
            for k in 0..3 {
                for &t in &[-1.0, -0.3, 0.7, 1.0] {
                    let direct = expm_skew(&(&ir.derived[k] * c64(t, 0.0))).unwrap();
                    assert!(max_abs(&(ir.sample(&g.exp_lie(k, t)) - direct)) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn regular_block_sizes() {
        let c3 = left_regular_blocks(&GroupModel::cyclic(3), &TruncationWindow::cyclic_all(3)).unwrap();
        assert_eq!(c3.blocks.len(), 3);
        assert_eq!(c3.total_dim, 3);
        let t1 = left_regular_blocks(&GroupModel::torus(1), &TruncationWindow::torus_box(1, 2)).unwrap();
        assert_eq!(t1.blocks.len(), 5);
        let s = left_regular_blocks(&GroupModel::su2(), &TruncationWindow::spin_up_to(2)).unwrap();
        let dims: Vec<usize> = s.blocks.iter().map(|b| b.irrep.dim * b.irrep.dim).collect();
        assert_eq!(dims, vec![1, 4, 9]);
        assert_eq!(s.total_dim, 14);
    }

    #[test]
    fn quadrature_weights_and_orthogonality() {
        let t = haar_quadrature(&GroupModel::torus(1), 8).unwrap();
        assert_eq!(t.points.len(), 8);
        assert!(t.weights.iter().all(|&w| w == 1.0 / 8.0));
        let g = GroupModel::su2();
        let dev = |r| {
            let q = haar_quadrature(&g, r).unwrap();
            let total: f64 = q.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-10);
            q.orthogonality_deviation(&[spin(1)])
        };
        let (d16, d64) = (dev(16), dev(64));
        assert!(d16 < 1e-3, "resolution 16 deviation {d16}");
        assert!(d64 <= d16.max(1e-12));
        // higher spins resolve the β-grid error, which must shrink under refinement
        let hard: Vec<IrrepData> = (0..7).map(spin).collect();
        let coarse = haar_quadrature(&g, 4).unwrap().orthogonality_deviation(&hard);
        let fine = haar_quadrature(&g, 8).unwrap().orthogonality_deviation(&hard);
        assert!(coarse > 1e-6 && fine < coarse, "{coarse} {fine}");
    }

    #[test]
    fn windows_are_closed() {
        let w = TruncationWindow::torus_box(2, 2);
        assert_eq!(w.len(), 25);
        for l in w.iter() {
            assert!(w.contains(&l.conjugate()));
        }
        assert!(w.in_margin(&IrrepLabel::Torus(vec![3, 0])));
        assert!(!w.in_margin(&IrrepLabel::Torus(vec![3, 3])));
        let s = TruncationWindow::spin_up_to(2);
        assert!(s.in_margin(&IrrepLabel::Spin(3)));
        assert!(!s.in_margin(&IrrepLabel::Spin(4)));
    }
}
