//! The total algebra A represented on a finite space K, together with the
//! freeness isometries s(σ) and the slice that recovers the base H_B.
//!
//! K is identified with H_B ⊗ ℂ^L through a unitary V; the fixed
//! point algebra acts as V(b ⊗ 1)V*, and the slice e = V(· ⊗ |l₀⟩) embeds H_B.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{GroupModel, GroupPoint, IrrepData, IrrepLabel, TruncationWindow};
use crate::linalg::{zeros, CMatrix, C64, ONE, ZERO};

pub type SparseVec = Vec<(usize, C64)>;

fn accumulate(entries: impl IntoIterator<Item = (usize, C64)>) -> SparseVec {
    let mut map: BTreeMap<usize, C64> = BTreeMap::new();
    for (i, c) in entries {
        *map.entry(i).or_insert(ZERO) += c;
    }
    map.into_iter().filter(|(_, c)| *c != ZERO).collect()
}

/// Generalized permutation: column j maps to a single row with a coefficient,
/// or to zero. Distinct columns hit distinct rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub rows: usize,
    pub cols: Vec<Option<(usize, C64)>>,
}

impl Monomial {
    pub fn new(rows: usize, cols: Vec<Option<(usize, C64)>>) -> Result<Self> {
        let mut seen = vec![false; rows];
        for (r, _) in cols.iter().flatten() {
            if *r >= rows || seen[*r] {
                return Err(Error::ShapeMismatch(format!("monomial row {r} is out of range or hit twice")));
            }
            seen[*r] = true;
        }
        Ok(Monomial { rows, cols })
    }

    pub fn identity(n: usize) -> Self {
        Monomial {
            rows: n,
            cols: (0..n).map(|j| Some((j, ONE))).collect(),
        }
    }

    pub fn diagonal(d: &[C64]) -> Self {
        Monomial {
            rows: d.len(),
            cols: d.iter().enumerate().map(|(j, &c)| Some((j, c))).collect(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn adjoint(&self) -> Monomial {
        let mut cols = vec![None; self.rows];
        for (j, e) in self.cols.iter().enumerate() {
            if let Some((r, c)) = e {
                cols[*r] = Some((j, c.conj()));
            }
        }
        Monomial { rows: self.cols.len(), cols }
    }

    /// self ∘ rhs.
    pub fn compose(&self, rhs: &Monomial) -> Monomial {
        assert_eq!(self.cols.len(), rhs.rows, "monomial composition shape");
        let cols = rhs
            .cols
            .iter()
            .map(|e| e.and_then(|(mid, c1)| self.cols[mid].map(|(r, c2)| (r, c1 * c2))))
            .collect();
        Monomial { rows: self.rows, cols }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = zeros(self.rows, self.cols.len());
        for (j, e) in self.cols.iter().enumerate() {
            if let Some((r, c)) = e {
                m[(*r, j)] = *c;
            }
        }
        m
    }
}

/// Operator on (legs of) the total space.
#[derive(Debug, Clone)]
pub enum TotalOp {
    Dense(CMatrix),
    Monomial(Monomial),
}

impl TotalOp {
    pub fn nrows(&self) -> usize {
        match self {
            TotalOp::Dense(m) => m.nrows(),
            TotalOp::Monomial(m) => m.rows,
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            TotalOp::Dense(m) => m.ncols(),
            TotalOp::Monomial(m) => m.ncols(),
        }
    }

    pub fn adjoint(&self) -> TotalOp {
        match self {
            TotalOp::Dense(m) => TotalOp::Dense(m.adjoint()),
            TotalOp::Monomial(m) => TotalOp::Monomial(m.adjoint()),
        }
    }

    /// self ∘ rhs.
    pub fn compose(&self, rhs: &TotalOp) -> TotalOp {
        match (self, rhs) {
            (TotalOp::Monomial(a), TotalOp::Monomial(b)) => TotalOp::Monomial(a.compose(b)),
            _ => TotalOp::Dense(self.to_dense() * rhs.to_dense()),
        }
    }

    pub fn scale(&self, c: C64) -> TotalOp {
        match self {
            TotalOp::Dense(m) => TotalOp::Dense(m * c),
            TotalOp::Monomial(m) => TotalOp::Monomial(Monomial {
                rows: m.rows,
                cols: m.cols.iter().map(|e| e.map(|(r, x)| (r, x * c))).collect(),
            }),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            TotalOp::Dense(m) => m.clone(),
            TotalOp::Monomial(m) => m.to_dense(),
        }
    }

    /// ⊕_l M_l on H_B ⊗ ℂ^L (K-major), i.e. e_i⊗|l⟩ ↦ (M_l e_i)⊗|l⟩.
    /// Monomial whenever every M_l has at most one nonzero per column.
    pub fn fiberwise(blocks: &[CMatrix]) -> TotalOp {
        let l_dim = blocks.len();
        let hb = blocks.first().map_or(0, |b| b.nrows());
        let monomial = blocks.iter().all(|b| b.column_iter().all(|c| c.iter().filter(|z| **z != ZERO).count() <= 1));
        if monomial {
            let mut cols = vec![None; hb * l_dim];
            for (l, b) in blocks.iter().enumerate() {
                for i in 0..hb {
                    cols[i * l_dim + l] = b.column(i).iter().position(|z| *z != ZERO).map(|j| (j * l_dim + l, b[(j, i)]));
                }
            }
            return TotalOp::Monomial(Monomial { rows: hb * l_dim, cols });
        }
        let mut m = zeros(hb * l_dim, hb * l_dim);
        for (l, b) in blocks.iter().enumerate() {
            for i in 0..hb {
                for j in 0..hb {
                    m[(j * l_dim + l, i * l_dim + l)] = b[(j, i)];
                }
            }
        }
        TotalOp::Dense(m)
    }

    pub fn apply_sparse(&self, x: &[(usize, C64)]) -> SparseVec {
        match self {
            TotalOp::Monomial(m) => accumulate(x.iter().filter_map(|&(j, c)| m.cols[j].map(|(r, a)| (r, a * c)))),
            TotalOp::Dense(m) => {
                let mut out = vec![ZERO; m.nrows()];
                for &(j, c) in x {
                    for (o, v) in out.iter_mut().zip(m.column(j).iter()) {
                        *o += v * c;
                    }
                }
                out.into_iter().enumerate().filter(|(_, c)| *c != ZERO).collect()
            }
        }
    }
}

/// Apply `op` on the leading (K, A) legs of a vector over K ⊗ A ⊗ T.
pub fn apply_leading(op: &TotalOp, x: &[(usize, C64)], trailing: usize) -> SparseVec {
    if trailing == 1 {
        return op.apply_sparse(x);
    }
    let mut groups: BTreeMap<usize, SparseVec> = BTreeMap::new();
    for &(idx, c) in x {
        groups.entry(idx % trailing).or_default().push((idx / trailing, c));
    }
    let mut out = Vec::new();
    for (t, v) in groups {
        for (i, c) in op.apply_sparse(&v) {
            out.push((i * trailing + t, c));
        }
    }
    accumulate(out)
}

/// Apply `op` on the (K, A) legs of a vector over K ⊗ P ⊗ A (P passive).
pub fn apply_split(op: &TotalOp, x: &[(usize, C64)], mid: usize, in_leg: usize, out_leg: usize) -> SparseVec {
    let mut groups: BTreeMap<usize, SparseVec> = BTreeMap::new();
    for &(idx, c) in x {
        let a = idx % in_leg;
        let rest = idx / in_leg;
        let (k, p) = (rest / mid, rest % mid);
        groups.entry(p).or_default().push((k * in_leg + a, c));
    }
    let mut out = Vec::new();
    for (p, v) in groups {
        for (i, c) in op.apply_sparse(&v) {
            let (k, b) = (i / out_leg, i % out_leg);
            out.push(((k * mid + p) * out_leg + b, c));
        }
    }
    accumulate(out)
}

/// Apply a small matrix on the last leg of a vector over K ⊗ A.
pub fn apply_last(m: &CMatrix, x: &[(usize, C64)]) -> SparseVec {
    let (rows, cols) = m.shape();
    let mut out = Vec::new();
    for &(idx, c) in x {
        let (k, a) = (idx / cols, idx % cols);
        for b in 0..rows {
            let v = m[(b, a)];
            if v != ZERO {
                out.push((k * rows + b, v * c));
            }
        }
    }
    accumulate(out)
}

pub type ActionFn = Arc<dyn Fn(&GroupPoint) -> TotalOp + Send + Sync>;

#[derive(Clone)]
pub struct Isometry {
    pub mult: usize,
    pub op: TotalOp,
    pub adjoint: TotalOp,
}

/// Total algebra data: the freeness isometries s(σ): K⊗V_σ → K⊗ℂ^{m_σ}
/// (K-major legs), the implementing action g ↦ U_g on K, and the slice.
#[derive(Clone)]
pub struct TotalSystem {
    pub group: GroupModel,
    pub window: TruncationWindow,
    pub hb_dim: usize,
    pub fiber_dim: usize,
    pub slice: usize,
    /// Unitary V: H_B⊗ℂ^L → K.
    pub amplification: TotalOp,
    amplification_inv: TotalOp,
    pub isometries: BTreeMap<IrrepLabel, Isometry>,
    pub action: ActionFn,
    /// Fibers whose neighbourhood stays inside the truncation for every window label.
    pub interior_fibers: Vec<bool>,
}

impl std::fmt::Debug for TotalSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TotalSystem")
            .field("group", &self.group)
            .field("hb_dim", &self.hb_dim)
            .field("fiber_dim", &self.fiber_dim)
            .field("labels", &self.isometries.len())
            .finish()
    }
}

impl TotalSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        group: GroupModel,
        window: TruncationWindow,
        hb_dim: usize,
        fiber_dim: usize,
        slice: usize,
        amplification: TotalOp,
        isometries: BTreeMap<IrrepLabel, (usize, TotalOp)>,
        action: ActionFn,
        interior_fibers: Vec<bool>,
    ) -> Result<Self> {
        let k = hb_dim * fiber_dim;
        if amplification.nrows() != k || amplification.ncols() != k {
            return Err(Error::ShapeMismatch("amplification must be square on K = H_B ⊗ C^L".into()));
        }
        if slice >= fiber_dim || interior_fibers.len() != fiber_dim {
            return Err(Error::ShapeMismatch("slice or interior mask does not match the fiber count".into()));
        }
        let mut iso = BTreeMap::new();
        for (label, (mult, op)) in isometries {
            let d = label.dim();
            if op.ncols() != k * d || op.nrows() != k * mult {
                return Err(Error::ShapeMismatch(format!(
                    "s({label}) is {}x{}, expected {}x{}",
                    op.nrows(),
                    op.ncols(),
                    k * mult,
                    k * d
                )));
            }
            let adjoint = op.adjoint();
            iso.insert(label, Isometry { mult, op, adjoint });
        }
        let amplification_inv = amplification.adjoint();
        Ok(TotalSystem {
            group,
            window,
            hb_dim,
            fiber_dim,
            slice,
            amplification,
            amplification_inv,
            isometries: iso,
            action,
            interior_fibers,
        })
    }

    pub fn k_dim(&self) -> usize {
        self.hb_dim * self.fiber_dim
    }

    pub fn isometry(&self, label: &IrrepLabel) -> Result<&Isometry> {
        self.isometries.get(label).ok_or_else(|| Error::OutOfWindow(label.to_string()))
    }

    /// V(e_i ⊗ |l⟩) as a sparse vector on K.
    pub fn embed(&self, i: usize, l: usize) -> SparseVec {
        self.amplification.apply_sparse(&[(i * self.fiber_dim + l, ONE)])
    }

    /// V(e_i ⊗ |l⟩) ⊗ e_a on K ⊗ ℂ^d.
    fn embed_with(&self, i: usize, l: usize, a: usize, d: usize) -> SparseVec {
        self.embed(i, l).into_iter().map(|(kk, c)| (kk * d + a, c)).collect()
    }

    /// e* on the K leg of a vector over K ⊗ X.
    pub fn slice_project(&self, y: &[(usize, C64)], x_dim: usize) -> SparseVec {
        let pulled = apply_leading(&self.amplification_inv, y, x_dim);
        let l_dim = self.fiber_dim;
        accumulate(pulled.into_iter().filter_map(|(idx, c)| {
            let (pre, x) = (idx / x_dim, idx % x_dim);
            let (i, l) = (pre / l_dim, pre % l_dim);
            (l == self.slice).then_some((i * x_dim + x, c))
        }))
    }

    /// Kraus blocks W_l: H_B⊗V_σ → H_B⊗ℂ^{m_σ} of the coaction, with
    /// γ_σ(X) = Σ_l W_l (X⊗1) W_l*.
    pub fn coaction_kraus(&self, label: &IrrepLabel) -> Result<Vec<CMatrix>> {
        let iso = self.isometry(label)?;
        let (hb, d, m) = (self.hb_dim, label.dim(), iso.mult);
        let mut out = Vec::new();
        for l in 0..self.fiber_dim {
            let mut w = zeros(hb * m, hb * d);
            let mut nonzero = false;
            for i in 0..hb {
                for a in 0..d {
                    let y = iso.op.apply_sparse(&self.embed_with(i, l, a, d));
                    for (row, v) in self.slice_project(&y, m) {
                        w[(row, i * d + a)] += v;
                        nonzero = true;
                    }
                }
            }
            if nonzero {
                out.push(w);
            }
        }
        Ok(out)
    }

    /// ω(σ,τ) = e* s(σ⊗τ) s(σ)* s(τ)* e as a map H_B⊗H_σ⊗H_τ → H_B⊗(⊕_ρ H_ρ),
    /// restricted to the listed components (ρ, ι_ρ) of σ⊗τ.
    pub fn cocycle(&self, sigma: &IrrepLabel, tau: &IrrepLabel, parts: &[(IrrepLabel, CMatrix)]) -> Result<CMatrix> {
        let s_sigma = self.isometry(sigma)?;
        let s_tau = self.isometry(tau)?;
        let dt = tau.dim();
        let (ms, mt) = (s_sigma.mult, s_tau.mult);
        let mut offsets = Vec::with_capacity(parts.len());
        let mut total_m = 0;
        for (rho, _) in parts {
            offsets.push(total_m);
            total_m += self.isometry(rho)?.mult;
        }
        let hb = self.hb_dim;
        let mut omega = zeros(hb * total_m, hb * ms * mt);
        for i in 0..hb {
            for hs in 0..ms {
                for ht in 0..mt {
                    let x = self.embed_with(i, self.slice, hs * mt + ht, ms * mt);
                    let x = apply_split(&s_tau.adjoint, &x, ms, mt, dt);
                    let x = apply_leading(&s_sigma.adjoint, &x, dt);
                    let mut acc: Vec<(usize, C64)> = Vec::new();
                    for ((rho, iota), off) in parts.iter().zip(&offsets) {
                        let s_rho = self.isometry(rho)?;
                        let y = apply_last(&iota.adjoint(), &x);
                        let y = s_rho.op.apply_sparse(&y);
                        for (idx, v) in y {
                            let (k2, h) = (idx / s_rho.mult, idx % s_rho.mult);
                            acc.push((k2 * total_m + off + h, v));
                        }
                    }
                    let col = (i * ms + hs) * mt + ht;
                    for (row, v) in self.slice_project(&accumulate(acc), total_m) {
                        omega[(row, col)] += v;
                    }
                }
            }
        }
        Ok(omega)
    }

    /// Coefficients X_σ = e* s(σ) x e of an element x of A (one-dimensional
    /// labels only), so that x = Σ_σ a_σ(X_σ).
    pub fn decompose(&self, x: &TotalOp, labels: impl IntoIterator<Item = IrrepLabel>) -> Result<BTreeMap<IrrepLabel, CMatrix>> {
        let hb = self.hb_dim;
        let mut out = BTreeMap::new();
        for label in labels {
            if label.dim() != 1 {
                return Err(Error::UnsupportedGroup("decomposition needs one-dimensional irreps".into()));
            }
            let iso = self.isometry(&label)?;
            let m = iso.mult;
            let mut coeff = zeros(hb * m, hb);
            for i in 0..hb {
                let y = x.apply_sparse(&self.embed(i, self.slice));
                let y = iso.op.apply_sparse(&y);
                for (row, v) in self.slice_project(&y, m) {
                    coeff[(row, i)] += v;
                }
            }
            if coeff.iter().any(|z| *z != ZERO) {
                out.insert(label, coeff);
            }
        }
        Ok(out)
    }

    /// π_K(b) = V(b ⊗ 1_L)V* for a base matrix b (dense; small systems only).
    pub fn base_on_k(&self, b: &CMatrix) -> Result<TotalOp> {
        let amplified = crate::linalg::kron_capped(b, &crate::linalg::identity(self.fiber_dim), 1 << 24)?;
        let v = self.amplification.to_dense();
        Ok(TotalOp::Dense(&v * amplified * v.adjoint()))
    }
}

/// Deviations of the freeness conditions for one label.
#[derive(Debug, Clone, Serialize)]
pub struct FreenessEntry {
    pub label: String,
    pub isometry_deviation: f64,
    pub equivariance_deviation: f64,
    pub interior: usize,
    pub boundary: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FreenessReport {
    pub entries: Vec<FreenessEntry>,
}

impl FreenessReport {
    pub fn max_isometry_deviation(&self) -> f64 {
        self.entries.iter().map(|e| e.isometry_deviation).fold(0.0, f64::max)
    }

    pub fn max_equivariance_deviation(&self) -> f64 {
        self.entries.iter().map(|e| e.equivariance_deviation).fold(0.0, f64::max)
    }

    pub fn max_deviation(&self) -> f64 {
        self.max_isometry_deviation().max(self.max_equivariance_deviation())
    }
}

fn max_diff(a: &[(usize, C64)], b: &[(usize, C64)]) -> f64 {
    let mut map: HashMap<usize, C64> = a.iter().copied().collect();
    for &(i, c) in b {
        *map.entry(i).or_insert(ZERO) -= c;
    }
    map.values().fold(0.0, |m, z| m.max(z.norm()))
}

/// s(σ)*s(σ) = 1 and α_g(s(σ)) = s(σ)(1⊗σ_g) on interior columns, for
/// `samples` pseudo-random group points.
pub fn check_freeness(ts: &TotalSystem, window: &TruncationWindow, samples: usize, seed: u64) -> Result<FreenessReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<GroupPoint> = (0..samples).map(|_| GroupPoint::sample(&ts.group, &mut rng)).collect();
    let actions: Vec<(TotalOp, TotalOp)> = points
        .iter()
        .map(|g| {
            let u = (ts.action)(g);
            let ui = u.adjoint();
            (u, ui)
        })
        .collect();
    let mut entries = Vec::new();
    for label in window.iter() {
        let iso = ts.isometry(label)?;
        let irrep = IrrepData::new(&ts.group, label)?;
        let (d, m) = (label.dim(), iso.mult);
        let sampled: Vec<CMatrix> = points.iter().map(|g| irrep.sample(g)).collect();
        let (mut iso_dev, mut eq_dev) = (0.0_f64, 0.0_f64);
        let (mut interior, mut boundary) = (0, 0);
        for col in 0..ts.k_dim() {
            let (i, l) = (col / ts.fiber_dim, col % ts.fiber_dim);
            if !ts.interior_fibers[l] {
                boundary += d;
                continue;
            }
            interior += d;
            for a in 0..d {
                let e = ts.embed_with(i, l, a, d);
                let back = iso.adjoint.apply_sparse(&iso.op.apply_sparse(&e));
                iso_dev = iso_dev.max(max_diff(&back, &e));
                for ((u, ui), sg) in actions.iter().zip(&sampled) {
                    let lhs = apply_leading(ui, &e, d);
                    let lhs = iso.op.apply_sparse(&lhs);
                    let lhs = apply_leading(u, &lhs, m);
                    let rhs = iso.op.apply_sparse(&apply_last(sg, &e));
                    eq_dev = eq_dev.max(max_diff(&lhs, &rhs));
                }
            }
        }
        entries.push(FreenessEntry {
            label: label.to_string(),
            isometry_deviation: iso_dev,
            equivariance_deviation: eq_dev,
            interior,
            boundary,
        });
    }
    Ok(FreenessReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, max_abs};

    #[test]
    fn monomial_algebra() {
        let shift = Monomial::new(3, vec![Some((1, ONE)), Some((2, c64(0.0, 1.0))), None]).unwrap();
        let dense = shift.to_dense();
        assert_eq!(shift.adjoint().to_dense(), dense.adjoint());
        assert_eq!(shift.compose(&shift).to_dense(), &dense * &dense);
        assert!(Monomial::new(2, vec![Some((0, ONE)), Some((0, ONE))]).is_err());
    }

    #[test]
    fn leg_helpers_match_dense() {
        let op = TotalOp::Dense(CMatrix::from_fn(6, 4, |r, c| c64((r * 4 + c) as f64, 1.0)));
        // op on (K=2, A=2) -> (K=2, B=3); vector over K ⊗ P(3) ⊗ A(2)
        let x: SparseVec = (0..12).map(|i| (i, c64(i as f64, -1.0))).collect();
        let got = apply_split(&op, &x, 3, 2, 3);
        let dims_in = [2, 3, 2];
        let dims_out = [2, 3, 3];
        let big = crate::linalg::leg_operator(&op.to_dense(), &dims_in, &[0, 2], &dims_out, &[0, 2]);
        let xv = CMatrix::from_fn(12, 1, |r, _| c64(r as f64, -1.0));
        let want = big * xv;
        let mut dense_got = zeros(18, 1);
        for (i, c) in got {
            dense_got[(i, 0)] = c;
        }
        assert!(max_abs(&(dense_got - want)) < 1e-12);
    }
}
