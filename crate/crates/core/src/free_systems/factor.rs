//! Factor systems: coactions γ_σ in Kraus form and cocycles ω(σ,τ), with
//! numerical checks of the range, covariance and cocycle identities.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::base::RepresentedBase;
use super::total::{check_freeness, TotalSystem};
use crate::error::{Error, Result};
use crate::groups::{tensor_decompose, GroupModel, IrrepData, IrrepLabel, TruncationWindow};
use crate::linalg::{identity, kron, leg_operator, max_abs, mul_sparse_left, mul_sparse_right, mul_sparse_right as mul, range_basis, zeros, CMatrix, ONE};
use crate::report::VerificationReport;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct LabelData {
    pub irrep: IrrepData,
    pub mult: usize,
    /// W_l: H_B⊗V_σ → H_B⊗ℂ^{m_σ} with γ_σ(b) = Σ_l W_l (b⊗1) W_l*.
    pub kraus: Vec<CMatrix>,
    /// p(σ) = γ_σ(1).
    pub p: CMatrix,
    /// Orthonormal basis of range p(σ); `None` when p(σ) = 1.
    pub range: Option<CMatrix>,
}

impl LabelData {
    pub fn rank(&self) -> usize {
        self.range.as_ref().map_or(self.p.nrows(), |q| q.ncols())
    }
}

/// Where cocycles come from.
#[derive(Clone)]
pub enum CocycleSource {
    /// Sliced from a represented total algebra.
    Total(Arc<TotalSystem>),
    /// Trivial bundle B ⊗ C(G): ω(σ,τ) = 1 ⊗ Σ_ρ E_ρ ι_ρ*.
    Regular,
    /// One-dimensional multiplicities with a table of scalar-valued B-cocycles;
    /// missing entries default to p(σ⊗τ).
    Custom(BTreeMap<(IrrepLabel, IrrepLabel), CMatrix>),
}

/// ω(σ,τ) together with the block layout of H_{σ⊗τ} = ⊕_ρ H_ρ.
#[derive(Debug, Clone)]
pub struct Cocycle {
    pub matrix: CMatrix,
    /// (ρ, ι_ρ, offset inside H_{σ⊗τ}, m_ρ)
    pub parts: Vec<(IrrepLabel, CMatrix, usize, usize)>,
    pub total_mult: usize,
    pub complete: bool,
}

pub struct FactorSystem {
    pub group: GroupModel,
    pub hb_dim: usize,
    pub window: TruncationWindow,
    pub labels: BTreeMap<IrrepLabel, LabelData>,
    source: CocycleSource,
    cache: RwLock<HashMap<(IrrepLabel, IrrepLabel), Arc<Cocycle>>>,
}

impl std::fmt::Debug for FactorSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FactorSystem")
            .field("group", &self.group)
            .field("hb_dim", &self.hb_dim)
            .field("labels", &self.labels.keys().map(|l| l.to_string()).collect::<Vec<_>>())
            .finish()
    }
}

impl Clone for FactorSystem {
    fn clone(&self) -> Self {
        FactorSystem {
            group: self.group.clone(),
            hb_dim: self.hb_dim,
            window: self.window.clone(),
            labels: self.labels.clone(),
            source: self.source.clone(),
            cache: RwLock::new(self.cache.read().expect("cache lock").clone()),
        }
    }
}

/// Isometric embedding of H_B⊗ℂ^m as the block at `offset` of H_B⊗ℂ^total.
pub fn block_injection(hb: usize, offset: usize, m: usize, total: usize) -> CMatrix {
    let mut e = zeros(hb * total, hb * m);
    for i in 0..hb {
        for h in 0..m {
            e[(i * total + offset + h, i * m + h)] = ONE;
        }
    }
    e
}

impl FactorSystem {
    /// Assemble from per-label multiplicities and Kraus blocks.
    pub fn from_parts(
        group: GroupModel,
        window: TruncationWindow,
        hb_dim: usize,
        parts: BTreeMap<IrrepLabel, (usize, Vec<CMatrix>)>,
        source: CocycleSource,
    ) -> Result<Self> {
        let mut labels = BTreeMap::new();
        for (label, (mult, kraus)) in parts {
            let irrep = IrrepData::new(&group, &label)?;
            let d = irrep.dim;
            for w in &kraus {
                if w.shape() != (hb_dim * mult, hb_dim * d) {
                    return Err(Error::ShapeMismatch(format!("Kraus block for {label} has shape {:?}", w.shape())));
                }
            }
            let mut p = zeros(hb_dim * mult, hb_dim * mult);
            for w in &kraus {
                p += w * w.adjoint();
            }
            let range = if max_abs(&(&p - identity(hb_dim * mult))) < 1e-13 {
                None
            } else {
                Some(range_basis(&p)?)
            };
            labels.insert(label, LabelData { irrep, mult, kraus, p, range });
        }
        for l in window.iter() {
            if !labels.contains_key(l) {
                return Err(Error::OutOfWindow(format!("no factor-system data for window label {l}")));
            }
        }
        Ok(FactorSystem {
            group,
            hb_dim,
            window,
            labels,
            source,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// Slice the factor system out of a total algebra; freeness is verified first.
    pub fn from_total(ts: Arc<TotalSystem>, tolerance: f64) -> Result<Self> {
        let freeness = check_freeness(&ts, &ts.window, 2, 0)?;
        for e in &freeness.entries {
            let dev = e.isometry_deviation.max(e.equivariance_deviation);
            if dev > tolerance {
                return Err(Error::FreenessViolation {
                    check: format!("label {}", e.label),
                    deviation: dev,
                });
            }
        }
        let mut parts = BTreeMap::new();
        for label in ts.window.margin.iter() {
            if let Ok(iso) = ts.isometry(label) {
                parts.insert(label.clone(), (iso.mult, ts.coaction_kraus(label)?));
            }
        }
        Self::from_parts(ts.group.clone(), ts.window.clone(), ts.hb_dim, parts, CocycleSource::Total(ts))
    }

    /// Trivial bundle: m_σ = d_σ, γ_σ = id ⊗ 1.
    pub fn regular(group: GroupModel, window: TruncationWindow, hb_dim: usize) -> Result<Self> {
        let parts = window.margin.iter().map(|l| (l.clone(), (l.dim(), vec![identity(hb_dim * l.dim())]))).collect();
        Self::from_parts(group, window, hb_dim, parts, CocycleSource::Regular)
    }

    /// Abelian system with γ_σ(b) = W_σ b W_σ*, W_σ = Π_j U_j^{σ_j} for torus
    /// labels or U^m for cyclic labels.
    pub fn custom_abelian(
        group: GroupModel,
        window: TruncationWindow,
        unitaries: &[CMatrix],
        cocycles: BTreeMap<(IrrepLabel, IrrepLabel), CMatrix>,
    ) -> Result<Self> {
        if !group.is_abelian() {
            return Err(Error::UnsupportedGroup("custom factor systems need an abelian group".into()));
        }
        let hb = unitaries.first().map(|u| u.nrows()).ok_or(Error::InsufficientData)?;
        let power = |u: &CMatrix, k: i64| -> CMatrix {
            let base = if k < 0 { u.adjoint() } else { u.clone() };
            (0..k.unsigned_abs()).fold(identity(hb), |acc, _| acc * &base)
        };
        let mut parts = BTreeMap::new();
        for label in window.margin.iter() {
            let w = match label {
                IrrepLabel::Torus(k) => {
                    if k.len() != unitaries.len() {
                        return Err(Error::DimensionMismatch {
                            expected: k.len(),
                            found: unitaries.len(),
                        });
                    }
                    k.iter().zip(unitaries).fold(identity(hb), |acc, (&kj, u)| acc * power(u, kj))
                }
                IrrepLabel::Cyclic { m, .. } => power(&unitaries[0], *m as i64),
                IrrepLabel::Spin(_) => unreachable!("abelian group"),
            };
            parts.insert(label.clone(), (1, vec![w]));
        }
        Self::from_parts(group, window, hb, parts, CocycleSource::Custom(cocycles))
    }

    pub fn label(&self, label: &IrrepLabel) -> Result<&LabelData> {
        self.labels.get(label).ok_or_else(|| Error::OutOfWindow(label.to_string()))
    }

    pub fn mult(&self, label: &IrrepLabel) -> Result<usize> {
        Ok(self.label(label)?.mult)
    }

    pub fn trivial(&self) -> IrrepLabel {
        self.group.trivial()
    }

    /// (γ_τ)₁₃(x) for x: H_B⊗ℂ^c → H_B⊗ℂ^r, as a map H_B⊗ℂ^c⊗H_τ → H_B⊗ℂ^r⊗H_τ.
    pub fn coact(&self, tau: &IrrepLabel, x: &CMatrix, r: usize, c: usize) -> Result<CMatrix> {
        let data = self.label(tau)?;
        let (hb, d, m) = (self.hb_dim, data.irrep.dim, data.mult);
        if x.shape() != (hb * r, hb * c) {
            return Err(Error::ShapeMismatch(format!(
                "coaction argument {:?}, expected {:?}",
                x.shape(),
                (hb * r, hb * c)
            )));
        }
        if d == 1 && m == 1 && r == 1 && c == 1 {
            return Ok(data
                .kraus
                .iter()
                .fold(zeros(hb, hb), |acc, w| acc + mul_sparse_right(&mul_sparse_left(w, x), &w.adjoint())));
        }
        let mut out = zeros(hb * r * m, hb * c * m);
        let x_amp = kron(x, &identity(d));
        for w in &data.kraus {
            let w_out = leg_operator(w, &[hb, r, d], &[0, 2], &[hb, r, m], &[0, 2]);
            let w_in = leg_operator(&w.adjoint(), &[hb, c, m], &[0, 2], &[hb, c, d], &[0, 2]);
            out += mul(&mul(&w_out, &x_amp), &w_in);
        }
        Ok(out)
    }

    /// γ_τ(b) on H_B⊗H_τ.
    pub fn gamma(&self, tau: &IrrepLabel, b: &CMatrix) -> Result<CMatrix> {
        self.coact(tau, b, 1, 1)
    }

    /// Layout of H_{σ⊗τ} over the components that carry factor-system data,
    /// and whether every component does.
    pub fn product_layout(&self, sigma: &IrrepLabel, tau: &IrrepLabel) -> Result<(Vec<(IrrepLabel, CMatrix, usize, usize)>, usize, bool)> {
        let mut parts = Vec::new();
        let mut total = 0;
        let mut complete = true;
        for (rho, iota) in tensor_decompose(&self.group, sigma, tau)? {
            match self.labels.get(&rho) {
                Some(data) => {
                    parts.push((rho, iota, total, data.mult));
                    total += data.mult;
                }
                None => complete = false,
            }
        }
        Ok((parts, total, complete))
    }

    /// ω(σ,τ): H_B⊗H_σ⊗H_τ → H_B⊗H_{σ⊗τ}, cached. Components of σ⊗τ outside
    /// the margin are dropped and flagged through `Cocycle::complete`.
    pub fn cocycle(&self, sigma: &IrrepLabel, tau: &IrrepLabel) -> Result<Arc<Cocycle>> {
        let key = (sigma.clone(), tau.clone());
        if let Some(c) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(c.clone());
        }
        let (ms, mt) = (self.mult(sigma)?, self.mult(tau)?);
        let (parts, total, complete) = self.product_layout(sigma, tau)?;
        let hb = self.hb_dim;
        let matrix = match &self.source {
            CocycleSource::Total(ts) => {
                let list: Vec<(IrrepLabel, CMatrix)> = parts.iter().map(|(r, i, _, _)| (r.clone(), i.clone())).collect();
                ts.cocycle(sigma, tau, &list)?
            }
            CocycleSource::Regular => {
                let mut stacked = zeros(total, ms * mt);
                for (_, iota, off, m) in &parts {
                    stacked.view_mut((*off, 0), (*m, ms * mt)).copy_from(&iota.adjoint());
                }
                kron(&identity(hb), &stacked)
            }
            CocycleSource::Custom(table) => {
                if ms != 1 || mt != 1 || total > 1 {
                    return Err(Error::UnsupportedGroup("custom cocycles need one-dimensional multiplicities".into()));
                }
                match (table.get(&key), parts.first()) {
                    (_, None) => zeros(0, hb),
                    (Some(w), _) if w.shape() == (hb, hb) => w.clone(),
                    (Some(w), _) => return Err(Error::ShapeMismatch(format!("cocycle ({sigma},{tau}) has shape {:?}", w.shape()))),
                    (None, Some(first)) => self.label(&first.0)?.p.clone(),
                }
            }
        };
        if matrix.shape() != (hb * total, hb * ms * mt) {
            return Err(Error::ShapeMismatch(format!("cocycle ({sigma},{tau}) has shape {:?}", matrix.shape())));
        }
        let c = Arc::new(Cocycle {
            matrix,
            parts,
            total_mult: total,
            complete,
        });
        self.cache.write().expect("cache lock").insert(key, c.clone());
        Ok(c)
    }

    /// γ_{σ⊗τ}(b) = ⊕_ρ γ_ρ(b) on H_B⊗H_{σ⊗τ}.
    pub fn gamma_product(&self, cocycle: &Cocycle, b: &CMatrix) -> Result<CMatrix> {
        let hb = self.hb_dim;
        let mut out = zeros(hb * cocycle.total_mult, hb * cocycle.total_mult);
        for (rho, _, off, m) in &cocycle.parts {
            let g = self.gamma(rho, b)?;
            if *m == cocycle.total_mult {
                out += g;
                continue;
            }
            let e = block_injection(hb, *off, *m, cocycle.total_mult);
            out += &e * g * e.adjoint();
        }
        Ok(out)
    }

    /// Pairs (σ,τ) of window labels whose product stays in the margin.
    pub fn window_pairs(&self) -> Vec<(IrrepLabel, IrrepLabel)> {
        let mut out = Vec::new();
        for s in self.window.iter() {
            for t in self.window.iter() {
                if matches!(self.product_layout(s, t), Ok((_, _, true))) {
                    out.push((s.clone(), t.clone()));
                }
            }
        }
        out
    }

    /// Largest deviation of ωω* = γ_{σ⊗τ}(1) and ω*ω = (γ_τ)₁₃(γ_σ(1)).
    pub fn range_deviation(&self, sigma: &IrrepLabel, tau: &IrrepLabel) -> Result<f64> {
        let w = self.cocycle(sigma, tau)?;
        let one = identity(self.hb_dim);
        let left = max_abs(&(mul_sparse_right(&w.matrix, &w.matrix.adjoint()) - self.gamma_product(&w, &one)?));
        let ms = self.mult(sigma)?;
        let right = max_abs(&(mul_sparse_right(&w.matrix.adjoint(), &w.matrix) - self.coact(tau, &self.label(sigma)?.p, ms, ms)?));
        Ok(left.max(right))
    }

    /// γ_{σ⊗τ}(b)ω(σ,τ) = ω(σ,τ)(γ_τ)₁₃(γ_σ(b)).
    pub fn covariance_deviation(&self, sigma: &IrrepLabel, tau: &IrrepLabel, b: &CMatrix) -> Result<f64> {
        let w = self.cocycle(sigma, tau)?;
        let ms = self.mult(sigma)?;
        let lhs = mul_sparse_right(&self.gamma_product(&w, b)?, &w.matrix);
        let rhs = mul_sparse_left(&w.matrix, &self.coact(tau, &self.gamma(sigma, b)?, ms, ms)?);
        Ok(max_abs(&(lhs - rhs)))
    }

    /// ω(σ,τ⊗ρ)ω(τ,ρ)₁₃₄ = ω(σ⊗τ,ρ)(γ_ρ)₁₄(ω(σ,τ)); abelian groups only, so
    /// every product is a single label.
    pub fn cocycle_identity_deviation(&self, sigma: &IrrepLabel, tau: &IrrepLabel, rho: &IrrepLabel) -> Result<f64> {
        if !self.group.is_abelian() {
            return Err(Error::UnsupportedGroup("cocycle identity is checked for abelian groups".into()));
        }
        let hb = self.hb_dim;
        let (ms, mt, mr) = (self.mult(sigma)?, self.mult(tau)?, self.mult(rho)?);
        let w_tr = self.cocycle(tau, rho)?;
        let tr = w_tr.parts[0].0.clone();
        let w_s_tr = self.cocycle(sigma, &tr)?;
        let w_st = self.cocycle(sigma, tau)?;
        let st = w_st.parts[0].0.clone();
        let w_st_r = self.cocycle(&st, rho)?;
        let (m_tr, m_st) = (w_tr.total_mult, w_st.total_mult);

        let inner = if ms == 1 {
            w_tr.matrix.clone()
        } else {
            leg_operator(&w_tr.matrix, &[hb, ms, mt, mr], &[0, 2, 3], &[hb, ms, m_tr], &[0, 2])
        };
        let lhs = mul_sparse_right(&w_s_tr.matrix, &inner);
        let twisted = self.coact(rho, &w_st.matrix, m_st, ms * mt)?;
        let rhs = mul_sparse_right(&w_st_r.matrix, &twisted);
        Ok(max_abs(&(lhs - rhs)))
    }

    /// Triples of window labels whose partial and total products stay in the margin.
    pub fn window_triples(&self) -> Vec<(IrrepLabel, IrrepLabel, IrrepLabel)> {
        let mut out = Vec::new();
        let single = |a: &IrrepLabel, b: &IrrepLabel| -> Option<IrrepLabel> {
            let parts = tensor_decompose(&self.group, a, b).ok()?;
            (parts.len() == 1 && self.labels.contains_key(&parts[0].0)).then(|| parts[0].0.clone())
        };
        for s in self.window.iter() {
            for t in self.window.iter() {
                let Some(st) = single(s, t) else { continue };
                for r in self.window.iter() {
                    if let (Some(tr), Some(_)) = (single(t, r), single(&st, r)) {
                        if single(s, &tr).is_some() {
                            out.push((s.clone(), t.clone(), r.clone()));
                        }
                    }
                }
            }
        }
        out
    }

    /// γ_σ multiplicative and *-preserving on random base words.
    pub fn homomorphism_deviation(&self, base: &RepresentedBase, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = base.random_element(&mut rng, 6);
            let y = base.random_element(&mut rng, 6);
            for label in self.window.iter() {
                let (gx, gy) = (self.gamma(label, &x)?, self.gamma(label, &y)?);
                worst = worst.max(max_abs(&(self.gamma(label, &(&x * &y))? - &gx * &gy)));
                worst = worst.max(max_abs(&(self.gamma(label, &x.adjoint())? - gx.adjoint())));
            }
        }
        Ok(worst)
    }

    /// Full verification of the factor-system identities.
    pub fn verify(&self, base: &RepresentedBase, tolerance: f64, seed: u64) -> Result<VerificationReport> {
        let mut report = VerificationReport::new();
        let trivial = self.trivial();
        let p1 = &self.label(&trivial)?.p;
        report.check("normalization", "p(1) is the identity", max_abs(&(p1 - identity(self.hb_dim))), tolerance);

        let pairs = self.window_pairs();
        let mut range_dev: f64 = 0.0;
        let mut cov_dev: f64 = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (s, t) in &pairs {
            range_dev = range_dev.max(self.range_deviation(s, t)?);
            let b = base.random_element(&mut rng, 4);
            cov_dev = cov_dev.max(self.covariance_deviation(s, t, &b)?);
        }
        let total_pairs = self.window.len() * self.window.len();
        report
            .check(
                "cocycle_ranges",
                "omega omega* = gamma(1), omega* omega = gamma_13(gamma(1))",
                range_dev,
                tolerance,
            )
            .counts(pairs.len(), total_pairs - pairs.len());
        report
            .check("cocycle_covariance", "gamma_{s t}(b) omega = omega gamma_t(gamma_s(b))_13", cov_dev, tolerance)
            .counts(pairs.len(), total_pairs - pairs.len());
        if self.group.is_abelian() {
            let triples = self.window_triples();
            let devs = triples
                .par_iter()
                .map(|(s, t, r)| self.cocycle_identity_deviation(s, t, r))
                .collect::<Result<Vec<f64>>>()?;
            let dev = devs.into_iter().fold(0.0, f64::max);
            report
                .check(
                    "cocycle_identity",
                    "omega(s, t r) omega(t, r)_134 = omega(s t, r) gamma_r(omega(s, t))_14",
                    dev,
                    tolerance,
                )
                .counts(triples.len(), self.window.len().pow(3) - triples.len());
        }
        let hom = self.homomorphism_deviation(base, 4, seed ^ 0x5eed)?;
        report.check("coaction_homomorphism", "gamma is a *-homomorphism", hom, tolerance);
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, diag};

    fn cyclic_shift(n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |r, c| if r == (c + 1) % n { ONE } else { c64(0.0, 0.0) })
    }

    #[test]
    fn trivial_window_is_identity() {
        let g = GroupModel::cyclic(1);
        let w = TruncationWindow::cyclic_all(1);
        let fs = FactorSystem::custom_abelian(g, w, &[identity(2)], BTreeMap::new()).unwrap();
        let t = fs.trivial();
        let b = diag(&[c64(1.0, 2.0), c64(-3.0, 0.5)]);
        assert_eq!(fs.gamma(&t, &b).unwrap(), b);
        assert_eq!(fs.cocycle(&t, &t).unwrap().matrix, identity(2));
    }

    #[test]
    fn custom_cyclic_system_satisfies_identities() {
        let g = GroupModel::cyclic(4);
        let w = TruncationWindow::cyclic_all(4);
        let fs = FactorSystem::custom_abelian(g, w, &[cyclic_shift(4)], BTreeMap::new()).unwrap();
        let base = RepresentedBase::new(4, vec![("d".into(), diag(&[ONE, c64(2.0, 0.0), c64(0.0, 1.0), c64(-1.0, 0.0)]))]).unwrap();
        let report = fs.verify(&base, 1e-12, 7).unwrap();
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn regular_su2_ranges_hold() {
        let g = GroupModel::su2();
        let w = TruncationWindow::spin_up_to(2);
        let fs = FactorSystem::regular(g, w, 2).unwrap();
        let half = IrrepLabel::Spin(1);
        assert!(fs.range_deviation(&half, &half).unwrap() < 1e-12);
        let c = fs.cocycle(&half, &half).unwrap();
        assert_eq!(c.total_mult, 4);
        assert_eq!(c.parts.len(), 2);
    }

    #[test]
    fn outside_margin_is_flagged_incomplete() {
        let g = GroupModel::torus(1);
        let w = TruncationWindow::torus_box(1, 1);
        let fs = FactorSystem::regular(g, w, 1).unwrap();
        let far = IrrepLabel::Torus(vec![2]);
        assert!(!fs.cocycle(&far, &far).unwrap().complete);
        assert!(fs.window_pairs().iter().all(|(a, b)| fs.cocycle(a, b).unwrap().complete));
    }
}
