//! Elements a_σ(x) of the smooth algebra A₀ and their arithmetic through the
//! factor system.

use std::collections::BTreeMap;

use rand::Rng;

use super::base::RepresentedBase;
use super::factor::FactorSystem;
use crate::error::{Error, Result};
use crate::groups::{GroupPoint, IrrepData, IrrepLabel};
use crate::linalg::{max_abs, zeros, CMatrix, C64, ZERO};

/// Stack b_h into X: H_B → H_B⊗ℂ^m, ξ ↦ Σ_h b_h ξ ⊗ e_h.
pub fn stack_components(bs: &[CMatrix]) -> CMatrix {
    let m = bs.len();
    let (r, c) = bs[0].shape();
    let mut x = zeros(r * m, c);
    for (h, b) in bs.iter().enumerate() {
        for i in 0..r {
            for j in 0..c {
                x[(i * m + h, j)] = b[(i, j)];
            }
        }
    }
    x
}

/// Inverse of [`stack_components`].
pub fn split_components(x: &CMatrix, m: usize) -> Vec<CMatrix> {
    let r = x.nrows() / m;
    (0..m).map(|h| CMatrix::from_fn(r, x.ncols(), |i, j| x[(i * m + h, j)])).collect()
}

/// Σ_σ a_σ(Σ_a X_a ⊗ ē_a) with X_a: H_B → H_B⊗H_σ.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub terms: BTreeMap<IrrepLabel, Vec<CMatrix>>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement { terms: BTreeMap::new() }
    }

    /// b ∈ B as an element of the trivial isotypic component.
    pub fn base(fs: &FactorSystem, b: &CMatrix) -> Self {
        Self::monomial(fs.trivial(), vec![b.clone()])
    }

    pub fn unit(fs: &FactorSystem) -> Self {
        Self::base(fs, &crate::linalg::identity(fs.hb_dim))
    }

    pub fn monomial(label: IrrepLabel, coefficients: Vec<CMatrix>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(label, coefficients);
        AlgebraElement { terms }
    }

    /// Apply p(σ) to every coefficient, the representative that a_σ sees.
    pub fn canonical(&self, fs: &FactorSystem) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (label, xs) in &self.terms {
            let data = fs.label(label)?;
            if xs.len() != data.irrep.dim {
                return Err(Error::DimensionMismatch {
                    expected: data.irrep.dim,
                    found: xs.len(),
                });
            }
            terms.insert(label.clone(), xs.iter().map(|x| &data.p * x).collect());
        }
        Ok(AlgebraElement { terms })
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (label, ys) in &other.terms {
            match terms.get_mut(label) {
                Some(xs) => {
                    for (x, y) in xs.iter_mut().zip(ys) {
                        *x += y;
                    }
                }
                None => {
                    terms.insert(label.clone(), ys.clone());
                }
            }
        }
        AlgebraElement { terms }
    }

    pub fn scale(&self, c: C64) -> Self {
        AlgebraElement {
            terms: self.terms.iter().map(|(l, xs)| (l.clone(), xs.iter().map(|x| x * c).collect())).collect(),
        }
    }

    /// Largest coefficient difference after canonicalization.
    pub fn distance(&self, other: &Self, fs: &FactorSystem) -> Result<f64> {
        let diff = self.canonical(fs)?.add(&other.canonical(fs)?.scale(C64::new(-1.0, 0.0)));
        Ok(diff.terms.values().flatten().map(max_abs).fold(0.0, f64::max))
    }

    /// Replace the V̄ leg of every term by M_σ acting on it.
    fn mix_vbar(&self, fs: &FactorSystem, matrix: impl Fn(&IrrepData) -> Result<CMatrix>) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (label, xs) in &self.terms {
            let m = matrix(&IrrepData::new(&fs.group, label)?)?;
            let out = (0..xs.len())
                .map(|r| {
                    let mut acc = zeros(xs[0].nrows(), xs[0].ncols());
                    for (a, x) in xs.iter().enumerate() {
                        if m[(r, a)] != ZERO {
                            acc += x * m[(r, a)];
                        }
                    }
                    acc
                })
                .collect();
            terms.insert(label.clone(), out);
        }
        Ok(AlgebraElement { terms })
    }

    /// α_g(a_σ(x ⊗ v̄)) = a_σ(x ⊗ σ̄_g v̄).
    pub fn act(&self, fs: &FactorSystem, g: &GroupPoint) -> Result<Self> {
        self.mix_vbar(fs, |irrep| Ok(irrep.sample_conj(g)))
    }

    /// ∂_{X_k} a = d/dt α_{exp(tX_k)}(a) at t = 0: coefficients move by dσ̄(X_k).
    pub fn derive(&self, fs: &FactorSystem, k: usize) -> Result<Self> {
        self.mix_vbar(fs, |irrep| {
            irrep.derived_conj().get(k).cloned().ok_or(Error::DimensionMismatch {
                expected: fs.group.lie_dim,
                found: k,
            })
        })
    }

    /// Product a·b through ω(σ,τ) and γ_τ; components landing outside the
    /// margin raise `WindowOverflow`.
    pub fn multiply(&self, other: &Self, fs: &FactorSystem) -> Result<Self> {
        let mut out = AlgebraElement::zero();
        for (sigma, xs) in &self.terms {
            let ms = fs.mult(sigma)?;
            for (tau, ys) in &other.terms {
                let w = fs.cocycle(sigma, tau)?;
                if !w.complete {
                    return Err(Error::WindowOverflow(format!("{sigma} ⊗ {tau} leaves the margin")));
                }
                let dt = tau.dim();
                for (a, x) in xs.iter().enumerate() {
                    let twisted = &w.matrix * fs.coact(tau, x, ms, 1)?;
                    for (c, y) in ys.iter().enumerate() {
                        let z = &twisted * y;
                        for (rho, iota, off, m) in &w.parts {
                            let block = rows_of_block(&z, fs.hb_dim, *off, *m, w.total_mult);
                            let dr = rho.dim();
                            let entry = out.terms.entry(rho.clone()).or_insert_with(|| vec![zeros(fs.hb_dim * m, fs.hb_dim); dr]);
                            for (r, slot) in entry.iter_mut().enumerate() {
                                let coeff = iota[(a * dt + c, r)];
                                if coeff != ZERO {
                                    *slot += &block * coeff;
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Random element supported on `count` labels drawn from the window.
    pub fn random<R: Rng>(fs: &FactorSystem, base: &RepresentedBase, rng: &mut R, count: usize) -> Result<Self> {
        let labels: Vec<IrrepLabel> = fs.window.iter().cloned().collect();
        let mut out = AlgebraElement::zero();
        for _ in 0..count {
            let label = labels[rng.gen_range(0..labels.len())].clone();
            let data = fs.label(&label)?;
            let coeffs = (0..data.irrep.dim)
                .map(|_| {
                    let comps: Vec<CMatrix> = (0..data.mult).map(|_| base.random_element(rng, 3)).collect();
                    &data.p * stack_components(&comps)
                })
                .collect();
            out = out.add(&AlgebraElement::monomial(label, coeffs));
        }
        Ok(out)
    }
}

/// E_ρ* z: the rows of the ρ block of H_B⊗H_{σ⊗τ}.
pub fn rows_of_block(z: &CMatrix, hb: usize, offset: usize, m: usize, total: usize) -> CMatrix {
    let mut out = zeros(hb * m, z.ncols());
    for i in 0..hb {
        for h in 0..m {
            out.row_mut(i * m + h).copy_from(&z.row(i * total + offset + h));
        }
    }
    out
}
