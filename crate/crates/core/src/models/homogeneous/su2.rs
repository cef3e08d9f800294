//! Quadrature realization on G = SU(2), H = {exp(tX₃)}.
//!
//! Functions are Peter–Weyl coefficient vectors in the orthonormal basis
//! √(2j+1) D^j_ab; pointwise multiplications are done on the Euler-angle grid
//! and projected back. Derivatives along left and right translations act
//! exactly on the coefficients.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, SMatrix, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ad_matrix, adjoint_matrix, exterior_derivation, exterior_power, frames_with, lie_split, CliffordGlue, ComparisonResiduals, HomogeneousSpec};
use crate::error::{Error, Result};
use crate::groups::{spin_matrices, GroupKind, GroupModel, GroupPoint};
use crate::linalg::{c64, eig_hermitian, eigvals_hermitian as eigvals_hermitian_of, random::gauss, CMatrix, C64, I, ZERO};
use crate::report::VerificationReport;

type M8 = SMatrix<C64, 8, 8>;
type V8 = SVector<C64, 8>;

/// Orthogonality defect above which the grid aliases the window's weights.
const ALIASING_LIMIT: f64 = 0.5;
/// Extra 2j headroom so the longest comparison chain is not truncated.
const HEADROOM: u32 = 10;

fn to_m8(m: &CMatrix) -> M8 {
    assert_eq!(m.shape(), (8, 8));
    M8::from_fn(|r, c| m[(r, c)])
}

fn rot(m: &DMatrix<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|r, c| m[(r, c)])
}

#[derive(Debug, Clone)]
struct Grid {
    r: usize,
    /// twice the largest spin represented
    top: u32,
    alpha: Vec<C64>,
    gamma: Vec<C64>,
    beta_weight: Vec<f64>,
    /// Wigner d^j(β) per β node and 2j
    small_d: Vec<Vec<DMatrix<f64>>>,
    rot_a: Vec<Matrix3<f64>>,
    rot_b: Vec<Matrix3<f64>>,
    rot_c: Vec<Matrix3<f64>>,
    lam_a: Vec<M8>,
    lam_b: Vec<M8>,
    lam_c: Vec<M8>,
}

impl Grid {
    fn new(r: usize, top: u32) -> Result<Self> {
        let m = 2 * top as usize + 1;
        let su2 = GroupModel::su2();
        let w = |k: usize| k as f64 - top as f64; // twice-weight index → 2m
        let alphas: Vec<f64> = (0..r).map(|i| 2.0 * PI * i as f64 / r as f64).collect();
        let betas: Vec<f64> = (0..r).map(|i| PI * (i as f64 + 0.5) / r as f64).collect();
        let gammas: Vec<f64> = (0..2 * r).map(|i| 4.0 * PI * i as f64 / (2 * r) as f64).collect();
        let phases = |angles: &[f64]| {
            angles
                .iter()
                .flat_map(|&t| (0..m).map(move |k| (I * (t * w(k) / 2.0)).exp()))
                .collect::<Vec<C64>>()
        };
        let sin_total: f64 = betas.iter().map(|b| b.sin()).sum();
        let small_d = betas
            .iter()
            .map(|&b| {
                (0..=top)
                    .map(|j2| {
                        let gen = &spin_matrices(j2)[1] * (I * b);
                        crate::linalg::expm_skew(&gen).map(|e| e.map(|z| z.re))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let ad = |p: GroupPoint| adjoint_matrix(GroupKind::SU2, &p);
        let euler = |a: f64, b: f64, c: f64| GroupPoint::Euler { alpha: a, beta: b, gamma: c };
        let rot_a: Vec<Matrix3<f64>> = alphas.iter().map(|&a| rot(&ad(euler(a, 0.0, 0.0)))).collect();
        let rot_b: Vec<Matrix3<f64>> = betas.iter().map(|&b| rot(&ad(euler(0.0, b, 0.0)))).collect();
        let rot_c: Vec<Matrix3<f64>> = gammas.iter().map(|&c| rot(&ad(euler(0.0, 0.0, c)))).collect();
        let lam = |rs: &[Matrix3<f64>]| {
            rs.iter()
                .map(|r| to_m8(&exterior_power(&DMatrix::from_fn(3, 3, |i, j| r[(i, j)]))))
                .collect::<Vec<M8>>()
        };
        let _ = su2;
        Ok(Grid {
            r,
            top,
            alpha: phases(&alphas),
            gamma: phases(&gammas),
            beta_weight: betas.iter().map(|b| b.sin() / sin_total).collect(),
            small_d,
            lam_a: lam(&rot_a),
            lam_b: lam(&rot_b),
            lam_c: lam(&rot_c),
            rot_a,
            rot_b,
            rot_c,
        })
    }

    fn npts(&self) -> usize {
        2 * self.r * self.r * self.r
    }

    fn weights(&self) -> usize {
        2 * self.top as usize + 1
    }

    fn point(&self, ia: usize, ib: usize, ic: usize) -> GroupPoint {
        GroupPoint::Euler {
            alpha: 2.0 * PI * ia as f64 / self.r as f64,
            beta: PI * (ib as f64 + 0.5) / self.r as f64,
            gamma: 4.0 * PI * ic as f64 / (2 * self.r) as f64,
        }
    }
}

/// Peter–Weyl layout: offset of the 2j block and its size.
fn offset(j2: u32) -> usize {
    (1..=j2 as usize).map(|d| d * d).sum()
}

fn coef_len(top: u32) -> usize {
    offset(top + 1)
}

#[derive(Debug, Clone)]
pub struct Su2Homogeneous {
    pub spec: HomogeneousSpec,
    pub glue: CliffordGlue,
    grid: Grid,
    f: [M8; 3],
    hor: [M8; 3],
    ver: M8,
    der: [M8; 3],
    w: M8,
    /// Ad_H weights on Cℓ(G/H) ⊗ Cℓ(H) and the eigenbasis realizing them.
    fiber_weights: Vec<f64>,
    fiber_basis: M8,
    derived: Vec<[CMatrix; 3]>,
}

impl Su2Homogeneous {
    pub fn new(spec: &HomogeneousSpec) -> Result<Self> {
        if spec.group != GroupKind::SU2 {
            return Err(Error::UnsupportedSubgroup(format!("SU(2) realization asked for {:?}", spec.group)));
        }
        let split = lie_split(spec)?;
        let glue = CliffordGlue::new(split);
        let top = spec.radius as u32 + HEADROOM;
        let grid = Grid::new(spec.quadrature.max(1), top)?;
        let e = |k: usize| -> Vec<f64> { (0..3).map(|i| if i == k { 1.0 } else { 0.0 }).collect() };
        let f = [0, 1, 2].map(|k| to_m8(&glue.f_g(&e(k))));
        let hor = [0, 1, 2].map(|k| to_m8(&glue.f_horizontal(&e(k))));
        let ver = to_m8(&glue.f_vertical(&e(2)));
        let der = [0, 1, 2].map(|k| to_m8(&exterior_derivation(&ad_matrix(GroupKind::SU2, &e(k)))));
        let w = to_m8(&glue.w);
        // Ad_{exp tX₃} pulled back through W; eigenvalues i·w
        let lifted_der = w.adjoint() * der[2] * w;
        let herm = CMatrix::from_fn(8, 8, |r, c| -I * lifted_der[(r, c)]);
        let eig = eig_hermitian(&herm)?;
        let fiber_basis = to_m8(&eig.eigenvectors);
        let derived = (0..=top).map(|j2| spin_matrices(j2).map(|m| m * I)).collect();
        let out = Su2Homogeneous {
            spec: spec.clone(),
            glue,
            grid,
            f,
            hor,
            ver,
            der,
            w,
            fiber_weights: eig.eigenvalues.clone(),
            fiber_basis,
            derived,
        };
        let dev = out.orthogonality_deviation();
        if !(dev <= ALIASING_LIMIT) {
            return Err(Error::ResolutionTooLow { deviation: dev });
        }
        Ok(out)
    }

    pub fn top(&self) -> u32 {
        self.grid.top
    }

    pub fn coef_len(&self) -> usize {
        coef_len(self.grid.top)
    }

    /// Grid values of Σ c_jab √(2j+1) D^j_ab, `k` components per coefficient.
    fn synthesize(&self, c: &[C64], k: usize) -> Vec<C64> {
        let g = &self.grid;
        let (r, m, gc) = (g.r, g.weights(), 2 * g.r);
        let top = g.top as usize;
        let mut s = vec![ZERO; r * m * m * k];
        for (ib, ds) in g.small_d.iter().enumerate() {
            for j2 in 0..=top {
                let norm = ((j2 + 1) as f64).sqrt();
                let d = &ds[j2];
                for a in 0..=j2 {
                    let ma = j2 + top - 2 * a;
                    for b in 0..=j2 {
                        let mb = j2 + top - 2 * b;
                        let coef = norm * d[(a, b)];
                        let src = (offset(j2 as u32) + a * (j2 + 1) + b) * k;
                        let dst = ((ib * m + ma) * m + mb) * k;
                        for q in 0..k {
                            s[dst + q] += c[src + q] * coef;
                        }
                    }
                }
            }
        }
        let mut t = vec![ZERO; r * m * gc * k];
        for ib in 0..r {
            for ma in 0..m {
                let row = &s[(ib * m + ma) * m * k..(ib * m + ma + 1) * m * k];
                if row.iter().all(|z| *z == ZERO) {
                    continue;
                }
                for ic in 0..gc {
                    let ph = &g.gamma[ic * m..(ic + 1) * m];
                    let dst = ((ib * m + ma) * gc + ic) * k;
                    for mb in 0..m {
                        let p = ph[mb];
                        for q in 0..k {
                            t[dst + q] += row[mb * k + q] * p;
                        }
                    }
                }
            }
        }
        let mut out = vec![ZERO; g.npts() * k];
        for ia in 0..r {
            let ph = &g.alpha[ia * m..(ia + 1) * m];
            for ib in 0..r {
                for ma in 0..m {
                    let p = ph[ma];
                    let src = (ib * m + ma) * gc * k;
                    let dst = (ia * r + ib) * gc * k;
                    for x in 0..gc * k {
                        out[dst + x] += t[src + x] * p;
                    }
                }
            }
        }
        out
    }

    /// Quadrature projection onto the coefficient window.
    fn analyze(&self, f: &[C64], k: usize) -> Vec<C64> {
        let g = &self.grid;
        let (r, m, gc) = (g.r, g.weights(), 2 * g.r);
        let top = g.top as usize;
        let mut a_arr = vec![ZERO; r * r * m * k];
        for ia in 0..r {
            for ib in 0..r {
                let src = (ia * r + ib) * gc * k;
                let dst = (ia * r + ib) * m * k;
                for ic in 0..gc {
                    let ph = &g.gamma[ic * m..(ic + 1) * m];
                    for mb in 0..m {
                        let p = ph[mb].conj() / gc as f64;
                        for q in 0..k {
                            a_arr[dst + mb * k + q] += f[src + ic * k + q] * p;
                        }
                    }
                }
            }
        }
        let mut b_arr = vec![ZERO; r * m * m * k];
        for ia in 0..r {
            let ph = &g.alpha[ia * m..(ia + 1) * m];
            for ib in 0..r {
                let src = (ia * r + ib) * m * k;
                for ma in 0..m {
                    let p = ph[ma].conj() / r as f64;
                    let dst = (ib * m + ma) * m * k;
                    for x in 0..m * k {
                        b_arr[dst + x] += a_arr[src + x] * p;
                    }
                }
            }
        }
        let mut c = vec![ZERO; coef_len(g.top) * k];
        for (ib, ds) in g.small_d.iter().enumerate() {
            let wb = g.beta_weight[ib];
            for j2 in 0..=top {
                let norm = ((j2 + 1) as f64).sqrt() * wb;
                let d = &ds[j2];
                for a in 0..=j2 {
                    let ma = j2 + top - 2 * a;
                    for b in 0..=j2 {
                        let mb = j2 + top - 2 * b;
                        let coef = norm * d[(a, b)];
                        let src = ((ib * m + ma) * m + mb) * k;
                        let dst = (offset(j2 as u32) + a * (j2 + 1) + b) * k;
                        for q in 0..k {
                            c[dst + q] += b_arr[src + q] * coef;
                        }
                    }
                }
            }
        }
        c
    }

    /// Largest |⟨χ_i, χ_j⟩ − δ_ij| seen through synthesis and analysis of
    /// every character in the window.
    pub fn orthogonality_deviation(&self) -> f64 {
        let n = self.coef_len();
        let mut worst: f64 = 0.0;
        for j2 in 0..=self.grid.top {
            let mut c = vec![ZERO; n];
            let d = j2 as usize + 1;
            for a in 0..d {
                c[offset(j2) + a * d + a] = c64(1.0 / (d as f64).sqrt(), 0.0);
            }
            let back = self.analyze(&self.synthesize(&c, 1), 1);
            for (x, y) in back.iter().zip(&c) {
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }

    /// Visit every grid point with Ad_g on Lie(G) and on Cℓ(G).
    fn pointwise(&self, inputs: &[&[C64]], op: impl Fn(&Matrix3<f64>, &M8, &[V8]) -> V8) -> Vec<C64> {
        let g = &self.grid;
        let gc = 2 * g.r;
        let mut out = vec![ZERO; g.npts() * 8];
        let mut vs = vec![V8::zeros(); inputs.len()];
        for ia in 0..g.r {
            for ib in 0..g.r {
                let rab = g.rot_a[ia] * g.rot_b[ib];
                let lab = g.lam_a[ia] * g.lam_b[ib];
                for ic in 0..gc {
                    let p = (ia * g.r + ib) * gc + ic;
                    let rg = rab * g.rot_c[ic];
                    let lg = lab * g.lam_c[ic];
                    for (v, inp) in vs.iter_mut().zip(inputs) {
                        *v = V8::from_column_slice(&inp[p * 8..p * 8 + 8]);
                    }
                    let res = op(&rg, &lg, &vs);
                    out[p * 8..p * 8 + 8].copy_from_slice(res.as_slice());
                }
            }
        }
        out
    }

    fn scalar_multiply(&self, f: &[C64], xs: &[C64]) -> Vec<C64> {
        let mut out = xs.to_vec();
        for (p, fv) in f.iter().enumerate() {
            for q in 0..8 {
                out[p * 8 + q] *= fv;
            }
        }
        out
    }

    fn map_components(&self, c: &[C64], m: &M8) -> Vec<C64> {
        let mut out = vec![ZERO; c.len()];
        for (src, dst) in c.chunks(8).zip(out.chunks_mut(8)) {
            dst.copy_from_slice((m * V8::from_column_slice(src)).as_slice());
        }
        out
    }

    /// d/dt ξ(e^{−tX_k} g) (left = true) or d/dt ξ(g e^{−tX_k}).
    fn derivative(&self, c: &[C64], k: usize, left: bool) -> Vec<C64> {
        let mut out = vec![ZERO; c.len()];
        for j2 in 0..=self.grid.top {
            let d = j2 as usize + 1;
            let x = &self.derived[j2 as usize][k];
            let base = offset(j2);
            for a in 0..d {
                for b in 0..d {
                    let dst = (base + a * d + b) * 8;
                    for t in 0..d {
                        // left: c'_ab = −Σ_t dσ_ta c_tb ; right: c'_ab = −Σ_t dσ_bt c_at
                        let (coef, src) = if left { (x[(t, a)], base + t * d + b) } else { (x[(b, t)], base + a * d + t) };
                        if coef == ZERO {
                            continue;
                        }
                        for q in 0..8 {
                            out[dst + q] -= c[src * 8 + q] * coef;
                        }
                    }
                }
            }
        }
        out
    }

    fn derivative_grids(&self, c: &[C64], left: bool) -> Vec<Vec<C64>> {
        (0..3).map(|k| self.synthesize(&self.derivative(c, k, left), 8)).collect()
    }

    fn f_of(&self, v: &[f64; 3], table: &[M8; 3]) -> M8 {
        table[0] * c64(v[0], 0.0) + table[1] * c64(v[1], 0.0) + table[2] * c64(v[2], 0.0)
    }

    fn frame(&self, rg: &Matrix3<f64>, horizontal: bool) -> Matrix3<f64> {
        let p = if horizontal {
            Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, 0.0))
        } else {
            Matrix3::from_diagonal(&nalgebra::Vector3::new(0.0, 0.0, 1.0))
        };
        rg * p * rg.transpose()
    }

    /// Σ_k F_{Y_k} ∂^G_{Y_k} and Σ_k F_{Z_k} ∂^G_{Z_k} with the literal frames.
    pub fn split_parts(&self, xi: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let ls = self.derivative_grids(xi, true);
        let refs: Vec<&[C64]> = ls.iter().map(|v| v.as_slice()).collect();
        let part = |horizontal: bool| {
            let grid = self.pointwise(&refs, |rg, _, vs| {
                let y = self.frame(rg, horizontal);
                let mut acc = V8::zeros();
                for k in 0..3 {
                    let yk = [y[(0, k)], y[(1, k)], y[(2, k)]];
                    let fy = self.f_of(&yk, &self.f);
                    let dir = vs[0] * c64(yk[0], 0.0) + vs[1] * c64(yk[1], 0.0) + vs[2] * c64(yk[2], 0.0);
                    acc += fy * dir;
                }
                acc
            });
            self.analyze(&grid, 8)
        };
        (part(true), part(false))
    }

    /// D_G = Σ_k F_{X_k} ∂^G_{X_k}, exact on coefficients.
    pub fn dirac_g(&self, xi: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; xi.len()];
        for k in 0..3 {
            let part = self.map_components(&self.derivative(xi, k, true), &self.f[k]);
            out.iter_mut().zip(part).for_each(|(o, p)| *o += p);
        }
        out
    }

    /// (Uφ)(g) = Ad_g W Ψ(g, 1).
    pub fn apply_u(&self, x: &[C64]) -> Vec<C64> {
        let grid = self.synthesize(x, 8);
        let w = self.w;
        self.analyze(&self.pointwise(&[&grid], |_, lg, vs| lg * w * vs[0]), 8)
    }

    pub fn apply_u_adjoint(&self, xi: &[C64]) -> Vec<C64> {
        let grid = self.synthesize(xi, 8);
        let wa = self.w.adjoint();
        self.analyze(&self.pointwise(&[&grid], |_, lg, vs| wa * lg.transpose() * vs[0]), 8)
    }

    /// D̂_h: Σ_j (F_{Y'_j} ⊗ Ω) ∂^{G/H}_{Y'_j} with Y'_j = P_{G/H} Ad_g⁻¹ X_j.
    pub fn lifted_horizontal(&self, x: &[C64]) -> Vec<C64> {
        let rs = self.derivative_grids(x, false);
        let refs: Vec<&[C64]> = rs.iter().map(|v| v.as_slice()).collect();
        let p = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, 0.0));
        let grid = self.pointwise(&refs, |rg, _, vs| {
            let y = p * rg.transpose();
            let mut acc = V8::zeros();
            for j in 0..3 {
                let yj = [y[(0, j)], y[(1, j)], y[(2, j)]];
                let dir = vs[0] * c64(yj[0], 0.0) + vs[1] * c64(yj[1], 0.0) + vs[2] * c64(yj[2], 0.0);
                acc += self.f_of(&yj, &self.hor) * dir;
            }
            acc
        });
        self.analyze(&grid, 8)
    }

    /// Weight-basis coordinates of every coefficient with its H-character
    /// ν = −(m_b + w) fixed by equivariance.
    fn with_fiber_character(&self, x: &[C64], op: impl Fn(f64) -> C64) -> Vec<C64> {
        let vinv = self.fiber_basis.adjoint();
        let mut out = vec![ZERO; x.len()];
        for j2 in 0..=self.grid.top {
            let d = j2 as usize + 1;
            for a in 0..d {
                for b in 0..d {
                    let idx = (offset(j2) + a * d + b) * 8;
                    let mb = j2 as f64 / 2.0 - b as f64;
                    let mut y = vinv * V8::from_column_slice(&x[idx..idx + 8]);
                    for (q, wq) in self.fiber_weights.iter().enumerate() {
                        y[q] *= op(-(mb + wq));
                    }
                    out[idx..idx + 8].copy_from_slice((self.fiber_basis * y).as_slice());
                }
            }
        }
        out
    }

    /// D̂_v = d/dt (μ_{exp(−tX₃)} ⊗ 1 ⊗ F_{X₃}): ε_ν picks up iν.
    pub fn lifted_vertical(&self, x: &[C64]) -> Vec<C64> {
        let charged = self.with_fiber_character(x, |nu| I * nu);
        self.map_components(&charged, &self.ver)
    }

    /// μ_h for h = exp(tX₃): Ψ(g, k) ↦ Ψ(g, h⁻¹k).
    pub fn mu(&self, x: &[C64], t: f64) -> Vec<C64> {
        self.with_fiber_character(x, |nu| (-I * nu * t).exp())
    }

    /// (r_h ξ)(g) = ξ(gh) for h = exp(tX₃).
    pub fn right_translate(&self, xi: &[C64], t: f64) -> Vec<C64> {
        let mut out = xi.to_vec();
        for j2 in 0..=self.grid.top {
            let d = j2 as usize + 1;
            for a in 0..d {
                for b in 0..d {
                    let ph = (I * t * (j2 as f64 / 2.0 - b as f64)).exp();
                    let idx = (offset(j2) + a * d + b) * 8;
                    out[idx..idx + 8].iter_mut().for_each(|z| *z *= ph);
                }
            }
        }
        out
    }

    /// Σ_k F_{Y_k}(d_{Y_k}U)U* = −Σ_k F_{Y_k} Λ(ad_{Y_k}).
    pub fn correction(&self, xi: &[C64]) -> Vec<C64> {
        let grid = self.synthesize(xi, 8);
        let out = self.pointwise(&[&grid], |rg, _, vs| {
            let y = self.frame(rg, true);
            let mut acc = V8::zeros();
            for k in 0..3 {
                let yk = [y[(0, k)], y[(1, k)], y[(2, k)]];
                acc -= self.f_of(&yk, &self.f) * (self.f_of(&yk, &self.der) * vs[0]);
            }
            acc
        });
        self.analyze(&out, 8)
    }

    /// Spectrum of D_G on each spin block 2j ≤ radius; the right index b
    /// only contributes 2j+1 copies.
    pub fn canonical_spectrum(&self) -> Result<Vec<(String, Vec<f64>)>> {
        (0..=self.spec.radius as u32)
            .map(|j2| {
                let d = j2 as usize + 1;
                let mut m = CMatrix::zeros(8 * d, 8 * d);
                for k in 0..3 {
                    let left = -self.derived[j2 as usize][k].transpose();
                    let f = CMatrix::from_fn(8, 8, |r, c| self.f[k][(r, c)]);
                    m += crate::linalg::kron(&left, &f);
                }
                let once = eigvals_hermitian_of(&m)?;
                let mut all: Vec<f64> = once.iter().flat_map(|&x| std::iter::repeat(x).take(d)).collect();
                all.sort_by(f64::total_cmp);
                Ok((format!("spin {j2}/2"), all))
            })
            .collect()
    }

    fn random_state(&self, rng: &mut ChaCha8Rng) -> Vec<C64> {
        let mut c = vec![ZERO; self.coef_len() * 8];
        let live = coef_len(self.spec.radius as u32) * 8;
        for z in c.iter_mut().take(live) {
            *z = c64(gauss(rng), gauss(rng));
        }
        let n = norm(&c);
        c.iter_mut().for_each(|z| *z /= n);
        c
    }

    /// Random f = Σ_{2j ≤ 2} f_ab √(2j+1) D^j_ab on the grid.
    fn random_function(&self, rng: &mut ChaCha8Rng) -> Vec<C64> {
        let mut c = vec![ZERO; self.coef_len()];
        for z in c.iter_mut().take(coef_len(2)) {
            *z = c64(gauss(rng), gauss(rng)) * 0.5;
        }
        self.synthesize(&c, 1)
    }

    fn pi(&self, f: &[C64], x: &[C64]) -> Vec<C64> {
        self.analyze(&self.scalar_multiply(f, &self.synthesize(x, 8)), 8)
    }

    pub fn residuals(&self, samples: usize, seed: u64) -> Result<ComparisonResiduals> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut res = ComparisonResiduals::default();
        for _ in 0..samples {
            let x = self.random_state(&mut rng);
            let ux = self.apply_u(&x);
            res.unitarity = res.unitarity.max((norm(&ux) - 1.0).abs()).max(norm(&sub(&self.apply_u_adjoint(&ux), &x)));

            let (dh_ux, dv_ux) = self.split_parts(&ux);
            res.vertical = res.vertical.max(norm(&sub(&dv_ux, &self.apply_u(&self.lifted_vertical(&x)))));
            let k_ux = self.correction(&ux);
            res.correction_norm = res.correction_norm.max(norm(&k_ux));
            let lifted = self.apply_u(&self.lifted_horizontal(&x));
            res.horizontal = res.horizontal.max(norm(&sub(&sub(&dh_ux, &lifted), &k_ux)));

            let xi = self.random_state(&mut rng);
            let (dh, dv) = self.split_parts(&xi);
            res.split = res.split.max(norm(&sub(&sub(&self.dirac_g(&xi), &dh), &dv)));

            let f = self.random_function(&mut rng);
            let c = |v: &[C64]| -> Vec<C64> {
                let (h, _) = self.split_parts(v);
                sub(&h, &self.apply_u(&self.lifted_horizontal(&self.apply_u_adjoint(v))))
            };
            let comm = sub(&c(&self.pi(&f, &xi)), &self.pi(&f, &c(&xi)));
            res.correction_commutator = res.correction_commutator.max(norm(&comm));
            res.intertwining = res.intertwining.max(norm(&sub(&self.apply_u(&self.pi(&f, &x)), &self.pi(&f, &ux))));

            let t = rng.gen_range(0.0..4.0 * PI);
            res.equivariance = res.equivariance.max(norm(&sub(&self.right_translate(&ux, t), &self.apply_u(&self.mu(&x, t)))));
        }
        let mut pts = Vec::new();
        for _ in 0..64 {
            let (ia, ib, ic) = (rng.gen_range(0..self.grid.r), rng.gen_range(0..self.grid.r), rng.gen_range(0..2 * self.grid.r));
            pts.push(self.grid.point(ia, ib, ic));
        }
        res.frames = frames_with(&self.glue.split, GroupKind::SU2, &pts).deviation();
        Ok(res)
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Residuals at two quadrature resolutions; each must not grow by more than
/// a factor 2 (plus a rounding floor) under refinement.
pub fn refinement_report(
    twice_max_spin: usize,
    coarse: usize,
    fine: usize,
    samples: usize,
    seed: u64,
) -> Result<(ComparisonResiduals, ComparisonResiduals, VerificationReport)> {
    let a = Su2Homogeneous::new(&HomogeneousSpec::su2(twice_max_spin, coarse))?.residuals(samples, seed)?;
    let b = Su2Homogeneous::new(&HomogeneousSpec::su2(twice_max_spin, fine))?.residuals(samples, seed)?;
    let mut rep = VerificationReport::new();
    for ((name, anchor, va), (_, _, vb)) in a.named().into_iter().zip(b.named()) {
        rep.record(&format!("{name} at {coarse}"), anchor, va);
        rep.record(&format!("{name} at {fine}"), anchor, vb);
        let growth = vb - 2.0 * va - 1e-12;
        rep.check(
            &format!("{name} refinement"),
            "residual does not grow under quadrature refinement",
            growth.max(0.0),
            0.0,
        );
    }
    Ok((a, b, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{IrrepData, IrrepLabel};

    fn small() -> Su2Homogeneous {
        Su2Homogeneous::new(&HomogeneousSpec::su2(1, 16)).unwrap()
    }

    #[test]
    fn synthesis_matches_wigner_functions() {
        let s = small();
        let mut c = vec![ZERO; s.coef_len()];
        // 2j = 2, a = 0, b = 1
        c[offset(2) + 1] = c64(1.0, 0.0);
        let grid = s.synthesize(&c, 1);
        let irrep = IrrepData::new(&GroupModel::su2(), &IrrepLabel::Spin(2)).unwrap();
        let (ia, ib, ic) = (3, 5, 7);
        let p = (ia * s.grid.r + ib) * 2 * s.grid.r + ic;
        let direct = irrep.sample(&s.grid.point(ia, ib, ic))[(0, 1)] * 3f64.sqrt();
        assert!((grid[p] - direct).norm() < 1e-12);
    }

    #[test]
    fn grid_adjoint_matches_direct_evaluation() {
        let s = small();
        let g = &s.grid;
        let (ia, ib, ic) = (2, 9, 21);
        let r = g.rot_a[ia] * g.rot_b[ib] * g.rot_c[ic];
        let direct = adjoint_matrix(GroupKind::SU2, &g.point(ia, ib, ic));
        assert!((r - rot(&direct)).abs().max() < 1e-13);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = small();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = s.random_state(&mut rng);
        let su2 = GroupModel::su2();
        let irreps: Vec<IrrepData> = (0..=s.grid.top).map(|j2| IrrepData::new(&su2, &IrrepLabel::Spin(j2)).unwrap()).collect();
        // Σ c_jab √(2j+1) σ^j_ab with σ^j given per spin
        let eval = |coeffs: &[C64], sigma: &dyn Fn(&IrrepData) -> CMatrix| -> V8 {
            let mut acc = V8::zeros();
            for (j2, irrep) in irreps.iter().enumerate() {
                let dm = sigma(irrep);
                let d = j2 + 1;
                for a in 0..d {
                    for b in 0..d {
                        let idx = (offset(j2 as u32) + a * d + b) * 8;
                        acc += V8::from_column_slice(&coeffs[idx..idx + 8]) * (dm[(a, b)] * (d as f64).sqrt());
                    }
                }
            }
            acc
        };
        let g = GroupPoint::Euler {
            alpha: 0.4,
            beta: 1.3,
            gamma: 2.2,
        };
        let h = 1e-5;
        for k in 0..3 {
            let (fw, bw) = (su2.exp_lie(k, -h), su2.exp_lie(k, h));
            let fd = (eval(&c, &|ir| ir.sample(&fw) * ir.sample(&g)) - eval(&c, &|ir| ir.sample(&bw) * ir.sample(&g))) / c64(2.0 * h, 0.0);
            assert!((fd - eval(&s.derivative(&c, k, true), &|ir| ir.sample(&g))).norm() < 1e-6, "left {k}");
            let fd = (eval(&c, &|ir| ir.sample(&g) * ir.sample(&fw)) - eval(&c, &|ir| ir.sample(&g) * ir.sample(&bw))) / c64(2.0 * h, 0.0);
            assert!((fd - eval(&s.derivative(&c, k, false), &|ir| ir.sample(&g))).norm() < 1e-6, "right {k}");
        }
    }

    #[test]
    fn block_spectrum_matches_the_coefficient_operator() {
        let s = small();
        let spec = s.canonical_spectrum().unwrap();
        // spin 1/2: apply D_G to every basis vector of the (a, component) block at b = 0
        let base = offset(1);
        let mut m = CMatrix::zeros(16, 16);
        for col in 0..16 {
            let (a, q) = (col / 8, col % 8);
            let mut x = vec![ZERO; s.coef_len() * 8];
            x[(base + a * 2) * 8 + q] = c64(1.0, 0.0);
            let y = s.dirac_g(&x);
            for row in 0..16 {
                let (ar, qr) = (row / 8, row % 8);
                m[(row, col)] = y[(base + ar * 2) * 8 + qr];
            }
        }
        let direct = crate::linalg::eigvals_hermitian(&m).unwrap();
        let listed: Vec<f64> = spec[1].1.iter().step_by(2).copied().collect();
        assert!(crate::dirac_lift::multiset_distance(&direct, &listed) < 1e-12);
        // D_G annihilates constant sections
        assert!(spec[0].1.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn low_resolution_is_rejected() {
        let err = Su2Homogeneous::new(&HomogeneousSpec::su2(4, 3)).unwrap_err();
        assert!(matches!(err, Error::ResolutionTooLow { .. }));
    }

    #[test]
    fn residuals_shrink_with_resolution() {
        let a = Su2Homogeneous::new(&HomogeneousSpec::su2(1, 12)).unwrap().residuals(1, 3).unwrap();
        let b = Su2Homogeneous::new(&HomogeneousSpec::su2(1, 24)).unwrap().residuals(1, 3).unwrap();
        eprintln!("{a:?}\n{b:?}");
        assert!(b.vertical <= 2.0 * a.vertical + 1e-12);
        assert!(b.horizontal <= 2.0 * a.horizontal + 1e-12);
        assert!(a.frames < 1e-13 && a.equivariance < 1.0);
    }
}
