//! Exact Fourier realization on a torus G = Tᵈ with a sub-torus H.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{exterior_derivation, exterior_power, frames_with, lie_split, CliffordGlue, ComparisonResiduals, HomogeneousSpec, SubgroupSpec};
use crate::error::{Error, Result};
use crate::groups::{box_points, haar_quadrature, GroupKind, GroupModel, GroupPoint};
use crate::linalg::{c64, identity, mul_sparse_right, op_norm, random, zeros, CMatrix, C64, I};

#[derive(Debug, Clone)]
pub struct TorusHomogeneous {
    pub spec: HomogeneousSpec,
    pub glue: CliffordGlue,
    /// Integer directions of H as columns.
    pub directions: DMatrix<f64>,
    /// Character box of L²(G).
    pub modes: Vec<Vec<i64>>,
    /// Equivariant pairs (m, n): e_m(g) ε_n(k) with n = −Dᵀm.
    pub lifted: Vec<(Vec<i64>, Vec<i64>)>,
    mode_index: HashMap<Vec<i64>, usize>,
    lifted_index: HashMap<(Vec<i64>, Vec<i64>), usize>,
    pub d_g: CMatrix,
    pub d_h: CMatrix,
    pub d_v: CMatrix,
    pub hat_h: CMatrix,
    pub hat_v: CMatrix,
    pub u: CMatrix,
    /// Σ_k F_{Y_k}(d_{Y_k}U)U*.
    pub correction: CMatrix,
}

fn place(target: &mut CMatrix, row: usize, col: usize, block: &CMatrix) {
    target.view_mut((row * block.nrows(), col * block.ncols()), block.shape()).copy_from(block);
}

impl TorusHomogeneous {
    pub fn new(spec: &HomogeneousSpec) -> Result<Self> {
        let d = match spec.group {
            GroupKind::Torus(d) => d,
            other => return Err(Error::UnsupportedSubgroup(format!("torus realization asked for {other:?}"))),
        };
        let split = lie_split(spec)?;
        let dirs = match &spec.subgroup {
            SubgroupSpec::Directions(v) => v.clone(),
            SubgroupSpec::DiagonalU1 => unreachable!("rejected by lie_split"),
        };
        let r = dirs.len();
        let directions = DMatrix::from_fn(d, r, |i, c| dirs[c][i] as f64);
        // H-coordinates of Z ∈ Lie(H): exp(Z) = D t
        let coords = (directions.transpose() * &directions).try_inverse().expect("rank checked") * directions.transpose();
        let glue = CliffordGlue::new(split.clone());
        let frame = frames_with(&split, spec.group, &[GroupPoint::identity(&GroupModel::torus(d))]);
        let (y, z) = (&frame.horizontal[0], &frame.vertical[0]);

        let n = spec.radius as i64;
        let modes = box_points(d, n);
        let lifted: Vec<(Vec<i64>, Vec<i64>)> = modes
            .iter()
            .map(|m| {
                let nn = (0..r).map(|c| -(0..d).map(|i| dirs[c][i] * m[i]).sum::<i64>()).collect();
                (m.clone(), nn)
            })
            .collect();
        let mode_index = modes.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let lifted_index = lifted.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();

        let (cg, cl) = (glue.cl_g.spin_dim, glue.lifted_dim());
        let dim_g = modes.len() * cg;
        let dim_l = lifted.len() * cl;
        let mut out = TorusHomogeneous {
            spec: spec.clone(),
            directions,
            d_g: zeros(dim_g, dim_g),
            d_h: zeros(dim_g, dim_g),
            d_v: zeros(dim_g, dim_g),
            hat_h: zeros(dim_l, dim_l),
            hat_v: zeros(dim_l, dim_l),
            u: zeros(dim_g, dim_l),
            correction: zeros(dim_g, dim_g),
            modes,
            lifted,
            mode_index,
            lifted_index,
            glue,
        };
        // Ad_g = 1 on an abelian group, kept explicit so U reads as Ad_g W
        let ad_w = exterior_power(&DMatrix::identity(d, d)) * &out.glue.w;
        let col = |m: &DMatrix<f64>, k: usize| m.column(k).iter().copied().collect::<Vec<f64>>();
        let mut kcorr = zeros(cg, cg);
        for k in 0..d {
            // d/dt Ad_{exp(−tY)g} Ad_g⁻¹ = −Λ(ad_Y)
            let yk = col(y, k);
            kcorr -= out.glue.f_g(&yk) * exterior_derivation(&super::ad_matrix(spec.group, &yk));
        }
        for (i, m) in out.modes.clone().iter().enumerate() {
            let mf: Vec<f64> = m.iter().map(|&x| x as f64).collect();
            // ∂^G_X e_m = −i (m·X) e_m
            let deriv = |v: &[f64]| -I * super::dot(&mf, v);
            let mut dg = zeros(cg, cg);
            let mut dh = zeros(cg, cg);
            let mut dv = zeros(cg, cg);
            let mut hh = zeros(cl, cl);
            let mut hv = zeros(cl, cl);
            for k in 0..d {
                let xk: Vec<f64> = (0..d).map(|j| if j == k { 1.0 } else { 0.0 }).collect();
                dg += out.glue.f_g(&xk) * deriv(&xk);
                let (yk, zk) = (col(y, k), col(z, k));
                dh += out.glue.f_g(&yk) * deriv(&yk);
                dv += out.glue.f_g(&zk) * deriv(&zk);
                // Y'_k = P_{G/H} Ad_g⁻¹ X_k, differentiated by right translation
                hh += out.glue.f_horizontal(&yk) * deriv(&yk);
            }
            let nn = &out.lifted[i].1;
            for b in 0..split.vertical.ncols() {
                let zb = col(&split.vertical, b);
                // d/dt μ_{exp(−tZ)} ε_n = i (n·t_Z) ε_n
                let tz: f64 = (0..r).map(|c| nn[c] as f64 * (0..d).map(|j| coords[(c, j)] * zb[j]).sum::<f64>()).sum();
                hv += out.glue.f_vertical(&zb) * (I * tz);
            }
            place(&mut out.d_g, i, i, &dg);
            place(&mut out.d_h, i, i, &dh);
            place(&mut out.d_v, i, i, &dv);
            place(&mut out.hat_h, i, i, &hh);
            place(&mut out.hat_v, i, i, &hv);
            place(&mut out.correction, i, i, &kcorr);
            // U reads Ψ(g, 1): ε_n(1) = 1
            place(&mut out.u, i, i, &ad_w);
        }
        Ok(out)
    }

    fn interior(&self) -> Vec<usize> {
        let n = self.spec.radius as i64;
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, m)| m.iter().all(|x| x.abs() < n))
            .map(|(i, _)| i)
            .collect()
    }

    fn expand(&self, modes: &[usize], width: usize) -> Vec<usize> {
        modes.iter().flat_map(|&i| (0..width).map(move |c| i * width + c)).collect()
    }

    /// π_G(f) for f = Σ f_a e_a; components leaving the box are dropped.
    pub fn pi_g(&self, f: &[(Vec<i64>, C64)]) -> CMatrix {
        let cg = self.glue.cl_g.spin_dim;
        let mut out = zeros(self.d_g.nrows(), self.d_g.ncols());
        for (i, m) in self.modes.iter().enumerate() {
            for (a, fa) in f {
                let target: Vec<i64> = m.iter().zip(a).map(|(x, y)| x + y).collect();
                if let Some(&j) = self.mode_index.get(&target) {
                    place(&mut out, j, i, &(identity(cg) * *fa));
                }
            }
        }
        out
    }

    /// π(f)Ψ(g, k) = f(gk⁻¹)Ψ(g, k) on the equivariant space.
    pub fn pi_lifted(&self, f: &[(Vec<i64>, C64)]) -> Result<CMatrix> {
        let cl = self.glue.lifted_dim();
        let mut out = zeros(self.hat_h.nrows(), self.hat_h.ncols());
        for (i, (m, n)) in self.lifted.iter().enumerate() {
            for (a, fa) in f {
                let tm: Vec<i64> = m.iter().zip(a).map(|(x, y)| x + y).collect();
                if !self.mode_index.contains_key(&tm) {
                    continue;
                }
                // f(g k⁻¹) = Σ f_a e_a(g) ε_{−Dᵀa}(k)
                let tn: Vec<i64> = n
                    .iter()
                    .enumerate()
                    .map(|(c, x)| x - (0..a.len()).map(|j| self.directions[(j, c)] as i64 * a[j]).sum::<i64>())
                    .collect();
                let j = *self
                    .lifted_index
                    .get(&(tm.clone(), tn.clone()))
                    .ok_or_else(|| Error::ShapeMismatch(format!("({tm:?}, {tn:?}) is not equivariant")))?;
                place(&mut out, j, i, &(identity(cl) * *fa));
            }
        }
        Ok(out)
    }

    /// (r_h ξ)(g) = ξ(gh) and (μ_h Ψ)(g, k) = Ψ(g, h⁻¹k) for h = exp(Dt).
    pub fn translations(&self, t: &[f64]) -> (CMatrix, CMatrix) {
        let d = self.modes[0].len();
        let h: Vec<f64> = (0..d).map(|i| (0..t.len()).map(|c| self.directions[(i, c)] * t[c]).sum()).collect();
        let cg = self.glue.cl_g.spin_dim;
        let cl = self.glue.lifted_dim();
        let mut r = zeros(self.d_g.nrows(), self.d_g.ncols());
        let mut mu = zeros(self.hat_h.nrows(), self.hat_h.ncols());
        for (i, (m, n)) in self.lifted.iter().enumerate() {
            let phase_r: f64 = m.iter().zip(&h).map(|(a, b)| *a as f64 * b).sum();
            let phase_mu: f64 = -n.iter().zip(t).map(|(a, b)| *a as f64 * b).sum::<f64>();
            place(&mut r, i, i, &(identity(cg) * (I * phase_r).exp()));
            place(&mut mu, i, i, &(identity(cl) * (I * phase_mu).exp()));
        }
        (r, mu)
    }

    pub fn residuals(&self, samples: usize, seed: u64) -> Result<ComparisonResiduals> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let uad = self.u.adjoint();
        let d = self.modes[0].len();
        let mut res = ComparisonResiduals {
            split: op_norm(&(&self.d_g - &self.d_h - &self.d_v)),
            vertical: op_norm(&(&self.d_v - mul_sparse_right(&mul_sparse_right(&self.u, &self.hat_v), &uad))),
            correction_norm: op_norm(&self.correction),
            unitarity: op_norm(&(mul_sparse_right(&uad, &self.u) - identity(self.u.ncols()))),
            ..Default::default()
        };
        let conj_h = mul_sparse_right(&mul_sparse_right(&self.u, &self.hat_h), &uad);
        res.horizontal = op_norm(&(&self.d_h - &conj_h - &self.correction));
        let c = &self.d_h - &conj_h;
        let interior = self.interior();
        let cols_g = self.expand(&interior, self.glue.cl_g.spin_dim);
        let cols_l = self.expand(&interior, self.glue.lifted_dim());
        let steps = box_points(d, 1);
        for _ in 0..samples {
            let f: Vec<(Vec<i64>, C64)> = steps.iter().map(|a| (a.clone(), random::gaussian_matrix(&mut rng, 1, 1)[(0, 0)])).collect();
            let pg = self.pi_g(&f);
            let comm = mul_sparse_right(&c, &pg) - mul_sparse_right(&pg, &c);
            res.correction_commutator = res.correction_commutator.max(op_norm(&comm.select_columns(cols_g.iter())));
            let pl = self.pi_lifted(&f)?;
            let tw = mul_sparse_right(&self.u, &pl) - mul_sparse_right(&pg, &self.u);
            res.intertwining = res.intertwining.max(op_norm(&tw.select_columns(cols_l.iter())));
            let t: Vec<f64> = (0..self.directions.ncols()).map(|_| rng.gen_range(0.0..2.0 * std::f64::consts::PI)).collect();
            let (rh, mu) = self.translations(&t);
            res.equivariance = res
                .equivariance
                .max(op_norm(&(mul_sparse_right(&rh, &self.u) - mul_sparse_right(&self.u, &mu))));
        }
        let pts = haar_quadrature(&GroupModel::torus(d), 4)?.points;
        res.frames = frames_with(&self.glue.split, self.spec.group, &pts).deviation();
        Ok(res)
    }

    /// Spectrum of D_G on each character e_m.
    pub fn canonical_spectrum(&self) -> Result<Vec<(String, Vec<f64>)>> {
        let cg = self.glue.cl_g.spin_dim;
        self.modes
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let block = self.d_g.view((i * cg, i * cg), (cg, cg)).into_owned();
                let label = format!("({})", m.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
                Ok((label, crate::linalg::eigvals_hermitian(&block)?))
            })
            .collect()
    }

    /// Worst |τ_h Ψ − Ψ| over the basis, τ_h Ψ(g, k) = Ad_h Ψ(gh, kh).
    pub fn lifted_invariance_deviation(&self, t: &[f64]) -> f64 {
        let d = self.modes[0].len();
        self.lifted
            .iter()
            .map(|(m, n)| {
                let phase: f64 = (0..d)
                    .map(|i| m[i] as f64 * (0..t.len()).map(|c| self.directions[(i, c)] * t[c]).sum::<f64>())
                    .sum::<f64>()
                    + n.iter().zip(t).map(|(a, b)| *a as f64 * b).sum::<f64>();
                ((I * phase).exp() - c64(1.0, 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_factor_has_zero_correction() {
        let t = TorusHomogeneous::new(&HomogeneousSpec::torus(2, vec![vec![0, 1]], 2)).unwrap();
        let r = t.residuals(2, 1).unwrap();
        assert_eq!(r.correction_norm, 0.0);
        assert!(r.vertical < 1e-13 && r.horizontal < 1e-13 && r.split < 1e-13, "{r:?}");
        assert!(r.intertwining < 1e-13 && r.equivariance < 1e-13 && r.unitarity < 1e-13);
    }

    #[test]
    fn diagonal_circle_small_box() {
        let t = TorusHomogeneous::new(&HomogeneousSpec::torus(2, vec![vec![1, 1]], 2)).unwrap();
        assert!(t.lifted_invariance_deviation(&[0.37]) < 1e-14);
        let r = t.residuals(3, 2).unwrap();
        for (name, _, v) in r.named() {
            assert!(v < 1e-12, "{name}: {v}");
        }
    }

    #[test]
    fn lifted_vertical_sign_is_forced() {
        // with exp(+tX) in the lifted vertical operator the identity holds up to sign
        let t = TorusHomogeneous::new(&HomogeneousSpec::torus(2, vec![vec![1, 1]], 2)).unwrap();
        let flipped = &t.u * (&t.hat_v * c64(-1.0, 0.0)) * t.u.adjoint();
        assert!(op_norm(&(&t.d_v - flipped)) > 1.0);
    }

    #[test]
    fn three_torus_with_skew_circle() {
        let t = TorusHomogeneous::new(&HomogeneousSpec::torus(3, vec![vec![1, 2, 0]], 1)).unwrap();
        let r = t.residuals(1, 4).unwrap();
        assert!(
            r.vertical < 1e-12 && r.horizontal < 1e-12 && r.intertwining < 1e-12 && r.equivariance < 1e-12,
            "{r:?}"
        );
    }
}
