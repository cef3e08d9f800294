//! Complex Clifford representations with F_j F_k + F_k F_j = −2δ_jk.

use crate::error::{Error, Result};
use crate::linalg::{c64, identity, kron, kron_all, max_abs, pauli, zeros, CMatrix, I, ONE};

#[derive(Debug, Clone)]
pub struct CliffordRep {
    pub n: usize,
    pub spin_dim: usize,
    pub generators: Vec<CMatrix>,
    pub grading: Option<CMatrix>,
}

fn sigma3_power(m: usize) -> CMatrix {
    let s3 = pauli(3);
    let mut acc = identity(1);
    for _ in 0..m {
        acc = kron(&acc, &s3);
    }
    acc
}

/// Canonical iterated-Pauli representation. Even n carries the grading
/// σ₃^{⊗n/2}; odd n is doubled when a grading is required.
pub fn build_clifford(n: usize, require_grading: bool) -> CliffordRep {
    assert!(n >= 1, "Clifford algebra needs at least one generator");
    let m = n / 2;
    let mut generators = Vec::with_capacity(n);
    for j in 0..m {
        let tail = identity(1 << (m - j - 1));
        for s in [1, 2] {
            let f = kron_all(&[&sigma3_power(j), &pauli(s), &tail]) * I;
            generators.push(f);
        }
    }
    if n % 2 == 1 {
        generators.push(sigma3_power(m) * I);
    }
    let spin_dim = 1 << m;
    if n % 2 == 0 {
        return CliffordRep {
            n,
            spin_dim,
            generators,
            grading: Some(sigma3_power(m)),
        };
    }
    if !require_grading {
        return CliffordRep {
            n,
            spin_dim,
            generators,
            grading: None,
        };
    }
    let s1 = pauli(1);
    let generators = generators.iter().map(|f| kron(f, &s1)).collect();
    let grading = kron(&identity(spin_dim), &pauli(3));
    CliffordRep {
        n,
        spin_dim: 2 * spin_dim,
        generators,
        grading: Some(grading),
    }
}

/// Left multiplication on the exterior algebra Λℂⁿ (2ⁿ blades indexed by
/// bitmask): e_k acts as e_k∧ − ι_{e_k}; the grading is the parity Ω.
pub fn exterior_clifford(n: usize) -> CliffordRep {
    let dim = 1usize << n;
    let mut generators = Vec::with_capacity(n);
    for k in 0..n {
        let mut f = zeros(dim, dim);
        for blade in 0..dim {
            let below = (blade & ((1 << k) - 1)).count_ones();
            let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
            let target = blade ^ (1 << k);
            // wedge adds e_k, contraction removes it with a minus sign
            let coeff = if blade & (1 << k) == 0 { sign } else { -sign };
            f[(target, blade)] = c64(coeff, 0.0);
        }
        generators.push(f);
    }
    CliffordRep {
        n,
        spin_dim: dim,
        generators,
        grading: Some(parity(n)),
    }
}

/// Ω = (−1)^{degree} on Λℂⁿ.
pub fn parity(n: usize) -> CMatrix {
    let dim = 1usize << n;
    CMatrix::from_fn(dim, dim, |r, c| {
        if r != c {
            c64(0.0, 0.0)
        } else if r.count_ones() % 2 == 0 {
            ONE
        } else {
            -ONE
        }
    })
}

/// Right multiplication by e_k on Λℂⁿ, y ↦ y·e_k.
pub fn exterior_right_mul(n: usize, k: usize) -> CMatrix {
    let dim = 1usize << n;
    let mut r = zeros(dim, dim);
    for blade in 0..dim {
        let above = (blade >> (k + 1)).count_ones();
        let mut sign = if above % 2 == 0 { 1.0 } else { -1.0 };
        if blade & (1 << k) != 0 {
            sign = -sign;
        }
        r[(blade ^ (1 << k), blade)] = c64(sign, 0.0);
    }
    r
}

impl CliffordRep {
    /// Σ x_k F_k.
    pub fn mul_vector(&self, x: &[f64]) -> Result<CMatrix> {
        clifford_mul_vector(self, x)
    }

    /// Largest entry of F_jF_k + F_kF_j + 2δ_jk over all pairs.
    pub fn relation_deviation(&self) -> f64 {
        let one = identity(self.spin_dim);
        let mut worst: f64 = 0.0;
        for (j, a) in self.generators.iter().enumerate() {
            for (k, b) in self.generators.iter().enumerate() {
                let mut r = a * b + b * a;
                if j == k {
                    r += &one * c64(2.0, 0.0);
                }
                worst = worst.max(max_abs(&r));
            }
        }
        worst
    }

    pub fn skew_deviation(&self) -> f64 {
        self.generators.iter().map(|f| max_abs(&(f + f.adjoint()))).fold(0.0, f64::max)
    }

    /// Worst of γ* − γ, γ² − 1 and γF + Fγ; `None` without a grading.
    pub fn grading_deviation(&self) -> Option<f64> {
        let g = self.grading.as_ref()?;
        let mut worst = max_abs(&(g - g.adjoint())).max(max_abs(&(g * g - identity(self.spin_dim))));
        for f in &self.generators {
            worst = worst.max(max_abs(&(g * f + f * g)));
        }
        Some(worst)
    }

    /// Unit +1 eigenvector χ of the grading used by the lift isometry.
    pub fn even_unit_vector(&self) -> Result<CMatrix> {
        let g = self.grading.as_ref().ok_or(Error::GradingMissing)?;
        let mut e0 = zeros(self.spin_dim, 1);
        e0[(0, 0)] = ONE;
        if max_abs(&(g * &e0 - &e0)) == 0.0 {
            return Ok(e0);
        }
        let eig = crate::linalg::eig_hermitian(g)?;
        let top = self.spin_dim - 1;
        Ok(eig.eigenvectors.columns(top, 1).into_owned())
    }
}

pub fn clifford_mul_vector(rep: &CliffordRep, x: &[f64]) -> Result<CMatrix> {
    if x.len() != rep.n {
        return Err(Error::DimensionMismatch {
            expected: rep.n,
            found: x.len(),
        });
    }
    let mut out = zeros(rep.spin_dim, rep.spin_dim);
    for (xk, f) in x.iter().zip(&rep.generators) {
        out += f * c64(*xk, 0.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_rows;

    #[test]
    fn n1_is_multiplication_by_i() {
        let c = build_clifford(1, false);
        assert_eq!(c.spin_dim, 1);
        assert_eq!(c.generators[0], from_rows(1, 1, &[I]));
        assert!(c.grading.is_none());
    }

    #[test]
    fn n3_uses_i_times_pauli() {
        let c = build_clifford(3, false);
        for k in 0..3 {
            assert_eq!(c.generators[k], pauli(k + 1) * I);
        }
    }

    #[test]
    fn n2_grading_is_sigma3() {
        let c = build_clifford(2, true);
        assert_eq!(c.generators[0], pauli(1) * I);
        assert_eq!(c.generators[1], pauli(2) * I);
        assert_eq!(c.grading.as_ref().unwrap(), &pauli(3));
        assert_eq!(c.relation_deviation(), 0.0);
        assert_eq!(c.grading_deviation(), Some(0.0));
    }

    #[test]
    fn odd_grading_doubles_the_space() {
        for n in [1, 3, 5] {
            let c = build_clifford(n, true);
            assert_eq!(c.spin_dim, 2 << (n / 2));
            assert_eq!(c.relation_deviation(), 0.0);
            assert_eq!(c.grading_deviation(), Some(0.0));
        }
    }

    #[test]
    fn exterior_representation_relations() {
        for n in 1..=4 {
            let c = exterior_clifford(n);
            assert_eq!(c.relation_deviation(), 0.0);
            assert_eq!(c.skew_deviation(), 0.0);
            assert_eq!(c.grading_deviation(), Some(0.0));
            for k in 0..n {
                let r = exterior_right_mul(n, k);
                assert_eq!(max_abs(&(&r * &r + identity(1 << n))), 0.0);
                for l in 0..n {
                    let left = &c.generators[l];
                    assert_eq!(max_abs(&(left * &r - &r * left)), 0.0);
                }
            }
        }
    }

    #[test]
    fn mul_vector_checks_length() {
        let c = build_clifford(2, true);
        assert!(matches!(c.mul_vector(&[1.0]), Err(Error::DimensionMismatch { expected: 2, found: 1 })));
        assert_eq!(c.mul_vector(&[0.0, 0.0]).unwrap(), zeros(2, 2));
        assert_eq!(c.mul_vector(&[1.0, 0.0]).unwrap(), c.generators[0]);
    }

    #[test]
    fn chi_is_even() {
        for n in 1..=6 {
            let c = build_clifford(n, true);
            let chi = c.even_unit_vector().unwrap();
            let g = c.grading.as_ref().unwrap();
            assert_eq!(max_abs(&(g * &chi - &chi)), 0.0);
        }
    }
}
