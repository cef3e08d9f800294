use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{identity, CMatrix, C64};

/// Represented smooth subalgebra B₀ ⊂ End(H_B), given by named generators.
#[derive(Debug, Clone)]
pub struct RepresentedBase {
    pub hb_dim: usize,
    pub generators: Vec<(String, CMatrix)>,
}

impl RepresentedBase {
    pub fn new(hb_dim: usize, generators: Vec<(String, CMatrix)>) -> Result<Self> {
        for (name, g) in &generators {
            if g.shape() != (hb_dim, hb_dim) {
                return Err(Error::ShapeMismatch(format!(
                    "generator {name} is {}x{}, base dimension is {hb_dim}",
                    g.nrows(),
                    g.ncols()
                )));
            }
        }
        Ok(RepresentedBase { hb_dim, generators })
    }

    pub fn unit(&self) -> CMatrix {
        identity(self.hb_dim)
    }

    pub fn generator(&self, name: &str) -> Option<&CMatrix> {
        self.generators.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    /// Generators together with their adjoints.
    pub fn letters(&self) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(2 * self.generators.len());
        for (_, g) in &self.generators {
            out.push(g.clone());
            out.push(g.adjoint());
        }
        out
    }

    /// Random word of at most `max_len` letters (generators or adjoints).
    pub fn random_word<R: Rng>(&self, rng: &mut R, max_len: usize) -> CMatrix {
        let letters = self.letters();
        let len = rng.gen_range(1..=max_len.max(1));
        let mut w = self.unit();
        for _ in 0..len {
            w = &w * &letters[rng.gen_range(0..letters.len())];
        }
        w
    }

    /// Random element: complex combination of a few random words plus the unit.
    pub fn random_element<R: Rng>(&self, rng: &mut R, max_len: usize) -> CMatrix {
        let mut x = self.unit() * C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for _ in 0..3 {
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            x += self.random_word(rng, max_len) * c;
        }
        x
    }

    /// Orthonormal (Frobenius) basis of the span of all words of length ≤ `max_len`.
    pub fn span_basis(&self, max_len: usize) -> Vec<CMatrix> {
        let letters = self.letters();
        let mut basis: Vec<CMatrix> = Vec::new();
        let mut frontier = vec![self.unit()];
        push_independent(&mut basis, &self.unit());
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for l in &letters {
                    let cand = w * l;
                    if push_independent(&mut basis, &cand) {
                        next.push(cand);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        basis
    }
}

/// Gram–Schmidt step in the Frobenius inner product; returns whether `m` was new.
fn push_independent(basis: &mut Vec<CMatrix>, m: &CMatrix) -> bool {
    let mut r = m.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let overlap: C64 = b.iter().zip(r.iter()).map(|(x, y)| x.conj() * y).sum();
            r -= b * overlap;
        }
    }
    let n = r.norm();
    if n > 1e-9 * m.norm().max(1.0) {
        basis.push(r / C64::new(n, 0.0));
        true
    } else {
        false
    }
}
