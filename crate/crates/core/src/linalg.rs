//! Dense complex linear algebra: tensor legs, direct sums, Hermitian
//! eigensolves, norms and compressions.

use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Entry cap used by [`kron`]; [`kron_capped`] takes an explicit one.
pub const DEFAULT_ELEMENT_CAP: usize = 1 << 28;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMatrix {
    CMatrix::zeros(r, c)
}

/// Column-major construction from row-major data.
pub fn from_rows(rows: usize, cols: usize, data: &[C64]) -> CMatrix {
    assert_eq!(rows * cols, data.len(), "row-major data has wrong length");
    CMatrix::from_row_slice(rows, cols, data)
}

pub fn diag(values: &[C64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let v: Vec<C64> = values.iter().map(|&x| c64(x, 0.0)).collect();
    diag(&v)
}

pub fn pauli(k: usize) -> CMatrix {
    match k {
        1 => from_rows(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => from_rows(2, 2, &[ZERO, -I, I, ZERO]),
        3 => from_rows(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("Pauli index must be 1, 2 or 3"),
    }
}

/// Basis column vector e_i of length n.
pub fn basis_vector(n: usize, i: usize) -> CMatrix {
    let mut v = zeros(n, 1);
    v[(i, 0)] = ONE;
    v
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    kron_capped(a, b, DEFAULT_ELEMENT_CAP).expect("kron output exceeds the default element cap")
}

/// (a⊗b)[(i,k),(j,l)] = a[i,j]·b[k,l], rejecting outputs above `cap` entries.
pub fn kron_capped(a: &CMatrix, b: &CMatrix, cap: usize) -> Result<CMatrix> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let requested = ra
        .checked_mul(rb)
        .and_then(|r| ca.checked_mul(cb).and_then(|c| r.checked_mul(c)))
        .unwrap_or(usize::MAX);
    if requested > cap {
        return Err(Error::ElementCap { requested, cap });
    }
    let mut out = zeros(ra * rb, ca * cb);
    for j in 0..ca {
        for i in 0..ra {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for l in 0..cb {
                for k in 0..rb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

pub fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    let mut acc = identity(1);
    for f in factors {
        acc = kron(&acc, f);
    }
    acc
}

/// Block-diagonal matrix together with the index range of each block.
#[derive(Debug, Clone)]
pub struct BlockDiagonal {
    pub matrix: CMatrix,
    pub row_ranges: Vec<Range<usize>>,
    pub col_ranges: Vec<Range<usize>>,
}

pub fn direct_sum(blocks: &[CMatrix]) -> BlockDiagonal {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut matrix = zeros(rows, cols);
    let mut row_ranges = Vec::with_capacity(blocks.len());
    let mut col_ranges = Vec::with_capacity(blocks.len());
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        matrix.view_mut((r0, c0), b.shape()).copy_from(b);
        row_ranges.push(r0..r0 + b.nrows());
        col_ranges.push(c0..c0 + b.ncols());
        r0 += b.nrows();
        c0 += b.ncols();
    }
    BlockDiagonal {
        matrix,
        row_ranges,
        col_ranges,
    }
}

/// Eigendata of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianSpectrum {
    /// Largest ‖A v_i − λ_i v_i‖ over the eigenpairs.
    pub fn max_residual(&self, a: &CMatrix) -> f64 {
        let av = a * &self.eigenvectors;
        let mut worst: f64 = 0.0;
        for (i, &lam) in self.eigenvalues.iter().enumerate() {
            let r = av.column(i) - self.eigenvectors.column(i) * c64(lam, 0.0);
            worst = worst.max(r.norm());
        }
        worst
    }
}

/// ‖a − a*‖ in Frobenius norm.
pub fn hermiticity_deviation(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm()
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.norm()
}

/// Largest absolute entry; the deviation measure used for exact identities.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

fn check_hermitian(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!("{}x{} is not square", a.nrows(), a.ncols())));
    }
    let scale = frobenius(a).max(1.0);
    let tolerance = 1e-10 * scale;
    let deviation = hermiticity_deviation(a);
    if deviation > tolerance {
        return Err(Error::NotHermitian { deviation, tolerance });
    }
    Ok(())
}

fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * c64(0.5, 0.0)
}

pub fn eig_hermitian(a: &CMatrix) -> Result<HermitianSpectrum> {
    check_hermitian(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(HermitianSpectrum {
            eigenvalues: vec![],
            eigenvectors: zeros(0, 0),
        });
    }
    let eig = nalgebra::SymmetricEigen::try_new(hermitian_part(a), f64::EPSILON, 0).ok_or(Error::NoConvergence { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianSpectrum { eigenvalues, eigenvectors })
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(a: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    if a.nrows() == 0 {
        return Ok(vec![]);
    }
    let mut ev: Vec<f64> = hermitian_part(a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Largest singular value. Decoupled blocks of the sparsity pattern are
/// handled separately.
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let parts = components(a);
    if parts.len() > 1 {
        return parts
            .iter()
            .map(|(rows, cols)| dense_op_norm(&a.select_rows(rows.iter()).select_columns(cols.iter())))
            .fold(0.0, f64::max);
    }
    dense_op_norm(a)
}

/// Row and column sets of the connected components of the nonzero pattern;
/// rows or columns that are entirely zero are dropped.
fn components(a: &CMatrix) -> Vec<(Vec<usize>, Vec<usize>)> {
    let (nr, nc) = a.shape();
    // union-find over rows 0..nr and columns nr..nr+nc
    let mut parent: Vec<usize> = (0..nr + nc).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut touched = vec![false; nr + nc];
    for c in 0..nc {
        for (r, z) in a.column(c).iter().enumerate() {
            if *z != ZERO {
                touched[r] = true;
                touched[nr + c] = true;
                let (x, y) = (find(&mut parent, r), find(&mut parent, nr + c));
                if x != y {
                    parent[x] = y;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for v in 0..nr + nc {
        if !touched[v] {
            continue;
        }
        let root = find(&mut parent, v);
        let e = groups.entry(root).or_default();
        if v < nr {
            e.0.push(v);
        } else {
            e.1.push(v - nr);
        }
    }
    groups.into_values().collect()
}

fn dense_op_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    // Square the smaller side: a*a or aa* gives the same top eigenvalue.
    let g = if a.nrows() >= a.ncols() { a.adjoint() * a } else { a * a.adjoint() };
    let top = hermitian_part(&g).symmetric_eigenvalues().iter().fold(0.0_f64, |m, &x| m.max(x));
    if top > 0.0 && top.sqrt() > 1e-6 * max_abs(a) {
        return top.sqrt();
    }
    // Tiny norms lose half the digits through the Gram matrix; fall back to SVD.
    a.clone().svd(false, false).singular_values.iter().fold(0.0_f64, |m, &x| m.max(x))
}

/// a·b as a sum of column axpys, skipping zero entries of b. Same result as
/// `a * b`; much faster when b is sparse (monomial cocycles, Kraus blocks).
pub fn mul_sparse_right(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let mut c = zeros(a.nrows(), b.ncols());
    for j in 0..b.ncols() {
        let mut col = c.column_mut(j);
        for (k, &bkj) in b.column(j).iter().enumerate() {
            if bkj != ZERO {
                col.axpy(bkj, &a.column(k), ONE);
            }
        }
    }
    c
}

/// a·b as row axpys over the nonzero entries of a; the mirror of
/// [`mul_sparse_right`].
pub fn mul_sparse_left(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let mut c = zeros(a.nrows(), b.ncols());
    for k in 0..a.ncols() {
        for (i, &aik) in a.column(k).iter().enumerate() {
            if aik != ZERO {
                for j in 0..b.ncols() {
                    c[(i, j)] += aik * b[(k, j)];
                }
            }
        }
    }
    c
}

fn density(a: &CMatrix) -> f64 {
    a.iter().filter(|&&x| x != ZERO).count() as f64 / a.len().max(1) as f64
}

/// a·b, routed to a sparse kernel when either factor is mostly zero.
pub fn mul_auto(a: &CMatrix, b: &CMatrix) -> CMatrix {
    const SPARSE: f64 = 0.1;
    if a.nrows() * a.ncols() < 64 * 64 {
        return a * b;
    }
    if density(b) < SPARSE {
        mul_sparse_right(a, b)
    } else if density(a) < SPARSE {
        mul_sparse_left(a, b)
    } else {
        a * b
    }
}

/// Deviation of `p` from being an orthogonal projection.
pub fn projection_deviation(p: &CMatrix) -> f64 {
    if !p.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(p - p.adjoint())).max(max_abs(&(p * p - p)))
}

/// Orthonormal basis of range(p) as the columns of an n×rank matrix.
/// An exact identity yields the standard basis.
pub fn range_basis(p: &CMatrix) -> Result<CMatrix> {
    let deviation = projection_deviation(p);
    if deviation > 1e-9 {
        return Err(Error::NotProjection { deviation });
    }
    let n = p.nrows();
    if *p == identity(n) {
        return Ok(identity(n));
    }
    if p.iter().all(|z| *z == ZERO) {
        return Ok(zeros(n, 0));
    }
    let eig = eig_hermitian(p)?;
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut q = zeros(n, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        q.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(q)
}

/// `p a p` restricted to an orthonormal basis of range(p).
pub fn compress(p: &CMatrix, a: &CMatrix) -> Result<CMatrix> {
    if p.shape() != a.shape() {
        return Err(Error::ShapeMismatch(format!("projection {:?} vs operator {:?}", p.shape(), a.shape())));
    }
    let q = range_basis(p)?;
    Ok(q.adjoint() * a * &q)
}

/// Row-major strides for a list of leg dimensions.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Offsets contributed by every multi-index over `legs` of a space with the given strides.
fn leg_offsets(dims: &[usize], strides: &[usize], legs: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &leg in legs {
        let mut next = Vec::with_capacity(out.len() * dims[leg]);
        for &base in &out {
            for i in 0..dims[leg] {
                next.push(base + i * strides[leg]);
            }
        }
        out = next;
    }
    out
}

/// Places `op` on chosen tensor legs. `op` maps the legs `acted_in` of the
/// input space (row-major in the listed order) to the legs `acted_out` of the
/// output space; the remaining legs must agree in order and are carried by
/// the identity.
pub fn leg_operator(op: &CMatrix, dims_in: &[usize], acted_in: &[usize], dims_out: &[usize], acted_out: &[usize]) -> CMatrix {
    let passive_in: Vec<usize> = (0..dims_in.len()).filter(|l| !acted_in.contains(l)).collect();
    let passive_out: Vec<usize> = (0..dims_out.len()).filter(|l| !acted_out.contains(l)).collect();
    let pin: Vec<usize> = passive_in.iter().map(|&l| dims_in[l]).collect();
    let pout: Vec<usize> = passive_out.iter().map(|&l| dims_out[l]).collect();
    assert_eq!(pin, pout, "passive legs must agree");
    let ain: usize = acted_in.iter().map(|&l| dims_in[l]).product();
    let aout: usize = acted_out.iter().map(|&l| dims_out[l]).product();
    assert_eq!(op.shape(), (aout, ain), "operator shape does not match the acted legs");

    let (sin, sout) = (strides(dims_in), strides(dims_out));
    let col_local = leg_offsets(dims_in, &sin, acted_in);
    let row_local = leg_offsets(dims_out, &sout, acted_out);
    let col_pass = leg_offsets(dims_in, &sin, &passive_in);
    let row_pass = leg_offsets(dims_out, &sout, &passive_out);

    let nin: usize = dims_in.iter().product();
    let nout: usize = dims_out.iter().product();
    let mut out = zeros(nout, nin);
    for c in 0..ain {
        for r in 0..aout {
            let v = op[(r, c)];
            if v == ZERO {
                continue;
            }
            for (rp, cp) in row_pass.iter().zip(&col_pass) {
                out[(rp + row_local[r], cp + col_local[c])] = v;
            }
        }
    }
    out
}

/// Square operator on the `legs` of a space with leg dimensions `dims`.
pub fn embed(op: &CMatrix, dims: &[usize], legs: &[usize]) -> CMatrix {
    leg_operator(op, dims, legs, dims, legs)
}

/// Unitary P reordering legs: output leg i is input leg `perm[i]`.
pub fn permute_legs(dims: &[usize], perm: &[usize]) -> CMatrix {
    let n: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&i| dims[i]).collect();
    let s_old = strides(dims);
    let s_new = strides(&new_dims);
    let mut p = zeros(n, n);
    let mut idx = vec![0usize; dims.len()];
    for col in 0..n {
        let mut rem = col;
        for (l, &s) in s_old.iter().enumerate() {
            idx[l] = rem / s;
            rem %= s;
        }
        let row: usize = perm.iter().zip(&s_new).map(|(&old, &s)| idx[old] * s).sum();
        p[(row, col)] = ONE;
    }
    p
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Matrix exponential of a skew-Hermitian matrix through the spectrum of i·a.
pub fn expm_skew(a: &CMatrix) -> Result<CMatrix> {
    let h = a * (-I);
    let eig = eig_hermitian(&hermitian_part(&h))?;
    let phases: Vec<C64> = eig.eigenvalues.iter().map(|&l| (I * l).exp()).collect();
    Ok(&eig.eigenvectors * diag(&phases) * eig.eigenvectors.adjoint())
}

/// Polar part of a square matrix (nearest unitary).
pub fn polar_unitary(a: &CMatrix) -> CMatrix {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V*");
    u * vt
}

/// Orthonormal basis of the null space of `a`, singular values below `tol`.
pub fn null_space(a: &CMatrix, tol: f64) -> CMatrix {
    let n = a.ncols();
    if a.nrows() == 0 {
        return identity(n);
    }
    // pad to at least n rows so the SVD returns a full right basis
    let padded = if a.nrows() >= n { a.clone() } else { a.clone().resize_vertically(n, ZERO) };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V*");
    let keep: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] < tol).collect();
    let mut q = zeros(n, keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        q.set_column(dst, &v_t.row(src).adjoint());
    }
    q
}

/// Numerical rank via singular values above `tol`.
pub fn rank(a: &CMatrix, tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    a.clone().svd(false, false).singular_values.iter().filter(|&&s| s > tol).count()
}

/// Random matrices for property suites and oracles.
pub mod random {
    use super::*;
    use rand::Rng;

    pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| c64(gauss(rng), gauss(rng)))
    }

    pub fn hermitian<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
        let g = gaussian_matrix(rng, n, n);
        (&g + g.adjoint()) * c64(0.5, 0.0)
    }

    pub fn unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
        let g = gaussian_matrix(rng, n, n);
        g.qr().q()
    }

    /// Orthogonal projection of the given rank onto a random subspace.
    pub fn projection<R: Rng>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
        let u = unitary(rng, n);
        let q = u.columns(0, rank).into_owned();
        &q * q.adjoint()
    }

    /// Box–Muller standard normal sample.
    pub fn gauss<R: Rng>(rng: &mut R) -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kron_of_identities() {
        assert_eq!(kron(&identity(2), &identity(3)), identity(6));
    }

    #[test]
    fn kron_sigma1_sigma3() {
        let f = kron(&pauli(1), &pauli(3));
        let mut expect = zeros(4, 4);
        expect[(0, 2)] = ONE;
        expect[(1, 3)] = -ONE;
        expect[(2, 0)] = ONE;
        expect[(3, 1)] = -ONE;
        assert_eq!(f, expect);
    }

    #[test]
    fn kron_rejects_oversized_output() {
        let a = identity(4);
        assert!(matches!(kron_capped(&a, &a, 100), Err(Error::ElementCap { requested: 256, cap: 100 })));
    }

    #[test]
    fn kron_eigenvalues_are_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random::hermitian(&mut rng, 2);
        let b = random::hermitian(&mut rng, 2);
        let ea = eigvals_hermitian(&a).unwrap();
        let eb = eigvals_hermitian(&b).unwrap();
        let mut prod: Vec<f64> = ea.iter().flat_map(|x| eb.iter().map(move |y| x * y)).collect();
        prod.sort_by(f64::total_cmp);
        let direct = eigvals_hermitian(&kron(&a, &b)).unwrap();
        for (p, d) in prod.iter().zip(&direct) {
            assert!((p - d).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_zero_and_pauli() {
        let z = eigvals_hermitian(&zeros(3, 3)).unwrap();
        assert_eq!(z, vec![0.0; 3]);
        let s = eigvals_hermitian(&pauli(2)).unwrap();
        assert!((s[0] + 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eig_two_by_two_closed_form() {
        let (lam, k) = (0.7, -2.5);
        let a = pauli(1) * c64(lam, 0.0) + pauli(2) * c64(k, 0.0);
        let e = eigvals_hermitian(&a).unwrap();
        let r = f64::hypot(lam, k);
        assert!((e[0] + r).abs() < 1e-14 && (e[1] - r).abs() < 1e-14);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = from_rows(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(eig_hermitian(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn op_norm_basics() {
        assert!((op_norm(&identity(4)) - 1.0).abs() < 1e-15);
        assert!((op_norm(&diag_real(&[3.0, -4.0])) - 4.0).abs() < 1e-14);
        assert_eq!(op_norm(&zeros(0, 0)), 0.0);
    }

    #[test]
    fn op_norm_matches_gram_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random::gaussian_matrix(&mut rng, 5, 5);
        let top = *eigvals_hermitian(&(a.adjoint() * &a)).unwrap().last().unwrap();
        let svd_top = a.clone().svd(false, false).singular_values.max();
        assert!((op_norm(&a).powi(2) - top).abs() < 1e-10 * top);
        assert!((op_norm(&a) - svd_top).abs() < 1e-10 * svd_top);
    }

    #[test]
    fn compress_identity_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random::hermitian(&mut rng, 4);
        assert_eq!(compress(&identity(4), &a).unwrap(), a);
        assert_eq!(compress(&zeros(4, 4), &a).unwrap().shape(), (0, 0));
    }

    #[test]
    fn compress_rejects_non_projection() {
        let p = identity(2) * c64(0.5, 0.0);
        assert!(matches!(compress(&p, &identity(2)), Err(Error::NotProjection { .. })));
    }

    #[test]
    fn direct_sum_blocks() {
        let d = direct_sum(&[identity(1), identity(2)]);
        assert_eq!(d.matrix, identity(3));
        assert_eq!(d.row_ranges, vec![0..1, 1..3]);
        assert_eq!(direct_sum(&[pauli(1)]).matrix, pauli(1));
    }

    #[test]
    fn direct_sum_spectrum_is_union() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let blocks: Vec<CMatrix> = (1..4).map(|n| random::hermitian(&mut rng, n)).collect();
        let mut union: Vec<f64> = blocks.iter().flat_map(|b| eigvals_hermitian(b).unwrap()).collect();
        union.sort_by(f64::total_cmp);
        let total = eigvals_hermitian(&direct_sum(&blocks).matrix).unwrap();
        for (u, t) in union.iter().zip(&total) {
            assert!((u - t).abs() < 1e-12);
        }
    }

    #[test]
    fn leg_operator_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random::gaussian_matrix(&mut rng, 2, 2);
        let b = random::gaussian_matrix(&mut rng, 3, 3);
        let dims = [2, 3, 2];
        let middle = embed(&b, &dims, &[1]);
        assert_eq!(middle, kron_all(&[&identity(2), &b, &identity(2)]));
        let ab = kron(&a, &b);
        let outer = embed(&ab, &dims, &[2, 1]);
        let p = permute_legs(&dims, &[0, 2, 1]);
        let expect = p.adjoint() * kron(&identity(2), &ab) * &p;
        assert!(max_abs(&(outer - expect)) < 1e-14);
    }

    #[test]
    fn leg_operator_changes_dimension() {
        let v = basis_vector(3, 1);
        let op = leg_operator(&v, &[2, 1], &[1], &[2, 3], &[1]);
        assert_eq!(op, kron(&identity(2), &v));
    }

    #[test]
    fn expm_of_pauli_rotation() {
        let t = 0.3;
        let e = expm_skew(&(pauli(3) * c64(0.0, t))).unwrap();
        let expect = diag(&[(I * t).exp(), (-I * t).exp()]);
        assert!(max_abs(&(e - expect)) < 1e-14);
    }
}
