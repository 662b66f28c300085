//! Dense complex matrix arithmetic and the factorizations the rest of the
//! crate consumes: SVD-based rank decisions, orthonormal range/cokernel bases,
//! polar decomposition, Hermitian square roots, and Kronecker products.
//!
//! Matrices are `nalgebra` values. The SVD and the Hermitian eigensolver come
//! from `faer`, whose complex routines stay accurate on rank-deficient input;
//! everything here adds shape and finiteness validation plus the rank
//! conventions of [`ToleranceConfig`].

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::ToleranceConfig;

pub type CMatrix = DMatrix<Complex64>;

/// Largest dimension accepted by dense operations.
pub const MAX_DIM: usize = 64;
/// Largest dimension a Kronecker product may produce.
pub const MAX_KRON_DIM: usize = 4096;

/// Copy into `faer` storage.
pub(crate) fn to_faer(m: &CMatrix) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Builds a matrix from real row-major rows.
pub fn from_real_rows(rows: &[&[f64]]) -> CMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
}

pub fn from_diagonal(diag: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_column_slice(diag))
}

pub fn frob(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn validate(m: &CMatrix) -> Result<()> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

pub fn require_square(m: &CMatrix, what: &str) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() > MAX_DIM {
        return Err(Error::Size(format!(
            "{what} has dimension {} > {MAX_DIM}",
            m.nrows()
        )));
    }
    Ok(m.nrows())
}

pub fn require_same_dim(a: &CMatrix, b: &CMatrix, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "{what}: shapes {:?} and {:?} differ",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `A^k` by repeated squaring.
pub fn mat_pow(a: &CMatrix, k: u32) -> CMatrix {
    let mut result = identity(a.nrows());
    let mut base = a.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Singular triplets sorted by decreasing singular value.
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

/// Thin SVD `M = U Σ V*` with singular values in decreasing order.
pub fn svd(m: &CMatrix) -> Result<Svd> {
    validate(m)?;
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Ok(Svd {
            u: CMatrix::zeros(rows, 0),
            singular_values: Vec::new(),
            v: CMatrix::zeros(cols, 0),
        });
    }
    let dec = to_faer(m)
        .svd()
        .map_err(|e| Error::Numerical(format!("SVD did not converge: {e:?}")))?;
    let k = rows.min(cols);
    let u = CMatrix::from_fn(rows, rows, |i, j| dec.U()[(i, j)]);
    let v = CMatrix::from_fn(cols, cols, |i, j| dec.V()[(i, j)]);
    let sv: Vec<f64> = (0..k).map(|i| dec.S().column_vector()[i].re).collect();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));
    let u = CMatrix::from_fn(u.nrows(), order.len(), |r, k| u[(r, order[k])]);
    let v = CMatrix::from_fn(v.nrows(), order.len(), |r, k| v[(r, order[k])]);
    let singular_values = order.iter().map(|&i| sv[i]).collect();
    Ok(Svd {
        u,
        singular_values,
        v,
    })
}

pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    Ok(svd(m)?.singular_values.first().copied().unwrap_or(0.0))
}

/// 2-norm condition number; infinite for rank-deficient square matrices.
pub fn condition_number(m: &CMatrix) -> Result<f64> {
    let s = svd(m)?;
    match (s.singular_values.first(), s.singular_values.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => Ok(hi / lo),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

/// Numerical rank and orthonormal bases of `range(M)` and `ker(M*)`.
#[derive(Clone, Debug)]
pub struct RankBases {
    pub rank: usize,
    pub range_basis: CMatrix,
    pub cokernel_basis: CMatrix,
    pub singular_values: Vec<f64>,
}

fn rank_threshold(sv: &[f64], rows: usize, cols: usize, tol: &ToleranceConfig) -> f64 {
    let smax = sv.first().copied().unwrap_or(0.0);
    tol.rank_rel * smax * rows.max(cols) as f64
}

/// Each basis column is rescaled by a unit phase so that its
/// largest-modulus entry is real and positive.
fn normalize_phases(mut q: CMatrix) -> CMatrix {
    for mut col in q.column_iter_mut() {
        let mut best = Complex64::new(0.0, 0.0);
        for z in col.iter() {
            if z.norm() > best.norm() + 1e-12 {
                best = *z;
            }
        }
        if best.norm() > 0.0 {
            let phase = best.conj() / best.norm();
            col.iter_mut().for_each(|z| *z *= phase);
        }
    }
    q
}

pub fn rank_and_bases(m: &CMatrix, tol: &ToleranceConfig) -> Result<RankBases> {
    let (rows, cols) = m.shape();
    // a full left singular basis needs at least as many columns as rows
    let padded;
    let work = if cols < rows {
        padded = {
            let mut p = CMatrix::zeros(rows, rows);
            p.view_mut((0, 0), (rows, cols)).copy_from(m);
            p
        };
        &padded
    } else {
        m
    };
    let s = svd(work)?;
    let threshold = rank_threshold(&s.singular_values, rows, cols, tol);
    let rank = s
        .singular_values
        .iter()
        .filter(|&&x| x > threshold && x > 0.0)
        .count();
    let range_basis = normalize_phases(s.u.columns(0, rank).into_owned());
    let cokernel_basis = normalize_phases(s.u.columns(rank, rows - rank).into_owned());
    let singular_values = s.singular_values.into_iter().take(rows.min(cols)).collect();
    Ok(RankBases {
        rank,
        range_basis,
        cokernel_basis,
        singular_values,
    })
}

pub fn rank(m: &CMatrix, tol: &ToleranceConfig) -> Result<usize> {
    Ok(rank_and_bases(m, tol)?.rank)
}

/// Orthonormal basis of `ker(M)` (= the cokernel of `M*`).
pub fn kernel_basis(m: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    Ok(rank_and_bases(&m.adjoint(), tol)?.cokernel_basis)
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    require_square(m, "inverse operand")?;
    validate(m)?;
    let inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("matrix is not invertible".into()))?;
    validate(&inv).map_err(|_| Error::Singular("inverse overflowed".into()))?;
    Ok(inv)
}

/// Polar factors `M = U·P` with `P = (M*M)^{1/2}`.
#[derive(Clone, Debug)]
pub struct Polar {
    pub u: CMatrix,
    pub p: CMatrix,
    /// Whether `M` had full rank, i.e. `U` is unitary rather than a partial isometry.
    pub invertible: bool,
}

pub fn polar_decompose(m: &CMatrix, tol: &ToleranceConfig) -> Result<Polar> {
    let d = require_square(m, "polar operand")?;
    validate(m)?;
    let s = svd(m)?;
    let threshold = rank_threshold(&s.singular_values, d, d, tol);
    let r = s
        .singular_values
        .iter()
        .filter(|&&x| x > threshold && x > 0.0)
        .count();
    let sigma = from_diagonal(
        &s.singular_values
            .iter()
            .map(|&x| c(x, 0.0))
            .collect::<Vec<_>>(),
    );
    let mut p = &s.v * sigma * s.v.adjoint();
    hermitize(&mut p);
    let u = if r == d {
        &s.u * s.v.adjoint()
    } else {
        s.u.columns(0, r) * s.v.columns(0, r).adjoint()
    };
    Ok(Polar {
        u,
        p,
        invertible: r == d,
    })
}

/// Replaces `H` by `(H + H*)/2`.
pub fn hermitize(h: &mut CMatrix) {
    let sym = (&*h + h.adjoint()) * c(0.5, 0.0);
    *h = sym;
}

pub fn hermitian_deviation(q: &CMatrix) -> f64 {
    frob(&(q - q.adjoint()))
}

fn require_hermitian(q: &CMatrix, tol: &ToleranceConfig) -> Result<()> {
    require_square(q, "Hermitian operand")?;
    validate(q)?;
    let dev = hermitian_deviation(q);
    if !tol.is_zero(dev, frob(q)) {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending.
pub fn hermitian_eigen(q: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let mut h = q.clone();
    hermitize(&mut h);
    if h.nrows() == 0 {
        return Ok((Vec::new(), h));
    }
    let eig = to_faer(&h)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver did not converge: {e:?}")))?;
    let raw: Vec<f64> = (0..h.nrows())
        .map(|i| eig.S().column_vector()[i].re)
        .collect();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&i, &j| raw[i].total_cmp(&raw[j]));
    let values = order.iter().map(|&i| raw[i]).collect();
    let vectors = CMatrix::from_fn(q.nrows(), order.len(), |r, k| eig.U()[(r, order[k])]);
    Ok((values, vectors))
}

pub fn min_hermitian_eigenvalue(q: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigen(q)?.0.first().copied().unwrap_or(0.0))
}

fn psd_eigen(q: &CMatrix, tol: &ToleranceConfig) -> Result<(Vec<f64>, CMatrix)> {
    require_hermitian(q, tol)?;
    let (values, vectors) = hermitian_eigen(q)?;
    let top = values.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let floor = tol.abs_floor + tol.rank_rel * top * q.nrows() as f64;
    if let Some(&lo) = values.first() {
        if lo < -floor {
            return Err(Error::NotPsd(lo));
        }
    }
    Ok((values, vectors))
}

fn spectral_function(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let diag: Vec<Complex64> = values.iter().map(|&x| c(f(x), 0.0)).collect();
    let mut r = vectors * from_diagonal(&diag) * vectors.adjoint();
    hermitize(&mut r);
    r
}

/// Positive square root of a Hermitian positive semidefinite matrix.
pub fn psd_sqrt(q: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    let (values, vectors) = psd_eigen(q, tol)?;
    Ok(spectral_function(&values, &vectors, |x| x.max(0.0).sqrt()))
}

/// `Q^{-1/2}` for Hermitian positive definite `Q`.
pub fn psd_inv_sqrt(q: &CMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    let (values, vectors) = psd_eigen(q, tol)?;
    let top = values.last().copied().unwrap_or(0.0);
    let floor = tol.abs_floor + tol.rank_rel * top * q.nrows() as f64;
    if values.first().is_some_and(|&lo| lo <= floor) {
        return Err(Error::Singular("Q is not positive definite".into()));
    }
    Ok(spectral_function(&values, &vectors, |x| 1.0 / x.sqrt()))
}

pub fn kronecker(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let rows = a.nrows() * b.nrows();
    let cols = a.ncols() * b.ncols();
    if rows > MAX_KRON_DIM || cols > MAX_KRON_DIM {
        return Err(Error::Size(format!(
            "Kronecker product would be {rows}x{cols}, limit {MAX_KRON_DIM}"
        )));
    }
    Ok(a.kronecker(b))
}

/// Copies the `nr × nc` block starting at `(r0, c0)`.
pub fn block(m: &CMatrix, r0: usize, c0: usize, nr: usize, nc: usize) -> CMatrix {
    m.view((r0, c0), (nr, nc)).into_owned()
}

/// Assembles `[[a, b], [c, d]]`; `a` is `d1×d1`, `d` is `d2×d2`.
pub fn assemble(a: &CMatrix, b: &CMatrix, cc: &CMatrix, d: &CMatrix) -> CMatrix {
    let d1 = a.nrows();
    let d2 = d.nrows();
    let mut m = CMatrix::zeros(d1 + d2, d1 + d2);
    m.view_mut((0, 0), (d1, d1)).copy_from(a);
    m.view_mut((0, d1), (d1, d2)).copy_from(b);
    m.view_mut((d1, 0), (d2, d1)).copy_from(cc);
    m.view_mut((d1, d1), (d2, d2)).copy_from(d);
    m
}

pub fn direct_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assemble(
        a,
        &CMatrix::zeros(a.nrows(), b.ncols()),
        &CMatrix::zeros(b.nrows(), a.ncols()),
        b,
    )
}

/// `[A | B]` column concatenation.
pub fn hstack(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMatrix, b: &CMatrix, eps: f64) -> bool {
        a.shape() == b.shape() && frob(&(a - b)) <= eps
    }

    #[test]
    fn polar_of_positive_diagonal() {
        let m = from_real_rows(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let p = polar_decompose(&m, &ToleranceConfig::default()).unwrap();
        assert!(close(&p.u, &identity(2), 1e-12));
        assert!(close(&p.p, &m, 1e-12));
        assert!(p.invertible);
    }

    #[test]
    fn polar_of_rotation_scaling() {
        // M*M = diag(1,4) so P = diag(1,2) and U = M P^{-1}
        let m = from_real_rows(&[&[0.0, -2.0], &[1.0, 0.0]]);
        let p = polar_decompose(&m, &ToleranceConfig::default()).unwrap();
        assert!(close(
            &p.p,
            &from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]),
            1e-12
        ));
        assert!(close(
            &p.u,
            &from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]),
            1e-12
        ));
    }

    #[test]
    fn polar_identity() {
        let p = polar_decompose(&identity(3), &ToleranceConfig::default()).unwrap();
        assert!(close(&p.u, &identity(3), 1e-12));
        assert!(close(&p.p, &identity(3), 1e-12));
    }

    #[test]
    fn polar_singular_gives_partial_isometry() {
        let m = from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let p = polar_decompose(&m, &ToleranceConfig::default()).unwrap();
        assert!(!p.invertible);
        assert!(close(&(&p.u * &p.p), &m, 1e-12));
        // U*U is the projection onto range(P)
        let proj = p.u.adjoint() * &p.u;
        assert!(close(&(&proj * &proj), &proj, 1e-12));
        assert!(close(&(&proj * &p.p), &p.p, 1e-12));
    }

    #[test]
    fn polar_rejects_non_square_and_nan() {
        let tol = ToleranceConfig::default();
        assert!(matches!(
            polar_decompose(&CMatrix::zeros(2, 3), &tol),
            Err(Error::Dimension(_))
        ));
        let mut m = identity(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(
            polar_decompose(&m, &tol),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn sqrt_examples() {
        let tol = ToleranceConfig::default();
        let q = from_real_rows(&[&[4.0, 0.0], &[0.0, 9.0]]);
        assert!(close(
            &psd_sqrt(&q, &tol).unwrap(),
            &from_real_rows(&[&[2.0, 0.0], &[0.0, 3.0]]),
            1e-12
        ));
        let ones = from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let expected = &ones * c(1.0 / 2f64.sqrt(), 0.0);
        assert!(close(&psd_sqrt(&ones, &tol).unwrap(), &expected, 1e-12));
        assert!(close(
            &psd_sqrt(&identity(3), &tol).unwrap(),
            &identity(3),
            1e-12
        ));
        assert!(close(
            &psd_inv_sqrt(&q, &tol).unwrap(),
            &from_real_rows(&[&[0.5, 0.0], &[0.0, 1.0 / 3.0]]),
            1e-12
        ));
    }

    #[test]
    fn sqrt_errors() {
        let tol = ToleranceConfig::default();
        let nonherm = from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(
            psd_sqrt(&nonherm, &tol),
            Err(Error::NotHermitian(_))
        ));
        let indefinite = from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert!(matches!(psd_sqrt(&indefinite, &tol), Err(Error::NotPsd(_))));
        let singular = from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(matches!(
            psd_inv_sqrt(&singular, &tol),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn rank_examples() {
        let tol = ToleranceConfig::default();
        let m = from_real_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let rb = rank_and_bases(&m, &tol).unwrap();
        assert_eq!(rb.rank, 1);
        assert!(close(
            &rb.range_basis,
            &from_real_rows(&[&[1.0], &[0.0]]),
            1e-12
        ));
        assert!(close(
            &rb.cokernel_basis,
            &from_real_rows(&[&[0.0], &[1.0]]),
            1e-12
        ));

        let z = rank_and_bases(&CMatrix::zeros(3, 3), &tol).unwrap();
        assert_eq!(z.rank, 0);
        assert_eq!(z.range_basis.ncols(), 0);
        assert_eq!(z.cokernel_basis.ncols(), 3);

        let i = rank_and_bases(&identity(3), &tol).unwrap();
        assert_eq!(i.rank, 3);
        assert_eq!(i.cokernel_basis.ncols(), 0);
    }

    #[test]
    fn rank_of_tall_matrix_has_full_cokernel() {
        let tol = ToleranceConfig::default();
        let m = from_real_rows(&[&[1.0], &[1.0], &[0.0]]);
        let rb = rank_and_bases(&m, &tol).unwrap();
        assert_eq!(rb.rank, 1);
        assert_eq!(rb.cokernel_basis.ncols(), 2);
        assert!(frob(&(m.adjoint() * &rb.cokernel_basis)) < 1e-12);
    }

    #[test]
    fn kernel_of_nilpotent() {
        let n = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let k = kernel_basis(&n, &ToleranceConfig::default()).unwrap();
        assert!(close(&k, &from_real_rows(&[&[1.0], &[0.0]]), 1e-12));
    }

    #[test]
    fn kronecker_examples() {
        let a = from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let k = kronecker(&identity(2), &a).unwrap();
        assert!(close(&k, &direct_sum(&a, &a), 0.0));
        let k1 = kronecker(&from_real_rows(&[&[2.0]]), &from_real_rows(&[&[3.0]])).unwrap();
        assert_eq!(k1[(0, 0)], c(6.0, 0.0));
        let big = CMatrix::zeros(65, 65);
        assert!(matches!(kronecker(&big, &big), Err(Error::Size(_))));
    }

    #[test]
    fn pow_by_squaring_matches_repeated_product() {
        let a = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let mut acc = identity(2);
        for k in 0..9 {
            assert!(close(&mat_pow(&a, k), &acc, 1e-12));
            acc = &acc * &a;
        }
    }
}
