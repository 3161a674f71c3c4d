//! Dense complex/real matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type RMat = DMatrix<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Standard symplectic form `[[0, I], [-I, 0]]` on `R^{2n}` with coordinates `(q, p)`.
pub fn standard_omega(n: usize) -> RMat {
    let mut omega = RMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        omega[(k, n + k)] = 1.0;
        omega[(n + k, k)] = -1.0;
    }
    omega
}

pub fn complexify(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn real_part(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

pub fn imag_part(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

pub fn max_abs_c(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_r(m: &RMat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn det_c(m: &CMat) -> C64 {
    m.clone().lu().determinant()
}

pub fn det_r(m: &RMat) -> f64 {
    m.clone().lu().determinant()
}

pub fn inverse_c(m: &CMat) -> Option<CMat> {
    m.clone().try_inverse()
}

pub fn inverse_r(m: &RMat) -> Option<RMat> {
    m.clone().try_inverse()
}

/// Solves `a x = b`, rejecting numerically singular `a`.
pub fn solve_c(a: &CMat, b: &CMat) -> Option<CMat> {
    if a.nrows() == 0 {
        return Some(b.clone());
    }
    let scale = max_abs_c(a).max(f64::MIN_POSITIVE);
    let lu = a.clone().lu();
    let u = lu.u();
    let min_pivot = (0..u.nrows()).fold(f64::INFINITY, |acc, k| acc.min(u[(k, k)].norm()));
    if min_pivot <= 1e-13 * scale {
        return None;
    }
    lu.solve(b)
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn eigenvalues_c(m: &CMat) -> Vec<C64> {
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|k| t[(k, k)]).collect()
}

/// `exp(-1/2 tr Log(m))` with the principal logarithm, i.e. the inverse
/// square root of `det m` continued from the positive branch on matrices
/// whose spectrum avoids the closed negative half-line.
pub fn inv_sqrt_det_principal(m: &CMat) -> C64 {
    eigenvalues_c(m)
        .into_iter()
        .fold(C64::new(1.0, 0.0), |acc, lambda| acc / lambda.sqrt())
}

/// Inverse square root of a Hermitian positive-definite matrix.
pub fn hermitian_inv_sqrt(m: &CMat) -> Option<CMat> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&w| w <= 0.0) {
        return None;
    }
    let scales = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&w| C64::new(w.powf(-0.5), 0.0)),
    );
    let v = &eig.eigenvectors;
    Some(v * DMatrix::from_diagonal(&scales) * v.adjoint())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_min_eigenvalue(m: &CMat) -> f64 {
    let herm = (m + m.adjoint()).map(|z| z * 0.5);
    herm.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Largest eigenvalue of a real symmetric matrix.
pub fn symmetric_max_eigenvalue(m: &RMat) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigen().eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Direct sum `diag(a, b)`.
pub fn block_diag_c(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

pub fn block_diag_r(a: &RMat, b: &RMat) -> RMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = RMat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

pub fn hstack_c(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

pub fn vstack_c(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

/// Relative closeness of two complex scalars.
pub fn rel_diff(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}
