//! Symplectic vector spaces, linear symplectomorphisms and positive
//! polarizations.
//!
//! The working basis is a fixed Darboux basis `(q_1..q_n, p_1..p_n)` with
//! `omega((q,p),(q',p')) = q.p' - p.q'`; the Liouville measure is Lebesgue
//! measure in these coordinates. A positive polarization `E` of `S (x) C` is
//! kept both as a frame `F` (a `2n x n` complex matrix whose columns span
//! `E`) and as its Siegel point `Z`, the unique complex symmetric matrix with
//! `span [Z; I] = E`. With this sign convention `Z = i I` is the standard
//! polarization and `Im Z` is positive definite.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::linalg::{
    complexify, conj, hermitian_inv_sqrt, hermitian_min_eigenvalue, hstack_c, imag_part,
    inverse_r, max_abs_c, max_abs_r, real_part, solve_c, standard_omega, vstack_c, CMat, RMat,
    I,
};

/// Relative tolerance used by the validating constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(pub f64);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(1e-9)
    }
}

impl Tolerance {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `R^{2n}` with its standard symplectic form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticSpace {
    n: usize,
}

impl SymplecticSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("half-dimension must be positive".into()));
        }
        Ok(SymplecticSpace { n })
    }

    pub fn half_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn omega(&self) -> RMat {
        standard_omega(self.n)
    }

    /// `omega(x, y)` for real vectors.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.n;
        (0..n).map(|k| x[k] * y[n + k] - x[n + k] * y[k]).sum()
    }
}

/// A linear symplectomorphism of `R^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symplectomorphism {
    space: SymplecticSpace,
    matrix: RMat,
}

impl Symplectomorphism {
    pub fn new(matrix: RMat) -> Result<Self> {
        Self::with_tolerance(matrix, Tolerance::default())
    }

    pub fn with_tolerance(matrix: RMat, tol: Tolerance) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows % 2 != 0 || rows == 0 {
            return Err(Error::InvalidArgument(format!(
                "symplectic matrix must be square of even size, got {rows}x{cols}"
            )));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let space = SymplecticSpace::new(rows / 2)?;
        let omega = space.omega();
        let defect = max_abs_r(&(matrix.transpose() * &omega * &matrix - &omega));
        let scale = max_abs_r(&matrix).powi(2).max(1.0);
        if defect > tol.0 * scale {
            return Err(Error::NotSymplectic { defect });
        }
        Ok(Symplectomorphism { space, matrix })
    }

    pub(crate) fn new_unchecked(matrix: RMat) -> Self {
        let space = SymplecticSpace { n: matrix.nrows() / 2 };
        Symplectomorphism { space, matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self::new_unchecked(RMat::identity(2 * n, 2 * n))
    }

    pub fn minus_identity(n: usize) -> Self {
        Self::new_unchecked(-RMat::identity(2 * n, 2 * n))
    }

    /// The rotation `cos(t) I + sin(t) J0` where `J0` is the standard complex structure.
    pub fn rotation(n: usize, angle: f64) -> Self {
        let j0 = -standard_omega(n);
        Self::new_unchecked(RMat::identity(2 * n, 2 * n) * angle.cos() + j0 * angle.sin())
    }

    pub fn space(&self) -> SymplecticSpace {
        self.space
    }

    pub fn half_dim(&self) -> usize {
        self.space.n
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &Symplectomorphism) -> Result<Symplectomorphism> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                found: other.space.dim(),
            });
        }
        Ok(Self::new_unchecked(&self.matrix * &other.matrix))
    }

    /// `g^{-1} = -Omega g^T Omega`.
    pub fn inverse(&self) -> Symplectomorphism {
        let omega = self.space.omega();
        Self::new_unchecked(-(&omega * self.matrix.transpose() * &omega))
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `det(I - g)`.
    pub fn det_one_minus(&self) -> f64 {
        let n2 = self.space.dim();
        (RMat::identity(n2, n2) - &self.matrix).lu().determinant()
    }
}

/// A positive Lagrangian subspace `E` of `S (x) C`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivePolarization {
    frame: CMat,
    siegel: CMat,
}

impl PositivePolarization {
    /// The polarization spanned by `[Z; I]`.
    pub fn from_siegel(z: CMat) -> Result<Self> {
        Self::from_siegel_with_tolerance(z, Tolerance::default())
    }

    pub fn from_siegel_with_tolerance(z: CMat, tol: Tolerance) -> Result<Self> {
        let (n, m) = z.shape();
        if n != m || n == 0 {
            return Err(Error::InvalidSiegelPoint(format!("Z must be square, got {n}x{m}")));
        }
        if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidSiegelPoint("non-finite entries".into()));
        }
        let scale = max_abs_c(&z).max(1.0);
        let asym = max_abs_c(&(&z - z.transpose()));
        if asym > tol.0 * scale {
            return Err(Error::InvalidSiegelPoint(format!(
                "Z is not symmetric (defect {asym:.3e})"
            )));
        }
        let z = (&z + z.transpose()).map(|v| v * 0.5);
        let im = imag_part(&z);
        let min_eig = crate::linalg::symmetric_max_eigenvalue(&(-&im));
        if -min_eig <= tol.0 * scale || Cholesky::new(im).is_none() {
            return Err(Error::InvalidSiegelPoint(
                "Im Z is not positive definite".into(),
            ));
        }
        let frame = vstack_c(&z, &CMat::identity(n, n));
        Ok(PositivePolarization { frame, siegel: z })
    }

    /// The polarization spanned by the columns of `frame`; the frame is kept
    /// as given (it fixes the half-form gauge).
    pub fn from_frame(frame: CMat) -> Result<Self> {
        Self::from_frame_with_tolerance(frame, Tolerance::default())
    }

    pub fn from_frame_with_tolerance(frame: CMat, tol: Tolerance) -> Result<Self> {
        let (rows, n) = frame.shape();
        if rows != 2 * n || n == 0 {
            return Err(Error::InvalidPolarization(format!(
                "frame must be 2n x n, got {rows}x{n}"
            )));
        }
        let omega = complexify(&standard_omega(n));
        let scale = max_abs_c(&frame).powi(2).max(f64::MIN_POSITIVE);
        let lagrangian = max_abs_c(&(frame.transpose() * &omega * &frame));
        if lagrangian > tol.0 * scale {
            return Err(Error::InvalidPolarization(format!(
                "frame is not Lagrangian (defect {lagrangian:.3e})"
            )));
        }
        let gram = gram_of(&frame);
        if hermitian_min_eigenvalue(&gram) <= tol.0 * scale {
            return Err(Error::InvalidPolarization("Gram matrix is not positive definite".into()));
        }
        let siegel = siegel_of(&frame)?;
        Ok(PositivePolarization { frame, siegel })
    }

    pub fn standard(n: usize) -> Self {
        let z = CMat::identity(n, n).map(|v| v * I);
        let frame = vstack_c(&z, &CMat::identity(n, n));
        PositivePolarization { frame, siegel: z }
    }

    pub fn half_dim(&self) -> usize {
        self.siegel.nrows()
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn siegel(&self) -> &CMat {
        &self.siegel
    }

    /// Same polarization with the normalized frame `[Z; I]`.
    pub fn normalized(&self) -> PositivePolarization {
        let n = self.half_dim();
        PositivePolarization {
            frame: vstack_c(&self.siegel, &CMat::identity(n, n)),
            siegel: self.siegel.clone(),
        }
    }

    /// Gram matrix `H_ab = (1/i) F_a^T Omega conj(F_b)` of the canonical
    /// Hermitian product.
    pub fn gram(&self) -> CMat {
        gram_of(&self.frame)
    }

    /// Real `j` with `j F = i F`.
    pub fn complex_structure(&self) -> RMat {
        let n = self.half_dim();
        let basis = hstack_c(&self.frame, &conj(&self.frame));
        let mut eig = CMat::zeros(2 * n, 2 * n);
        for k in 0..n {
            eig[(k, k)] = I;
            eig[(n + k, n + k)] = -I;
        }
        let rhs = &basis * eig;
        // j * basis = rhs  <=>  basis^T j^T = rhs^T
        let jt = solve_c(&basis.transpose(), &rhs.transpose())
            .expect("E and its conjugate are complementary");
        real_part(&jt.transpose())
    }

    /// The compatible metric `G = Omega j`.
    pub fn metric(&self) -> RMat {
        standard_omega(self.half_dim()) * self.complex_structure()
    }

    /// `pi = (I - i j) / 2`, the projector onto `E` with kernel `conj(E)`.
    pub fn projector(&self) -> CMat {
        let n = self.half_dim();
        let j = complexify(&self.complex_structure());
        (CMat::identity(2 * n, 2 * n) - j.map(|v| v * I)).map(|v| v * 0.5)
    }

    /// Holomorphic coordinates: the `n x 2n` matrix `B` with `B F = I` and
    /// `B conj(F) = 0`.
    pub fn coordinate_map(&self) -> CMat {
        coordinate_map_of(&self.frame)
    }

    /// A frame of `E` that is orthonormal for the canonical Hermitian product.
    pub fn orthonormal_frame(&self) -> CMat {
        let inv_sqrt = hermitian_inv_sqrt(&self.gram().transpose())
            .expect("Gram matrix of a positive polarization is positive definite");
        &self.frame * inv_sqrt
    }

    /// Holomorphic coordinates dual to [`Self::orthonormal_frame`].
    pub fn orthonormal_coordinate_map(&self) -> CMat {
        coordinate_map_of(&self.orthonormal_frame())
    }

    /// `|s|` for the half-form vector trivializing the stored frame: `det(H)^{-1/4}`.
    pub fn half_form_norm(&self) -> f64 {
        self.gram_det().powf(-0.25)
    }

    /// `gE` with frame `g F`.
    pub fn pushforward(&self, g: &Symplectomorphism) -> Result<PositivePolarization> {
        if g.half_dim() != self.half_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.half_dim(),
                found: g.half_dim(),
            });
        }
        let frame = complexify(g.matrix()) * &self.frame;
        let siegel = siegel_of(&frame)?;
        Ok(PositivePolarization { frame, siegel })
    }

    /// Right-multiplies the frame by an invertible `n x n` matrix.
    pub fn regauged(&self, gauge: &CMat) -> Result<PositivePolarization> {
        let frame = &self.frame * gauge;
        let siegel = siegel_of(&frame)?;
        Ok(PositivePolarization { frame, siegel })
    }

    pub fn same_subspace(&self, other: &PositivePolarization, tol: f64) -> bool {
        self.half_dim() == other.half_dim()
            && max_abs_c(&(&self.siegel - &other.siegel))
                <= tol * max_abs_c(&self.siegel).max(1.0)
    }

    pub fn same_frame(&self, other: &PositivePolarization, tol: f64) -> bool {
        self.half_dim() == other.half_dim()
            && max_abs_c(&(&self.frame - &other.frame)) <= tol * max_abs_c(&self.frame).max(1.0)
    }

    /// `det` of the Gram matrix of the stored frame (positive real).
    pub(crate) fn gram_det(&self) -> f64 {
        crate::linalg::det_c(&self.gram()).re
    }
}

fn gram_of(frame: &CMat) -> CMat {
    let n = frame.ncols();
    let omega = complexify(&standard_omega(n));
    (frame.transpose() * omega * conj(frame)).map(|v| v * -I)
}

fn siegel_of(frame: &CMat) -> Result<CMat> {
    let n = frame.ncols();
    let fq = frame.rows(0, n).into_owned();
    let fp = frame.rows(n, n).into_owned();
    // Z = F_q F_p^{-1}  <=>  F_p^T Z^T = F_q^T
    let zt = solve_c(&fp.transpose(), &fq.transpose()).ok_or_else(|| {
        Error::Internal("frame is not transverse to {q = 0}; not a positive polarization".into())
    })?;
    let z = zt.transpose();
    Ok((&z + z.transpose()).map(|v| v * 0.5))
}

fn coordinate_map_of(frame: &CMat) -> CMat {
    let n = frame.ncols();
    let basis = hstack_c(frame, &conj(frame));
    let inv = basis.try_inverse().expect("E and its conjugate are complementary");
    inv.rows(0, n).into_owned()
}

/// The polarization with frame `[Z; I]`.
pub fn polarization_from_siegel(z: CMat) -> Result<PositivePolarization> {
    PositivePolarization::from_siegel(z)
}

/// `Z = F_q F_p^{-1}` recomputed from the frame.
pub fn siegel_from_polarization(p: &PositivePolarization) -> Result<CMat> {
    siegel_of(p.frame())
}

pub fn complex_structure(p: &PositivePolarization) -> RMat {
    p.complex_structure()
}

pub fn projector(p: &PositivePolarization) -> CMat {
    p.projector()
}

pub fn pushforward(g: &Symplectomorphism, p: &PositivePolarization) -> Result<PositivePolarization> {
    p.pushforward(g)
}

/// Symplectic inverse helper for real matrices that are only known to be
/// invertible.
pub(crate) fn real_inverse(m: &RMat) -> Result<RMat> {
    inverse_r(m).ok_or_else(|| Error::Singular("real matrix is not invertible".into()))
}
