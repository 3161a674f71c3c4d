//! The metaplectic group `Mp(S, E)` realized as pairs `(g, z)` with
//! `z^2 det(pi g : E -> E) = 1`, the index `m`, the generalized groups `Mp_p`
//! and the unitary and metalinear embeddings.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::halfform::{dmor_compose, DMorphism};
use crate::linalg::{
    c, complexify, conj, det_c, det_r, hstack_c, imag_part, inverse_c, max_abs_c, max_abs_r,
    real_part, rel_diff, solve_c, CMat, RMat, C64,
};
use crate::symplectic::{real_inverse, PositivePolarization, Symplectomorphism, Tolerance};

/// Residual tolerance used when rounding the index.
pub const INDEX_RESIDUAL_TOLERANCE: f64 = 1e-6;

/// Threshold on `|det(I - g)|` below which the index is undefined.
pub const DEGENERACY_THRESHOLD: f64 = 1e-12;

/// The matrix `M` of `pi g : E -> E` in the frame `F`: `g F = F M + conj(F) N`.
pub fn projection_matrix(g: &Symplectomorphism, reference: &PositivePolarization) -> Result<CMat> {
    let n = reference.half_dim();
    if g.half_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.half_dim() });
    }
    let f = reference.frame();
    let gf = complexify(g.matrix()) * f;
    let sol = solve_c(&hstack_c(f, &conj(f)), &gf)
        .ok_or_else(|| Error::InvalidPolarization("E and conj(E) are not complementary".into()))?;
    Ok(sol.rows(0, n).into_owned())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetaplecticElement {
    g: Symplectomorphism,
    z: C64,
    reference: PositivePolarization,
}

impl MetaplecticElement {
    pub fn new(g: Symplectomorphism, z: C64, reference: PositivePolarization) -> Result<Self> {
        Self::with_tolerance(g, z, reference, Tolerance::default())
    }

    pub fn with_tolerance(
        g: Symplectomorphism,
        z: C64,
        reference: PositivePolarization,
        tol: Tolerance,
    ) -> Result<Self> {
        let d = det_c(&projection_matrix(&g, &reference)?);
        if rel_diff(z * z * d, c(1.0, 0.0)) > tol.0 {
            return Err(Error::InvalidElement(format!(
                "z^2 det(pi g|E) = {} instead of 1",
                z * z * d
            )));
        }
        Ok(MetaplecticElement { g, z, reference })
    }

    pub fn identity(reference: &PositivePolarization) -> Self {
        MetaplecticElement {
            g: Symplectomorphism::identity(reference.half_dim()),
            z: c(1.0, 0.0),
            reference: reference.clone(),
        }
    }

    pub fn g(&self) -> &Symplectomorphism {
        &self.g
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn reference(&self) -> &PositivePolarization {
        &self.reference
    }

    pub fn half_dim(&self) -> usize {
        self.reference.half_dim()
    }

    /// The other element over the same `g`.
    pub fn opposite(&self) -> Self {
        MetaplecticElement { z: -self.z, ..self.clone() }
    }

    pub fn inverse(&self) -> Self {
        MetaplecticElement {
            g: self.g.inverse(),
            z: self.z.conj(),
            reference: self.reference.clone(),
        }
    }

    /// The same data seen as an endomorphism of `(S, E)` in the category `D`.
    pub fn to_dmorphism(&self) -> DMorphism {
        DMorphism::new_unchecked(
            self.g.clone(),
            self.reference.clone(),
            self.reference.clone(),
            self.z,
        )
    }

    pub fn from_dmorphism(m: &DMorphism) -> Result<Self> {
        if !m.source().same_frame(m.target(), 1e-9) {
            return Err(Error::MismatchedEndpoints(
                "a metaplectic element needs equal source and target".into(),
            ));
        }
        Self::new(m.g().clone(), m.psi(), m.source().clone())
    }

    /// `|det(I - g)|`, checked against the degeneracy threshold.
    pub fn fixed_point_det(&self) -> Result<f64> {
        fixed_point_det(&self.g)
    }
}

fn fixed_point_det(g: &Symplectomorphism) -> Result<f64> {
    let d = g.det_one_minus();
    if d.abs() <= DEGENERACY_THRESHOLD {
        return Err(Error::FixedPointDegenerate { det: d });
    }
    Ok(d)
}

/// The two elements `(g, +-z)` over `g`; the first has `z` the principal root
/// of `1 / det M`.
pub fn mp_lift(
    g: &Symplectomorphism,
    reference: &PositivePolarization,
) -> Result<(MetaplecticElement, MetaplecticElement)> {
    let d = det_c(&projection_matrix(g, reference)?);
    let z = (c(1.0, 0.0) / d).sqrt();
    let e = MetaplecticElement { g: g.clone(), z, reference: reference.clone() };
    let other = e.opposite();
    Ok((e, other))
}

/// `(g', z') (g, z) = (g' g, zeta^{1/2}(g' g E, g' E, E) z' z)`.
pub fn mp_compose(e2: &MetaplecticElement, e1: &MetaplecticElement) -> Result<MetaplecticElement> {
    if !e1.reference.same_frame(&e2.reference, 1e-9) {
        return Err(Error::MismatchedEndpoints("elements of different metaplectic groups".into()));
    }
    let m = dmor_compose(&e2.to_dmorphism(), &e1.to_dmorphism())?;
    Ok(MetaplecticElement {
        g: m.g().clone(),
        z: m.psi(),
        reference: e1.reference.clone(),
    })
}

/// `A(g) = 1/2 (I + g)(I - g)^{-1} j`.
pub fn a_matrix(g: &Symplectomorphism, reference: &PositivePolarization) -> Result<RMat> {
    let n2 = 2 * reference.half_dim();
    if g.half_dim() != reference.half_dim() {
        return Err(Error::DimensionMismatch { expected: reference.half_dim(), found: g.half_dim() });
    }
    fixed_point_det(g)?;
    let id = RMat::identity(n2, n2);
    let inv = real_inverse(&(&id - g.matrix())).map_err(|_| Error::FixedPointDegenerate {
        det: g.det_one_minus(),
    })?;
    Ok((&id + g.matrix()) * inv * reference.complex_structure() * 0.5)
}

/// `det^{1/2}(1/2 I + iA)` on the branch that is positive at `A = 0`.
///
/// `A` is symmetric for the metric `G`, so `L^T A L^{-T}` is symmetric for
/// `G = L L^T`; its real eigenvalues `lambda` give `prod sqrt(1/2 + i lambda)`,
/// all factors in the right half-plane.
pub fn det_sqrt_half_plus_ia(a: &RMat, reference: &PositivePolarization) -> Result<C64> {
    let n2 = 2 * reference.half_dim();
    if a.nrows() != n2 || a.ncols() != n2 {
        return Err(Error::DimensionMismatch { expected: n2, found: a.nrows() });
    }
    let gm = reference.metric();
    let ga = &gm * a;
    let defect = max_abs_r(&(&ga - ga.transpose()));
    if defect > 1e-8 * max_abs_r(&ga).max(1.0) {
        return Err(Error::NotMetricSymmetric { defect });
    }
    let l = gm
        .cholesky()
        .ok_or_else(|| Error::Internal("metric of a positive polarization is not positive".into()))?
        .unpack();
    let l_inv_t = real_inverse(&l.transpose())?;
    let s = l.transpose() * a * l_inv_t;
    let sym = (&s + s.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    Ok(eig
        .eigenvalues
        .iter()
        .map(|&lambda| c(0.5, lambda).sqrt())
        .product())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexResult {
    /// The index, in `0..modulus`.
    pub m: u32,
    /// 4 for `m`, `2p'` for `m_p`.
    pub modulus: u32,
    pub a: RMat,
    pub detsqrt: C64,
    /// `|z detsqrt |det(I - g)|^{1/2} - e^{i pi m / p'}|`.
    pub residual: f64,
}

fn round_index(value: C64, p_prime: u32) -> (u32, f64) {
    let modulus = 2 * p_prime;
    let steps = (value.arg() * p_prime as f64 / PI).round() as i64;
    let m = steps.rem_euclid(modulus as i64) as u32;
    let target = C64::from_polar(1.0, PI * m as f64 / p_prime as f64);
    (m, (value - target).norm())
}

fn index_impl(g: &Symplectomorphism, z: C64, reference: &PositivePolarization, p_prime: u32, tol: f64) -> Result<IndexResult> {
    let a = a_matrix(g, reference)?;
    let detsqrt = det_sqrt_half_plus_ia(&a, reference)?;
    let value = z * detsqrt * g.det_one_minus().abs().sqrt();
    let (m, residual) = round_index(value, p_prime);
    if residual > tol {
        return Err(Error::ResidualTooLarge { residual, tolerance: tol });
    }
    Ok(IndexResult { m, modulus: 2 * p_prime, a, detsqrt, residual })
}

/// The index `m(g, z)` in `Z/4` from `z det^{1/2}(1/2 + iA) = i^m / |det(I - g)|^{1/2}`.
pub fn mp_index(e: &MetaplecticElement) -> Result<IndexResult> {
    mp_index_with(e, INDEX_RESIDUAL_TOLERANCE)
}

pub fn mp_index_with(e: &MetaplecticElement, residual_tolerance: f64) -> Result<IndexResult> {
    index_impl(&e.g, e.z, &e.reference, 2, residual_tolerance)
}

/// The two-dimensional formula `m = k + (1 - (-1)^{k + eps}) / 2`, with
/// `arg z in [k pi/2, (k+1) pi/2)` and `eps = 0` iff `tr g > 2`.
pub fn mp_index_2d(e: &MetaplecticElement) -> Result<u32> {
    if e.half_dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: e.half_dim() });
    }
    fixed_point_det(&e.g)?;
    let arg = e.z.arg().rem_euclid(2.0 * PI);
    let k = ((arg / (PI / 2.0)).floor() as u32).min(3);
    let eps = if e.g.trace() > 2.0 { 0 } else { 1 };
    let m = k + if (k + eps) % 2 == 0 { 0 } else { 1 };
    Ok(m % 4)
}

/// The chart `(theta, u, v) -> (g(-2 theta, u, v), e^{i theta} (1 - u^2 - v^2)^{1/4})`
/// of `Mp` for the standard two-dimensional space.
///
/// `|det(pi g|E)| = (1 - u^2 - v^2)^{-1/2}`, so the modulus of `z` carries the
/// exponent `+1/4`.
pub fn sl2_parametrization(theta: f64, u: f64, v: f64) -> Result<MetaplecticElement> {
    let r2 = u * u + v * v;
    if !(r2 < 1.0) {
        return Err(Error::OutsideDisc { u, v });
    }
    let s = (1.0 - r2).powf(-0.5);
    let t = -2.0 * theta;
    let g = RMat::from_row_slice(
        2,
        2,
        &[
            s * (t.cos() + u),
            s * (-t.sin() + v),
            s * (t.sin() + v),
            s * (t.cos() - u),
        ],
    );
    let z = C64::from_polar((1.0 - r2).powf(0.25), theta);
    MetaplecticElement::new(Symplectomorphism::new(g)?, z, PositivePolarization::standard(1))
}

/// Moves `(q_1, p_1)` and `(q_2, p_2)` coordinates into the standard order
/// `(q_1, q_2, p_1, p_2)` of the product space.
fn product_index(n1: usize, n2: usize, first: bool, i: usize) -> usize {
    let n = n1 + n2;
    match (first, i) {
        (true, i) if i < n1 => i,
        (true, i) => n + (i - n1),
        (false, i) if i < n2 => n1 + i,
        (false, i) => n + n1 + (i - n2),
    }
}

/// `(g_1 x g_2, z_1 z_2)` on `S_1 x S_2` with polarization `E_1 x E_2`.
pub fn mp_product(e1: &MetaplecticElement, e2: &MetaplecticElement) -> Result<MetaplecticElement> {
    let (n1, n2) = (e1.half_dim(), e2.half_dim());
    let n = n1 + n2;
    let mut g = RMat::zeros(2 * n, 2 * n);
    let mut frame = CMat::zeros(2 * n, n);
    for (first, e, k, offset) in [(true, e1, n1, 0), (false, e2, n2, n1)] {
        let idx = |i| product_index(n1, n2, first, i);
        for i in 0..2 * k {
            for j in 0..2 * k {
                g[(idx(i), idx(j))] = e.g.matrix()[(i, j)];
            }
            for j in 0..k {
                frame[(idx(i), offset + j)] = e.reference.frame()[(i, j)];
            }
        }
    }
    let reference = PositivePolarization::from_frame(frame)?;
    MetaplecticElement::new(Symplectomorphism::new(g)?, e1.z * e2.z, reference)
}

/// `(h, z) -> (iota(h), z^{-1})` where `iota(h)` acts as `h` on `E` (in an
/// orthonormal frame) and as `conj(h)` on `conj(E)`.
pub fn unitary_embed(h: &CMat, z: C64, reference: &PositivePolarization) -> Result<MetaplecticElement> {
    let n = reference.half_dim();
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: h.nrows() });
    }
    let defect = max_abs_c(&(h.adjoint() * h - CMat::identity(n, n)));
    if defect > 1e-9 {
        return Err(Error::NotUnitary { defect });
    }
    if rel_diff(z * z, det_c(h)) > 1e-9 {
        return Err(Error::InvalidElement(format!("z^2 = {} but det h = {}", z * z, det_c(h))));
    }
    let f = reference.orthonormal_frame();
    let t = hstack_c(&f, &conj(&f));
    let t_inv = inverse_c(&t).ok_or_else(|| Error::Internal("E + conj(E) is not direct".into()))?;
    let mut d = CMat::zeros(2 * n, 2 * n);
    d.view_mut((0, 0), (n, n)).copy_from(h);
    d.view_mut((n, n), (n, n)).copy_from(&conj(h));
    let gc = t * d * t_inv;
    let imag = max_abs_r(&imag_part(&gc));
    if imag > 1e-9 * max_abs_c(&gc).max(1.0) {
        return Err(Error::Internal(format!("iota(h) is not real (defect {imag})")));
    }
    MetaplecticElement::new(Symplectomorphism::new(real_part(&gc))?, c(1.0, 0.0) / z, reference.clone())
}

/// The unique `(g, z')` with `g` preserving `Lambda = span(e_1..e_n)` and
/// `j Lambda`, `g|_Lambda = h`, and `z' / z > 0`.
pub fn metalinear_embed(h: &RMat, z: C64, reference: &PositivePolarization) -> Result<MetaplecticElement> {
    let n = reference.half_dim();
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: h.nrows() });
    }
    let det_h = det_r(h);
    if det_h.abs() <= 1e-14 * max_abs_r(h).powi(n as i32).max(1.0) {
        return Err(Error::Singular("h is not invertible".into()));
    }
    if rel_diff(z * z, c(det_h, 0.0)) > 1e-9 {
        return Err(Error::InvalidElement(format!("z^2 = {} but det h = {det_h}", z * z)));
    }
    let j = reference.complex_structure();
    let gm = reference.metric();
    let g_lambda = gm.view((0, 0), (n, n)).into_owned();
    let mut t = RMat::zeros(2 * n, 2 * n);
    t.view_mut((0, 0), (n, n)).fill_with_identity();
    t.view_mut((0, n), (2 * n, n)).copy_from(&j.view((0, 0), (2 * n, n)));
    let h_inv_t = real_inverse(h)?.transpose();
    let c_block = real_inverse(&g_lambda)? * h_inv_t * &g_lambda;
    let mut d = RMat::zeros(2 * n, 2 * n);
    d.view_mut((0, 0), (n, n)).copy_from(h);
    d.view_mut((n, n), (n, n)).copy_from(&c_block);
    let g = Symplectomorphism::new(&t * d * real_inverse(&t)?)?;
    let det_m = det_c(&projection_matrix(&g, reference)?);
    let mut zp = (c(1.0, 0.0) / det_m).sqrt();
    let ratio = zp / z;
    if ratio.re < 0.0 {
        zp = -zp;
    }
    let ratio = zp / z;
    if ratio.im.abs() > 1e-9 * ratio.norm() {
        return Err(Error::Internal(format!("z'/z = {ratio} is not real")));
    }
    MetaplecticElement::new(g, zp, reference.clone())
}

/// An element `(g, z)` of `Mp_p(S, E)`: `(z^2 det M)^p = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedMetaplecticElement {
    g: Symplectomorphism,
    z: C64,
    reference: PositivePolarization,
    p: u32,
}

impl GeneralizedMetaplecticElement {
    pub fn new(g: Symplectomorphism, z: C64, reference: PositivePolarization, p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("p must be positive".into()));
        }
        let d = det_c(&projection_matrix(&g, &reference)?);
        let w = (z * z * d).powu(p);
        if rel_diff(w, c(1.0, 0.0)) > 1e-9 * p as f64 {
            return Err(Error::InvalidElement(format!("(z^2 det M)^p = {w} instead of 1")));
        }
        Ok(GeneralizedMetaplecticElement { g, z, reference, p })
    }

    pub fn from_metaplectic(e: &MetaplecticElement) -> Self {
        GeneralizedMetaplecticElement {
            g: e.g.clone(),
            z: e.z,
            reference: e.reference.clone(),
            p: 1,
        }
    }

    pub fn g(&self) -> &Symplectomorphism {
        &self.g
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn reference(&self) -> &PositivePolarization {
        &self.reference
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// `p' = p` for even `p`, `2p` for odd `p`.
    pub fn p_prime(&self) -> u32 {
        p_prime(self.p)
    }
}

pub fn p_prime(p: u32) -> u32 {
    if p % 2 == 0 {
        p
    } else {
        2 * p
    }
}

/// `((g, z), u) -> (g, z u)` from `Mp(S, E) x U_{2p}` onto `Mp_p(S, E)`.
pub fn mp_p_from_cover(e: &MetaplecticElement, u: C64, p: u32) -> Result<GeneralizedMetaplecticElement> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be positive".into()));
    }
    if (u.powu(2 * p) - c(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::NotRootOfUnity { value: u.to_string(), order: 2 * p });
    }
    GeneralizedMetaplecticElement::new(e.g.clone(), e.z * u, e.reference.clone(), p)
}

/// `m_p` in `Z/2p'` from `z det^{1/2}(1/2 + iA) = e^{i pi m_p / p'} / |det(I - g)|^{1/2}`.
pub fn mp_p_index(e: &GeneralizedMetaplecticElement) -> Result<IndexResult> {
    mp_p_index_with(e, INDEX_RESIDUAL_TOLERANCE)
}

pub fn mp_p_index_with(e: &GeneralizedMetaplecticElement, residual_tolerance: f64) -> Result<IndexResult> {
    index_impl(&e.g, e.z, &e.reference, e.p_prime(), residual_tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;
    use crate::sample::Sampler;

    fn std1() -> PositivePolarization {
        PositivePolarization::standard(1)
    }

    fn squeeze() -> Symplectomorphism {
        Symplectomorphism::new(RMat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])).unwrap()
    }

    fn el(g: Symplectomorphism, z: C64) -> MetaplecticElement {
        MetaplecticElement::new(g, z, std1()).unwrap()
    }

    #[test]
    fn lift_examples() {
        let (a, b) = mp_lift(&Symplectomorphism::identity(1), &std1()).unwrap();
        assert!((a.z() - 1.0).norm() < 1e-15 && (b.z() + 1.0).norm() < 1e-15);
        let (a, _) = mp_lift(&Symplectomorphism::minus_identity(1), &std1()).unwrap();
        assert!((a.z() * a.z() + 1.0).norm() < 1e-15);
        let (a, _) = mp_lift(&squeeze(), &std1()).unwrap();
        let m = projection_matrix(&squeeze(), &std1()).unwrap();
        assert!((m[(0, 0)] - 1.25).norm() < 1e-15);
        assert!((a.z() - 2.0 / 5f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn element_invariant_is_checked() {
        assert!(matches!(
            MetaplecticElement::new(Symplectomorphism::minus_identity(1), c(1.0, 0.0), std1()),
            Err(Error::InvalidElement(_))
        ));
    }

    #[test]
    fn double_cover_witness() {
        let e = el(Symplectomorphism::minus_identity(1), I);
        let sq = mp_compose(&e, &e).unwrap();
        assert!(max_abs_r(&(sq.g().matrix() - RMat::identity(2, 2))) == 0.0);
        assert!((sq.z() - c(-1.0, 0.0)).norm() < 1e-15);
        let unit = mp_compose(&MetaplecticElement::identity(&std1()), &e).unwrap();
        assert!((unit.z() - e.z()).norm() < 1e-15);
    }

    #[test]
    fn group_law() {
        let mut s = Sampler::new(21);
        for n in 1..=2 {
            let r = s.polarization(n);
            for _ in 0..30 {
                let (a, b, cc) = (s.metaplectic(n, &r), s.metaplectic(n, &r), s.metaplectic(n, &r));
                let left = mp_compose(&mp_compose(&cc, &b).unwrap(), &a).unwrap();
                let right = mp_compose(&cc, &mp_compose(&b, &a).unwrap()).unwrap();
                assert!(rel_diff(left.z(), right.z()) < 1e-8);
                assert!(MetaplecticElement::new(left.g().clone(), left.z(), r.clone()).is_ok());
                let id = mp_compose(&a.inverse(), &a).unwrap();
                assert!((id.z() - 1.0).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn a_matrix_examples() {
        let a = a_matrix(&Symplectomorphism::minus_identity(1), &std1()).unwrap();
        assert_eq!(max_abs_r(&a), 0.0);
        let a = a_matrix(&squeeze(), &std1()).unwrap();
        let expected = RMat::from_row_slice(2, 2, &[0.0, 1.5, 1.5, 0.0]);
        assert!(max_abs_r(&(a - expected)) < 1e-15);
        assert!(matches!(
            a_matrix(&Symplectomorphism::identity(1), &std1()),
            Err(Error::FixedPointDegenerate { .. })
        ));
    }

    #[test]
    fn det_sqrt_examples() {
        let zero = RMat::zeros(2, 2);
        assert!((det_sqrt_half_plus_ia(&zero, &std1()).unwrap() - 0.5).norm() < 1e-15);
        let a = RMat::from_row_slice(2, 2, &[0.0, 1.5, 1.5, 0.0]);
        let v = det_sqrt_half_plus_ia(&a, &std1()).unwrap();
        assert!((v - 10f64.sqrt() / 2.0).norm() < 1e-14);
        let skew = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(
            det_sqrt_half_plus_ia(&skew, &std1()),
            Err(Error::NotMetricSymmetric { .. })
        ));
    }

    #[test]
    fn det_sqrt_squares_to_determinant() {
        let mut s = Sampler::new(22);
        for n in 1..=3 {
            let r = s.polarization(n);
            for _ in 0..20 {
                let g = s.symplectic_nondegenerate(n);
                let a = a_matrix(&g, &r).unwrap();
                let v = det_sqrt_half_plus_ia(&a, &r).unwrap();
                let m = complexify(&a).map(|x| x * I) + CMat::identity(2 * n, 2 * n) * c(0.5, 0.0);
                assert!(rel_diff(v * v, det_c(&m)) < 1e-10);
            }
        }
    }

    #[test]
    fn index_examples() {
        let res = mp_index(&el(Symplectomorphism::minus_identity(1), I)).unwrap();
        assert_eq!(res.m, 1);
        assert!(res.residual < 1e-12);
        assert_eq!(mp_index(&el(Symplectomorphism::minus_identity(1), -I)).unwrap().m, 3);
        let res = mp_index(&el(squeeze(), c(2.0 / 5f64.sqrt(), 0.0))).unwrap();
        assert_eq!(res.m, 0);
        assert!((res.detsqrt - 10f64.sqrt() / 2.0).norm() < 1e-14);
    }

    #[test]
    fn index_2d_examples() {
        assert_eq!(mp_index_2d(&el(Symplectomorphism::minus_identity(1), I)).unwrap(), 1);
        assert_eq!(mp_index_2d(&el(squeeze(), c(2.0 / 5f64.sqrt(), 0.0))).unwrap(), 0);
        assert_eq!(mp_index_2d(&el(squeeze(), c(-2.0 / 5f64.sqrt(), 0.0))).unwrap(), 2);
        let r2 = PositivePolarization::standard(2);
        assert!(matches!(
            mp_index_2d(&MetaplecticElement::identity(&r2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn index_2d_agrees_with_index() {
        let mut s = Sampler::new(23);
        let r = std1();
        for _ in 0..300 {
            let e = s.metaplectic_nondegenerate(1, &r);
            assert_eq!(mp_index_2d(&e).unwrap(), mp_index(&e).unwrap().m);
        }
    }

    #[test]
    fn square_identity() {
        let mut s = Sampler::new(24);
        for n in 1..=3 {
            let r = s.polarization(n);
            for _ in 0..20 {
                let e = s.metaplectic_nondegenerate(n, &r);
                let a = a_matrix(e.g(), &r).unwrap();
                let m = complexify(&a).map(|x| x * I) + CMat::identity(2 * n, 2 * n) * c(0.5, 0.0);
                let lhs = e.z() * e.z() * det_c(&m);
                let rhs = c((-1f64).powi(n as i32) / e.g().det_one_minus(), 0.0);
                assert!(rel_diff(lhs, rhs) < 1e-9);
            }
        }
    }

    #[test]
    fn sl2_examples() {
        let e = sl2_parametrization(0.0, 0.0, 0.0).unwrap();
        assert!(max_abs_r(&(e.g().matrix() - RMat::identity(2, 2))) < 1e-15);
        assert!((e.z() - 1.0).norm() < 1e-15);
        let e = sl2_parametrization(PI / 2.0, 0.0, 0.0).unwrap();
        assert!(max_abs_r(&(e.g().matrix() + RMat::identity(2, 2))) < 1e-15);
        assert!((e.z() - I).norm() < 1e-15);
        let e = sl2_parametrization(PI, 0.0, 0.0).unwrap();
        assert!(max_abs_r(&(e.g().matrix() - RMat::identity(2, 2))) < 1e-14);
        assert!((e.z() + 1.0).norm() < 1e-15);
        assert!(matches!(sl2_parametrization(0.0, 0.8, 0.8), Err(Error::OutsideDisc { .. })));
    }

    #[test]
    fn sl2_chart_is_valid_everywhere() {
        let mut s = Sampler::new(25);
        for _ in 0..200 {
            let r = s.uniform(0.0, 0.95);
            let phi = s.angle();
            let e = sl2_parametrization(s.angle(), r * phi.cos(), r * phi.sin()).unwrap();
            if e.g().det_one_minus().abs() > 1e-6 {
                assert_eq!(mp_index_2d(&e).unwrap(), mp_index(&e).unwrap().m);
            }
        }
    }

    #[test]
    fn product_examples() {
        let e = el(Symplectomorphism::minus_identity(1), I);
        let p = mp_product(&e, &e).unwrap();
        assert_eq!(mp_index(&p).unwrap().m, 2);
        let p = mp_product(&e, &MetaplecticElement::identity(&std1())).unwrap();
        assert!(matches!(mp_index(&p), Err(Error::FixedPointDegenerate { .. })));
    }

    #[test]
    fn product_index_additive() {
        let mut s = Sampler::new(26);
        for (n1, n2) in [(1, 1), (1, 2), (2, 1)] {
            let (r1, r2) = (s.polarization(n1), s.polarization(n2));
            for _ in 0..20 {
                let e1 = s.metaplectic_nondegenerate(n1, &r1);
                let e2 = s.metaplectic_nondegenerate(n2, &r2);
                let m = mp_index(&mp_product(&e1, &e2).unwrap()).unwrap().m;
                assert_eq!(m, (mp_index(&e1).unwrap().m + mp_index(&e2).unwrap().m) % 4);
            }
        }
    }

    #[test]
    fn unitary_embed_examples() {
        let h = CMat::from_element(1, 1, c(-1.0, 0.0));
        let e = unitary_embed(&h, I, &std1()).unwrap();
        assert!(max_abs_r(&(e.g().matrix() + RMat::identity(2, 2))) < 1e-14);
        assert!((e.z() + I).norm() < 1e-15);
        assert_eq!(mp_index(&e).unwrap().m, 3);
        let bad = CMat::from_element(1, 1, c(2.0, 0.0));
        assert!(matches!(unitary_embed(&bad, c(2f64.sqrt(), 0.0), &std1()), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn holomorphic_index_lemma() {
        for theta in [0.3, 1.0, 2.5, 4.0, 6.0] {
            let h = CMat::from_element(1, 1, C64::from_polar(1.0, theta));
            let e = unitary_embed(&h, C64::from_polar(1.0, theta / 2.0), &std1()).unwrap();
            let a = a_matrix(e.g(), &std1()).unwrap();
            let v = det_sqrt_half_plus_ia(&a, &std1()).unwrap();
            let expected = c(1.0, 0.0) / (c(1.0, 0.0) - C64::from_polar(1.0, -theta));
            assert!(rel_diff(v, expected) < 1e-12);
        }
    }

    #[test]
    fn unitary_embed_is_a_morphism() {
        let mut s = Sampler::new(27);
        for n in 1..=2 {
            let r = s.polarization(n);
            for _ in 0..10 {
                let (h1, h2) = (s.unitary(n), s.unitary(n));
                let (z1, z2) = (det_c(&h1).sqrt(), det_c(&h2).sqrt());
                let e1 = unitary_embed(&h1, z1, &r).unwrap();
                let e2 = unitary_embed(&h2, z2, &r).unwrap();
                let prod = mp_compose(&e2, &e1).unwrap();
                let direct = unitary_embed(&(&h2 * &h1), z2 * z1, &r).unwrap();
                assert!(rel_diff(direct.z(), prod.z()) < 1e-9);
                assert!(max_abs_r(&(direct.g().matrix() - prod.g().matrix())) < 1e-9);
            }
        }
    }

    #[test]
    fn metalinear_examples() {
        let e = metalinear_embed(&RMat::from_element(1, 1, -1.0), I, &std1()).unwrap();
        assert!(max_abs_r(&(e.g().matrix() + RMat::identity(2, 2))) < 1e-14);
        assert!((e.z() - I).norm() < 1e-14);
        assert_eq!(mp_index(&e).unwrap().m, 1);
        let e = metalinear_embed(&RMat::from_element(1, 1, 2.0), c(2f64.sqrt(), 0.0), &std1()).unwrap();
        assert!(max_abs_r(&(e.g().matrix() - squeeze().matrix())) < 1e-14);
        assert!((e.z() - 2.0 / 5f64.sqrt()).norm() < 1e-14);
        assert_eq!(mp_index(&e).unwrap().m, 0);
        assert!(matches!(
            metalinear_embed(&RMat::zeros(1, 1), c(0.0, 0.0), &std1()),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn metalinear_restricts_to_h() {
        let mut s = Sampler::new(28);
        for n in 1..=3 {
            let r = s.polarization(n);
            for _ in 0..10 {
                let h = RMat::from_fn(n, n, |_, _| s.normal());
                let z = c(det_r(&h), 0.0).sqrt();
                let e = metalinear_embed(&h, z, &r).unwrap();
                let block = e.g().matrix().view((0, 0), (2 * n, n)).into_owned();
                let mut expected = RMat::zeros(2 * n, n);
                expected.view_mut((0, 0), (n, n)).copy_from(&h);
                assert!(max_abs_r(&(block - expected)) < 1e-9 * max_abs_r(&h).max(1.0));
                let ratio = e.z() / z;
                assert!(ratio.re > 0.0 && ratio.im.abs() < 1e-9 * ratio.re);
            }
        }
    }

    #[test]
    fn cover_examples() {
        let id = MetaplecticElement::identity(&std1());
        let x = mp_p_from_cover(&id, c(1.0, 0.0), 1).unwrap();
        assert!((x.z() - 1.0).norm() < 1e-15);
        let x = mp_p_from_cover(&id.opposite(), c(-1.0, 0.0), 1).unwrap();
        assert!((x.z() - 1.0).norm() < 1e-15);
        let e = el(Symplectomorphism::minus_identity(1), I);
        let x = mp_p_from_cover(&e, I, 2).unwrap();
        assert!((x.z() + 1.0).norm() < 1e-15);
        assert_eq!(mp_p_index(&x).unwrap().m, 2);
        assert!(matches!(
            mp_p_from_cover(&e, c(0.5, 0.0), 2),
            Err(Error::NotRootOfUnity { .. })
        ));
    }

    #[test]
    fn generalized_index_shift() {
        let e = el(Symplectomorphism::minus_identity(1), I);
        let base = mp_p_index(&mp_p_from_cover(&e, c(1.0, 0.0), 3).unwrap()).unwrap();
        assert_eq!(base.modulus, 12);
        let shifted = mp_p_index(&mp_p_from_cover(&e, C64::from_polar(1.0, PI / 3.0), 3).unwrap()).unwrap();
        assert_eq!(shifted.m, (base.m + 2) % 12);
        let mut s = Sampler::new(29);
        for _ in 0..50 {
            let e = s.metaplectic_nondegenerate(2, &PositivePolarization::standard(2));
            let one = mp_p_index(&GeneralizedMetaplecticElement::from_metaplectic(&e)).unwrap();
            assert_eq!(one.m, mp_index(&e).unwrap().m);
        }
    }
}
