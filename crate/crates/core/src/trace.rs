//! Fixed-point trace formulas evaluated on finite fixed-point data, the
//! holomorphic Lefschetz sum and the rotation of the sphere as an exact model.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c, det_c, inverse_c, max_abs_c, CMat, C64};
use crate::metaplectic::{
    a_matrix, det_sqrt_half_plus_ia, mp_p_index, projection_matrix, unitary_embed,
    GeneralizedMetaplecticElement, DEGENERACY_THRESHOLD,
};
use crate::symplectic::{PositivePolarization, Symplectomorphism};

/// Linearized data at one fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointDatum {
    g: Symplectomorphism,
    z: C64,
    u: C64,
    reference: PositivePolarization,
    h: Option<CMat>,
    mp: Option<GeneralizedMetaplecticElement>,
}

impl FixedPointDatum {
    /// `g` acts on the model space with the standard polarization; `|u| = 1`.
    pub fn new(g: Symplectomorphism, z: C64, u: C64) -> Result<Self> {
        if (u.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidElement(format!("|u| = {} instead of 1", u.norm())));
        }
        let reference = PositivePolarization::standard(g.half_dim());
        Ok(FixedPointDatum { g, z, u, reference, h: None, mp: None })
    }

    /// Replaces the model polarization; clears `h`, which is frame dependent.
    pub fn with_reference(mut self, reference: PositivePolarization) -> Result<Self> {
        if reference.half_dim() != self.g.half_dim() {
            return Err(Error::DimensionMismatch { expected: self.g.half_dim(), found: reference.half_dim() });
        }
        self.reference = reference;
        self.h = None;
        Ok(self)
    }

    /// Attaches the holomorphic tangent map; it must be the matrix of
    /// `pi g : E -> E` in the frame of the model polarization.
    pub fn with_h(mut self, h: CMat) -> Result<Self> {
        let expected = projection_matrix(&self.g, &self.reference)?;
        if h.shape() != expected.shape() {
            return Err(Error::DimensionMismatch { expected: expected.nrows(), found: h.nrows() });
        }
        let defect = max_abs_c(&(&h - &expected));
        if defect > 1e-9 * max_abs_c(&expected).max(1.0) {
            return Err(Error::InvalidElement(format!(
                "h differs from pi g|E by {defect}"
            )));
        }
        self.h = Some(h);
        Ok(self)
    }

    /// Attaches the (generalized) metaplectic element used by the half-form formula.
    pub fn with_mp(mut self, mp: GeneralizedMetaplecticElement) -> Result<Self> {
        let defect = crate::linalg::max_abs_r(&(mp.g().matrix() - self.g.matrix()));
        if defect > 1e-9 * crate::linalg::max_abs_r(self.g.matrix()).max(1.0) {
            return Err(Error::InvalidElement("metaplectic element lies over a different g".into()));
        }
        self.mp = Some(mp);
        Ok(self)
    }

    pub fn g(&self) -> &Symplectomorphism {
        &self.g
    }

    pub fn z(&self) -> C64 {
        self.z
    }

    pub fn u(&self) -> C64 {
        self.u
    }

    pub fn reference(&self) -> &PositivePolarization {
        &self.reference
    }

    pub fn h(&self) -> Option<&CMat> {
        self.h.as_ref()
    }

    pub fn mp(&self) -> Option<&GeneralizedMetaplecticElement> {
        self.mp.as_ref()
    }

    fn transversal_det(&self, index: usize) -> Result<f64> {
        let det = self.g.det_one_minus();
        if det.abs() <= DEGENERACY_THRESHOLD {
            return Err(Error::TransversalityViolation { index, det });
        }
        Ok(det)
    }
}

/// A tensor power `k` and the fixed-point data of a map.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceQuery {
    pub k: u32,
    pub data: Vec<FixedPointDatum>,
}

impl TraceQuery {
    pub fn new(k: u32, data: Vec<FixedPointDatum>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if data.is_empty() {
            return Err(Error::InvalidArgument("no fixed-point data".into()));
        }
        Ok(TraceQuery { k, data })
    }
}

/// `sum_x z_x det^{1/2}(1/2 + iA_x) u_x^k`.
pub fn trace_estimate(q: &TraceQuery) -> Result<C64> {
    let mut total = c(0.0, 0.0);
    for (index, d) in q.data.iter().enumerate() {
        d.transversal_det(index)?;
        let a = a_matrix(&d.g, &d.reference)
            .map_err(|_| Error::TransversalityViolation { index, det: d.g.det_one_minus() })?;
        let detsqrt = det_sqrt_half_plus_ia(&a, &d.reference)?;
        total += d.z * detsqrt * d.u.powu(q.k);
    }
    Ok(total)
}

/// `sum_x e^{i pi m_p(g_x, z_x) / p'} u_x^k / |det(I - g_x)|^{1/2}`.
pub fn trace_estimate_halfform(q: &TraceQuery, p: u32) -> Result<C64> {
    let mut total = c(0.0, 0.0);
    for (index, d) in q.data.iter().enumerate() {
        let det = d.transversal_det(index)?;
        let mp = d.mp.as_ref().ok_or(Error::MissingIndex { index })?;
        if mp.p() != p {
            return Err(Error::InvalidArgument(format!(
                "datum {index} carries an element of Mp_{} but p = {p}",
                mp.p()
            )));
        }
        let idx = mp_p_index(mp)?;
        let phase = C64::from_polar(1.0, PI * idx.m as f64 / mp.p_prime() as f64);
        total += phase * d.u.powu(q.k) / det.abs().sqrt();
    }
    Ok(total)
}

/// `sum_x z_x u_x^k / det(I - h_x^{-1})`.
pub fn lefschetz_number(q: &TraceQuery) -> Result<C64> {
    let mut total = c(0.0, 0.0);
    for (index, d) in q.data.iter().enumerate() {
        let h = d.h.as_ref().ok_or_else(|| {
            Error::InvalidArgument(format!("datum {index} has no holomorphic tangent map"))
        })?;
        let n = h.nrows();
        let h_inv = inverse_c(h).ok_or(Error::DegenerateHolomorphicTangent { index })?;
        let det = det_c(&(CMat::identity(n, n) - h_inv));
        if det.norm() <= DEGENERACY_THRESHOLD {
            return Err(Error::DegenerateHolomorphicTangent { index });
        }
        total += d.z * d.u.powu(q.k) / det;
    }
    Ok(total)
}

/// Fixed-point data of the rotation by `theta` of the sphere at its two poles.
///
/// At the pole where the holomorphic tangent map is `h = e^{+-i theta}` the
/// half-form fiber acts by `z = e^{-+i theta/2}` (dual square root of the
/// tangent action on the degree-one line) and the prequantum fiber by
/// `u = e^{+-i theta/2}`; `g = iota(h)` and the metaplectic element is
/// `(iota(h), z)`.
pub fn sphere_data(theta: f64) -> Result<Vec<FixedPointDatum>> {
    let s = (theta / 2.0).sin();
    if s.abs() < 1e-12 {
        return Err(Error::DegenerateAngle { theta });
    }
    let reference = PositivePolarization::standard(1);
    let mut data = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let h = CMat::from_element(1, 1, C64::from_polar(1.0, sign * theta));
        let half = C64::from_polar(1.0, sign * theta / 2.0);
        let e = unitary_embed(&h, half, &reference)?;
        let datum = FixedPointDatum::new(e.g().clone(), e.z(), half)?
            .with_h(h)?
            .with_mp(GeneralizedMetaplecticElement::from_metaplectic(&e))?;
        data.push(datum);
    }
    Ok(data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereModelRow {
    pub k: u32,
    /// `sin(k theta / 2) / sin(theta / 2)`.
    pub exact: f64,
    /// Half-form trace formula on the two-pole data.
    pub formula: C64,
    pub lefschetz: C64,
    /// `|exact - formula|`.
    pub diff: f64,
}

/// The character of the `k`-dimensional irreducible representation against
/// the fixed-point formulas.
pub fn sphere_model(theta: f64, k: u32) -> Result<SphereModelRow> {
    let data = sphere_data(theta)?;
    sphere_row(theta, k, data)
}

fn sphere_row(theta: f64, k: u32, data: Vec<FixedPointDatum>) -> Result<SphereModelRow> {
    let q = TraceQuery::new(k, data)?;
    let exact = (k as f64 * theta / 2.0).sin() / (theta / 2.0).sin();
    let formula = trace_estimate_halfform(&q, 1)?;
    let lefschetz = lefschetz_number(&q)?;
    Ok(SphereModelRow { k, exact, formula, lefschetz, diff: (formula - exact).norm() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphereSweep {
    pub theta: f64,
    pub rows: Vec<SphereModelRow>,
    /// Smallest `C` with `diff <= C / k` on every row.
    pub fitted_c: f64,
}

pub fn sphere_sweep(theta: f64, k_max: u32) -> Result<SphereSweep> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k-max must be at least 1".into()));
    }
    let data = sphere_data(theta)?;
    let rows = (1..=k_max)
        .map(|k| sphere_row(theta, k, data.clone()))
        .collect::<Result<Vec<_>>>()?;
    let fitted_c = rows.iter().map(|r| r.k as f64 * r.diff).fold(0.0, f64::max);
    Ok(SphereSweep { theta, rows, fitted_c })
}
