//! Canonical-line transfer maps, the cocycle `zeta`, its continuous square
//! root and the half-form categories `D(S)` and `D`.
//!
//! Every half-form line is trivialized so that the squared basis vector maps
//! to the dual top form of the stored polarization frame. Morphisms then
//! become complex scalars, and a morphism `E_a -> E_b` squares to
//! `d(E_a, E_b) = det M` where `F_b = F_a M + conj(F_b) N`.

use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::linalg::{conj, det_c, hstack_c, rel_diff, solve_c, vstack_c, CMat, C64};
use crate::symplectic::{PositivePolarization, Symplectomorphism, Tolerance};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// The matrix `M` of the projection `E_b -> E_a` along `conj(E_b)` in the
/// stored frames: `F_b = F_a M + conj(F_b) N`.
pub fn transfer_matrix(pa: &PositivePolarization, pb: &PositivePolarization) -> Result<CMat> {
    check_dims(pa, pb)?;
    let n = pa.half_dim();
    let system = hstack_c(pa.frame(), &conj(pb.frame()));
    let sol = solve_c(&system, pb.frame()).ok_or_else(|| {
        Error::InvalidPolarization("E_a and conj(E_b) are not complementary".into())
    })?;
    Ok(sol.rows(0, n).into_owned())
}

/// `d(E_a, E_b) = det M`, the scalar of the canonical-line map in the frame gauges.
pub fn transfer_det(pa: &PositivePolarization, pb: &PositivePolarization) -> Result<C64> {
    Ok(det_c(&transfer_matrix(pa, pb)?))
}

/// `zeta(E_a, E_b, E_c) = d(a, c) / (d(a, b) d(b, c))`; independent of the frames.
pub fn zeta(
    pa: &PositivePolarization,
    pb: &PositivePolarization,
    pc: &PositivePolarization,
) -> Result<C64> {
    let dac = transfer_det(pa, pc)?;
    let dab = transfer_det(pa, pb)?;
    let dbc = transfer_det(pb, pc)?;
    Ok(dac / (dab * dbc))
}

/// Step control for continuous square-root tracking along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOptions {
    /// Number of equal steps tried before any subdivision.
    pub base_steps: usize,
    /// Largest accepted phase of a successive ratio (always below `pi/2`).
    pub max_phase_step: f64,
    /// Number of halvings of the base step allowed before giving up.
    pub max_halvings: u32,
}

impl Default for BranchOptions {
    fn default() -> Self {
        BranchOptions { base_steps: 16, max_phase_step: FRAC_PI_4, max_halvings: 20 }
    }
}

impl BranchOptions {
    pub fn with_steps(base_steps: usize) -> Self {
        BranchOptions { base_steps: base_steps.max(1), ..Self::default() }
    }
}

/// Continuous square root of `f` on `[0, 1]` starting from `+1` at `f(0) = 1`.
///
/// Successive ratios `f(t') / f(t)` must stay within `max_phase_step` of the
/// positive axis; the step is halved until they do.
pub(crate) fn track_sqrt<F>(f: F, opts: &BranchOptions) -> Result<C64>
where
    F: Fn(f64) -> Result<C64>,
{
    let max_phase = opts.max_phase_step.min(std::f64::consts::FRAC_PI_2 * 0.999);
    let h_max = 1.0 / opts.base_steps.max(1) as f64;
    let h_min = h_max / f64::powi(2.0, opts.max_halvings as i32);
    let mut prev = f(0.0)?;
    let mut acc = ONE;
    if rel_diff(prev, ONE) > 1e-8 {
        acc = prev.sqrt();
    }
    let mut t = 0.0;
    let mut h = h_max;
    while t < 1.0 {
        let t_next = if t + h >= 1.0 - 1e-15 { 1.0 } else { t + h };
        let cur = f(t_next)?;
        let ratio = cur / prev;
        if ratio.re > 0.0 && ratio.arg().abs() <= max_phase {
            acc *= ratio.sqrt();
            prev = cur;
            t = t_next;
            h = (2.0 * h).min(h_max);
        } else {
            h *= 0.5;
            if h < h_min {
                return Err(Error::SubdivisionLimit { min_step: h });
            }
        }
    }
    Ok(acc)
}

fn normalized_frame(z: &CMat) -> CMat {
    let n = z.nrows();
    vstack_c(z, &CMat::identity(n, n))
}

fn transfer_det_siegel(za: &CMat, zb: &CMat) -> Result<C64> {
    let n = za.nrows();
    let fa = normalized_frame(za);
    let fb = normalized_frame(zb);
    let system = hstack_c(&fa, &conj(&fb));
    let sol = solve_c(&system, &fb).ok_or_else(|| {
        Error::InvalidPolarization("E_a and conj(E_b) are not complementary".into())
    })?;
    Ok(det_c(&sol.rows(0, n).into_owned()))
}

fn zeta_siegel(za: &CMat, zb: &CMat, zc: &CMat) -> Result<C64> {
    Ok(transfer_det_siegel(za, zc)?
        / (transfer_det_siegel(za, zb)? * transfer_det_siegel(zb, zc)?))
}

/// The square root of `zeta` that is continuous on triples of positive
/// polarizations and equals `1` on the diagonal.
///
/// The branch is followed along `t -> (Z_a, Z_a + t (Z_b - Z_a), Z_a + t (Z_c - Z_a))`
/// in the (convex) Siegel domain.
pub fn zeta_sqrt(
    pa: &PositivePolarization,
    pb: &PositivePolarization,
    pc: &PositivePolarization,
) -> Result<C64> {
    zeta_sqrt_with(pa, pb, pc, &BranchOptions::default())
}

pub fn zeta_sqrt_with(
    pa: &PositivePolarization,
    pb: &PositivePolarization,
    pc: &PositivePolarization,
    opts: &BranchOptions,
) -> Result<C64> {
    check_dims(pa, pb)?;
    check_dims(pa, pc)?;
    let za = pa.siegel();
    let db = pb.siegel() - za;
    let dc = pc.siegel() - za;
    track_sqrt(
        |t| {
            let zb = za + db.map(|v| v * t);
            let zc = za + dc.map(|v| v * t);
            zeta_siegel(za, &zb, &zc)
        },
        opts,
    )
}

/// Square root of `d(E_a, E_b)` continued along the Siegel segment from
/// `E_a`, starting at `+1`, then carried to the stored frames.
fn distinguished_sqrt(
    pa: &PositivePolarization,
    pb: &PositivePolarization,
    opts: &BranchOptions,
) -> Result<C64> {
    check_dims(pa, pb)?;
    let za = pa.siegel();
    let dz = pb.siegel() - za;
    let normalized = track_sqrt(|t| transfer_det_siegel(za, &(za + dz.map(|v| v * t))), opts)?;
    // F = [Z; I] G with G the lower block, so d(F_a, F_b) = d_norm det G_b / det G_a.
    let n = pa.half_dim();
    let ga = det_c(&pa.frame().rows(n, n).into_owned());
    let gb = det_c(&pb.frame().rows(n, n).into_owned());
    Ok(normalized * (gb / ga).sqrt())
}

/// A morphism of `D(S)` between half-form lines of `source` and `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfFormMorphism {
    source: PositivePolarization,
    target: PositivePolarization,
    psi: C64,
}

impl HalfFormMorphism {
    pub fn new(source: PositivePolarization, target: PositivePolarization, psi: C64) -> Result<Self> {
        Self::with_tolerance(source, target, psi, Tolerance::default())
    }

    pub fn with_tolerance(
        source: PositivePolarization,
        target: PositivePolarization,
        psi: C64,
        tol: Tolerance,
    ) -> Result<Self> {
        let d = transfer_det(&source, &target)?;
        if rel_diff(psi * psi, d) > tol.0 {
            return Err(Error::InvalidElement(format!(
                "psi^2 = {} does not match d(source, target) = {}",
                psi * psi,
                d
            )));
        }
        Ok(HalfFormMorphism { source, target, psi })
    }

    pub fn identity(p: &PositivePolarization) -> Self {
        HalfFormMorphism { source: p.clone(), target: p.clone(), psi: ONE }
    }

    pub fn source(&self) -> &PositivePolarization {
        &self.source
    }

    pub fn target(&self) -> &PositivePolarization {
        &self.target
    }

    pub fn psi(&self) -> C64 {
        self.psi
    }

    /// The same map with the opposite sign.
    pub fn opposite(&self) -> Self {
        HalfFormMorphism { psi: -self.psi, ..self.clone() }
    }

    /// Adjoint for the Hermitian structures induced on the half-form lines.
    pub fn adjoint(&self) -> Self {
        HalfFormMorphism {
            source: self.target.clone(),
            target: self.source.clone(),
            psi: adjoint_scalar(self.psi, &self.source, &self.target),
        }
    }
}

/// Adjoint of `psi: delta_a -> delta_b` where `|s|^2 = det(H)^{-1/2}` for the
/// trivializing vector of a frame with Gram matrix `H`.
fn adjoint_scalar(psi: C64, a: &PositivePolarization, b: &PositivePolarization) -> C64 {
    psi.conj() * (a.gram_det() / b.gram_det()).sqrt()
}

/// The two half-form morphisms `E_a -> E_b`; the first is continuous along
/// the Siegel segment from `E_a` starting at `+1`.
pub fn hf_lift(
    pa: &PositivePolarization,
    pb: &PositivePolarization,
) -> Result<(HalfFormMorphism, HalfFormMorphism)> {
    let psi = distinguished_sqrt(pa, pb, &BranchOptions::default())?;
    let m = HalfFormMorphism { source: pa.clone(), target: pb.clone(), psi };
    let other = m.opposite();
    Ok((m, other))
}

/// `m2 o_{1/2} m1 = zeta^{1/2}(E_a, E_b, E_c) m2 m1`.
pub fn hf_compose(m2: &HalfFormMorphism, m1: &HalfFormMorphism) -> Result<HalfFormMorphism> {
    if !m1.target.same_frame(&m2.source, 1e-9) {
        return Err(Error::MismatchedEndpoints(
            "target of the first morphism is not the source of the second".into(),
        ));
    }
    let zs = zeta_sqrt(&m1.source, &m1.target, &m2.target)?;
    Ok(HalfFormMorphism {
        source: m1.source.clone(),
        target: m2.target.clone(),
        psi: zs * m2.psi * m1.psi,
    })
}

/// A morphism `(g, Psi)` of the category `D` for spaces of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DMorphism {
    g: Symplectomorphism,
    source: PositivePolarization,
    target: PositivePolarization,
    psi: C64,
}

impl DMorphism {
    /// Checks `psi^2 = d(g E_a, E_b)` with `g E_a` carrying the frame `g F_a`.
    pub fn new(
        g: Symplectomorphism,
        source: PositivePolarization,
        target: PositivePolarization,
        psi: C64,
    ) -> Result<Self> {
        Self::with_tolerance(g, source, target, psi, Tolerance::default())
    }

    pub fn with_tolerance(
        g: Symplectomorphism,
        source: PositivePolarization,
        target: PositivePolarization,
        psi: C64,
        tol: Tolerance,
    ) -> Result<Self> {
        check_dims(&source, &target)?;
        let pushed = source.pushforward(&g)?;
        let d = transfer_det(&pushed, &target)?;
        if rel_diff(psi * psi, d) > tol.0 {
            return Err(Error::InvalidElement(format!(
                "psi^2 = {} does not match d(gE_a, E_b) = {}",
                psi * psi,
                d
            )));
        }
        Ok(DMorphism { g, source, target, psi })
    }

    pub(crate) fn new_unchecked(
        g: Symplectomorphism,
        source: PositivePolarization,
        target: PositivePolarization,
        psi: C64,
    ) -> Self {
        DMorphism { g, source, target, psi }
    }

    pub fn identity(p: &PositivePolarization) -> Self {
        DMorphism {
            g: Symplectomorphism::identity(p.half_dim()),
            source: p.clone(),
            target: p.clone(),
            psi: ONE,
        }
    }

    /// Both lifts of `g: (S, E_a) -> (S, E_b)`; the first is the distinguished
    /// one of [`hf_lift`] applied to `(g E_a, E_b)`.
    pub fn lift(
        g: &Symplectomorphism,
        source: &PositivePolarization,
        target: &PositivePolarization,
    ) -> Result<(DMorphism, DMorphism)> {
        check_dims(source, target)?;
        let pushed = source.pushforward(g)?;
        let psi = distinguished_sqrt(&pushed, target, &BranchOptions::default())?;
        let m = DMorphism {
            g: g.clone(),
            source: source.clone(),
            target: target.clone(),
            psi,
        };
        let other = m.opposite();
        Ok((m, other))
    }

    pub fn g(&self) -> &Symplectomorphism {
        &self.g
    }

    pub fn source(&self) -> &PositivePolarization {
        &self.source
    }

    pub fn target(&self) -> &PositivePolarization {
        &self.target
    }

    pub fn psi(&self) -> C64 {
        self.psi
    }

    pub fn half_dim(&self) -> usize {
        self.source.half_dim()
    }

    pub fn opposite(&self) -> Self {
        DMorphism { psi: -self.psi, ..self.clone() }
    }

    /// The inverse morphism `(g^{-1}, Psi^*)`.
    pub fn adjoint(&self) -> Self {
        DMorphism {
            g: self.g.inverse(),
            source: self.target.clone(),
            target: self.source.clone(),
            psi: adjoint_scalar(self.psi, &self.source, &self.target),
        }
    }
}

/// `(g2, Psi2) o (g1, Psi1) = (g2 g1, zeta^{1/2}(g2 g1 E_a, g2 E_b, E_c) Psi2 Psi1)`.
pub fn dmor_compose(m2: &DMorphism, m1: &DMorphism) -> Result<DMorphism> {
    dmor_compose_with(m2, m1, &BranchOptions::default())
}

pub fn dmor_compose_with(m2: &DMorphism, m1: &DMorphism, opts: &BranchOptions) -> Result<DMorphism> {
    if !m1.target.same_frame(&m2.source, 1e-9) {
        return Err(Error::MismatchedEndpoints(
            "target of the first morphism is not the source of the second".into(),
        ));
    }
    let g = m2.g.compose(&m1.g)?;
    let a = m1.source.pushforward(&g)?;
    let b = m1.target.pushforward(&m2.g)?;
    let zs = zeta_sqrt_with(&a, &b, &m2.target, opts)?;
    Ok(DMorphism {
        g,
        source: m1.source.clone(),
        target: m2.target.clone(),
        psi: zs * m2.psi * m1.psi,
    })
}

fn check_dims(a: &PositivePolarization, b: &PositivePolarization) -> Result<()> {
    if a.half_dim() != b.half_dim() {
        return Err(Error::DimensionMismatch { expected: a.half_dim(), found: b.half_dim() });
    }
    Ok(())
}
