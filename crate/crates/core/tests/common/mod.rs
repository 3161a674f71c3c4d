//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use mpwb_core::linalg::{c, conj, eigenvalues_c, CMat, RMat, C64};
use mpwb_core::{PositivePolarization, Symplectomorphism};

/// `sqrt det((Z_x - conj Z_y) / 2i)` as a product of principal roots of eigenvalues.
pub fn sqrt_det_w(zx: &CMat, zy: &CMat) -> C64 {
    let w = (zx - conj(zy)).map(|v| v / c(0.0, 2.0));
    eigenvalues_c(&w).into_iter().map(|l| l.sqrt()).product()
}

/// Closed form of the square root of `zeta` on Siegel points.
pub fn zeta_sqrt_closed_form(a: &PositivePolarization, b: &PositivePolarization, cc: &PositivePolarization) -> C64 {
    let (za, zb, zc) = (a.siegel(), b.siegel(), cc.siegel());
    sqrt_det_w(za, zb) * sqrt_det_w(zb, zc) / (sqrt_det_w(za, zc) * sqrt_det_w(zb, zb))
}

/// `m` with `w = i^m |w|`, for `w` on the coordinate axes.
pub fn quarter_turns(w: C64) -> u32 {
    let k = (w.arg() / (PI / 2.0)).round() as i64;
    k.rem_euclid(4) as u32
}

/// `i^m / |det(I - g)|^{1/2}`.
pub fn fixed_point_term(m: u32, g: &Symplectomorphism) -> C64 {
    let d = g.det_one_minus().abs();
    c(0.0, 1.0).powu(m) / d.sqrt()
}

pub fn squeeze(s: f64) -> Symplectomorphism {
    Symplectomorphism::new(RMat::from_row_slice(2, 2, &[s, 0.0, 0.0, 1.0 / s])).unwrap()
}

/// `squeeze(s) R(phi) squeeze(s)^{-1}`.
pub fn elliptic(s: f64, phi: f64) -> Symplectomorphism {
    let sq = squeeze(s);
    sq.compose(&Symplectomorphism::rotation(1, phi))
        .unwrap()
        .compose(&sq.inverse())
        .unwrap()
}

pub fn siegel_1d(z: C64) -> PositivePolarization {
    PositivePolarization::from_siegel(CMat::from_element(1, 1, z)).unwrap()
}
