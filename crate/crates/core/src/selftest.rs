//! A fast randomized run of the library invariants, used by `mpwb selftest`.

use serde::Serialize;

use crate::bargmann::{kernel_trace, operator_matrix, unitarity_defect};
use crate::error::Result;
use crate::halfform::{zeta, zeta_sqrt, zeta_sqrt_with, BranchOptions, DMorphism};
use crate::linalg::{c, complexify, det_c, max_abs_c, max_abs_r, rel_diff, CMat, RMat, C64, I};
use crate::metaplectic::{
    a_matrix, det_sqrt_half_plus_ia, metalinear_embed, mp_compose, mp_index, mp_index_2d,
    mp_product, unitary_embed, MetaplecticElement,
};
use crate::sample::Sampler;
use crate::symplectic::{PositivePolarization, Symplectomorphism};
use crate::trace::sphere_sweep;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    /// Worst observed error (or number of mismatches for integer checks).
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

fn check<F>(name: &'static str, cases: usize, tolerance: f64, f: F) -> CheckResult
where
    F: FnOnce() -> Result<f64>,
{
    match f() {
        Ok(worst) => CheckResult {
            name,
            cases,
            worst,
            tolerance,
            passed: worst <= tolerance,
            error: None,
        },
        Err(e) => CheckResult {
            name,
            cases,
            worst: f64::INFINITY,
            tolerance,
            passed: false,
            error: Some(e.to_string()),
        },
    }
}

fn half_plus_ia(a: &RMat) -> CMat {
    let n2 = a.nrows();
    CMat::identity(n2, n2) * c(0.5, 0.0) + complexify(a) * I
}

/// Runs every check with `cases` random samples per check.
pub fn run(seed: u64, cases: usize) -> SelftestReport {
    let mut s = Sampler::new(seed);
    let mut checks = Vec::new();

    checks.push(check("polarization-structure", cases, 1e-9, || {
        let mut worst: f64 = 0.0;
        for t in 0..cases {
            let n = 1 + t % 3;
            let p = s.polarization(n).regauged(&s.gauge(n))?;
            let j = p.complex_structure();
            worst = worst.max(max_abs_r(&(&j * &j + RMat::identity(2 * n, 2 * n))));
            let g = p.metric();
            worst = worst.max(max_abs_r(&(&g - g.transpose())));
            if g.clone().cholesky().is_none() {
                worst = f64::INFINITY;
            }
            let pi = p.projector();
            worst = worst.max(max_abs_c(&(&pi * &pi - &pi)));
            worst = worst.max(max_abs_c(&(&pi * p.frame() - p.frame())) / max_abs_c(p.frame()));
        }
        Ok(worst)
    }));

    checks.push(check("zeta-cocycle-and-gauge", cases, 1e-8, || {
        let mut worst: f64 = 0.0;
        for t in 0..cases {
            let n = 1 + t % 2;
            let ps: Vec<_> = (0..4).map(|_| s.polarization(n)).collect();
            let lhs = zeta(&ps[1], &ps[2], &ps[3])? * zeta(&ps[0], &ps[1], &ps[3])?;
            let rhs = zeta(&ps[0], &ps[2], &ps[3])? * zeta(&ps[0], &ps[1], &ps[2])?;
            worst = worst.max(rel_diff(lhs, rhs));
            let regauged: Vec<_> = ps[..3]
                .iter()
                .map(|p| p.regauged(&s.gauge(n)))
                .collect::<Result<_>>()?;
            let z0 = zeta(&ps[0], &ps[1], &ps[2])?;
            worst = worst.max(rel_diff(zeta(&regauged[0], &regauged[1], &regauged[2])?, z0));
        }
        Ok(worst)
    }));

    checks.push(check("zeta-sqrt-branch", cases, 1e-8, || {
        let mut worst: f64 = 0.0;
        for t in 0..cases {
            let n = 1 + t % 3;
            let (a, b, cc) = (s.polarization(n), s.polarization(n), s.polarization(n));
            let v = zeta_sqrt(&a, &b, &cc)?;
            worst = worst.max(rel_diff(v * v, zeta(&a, &b, &cc)?));
            let fine = zeta_sqrt_with(&a, &b, &cc, &BranchOptions::with_steps(32))?;
            worst = worst.max(rel_diff(v, fine));
            worst = worst.max((zeta_sqrt(&a, &a, &b)? - 1.0).norm());
            worst = worst.max((zeta_sqrt(&a, &b, &b)? - 1.0).norm());
        }
        Ok(worst)
    }));

    checks.push(check("mp-group-law", cases, 1e-8, || {
        let mut worst: f64 = 0.0;
        for t in 0..cases {
            let n = 1 + t % 2;
            let r = s.polarization(n);
            let (a, b, cc) = (s.metaplectic(n, &r), s.metaplectic(n, &r), s.metaplectic(n, &r));
            let left = mp_compose(&mp_compose(&cc, &b)?, &a)?;
            let right = mp_compose(&cc, &mp_compose(&b, &a)?)?;
            worst = worst.max(rel_diff(left.z(), right.z()));
        }
        let e = MetaplecticElement::new(Symplectomorphism::minus_identity(1), I, PositivePolarization::standard(1))?;
        let sq = mp_compose(&e, &e)?;
        worst = worst.max((sq.z() + 1.0).norm());
        Ok(worst)
    }));

    checks.push(check("index-square-identity", cases, 1e-9, || {
        let mut worst: f64 = 0.0;
        for t in 0..cases {
            let n = 1 + t % 3;
            let r = s.polarization(n);
            let e = s.metaplectic_nondegenerate(n, &r);
            let a = a_matrix(e.g(), &r)?;
            let lhs = e.z() * e.z() * det_c(&half_plus_ia(&a));
            let rhs = c((-1f64).powi(n as i32) / e.g().det_one_minus(), 0.0);
            worst = worst.max(rel_diff(lhs, rhs));
            worst = worst.max(mp_index(&e)?.residual);
        }
        Ok(worst)
    }));

    checks.push(check("index-2d-formula", cases, 0.0, || {
        let r = PositivePolarization::standard(1);
        let mut mismatches = 0;
        for _ in 0..cases {
            let e = s.metaplectic_nondegenerate(1, &r);
            if mp_index_2d(&e)? != mp_index(&e)?.m {
                mismatches += 1;
            }
        }
        Ok(mismatches as f64)
    }));

    checks.push(check("index-product-additivity", cases, 0.0, || {
        let mut mismatches = 0;
        for t in 0..cases {
            let (n1, n2) = (1 + t % 2, 1 + (t / 2) % 2);
            let (r1, r2) = (s.polarization(n1), s.polarization(n2));
            let e1 = s.metaplectic_nondegenerate(n1, &r1);
            let e2 = s.metaplectic_nondegenerate(n2, &r2);
            let m = mp_index(&mp_product(&e1, &e2)?)?.m;
            if m != (mp_index(&e1)?.m + mp_index(&e2)?.m) % 4 {
                mismatches += 1;
            }
        }
        Ok(mismatches as f64)
    }));

    checks.push(check("holomorphic-index-lemma", cases, 1e-9, || {
        let mut worst: f64 = 0.0;
        for t in 0..cases {
            let n = 1 + t % 3;
            let r = s.polarization(n);
            let h = s.unitary(n);
            let e = unitary_embed(&h, det_c(&h).sqrt(), &r)?;
            if e.g().det_one_minus().abs() < 1e-6 {
                continue;
            }
            let v = det_sqrt_half_plus_ia(&a_matrix(e.g(), &r)?, &r)?;
            let h_inv = h.adjoint();
            let expected = c(1.0, 0.0) / det_c(&(CMat::identity(n, n) - h_inv));
            worst = worst.max(rel_diff(v, expected));
        }
        Ok(worst)
    }));

    checks.push(check("metalinear-positive-ratio", cases, 1e-9, || {
        let mut worst: f64 = 0.0;
        for t in 0..cases {
            let n = 1 + t % 3;
            let r = s.polarization(n);
            let h = RMat::from_fn(n, n, |_, _| s.normal());
            let z = c(crate::linalg::det_r(&h), 0.0).sqrt();
            let e = metalinear_embed(&h, z, &r)?;
            let ratio = e.z() / z;
            if ratio.re <= 0.0 {
                worst = f64::INFINITY;
            }
            worst = worst.max(ratio.im.abs() / ratio.norm());
        }
        Ok(worst)
    }));

    checks.push(check("kernel-trace-index", cases, 1e-8, || {
        let mut worst: f64 = 0.0;
        for t in 0..cases {
            let n = 1 + t % 2;
            let r = s.polarization(n);
            let e = s.metaplectic_nondegenerate(n, &r);
            let m = mp_index(&e)?.m;
            let expected = I.powu(m) / e.g().det_one_minus().abs().sqrt();
            worst = worst.max(rel_diff(kernel_trace(&e.to_dmorphism())?, expected));
        }
        Ok(worst)
    }));

    checks.push(check("bargmann-identity-and-unitarity", 2, 1e-6, || {
        let p = s.polarization(1);
        let u = operator_matrix(&DMorphism::identity(&p), 12)?;
        let k = u.monomials().len();
        let mut worst = max_abs_c(&(u.entries() - CMat::identity(k, k)));
        let mut near = || {
            let z = c(s.uniform(-0.1, 0.1), s.uniform(0.8, 1.2));
            PositivePolarization::from_siegel(CMat::from_element(1, 1, z))
        };
        let (p, q) = (near()?, near()?);
        let g = Symplectomorphism::rotation(1, s.angle());
        let (m, _) = DMorphism::lift(&g, &p, &q)?;
        worst = worst.max(unitarity_defect(&operator_matrix(&m, 24)?, 8));
        Ok(worst)
    }));

    checks.push(check("sphere-model", 3, 1e-9, || {
        let mut worst: f64 = 0.0;
        for theta in [std::f64::consts::FRAC_PI_2, 2.0 * std::f64::consts::PI / 3.0, 1.0] {
            let sweep = sphere_sweep(theta, 40)?;
            worst = worst.max(sweep.fitted_c);
            for row in &sweep.rows {
                worst = worst.max((row.lefschetz - C64::new(row.exact, 0.0)).norm());
            }
        }
        Ok(worst)
    }));

    let passed = checks.iter().all(|c| c.passed);
    SelftestReport { seed, checks, passed }
}
