//! Exact Gaussian integrals of polynomials by completing the square and the
//! Isserlis/Wick recursion.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_c, real_part, solve_c, symmetric_max_eigenvalue, CMat, C64};

/// A polynomial `sum c_gamma x^gamma` stored as (exponent, coefficient) terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub terms: Vec<(Vec<u32>, C64)>,
}

impl Polynomial {
    pub fn constant(vars: usize, value: C64) -> Self {
        Polynomial { terms: vec![(vec![0; vars], value)] }
    }

    pub fn monomial(exponents: Vec<u32>) -> Self {
        Polynomial { terms: vec![(exponents, C64::new(1.0, 0.0))] }
    }

    pub fn evaluate(&self, x: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(e, coef)| {
                e.iter()
                    .zip(x)
                    .fold(*coef, |acc, (&k, &xi)| acc * xi.powu(k))
            })
            .sum()
    }
}

/// `int exp(1/2 x^T K x) dx = (2 pi)^{d/2} prod lambda^{-1/2}` over the
/// eigenvalues of `-K` (all in the right half-plane when `Re K < 0`).
pub fn gaussian_normalizer(k: &CMat) -> C64 {
    let d = k.nrows();
    let minus_k = -k;
    let prod: C64 = eigenvalues_c(&minus_k)
        .into_iter()
        .map(|l| C64::new(1.0, 0.0) / l.sqrt())
        .product();
    prod * (2.0 * PI).powf(d as f64 / 2.0)
}

pub(crate) fn check_convergent(k: &CMat) -> Result<()> {
    let re = real_part(k);
    let re = (&re + re.transpose()) * 0.5;
    if symmetric_max_eigenvalue(&re) >= 0.0 {
        return Err(Error::DivergentIntegral);
    }
    Ok(())
}

/// Moments `E[y^gamma]` of the complex Gaussian weight with covariance `cov`
/// and mean `mean`, optionally divided by `sqrt(gamma!)`.
///
/// The recursion peels off the first nonzero index `i`:
/// `E(gamma) = m_i E(gamma - e_i) + sum_j cov_ij (gamma - e_i)_j E(gamma - e_i - e_j)`.
pub struct MomentTable {
    cov: CMat,
    mean: Vec<C64>,
    scaled: bool,
    memo: HashMap<Vec<u32>, C64>,
}

impl MomentTable {
    pub fn new(cov: CMat, mean: Vec<C64>, scaled: bool) -> Self {
        MomentTable { cov, mean, scaled, memo: HashMap::new() }
    }

    pub fn centered(cov: CMat, scaled: bool) -> Self {
        let d = cov.nrows();
        Self::new(cov, vec![C64::new(0.0, 0.0); d], scaled)
    }

    pub fn get(&mut self, gamma: &[u32]) -> C64 {
        let total: u32 = gamma.iter().sum();
        if total == 0 {
            return C64::new(1.0, 0.0);
        }
        let centered = self.mean.iter().all(|m| *m == C64::new(0.0, 0.0));
        if centered && total % 2 == 1 {
            return C64::new(0.0, 0.0);
        }
        if let Some(v) = self.memo.get(gamma) {
            return *v;
        }
        let i = gamma.iter().position(|&g| g > 0).expect("nonzero multi-index");
        let gi = gamma[i] as f64;
        let mut reduced = gamma.to_vec();
        reduced[i] -= 1;
        let mut value = C64::new(0.0, 0.0);
        if self.mean[i] != C64::new(0.0, 0.0) {
            let w = if self.scaled { 1.0 / gi.sqrt() } else { 1.0 };
            value += self.mean[i] * w * self.get(&reduced);
        }
        for j in 0..gamma.len() {
            let rj = reduced[j];
            if rj == 0 {
                continue;
            }
            let cij = self.cov[(i, j)];
            if cij == C64::new(0.0, 0.0) {
                continue;
            }
            let w = if self.scaled { (rj as f64 / gi).sqrt() } else { rj as f64 };
            let mut next = reduced.clone();
            next[j] -= 1;
            value += cij * w * self.get(&next);
        }
        self.memo.insert(gamma.to_vec(), value);
        value
    }
}

/// `int poly(x) exp(1/2 x^T K x + l^T x) dx` over `R^d`, exactly.
pub fn gaussian_moment_integral(k: &CMat, l: &[C64], poly: &Polynomial) -> Result<C64> {
    let d = k.nrows();
    if k.ncols() != d || l.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: l.len() });
    }
    if let Some((e, _)) = poly.terms.iter().find(|(e, _)| e.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: e.len() });
    }
    check_convergent(k)?;
    let minus_k = -k;
    let sigma = solve_c(&minus_k, &CMat::identity(d, d)).ok_or(Error::DivergentIntegral)?;
    let lv = CMat::from_column_slice(d, 1, l);
    let mu = &sigma * &lv;
    let shift = (lv.transpose() * &mu)[(0, 0)] * 0.5;
    let mut table = MomentTable::new(sigma, mu.iter().copied().collect(), false);
    let expectation: C64 = poly.terms.iter().map(|(e, c)| c * table.get(e)).sum();
    Ok(gaussian_normalizer(k) * shift.exp() * expectation)
}
