//! Gaussian sections `p(w) exp(1/2 x^T C x)` of the prequantum line over a
//! symplectic vector space, and truncated monomial bases of Bargmann spaces.

use crate::bargmann::moments::{gaussian_normalizer, MomentTable};
use crate::error::{Error, Result};
use crate::linalg::{
    complexify, conj, hermitian_inv_sqrt, max_abs_c, real_part, standard_omega,
    symmetric_max_eigenvalue, vstack_c, CMat, C64, I,
};
use crate::symplectic::PositivePolarization;

/// `p(w) exp(1/2 x^T C x)` with holomorphic coordinates `w = B x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSection {
    c: CMat,
    poly: Vec<(Vec<u32>, C64)>,
    b: CMat,
}

impl GaussianSection {
    pub fn c(&self) -> &CMat {
        &self.c
    }

    pub fn poly(&self) -> &[(Vec<u32>, C64)] {
        &self.poly
    }

    pub fn coordinate_map(&self) -> &CMat {
        &self.b
    }

    pub fn evaluate(&self, x: &[f64]) -> C64 {
        let xv = CMat::from_iterator(x.len(), 1, x.iter().map(|&t| C64::new(t, 0.0)));
        let w = &self.b * &xv;
        let p: C64 = self
            .poly
            .iter()
            .map(|(e, coef)| e.iter().enumerate().fold(*coef, |acc, (k, &d)| acc * w[(k, 0)].powu(d)))
            .sum();
        p * ((xv.transpose() * &self.c * &xv)[(0, 0)] * 0.5).exp()
    }

    /// `max |C v - (i/2) Omega v|` over the columns `v` of `conj(F)`.
    pub fn holomorphy_residual(&self, p: &PositivePolarization) -> f64 {
        let n = p.half_dim();
        let omega = complexify(&standard_omega(n));
        let v = conj(p.frame());
        max_abs_c(&(&self.c * &v - (omega * &v) * (I * 0.5)))
    }

    /// Largest eigenvalue of the symmetric part of `Re C`.
    pub fn real_max_eigenvalue(&self) -> f64 {
        let re = real_part(&self.c);
        symmetric_max_eigenvalue(&((&re + re.transpose()) * 0.5))
    }
}

/// `C = -1/2 Omega j`, constant polynomial, coordinates dual to the orthonormal frame.
pub fn vacuum_section(p: &PositivePolarization) -> GaussianSection {
    GaussianSection {
        c: vacuum_exponent(p),
        poly: vec![(vec![0; p.half_dim()], C64::new(1.0, 0.0))],
        b: p.orthonormal_coordinate_map(),
    }
}

pub(crate) fn vacuum_exponent(p: &PositivePolarization) -> CMat {
    complexify(&(standard_omega(p.half_dim()) * p.complex_structure() * -0.5))
}

/// Multi-indices of total degree `<= max_degree` in `n` variables, by degree
/// and lexicographically inside a degree.
pub fn monomials(n: usize, max_degree: u32) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, left: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
        if left == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=remaining {
            prefix.push(k);
            fill(prefix, left - 1, remaining - k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for d in 0..=max_degree {
        fill(&mut Vec::new(), n, d, &mut out);
    }
    out
}

pub(crate) fn factorial_sqrt(alpha: &[u32]) -> f64 {
    alpha
        .iter()
        .map(|&k| (1..=k).map(|t| t as f64).product::<f64>())
        .product::<f64>()
        .sqrt()
}

/// Truncated basis `w^alpha / sqrt(alpha!) * vacuum`, `|alpha| <= N`, with its Gram matrix.
#[derive(Debug, Clone)]
pub struct FockBasis {
    polarization: PositivePolarization,
    truncation: u32,
    monomials: Vec<Vec<u32>>,
    gram: CMat,
    vacuum: GaussianSection,
}

impl FockBasis {
    pub fn polarization(&self) -> &PositivePolarization {
        &self.polarization
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Gram matrix of the sections (without the half-form factor).
    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    pub fn sections(&self) -> Vec<GaussianSection> {
        self.monomials
            .iter()
            .map(|a| GaussianSection {
                c: self.vacuum.c.clone(),
                poly: vec![(a.clone(), C64::new(1.0 / factorial_sqrt(a), 0.0))],
                b: self.vacuum.b.clone(),
            })
            .collect()
    }

    /// Ratio of extreme eigenvalues of the Gram matrix.
    pub fn condition_number(&self) -> f64 {
        let h = (&self.gram + self.gram.adjoint()) * C64::new(0.5, 0.0);
        let ev = h.symmetric_eigenvalues();
        let max = ev.iter().cloned().fold(f64::MIN, f64::max);
        let min = ev.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    /// Largest Gram entry between monomials of different total degree.
    pub fn cross_degree_max(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (i, a) in self.monomials.iter().enumerate() {
            for (j, b) in self.monomials.iter().enumerate() {
                if a.iter().sum::<u32>() != b.iter().sum::<u32>() {
                    m = m.max(self.gram[(i, j)].norm());
                }
            }
        }
        m
    }

    /// `G^{-1/2}` computed block by block on equal-degree blocks; its columns
    /// give an orthonormal basis.
    pub fn orthonormalizer(&self) -> Result<CMat> {
        let len = self.len();
        let mut out = CMat::zeros(len, len);
        let mut start = 0;
        while start < len {
            let deg: u32 = self.monomials[start].iter().sum();
            let mut end = start;
            while end < len && self.monomials[end].iter().sum::<u32>() == deg {
                end += 1;
            }
            let size = end - start;
            let block = self.gram.view((start, start), (size, size)).into_owned();
            let block = (&block + block.adjoint()) * C64::new(0.5, 0.0);
            let inv = hermitian_inv_sqrt(&block).ok_or_else(|| {
                Error::Internal(format!("Gram block of degree {deg} is not positive definite"))
            })?;
            out.view_mut((start, start), (size, size)).copy_from(&inv);
            start = end;
        }
        Ok(out)
    }
}

/// Monomial basis up to total degree `truncation` and its Gram matrix by exact
/// Gaussian moments.
pub fn basis(p: &PositivePolarization, truncation: u32) -> Result<FockBasis> {
    let n = p.half_dim();
    let vacuum = vacuum_section(p);
    let c = vacuum.c.clone();
    let k = &c + conj(&c);
    let minus_k = -&k;
    let sigma = minus_k
        .try_inverse()
        .ok_or_else(|| Error::Internal("vacuum exponent is singular".into()))?;
    let l = vstack_c(&conj(&vacuum.b), &vacuum.b);
    let gamma = &l * sigma * l.transpose();
    let z0 = gaussian_normalizer(&k);
    let mut table = MomentTable::centered(gamma, true);
    let monomials = monomials(n, truncation);
    let len = monomials.len();
    let mut gram = CMat::zeros(len, len);
    let mut idx = vec![0u32; 2 * n];
    for (i, a) in monomials.iter().enumerate() {
        for (j, b) in monomials.iter().enumerate() {
            idx[..n].copy_from_slice(a);
            idx[n..].copy_from_slice(b);
            gram[(i, j)] = z0 * table.get(&idx);
        }
    }
    Ok(FockBasis { polarization: p.clone(), truncation, monomials, gram, vacuum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use std::f64::consts::PI;
    use crate::sample::Sampler;

    #[test]
    fn standard_vacuum() {
        let p = PositivePolarization::standard(1);
        let v = vacuum_section(&p);
        assert!(max_abs_c(&(v.c() + CMat::identity(2, 2) * c(0.5, 0.0))) < 1e-15);
        let x = [0.7f64, -1.2];
        let expected = (-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp();
        assert!((v.evaluate(&x) - expected).norm() < 1e-15);
    }

    #[test]
    fn vacuum_invariants_random() {
        let mut s = Sampler::new(41);
        for n in 1..=3 {
            for _ in 0..10 {
                let p = s.polarization(n).regauged(&s.gauge(n)).unwrap();
                let v = vacuum_section(&p);
                assert!(v.holomorphy_residual(&p) < 1e-12 * max_abs_c(v.c()).max(1.0));
                assert!(v.real_max_eigenvalue() < 0.0);
                let b = v.coordinate_map();
                let f = p.orthonormal_frame();
                assert!(max_abs_c(&(b * &f - CMat::identity(n, n))) < 1e-10);
                assert!(max_abs_c(&(b * conj(&f))) < 1e-10);
            }
        }
    }

    #[test]
    fn monomial_order() {
        let m = monomials(2, 2);
        assert_eq!(m, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(monomials(1, 3).len(), 4);
    }

    #[test]
    fn basis_gram_properties() {
        let p = PositivePolarization::standard(1);
        let b = basis(&p, 0).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b.gram()[(0, 0)].re > 0.0 && b.gram()[(0, 0)].im.abs() < 1e-14);
        // |vacuum|^2 = int exp(-x^T G x / 2) = (2 pi)^n since det G = 1
        assert!((b.gram()[(0, 0)].re - 2.0 * PI).abs() < 1e-12);

        let b = basis(&p, 10).unwrap();
        let diag = CMat::from_diagonal(&b.gram().diagonal());
        assert!(max_abs_c(&(b.gram() - diag)) < 1e-12);

        let mut s = Sampler::new(42);
        let p = s.polarization(2);
        let b = basis(&p, 8).unwrap();
        let cond = b.condition_number();
        assert!(cond.is_finite() && cond >= 1.0);
        assert!(b.cross_degree_max() < 1e-10 * max_abs_c(b.gram()));
        let o = b.orthonormalizer().unwrap();
        let id = o.adjoint() * b.gram() * &o;
        assert!(max_abs_c(&(id - CMat::identity(b.len(), b.len()))) < 1e-9);
    }
}
