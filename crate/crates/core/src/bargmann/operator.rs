//! Matrices of `U(g, Psi)` in orthonormalized truncated bases, kernel traces
//! and regularized Fock traces.

use std::f64::consts::PI;

use crate::bargmann::moments::{check_convergent, gaussian_normalizer, MomentTable};
use crate::bargmann::phase::phase_form;
use crate::bargmann::section::{basis, vacuum_exponent};
use crate::error::{Error, Result};
use crate::halfform::{dmor_compose, DMorphism};
use crate::linalg::{block_diag_c, conj, max_abs_c, CMat, C64};
use crate::metaplectic::DEGENERACY_THRESHOLD;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: CMat,
    truncation: u32,
    monomials: Vec<Vec<u32>>,
}

impl OperatorMatrix {
    /// `<b_i, U a_j>` for the orthonormalized target (rows) and source (columns) bases.
    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// Multi-indices labelling rows and columns.
    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    pub fn degree(&self, index: usize) -> u32 {
        self.monomials[index].iter().sum()
    }

    /// Number of basis elements of total degree `<= max_degree`.
    pub fn block_len(&self, max_degree: u32) -> usize {
        self.monomials.iter().take_while(|a| a.iter().sum::<u32>() <= max_degree).count()
    }

    pub fn block(&self, max_degree: u32) -> CMat {
        let k = self.block_len(max_degree);
        self.entries.view((0, 0), (k, k)).into_owned()
    }

    fn with_entries(&self, entries: CMat) -> OperatorMatrix {
        OperatorMatrix { entries, truncation: self.truncation, monomials: self.monomials.clone() }
    }

    /// Product of truncated matrices.
    pub fn compose(&self, first: &OperatorMatrix) -> OperatorMatrix {
        self.with_entries(&self.entries * &first.entries)
    }
}

/// The matrix of `U(g, Psi)` up to total degree `truncation`, by exact double
/// Gaussian integrals over `S_b + S_a`.
pub fn operator_matrix(m: &DMorphism, truncation: u32) -> Result<OperatorMatrix> {
    let n = m.half_dim();
    let (pa, pb) = (m.source(), m.target());
    let pf = phase_form(m.g(), pa, pb)?;
    let k = pf.q() + block_diag_c(&conj(&vacuum_exponent(pb)), &vacuum_exponent(pa));
    check_convergent(&k).map_err(|_| {
        Error::Internal("kernel of U(g, Psi) is not square integrable".into())
    })?;
    let sigma = (-&k)
        .try_inverse()
        .ok_or_else(|| Error::Internal("singular kernel exponent".into()))?;
    let l = block_diag_c(&conj(&pb.orthonormal_coordinate_map()), &pa.orthonormal_coordinate_map());
    let gamma = &l * sigma * l.transpose();
    let prefactor = gaussian_normalizer(&k)
        * m.psi()
        * (pb.half_form_norm() / pa.half_form_norm())
        * (2.0 * PI).powi(-(n as i32));

    let basis_a = basis(pa, truncation)?;
    let basis_b = basis(pb, truncation)?;
    let monomials = basis_a.monomials().to_vec();
    let len = monomials.len();
    let mut table = MomentTable::centered(gamma, true);
    let mut raw = CMat::zeros(len, len);
    let mut idx = vec![0u32; 2 * n];
    for (i, alpha) in monomials.iter().enumerate() {
        for (j, beta) in monomials.iter().enumerate() {
            idx[..n].copy_from_slice(alpha);
            idx[n..].copy_from_slice(beta);
            raw[(i, j)] = prefactor * table.get(&idx);
        }
    }
    let entries = basis_b.orthonormalizer()? * raw * basis_a.orthonormalizer()?;
    Ok(OperatorMatrix { entries, truncation, monomials })
}

/// `max |(U^* U - I)_{ij}|` over basis elements of degree `<= max_degree`.
pub fn unitarity_defect(u: &OperatorMatrix, max_degree: u32) -> f64 {
    let k = u.block_len(max_degree);
    let cols = u.entries.columns(0, k).into_owned();
    let gram = cols.adjoint() * cols;
    max_abs_c(&(gram - CMat::identity(k, k)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctorReport {
    pub truncation: u32,
    pub block_degree: u32,
    /// `max |U(m2 o m1) - U(m2) U(m1)|` on the low-degree block.
    pub deviation: f64,
}

/// Compares `U(m2 o m1)` with `U(m2) U(m1)` on basis elements of degree `<= block_degree`.
pub fn functor_check(m1: &DMorphism, m2: &DMorphism, truncation: u32, block_degree: u32) -> Result<FunctorReport> {
    let composite = dmor_compose(m2, m1)?;
    let u = operator_matrix(&composite, truncation)?;
    let u1 = operator_matrix(m1, truncation)?;
    let u2 = operator_matrix(m2, truncation)?;
    let product = u2.compose(&u1);
    let k = u.block_len(block_degree);
    let diff = u.entries.view((0, 0), (k, k)) - product.entries.view((0, 0), (k, k));
    Ok(FunctorReport { truncation, block_degree, deviation: max_abs_c(&diff.into_owned()) })
}

/// `(2 pi)^{-n} psi int exp(Phi(x, x)) dx` for an endomorphism `(g, psi)` of `(S, E)`.
pub fn kernel_trace(m: &DMorphism) -> Result<C64> {
    if !m.source().same_frame(m.target(), 1e-9) {
        return Err(Error::MismatchedEndpoints("the kernel trace needs source = target".into()));
    }
    let det = m.g().det_one_minus();
    if det.abs() <= DEGENERACY_THRESHOLD {
        return Err(Error::FixedPointDegenerate { det });
    }
    let n = m.half_dim();
    let pf = phase_form(m.g(), m.source(), m.target())?;
    let qd = pf.diagonal_form();
    check_convergent(&qd).map_err(|_| Error::FixedPointDegenerate { det })?;
    Ok(m.psi() * gaussian_normalizer(&qd) * (2.0 * PI).powi(-(n as i32)))
}

/// Partial sums `S_N = sum_{|alpha| <= N} U_{alpha alpha} r^{|alpha|}` and their
/// Wynn-epsilon extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelTrace {
    pub radius: f64,
    pub partial_sums: Vec<C64>,
    pub plain: C64,
    pub accelerated: C64,
}

pub fn abel_trace(u: &OperatorMatrix, radius: f64) -> AbelTrace {
    let mut sums = vec![C64::new(0.0, 0.0); u.truncation as usize + 1];
    for i in 0..u.monomials.len() {
        let d = u.degree(i) as usize;
        sums[d] += u.entries[(i, i)] * radius.powi(d as i32);
    }
    for d in 1..sums.len() {
        sums[d] = sums[d] + sums[d - 1];
    }
    let plain = *sums.last().expect("at least degree zero");
    let accelerated = wynn_epsilon(&sums);
    AbelTrace { radius, partial_sums: sums, plain, accelerated }
}

/// Wynn's epsilon algorithm on a sequence of partial sums; returns the last
/// entry of the highest even column.
pub fn wynn_epsilon(seq: &[C64]) -> C64 {
    if seq.is_empty() {
        return C64::new(0.0, 0.0);
    }
    let mut prev: Vec<C64> = vec![C64::new(0.0, 0.0); seq.len() + 1];
    let mut cur: Vec<C64> = seq.to_vec();
    let mut best = *seq.last().unwrap();
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for k in 0..cur.len() - 1 {
            let diff = cur[k + 1] - cur[k];
            if diff.norm() == 0.0 {
                return best;
            }
            next.push(prev[k + 1] + C64::new(1.0, 0.0) / diff);
        }
        prev = cur;
        cur = next;
        column += 1;
        if column % 2 == 0 {
            best = *cur.last().unwrap();
        }
    }
    best
}
