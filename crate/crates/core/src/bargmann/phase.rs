//! The quadratic phase `Phi(x, y) = 1/2 (x, y)^T Q (x, y)` of the kernel of
//! `U(g, Psi)`: it vanishes on the graph of `g` and `exp(Phi)` is holomorphic
//! for `E_b` in `x` and anti-holomorphic for `E_a` in `y`.

use crate::error::{Error, Result};
use crate::linalg::{
    complexify, conj, max_abs_c, real_part, standard_omega, symmetric_max_eigenvalue, CMat, C64,
    I,
};
use crate::symplectic::{PositivePolarization, Symplectomorphism};

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseForm {
    q: CMat,
    residual: f64,
    rank: usize,
    unknowns: usize,
}

impl PhaseForm {
    /// The symmetric `4n x 4n` matrix, target variables `x` first.
    pub fn q(&self) -> &CMat {
        &self.q
    }

    /// Residual of the combined linear system at the solution.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    pub fn half_dim(&self) -> usize {
        self.q.nrows() / 4
    }

    /// `Phi(x, y)`.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> C64 {
        let v: Vec<C64> = x.iter().chain(y).map(|&t| C64::new(t, 0.0)).collect();
        let v = CMat::from_column_slice(v.len(), 1, &v);
        (v.transpose() * &self.q * &v)[(0, 0)] * 0.5
    }

    /// Matrix of `x -> Phi(x, x)`: the sum of the four blocks.
    pub fn diagonal_form(&self) -> CMat {
        let m = 2 * self.half_dim();
        let b = |r, c| self.q.view((r, c), (m, m)).into_owned();
        b(0, 0) + b(0, m) + b(m, 0) + b(m, m)
    }

    /// Largest eigenvalue of `Re` of [`Self::diagonal_form`].
    pub fn diagonal_real_max_eigenvalue(&self) -> f64 {
        let re = real_part(&self.diagonal_form());
        symmetric_max_eigenvalue(&((&re + re.transpose()) * 0.5))
    }

    /// Largest violation of the graph-vanishing and holomorphy conditions,
    /// recomputed from scratch for `(g, P_a, P_b)`.
    pub fn constraint_defect(
        &self,
        g: &Symplectomorphism,
        pa: &PositivePolarization,
        pb: &PositivePolarization,
    ) -> f64 {
        let sys = System::new(g, pa, pb);
        sys.evaluate(&self.q, true).iter().fold(0.0, |a, v| a.max(v.norm()))
    }
}

struct System {
    n: usize,
    graph: CMat,
    omega: CMat,
    vb: CMat,
    wa: CMat,
}

impl System {
    fn new(g: &Symplectomorphism, pa: &PositivePolarization, pb: &PositivePolarization) -> Self {
        let n = pa.half_dim();
        let mut graph = CMat::zeros(4 * n, 2 * n);
        graph.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&complexify(g.matrix()));
        graph.view_mut((2 * n, 0), (2 * n, 2 * n)).fill_with_identity();
        System {
            n,
            graph,
            omega: complexify(&standard_omega(n)),
            vb: conj(pb.frame()),
            wa: pa.frame().clone(),
        }
    }

    /// Constraint values; `affine` includes the inhomogeneous terms.
    fn evaluate(&self, q: &CMat, affine: bool) -> Vec<C64> {
        let m = 2 * self.n;
        let mut out = Vec::new();
        let r = self.graph.transpose() * q * &self.graph;
        for i in 0..m {
            for k in i..m {
                out.push(r[(i, k)]);
            }
        }
        let qxx = q.view((0, 0), (m, m));
        let qxy = q.view((0, m), (m, m));
        let qyy = q.view((m, m), (m, m));
        let half_i = I * 0.5;
        let mut a = qxx * &self.vb;
        if affine {
            a -= (&self.omega * &self.vb) * half_i;
        }
        out.extend(a.iter());
        out.extend((qxy.transpose() * &self.vb).iter());
        let mut b = qyy * &self.wa;
        if affine {
            b += (&self.omega * &self.wa) * half_i;
        }
        out.extend(b.iter());
        out.extend((qxy * &self.wa).iter());
        out
    }
}

fn unknown_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(dim * (dim + 1) / 2);
    for i in 0..dim {
        for k in i..dim {
            v.push((i, k));
        }
    }
    v
}

/// Solves the combined linear system for `Q` and verifies it has full rank.
pub fn phase_form(
    g: &Symplectomorphism,
    pa: &PositivePolarization,
    pb: &PositivePolarization,
) -> Result<PhaseForm> {
    let n = pa.half_dim();
    for found in [pb.half_dim(), g.half_dim()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found });
        }
    }
    let dim = 4 * n;
    let sys = System::new(g, pa, pb);
    let pairs = unknown_pairs(dim);
    let rhs: Vec<C64> = sys.evaluate(&CMat::zeros(dim, dim), true).into_iter().map(|v| -v).collect();
    let rows = rhs.len();
    let mut a = CMat::zeros(rows, pairs.len());
    for (col, &(i, k)) in pairs.iter().enumerate() {
        let mut e = CMat::zeros(dim, dim);
        e[(i, k)] = C64::new(1.0, 0.0);
        e[(k, i)] = C64::new(1.0, 0.0);
        for (row, v) in sys.evaluate(&e, false).into_iter().enumerate() {
            a[(row, col)] = v;
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = 1e-10 * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if rank < pairs.len() {
        return Err(Error::RankDeficient { rank, unknowns: pairs.len() });
    }
    let b = CMat::from_column_slice(rows, 1, &rhs);
    let sol = svd
        .solve(&b, cutoff)
        .map_err(|e| Error::Internal(format!("least-squares solve failed: {e}")))?;
    let mut q = CMat::zeros(dim, dim);
    for (t, &(i, k)) in pairs.iter().enumerate() {
        q[(i, k)] = sol[(t, 0)];
        q[(k, i)] = sol[(t, 0)];
    }
    let residual = max_abs_c(&(&a * &sol - &b));
    Ok(PhaseForm { q, residual, rank, unknowns: pairs.len() })
}
