//! Seeded random generators for polarizations, symplectic maps and
//! metaplectic elements. Used by the self-test, the test suites and benches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, det_r, CMat, RMat, C64};
use crate::metaplectic::{mp_lift, MetaplecticElement};
use crate::symplectic::{PositivePolarization, Symplectomorphism};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn angle(&mut self) -> f64 {
        self.uniform(0.0, std::f64::consts::TAU)
    }

    pub fn bit(&mut self) -> bool {
        self.rng.gen()
    }

    pub fn complex_normal(&mut self) -> C64 {
        c(self.normal(), self.normal()) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// `X + iY` with `X` symmetric Gaussian and `Y = A A^T / n + 0.3 I`.
    pub fn siegel(&mut self, n: usize) -> CMat {
        let mut x = RMat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = 0.6 * self.normal();
                x[(i, j)] = v;
                x[(j, i)] = v;
            }
        }
        let a = RMat::from_fn(n, n, |_, _| self.normal());
        let y = (&a * a.transpose()) / n as f64 + RMat::identity(n, n) * 0.3;
        CMat::from_fn(n, n, |i, j| c(x[(i, j)], y[(i, j)]))
    }

    pub fn polarization(&mut self, n: usize) -> PositivePolarization {
        let z = self.siegel(n);
        PositivePolarization::from_siegel(z).expect("sampled Siegel point is valid")
    }

    /// Haar-like unitary from the QR factorization of a complex Gaussian matrix.
    pub fn unitary(&mut self, n: usize) -> CMat {
        let g = CMat::from_fn(n, n, |_, _| self.complex_normal());
        let qr = g.qr();
        let (q, r) = qr.unpack();
        let phases = CMat::from_diagonal(&r.diagonal().map(|d| {
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                c(1.0, 0.0)
            }
        }));
        q * phases
    }

    /// Invertible gauge `U_1 diag(r e^{i phi}) U_2` with moderate condition number.
    pub fn gauge(&mut self, n: usize) -> CMat {
        let u1 = self.unitary(n);
        let u2 = self.unitary(n);
        let d = CMat::from_fn(n, n, |i, j| {
            if i == j {
                C64::from_polar((0.5 * self.normal()).exp(), self.angle())
            } else {
                c(0.0, 0.0)
            }
        });
        u1 * d * u2
    }

    /// `iota(U_1) diag(s, 1/s) iota(U_2)` for the standard complex structure.
    pub fn symplectic(&mut self, n: usize) -> Symplectomorphism {
        let u1 = standard_unitary_rep(&self.unitary(n));
        let u2 = standard_unitary_rep(&self.unitary(n));
        let mut d = RMat::zeros(2 * n, 2 * n);
        for k in 0..n {
            let s = (0.8 * self.normal()).exp();
            d[(k, k)] = s;
            d[(n + k, n + k)] = 1.0 / s;
        }
        Symplectomorphism::new(u1 * d * u2).expect("product of symplectic matrices")
    }

    /// A random symplectic map with `|det(I - g)| >= 1e-3`.
    pub fn symplectic_nondegenerate(&mut self, n: usize) -> Symplectomorphism {
        loop {
            let g = self.symplectic(n);
            if det_r(&(RMat::identity(2 * n, 2 * n) - g.matrix())).abs() >= 1e-3 {
                return g;
            }
        }
    }

    /// One of the two lifts of a random symplectic map, chosen uniformly.
    pub fn metaplectic(&mut self, n: usize, reference: &PositivePolarization) -> MetaplecticElement {
        let g = self.symplectic(n);
        self.pick_lift(&g, reference)
    }

    pub fn metaplectic_nondegenerate(
        &mut self,
        n: usize,
        reference: &PositivePolarization,
    ) -> MetaplecticElement {
        let g = self.symplectic_nondegenerate(n);
        self.pick_lift(&g, reference)
    }

    fn pick_lift(&mut self, g: &Symplectomorphism, reference: &PositivePolarization) -> MetaplecticElement {
        let (a, b) = mp_lift(g, reference).expect("lift of a symplectic map");
        if self.bit() {
            a
        } else {
            b
        }
    }
}

/// Real `2n x 2n` form `[[Re h, -Im h], [Im h, Re h]]` of a complex matrix acting
/// on `q + ip`; symplectic when `h` is unitary.
pub fn standard_unitary_rep(h: &CMat) -> RMat {
    let n = h.nrows();
    let mut g = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = h[(i, j)];
            g[(i, j)] = v.re;
            g[(i, n + j)] = -v.im;
            g[(n + i, j)] = v.im;
            g[(n + i, n + j)] = v.re;
        }
    }
    g
}
