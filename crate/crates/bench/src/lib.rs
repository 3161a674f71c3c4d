//! Fixed inputs for the benchmarks, drawn once from a seeded sampler.

use mpwb_core::sample::Sampler;
use mpwb_core::{DMorphism, MetaplecticElement, PositivePolarization, Symplectomorphism};

pub const SEED: u64 = 0x5eed;

pub fn elements(n: usize, count: usize) -> Vec<MetaplecticElement> {
    let mut s = Sampler::new(SEED);
    (0..count)
        .map(|_| {
            let r = s.polarization(n);
            s.metaplectic_nondegenerate(n, &r)
        })
        .collect()
}

pub fn triple(n: usize) -> [PositivePolarization; 3] {
    let mut s = Sampler::new(SEED);
    [s.polarization(n), s.polarization(n), s.polarization(n)]
}

/// A rotation between two polarizations close to the standard one.
pub fn rotation_morphism() -> DMorphism {
    let near = |re: f64, im: f64| {
        PositivePolarization::from_siegel(mpwb_core::CMat::from_element(1, 1, mpwb_core::C64::new(re, im)))
            .expect("Siegel point")
    };
    DMorphism::lift(&Symplectomorphism::rotation(1, 0.9), &near(0.0, 1.0), &near(0.1, 1.2))
        .expect("lift")
        .0
}
