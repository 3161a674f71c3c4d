//! Numerical workbench for the linear symplectic category with half-forms.
//!
//! Modules, bottom-up: [`symplectic`] (polarizations and their views),
//! [`halfform`] (transfer maps, the cocycle `zeta` and its tracked square
//! root), [`metaplectic`] (`Mp(S, E)`, the index `m`, `Mp_p`), [`bargmann`]
//! (quantization by exact Gaussian moments) and [`trace`] (fixed-point
//! formulas). [`json`] holds the `mpwb/1` encodings used by the CLI.

pub mod bargmann;
pub mod error;
pub mod halfform;
pub mod json;
pub mod linalg;
pub mod metaplectic;
pub mod sample;
pub mod selftest;
pub mod symplectic;
pub mod trace;

pub use error::{Error, Result};
pub use halfform::{
    dmor_compose, hf_compose, hf_lift, transfer_matrix, zeta, zeta_sqrt, zeta_sqrt_with,
    BranchOptions, DMorphism, HalfFormMorphism,
};
pub use linalg::{CMat, RMat, C64};
pub use metaplectic::{
    a_matrix, det_sqrt_half_plus_ia, metalinear_embed, mp_compose, mp_index, mp_index_2d,
    mp_lift, mp_p_from_cover, mp_p_index, mp_product, sl2_parametrization, unitary_embed,
    GeneralizedMetaplecticElement, IndexResult, MetaplecticElement,
};
pub use symplectic::{PositivePolarization, SymplecticSpace, Symplectomorphism, Tolerance};
pub use trace::{
    lefschetz_number, sphere_model, trace_estimate, trace_estimate_halfform, FixedPointDatum,
    TraceQuery,
};
