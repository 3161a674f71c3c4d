//! Bargmann spaces of positive polarizations and the quantization functor
//! `U(g, Psi)`, computed with exact Gaussian moments (no quadrature).
//!
//! Integrals are against Lebesgue measure in the standard basis. Sections of
//! the half-form line are trivialized by the stored frame, with
//! `|s| = det(H)^{-1/4}`.

pub mod moments;
pub mod operator;
pub mod phase;
pub mod section;

pub use moments::{gaussian_moment_integral, gaussian_normalizer, MomentTable, Polynomial};
pub use operator::{
    abel_trace, functor_check, kernel_trace, operator_matrix, unitarity_defect, wynn_epsilon,
    AbelTrace, FunctorReport, OperatorMatrix,
};
pub use phase::{phase_form, PhaseForm};
pub use section::{basis, monomials, vacuum_section, FockBasis, GaussianSection};
