//! Numerical machinery for iterated Eichler integrals of level one.
//!
//! The crate computes, at configurable floating-point precision:
//!
//! - truncated q-expansions of classical modular forms and echelonized
//!   bases of `M_k` / `S_k` ([`qseries`]),
//! - polynomial- and scalar-valued Eichler integrals of depth one, period
//!   polynomials and critical L-values ([`eichler`]),
//! - parabolic cocycles for `(1, sym^d)`, admissible pairs and the
//!   three-step extension representations they generate ([`cocycle`]),
//! - depth-two iterated integrals and the vector-valued modular forms
//!   they assemble into ([`depth2`]),
//! - vector-valued Eisenstein series of extension type, their Fourier
//!   coefficients and growth diagnostics ([`eisenstein`]),
//! - decompositions of `Δ^n · (ε_{f,g}, I_f, 1)` over the graded span of
//!   Eisenstein columns and classical forms ([`saturation`]).
//!
//! All scalar arithmetic runs on [`num::MpComplex`], a complex number
//! backed by MPFR reals whose mantissa width is chosen at runtime
//! (128 bits by default). Values are immutable after construction and
//! every operation is a pure function, so the whole crate is safe to use
//! from multiple threads without synchronization.

pub mod algebra;
pub mod cocycle;
pub mod depth2;
pub mod eichler;
pub mod eisenstein;
pub mod num;
pub mod qseries;
pub mod saturation;

mod json;

pub use crate::num::{EvalConfig, MpComplex};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degree bounds differ: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("weights differ: {0} vs {1}")]
    WeightMismatch(i64, i64),
    #[error("expected a cusp form (constant Fourier coefficient must vanish)")]
    NotCuspidal,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cocycle relations violated: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    CocycleInvalid { residual: f64, tol: f64 },
    #[error("pair is not admissible: |<<phi1(S), phi2(S)>>| = {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotAdmissible { residual: f64, tol: f64 },
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
