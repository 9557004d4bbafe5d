//! Testers, optimality certificates, the maximally-entangled-input success
//! probability `p_MEI` and its upper bound.
//!
//! A tester `{F_i}` on `K⊗H` with `Σ F_i = I⊗σ` assigns success
//! `Σ λ_i Tr C(Φ_i) F_i`. With the maximally entangled input `F_i = M_i/d_H`
//! and the problem reduces to state discrimination of `C(Φ_i)/d_H`.

mod certificate;
mod mei;
mod problem;
mod tester;

use thiserror::Error;

use crate::channels::ChannelError;
use crate::linalg::{BipartiteDims, LinalgError};
use crate::sdp::{SdpError, SolverStatus};

pub use certificate::{
    check_scheme_optimality, check_scheme_optimality_with, check_tester_optimality, check_tester_optimality_with,
    CertificateOptions, CertificateSemantics, OptimalityCertificate,
};
pub use mei::{
    bounds_report, bounds_report_with, check_state_povm_optimality, check_state_povm_optimality_with, covariant_upper_bound,
    delta_lambda, diamond_norm, diamond_norm_bounds, helstrom, mei_condition, optimal_state_povm, p_mei_multi, p_mei_two,
    solve_discrimination, CovariantBound, DiamondBounds, DiscriminationReport, MeiCheck, MeiSolution, OptimalDiscrimination,
    StateOptimality,
};
pub use problem::{DiscriminationProblem, MeasurementScheme, ProcessPOVM, TESTER_PSD_TOLERANCE, TESTER_SUM_TOLERANCE};
pub use tester::{scheme_from_tester, success_probability, success_probability_tester, tester_from_scheme};

/// Relative tolerance for proportionality tests such as `Tr_K Z ∝ I`.
pub const PROPORTIONALITY_TOLERANCE: f64 = 1e-8;
/// Eigenvalues of `σ` or `ρ₂` at or below this are outside the support.
pub const SUPPORT_CUTOFF: f64 = 1e-10;
/// Eigenvalues of `Δ` at or below this go to the second Helstrom effect.
pub const HELSTROM_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscriminationError {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("λ = {0} outside (0, 1)")]
    LambdaOutOfRange(f64),
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch { expected: BipartiteDims, found: BipartiteDims },
    #[error("expected {expected} effects, found {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("invalid tester: {0}")]
    InvalidTester(String),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("invalid projections: {0}")]
    InvalidProjectors(String),
    #[error("Tr_K|Δ_λ| is not constant on the given blocks (residual {residual:e})")]
    DecompositionFailed { residual: f64 },
    #[error("SDP solver finished with status {0:?}")]
    Solver(SolverStatus),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}
