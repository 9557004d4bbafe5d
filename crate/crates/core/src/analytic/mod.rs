//! Closed-form MEI criteria: qubit channels, unitary channels, simple
//! projective measurements, and the absolute value of a difference of two
//! rank-1 projections.

mod rank1;
mod spm;

use thiserror::Error;

use crate::channels::{ChannelError, QuantumChannel};
use crate::discrimination::{delta_lambda, DiscriminationError};
use crate::linalg::{partial_trace, BipartiteDims, CMatrix, Factor, HermitianOperator, LinalgError, C64};

pub use rank1::rank1_abs;
pub use spm::{
    dim4_template, spm_const_c_criterion, spm_derive, spm_dim4_hadamard_check, spm_matrix_equation_residual, spm_mei, spm_mei_detailed,
    ConstCOutcome, SpmDerived, SpmMatrixResidual, SpmMeiCheck, SpmProblem,
};

/// Eigenphases closer than this (radians) are treated as equal.
pub const PHASE_CLUSTER_GAP: f64 = 1e-8;
/// `|Tr W|` at or below this selects the `Tr W = 0` branch.
pub const TRACE_ZERO_TOLERANCE: f64 = 1e-10;
/// Basis orthonormality and unitarity tolerance.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("expected dimension {expected}, found {found:?}")]
    WrongDimension { expected: usize, found: BipartiteDims },
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("projections {index} of both bases coincide")]
    CoincidingProjections { index: usize },
    #[error("c_i not constant (spread {spread:e})")]
    ConstCViolated { spread: f64 },
    #[error("|W_ij| ≠ 1/2 at ({row}, {col})")]
    NotMub { row: usize, col: usize },
    #[error("λ = {0} outside (0, 1)")]
    LambdaOutOfRange(f64),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl From<DiscriminationError> for AnalyticError {
    fn from(e: DiscriminationError) -> Self {
        match e {
            DiscriminationError::LambdaOutOfRange(l) => AnalyticError::LambdaOutOfRange(l),
            DiscriminationError::Channel(c) => AnalyticError::Channel(c),
            DiscriminationError::Linalg(l) => AnalyticError::Linalg(l),
            other => AnalyticError::InvalidBasis(other.to_string()),
        }
    }
}

/// Both sides of the qubit criterion
/// `Tr_K|Δ_λ + ((2λ−1)I − Φ_λ(I))⊗I| = Tr_K|Δ_λ|`.
#[derive(Debug, Clone)]
pub struct QubitMeiCheck {
    pub holds: bool,
    pub shifted: HermitianOperator,
    pub reduced_abs: HermitianOperator,
    pub deviation: f64,
}

pub fn qubit_mei(ch1: &QuantumChannel, ch2: &QuantumChannel, lambda: f64, tol: f64) -> Result<bool, AnalyticError> {
    Ok(qubit_mei_detailed(ch1, ch2, lambda, tol)?.holds)
}

pub fn qubit_mei_detailed(
    ch1: &QuantumChannel,
    ch2: &QuantumChannel,
    lambda: f64,
    tol: f64,
) -> Result<QubitMeiCheck, AnalyticError> {
    for ch in [ch1, ch2] {
        if ch.dims() != BipartiteDims::square(2) {
            return Err(AnalyticError::WrongDimension { expected: 2, found: ch.dims() });
        }
    }
    let dims = ch1.dims();
    let delta = delta_lambda(ch1, ch2, lambda)?;
    let image = &ch1.image_of_identity().scale(lambda) - &ch2.image_of_identity().scale(1.0 - lambda);
    let shift = &HermitianOperator::identity(2).scale(2.0 * lambda - 1.0) - &image;
    let moved = &delta + &shift.kron(&HermitianOperator::identity(2));
    let shifted = partial_trace(&moved.abs(), dims, Factor::First)?;
    let reduced_abs = partial_trace(&delta.abs(), dims, Factor::First)?;
    let deviation = (&shifted - &reduced_abs).op_norm();
    Ok(QubitMeiCheck { holds: deviation <= tol * (1.0 + reduced_abs.op_norm()), shifted, reduced_abs, deviation })
}

/// Outcome of the unitary-channel criterion for `W = UV†`.
#[derive(Debug, Clone)]
pub struct UnitaryMei {
    pub holds: bool,
    /// `W` with the global phase chosen so that `Tr W ≥ 0`.
    pub w: CMatrix,
    pub diagnostics: UnitaryDiagnostics,
}

#[derive(Debug, Clone)]
pub struct UnitaryDiagnostics {
    pub trace: C64,
    pub trace_zero: bool,
    /// Representative eigenphase and multiplicity of each cluster.
    pub clusters: Vec<(f64, usize)>,
}

pub fn unitary_mei(u: &CMatrix, v: &CMatrix) -> Result<UnitaryMei, AnalyticError> {
    for m in [u, v] {
        let defect = m.unitarity_defect();
        if !m.is_square() || defect > UNITARY_TOLERANCE {
            return Err(AnalyticError::NotUnitary { defect });
        }
    }
    let mut w = u * &v.adjoint();
    let trace = w.trace();
    let trace_zero = trace.norm() <= TRACE_ZERO_TOLERANCE;
    if !trace_zero {
        w = w.scale(trace.conj() / trace.norm());
    }
    let clusters = phase_clusters(&eigenphases(&w));
    let two_equal = match clusters.as_slice() {
        [_] => true,
        [(_, a), (_, b)] => a == b,
        _ => false,
    };
    Ok(UnitaryMei { holds: trace_zero || two_equal, diagnostics: UnitaryDiagnostics { trace: w.trace(), trace_zero, clusters }, w })
}

/// Eigenphases of a unitary. `W` is normal, so any Hermitian combination
/// `a Re W + b Im W` with distinct values on distinct eigenvalues shares its
/// eigenvectors.
fn eigenphases(w: &CMatrix) -> Vec<f64> {
    let n = w.rows();
    let re = HermitianOperator::new((w + &w.adjoint()).scale_re(0.5));
    let im = HermitianOperator::new((w - &w.adjoint()).scale(C64::new(0.0, -0.5)));
    let mut best = (f64::INFINITY, Vec::new());
    for (a, b) in [(1.0, 0.618_033_988_749_895), (0.356_822_089_773_089_9, 1.0), (1.0, -std::f64::consts::SQRT_2)] {
        let Ok(eig) = (&re.scale(a) + &im.scale(b)).eig() else { continue };
        let mut phases = Vec::with_capacity(n);
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let v = eig.vector(k);
            let wv = w.matvec(&v);
            let mu: C64 = v.iter().zip(&wv).map(|(x, y)| x.conj() * y).sum();
            worst = worst.max(wv.iter().zip(&v).map(|(y, x)| (y - mu * x).norm_sqr()).sum::<f64>().sqrt());
            phases.push(mu.arg());
        }
        if worst < best.0 {
            best = (worst, phases);
        }
        if worst <= 1e-10 {
            break;
        }
    }
    best.1
}

fn phase_clusters(phases: &[f64]) -> Vec<(f64, usize)> {
    use std::f64::consts::TAU;
    let mut sorted = phases.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for p in sorted {
        match clusters.last_mut() {
            Some((last, count)) if p - *last <= PHASE_CLUSTER_GAP => {
                *last = p;
                *count += 1;
            }
            _ => clusters.push((p, 1)),
        }
    }
    if clusters.len() > 1 {
        let first = phases.iter().copied().fold(f64::INFINITY, f64::min);
        let (last, _) = clusters[clusters.len() - 1];
        if first + TAU - last <= PHASE_CLUSTER_GAP {
            let (_, tail) = clusters.pop().unwrap();
            clusters[0].1 += tail;
        }
    }
    clusters
}
