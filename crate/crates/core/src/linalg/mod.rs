//! Dense complex linear algebra for small Hermitian problems.
//!
//! Bipartite operators are always ordered `K ⊗ H` (output factor first,
//! input factor second), and tensor products put the first factor outer in
//! row-major block order. Choi matrices, testers and the SDP builders all
//! rely on this ordering.

mod eigen;
mod hermitian;
mod matrix;
mod state;

use thiserror::Error;

pub use eigen::{Eigen, MAX_SWEEPS, OFF_DIAGONAL_TOLERANCE};
pub use hermitian::{kron, HermitianOperator, HERMITIAN_TOLERANCE};
pub use matrix::{CMatrix, C64};
pub use state::PureState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("zero or non-finite vector cannot be normalized")]
    ZeroVector,
}

/// Dimensions of a bipartite space `K ⊗ H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BipartiteDims {
    pub dim_out: usize,
    pub dim_in: usize,
}

impl BipartiteDims {
    pub fn new(dim_out: usize, dim_in: usize) -> Self {
        Self { dim_out, dim_in }
    }

    pub fn square(d: usize) -> Self {
        Self { dim_out: d, dim_in: d }
    }

    pub fn total(&self) -> usize {
        self.dim_out * self.dim_in
    }
}

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// The output factor `K`; the result lives on `H`.
    First,
    /// The input factor `H`; the result lives on `K`.
    Second,
}

pub fn partial_trace(x: &HermitianOperator, dims: BipartiteDims, which: Factor) -> Result<HermitianOperator, LinalgError> {
    partial_trace_matrix(x.matrix(), dims, which).map(HermitianOperator::new)
}

/// Partial trace of a general (not necessarily Hermitian) square matrix.
pub fn partial_trace_matrix(x: &CMatrix, dims: BipartiteDims, which: Factor) -> Result<CMatrix, LinalgError> {
    x.partial_trace(dims.dim_out, dims.dim_in, which == Factor::First)
}

pub fn eig_hermitian(x: &HermitianOperator) -> Result<Eigen, LinalgError> {
    x.eig()
}

pub fn positive_part(x: &HermitianOperator) -> HermitianOperator {
    x.positive_part()
}

pub fn abs_op(x: &HermitianOperator) -> HermitianOperator {
    x.abs()
}

pub fn trace_norm(x: &HermitianOperator) -> f64 {
    x.trace_norm()
}

pub fn op_norm(x: &HermitianOperator) -> f64 {
    x.op_norm()
}

/// Operator norm of a general matrix: `sqrt(λ_max(X† X))`.
pub fn spectral_norm(x: &CMatrix) -> f64 {
    HermitianOperator::new(&x.adjoint() * x).max_eigenvalue().max(0.0).sqrt()
}

/// The operator `A` with `(I ⊗ A)|ψ_H⟩ = |ψ⟩`, where `|ψ_H⟩ = Σ_i |i⟩⊗|i⟩`.
///
/// `ψ` lives on `H ⊗ H₀` with both factors of dimension `dims.dim_in`.
pub fn schmidt_operator(psi: &PureState, dims: BipartiteDims) -> Result<CMatrix, LinalgError> {
    let d = dims.dim_in;
    if dims.dim_out != dims.dim_in {
        return Err(LinalgError::DimensionMismatch { expected: dims.dim_in, found: dims.dim_out });
    }
    if psi.dim() != d * d {
        return Err(LinalgError::DimensionMismatch { expected: d * d, found: psi.dim() });
    }
    // ψ[(i, j)] = A[j, i]
    let amps = psi.amplitudes();
    Ok(CMatrix::from_fn(d, d, |r, c| amps[c * d + r]))
}

/// Generalized Gell-Mann matrices on `ℂ^d`: `d² − 1` traceless Hermitian
/// operators, orthonormal in the Hilbert-Schmidt inner product.
pub fn gell_mann_basis(d: usize) -> Vec<HermitianOperator> {
    let mut out = Vec::with_capacity(d * d - 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = C64::new(s, 0.0);
            m[(k, j)] = C64::new(s, 0.0);
            out.push(HermitianOperator::new(m));
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = C64::new(0.0, -s);
            m[(k, j)] = C64::new(0.0, s);
            out.push(HermitianOperator::new(m));
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for x in diag.iter_mut().take(l) {
            *x = norm;
        }
        diag[l] = -(l as f64) * norm;
        out.push(HermitianOperator::from_real_diag(&diag));
    }
    out
}

/// Hilbert-Schmidt orthonormal basis of all Hermitian operators on `ℂ^d`
/// built from matrix units (`d²` elements, each with at most two nonzeros).
pub fn matrix_unit_basis(d: usize) -> Vec<HermitianOperator> {
    let mut out = Vec::with_capacity(d * d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        let mut diag = vec![0.0; d];
        diag[j] = 1.0;
        out.push(HermitianOperator::from_real_diag(&diag));
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = C64::new(s, 0.0);
            m[(k, j)] = C64::new(s, 0.0);
            out.push(HermitianOperator::new(m));
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = C64::new(0.0, -s);
            m[(k, j)] = C64::new(0.0, s);
            out.push(HermitianOperator::new(m));
        }
    }
    out
}
