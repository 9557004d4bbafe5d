use std::ops::{Add, Sub};

use super::eigen::{jacobi, Eigen};
use super::matrix::CMatrix;
use super::{LinalgError, PureState};

/// Entry-wise tolerance for the strict Hermiticity check.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Dense Hermitian operator. Construction symmetrizes the input, so the
/// stored matrix is always `(X + X†)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    /// Symmetrizes `m`. Panics if `m` is not square.
    pub fn new(m: CMatrix) -> Self {
        assert!(m.is_square(), "Hermitian operator must be square");
        Self(m.hermitian_part())
    }

    /// Rejects `m` if any entry differs from the conjugate of its transpose
    /// partner by more than [`HERMITIAN_TOLERANCE`].
    pub fn new_strict(m: CMatrix) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::DimensionMismatch { expected: m.rows(), found: m.cols() });
        }
        let deviation = (&m - &m.adjoint()).max_abs();
        if deviation > HERMITIAN_TOLERANCE {
            return Err(LinalgError::NotHermitian { deviation });
        }
        Ok(Self::new(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim))
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self(CMatrix::from_real_diag(diag))
    }

    pub fn projector(psi: &PureState) -> Self {
        Self::new(CMatrix::outer(psi.amplitudes(), psi.amplitudes()))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale_re(s))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    /// Transpose in the canonical basis.
    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `Tr(self · other)`, real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> f64 {
        self.0.trace_product(&other.0).re
    }

    /// `B X B†` for an arbitrary (possibly rectangular) `B`.
    pub fn congruence(&self, b: &CMatrix) -> Self {
        Self::new(&(b * &self.0) * &b.adjoint())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// Jacobi eigendecomposition; fails when the sweep cap is hit.
    pub fn eig(&self) -> Result<Eigen, LinalgError> {
        let out = jacobi(&self.0);
        if out.converged {
            Ok(out.eigen)
        } else {
            Err(LinalgError::NoConvergence { sweeps: out.sweeps, off_norm: out.off_norm })
        }
    }

    /// Best-effort decomposition for the spectral functions below. The
    /// Jacobi iteration converges quadratically for any finite Hermitian
    /// input, so the unconverged iterate is only seen for NaN/inf entries.
    pub(crate) fn spectrum(&self) -> Eigen {
        jacobi(&self.0).eigen
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum().values
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::new(self.spectrum().map(f))
    }

    /// Negative eigenvalues clamped to zero.
    pub fn positive_part(&self) -> Self {
        self.map_spectrum(|l| l.max(0.0))
    }

    /// `|X| = Σ |λ_k| v_k v_k†`.
    pub fn abs(&self) -> Self {
        self.map_spectrum(f64::abs)
    }

    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.abs()).sum()
    }

    pub fn op_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    /// Square root of the positive part.
    pub fn sqrt_psd(&self) -> Self {
        self.map_spectrum(|l| l.max(0.0).sqrt())
    }

    /// Pseudo-inverse square root: `λ^{-1/2}` on eigenvalues above `cutoff`, 0 elsewhere.
    pub fn pinv_sqrt(&self, cutoff: f64) -> Self {
        self.map_spectrum(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 })
    }

    /// Number of eigenvalues above `cutoff`.
    pub fn rank(&self, cutoff: f64) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > cutoff).count()
    }

    /// `‖X − (Tr X / d) I‖_op`, the distance from the nearest multiple of the identity.
    pub fn deviation_from_scalar(&self) -> f64 {
        let d = self.dim() as f64;
        (self - &Self::identity(self.dim()).scale(self.trace() / d)).op_norm()
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator(&self.0 - &rhs.0)
    }
}

impl From<HermitianOperator> for CMatrix {
    fn from(h: HermitianOperator) -> Self {
        h.0
    }
}

/// Tensor-product convenience for Hermitian factors.
pub fn kron(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    a.kron(b)
}
