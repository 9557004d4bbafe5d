use super::matrix::{CMatrix, C64};
use super::LinalgError;

/// Unit vector in `ℂ^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    /// Normalizes `amps`; rejects the zero vector.
    pub fn new(amps: Vec<C64>) -> Result<Self, LinalgError> {
        let norm = amps.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(LinalgError::ZeroVector);
        }
        Ok(Self { amps: amps.into_iter().map(|a| a / norm).collect() })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self, LinalgError> {
        Self::new(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// Canonical basis vector `|i⟩`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[i] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// `d^{-1/2} Σ_i |i⟩⊗|i⟩`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); d * d];
        let w = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            amps[i * d + i] = C64::new(w, 0.0);
        }
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let amps = self.amps.iter().flat_map(|a| other.amps.iter().map(move |b| a * b)).collect();
        Self { amps }
    }

    pub fn as_column(&self) -> CMatrix {
        CMatrix::from_vec(self.dim(), 1, self.amps.clone())
    }
}
