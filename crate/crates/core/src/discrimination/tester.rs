use crate::channels::PovmSet;
use crate::linalg::{HermitianOperator, PureState, C64};

use super::{DiscriminationError, DiscriminationProblem, MeasurementScheme, ProcessPOVM, SUPPORT_CUTOFF};

/// `F_i = (I ⊗ A†) M_i (I ⊗ A)` with `A` the Schmidt operator of the input.
pub fn tester_from_scheme(s: &MeasurementScheme) -> ProcessPOVM {
    let dims = s.dims();
    let a = s.schmidt();
    let big = crate::linalg::CMatrix::identity(dims.dim_out).kron(&a);
    let effects = s.povm().effects().iter().map(|m| m.congruence(&big.adjoint())).collect();
    ProcessPOVM::new(effects, dims).expect("a valid scheme yields a valid tester")
}

/// Inverse of [`tester_from_scheme`] with `A = σ^{1/2}`.
///
/// `σ^{-1/2}` is a pseudo-inverse on `supp(σ)`; each effect is padded with
/// `(I ⊗ (I − P))/n` so that the POVM still sums to the identity.
pub fn scheme_from_tester(f: &ProcessPOVM) -> MeasurementScheme {
    let dims = f.dims();
    let d = dims.dim_in;
    let sigma = f.sigma();
    let root = sigma.sqrt_psd();
    let inv_root = sigma.pinv_sqrt(SUPPORT_CUTOFF);
    let support = sigma.map_spectrum(|x| if x > SUPPORT_CUTOFF { 1.0 } else { 0.0 });
    let complement = (&HermitianOperator::identity(d) - &support).scale(1.0 / f.len() as f64);
    let id_k = HermitianOperator::identity(dims.dim_out);
    let big = id_k.kron(&inv_root);
    let pad = id_k.kron(&complement);
    let effects: Vec<HermitianOperator> = f.effects().iter().map(|x| &x.congruence(big.matrix()) + &pad).collect();
    let povm = PovmSet::with_tolerance(effects, 1e-8).expect("normalized tester effects form a POVM");
    // ψ[(i, j)] = A[j, i] with A = σ^{1/2}
    let r = root.matrix();
    let amps: Vec<C64> = (0..d * d).map(|k| r[(k % d, k / d)]).collect();
    let psi = PureState::new(amps).expect("σ has unit trace");
    MeasurementScheme::new(psi, povm, dims).expect("dimensions match")
}

/// `Σ_i λ_i Tr M_i (Φ_i ⊗ id)(|ψ⟩⟨ψ|)`.
pub fn success_probability(prob: &DiscriminationProblem, s: &MeasurementScheme) -> Result<f64, DiscriminationError> {
    if s.povm().len() != prob.len() {
        return Err(DiscriminationError::CountMismatch { expected: prob.len(), found: s.povm().len() });
    }
    if s.dims() != prob.dims() {
        return Err(DiscriminationError::DimensionMismatch { expected: prob.dims(), found: s.dims() });
    }
    let rho = HermitianOperator::projector(s.input_state());
    let mut p = 0.0;
    for ((w, ch), m) in prob.items().iter().zip(s.povm().effects()) {
        p += w * ch.apply_tensored(&rho)?.inner(m);
    }
    Ok(p)
}

/// `Σ_i λ_i Tr C(Φ_i) F_i`.
pub fn success_probability_tester(prob: &DiscriminationProblem, f: &ProcessPOVM) -> Result<f64, DiscriminationError> {
    if f.len() != prob.len() {
        return Err(DiscriminationError::CountMismatch { expected: prob.len(), found: f.len() });
    }
    if f.dims() != prob.dims() {
        return Err(DiscriminationError::DimensionMismatch { expected: prob.dims(), found: f.dims() });
    }
    Ok(prob.items().iter().zip(f.effects()).map(|((w, ch), x)| w * ch.choi().inner(x)).sum())
}
