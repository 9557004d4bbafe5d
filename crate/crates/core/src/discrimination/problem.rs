use crate::channels::{PovmSet, QuantumChannel};
use crate::linalg::{partial_trace, BipartiteDims, CMatrix, Factor, HermitianOperator, PureState};

use super::DiscriminationError;

/// Ensemble `{(λ_i, Φ_i)}` of prior weights and channels with common dimensions.
#[derive(Debug, Clone)]
pub struct DiscriminationProblem {
    items: Vec<(f64, QuantumChannel)>,
}

impl DiscriminationProblem {
    pub fn new(items: Vec<(f64, QuantumChannel)>) -> Result<Self, DiscriminationError> {
        if items.len() < 2 {
            return Err(DiscriminationError::InvalidWeights(format!("need at least two channels, got {}", items.len())));
        }
        let dims = items[0].1.dims();
        for (i, (w, ch)) in items.iter().enumerate() {
            if !(w.is_finite() && *w > 0.0) {
                return Err(DiscriminationError::InvalidWeights(format!("weight {i} is {w}")));
            }
            if ch.dims() != dims {
                return Err(DiscriminationError::DimensionMismatch { expected: dims, found: ch.dims() });
            }
        }
        let total: f64 = items.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(DiscriminationError::InvalidWeights(format!("weights sum to {total}")));
        }
        Ok(Self { items })
    }

    /// `{(λ, Φ₁), (1−λ, Φ₂)}`.
    pub fn two(ch1: QuantumChannel, ch2: QuantumChannel, lambda: f64) -> Result<Self, DiscriminationError> {
        check_lambda(lambda)?;
        Self::new(vec![(lambda, ch1), (1.0 - lambda, ch2)])
    }

    pub fn items(&self) -> &[(f64, QuantumChannel)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dims(&self) -> BipartiteDims {
        self.items[0].1.dims()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.items.iter().map(|(w, _)| *w).collect()
    }

    pub fn channel(&self, i: usize) -> &QuantumChannel {
        &self.items[i].1
    }

    /// `λ_i C(Φ_i)`.
    pub fn weighted_choi(&self, i: usize) -> HermitianOperator {
        let (w, ch) = &self.items[i];
        ch.choi().scale(*w)
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<(), DiscriminationError> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(DiscriminationError::LambdaOutOfRange(lambda))
    }
}

/// Operators `{F_i}` on `K⊗H` with `Σ F_i = I ⊗ σ` for a state `σ`.
#[derive(Debug, Clone)]
pub struct ProcessPOVM {
    effects: Vec<HermitianOperator>,
    sigma: HermitianOperator,
    dims: BipartiteDims,
}

/// Positivity slack allowed for tester effects.
pub const TESTER_PSD_TOLERANCE: f64 = 1e-10;
/// Allowed deviation of `Σ F_i` from `I ⊗ σ`.
pub const TESTER_SUM_TOLERANCE: f64 = 1e-9;

impl ProcessPOVM {
    pub fn new(effects: Vec<HermitianOperator>, dims: BipartiteDims) -> Result<Self, DiscriminationError> {
        if effects.is_empty() {
            return Err(DiscriminationError::InvalidTester("no effects".into()));
        }
        let mut sum = HermitianOperator::zeros(dims.total());
        for (i, f) in effects.iter().enumerate() {
            if f.dim() != dims.total() {
                return Err(DiscriminationError::InvalidTester(format!("effect {i} has dimension {}", f.dim())));
            }
            let min = f.min_eigenvalue();
            if min < -TESTER_PSD_TOLERANCE {
                return Err(DiscriminationError::InvalidTester(format!("effect {i} has eigenvalue {min:e}")));
            }
            sum = &sum + f;
        }
        let sigma = partial_trace(&sum, dims, Factor::First)?.scale(1.0 / dims.dim_out as f64);
        let residual = (&sum - &HermitianOperator::identity(dims.dim_out).kron(&sigma)).matrix().max_abs();
        if residual > TESTER_SUM_TOLERANCE {
            return Err(DiscriminationError::InvalidTester(format!("Σ F_i differs from I⊗σ by {residual:e}")));
        }
        if (sigma.trace() - 1.0).abs() > TESTER_SUM_TOLERANCE {
            return Err(DiscriminationError::InvalidTester(format!("Tr σ = {}", sigma.trace())));
        }
        Ok(Self { effects, sigma, dims })
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn sigma(&self) -> &HermitianOperator {
        &self.sigma
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }
}

/// Input state `|ψ⟩` on `H ⊗ H₀` (with `H₀ = H`) and a POVM on `K ⊗ H₀`.
#[derive(Debug, Clone)]
pub struct MeasurementScheme {
    input_state: PureState,
    povm: PovmSet,
    dims: BipartiteDims,
}

impl MeasurementScheme {
    pub fn new(input_state: PureState, povm: PovmSet, dims: BipartiteDims) -> Result<Self, DiscriminationError> {
        let d = dims.dim_in;
        if input_state.dim() != d * d {
            return Err(DiscriminationError::InvalidScheme(format!(
                "input state has dimension {}, expected {}",
                input_state.dim(),
                d * d
            )));
        }
        if povm.dim() != dims.total() {
            return Err(DiscriminationError::InvalidScheme(format!(
                "POVM acts on dimension {}, expected {}",
                povm.dim(),
                dims.total()
            )));
        }
        Ok(Self { input_state, povm, dims })
    }

    pub fn input_state(&self) -> &PureState {
        &self.input_state
    }

    pub fn povm(&self) -> &PovmSet {
        &self.povm
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    /// The Schmidt operator `A` with `|ψ⟩ = (I ⊗ A)|ψ_H⟩`.
    pub fn schmidt(&self) -> CMatrix {
        crate::linalg::schmidt_operator(&self.input_state, BipartiteDims::square(self.dims.dim_in))
            .expect("dimensions validated at construction")
    }

    /// `ρ₂ = Tr_H |ψ⟩⟨ψ| = A A†`.
    pub fn reduced_input(&self) -> HermitianOperator {
        let a = self.schmidt();
        HermitianOperator::new(&a * &a.adjoint())
    }
}
