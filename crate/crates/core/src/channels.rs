//! Quantum channels held as Kraus operators with a cached Choi matrix.
//!
//! The Choi matrix uses the unnormalized vector `|ψ_H⟩ = Σ_i |i⟩⊗|i⟩`:
//! `C(Φ) = (Φ ⊗ id)(|ψ_H⟩⟨ψ_H|)`, an operator on `K ⊗ H` with
//! `Tr_K C(Φ) = I_H`. Transposes are taken in the canonical basis.

use thiserror::Error;

use crate::linalg::{partial_trace, BipartiteDims, CMatrix, Factor, HermitianOperator, LinalgError, C64};

/// Trace-preservation and positivity tolerance for stored channels.
pub const CHANNEL_TOLERANCE: f64 = 1e-10;
/// Tolerance used when validating a user-supplied Choi matrix.
pub const CHOI_VALIDATION_TOLERANCE: f64 = 1e-8;
/// Choi eigenvalues at or below this are dropped during Kraus extraction.
pub const KRAUS_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("Choi matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("map is not trace preserving (‖Tr_K C − I‖ = {deviation:e})")]
    NotTracePreserving { deviation: f64 },
    #[error("parameter `{name}` = {value} outside [{min}, {max}]")]
    ParameterOutOfRange { name: &'static str, value: f64, min: f64, max: f64 },
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("no Kraus operators given")]
    EmptyKraus,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A completely positive trace-preserving map `B(H) → B(K)`.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
    choi: HermitianOperator,
}

fn choi_from_kraus(kraus: &[CMatrix], dim_out: usize, dim_in: usize) -> HermitianOperator {
    let n = dim_out * dim_in;
    let mut c = CMatrix::zeros(n, n);
    for k in kraus {
        // vec(K)[(a, i)] = K[a, i]
        let v = k.data();
        for r in 0..n {
            if v[r] == C64::new(0.0, 0.0) {
                continue;
            }
            for s in 0..n {
                c[(r, s)] += v[r] * v[s].conj();
            }
        }
    }
    HermitianOperator::new(c)
}

impl QuantumChannel {
    /// Validates `Σ K_j† K_j = I` within [`CHANNEL_TOLERANCE`].
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self, ChannelError> {
        let first = kraus.first().ok_or(ChannelError::EmptyKraus)?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if let Some(bad) = kraus.iter().find(|k| k.rows() != dim_out || k.cols() != dim_in) {
            return Err(LinalgError::DimensionMismatch { expected: dim_out * dim_in, found: bad.rows() * bad.cols() }.into());
        }
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum = sum + k.adjoint().matmul(k);
        }
        let deviation = (&sum - &CMatrix::identity(dim_in)).max_abs();
        if deviation > CHANNEL_TOLERANCE {
            return Err(ChannelError::NotTracePreserving { deviation });
        }
        let choi = choi_from_kraus(&kraus, dim_out, dim_in);
        Ok(Self { dim_in, dim_out, kraus, choi })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dims(&self) -> BipartiteDims {
        BipartiteDims::new(self.dim_out, self.dim_in)
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &HermitianOperator {
        &self.choi
    }

    /// `Σ K_j ρ K_j†`.
    pub fn apply(&self, rho: &HermitianOperator) -> Result<HermitianOperator, ChannelError> {
        if rho.dim() != self.dim_in {
            return Err(LinalgError::DimensionMismatch { expected: self.dim_in, found: rho.dim() }.into());
        }
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = out + &(k * rho.matrix()) * &k.adjoint();
        }
        Ok(HermitianOperator::new(out))
    }

    /// `(Φ ⊗ id)(ρ)` for `ρ` on `H ⊗ H'`; the result lives on `K ⊗ H'`.
    pub fn apply_tensored(&self, rho: &HermitianOperator) -> Result<HermitianOperator, ChannelError> {
        if !rho.dim().is_multiple_of(self.dim_in) || rho.dim() == 0 {
            return Err(LinalgError::DimensionMismatch { expected: self.dim_in, found: rho.dim() }.into());
        }
        let anc = rho.dim() / self.dim_in;
        let id = CMatrix::identity(anc);
        let mut out = CMatrix::zeros(self.dim_out * anc, self.dim_out * anc);
        for k in &self.kraus {
            let big = k.kron(&id);
            out = out + &(&big * rho.matrix()) * &big.adjoint();
        }
        Ok(HermitianOperator::new(out))
    }

    /// `Φ(I)`.
    pub fn image_of_identity(&self) -> HermitianOperator {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = out + k.matmul(&k.adjoint());
        }
        HermitianOperator::new(out)
    }
}

/// Returns the cached Choi matrix.
pub fn choi_of(ch: &QuantumChannel) -> &HermitianOperator {
    ch.choi()
}

/// Validates `c` as a Choi matrix on `K ⊗ H` and extracts Kraus operators
/// from its eigendecomposition.
pub fn channel_from_choi(c: &HermitianOperator, dims: BipartiteDims) -> Result<QuantumChannel, ChannelError> {
    if c.dim() != dims.total() {
        return Err(LinalgError::DimensionMismatch { expected: dims.total(), found: c.dim() }.into());
    }
    let tr_k = partial_trace(c, dims, Factor::First)?;
    let deviation = (&tr_k - &HermitianOperator::identity(dims.dim_in)).max_abs_entry();
    if deviation > CHOI_VALIDATION_TOLERANCE {
        return Err(ChannelError::NotTracePreserving { deviation });
    }
    let eig = c.eig()?;
    let min_eigenvalue = eig.values.last().copied().unwrap_or(0.0);
    if min_eigenvalue < -CHOI_VALIDATION_TOLERANCE {
        return Err(ChannelError::NotPsd { min_eigenvalue });
    }
    let mut kraus = Vec::new();
    for (k, &mu) in eig.values.iter().enumerate() {
        if mu <= KRAUS_CUTOFF {
            continue;
        }
        let v = eig.vector(k);
        let s = mu.sqrt();
        kraus.push(CMatrix::from_fn(dims.dim_out, dims.dim_in, |a, i| v[a * dims.dim_in + i] * s));
    }
    if kraus.is_empty() {
        return Err(ChannelError::NotPsd { min_eigenvalue });
    }
    // Truncation and roundoff leave Σ K†K within ~1e-8 of I; keep the given Choi matrix.
    let kraus = renormalize_kraus(kraus);
    Ok(QuantumChannel { dim_in: dims.dim_in, dim_out: dims.dim_out, choi: c.clone(), kraus })
}

/// Rescales Kraus operators so that `Σ K†K = I` exactly up to roundoff:
/// `K_j ← K_j S^{-1/2}` with `S = Σ K†K`.
fn renormalize_kraus(kraus: Vec<CMatrix>) -> Vec<CMatrix> {
    let d = kraus[0].cols();
    let mut sum = CMatrix::zeros(d, d);
    for k in &kraus {
        sum = sum + k.adjoint().matmul(k);
    }
    let fix = HermitianOperator::new(sum).pinv_sqrt(0.0);
    kraus.into_iter().map(|k| k.matmul(fix.matrix())).collect()
}

impl HermitianOperator {
    pub(crate) fn max_abs_entry(&self) -> f64 {
        self.matrix().max_abs()
    }
}

/// A POVM: positive effects on a common space summing to the identity.
#[derive(Debug, Clone)]
pub struct PovmSet {
    effects: Vec<HermitianOperator>,
}

impl PovmSet {
    pub fn new(effects: Vec<HermitianOperator>) -> Result<Self, ChannelError> {
        Self::with_tolerance(effects, CHANNEL_TOLERANCE)
    }

    pub fn with_tolerance(effects: Vec<HermitianOperator>, tol: f64) -> Result<Self, ChannelError> {
        let d = effects.first().ok_or_else(|| ChannelError::InvalidPovm("no effects".into()))?.dim();
        let mut sum = HermitianOperator::zeros(d);
        for (i, e) in effects.iter().enumerate() {
            if e.dim() != d {
                return Err(ChannelError::InvalidPovm(format!("effect {i} has dimension {} instead of {d}", e.dim())));
            }
            let min = e.min_eigenvalue();
            if min < -tol {
                return Err(ChannelError::InvalidPovm(format!("effect {i} has negative eigenvalue {min:e}")));
            }
            sum = &sum + e;
        }
        let deviation = (&sum - &HermitianOperator::identity(d)).max_abs_entry();
        if deviation > tol {
            return Err(ChannelError::InvalidPovm(format!("effects sum to identity only within {deviation:e}")));
        }
        Ok(Self { effects })
    }

    pub fn effects(&self) -> &[HermitianOperator] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    /// Projective measurement in the canonical basis.
    pub fn computational(d: usize) -> Self {
        let effects = (0..d)
            .map(|i| {
                let mut diag = vec![0.0; d];
                diag[i] = 1.0;
                HermitianOperator::from_real_diag(&diag)
            })
            .collect();
        Self { effects }
    }
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ChannelError::ParameterOutOfRange { name, value, min: 0.0, max: 1.0 })
    }
}

pub fn identity(d: usize) -> QuantumChannel {
    QuantumChannel::from_kraus(vec![CMatrix::identity(d)]).expect("identity is a channel")
}

/// `ρ ↦ U ρ U†`.
pub fn unitary(u: CMatrix) -> Result<QuantumChannel, ChannelError> {
    let defect = u.unitarity_defect();
    if defect > CHANNEL_TOLERANCE {
        return Err(ChannelError::NotUnitary { defect });
    }
    QuantumChannel::from_kraus(vec![u])
}

/// Qubit amplitude damping with Kraus operators
/// `A = |0⟩⟨0| + √(1−θ)|1⟩⟨1|`, `B = √θ |0⟩⟨1|`.
pub fn amplitude_damping(theta: f64) -> Result<QuantumChannel, ChannelError> {
    check_unit_interval("theta", theta)?;
    let z = C64::new(0.0, 0.0);
    let a = CMatrix::from_vec(2, 2, vec![C64::new(1.0, 0.0), z, z, C64::new((1.0 - theta).sqrt(), 0.0)]);
    let b = CMatrix::from_vec(2, 2, vec![z, C64::new(theta.sqrt(), 0.0), z, z]);
    QuantumChannel::from_kraus(vec![a, b])
}

/// Qubit Werner-Holevo channel `Γ(X) = (Tr X) I − X^t`, the unitary
/// channel of `U|0⟩ = −|1⟩, U|1⟩ = |0⟩`.
pub fn werner_holevo_qubit() -> QuantumChannel {
    let z = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let u = CMatrix::from_vec(2, 2, vec![z, l, -l, z]);
    unitary(u).expect("Werner-Holevo unitary")
}

/// `ρ ↦ (1−p) ρ + p Tr(ρ) I/d`.
pub fn depolarizing(d: usize, p: f64) -> Result<QuantumChannel, ChannelError> {
    check_unit_interval("p", p)?;
    let dims = BipartiteDims::square(d);
    let id = identity(d);
    let choi = &id.choi().scale(1.0 - p) + &HermitianOperator::identity(d * d).scale(p / d as f64);
    channel_from_choi(&choi, dims)
}

/// `A ↦ Σ_i Tr(M_i A) |i⟩⟨i|` with Choi matrix `Σ_i |i⟩⟨i| ⊗ M_i^t`.
pub fn measurement_channel(povm: &PovmSet) -> Result<QuantumChannel, ChannelError> {
    let m = povm.len();
    let d = povm.dim();
    let mut choi = HermitianOperator::zeros(m * d);
    for (i, e) in povm.effects().iter().enumerate() {
        let mut diag = vec![0.0; m];
        diag[i] = 1.0;
        choi = &choi + &HermitianOperator::from_real_diag(&diag).kron(&e.transpose());
    }
    channel_from_choi(&choi, BipartiteDims::new(m, d))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::linalg::PureState;
    use crate::random;

    fn ket_bra(d: usize, i: usize, j: usize) -> HermitianOperator {
        let mut m = CMatrix::zeros(d, d);
        m[(i, j)] = C64::new(1.0, 0.0);
        HermitianOperator::new(m)
    }

    fn swap(d: usize) -> CMatrix {
        let mut s = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                s[(i * d + j, j * d + i)] = C64::new(1.0, 0.0);
            }
        }
        s
    }

    fn unnormalized_bell(d: usize) -> HermitianOperator {
        HermitianOperator::projector(&PureState::maximally_entangled(d)).scale(d as f64)
    }

    #[test]
    fn identity_choi_is_unnormalized_bell_projector() {
        let id = identity(2);
        let c = choi_of(&id);
        assert!((c.matrix() - unnormalized_bell(2).matrix()).max_abs() < 1e-15);
        assert!((c.trace() - 2.0).abs() < 1e-15);
        assert_eq!(c.rank(1e-12), 1);
    }

    #[test]
    fn amplitude_damping_at_zero_is_identity() {
        let ad = amplitude_damping(0.0).unwrap();
        assert!((ad.choi().matrix() - identity(2).choi().matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn amplitude_damping_choi_difference_matches_displayed_matrix() {
        for theta in [0.1, 0.37, 0.75, 1.0] {
            let ad = amplitude_damping(theta).unwrap();
            let half_diff = (identity(2).choi() - ad.choi()).scale(0.5);
            let r = 1.0 - (1.0 - theta).sqrt();
            let mut expected = CMatrix::zeros(4, 4);
            expected[(0, 3)] = C64::new(r / 2.0, 0.0);
            expected[(3, 0)] = C64::new(r / 2.0, 0.0);
            expected[(2, 2)] = C64::new(-theta / 2.0, 0.0);
            expected[(3, 3)] = C64::new(theta / 2.0, 0.0);
            // the displayed form lists the input factor first
            let swapped = &(&swap(2) * &expected) * &swap(2);
            assert!((half_diff.matrix() - &swapped).max_abs() < 1e-15, "θ = {theta}");
        }
    }

    #[test]
    fn amplitude_damping_kraus_form() {
        let theta = 0.3;
        let ad = amplitude_damping(theta).unwrap();
        let a = &ad.kraus()[0];
        let b = &ad.kraus()[1];
        assert_eq!(a[(0, 0)].re, 1.0);
        assert!((a[(1, 1)].re - (1.0 - theta).sqrt()).abs() < 1e-16);
        assert!((b[(0, 1)].re - theta.sqrt()).abs() < 1e-16);
        assert_eq!(b[(1, 0)].norm() + b[(0, 0)].norm() + b[(1, 1)].norm(), 0.0);
    }

    #[test]
    fn amplitude_damping_full_decay() {
        let ad = amplitude_damping(1.0).unwrap();
        let out = ad.apply(&ket_bra(2, 1, 1)).unwrap();
        assert!((out.matrix() - ket_bra(2, 0, 0).matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(amplitude_damping(1.5), Err(ChannelError::ParameterOutOfRange { .. })));
        assert!(matches!(depolarizing(2, -0.1), Err(ChannelError::ParameterOutOfRange { .. })));
        let not_unitary = CMatrix::from_real_diag(&[1.0, 0.5]);
        assert!(matches!(unitary(not_unitary), Err(ChannelError::NotUnitary { .. })));
    }

    #[test]
    fn identity_applies_trivially() {
        let mut rng = random::rng(1);
        let rho = random::density(&mut rng, 3, 3);
        let out = identity(3).apply(&rho).unwrap();
        assert!((out.matrix() - rho.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn channel_on_maximally_entangled_state_gives_normalized_choi() {
        let mut rng = random::rng(2);
        let ch = random::channel(&mut rng, 3, 2, 2);
        let rho = HermitianOperator::projector(&PureState::maximally_entangled(3));
        let out = ch.apply_tensored(&rho).unwrap();
        assert!((out.matrix() - ch.choi().scale(1.0 / 3.0).matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn choi_of_bell_projector_is_identity_channel() {
        let ch = channel_from_choi(&unnormalized_bell(2), BipartiteDims::square(2)).unwrap();
        assert_eq!(ch.kraus().len(), 1);
        let k = &ch.kraus()[0];
        // the single Kraus operator is I up to phase
        let phase = k[(0, 0)];
        assert!((k - &CMatrix::identity(2).scale(phase)).max_abs() < 1e-12);
        assert!((phase.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_identity_choi_is_completely_depolarizing() {
        let c = HermitianOperator::identity(4).scale(0.5);
        let ch = channel_from_choi(&c, BipartiteDims::square(2)).unwrap();
        let tr_k = partial_trace(&c, BipartiteDims::square(2), Factor::First).unwrap();
        assert!((tr_k.matrix() - &CMatrix::identity(2)).max_abs() < 1e-15);
        let mut rng = random::rng(3);
        for _ in 0..5 {
            let rho = random::density(&mut rng, 2, 2);
            let out = ch.apply(&rho).unwrap();
            assert!((out.matrix() - &CMatrix::identity(2).scale_re(0.5)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn choi_errors_name_the_violation() {
        let c = HermitianOperator::identity(4);
        assert!(matches!(channel_from_choi(&c, BipartiteDims::square(2)), Err(ChannelError::NotTracePreserving { .. })));
        // trace preserving but not positive: ½I + ε(σ_z ⊗ σ_z)-like perturbation with a negative eigenvalue
        let neg = &HermitianOperator::identity(4).scale(0.5) + &HermitianOperator::from_real_diag(&[0.6, -0.6, -0.6, 0.6]);
        assert!(matches!(channel_from_choi(&neg, BipartiteDims::square(2)), Err(ChannelError::NotPsd { .. })));
        assert!(channel_from_choi(&c, BipartiteDims::square(3)).is_err());
    }

    #[test]
    fn werner_holevo_is_unital_and_matches_formula() {
        let wh = werner_holevo_qubit();
        let out = wh.apply(&HermitianOperator::identity(2)).unwrap();
        assert!((out.matrix() - &CMatrix::identity(2)).max_abs() < 1e-15);
        let mut rng = random::rng(4);
        let x = random::hermitian(&mut rng, 2);
        let expected = &HermitianOperator::identity(2).scale(x.trace()) - &x.transpose();
        assert!((wh.apply(&x).unwrap().matrix() - expected.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn measurement_channel_choi_and_output() {
        let ch = measurement_channel(&PovmSet::computational(2)).unwrap();
        assert_eq!(ch.choi(), &HermitianOperator::from_real_diag(&[1.0, 0.0, 0.0, 1.0]));
        let mut rng = random::rng(5);
        let e = random::unitary(&mut rng, 3);
        let effects = (0..3).map(|j| HermitianOperator::projector(&PureState::new(e.column(j)).unwrap())).collect();
        let povm = PovmSet::new(effects).unwrap();
        let ch = measurement_channel(&povm).unwrap();
        let expected = povm.effects().iter().enumerate().fold(HermitianOperator::zeros(9), |acc, (i, m)| {
            &acc + &ket_bra(3, i, i).kron(&m.transpose())
        });
        assert!((ch.choi().matrix() - expected.matrix()).max_abs() < 1e-14);
    }

    #[test]
    fn depolarizing_action() {
        let ch = depolarizing(3, 0.25).unwrap();
        let mut rng = random::rng(6);
        let rho = random::density(&mut rng, 3, 1);
        let expected = &rho.scale(0.75) + &HermitianOperator::identity(3).scale(0.25 / 3.0);
        assert!((ch.apply(&rho).unwrap().matrix() - expected.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn povm_validation() {
        let bad = vec![HermitianOperator::from_real_diag(&[1.0, 0.0]), HermitianOperator::from_real_diag(&[0.5, 1.0])];
        assert!(PovmSet::new(bad).is_err());
        let neg = vec![HermitianOperator::from_real_diag(&[1.5, 0.0]), HermitianOperator::from_real_diag(&[-0.5, 1.0])];
        assert!(PovmSet::new(neg).is_err());
        assert!(PovmSet::new(vec![]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn choi_round_trip(seed in any::<u64>(), din in 1usize..=3, dout in 1usize..=3, r in 1usize..=4) {
            let mut rng = random::rng(seed);
            let ch = random::channel(&mut rng, din, dout, r);
            let back = channel_from_choi(ch.choi(), ch.dims()).unwrap();
            let rebuilt = QuantumChannel::from_kraus(back.kraus().to_vec()).unwrap();
            prop_assert!((rebuilt.choi().matrix() - ch.choi().matrix()).max_abs() < 1e-9);
        }

        #[test]
        fn apply_preserves_trace_and_positivity(seed in any::<u64>(), din in 1usize..=3, dout in 1usize..=3) {
            let mut rng = random::rng(seed);
            let ch = random::channel(&mut rng, din, dout, 3);
            let rho = random::density(&mut rng, din, din);
            let out = ch.apply(&rho).unwrap();
            prop_assert!((out.trace() - rho.trace()).abs() < 1e-10);
            prop_assert!(out.min_eigenvalue() >= -1e-10);
            let joint = random::density(&mut rng, din * 2, 2);
            let out = ch.apply_tensored(&joint).unwrap();
            prop_assert!((out.trace() - 1.0).abs() < 1e-10);
            prop_assert!(out.min_eigenvalue() >= -1e-10);
        }

        #[test]
        fn unitary_choi_is_rank_one(seed in any::<u64>(), d in 1usize..=4) {
            let mut rng = random::rng(seed);
            let ch = unitary(random::unitary(&mut rng, d)).unwrap();
            prop_assert_eq!(ch.choi().rank(1e-9), 1);
            prop_assert!((ch.choi().trace() - d as f64).abs() < 1e-10);
        }

        #[test]
        fn measurement_output_is_diagonal(seed in any::<u64>(), d in 2usize..=4) {
            let mut rng = random::rng(seed);
            let u = random::unitary(&mut rng, d);
            let effects = (0..d).map(|j| HermitianOperator::projector(&PureState::new(u.column(j)).unwrap())).collect();
            let ch = measurement_channel(&PovmSet::new(effects).unwrap()).unwrap();
            let out = ch.apply(&random::density(&mut rng, d, d)).unwrap();
            for r in 0..d {
                for c in 0..d {
                    if r != c {
                        prop_assert!(out.matrix()[(r, c)].norm() < 1e-12);
                    }
                }
            }
        }
    }
}
