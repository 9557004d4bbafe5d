use crate::channels::{channel_from_choi, QuantumChannel};
use crate::linalg::{partial_trace, partial_trace_matrix, spectral_norm, CMatrix, Factor, HermitianOperator};
use crate::sdp::{self, SolverStatus};

use super::tester::{scheme_from_tester, success_probability_tester, tester_from_scheme};
use super::{DiscriminationError, DiscriminationProblem, MeasurementScheme, ProcessPOVM, PROPORTIONALITY_TOLERANCE, SUPPORT_CUTOFF};

/// What a `true` verdict means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateSemantics {
    /// Full-rank input marginal: the conditions are necessary and sufficient.
    Sufficient,
    /// Rank-deficient marginal: the conditions are only necessary.
    NecessaryOnly,
}

#[derive(Debug, Clone)]
pub struct OptimalityCertificate {
    pub lambda0: f64,
    /// `Φ₀` with `λ₀ C(Φ₀)` dominating every `λ_i C(Φ_i)`; absent when it
    /// cannot be reconstructed.
    pub phi0: Option<QuantumChannel>,
    /// Per `i`: how far `Y − λ_i C_i` (or its scheme-side analogue) is from PSD.
    pub majorization_residuals: Vec<f64>,
    /// Per `i`: `‖(Y − λ_i C_i) F_i‖`.
    pub slackness_residuals: Vec<f64>,
    /// Deviation of the reduced operator from the required proportionality.
    pub proportionality_residual: f64,
    /// Non-Hermitian part of `Y` (or `Z`).
    pub hermiticity_residual: f64,
    pub condition_i: bool,
    pub condition_ii: bool,
    pub semantics: CertificateSemantics,
    /// SDP optimum used for cross-validation, when requested.
    pub sdp_value: Option<f64>,
    pub verdict: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct CertificateOptions {
    pub tol: f64,
    pub cross_validate: bool,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self { tol: PROPORTIONALITY_TOLERANCE, cross_validate: false }
    }
}

fn psd_defect(x: &HermitianOperator) -> f64 {
    (-x.min_eigenvalue()).max(0.0)
}

/// Checks conditions (i) `Z ⪰ λ_i (Φ_i⊗id)(ρ)` and (ii) `Tr_K Z ∝ ρ₂` for
/// `Z = Σ_i λ_i (Φ_i⊗id)(ρ) M_i`.
pub fn check_scheme_optimality(prob: &DiscriminationProblem, s: &MeasurementScheme) -> Result<OptimalityCertificate, DiscriminationError> {
    check_scheme_optimality_with(prob, s, &CertificateOptions::default())
}

pub fn check_scheme_optimality_with(
    prob: &DiscriminationProblem,
    s: &MeasurementScheme,
    opts: &CertificateOptions,
) -> Result<OptimalityCertificate, DiscriminationError> {
    if s.povm().len() != prob.len() {
        return Err(DiscriminationError::CountMismatch { expected: prob.len(), found: s.povm().len() });
    }
    if s.dims() != prob.dims() {
        return Err(DiscriminationError::DimensionMismatch { expected: prob.dims(), found: s.dims() });
    }
    let dims = prob.dims();
    let rho = HermitianOperator::projector(s.input_state());
    let outputs: Vec<HermitianOperator> = prob
        .items()
        .iter()
        .map(|(w, ch)| ch.apply_tensored(&rho).map(|o| o.scale(*w)))
        .collect::<Result<_, _>>()?;
    let mut z = CMatrix::zeros(dims.total(), dims.total());
    for (o, m) in outputs.iter().zip(s.povm().effects()) {
        z = z + o.matrix() * m.matrix();
    }
    let hermiticity_residual = spectral_norm(&(&z - &z.adjoint())) / 2.0;
    let zh = HermitianOperator::new(z);
    let scale = 1.0 + zh.op_norm();
    let scheme_majorization: Vec<f64> =
        outputs.iter().map(|o| psd_defect(&(&zh - o)).max(hermiticity_residual)).collect();
    let condition_i = scheme_majorization.iter().all(|r| *r <= opts.tol * scale);

    let rho2 = s.reduced_input();
    let reduced = partial_trace(&zh, dims, Factor::First)?;
    let lambda0 = zh.trace();
    let proportionality_residual = (&reduced - &rho2.scale(lambda0)).op_norm();
    let condition_ii = proportionality_residual <= opts.tol * (1.0 + reduced.op_norm());

    let full_rank = rho2.min_eigenvalue() > SUPPORT_CUTOFF;
    let tester = tester_from_scheme(s);
    let (semantics, phi0, majorization_residuals, slackness_residuals) = if full_rank {
        let a_inv = s.schmidt().inverse().ok_or_else(|| DiscriminationError::InvalidScheme("singular Schmidt operator".into()))?;
        let big = CMatrix::identity(dims.dim_out).kron(&a_inv);
        let y = zh.congruence(&big);
        let lambda0_y = y.trace() / dims.dim_in as f64;
        let phi0 = if lambda0_y > 0.0 { channel_from_choi(&y.scale(1.0 / lambda0_y), dims).ok() } else { None };
        let (maj, slack) = theorem_residuals(prob, &y, &tester);
        (CertificateSemantics::Sufficient, phi0, maj, slack)
    } else {
        let slack = outputs
            .iter()
            .zip(s.povm().effects())
            .map(|(o, m)| spectral_norm(&((&zh - o).matrix() * m.matrix())))
            .collect();
        (CertificateSemantics::NecessaryOnly, None, scheme_majorization, slack)
    };
    let slack_ok = slackness_residuals.iter().all(|r| *r <= opts.tol.sqrt() * scale);
    let mut verdict = condition_i && condition_ii && slack_ok;
    let sdp_value = cross_validate(prob, opts, &tester, &mut verdict)?;
    Ok(OptimalityCertificate {
        lambda0,
        phi0,
        majorization_residuals,
        slackness_residuals,
        proportionality_residual,
        hermiticity_residual,
        condition_i,
        condition_ii,
        semantics,
        sdp_value,
        verdict,
    })
}

fn theorem_residuals(prob: &DiscriminationProblem, y: &HermitianOperator, tester: &ProcessPOVM) -> (Vec<f64>, Vec<f64>) {
    let mut maj = Vec::with_capacity(prob.len());
    let mut slack = Vec::with_capacity(prob.len());
    for (i, f) in tester.effects().iter().enumerate() {
        let gap = y - &prob.weighted_choi(i);
        maj.push(psd_defect(&gap));
        slack.push(spectral_norm(&(gap.matrix() * f.matrix())));
    }
    (maj, slack)
}

fn cross_validate(
    prob: &DiscriminationProblem,
    opts: &CertificateOptions,
    tester: &ProcessPOVM,
    verdict: &mut bool,
) -> Result<Option<f64>, DiscriminationError> {
    if !opts.cross_validate {
        return Ok(None);
    }
    let sol = sdp::solve(&sdp::build_discrimination_primal(prob));
    if sol.status != SolverStatus::Optimal {
        return Err(DiscriminationError::Solver(sol.status));
    }
    let p = success_probability_tester(prob, tester)?;
    if (p - sol.primal_value).abs() > 2e-6 {
        *verdict = false;
    }
    Ok(Some(sol.primal_value))
}

/// Builds `Y = (Σ_i λ_i C_i F_i)(I ⊗ σ⁻¹)` and checks that it is a
/// Hermitian `λ₀ C(Φ₀)` dominating each `λ_i C_i` with `(Y − λ_i C_i)F_i = 0`.
pub fn check_tester_optimality(prob: &DiscriminationProblem, f: &ProcessPOVM) -> Result<OptimalityCertificate, DiscriminationError> {
    check_tester_optimality_with(prob, f, &CertificateOptions::default())
}

pub fn check_tester_optimality_with(
    prob: &DiscriminationProblem,
    f: &ProcessPOVM,
    opts: &CertificateOptions,
) -> Result<OptimalityCertificate, DiscriminationError> {
    if f.len() != prob.len() {
        return Err(DiscriminationError::CountMismatch { expected: prob.len(), found: f.len() });
    }
    if f.dims() != prob.dims() {
        return Err(DiscriminationError::DimensionMismatch { expected: prob.dims(), found: f.dims() });
    }
    let dims = prob.dims();
    let sigma = f.sigma();
    if sigma.min_eigenvalue() <= SUPPORT_CUTOFF {
        return check_scheme_optimality_with(prob, &scheme_from_tester(f), opts);
    }
    let sigma_inv = sigma.matrix().inverse().ok_or_else(|| DiscriminationError::InvalidTester("σ is singular".into()))?;
    let mut sum = CMatrix::zeros(dims.total(), dims.total());
    for (i, fi) in f.effects().iter().enumerate() {
        sum = sum + prob.weighted_choi(i).matrix() * fi.matrix();
    }
    let y = &sum * &CMatrix::identity(dims.dim_out).kron(&sigma_inv);
    let hermiticity_residual = spectral_norm(&(&y - &y.adjoint())) / 2.0;
    let reduced = partial_trace_matrix(&y, dims, Factor::First)?;
    let yh = HermitianOperator::new(y);
    let lambda0 = yh.trace() / dims.dim_in as f64;
    let reduced = HermitianOperator::new(reduced);
    let proportionality_residual = (&reduced - &HermitianOperator::identity(dims.dim_in).scale(lambda0)).op_norm();
    let scale = 1.0 + yh.op_norm();
    let (maj, slack) = theorem_residuals(prob, &yh, f);
    let condition_i = hermiticity_residual <= opts.tol * scale && maj.iter().all(|r| *r <= opts.tol * scale);
    let condition_ii = proportionality_residual <= opts.tol * (1.0 + reduced.op_norm());
    let slack_ok = slack.iter().all(|r| *r <= opts.tol.sqrt() * scale);
    let mut verdict = condition_i && condition_ii && slack_ok;
    let phi0 = if lambda0 > 0.0 { channel_from_choi(&yh.scale(1.0 / lambda0), dims).ok() } else { None };
    let sdp_value = cross_validate(prob, opts, f, &mut verdict)?;
    Ok(OptimalityCertificate {
        lambda0,
        phi0,
        majorization_residuals: maj,
        slackness_residuals: slack,
        proportionality_residual,
        hermiticity_residual,
        condition_i,
        condition_ii,
        semantics: CertificateSemantics::Sufficient,
        sdp_value,
        verdict,
    })
}
