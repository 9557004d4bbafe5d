use nalgebra::{DMatrix, DVector};

use crate::channels::{PovmSet, QuantumChannel};
use crate::linalg::{matrix_unit_basis, partial_trace, spectral_norm, BipartiteDims, CMatrix, Factor, HermitianOperator, C64};
use crate::sdp::{self, SolverStatus};

use super::problem::check_lambda;
use super::{DiscriminationError, DiscriminationProblem, ProcessPOVM, HELSTROM_CUTOFF, PROPORTIONALITY_TOLERANCE};

/// Residuals of the state-discrimination optimality condition
/// `Σ_i λ_i ρ_i M_i ⪰ λ_j ρ_j`.
#[derive(Debug, Clone)]
pub struct StateOptimality {
    pub holds: bool,
    /// Per `j`: `max(−λ_min(Z_h − λ_jρ_j), ‖Z − Z†‖/2)` with `Z_h` the Hermitian part.
    pub residuals: Vec<f64>,
}

pub fn check_state_povm_optimality(
    states: &[(f64, HermitianOperator)],
    povm: &PovmSet,
) -> Result<StateOptimality, DiscriminationError> {
    check_state_povm_optimality_with(states, povm, PROPORTIONALITY_TOLERANCE)
}

pub fn check_state_povm_optimality_with(
    states: &[(f64, HermitianOperator)],
    povm: &PovmSet,
    tol: f64,
) -> Result<StateOptimality, DiscriminationError> {
    if states.len() != povm.len() {
        return Err(DiscriminationError::CountMismatch { expected: states.len(), found: povm.len() });
    }
    let d = povm.dim();
    let mut z = CMatrix::zeros(d, d);
    for ((w, rho), m) in states.iter().zip(povm.effects()) {
        if rho.dim() != d {
            return Err(DiscriminationError::InvalidScheme(format!("state of dimension {} against POVM of {d}", rho.dim())));
        }
        z = z + (rho.matrix() * m.matrix()).scale_re(*w);
    }
    let asym = spectral_norm(&(&z - &z.adjoint())) / 2.0;
    let zh = HermitianOperator::new(z);
    let scale = states.iter().map(|(w, r)| w * r.op_norm()).fold(1.0, f64::max);
    let residuals: Vec<f64> = states.iter().map(|(w, r)| (-(&zh - &r.scale(*w)).min_eigenvalue()).max(asym).max(0.0)).collect();
    let holds = residuals.iter().all(|r| *r <= tol * scale);
    Ok(StateOptimality { holds, residuals })
}

/// Projector onto the eigenvectors of `λρ₁ − (1−λ)ρ₂` with eigenvalue above
/// the cutoff, and its complement.
pub fn helstrom(rho1: &HermitianOperator, rho2: &HermitianOperator, lambda: f64) -> Result<PovmSet, DiscriminationError> {
    check_lambda(lambda)?;
    if rho1.dim() != rho2.dim() {
        return Err(DiscriminationError::InvalidScheme(format!("state dimensions {} and {}", rho1.dim(), rho2.dim())));
    }
    let delta = &rho1.scale(lambda) - &rho2.scale(1.0 - lambda);
    let m1 = delta.map_spectrum(|x| if x > HELSTROM_CUTOFF { 1.0 } else { 0.0 });
    let m2 = &HermitianOperator::identity(rho1.dim()) - &m1;
    Ok(PovmSet::with_tolerance(vec![m1, m2], 1e-9)?)
}

/// `Δ_λ = λ C(Φ₁) − (1−λ) C(Φ₂)`.
pub fn delta_lambda(ch1: &QuantumChannel, ch2: &QuantumChannel, lambda: f64) -> Result<HermitianOperator, DiscriminationError> {
    check_lambda(lambda)?;
    if ch1.dims() != ch2.dims() {
        return Err(DiscriminationError::DimensionMismatch { expected: ch1.dims(), found: ch2.dims() });
    }
    Ok(&ch1.choi().scale(lambda) - &ch2.choi().scale(1.0 - lambda))
}

/// `½(1 + Tr|Δ_λ| / d_H)`.
pub fn p_mei_two(ch1: &QuantumChannel, ch2: &QuantumChannel, lambda: f64) -> Result<f64, DiscriminationError> {
    let delta = delta_lambda(ch1, ch2, lambda)?;
    Ok(0.5 * (1.0 + delta.trace_norm() / ch1.dim_in() as f64))
}

#[derive(Debug, Clone)]
pub struct MeiCheck {
    pub holds: bool,
    /// `‖D − (Tr D / d_H) I‖` with `D = Tr_K|Δ_λ|`.
    pub deviation: f64,
    pub reduced_abs: HermitianOperator,
}

/// Whether `Tr_K|Δ_λ| ∝ I`, tested as `deviation ≤ tol·(1 + ‖D‖)`.
pub fn mei_condition(ch1: &QuantumChannel, ch2: &QuantumChannel, lambda: f64, tol: f64) -> Result<MeiCheck, DiscriminationError> {
    let delta = delta_lambda(ch1, ch2, lambda)?;
    let d = partial_trace(&delta.abs(), ch1.dims(), Factor::First)?;
    let deviation = d.deviation_from_scalar();
    Ok(MeiCheck { holds: deviation <= tol * (1.0 + d.op_norm()), deviation, reduced_abs: d })
}

#[derive(Debug, Clone)]
pub struct MeiSolution {
    pub p_mei: f64,
    /// `Z = Σ_i λ_i C(Φ_i) M_i` (Hermitian part).
    pub z: HermitianOperator,
    pub povm: PovmSet,
}

/// Optimal success probability with the maximally entangled input.
pub fn p_mei_multi(prob: &DiscriminationProblem) -> Result<MeiSolution, DiscriminationError> {
    let dims = prob.dims();
    let dh = dims.dim_in as f64;
    let states: Vec<(f64, HermitianOperator)> =
        prob.items().iter().map(|(w, ch)| (*w, ch.choi().scale(1.0 / dh))).collect();
    let povm = if prob.len() == 2 {
        helstrom(&states[0].1, &states[1].1, states[0].0)?
    } else {
        optimal_state_povm(&states)?
    };
    let mut z = CMatrix::zeros(dims.total(), dims.total());
    for ((w, ch), m) in prob.items().iter().zip(povm.effects()) {
        z = z + (ch.choi().matrix() * m.matrix()).scale_re(*w);
    }
    let z = HermitianOperator::new(z);
    Ok(MeiSolution { p_mei: z.trace() / dh, z, povm })
}

/// Optimal POVM for a state ensemble via the SDP.
///
/// Interior-point effects are accurate only to about the square root of the
/// duality gap, while the dual `Y` is accurate to the gap itself. The effects
/// are therefore re-fitted inside `ker(Y − λ_iρ_i)` so that `Σ M_i = I`
/// exactly; if that fails they are clamped to the PSD cone and renormalized
/// with `M_i ← S^{-1/2} M_i S^{-1/2}`, `S = Σ M_i`.
pub fn optimal_state_povm(states: &[(f64, HermitianOperator)]) -> Result<PovmSet, DiscriminationError> {
    let problem = sdp::build_state_povm_sdp(states)?;
    let sol = sdp::solve(&problem);
    if sol.status != SolverStatus::Optimal {
        return Err(DiscriminationError::Solver(sol.status));
    }
    let y = problem.dual_operator(&sol.dual_y, 0);
    if let Some(povm) = refit_in_kernels(states, &y, &sol.primal_x) {
        return Ok(povm);
    }
    let clamped: Vec<HermitianOperator> = sol.primal_x.iter().map(|m| m.positive_part()).collect();
    let d = clamped[0].dim();
    let sum = clamped.iter().fold(HermitianOperator::zeros(d), |acc, m| &acc + m);
    let fix = sum.pinv_sqrt(0.0);
    let effects = clamped.iter().map(|m| m.congruence(fix.matrix())).collect();
    Ok(PovmSet::with_tolerance(effects, 1e-9)?)
}

/// Effects supported on `ker(Y − λ_iρ_i)`, fitted so that `Σ M_i = I`.
///
/// The interior-point primal is only accurate to about the square root of the
/// gap, so the kernels are used as a starting point for Gauss-Newton on
/// `(Y − λ_iρ_i)U_i = 0`, `Σ U_iU_i† = I` with `M_i = U_iU_i†`.
fn refit_in_kernels(states: &[(f64, HermitianOperator)], y: &HermitianOperator, raw: &[HermitianOperator]) -> Option<PovmSet> {
    let d = y.dim();
    let threshold = 1e-7 * (1.0 + y.op_norm());
    let mut factors = Vec::with_capacity(states.len());
    for ((w, rho), m) in states.iter().zip(raw) {
        let eig = (y - &rho.scale(*w)).eig().ok()?;
        let cols: Vec<usize> = (0..d).filter(|&k| eig.values[k] <= threshold).collect();
        let v = CMatrix::from_fn(d, cols.len(), |r, c| eig.vectors[(r, cols[c])]);
        let n = HermitianOperator::new(&(&v.adjoint() * m.matrix()) * &v).sqrt_psd();
        factors.push(&v * n.matrix());
    }
    if factors.iter().all(|u| u.cols() == 0) {
        return None;
    }
    let factors = kkt_polish(states, y, factors)?;
    let effects: Vec<HermitianOperator> = factors.iter().map(|u| HermitianOperator::new(u * &u.adjoint())).collect();
    PovmSet::with_tolerance(effects, 1e-9).ok()
}

struct KktLayout {
    d: usize,
    ranks: Vec<usize>,
    basis: Vec<HermitianOperator>,
}

impl KktLayout {
    fn len(&self) -> usize {
        self.d * self.d + 2 * self.d * self.ranks.iter().sum::<usize>()
    }

    fn pack(&self, y: &HermitianOperator, factors: &[CMatrix]) -> DVector<f64> {
        let mut x: Vec<f64> = self.basis.iter().map(|b| b.inner(y)).collect();
        for u in factors {
            for r in 0..self.d {
                for c in 0..u.cols() {
                    x.push(u[(r, c)].re);
                    x.push(u[(r, c)].im);
                }
            }
        }
        DVector::from_vec(x)
    }

    fn unpack(&self, x: &DVector<f64>) -> (CMatrix, Vec<CMatrix>) {
        let d = self.d;
        let mut y = CMatrix::zeros(d, d);
        for (k, b) in self.basis.iter().enumerate() {
            y = y + b.matrix().scale_re(x[k]);
        }
        let mut at = d * d;
        let mut factors = Vec::with_capacity(self.ranks.len());
        for &r in &self.ranks {
            factors.push(CMatrix::from_fn(d, r, |i, j| {
                let k = at + 2 * (i * r + j);
                C64::new(x[k], x[k + 1])
            }));
            at += 2 * d * r;
        }
        (y, factors)
    }

    fn residual(&self, states: &[(f64, HermitianOperator)], x: &DVector<f64>) -> DVector<f64> {
        let (y, factors) = self.unpack(x);
        let mut out = Vec::with_capacity(self.len());
        let mut sum = CMatrix::identity(self.d).scale_re(-1.0);
        for ((w, rho), u) in states.iter().zip(&factors) {
            let r = &(&y - &rho.matrix().scale_re(*w)) * u;
            out.extend(r.data().iter().flat_map(|z| [z.re, z.im]));
            sum = sum + u * &u.adjoint();
        }
        let sum = HermitianOperator::new(sum);
        out.extend(self.basis.iter().map(|b| b.inner(&sum)));
        DVector::from_vec(out)
    }
}

fn kkt_polish(states: &[(f64, HermitianOperator)], y: &HermitianOperator, factors: Vec<CMatrix>) -> Option<Vec<CMatrix>> {
    let d = y.dim();
    let layout = KktLayout { d, ranks: factors.iter().map(|u| u.cols()).collect(), basis: matrix_unit_basis(d) };
    let scale = 1.0 + states.iter().map(|(w, r)| w * r.op_norm()).fold(0.0, f64::max);
    let x = gauss_newton(layout.pack(y, &factors), |x| layout.residual(states, x), scale)?;
    Some(layout.unpack(&x).1)
}

/// Gauss-Newton for `r(x) = 0`. The residuals here are at most quadratic in
/// `x`, so central differences with unit step give the exact Jacobian.
/// Accepts `‖r‖ ≤ 1e-11·scale`.
fn gauss_newton(mut x: DVector<f64>, residual: impl Fn(&DVector<f64>) -> DVector<f64>, scale: f64) -> Option<DVector<f64>> {
    let n = x.len();
    let mut r = residual(&x);
    for _ in 0..30 {
        if r.norm() <= 1e-14 * scale {
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), n);
        for k in 0..n {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[k] += 1.0;
            minus[k] -= 1.0;
            let col = (residual(&plus) - residual(&minus)) / 2.0;
            jac.set_column(k, &col);
        }
        let svd = jac.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max();
        let mut step = svd.solve(&(-&r), cutoff).ok()?;
        // backtrack when the full step overshoots
        let mut accepted = None;
        for _ in 0..20 {
            let next = &x + &step;
            let next_r = residual(&next);
            if next_r.norm() < r.norm() {
                accepted = Some((next, next_r));
                break;
            }
            step /= 2.0;
        }
        let Some((next, next_r)) = accepted else { break };
        x = next;
        r = next_r;
    }
    (r.norm() <= 1e-11 * scale).then_some(x)
}

/// Everything the bounds theorem says about a problem.
#[derive(Debug, Clone)]
pub struct DiscriminationReport {
    pub p_mei: f64,
    /// `‖Tr_K Z‖`.
    pub upper_bound: f64,
    /// Optimum of the tester SDP; `None` when not requested or not converged.
    pub p_opt: Option<f64>,
    pub solver_status: Option<SolverStatus>,
    /// `Tr_K Z ∝ I`.
    pub mei_holds: bool,
    /// `‖p_MEI⁻¹ Tr_K Z − I‖`.
    pub epsilon: f64,
    pub z: HermitianOperator,
    pub reduced_z: HermitianOperator,
}

pub fn bounds_report(prob: &DiscriminationProblem) -> Result<DiscriminationReport, DiscriminationError> {
    bounds_report_with(prob, true)
}

pub fn bounds_report_with(prob: &DiscriminationProblem, solve: bool) -> Result<DiscriminationReport, DiscriminationError> {
    let dims = prob.dims();
    let mei = p_mei_multi(prob)?;
    let reduced_z = partial_trace(&mei.z, dims, Factor::First)?;
    let upper_bound = reduced_z.op_norm();
    let epsilon = (&reduced_z.scale(1.0 / mei.p_mei) - &HermitianOperator::identity(dims.dim_in)).op_norm();
    let mei_holds = reduced_z.deviation_from_scalar() <= PROPORTIONALITY_TOLERANCE * (1.0 + upper_bound);
    let (p_opt, solver_status) = if solve {
        let sol = sdp::solve(&sdp::build_discrimination_primal(prob));
        let value = (sol.status == SolverStatus::Optimal).then_some(sol.primal_value);
        (value, Some(sol.status))
    } else {
        (None, None)
    };
    Ok(DiscriminationReport { p_mei: mei.p_mei, upper_bound, p_opt, solver_status, mei_holds, epsilon, z: mei.z, reduced_z })
}

/// Optimal tester and dual certificate from the SDP.
#[derive(Debug, Clone)]
pub struct OptimalDiscrimination {
    pub p_opt: f64,
    pub tester: ProcessPOVM,
    /// `λ₀ = Tr_K`-constant of the dual operator; equals the dual value.
    pub lambda0: f64,
    /// `Y = λ₀ C(Φ₀)`.
    pub dual: HermitianOperator,
    pub gap: f64,
}

pub fn solve_discrimination(prob: &DiscriminationProblem) -> Result<OptimalDiscrimination, DiscriminationError> {
    let dims = prob.dims();
    let problem = sdp::build_discrimination_primal(prob);
    let sol = sdp::solve(&problem);
    if sol.status != SolverStatus::Optimal {
        return Err(DiscriminationError::Solver(sol.status));
    }
    let (tester, dual, y0) = match refit_tester(prob, &sol.dual_y, &sol.primal_x) {
        Some(polished) => polished,
        None => (polish_tester(&sol.primal_x, dims)?, problem.dual_operator(&sol.dual_y, 0), sol.dual_y[0]),
    };
    let lambda0 = y0 * dims.dim_out as f64;
    Ok(OptimalDiscrimination { p_opt: sol.primal_value, tester, lambda0, dual, gap: sol.gap })
}

/// Unknown count above which the tester polish is skipped.
const TESTER_POLISH_LIMIT: usize = 1500;

/// KKT system of the tester SDP with `F_i = U_iU_i†`:
/// `(Y − λ_iC_i)U_i = 0`, `Σ U_iU_i† = I ⊗ σ` and `Tr σ = 1`, where
/// `Y = Σ_j y_j A_j` keeps the structure of the dual.
struct TesterKkt<'a> {
    prob: &'a DiscriminationProblem,
    dual_basis: Vec<HermitianOperator>,
    rows: Vec<HermitianOperator>,
    sigma_basis: Vec<HermitianOperator>,
    ranks: Vec<usize>,
}

impl TesterKkt<'_> {
    fn n(&self) -> usize {
        self.prob.dims().total()
    }

    fn len(&self) -> usize {
        self.dual_basis.len() + 2 * self.n() * self.ranks.iter().sum::<usize>() + self.sigma_basis.len()
    }

    fn pack(&self, y: &[f64], factors: &[CMatrix], sigma: &HermitianOperator) -> DVector<f64> {
        let mut x = y.to_vec();
        for u in factors {
            for r in 0..u.rows() {
                for c in 0..u.cols() {
                    x.push(u[(r, c)].re);
                    x.push(u[(r, c)].im);
                }
            }
        }
        x.extend(self.sigma_basis.iter().map(|b| b.inner(sigma)));
        DVector::from_vec(x)
    }

    fn unpack(&self, x: &DVector<f64>) -> (HermitianOperator, Vec<CMatrix>, HermitianOperator) {
        let n = self.n();
        let mut y = CMatrix::zeros(n, n);
        for (k, a) in self.dual_basis.iter().enumerate() {
            y = y + a.matrix().scale_re(x[k]);
        }
        let mut at = self.dual_basis.len();
        let mut factors = Vec::with_capacity(self.ranks.len());
        for &r in &self.ranks {
            factors.push(CMatrix::from_fn(n, r, |i, j| {
                let k = at + 2 * (i * r + j);
                C64::new(x[k], x[k + 1])
            }));
            at += 2 * n * r;
        }
        let d = self.prob.dims().dim_in;
        let mut sigma = CMatrix::zeros(d, d);
        for (k, b) in self.sigma_basis.iter().enumerate() {
            sigma = sigma + b.matrix().scale_re(x[at + k]);
        }
        (HermitianOperator::new(y), factors, HermitianOperator::new(sigma))
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let (y, factors, sigma) = self.unpack(x);
        let mut out = Vec::new();
        let mut sum = HermitianOperator::identity(self.prob.dims().dim_out).kron(&sigma).scale(-1.0).matrix().clone();
        for (i, u) in factors.iter().enumerate() {
            let r = (&y - &self.prob.weighted_choi(i)).matrix() * u;
            out.extend(r.data().iter().flat_map(|z| [z.re, z.im]));
            sum = sum + u * &u.adjoint();
        }
        let sum = HermitianOperator::new(sum);
        out.extend(self.rows.iter().map(|b| b.inner(&sum)));
        out.push(sigma.trace() - 1.0);
        DVector::from_vec(out)
    }
}

/// Tester confined to `ker(Y − λ_iC_i)`, polished jointly with the dual so
/// that feasibility and complementary slackness hold to roundoff.
///
/// The interior-point primal is accurate only to about the square root of the
/// gap, which leaves `(Y − λ_iC_i)F_i` of that size. Returns the tester, `Y`
/// and the coefficient of the identity in `Y`.
fn refit_tester(prob: &DiscriminationProblem, dual_y: &[f64], raw: &[HermitianOperator]) -> Option<(ProcessPOVM, HermitianOperator, f64)> {
    let dims = prob.dims();
    let n = dims.total();
    let mut dual_basis = vec![HermitianOperator::identity(n)];
    dual_basis.extend(sdp::traceless_output_basis(dims));
    let y0 = dual_basis.iter().zip(dual_y).fold(HermitianOperator::zeros(n), |acc, (a, c)| &acc + &a.scale(*c));
    let threshold = 1e-7 * (1.0 + y0.op_norm());
    let mut factors = Vec::with_capacity(raw.len());
    for (i, f) in raw.iter().enumerate() {
        let eig = (&y0 - &prob.weighted_choi(i)).eig().ok()?;
        let cols: Vec<usize> = (0..n).filter(|&k| eig.values[k] <= threshold).collect();
        let v = CMatrix::from_fn(n, cols.len(), |r, c| eig.vectors[(r, cols[c])]);
        let g = HermitianOperator::new(&(&v.adjoint() * f.matrix()) * &v).positive_part().sqrt_psd();
        factors.push(&v * g.matrix());
    }
    let sum = raw.iter().fold(HermitianOperator::zeros(n), |acc, f| &acc + f);
    let sigma = partial_trace(&sum, dims, Factor::First).ok()?.scale(1.0 / dims.dim_out as f64);
    let kkt = TesterKkt {
        prob,
        rows: matrix_unit_basis(n),
        sigma_basis: matrix_unit_basis(dims.dim_in),
        ranks: factors.iter().map(|u| u.cols()).collect(),
        dual_basis,
    };
    if kkt.len() > TESTER_POLISH_LIMIT {
        return None;
    }
    let scale = 1.0 + y0.op_norm();
    let x = gauss_newton(kkt.pack(dual_y, &factors, &sigma), |x| kkt.residual(x), scale)?;
    let (y, factors, _) = kkt.unpack(&x);
    let effects = factors.iter().map(|u| HermitianOperator::new(u * &u.adjoint())).collect();
    Some((ProcessPOVM::new(effects, dims).ok()?, y, x[0]))
}

/// Clamps to the PSD cone and maps `S = Σ F_i` exactly onto `I ⊗ σ`.
fn polish_tester(raw: &[HermitianOperator], dims: BipartiteDims) -> Result<ProcessPOVM, DiscriminationError> {
    let clamped: Vec<HermitianOperator> = raw.iter().map(|f| f.positive_part()).collect();
    let sum = clamped.iter().fold(HermitianOperator::zeros(dims.total()), |acc, f| &acc + f);
    let sigma = partial_trace(&sum, dims, Factor::First)?.scale(1.0 / dims.dim_out as f64);
    let sigma = sigma.scale(1.0 / sigma.trace());
    let target = HermitianOperator::identity(dims.dim_out).kron(&sigma.sqrt_psd());
    let t = target.matrix() * sum.pinv_sqrt(1e-14).matrix();
    let effects = clamped.iter().map(|f| f.congruence(&t)).collect();
    ProcessPOVM::new(effects, dims)
}

/// `‖Φ_λ‖_⋄` from the diamond-norm SDP.
pub fn diamond_norm(ch1: &QuantumChannel, ch2: &QuantumChannel, lambda: f64) -> Result<f64, DiscriminationError> {
    let delta = delta_lambda(ch1, ch2, lambda)?;
    let sol = sdp::solve(&sdp::build_diamond_sdp(&delta, ch1.dims())?);
    if sol.status != SolverStatus::Optimal {
        return Err(DiscriminationError::Solver(sol.status));
    }
    Ok(2.0 * sol.primal_value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiamondBounds {
    /// `d_H⁻¹ ‖C(Φ_λ)‖₁`.
    pub lower: f64,
    /// `‖Tr_K |C(Φ_λ)|‖`.
    pub new_upper: f64,
    /// `‖C(Φ_λ)‖₁`.
    pub loose_upper: f64,
    /// `‖(d_H/‖C‖₁) Tr_K|C| − I‖`; absent when `C = 0`.
    pub epsilon_prime: Option<f64>,
}

pub fn diamond_norm_bounds(ch1: &QuantumChannel, ch2: &QuantumChannel, lambda: f64) -> Result<DiamondBounds, DiscriminationError> {
    let c = delta_lambda(ch1, ch2, lambda)?;
    let dh = ch1.dim_in() as f64;
    let abs = c.abs();
    let trace_norm = abs.trace();
    let reduced = partial_trace(&abs, ch1.dims(), Factor::First)?;
    let new_upper = reduced.op_norm();
    let epsilon_prime = (trace_norm > 0.0).then(|| {
        (&reduced.scale(dh / trace_norm) - &HermitianOperator::identity(ch1.dim_in())).op_norm()
    });
    Ok(DiamondBounds { lower: trace_norm / dh, new_upper, loose_upper: trace_norm, epsilon_prime })
}

#[derive(Debug, Clone)]
pub struct CovariantBound {
    /// `k_i = Tr(P_iᵗ Tr_K|Δ_λ|) / Tr P_i`.
    pub k: Vec<f64>,
    /// `½(1 + max_i k_i)`.
    pub bound: f64,
    /// `½(1 + d⁻¹ Σ_i Tr(P_i) k_i)`.
    pub p_mei: f64,
    pub residual: f64,
}

/// Upper bound for channels whose `Tr_K|Δ_λ|` is constant on the blocks
/// `P_iᵗ` of a reducible representation.
pub fn covariant_upper_bound(
    ch1: &QuantumChannel,
    ch2: &QuantumChannel,
    lambda: f64,
    projectors: &[HermitianOperator],
) -> Result<CovariantBound, DiscriminationError> {
    let d = ch1.dim_in();
    let mut sum = HermitianOperator::zeros(d);
    for (i, p) in projectors.iter().enumerate() {
        if p.dim() != d {
            return Err(DiscriminationError::InvalidProjectors(format!("projector {i} has dimension {}", p.dim())));
        }
        let idem = (p.matrix() * p.matrix() - p.matrix().clone()).max_abs();
        if idem > 1e-9 {
            return Err(DiscriminationError::InvalidProjectors(format!("operator {i} is not a projection ({idem:e})")));
        }
        sum = &sum + p;
    }
    if projectors.is_empty() || (&sum - &HermitianOperator::identity(d)).matrix().max_abs() > 1e-9 {
        return Err(DiscriminationError::InvalidProjectors("projections do not sum to the identity".into()));
    }
    let delta = delta_lambda(ch1, ch2, lambda)?;
    let reduced = partial_trace(&delta.abs(), ch1.dims(), Factor::First)?;
    let mut k = Vec::with_capacity(projectors.len());
    let mut rebuilt = HermitianOperator::zeros(d);
    for p in projectors {
        let pt = p.transpose();
        let ki = pt.inner(&reduced) / p.trace();
        rebuilt = &rebuilt + &pt.scale(ki);
        k.push(ki);
    }
    let residual = (&reduced - &rebuilt).op_norm();
    if residual > 1e-8 * (1.0 + reduced.op_norm()) {
        return Err(DiscriminationError::DecompositionFailed { residual });
    }
    let kmax = k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let p_mei = 0.5 * (1.0 + projectors.iter().zip(&k).map(|(p, ki)| p.trace() * ki).sum::<f64>() / d as f64);
    Ok(CovariantBound { bound: 0.5 * (1.0 + kmax), k, p_mei, residual })
}
