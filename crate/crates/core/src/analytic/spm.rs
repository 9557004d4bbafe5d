use crate::channels::{measurement_channel, PovmSet, QuantumChannel};
use crate::discrimination::DiscriminationProblem;
use crate::linalg::{CMatrix, HermitianOperator, PureState, C64};

use super::{rank1_abs, AnalyticError, UNITARY_TOLERANCE};

/// `1 − |W_ii|²` at or below this means `P_{ξ_i} = P_{η_i}`; `c_i` is then 0.
const COINCIDENCE_CUTOFF: f64 = 1e-14;
/// Entry tolerance for the dimension-4 Hadamard template.
const TEMPLATE_TOLERANCE: f64 = 1e-9;

/// Two orthonormal bases `{ξ_i}`, `{η_i}` defining the measurements
/// `M_i = P_{ξ_i}` and `N_i = P_{η_i}`.
#[derive(Debug, Clone)]
pub struct SpmProblem {
    xi_basis: Vec<PureState>,
    eta_basis: Vec<PureState>,
    dim: usize,
}

impl SpmProblem {
    pub fn new(xi_basis: Vec<PureState>, eta_basis: Vec<PureState>) -> Result<Self, AnalyticError> {
        let dim = xi_basis.len();
        if dim == 0 || eta_basis.len() != dim {
            return Err(AnalyticError::InvalidBasis(format!("basis sizes {} and {}", dim, eta_basis.len())));
        }
        for basis in [&xi_basis, &eta_basis] {
            for (i, u) in basis.iter().enumerate() {
                if u.dim() != dim {
                    return Err(AnalyticError::InvalidBasis(format!("vector {i} has dimension {}", u.dim())));
                }
                for (j, v) in basis.iter().enumerate().take(i + 1) {
                    let target = if i == j { 1.0 } else { 0.0 };
                    if (u.inner(v) - target).norm() > UNITARY_TOLERANCE {
                        return Err(AnalyticError::InvalidBasis(format!("vectors {j}, {i} not orthonormal")));
                    }
                }
            }
        }
        Ok(Self { xi_basis, eta_basis, dim })
    }

    /// `ξ` the computational basis and `η_j` the `j`-th column of `w`, so
    /// that `⟨ξ_i, η_j⟩ = w_ij`.
    pub fn from_overlap(w: &CMatrix) -> Result<Self, AnalyticError> {
        let defect = w.unitarity_defect();
        if !w.is_square() || defect > UNITARY_TOLERANCE {
            return Err(AnalyticError::NotUnitary { defect });
        }
        let d = w.rows();
        let xi = (0..d).map(|i| PureState::basis(d, i)).collect();
        let eta = (0..d).map(|j| PureState::new(w.column(j))).collect::<Result<_, _>>()?;
        Self::new(xi, eta)
    }

    /// Computational basis against the basis with `ξ₁, ξ₂` replaced by
    /// `(ξ₁ ± ξ₂)/√2`.
    pub fn rotated_pair(d: usize) -> Result<Self, AnalyticError> {
        if d < 2 {
            return Err(AnalyticError::InvalidBasis(format!("dimension {d} < 2")));
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w = CMatrix::from_fn(d, d, |r, c| match (r, c) {
            (0, 0) | (1, 0) | (0, 1) => C64::new(s, 0.0),
            (1, 1) => C64::new(-s, 0.0),
            _ if r == c => C64::new(1.0, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        Self::from_overlap(&w)
    }

    pub fn xi_basis(&self) -> &[PureState] {
        &self.xi_basis
    }

    pub fn eta_basis(&self) -> &[PureState] {
        &self.eta_basis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The measurement channels `Φ_M`, `Φ_N`.
    pub fn channels(&self) -> Result<(QuantumChannel, QuantumChannel), AnalyticError> {
        let povm = |b: &[PureState]| PovmSet::new(b.iter().map(HermitianOperator::projector).collect());
        Ok((measurement_channel(&povm(&self.xi_basis)?)?, measurement_channel(&povm(&self.eta_basis)?)?))
    }

    pub fn discrimination_problem(&self, lambda: f64) -> Result<DiscriminationProblem, AnalyticError> {
        let (a, b) = self.channels()?;
        Ok(DiscriminationProblem::two(a, b, lambda)?)
    }
}

#[derive(Debug, Clone)]
pub struct SpmDerived {
    /// `W_ij = ⟨ξ_i, η_j⟩` after rephasing `η` so that `W_ii ≥ 0`.
    pub w: CMatrix,
    /// `c_i = √(1 − |W_ii|²)`.
    pub c: Vec<f64>,
    /// `(2/d) Σ c_i`.
    pub d_const: f64,
    /// Whether some `η_j` had to be rephased.
    pub phase_fixed: bool,
}

pub fn spm_derive(p: &SpmProblem) -> SpmDerived {
    let d = p.dim;
    let mut w = CMatrix::from_fn(d, d, |i, j| p.xi_basis[i].inner(&p.eta_basis[j]));
    let phase_fixed = rephase_diagonal(&mut w);
    let c: Vec<f64> = (0..d)
        .map(|i| {
            let gap = 1.0 - w[(i, i)].norm_sqr();
            if gap <= COINCIDENCE_CUTOFF {
                0.0
            } else {
                gap.sqrt()
            }
        })
        .collect();
    let d_const = 2.0 * c.iter().sum::<f64>() / d as f64;
    SpmDerived { w, c, d_const, phase_fixed }
}

/// Multiplies column `j` by the phase making `w_jj` real and nonnegative.
fn rephase_diagonal(w: &mut CMatrix) -> bool {
    let mut changed = false;
    for j in 0..w.cols() {
        let x = w[(j, j)];
        if x.norm() == 0.0 || (x.im == 0.0 && x.re > 0.0) {
            continue;
        }
        let phase = x.conj() / x.norm();
        for r in 0..w.rows() {
            w[(r, j)] *= phase;
        }
        w[(j, j)] = C64::new(x.norm(), 0.0);
        changed = true;
    }
    changed
}

#[derive(Debug, Clone)]
pub struct SpmMeiCheck {
    pub holds: bool,
    /// Distance of `Σ_i |λM_i − (1−λ)N_i|` from the nearest multiple of `I`.
    pub deviation: f64,
    pub sum: HermitianOperator,
    /// The matrix-equation form, available at `λ = ½` with all `c_i > 0`.
    pub matrix_equation: Option<SpmMatrixResidual>,
}

pub fn spm_mei(p: &SpmProblem, lambda: f64, tol: f64) -> Result<bool, AnalyticError> {
    Ok(spm_mei_detailed(p, lambda, tol)?.holds)
}

pub fn spm_mei_detailed(p: &SpmProblem, lambda: f64, tol: f64) -> Result<SpmMeiCheck, AnalyticError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(AnalyticError::LambdaOutOfRange(lambda));
    }
    let mut sum = HermitianOperator::zeros(p.dim);
    for (xi, eta) in p.xi_basis.iter().zip(&p.eta_basis) {
        sum = &sum + &rank1_abs(eta, xi, lambda);
    }
    let deviation = sum.deviation_from_scalar();
    let holds = deviation <= tol * (1.0 + sum.op_norm());
    let matrix_equation = if lambda == 0.5 { spm_matrix_equation_residual(&spm_derive(p)).ok() } else { None };
    Ok(SpmMeiCheck { holds, deviation, sum, matrix_equation })
}

/// Residuals of `dI − C = (W − diag W) C⁻¹ (W* − diag W*)` and of its split
/// into identity and traceless parts.
#[derive(Debug, Clone)]
pub struct SpmMatrixResidual {
    /// Frobenius norm of `dI − C − (W − diag W) C⁻¹ (W* − diag W*)`.
    pub residual: f64,
    /// `W C⁻¹ W* + C⁻¹`.
    pub lhs1: HermitianOperator,
    /// `C⁻¹ √(I − C²) W* + W C⁻¹ √(I − C²)`.
    pub lhs2: HermitianOperator,
    /// `2 d^{-1/2} Σ c_i⁻¹`.
    pub beta: f64,
    /// `2 d^{-1/2} Σ (c_i⁻¹ − c_i)`.
    pub b: f64,
    /// `‖(lhs1 − β d^{-1/2} I) − (lhs2 − b d^{-1/2} I)‖_F`.
    pub traceless_gap: f64,
}

pub fn spm_matrix_equation_residual(d: &SpmDerived) -> Result<SpmMatrixResidual, AnalyticError> {
    if let Some(index) = d.c.iter().position(|&c| c == 0.0) {
        return Err(AnalyticError::CoincidingProjections { index });
    }
    let n = d.c.len();
    let w = &d.w;
    let c = CMatrix::from_real_diag(&d.c);
    let c_inv = CMatrix::from_real_diag(&d.c.iter().map(|x| 1.0 / x).collect::<Vec<_>>());
    let root = CMatrix::from_real_diag(&d.c.iter().map(|x| (1.0 - x * x).max(0.0).sqrt()).collect::<Vec<_>>());
    let off = w - &CMatrix::from_diag(&w.diagonal());
    let rhs = &(&off * &c_inv) * &off.adjoint();
    let lhs = &CMatrix::identity(n).scale_re(d.d_const) - &c;
    let residual = (&lhs - &rhs).frobenius_norm();

    let lhs1 = HermitianOperator::new(&(&(w * &c_inv) * &w.adjoint()) + &c_inv);
    let half = &(w * &c_inv) * &root;
    let lhs2 = HermitianOperator::new(&half.adjoint() + &half);
    let scale = 2.0 / (n as f64).sqrt();
    let beta = scale * d.c.iter().map(|x| 1.0 / x).sum::<f64>();
    let b = scale * d.c.iter().map(|x| 1.0 / x - x).sum::<f64>();
    let id = CMatrix::identity(n);
    let l1 = lhs1.matrix() - &id.scale_re(beta / (n as f64).sqrt());
    let l2 = lhs2.matrix() - &id.scale_re(b / (n as f64).sqrt());
    let traceless_gap = (&l1 - &l2).frobenius_norm();
    Ok(SpmMatrixResidual { residual, lhs1, lhs2, beta, b, traceless_gap })
}

/// Outcome of the constant-`c` criterion.
#[derive(Debug, Clone)]
pub enum ConstCOutcome {
    NotSatisfiableOddDim,
    /// `W = √(1−c²) I + icG` with `G` hollow, Hermitian and unitary.
    SatisfiedG(CMatrix),
    /// `c = 1`: every `η_i` is orthogonal to `ξ_i`.
    SatisfiedAllOrthogonal,
    NotSatisfied,
}

impl ConstCOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, Self::SatisfiedG(_) | Self::SatisfiedAllOrthogonal)
    }
}

pub fn spm_const_c_criterion(d: &SpmDerived, tol: f64) -> Result<ConstCOutcome, AnalyticError> {
    let max = d.c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = d.c.iter().copied().fold(f64::INFINITY, f64::min);
    if max - min > tol {
        return Err(AnalyticError::ConstCViolated { spread: max - min });
    }
    if let Some(index) = d.c.iter().position(|&c| c == 0.0) {
        return Err(AnalyticError::CoincidingProjections { index });
    }
    let n = d.c.len();
    let c = d.c.iter().sum::<f64>() / n as f64;
    if (1.0 - c).abs() <= tol {
        return Ok(ConstCOutcome::SatisfiedAllOrthogonal);
    }
    if n % 2 == 1 {
        return Ok(ConstCOutcome::NotSatisfiableOddDim);
    }
    let s = (1.0 - c * c).sqrt();
    let id = CMatrix::identity(n);
    let g = (&d.w - &id.scale_re(s)).scale(C64::new(0.0, -1.0 / c));
    let hollow = g.diagonal().iter().all(|x| x.norm() <= tol);
    let hermitian = (&g - &g.adjoint()).max_abs() <= tol;
    let unitary = g.unitarity_defect() <= tol;
    let sum = (&(&d.w + &d.w.adjoint()) - &id.scale_re(2.0 * s)).max_abs();
    if hollow && hermitian && unitary && sum <= tol {
        Ok(ConstCOutcome::SatisfiedG(g))
    } else {
        Ok(ConstCOutcome::NotSatisfied)
    }
}

/// The dimension-4 template `2W = I + i√3 G` parametrised by unimodular
/// `a, b, c`.
pub fn dim4_template(a: C64, b: C64, c: C64) -> CMatrix {
    let i = C64::i();
    let one = C64::new(1.0, 0.0);
    let (ac, bc, cc) = (a.conj(), b.conj(), c.conj());
    let rows = [
        [one, bc * c, i * bc, i * ac],
        [-b * cc, one, i * cc, -i * ac * b * cc],
        [i * b, i * c, one, ac * b],
        [i * a, -i * a * bc * c, -a * bc, one],
    ];
    CMatrix::from_fn(4, 4, |r, col| rows[r][col] * 0.5)
}

/// Whether a 4×4 MUB overlap matrix has the form `2W = D₁H_ℝD₂`.
pub fn spm_dim4_hadamard_check(w: &CMatrix) -> Result<bool, AnalyticError> {
    if w.rows() != 4 || w.cols() != 4 {
        return Err(AnalyticError::InvalidBasis(format!("expected a 4×4 matrix, found {}×{}", w.rows(), w.cols())));
    }
    let defect = w.unitarity_defect();
    if defect > UNITARY_TOLERANCE {
        return Err(AnalyticError::NotUnitary { defect });
    }
    for r in 0..4 {
        for col in 0..4 {
            if (w[(r, col)].norm() - 0.5).abs() > TEMPLATE_TOLERANCE {
                return Err(AnalyticError::NotMub { row: r, col });
            }
        }
    }
    let mut w = w.clone();
    rephase_diagonal(&mut w);
    let minus_i = C64::new(0.0, -2.0);
    let a = w[(3, 0)] * minus_i;
    let b = w[(2, 0)] * minus_i;
    let c = w[(2, 1)] * minus_i;
    Ok((&w - &dim4_template(a, b, c)).max_abs() <= TEMPLATE_TOLERANCE)
}
