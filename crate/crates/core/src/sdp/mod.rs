//! Semidefinite programs over block-diagonal Hermitian PSD cones.
//!
//! A problem is `max Σ_b Tr(C_b X_b)` subject to `Σ_b Tr(A_{j,b} X_b) = b_j`
//! and `X_b ⪰ 0`. Each complex block is embedded in the real symmetric cone
//! via `X ↦ [[Re X, −Im X], [Im X, Re X]]` with a factor ½ on costs and
//! constraints, so values and residuals are unchanged.

mod solver;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::discrimination::DiscriminationProblem;
use crate::linalg::{gell_mann_basis, matrix_unit_basis, BipartiteDims, CMatrix, HermitianOperator, C64};
use solver::{Part, RealConstraint, RealProblem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdpError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("block index {0} out of range")]
    BadBlock(usize),
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Target for relative gap, primal and dual infeasibility.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Fraction of the step to the cone boundary.
    pub step_fraction: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tolerance: 1e-13, max_iterations: 200, step_fraction: 0.9 }
    }
}

/// One linear constraint `Σ_b Tr(A_b X_b) = rhs`.
#[derive(Debug, Clone)]
pub struct SdpConstraint {
    pub parts: Vec<(usize, HermitianOperator)>,
    pub rhs: f64,
}

impl SdpConstraint {
    pub fn new(parts: Vec<(usize, HermitianOperator)>, rhs: f64) -> Self {
        Self { parts, rhs }
    }

    /// The same matrix in every listed block.
    pub fn replicated(blocks: impl IntoIterator<Item = usize>, a: &HermitianOperator, rhs: f64) -> Self {
        Self { parts: blocks.into_iter().map(|b| (b, a.clone())).collect(), rhs }
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    block_dims: Vec<usize>,
    cost: Vec<HermitianOperator>,
    constraints: Vec<SdpConstraint>,
}

impl SdpProblem {
    pub fn new(cost: Vec<HermitianOperator>, constraints: Vec<SdpConstraint>) -> Result<Self, SdpError> {
        let block_dims: Vec<usize> = cost.iter().map(|c| c.dim()).collect();
        for c in &constraints {
            for (b, a) in &c.parts {
                let n = *block_dims.get(*b).ok_or(SdpError::BadBlock(*b))?;
                if a.dim() != n {
                    return Err(SdpError::DimensionMismatch { expected: n, found: a.dim() });
                }
            }
        }
        Ok(Self { block_dims, cost, constraints })
    }

    pub fn single_block(cost: HermitianOperator, constraints: Vec<(HermitianOperator, f64)>) -> Result<Self, SdpError> {
        let constraints = constraints.into_iter().map(|(a, b)| SdpConstraint::new(vec![(0, a)], b)).collect();
        Self::new(vec![cost], constraints)
    }

    /// Total dimension `Σ_b n_b` of the Hermitian cone.
    pub fn cone_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn cost(&self) -> &[HermitianOperator] {
        &self.cost
    }

    pub fn constraints(&self) -> &[SdpConstraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// `Σ_b Tr(C_b X_b)`.
    pub fn objective(&self, x: &[HermitianOperator]) -> f64 {
        self.cost.iter().zip(x).map(|(c, x)| c.inner(x)).sum()
    }

    /// Euclidean norm of the constraint residual `b − A(X)`.
    pub fn primal_residual(&self, x: &[HermitianOperator]) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let ax: f64 = c.parts.iter().map(|(b, a)| a.inner(&x[*b])).sum();
                (c.rhs - ax).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ_j y_j A_{j,b}` restricted to block `b`.
    pub fn dual_operator(&self, y: &[f64], block: usize) -> HermitianOperator {
        let n = self.block_dims[block];
        let mut out = CMatrix::zeros(n, n);
        for (c, &yj) in self.constraints.iter().zip(y) {
            if yj == 0.0 {
                continue;
            }
            for (b, a) in &c.parts {
                if *b == block {
                    out = out + a.matrix().scale_re(yj);
                }
            }
        }
        HermitianOperator::new(out)
    }

    fn to_real(&self) -> RealProblem {
        RealProblem {
            blocks: self.block_dims.iter().map(|n| 2 * n).collect(),
            cost: self.cost.iter().map(|c| -embed_dense(c)).collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| RealConstraint {
                    parts: c.parts.iter().map(|(b, a)| Part { block: *b, entries: embed_sparse(a) }).collect(),
                })
                .collect(),
            rhs: self.constraints.iter().map(|c| c.rhs).collect(),
        }
    }
}

fn embed_dense(a: &HermitianOperator) -> DMatrix<f64> {
    let n = a.dim();
    let m = a.matrix();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        0.5 * match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (false, true) => z.im,
            (true, false) => -z.im,
        }
    })
}

fn embed_sparse(a: &HermitianOperator) -> Vec<(usize, usize, f64)> {
    let n = a.dim();
    let m = a.matrix();
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let z = m[(r, c)];
            if z.re != 0.0 {
                out.push((r, c, 0.5 * z.re));
                out.push((n + r, n + c, 0.5 * z.re));
            }
            if z.im != 0.0 {
                out.push((n + r, c, 0.5 * z.im));
                out.push((r, n + c, -0.5 * z.im));
            }
        }
    }
    out
}

fn extract(x: &DMatrix<f64>) -> HermitianOperator {
    let n = x.nrows() / 2;
    HermitianOperator::new(CMatrix::from_fn(n, n, |r, c| {
        C64::new(0.5 * (x[(r, c)] + x[(n + r, n + c)]), 0.5 * (x[(n + r, c)] - x[(r, n + c)]))
    }))
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Primal optimum, one operator per block.
    pub primal_x: Vec<HermitianOperator>,
    pub dual_y: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `dual_value − primal_value`.
    pub gap: f64,
    pub status: SolverStatus,
    pub iterations: usize,
    /// `‖b − A(X)‖ / (1 + ‖b‖)` at the returned iterate.
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolverStatus::Optimal
    }
}

pub fn solve(p: &SdpProblem) -> SdpSolution {
    solve_with(p, &SolveOptions::default())
}

pub fn solve_with(p: &SdpProblem, opts: &SolveOptions) -> SdpSolution {
    let real = p.to_real();
    let out = solver::solve_real(&real, opts);
    let primal_x: Vec<HermitianOperator> = out.x.iter().map(extract).collect();
    // the real solver minimizes −C; flip the dual sign back
    let dual_y: Vec<f64> = out.y.iter().map(|v| -v).collect();
    let primal_value = p.objective(&primal_x);
    let dual_value: f64 = p.constraints.iter().zip(&dual_y).map(|(c, y)| c.rhs * y).sum();
    SdpSolution {
        primal_x,
        dual_y,
        primal_value,
        dual_value,
        gap: dual_value - primal_value,
        status: out.status,
        iterations: out.iterations,
        primal_infeasibility: out.primal_infeasibility,
        dual_infeasibility: out.dual_infeasibility,
    }
}

/// Basis of `{X Hermitian on K⊗H : Tr_K X = 0}`: `χ_j ⊗ E_k` with `χ_j`
/// traceless Gell-Mann matrices on `K` and `E_k` matrix units on `H`.
pub fn traceless_output_basis(dims: BipartiteDims) -> Vec<HermitianOperator> {
    let chi = gell_mann_basis(dims.dim_out);
    let e = matrix_unit_basis(dims.dim_in);
    chi.iter().flat_map(|c| e.iter().map(move |e| c.kron(e))).collect()
}

/// The tester SDP: `max Σ_i Tr(λ_i C(Φ_i) F_i)` over `F_i ⪰ 0` with
/// `Σ F_i = I ⊗ σ`, encoded as `Tr ΣF_i = d_K` and `Tr((χ⊗E) Σ F_i) = 0`.
///
/// Block `i` holds `F_i`. The dual operator of any block is `λ₀ C(Φ₀)`.
pub fn build_discrimination_primal(prob: &DiscriminationProblem) -> SdpProblem {
    let dims = prob.dims();
    let n = prob.len();
    let cost = prob.items().iter().map(|(w, ch)| ch.choi().scale(*w)).collect();
    let mut constraints = Vec::with_capacity(1 + traceless_output_basis(dims).len());
    constraints.push(SdpConstraint::replicated(0..n, &HermitianOperator::identity(dims.total()), dims.dim_out as f64));
    for x in traceless_output_basis(dims) {
        constraints.push(SdpConstraint::replicated(0..n, &x, 0.0));
    }
    SdpProblem::new(cost, constraints).expect("blocks are consistent by construction")
}

/// `max Σ_i λ_i Tr(ρ_i M_i)` over POVMs `{M_i}`.
pub fn build_state_povm_sdp(states: &[(f64, HermitianOperator)]) -> Result<SdpProblem, SdpError> {
    let d = states.first().ok_or_else(|| SdpError::InvalidEnsemble("no states".into()))?.1.dim();
    let total: f64 = states.iter().map(|s| s.0).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(SdpError::InvalidEnsemble(format!("weights sum to {total}")));
    }
    for (i, (w, rho)) in states.iter().enumerate() {
        if rho.dim() != d {
            return Err(SdpError::DimensionMismatch { expected: d, found: rho.dim() });
        }
        if *w <= 0.0 || !w.is_finite() {
            return Err(SdpError::InvalidEnsemble(format!("weight {i} is {w}")));
        }
        if (rho.trace() - 1.0).abs() > 1e-8 || rho.min_eigenvalue() < -1e-8 {
            return Err(SdpError::InvalidEnsemble(format!("operator {i} is not a density matrix")));
        }
    }
    let n = states.len();
    let cost = states.iter().map(|(w, rho)| rho.scale(*w)).collect();
    let constraints = matrix_unit_basis(d).iter().map(|e| SdpConstraint::replicated(0..n, e, e.trace())).collect();
    SdpProblem::new(cost, constraints)
}

/// One block `[[I⊗ρ₀, X], [X†, I⊗ρ₁]] ⪰ 0` with `Tr ρ₀ = Tr ρ₁ = 1` and
/// cost `¼[[0, Δ], [Δ, 0]]`; the optimum is `½‖Φ‖_⋄` where `C(Φ) = Δ`.
pub fn build_diamond_sdp(delta: &HermitianOperator, dims: BipartiteDims) -> Result<SdpProblem, SdpError> {
    let n = dims.total();
    if delta.dim() != n {
        return Err(SdpError::DimensionMismatch { expected: n, found: delta.dim() });
    }
    let embed = |a: &CMatrix, upper: bool| {
        let off = if upper { 0 } else { n };
        let mut m = CMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                m[(off + r, off + c)] = a[(r, c)];
            }
        }
        HermitianOperator::new(m)
    };
    let mut cost = CMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let v = delta.matrix()[(r, c)] * 0.25;
            cost[(r, n + c)] = v;
            cost[(n + r, c)] = v;
        }
    }
    let basis = traceless_output_basis(dims);
    let mut constraints = Vec::with_capacity(2 * (basis.len() + 1));
    for upper in [true, false] {
        constraints.push(SdpConstraint::new(vec![(0, embed(&CMatrix::identity(n), upper))], dims.dim_out as f64));
        for x in &basis {
            constraints.push(SdpConstraint::new(vec![(0, embed(x.matrix(), upper))], 0.0));
        }
    }
    SdpProblem::new(vec![HermitianOperator::new(cost)], constraints)
}
