//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.

use super::matrix::{CMatrix, C64};

/// Sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;
/// Convergence when the off-diagonal Frobenius norm drops below this times `‖x‖_F`.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-13;

/// Spectral decomposition `x = Σ λ_k v_k v_k†` with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns.
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Rebuilds `Σ f(λ_k) v_k v_k†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = self.vectors[(r, k)] * w;
                for c in 0..n {
                    out[(r, c)] += vr * self.vectors[(c, k)].conj();
                }
            }
        }
        out
    }
}

pub(crate) struct JacobiOutcome {
    pub eigen: Eigen,
    pub converged: bool,
    pub sweeps: usize,
    pub off_norm: f64,
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                acc += a[(r, c)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Runs cyclic Jacobi on `x`, which must already be Hermitian.
pub(crate) fn jacobi(x: &CMatrix) -> JacobiOutcome {
    let n = x.rows();
    let mut a = x.clone();
    let mut v = CMatrix::identity(n);
    let target = OFF_DIAGONAL_TOLERANCE * x.frobenius_norm();
    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a);

    while off > target && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let h = a[(p, q)];
                let habs = h.norm();
                if habs == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Below roundoff relative to the diagonal: drop the entry instead of rotating.
                if habs < 1e-300 || (app.abs() + aqq.abs() > 0.0 && habs <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs())) {
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = h / habs;
                let theta = (aqq - app) / (2.0 * habs);
                let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let phase_conj = phase.conj();

                // a <- a U with U col p = c e_p - s conj(phase) e_q, col q = s e_p + c conj(phase) e_q
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * c - arq * phase_conj * s;
                    a[(r, q)] = arp * s + arq * phase_conj * c;
                }
                // a <- U† a
                for col in 0..n {
                    let apc = a[(p, col)];
                    let aqc = a[(q, col)];
                    a[(p, col)] = apc * c - aqc * phase * s;
                    a[(q, col)] = apc * s + aqc * phase * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * c - vrq * phase_conj * s;
                    v[(r, q)] = vrp * s + vrq * phase_conj * c;
                }
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    JacobiOutcome { eigen: Eigen { values, vectors }, converged: off <= target, sweeps, off_norm: off }
}
