use crate::linalg::{CMatrix, HermitianOperator, PureState, C64};

/// Below this `1 − |⟨φ,ψ⟩|²` the two projections are taken to coincide.
const PARALLEL_CUTOFF: f64 = 1e-14;

/// Eigen-data of `D_λ = λP_ψ − (1−λ)P_φ` on `span{φ, ψ}`.
///
/// The eigenvectors are `ξ_i = α_i φ + k_i z̄ ψ` with `z = ⟨φ,ψ⟩` and
/// `k_i = λα_i/(μ_i − λ)`.
#[derive(Debug, Clone, Copy)]
struct Rank1Terms {
    z: C64,
    mu: [f64; 2],
    alpha: [f64; 2],
    k: [f64; 2],
}

impl Rank1Terms {
    /// Requires `0 < |z| < 1`.
    fn new(z: C64, lambda: f64) -> Self {
        let z2 = z.norm_sqr();
        // μ² − (2λ−1)μ − λ(1−λ)(1−|z|²) = 0
        let s = 2.0 * lambda - 1.0;
        let p = lambda * (1.0 - lambda) * (1.0 - z2);
        let root = (s * s + 4.0 * p).sqrt();
        let (mu1, mu2) = if s >= 0.0 {
            let m = (s + root) / 2.0;
            (m, -p / m)
        } else {
            let m = (s - root) / 2.0;
            (-p / m, m)
        };
        // (μ₁ − λ)(μ₂ − λ) = λ(1−λ)|z|²
        let shift2 = mu2 - lambda;
        let shift1 = lambda * (1.0 - lambda) * z2 / shift2;
        let mut alpha = [0.0; 2];
        let mut k = [0.0; 2];
        for (i, shift) in [shift1, shift2].into_iter().enumerate() {
            let t = lambda / shift;
            // ‖φ + t z̄ ψ‖² = (1 − |z|²) + |z|²(1 + t)²
            let a = 1.0 / ((1.0 - z2) + z2 * (1.0 + t) * (1.0 + t)).sqrt();
            alpha[i] = a;
            k[i] = t * a;
        }
        Self { z, mu: [mu1, mu2], alpha, k }
    }

    fn coefficients(&self) -> (f64, f64, f64) {
        let z2 = self.z.norm_sqr();
        let mut on_phi = 0.0;
        let mut on_psi = 0.0;
        let mut cross = 0.0;
        for i in 0..2 {
            let m = self.mu[i].abs();
            on_phi += m * self.alpha[i] * self.alpha[i];
            on_psi += m * self.k[i] * self.k[i] * z2;
            cross += m * self.alpha[i] * self.k[i];
        }
        (on_phi, on_psi, cross)
    }
}

/// `|λP_ψ − (1−λ)P_φ|` in closed form.
pub fn rank1_abs(phi: &PureState, psi: &PureState, lambda: f64) -> HermitianOperator {
    let p_phi = HermitianOperator::projector(phi);
    let p_psi = HermitianOperator::projector(psi);
    let z = phi.inner(psi);
    let z2 = z.norm_sqr();
    if 1.0 - z2 <= PARALLEL_CUTOFF {
        return p_psi.scale((2.0 * lambda - 1.0).abs());
    }
    if z2 == 0.0 {
        return &p_psi.scale(lambda) + &p_phi.scale(1.0 - lambda);
    }
    let (on_phi, on_psi, cross) = Rank1Terms::new(z, lambda).coefficients();
    let phi_psi = CMatrix::outer(phi.amplitudes(), psi.amplitudes()).scale(z * cross);
    let sym = HermitianOperator::new(&phi_psi + &phi_psi.adjoint());
    &(&p_phi.scale(on_phi) + &p_psi.scale(on_psi)) + &sym
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvectors_solve_the_restricted_problem() {
        let lambda = 0.3;
        let phi = PureState::from_real(&[1.0, 0.0]).unwrap();
        let psi = PureState::from_real(&[0.6, 0.8]).unwrap();
        let terms = Rank1Terms::new(phi.inner(&psi), lambda);
        let d = &HermitianOperator::projector(&psi).scale(lambda) - &HermitianOperator::projector(&phi).scale(1.0 - lambda);
        for i in 0..2 {
            let xi: Vec<C64> = (0..2)
                .map(|r| phi.amplitudes()[r] * terms.alpha[i] + psi.amplitudes()[r] * terms.z.conj() * terms.k[i])
                .collect();
            let norm: f64 = xi.iter().map(|x| x.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-14);
            let dx = d.matrix().matvec(&xi);
            for r in 0..2 {
                assert!((dx[r] - xi[r] * terms.mu[i]).norm() < 1e-14);
            }
        }
        assert!((terms.mu[0] + terms.mu[1] - (2.0 * lambda - 1.0)).abs() < 1e-15);
    }
}
