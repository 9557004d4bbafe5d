//! Seeded generators for random states, operators and channels, shared by
//! the property suites, the acceptance tests and the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::QuantumChannel;
use crate::linalg::{CMatrix, HermitianOperator, PureState, C64};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre matrix with i.i.d. complex Gaussian entries.
pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn hermitian(rng: &mut impl Rng, d: usize) -> HermitianOperator {
    HermitianOperator::new(ginibre(rng, d, d))
}

pub fn pure_state(rng: &mut impl Rng, d: usize) -> PureState {
    loop {
        let amps = (0..d).map(|_| gaussian(rng)).collect();
        if let Ok(psi) = PureState::new(amps) {
            return psi;
        }
    }
}

/// Density matrix `G G† / Tr(G G†)` with `G` a `d × rank` Ginibre matrix.
pub fn density(rng: &mut impl Rng, d: usize, rank: usize) -> HermitianOperator {
    let g = ginibre(rng, d, rank.max(1));
    let rho = HermitianOperator::new(&g * &g.adjoint());
    rho.scale(1.0 / rho.trace())
}

/// Columns of `m` orthonormalized by modified Gram-Schmidt.
pub(crate) fn orthonormalize_columns(m: &CMatrix) -> CMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let mut q = m.clone();
    for j in 0..cols {
        for k in 0..j {
            let proj: C64 = (0..rows).map(|r| q[(r, k)].conj() * q[(r, j)]).sum();
            for r in 0..rows {
                let qk = q[(r, k)];
                q[(r, j)] -= proj * qk;
            }
        }
        let norm = (0..rows).map(|r| q[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..rows {
            q[(r, j)] /= norm;
        }
    }
    q
}

/// Haar-random unitary (Gram-Schmidt of a Ginibre matrix).
pub fn unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    orthonormalize_columns(&ginibre(rng, d, d))
}

/// Random orthonormal basis of `ℂ^d`.
pub fn orthonormal_basis(rng: &mut impl Rng, d: usize) -> Vec<PureState> {
    let u = unitary(rng, d);
    (0..d).map(|j| PureState::new(u.column(j)).expect("unitary columns are nonzero")).collect()
}

/// Random channel from a Haar isometry `H → K ⊗ ℂ^r` (Stinespring form).
/// The Kraus rank is raised to `⌈d_H/d_K⌉` when needed.
pub fn channel(rng: &mut impl Rng, dim_in: usize, dim_out: usize, kraus_rank: usize) -> QuantumChannel {
    let r = kraus_rank.max(dim_in.div_ceil(dim_out)).max(1);
    let v = orthonormalize_columns(&ginibre(rng, dim_out * r, dim_in));
    let kraus = (0..r).map(|j| CMatrix::from_fn(dim_out, dim_in, |a, i| v[(j * dim_out + a, i)])).collect();
    QuantumChannel::from_kraus(kraus).expect("isometry blocks form a channel")
}

/// Pauli matrices `I, X, Y, Z`.
pub fn paulis() -> [CMatrix; 4] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        CMatrix::identity(2),
        CMatrix::from_vec(2, 2, vec![o, l, l, o]),
        CMatrix::from_vec(2, 2, vec![o, -i, i, o]),
        CMatrix::from_vec(2, 2, vec![l, o, o, -l]),
    ]
}

/// Random mixture of Pauli conjugations, a unital qubit channel.
pub fn unital_qubit_channel(rng: &mut impl Rng) -> QuantumChannel {
    let weights: Vec<f64> = (0..4).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let kraus = paulis().iter().zip(&weights).map(|(p, w)| p.scale_re((w / total).sqrt())).collect();
    QuantumChannel::from_kraus(kraus).expect("Pauli mixture is a channel")
}
