//! Quantum channel discrimination: optimality of maximally entangled and
//! full-Schmidt-rank input states, exact success probabilities via
//! semidefinite programming, and analytic bounds.
//!
//! Module map:
//! - [`linalg`]: dense complex Hermitian algebra (Jacobi eigensolver, partial traces).
//! - [`channels`]: Kraus/Choi channels and POVMs.
//! - [`sdp`]: a small dense primal-dual interior-point SDP solver and problem builders.
//! - [`discrimination`]: testers, optimality certificates, `p_MEI`, bounds.
//! - [`analytic`]: closed-form criteria for qubit, unitary and projective-measurement channels.
//! - [`spec`]: the textual channel/problem/scheme format consumed by the CLI.
//! - [`sweep`]: parameter sweeps with optional data parallelism.

pub mod analytic;
pub mod channels;
pub mod discrimination;
pub mod linalg;
pub mod parallel;
pub mod random;
pub mod sdp;
pub mod spec;
pub mod sweep;

pub use channels::{PovmSet, QuantumChannel};
pub use discrimination::{DiscriminationProblem, DiscriminationReport};
pub use linalg::{BipartiteDims, CMatrix, HermitianOperator, PureState, C64};
