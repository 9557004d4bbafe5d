//! Textual descriptions of channels, problems and measurement schemes.
//!
//! The JSON form is a record tagged by `kind`, with complex entries written
//! as `[re, im]` pairs and dimensions spelled out:
//!
//! ```json
//! {"kind": "kraus", "dim_in": 2, "dim_out": 2, "operators": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}
//! ```
//!
//! The inline forms accepted by [`parse_channel`] are
//!
//! | form | channel |
//! |------|---------|
//! | `identity:d`, `id:d` | identity on `ℂ^d` |
//! | `ad:θ`, `amplitude_damping:θ` | qubit amplitude damping |
//! | `wh`, `werner_holevo` | qubit Werner-Holevo |
//! | `depolarizing:d:p`, `dep:d:p` | `ρ ↦ (1−p)ρ + p Tr ρ I/d` |
//! | `phases:a,b,…` | `Ad_U`, `U = diag(e^{ia}, e^{ib}, …)` |
//! | `unitary:@file` | `Ad_U` with `U` read as a JSON matrix |
//! | `meas:d` | measurement in the computational basis |
//! | `meas-rot:d` | computational basis with `e₁, e₂` replaced by `(e₁ ± e₂)/√2` |
//! | `@file` or a path | a JSON channel record |
//!
//! Numeric arguments are decimal literals, `pi`, `pi/N`, or a bound
//! parameter name (see [`Bindings`]).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{AnalyticError, SpmProblem};
use crate::channels::{self, ChannelError, PovmSet, QuantumChannel};
use crate::discrimination::{helstrom, optimal_state_povm, DiscriminationError, DiscriminationProblem, MeasurementScheme};
use crate::linalg::{BipartiteDims, CMatrix, HermitianOperator, LinalgError, PureState, C64};

pub type ComplexEntry = [f64; 2];
pub type MatrixEntries = Vec<Vec<ComplexEntry>>;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Discrimination(#[from] DiscriminationError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn parse_err(input: &str, reason: impl Into<String>) -> SpecError {
    SpecError::Parse { input: input.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    Identity { dim: usize },
    Unitary { dim: usize, matrix: MatrixEntries },
    AmplitudeDamping { theta: f64 },
    WernerHolevo,
    Depolarizing { dim: usize, p: f64 },
    /// `ρ ↦ Σ_i Tr(M_i ρ) |i⟩⟨i|`.
    Measurement { dim: usize, effects: Vec<MatrixEntries> },
    Kraus { dim_in: usize, dim_out: usize, operators: Vec<MatrixEntries> },
    Choi { dim_in: usize, dim_out: usize, matrix: MatrixEntries },
}

pub fn matrix_to_entries(m: &CMatrix) -> MatrixEntries {
    m.row_vecs().into_iter().map(|row| row.into_iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_entries(e: &MatrixEntries, rows: usize, cols: usize) -> Result<CMatrix, SpecError> {
    if e.len() != rows || e.iter().any(|r| r.len() != cols) {
        let found = e.iter().map(Vec::len).collect::<Vec<_>>();
        return Err(SpecError::Invalid(format!("expected a {rows}×{cols} matrix, found rows of lengths {found:?}")));
    }
    let data = e.iter().flatten().map(|[re, im]| C64::new(*re, *im)).collect();
    Ok(CMatrix::from_vec(rows, cols, data))
}

impl ChannelSpec {
    pub fn build(&self) -> Result<QuantumChannel, SpecError> {
        Ok(match self {
            ChannelSpec::Identity { dim } => {
                require_dim(*dim)?;
                channels::identity(*dim)
            }
            ChannelSpec::Unitary { dim, matrix } => channels::unitary(matrix_from_entries(matrix, *dim, *dim)?)?,
            ChannelSpec::AmplitudeDamping { theta } => channels::amplitude_damping(*theta)?,
            ChannelSpec::WernerHolevo => channels::werner_holevo_qubit(),
            ChannelSpec::Depolarizing { dim, p } => {
                require_dim(*dim)?;
                channels::depolarizing(*dim, *p)?
            }
            ChannelSpec::Measurement { dim, effects } => {
                let effects =
                    effects.iter().map(|e| matrix_from_entries(e, *dim, *dim).map(HermitianOperator::new)).collect::<Result<_, _>>()?;
                channels::measurement_channel(&PovmSet::new(effects)?)?
            }
            ChannelSpec::Kraus { dim_in, dim_out, operators } => {
                let ops = operators.iter().map(|k| matrix_from_entries(k, *dim_out, *dim_in)).collect::<Result<_, _>>()?;
                QuantumChannel::from_kraus(ops)?
            }
            ChannelSpec::Choi { dim_in, dim_out, matrix } => {
                let dims = BipartiteDims::new(*dim_out, *dim_in);
                let c = matrix_from_entries(matrix, dims.total(), dims.total())?;
                channels::channel_from_choi(&HermitianOperator::new_strict(c)?, dims)?
            }
        })
    }

    /// Kraus record reproducing `ch` bit for bit.
    pub fn kraus_of(ch: &QuantumChannel) -> Self {
        ChannelSpec::Kraus { dim_in: ch.dim_in(), dim_out: ch.dim_out(), operators: ch.kraus().iter().map(matrix_to_entries).collect() }
    }

    /// Choi record reproducing `ch.choi()` bit for bit.
    pub fn choi_of(ch: &QuantumChannel) -> Self {
        ChannelSpec::Choi { dim_in: ch.dim_in(), dim_out: ch.dim_out(), matrix: matrix_to_entries(ch.choi().matrix()) }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("channel specs always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn require_dim(d: usize) -> Result<(), SpecError> {
    if d == 0 {
        return Err(SpecError::Invalid("dimension must be at least 1".into()));
    }
    Ok(())
}

/// Values substituted for free parameter names in inline forms.
pub type Bindings = BTreeMap<String, f64>;

pub fn parse_number(token: &str, bindings: &Bindings) -> Result<f64, SpecError> {
    let t = token.trim();
    if let Some(v) = bindings.get(t) {
        return Ok(*v);
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    if body == "pi" {
        return Ok(sign * std::f64::consts::PI);
    }
    if let Some(den) = body.strip_prefix("pi/") {
        let den: f64 = den.parse().map_err(|_| parse_err(token, "expected pi/N"))?;
        return Ok(sign * std::f64::consts::PI / den);
    }
    let v: f64 = t.parse().map_err(|_| parse_err(token, "expected a number, pi, pi/N or a bound parameter"))?;
    if !v.is_finite() {
        return Err(parse_err(token, "number is not finite"));
    }
    Ok(v)
}

fn parse_dim(token: &str) -> Result<usize, SpecError> {
    match token.trim().parse::<usize>() {
        Ok(d) if d > 0 => Ok(d),
        _ => Err(parse_err(token, "expected a positive dimension")),
    }
}

fn read_file(path: &str) -> Result<String, SpecError> {
    std::fs::read_to_string(path).map_err(|e| SpecError::Io { path: path.to_string(), reason: e.to_string() })
}

/// A channel from an inline form, `@file`, or a path to a JSON record.
pub fn parse_channel(text: &str, bindings: &Bindings) -> Result<ChannelSpec, SpecError> {
    let text = text.trim();
    if let Some(path) = text.strip_prefix('@') {
        return ChannelSpec::from_json(&read_file(path)?);
    }
    let mut parts = text.split(':');
    let name = parts.next().unwrap_or_default();
    let args: Vec<&str> = parts.collect();
    let arity = |n: usize| -> Result<(), SpecError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(parse_err(text, format!("`{name}` takes {n} argument(s), got {}", args.len())))
        }
    };
    let spec = match name {
        "identity" | "id" => {
            arity(1)?;
            ChannelSpec::Identity { dim: parse_dim(args[0])? }
        }
        "ad" | "amplitude_damping" => {
            arity(1)?;
            ChannelSpec::AmplitudeDamping { theta: parse_number(args[0], bindings)? }
        }
        "wh" | "werner_holevo" => {
            arity(0)?;
            ChannelSpec::WernerHolevo
        }
        "depolarizing" | "dep" => {
            arity(2)?;
            ChannelSpec::Depolarizing { dim: parse_dim(args[0])?, p: parse_number(args[1], bindings)? }
        }
        "phases" => {
            arity(1)?;
            let phases = args[0].split(',').map(|t| parse_number(t, bindings)).collect::<Result<Vec<_>, _>>()?;
            let u = CMatrix::from_diag(&phases.iter().map(|&a| C64::from_polar(1.0, a)).collect::<Vec<_>>());
            ChannelSpec::Unitary { dim: phases.len(), matrix: matrix_to_entries(&u) }
        }
        "unitary" => {
            arity(1)?;
            let path = args[0].strip_prefix('@').ok_or_else(|| parse_err(text, "expected unitary:@file"))?;
            let matrix: MatrixEntries = serde_json::from_str(&read_file(path)?)?;
            ChannelSpec::Unitary { dim: matrix.len(), matrix }
        }
        "meas" => {
            arity(1)?;
            let d = parse_dim(args[0])?;
            basis_measurement(&(0..d).map(|i| PureState::basis(d, i)).collect::<Vec<_>>())
        }
        "meas-rot" => {
            arity(1)?;
            let p = SpmProblem::rotated_pair(parse_dim(args[0])?)?;
            basis_measurement(p.eta_basis())
        }
        _ if Path::new(text).is_file() => ChannelSpec::from_json(&read_file(text)?)?,
        _ => return Err(parse_err(text, format!("unknown channel form `{name}` and no such file"))),
    };
    Ok(spec)
}

fn basis_measurement(basis: &[PureState]) -> ChannelSpec {
    let effects = basis.iter().map(|v| matrix_to_entries(HermitianOperator::projector(v).matrix())).collect();
    ChannelSpec::Measurement { dim: basis.len(), effects }
}

/// Weighted channels `{(λ_i, Φ_i)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub channels: Vec<ChannelSpec>,
    pub weights: Vec<f64>,
}

impl ProblemSpec {
    /// Two channels get `(λ, 1−λ)`; more get equal weights.
    pub fn from_channels(channels: Vec<ChannelSpec>, lambda: f64) -> Self {
        let n = channels.len();
        let weights = if n == 2 { vec![lambda, 1.0 - lambda] } else { vec![1.0 / n as f64; n] };
        Self { channels, weights }
    }

    pub fn build(&self) -> Result<DiscriminationProblem, SpecError> {
        if self.channels.len() != self.weights.len() {
            return Err(SpecError::Invalid(format!("{} channels but {} weights", self.channels.len(), self.weights.len())));
        }
        let items = self.weights.iter().zip(&self.channels).map(|(w, c)| Ok((*w, c.build()?))).collect::<Result<_, SpecError>>()?;
        Ok(DiscriminationProblem::new(items)?)
    }
}

/// A problem from command-line arguments: a single JSON problem file or
/// `spm:d` (the two simple projective measurements `meas:d`, `meas-rot:d`),
/// or two or more channel forms weighted as in [`ProblemSpec::from_channels`].
pub fn parse_problem(args: &[String], lambda: f64, bindings: &Bindings) -> Result<ProblemSpec, SpecError> {
    if let [single] = args {
        let s = single.trim();
        if let Some(d) = s.strip_prefix("spm:") {
            let d = parse_dim(d)?;
            let chans = vec![parse_channel(&format!("meas:{d}"), bindings)?, parse_channel(&format!("meas-rot:{d}"), bindings)?];
            return Ok(ProblemSpec::from_channels(chans, lambda));
        }
        let path = s.strip_prefix('@').unwrap_or(s);
        if Path::new(path).is_file() {
            return Ok(serde_json::from_str(&read_file(path)?)?);
        }
        return Err(parse_err(s, "a problem needs a JSON problem file, `spm:d`, or at least two channels"));
    }
    if args.len() < 2 {
        return Err(SpecError::Invalid("a problem needs at least two channels".into()));
    }
    let chans = args.iter().map(|a| parse_channel(a, bindings)).collect::<Result<_, _>>()?;
    Ok(ProblemSpec::from_channels(chans, lambda))
}

/// An explicit measurement scheme: input state on `H ⊗ H` and POVM on `K ⊗ H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub dim_in: usize,
    pub dim_out: usize,
    pub input_state: Vec<ComplexEntry>,
    pub povm: Vec<MatrixEntries>,
}

impl SchemeSpec {
    pub fn build(&self) -> Result<MeasurementScheme, SpecError> {
        let dims = BipartiteDims::new(self.dim_out, self.dim_in);
        let psi = PureState::new(self.input_state.iter().map(|[re, im]| C64::new(*re, *im)).collect())?;
        let effects = self
            .povm
            .iter()
            .map(|e| matrix_from_entries(e, dims.total(), dims.total()).map(HermitianOperator::new))
            .collect::<Result<_, _>>()?;
        Ok(MeasurementScheme::new(psi, PovmSet::new(effects)?, dims)?)
    }
}

/// A scheme for `prob`. Inline forms pair an input state with the optimal
/// measurement of the resulting output states:
/// - `me`: the maximally entangled state;
/// - `bell2`: `(|00⟩ + |11⟩)/√2`;
/// - `product:i`: `|i⟩ ⊗ |0⟩`, measured on the system only.
///
/// Anything else is read as a JSON [`SchemeSpec`] (`@file` or a path).
pub fn parse_scheme(text: &str, prob: &DiscriminationProblem) -> Result<MeasurementScheme, SpecError> {
    let text = text.trim();
    let dims = prob.dims();
    let d = dims.dim_in;
    let mut parts = text.split(':');
    match (parts.next().unwrap_or_default(), parts.next(), parts.next()) {
        ("me", None, None) => entangled_scheme(prob, PureState::maximally_entangled(d)),
        ("bell2", None, None) => {
            if d < 2 {
                return Err(parse_err(text, "bell2 needs input dimension ≥ 2"));
            }
            let mut amps = vec![0.0; d * d];
            amps[0] = 1.0;
            amps[d + 1] = 1.0;
            entangled_scheme(prob, PureState::from_real(&amps)?)
        }
        ("product", Some(i), None) => {
            let i: usize = i.parse().map_err(|_| parse_err(text, "expected product:i"))?;
            if i >= d {
                return Err(parse_err(text, format!("basis index {i} ≥ dimension {d}")));
            }
            product_scheme(prob, i)
        }
        _ => {
            let path = text.strip_prefix('@').unwrap_or(text);
            if !Path::new(path).is_file() {
                return Err(parse_err(text, "unknown scheme form and no such file"));
            }
            let spec: SchemeSpec = serde_json::from_str(&read_file(path)?)?;
            if BipartiteDims::new(spec.dim_out, spec.dim_in) != dims {
                return Err(SpecError::Invalid(format!("scheme dims ({}, {}) do not match the problem", spec.dim_out, spec.dim_in)));
            }
            spec.build()
        }
    }
}

/// Optimal POVM for `{(λ_i, ρ_i)}`: Helstrom for two states, the SDP otherwise.
fn optimal_povm(states: Vec<(f64, HermitianOperator)>) -> Result<PovmSet, SpecError> {
    Ok(match states.as_slice() {
        [(l, a), (_, b)] => helstrom(a, b, *l)?,
        _ => optimal_state_povm(&states)?,
    })
}

fn entangled_scheme(prob: &DiscriminationProblem, psi: PureState) -> Result<MeasurementScheme, SpecError> {
    let rho = HermitianOperator::projector(&psi);
    let states = prob.items().iter().map(|(w, ch)| Ok((*w, ch.apply_tensored(&rho)?))).collect::<Result<_, SpecError>>()?;
    Ok(MeasurementScheme::new(psi, optimal_povm(states)?, prob.dims())?)
}

fn product_scheme(prob: &DiscriminationProblem, i: usize) -> Result<MeasurementScheme, SpecError> {
    let dims = prob.dims();
    let psi = PureState::basis(dims.dim_in, i);
    let rho = HermitianOperator::projector(&psi);
    let states = prob.items().iter().map(|(w, ch)| Ok((*w, ch.apply(&rho)?))).collect::<Result<_, SpecError>>()?;
    let id = HermitianOperator::identity(dims.dim_in);
    let effects = optimal_povm(states)?.effects().iter().map(|m| m.kron(&id)).collect();
    Ok(MeasurementScheme::new(psi.kron(&PureState::basis(dims.dim_in, 0)), PovmSet::new(effects)?, dims)?)
}

#[cfg(test)]
mod tests;
