//! One-parameter sweeps of the bounds report, written as CSV.

use std::io::{self, Write};

use crate::discrimination::bounds_report_with;
use crate::parallel::Execution;
use crate::spec::{parse_channel, parse_number, Bindings, ProblemSpec, SpecError};

pub const CSV_HEADER: &str = "param,p_mei,p_opt,upper_bound,mei,eps";
/// Significant digits of every numeric CSV cell.
pub const CSV_DIGITS: usize = 12;

/// `count` equally spaced points from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self, SpecError> {
        if count < 2 {
            return Err(SpecError::Invalid(format!("grid needs at least 2 points, got {count}")));
        }
        if !(start.is_finite() && stop.is_finite()) {
            return Err(SpecError::Invalid("grid bounds must be finite".into()));
        }
        Ok(Self { start, stop, count })
    }

    /// `start:stop:count`.
    pub fn parse(text: &str) -> Result<Self, SpecError> {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(SpecError::Parse { input: text.into(), reason: "expected start:stop:count".into() });
        };
        let n = n.trim().parse().map_err(|_| SpecError::Parse { input: text.into(), reason: "count must be a non-negative integer".into() })?;
        let none = Bindings::new();
        Self::new(parse_number(a, &none)?, parse_number(b, &none)?, n)
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + (self.stop - self.start) * i as f64 / last })
            .collect()
    }
}

/// A problem whose channel forms mention the free parameter by name, e.g.
/// `["id:2", "ad:theta"]` with `parameter = "theta"`.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: String,
    pub grid: Grid,
    pub channels: Vec<String>,
    pub lambda: f64,
    /// Solve the discrimination SDP for `p_opt` at every point.
    pub solve: bool,
}

impl SweepSpec {
    pub fn problem_at(&self, value: f64) -> Result<ProblemSpec, SpecError> {
        let mut b = Bindings::new();
        b.insert(self.parameter.clone(), value);
        let chans = self.channels.iter().map(|c| parse_channel(c, &b)).collect::<Result<_, _>>()?;
        Ok(ProblemSpec::from_channels(chans, self.lambda))
    }

    /// Builds the problem at every grid point, so that domain errors surface
    /// before any work is done.
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.channels.len() < 2 {
            return Err(SpecError::Invalid("a sweep needs at least two channels".into()));
        }
        if !self.channels.iter().any(|c| mentions(c, &self.parameter)) {
            return Err(SpecError::Invalid(format!("no channel mentions the parameter `{}`", self.parameter)));
        }
        for x in self.grid.points() {
            self.problem_at(x)?.build()?;
        }
        Ok(())
    }
}

fn mentions(form: &str, name: &str) -> bool {
    form.split([':', ',']).any(|t| t.trim() == name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub p_mei: f64,
    /// Empty when not requested or when the solver did not converge.
    pub p_opt: Option<f64>,
    pub upper_bound: f64,
    pub mei: bool,
    pub eps: f64,
}

pub fn evaluate(spec: &SweepSpec, value: f64) -> Result<SweepRow, SpecError> {
    let prob = spec.problem_at(value)?.build()?;
    let r = bounds_report_with(&prob, spec.solve)?;
    Ok(SweepRow { param: value, p_mei: r.p_mei, p_opt: r.p_opt, upper_bound: r.upper_bound, mei: r.mei_holds, eps: r.epsilon })
}

/// Rows in grid order; points are evaluated through `exec`.
pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRow>, SpecError> {
    spec.validate()?;
    exec.map(&spec.grid.points(), |&x| evaluate(spec, x)).into_iter().collect()
}

/// `x` rounded to [`CSV_DIGITS`] significant digits, in the shortest of
/// fixed or exponent notation, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", CSV_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..CSV_DIGITS as i32).contains(&exp) {
        let decimals = (CSV_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn write_csv(rows: &[SweepRow], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let p_opt = r.p_opt.map(format_sig).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            format_sig(r.param),
            format_sig(r.p_mei),
            p_opt,
            format_sig(r.upper_bound),
            r.mei,
            format_sig(r.eps)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
