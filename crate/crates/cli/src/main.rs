//! `chdisc`: MEI checks, bounds, sweeps and optimality certificates for
//! quantum channel discrimination.
//!
//! Exit codes: 0 when the checked property holds (or the command simply
//! succeeded), 1 when it is violated, 2 on input errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use chdisc_core::discrimination::{
    bounds_report_with, check_scheme_optimality_with, mei_condition, p_mei_two, CertificateOptions, CertificateSemantics,
};
use chdisc_core::parallel::Execution;
use chdisc_core::spec::{parse_channel, parse_problem, parse_scheme, Bindings, SpecError};
use chdisc_core::sweep::{format_sig as f, run_sweep, write_csv, Grid, SweepSpec, CSV_HEADER};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chdisc", version, about = "Optimality of maximally entangled inputs for quantum channel discrimination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Weight λ of the first channel in a two-channel problem.
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Tolerance for proportionality and positivity checks.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Test whether Tr_K|Δ_λ| ∝ I for two channels.
    MeiCheck {
        channel1: String,
        channel2: String,
        #[command(flatten)]
        common: Common,
    },
    /// p_MEI, the upper bound and (with --solve) p_opt for a problem.
    Bounds {
        /// Two or more channels, a JSON problem file, or `spm:d`.
        #[arg(required = true)]
        problem: Vec<String>,
        #[command(flatten)]
        common: Common,
        /// Solve the discrimination SDP for p_opt.
        #[arg(long)]
        solve: bool,
        /// Also write the result as a one-row CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the bounds along a parameter grid and write CSV.
    Sweep {
        /// Channel forms mentioning the parameter, e.g. `id:2 ad:theta`.
        #[arg(required = true)]
        channels: Vec<String>,
        /// start:stop:count.
        #[arg(long)]
        grid: String,
        /// Name of the free parameter.
        #[arg(long, default_value = "x")]
        param: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        solve: bool,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the optimality conditions for a measurement scheme.
    Certify {
        #[arg(required = true)]
        problem: Vec<String>,
        /// `me`, `bell2`, `product:i`, or a JSON scheme file.
        #[arg(long)]
        scheme: String,
        #[command(flatten)]
        common: Common,
        /// Also solve the SDP and print its optimum.
        #[arg(long)]
        solve: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Violated,
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<chdisc_core::discrimination::DiscriminationError> for Failure {
    fn from(e: chdisc_core::discrimination::DiscriminationError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn io_failure(path: &std::path::Path, e: io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn check_lambda(lambda: f64) -> Result<(), Failure> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Failure::Input(format!("--lambda {lambda} outside (0, 1)")))
    }
}

fn verdict(holds: bool) -> Result<(), Failure> {
    if holds {
        Ok(())
    } else {
        Err(Failure::Violated)
    }
}

fn mei_check(ch1: &str, ch2: &str, c: &Common) -> Result<(), Failure> {
    check_lambda(c.lambda)?;
    let none = Bindings::new();
    let a = parse_channel(ch1, &none)?.build()?;
    let b = parse_channel(ch2, &none)?.build()?;
    let check = mei_condition(&a, &b, c.lambda, c.tol)?;
    let p = p_mei_two(&a, &b, c.lambda)?;
    println!("mei_holds={} deviation={} p_mei={}", check.holds, f(check.deviation), f(p));
    verdict(check.holds)
}

fn bounds(problem: &[String], c: &Common, solve: bool, out: Option<&PathBuf>) -> Result<(), Failure> {
    check_lambda(c.lambda)?;
    let prob = parse_problem(problem, c.lambda, &Bindings::new())?.build()?;
    let r = bounds_report_with(&prob, solve)?;
    println!("p_mei={}", f(r.p_mei));
    println!("upper_bound={}", f(r.upper_bound));
    match (r.p_opt, r.solver_status) {
        (Some(p), _) => println!("p_opt={}", f(p)),
        (None, Some(status)) => println!("p_opt= (solver status {status:?})"),
        (None, None) => {}
    }
    println!("epsilon={}", f(r.epsilon));
    println!("mei_holds={}", r.mei_holds);
    if let Some(path) = out {
        let mut w = File::create(path).map_err(|e| io_failure(path, e))?;
        let row = format!("{CSV_HEADER}\n,{},{},{},{},{}\n", f(r.p_mei), r.p_opt.map(f).unwrap_or_default(), f(r.upper_bound), r.mei_holds, f(r.epsilon));
        w.write_all(row.as_bytes()).map_err(|e| io_failure(path, e))?;
    }
    Ok(())
}

fn sweep(spec: SweepSpec, out: Option<&PathBuf>) -> Result<(), Failure> {
    check_lambda(spec.lambda)?;
    let rows = run_sweep(&spec, Execution::from_env())?;
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_failure(path, e))?;
            let mut w = BufWriter::new(file);
            write_csv(&rows, &mut w).and_then(|_| w.flush()).map_err(|e| io_failure(path, e))?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => write_csv(&rows, io::stdout().lock()).map_err(|e| Failure::Input(e.to_string()))?,
    }
    Ok(())
}

fn certify(problem: &[String], scheme: &str, c: &Common, solve: bool) -> Result<(), Failure> {
    check_lambda(c.lambda)?;
    let prob = parse_problem(problem, c.lambda, &Bindings::new())?.build()?;
    let s = parse_scheme(scheme, &prob)?;
    let cert = check_scheme_optimality_with(&prob, &s, &CertificateOptions { tol: c.tol, cross_validate: solve })?;
    let join = |v: &[f64]| v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(",");
    println!("condition_i={} majorization_residuals={}", cert.condition_i, join(&cert.majorization_residuals));
    println!("condition_ii={} proportionality_residual={}", cert.condition_ii, f(cert.proportionality_residual));
    println!("hermiticity_residual={}", f(cert.hermiticity_residual));
    if cert.condition_i && cert.condition_ii {
        println!("lambda0={}", f(cert.lambda0));
    }
    if let Some(v) = cert.sdp_value {
        println!("p_opt={}", f(v));
    }
    let semantics = match cert.semantics {
        CertificateSemantics::Sufficient => "sufficient",
        CertificateSemantics::NecessaryOnly => "necessary-only (input marginal not full rank)",
    };
    println!("verdict={} semantics={semantics}", cert.verdict);
    verdict(cert.verdict)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::MeiCheck { channel1, channel2, common } => mei_check(&channel1, &channel2, &common),
        Command::Bounds { problem, common, solve, out } => bounds(&problem, &common, solve, out.as_ref()),
        Command::Sweep { channels, grid, param, common, solve, out } => {
            let spec = SweepSpec { parameter: param, grid: Grid::parse(&grid)?, channels, lambda: common.lambda, solve };
            sweep(spec, out.as_ref())
        }
        Command::Certify { problem, scheme, common, solve } => certify(&problem, &scheme, &common, solve),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violated) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
