//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints a PASS/FAIL line; exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chdisc_core::analytic::{
    dim4_template, rank1_abs, spm_derive, spm_matrix_equation_residual, spm_mei, unitary_mei, SpmProblem,
};
use chdisc_core::channels::{self, QuantumChannel};
use chdisc_core::discrimination::{
    bounds_report_with, check_scheme_optimality, diamond_norm, diamond_norm_bounds, mei_condition, p_mei_two, success_probability,
    DiscriminationProblem,
};
use chdisc_core::linalg::{partial_trace, BipartiteDims, CMatrix, Factor, HermitianOperator, C64};
use chdisc_core::parallel::Execution;
use chdisc_core::random;
use chdisc_core::sdp;
use chdisc_core::spec::{parse_problem, parse_scheme, Bindings, ProblemSpec};
use chdisc_core::sweep::{run_sweep, Grid, SweepSpec};
use rand::Rng;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<Duration, String> {
    let e = t.elapsed();
    ensure(e < limit, || format!("runtime {e:?} exceeds {limit:?}"))?;
    Ok(e)
}

fn sdp_p_opt(prob: &DiscriminationProblem) -> Result<f64, String> {
    let s = sdp::solve(&sdp::build_discrimination_primal(prob));
    ensure(s.is_optimal(), || format!("solver status {:?}", s.status))?;
    Ok(s.primal_value)
}

fn phase(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

fn spm_golden_values() -> Verdict {
    let t = Instant::now();
    let upper = (2.0 + std::f64::consts::SQRT_2) / 4.0;
    let mut worst_popt: f64 = 0.0;
    for d in [3, 4, 5] {
        let prob = SpmProblem::rotated_pair(d).map_err(|e| e.to_string())?.discrimination_problem(0.5).map_err(|e| e.to_string())?;
        let p = p_mei_two(prob.channel(0), prob.channel(1), 0.5).map_err(|e| e.to_string())?;
        let expected = 0.5 + 1.0 / (std::f64::consts::SQRT_2 * d as f64);
        ensure((p - expected).abs() <= 1e-9, || format!("d = {d}: p_MEI {p} vs {expected}"))?;
        let r = bounds_report_with(&prob, false).map_err(|e| e.to_string())?;
        ensure((r.upper_bound - upper).abs() <= 1e-9, || format!("d = {d}: upper bound {}", r.upper_bound))?;
        let popt = sdp_p_opt(&prob)?;
        worst_popt = worst_popt.max((popt - upper).abs());
        ensure((popt - upper).abs() <= 1e-5, || format!("d = {d}: p_opt {popt}"))?;
    }
    let e = within(t, Duration::from_secs(30))?;
    Ok(format!("dims 3-5, worst |p_opt - (2+√2)/4| = {worst_popt:.1e}, {e:.2?}"))
}

fn amplitude_damping_sweep() -> Verdict {
    let t = Instant::now();
    let spec = SweepSpec {
        parameter: "theta".into(),
        grid: Grid::new(0.0, 1.0, 100).map_err(|e| e.to_string())?,
        channels: vec!["id:2".into(), "ad:theta".into()],
        lambda: 0.5,
        solve: true,
    };
    let rows = run_sweep(&spec, Execution::from_env()).map_err(|e| e.to_string())?;
    ensure(rows.len() == 100, || format!("{} rows", rows.len()))?;
    let mut worst_sandwich: f64 = 0.0;
    for r in &rows {
        let theta = r.param;
        let l1 = 0.5 * (theta + (theta * theta + 4.0 * (1.0 - (1.0 - theta).sqrt()).powi(2)).sqrt());
        let formula = 0.5 * (1.0 + 0.5 * l1);
        ensure((r.p_mei - formula).abs() <= 1e-9, || format!("θ = {theta}: p_MEI {} vs formula {formula}", r.p_mei))?;
        let p = r.p_opt.ok_or_else(|| format!("θ = {theta}: solver failed"))?;
        worst_sandwich = worst_sandwich.max(r.p_mei - p).max(p - r.upper_bound);
        ensure(r.p_mei <= p + 2e-6 && p <= r.upper_bound + 2e-6, || format!("θ = {theta}: {} ≤ {p} ≤ {}", r.p_mei, r.upper_bound))?;
    }
    let first = &rows[0];
    let p0 = first.p_opt.unwrap_or(f64::NAN);
    ensure(
        [first.p_mei, p0, first.upper_bound].iter().all(|v| (v - 0.5).abs() <= 1e-9),
        || format!("θ = 0: {} {p0} {}", first.p_mei, first.upper_bound),
    )?;
    let e = within(t, Duration::from_secs(120))?;
    Ok(format!("100 points, worst sandwich violation {worst_sandwich:.1e}, {e:.2?}"))
}

fn unitary_perfect_discrimination() -> Verdict {
    let w = std::f64::consts::TAU / 3.0;
    let u = CMatrix::from_diag(&[phase(0.0), phase(w), phase(2.0 * w)]);
    let um = unitary_mei(&u, &CMatrix::identity(3)).map_err(|e| e.to_string())?;
    let ch = channels::unitary(u).map_err(|e| e.to_string())?;
    let id = channels::identity(3);
    let generic = mei_condition(&ch, &id, 0.5, 1e-8).map_err(|e| e.to_string())?;
    ensure(um.holds && generic.holds, || format!("MEI unitary {} generic {}", um.holds, generic.holds))?;
    let p = sdp_p_opt(&DiscriminationProblem::two(ch, id, 0.5).map_err(|e| e.to_string())?)?;
    ensure((p - 1.0).abs() <= 1e-6, || format!("p_opt {p}"))?;
    Ok(format!("MEI true, p_opt = {p:.9}"))
}

fn unital_qubit_suite() -> Verdict {
    let mut rng = random::rng(1001);
    let mut worst_dev: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for _ in 0..100 {
        let a = random::unital_qubit_channel(&mut rng);
        let b = random::unital_qubit_channel(&mut rng);
        for lambda in [0.3, 0.5, 0.7] {
            let check = mei_condition(&a, &b, lambda, 1e-8).map_err(|e| e.to_string())?;
            worst_dev = worst_dev.max(check.deviation);
            ensure(check.holds && check.deviation <= 1e-8, || format!("λ = {lambda}: deviation {:e}", check.deviation))?;
            let pm = p_mei_two(&a, &b, lambda).map_err(|e| e.to_string())?;
            let po = sdp_p_opt(&DiscriminationProblem::two(a.clone(), b.clone(), lambda).map_err(|e| e.to_string())?)?;
            worst_gap = worst_gap.max(po - pm);
            ensure(po - pm <= 2e-6, || format!("λ = {lambda}: p_opt − p_MEI = {:e}", po - pm))?;
        }
    }
    Ok(format!("300 cases, worst deviation {worst_dev:.1e}, worst p_opt − p_MEI {worst_gap:.1e}"))
}

fn duality() -> Verdict {
    let mut rng = random::rng(1002);
    let mut worst_gap: f64 = 0.0;
    let mut worst_slack: f64 = 0.0;
    for k in 0..50 {
        let n = 2 + k % 2;
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut items: Vec<(f64, QuantumChannel)> = Vec::with_capacity(n);
        for w in &raw {
            let rank = rng.random_range(1..=4);
            items.push((w / total, random::channel(&mut rng, 2, 2, rank)));
        }
        let prob = DiscriminationProblem::new(items).map_err(|e| e.to_string())?;
        let problem = sdp::build_discrimination_primal(&prob);
        let sol = sdp::solve(&problem);
        ensure(sol.is_optimal(), || format!("problem {k}: status {:?}", sol.status))?;
        let gap = (sol.primal_value - sol.dual_value).abs();
        worst_gap = worst_gap.max(gap);
        ensure(gap <= 1e-6, || format!("problem {k}: |primal − dual| = {gap:e}"))?;
        // (λ₀C(Φ₀) − λ_iC(Φ_i)) F̂_i = 0 for the returned tester and dual
        let od = chdisc_core::discrimination::solve_discrimination(&prob).map_err(|e| e.to_string())?;
        for (i, f) in od.tester.effects().iter().enumerate() {
            let slack = (&od.dual - &prob.weighted_choi(i)).matrix() * f.matrix();
            let r = slack.frobenius_norm();
            worst_slack = worst_slack.max(r);
            ensure(r <= 1e-5, || format!("problem {k}, block {i}: slackness residual {r:e}"))?;
        }
    }
    Ok(format!("50 problems, worst gap {worst_gap:.1e}, worst slackness {worst_slack:.1e}"))
}

fn rank1_oracle() -> Verdict {
    let t = Instant::now();
    let mut rng = random::rng(1003);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let d = rng.random_range(2..=4);
        let phi = random::pure_state(&mut rng, d);
        let psi = random::pure_state(&mut rng, d);
        let lambda = rng.random_range(0.001..0.999);
        let oracle = (&HermitianOperator::projector(&psi).scale(lambda) - &HermitianOperator::projector(&phi).scale(1.0 - lambda)).abs();
        worst = worst.max((rank1_abs(&phi, &psi, lambda).matrix() - oracle.matrix()).max_abs());
    }
    ensure(worst <= 1e-10, || format!("worst entry error {worst:e}"))?;
    let e = within(t, Duration::from_secs(10))?;
    Ok(format!("10^4 triples, worst entry error {worst:.1e}, {e:.2?}"))
}

fn diamond_chain() -> Verdict {
    let mut rng = random::rng(1004);
    let mut worst_slack = f64::INFINITY;
    let mut strict = 0;
    for k in 0..50 {
        let (ra, rb) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let a = random::channel(&mut rng, 2, 2, ra);
        let b = random::channel(&mut rng, 2, 2, rb);
        let bounds = diamond_norm_bounds(&a, &b, 0.5).map_err(|e| e.to_string())?;
        let dn = diamond_norm(&a, &b, 0.5).map_err(|e| e.to_string())?;
        let links = [dn - bounds.lower, bounds.new_upper - dn, bounds.loose_upper - bounds.new_upper];
        let slack = links.iter().copied().fold(f64::INFINITY, f64::min);
        worst_slack = worst_slack.min(slack);
        ensure(slack >= -1e-6, || format!("pair {k}: chain links {links:?}"))?;
        let c = chdisc_core::discrimination::delta_lambda(&a, &b, 0.5).map_err(|e| e.to_string())?;
        let reduced = partial_trace(&c.abs(), BipartiteDims::square(2), Factor::First).map_err(|e| e.to_string())?;
        if reduced.rank(1e-9) >= 2 {
            ensure(bounds.loose_upper - bounds.new_upper > 1e-9, || format!("pair {k}: new bound not strictly below loose bound"))?;
            strict += 1;
        }
    }
    Ok(format!("50 pairs, smallest link slack {worst_slack:.1e}, {strict} strict improvements"))
}

fn product_scheme() -> Verdict {
    let mut lines = Vec::new();
    for d in [3, 4] {
        let prob = parse_problem(&[format!("spm:{d}")], 0.5, &Bindings::new()).and_then(|p: ProblemSpec| p.build()).map_err(|e| e.to_string())?;
        let scheme = parse_scheme("product:0", &prob).map_err(|e| e.to_string())?;
        let cert = check_scheme_optimality(&prob, &scheme).map_err(|e| e.to_string())?;
        let worst = cert.majorization_residuals.iter().copied().fold(cert.proportionality_residual, f64::max);
        ensure(cert.condition_i && cert.condition_ii && worst <= 1e-8, || format!("d = {d}: {cert:?}"))?;
        let p = success_probability(&prob, &scheme).map_err(|e| e.to_string())?;
        let popt = sdp_p_opt(&prob)?;
        ensure(popt - p >= 0.05, || format!("d = {d}: product scheme {p} vs p_opt {popt}"))?;
        lines.push(format!("d = {d}: residual {worst:.1e}, p = {p:.6} < p_opt = {popt:.6}"));
    }
    Ok(lines.join("; "))
}

fn permutation_overlap(perm: &[usize], phases: &[f64]) -> CMatrix {
    let d = perm.len();
    CMatrix::from_fn(d, d, |r, c| if perm[c] == r { phase(phases[c]) } else { C64::new(0.0, 0.0) })
}

fn spm_structure() -> Verdict {
    let mut rng = random::rng(1005);
    let tau = std::f64::consts::TAU;
    let mut worst_perm: f64 = 0.0;
    for perm in [[1, 2, 0], [2, 0, 1]] {
        for _ in 0..10 {
            let phases: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * tau).collect();
            let p = SpmProblem::from_overlap(&permutation_overlap(&perm, &phases)).map_err(|e| e.to_string())?;
            let r = spm_matrix_equation_residual(&spm_derive(&p)).map_err(|e| e.to_string())?.residual;
            worst_perm = worst_perm.max(r);
            ensure(r <= 1e-10, || format!("cyclic permutation {perm:?}: residual {r:e}"))?;
        }
    }
    let mut best_random = f64::INFINITY;
    for _ in 0..50 {
        let p = SpmProblem::new(random::orthonormal_basis(&mut rng, 3), random::orthonormal_basis(&mut rng, 3)).map_err(|e| e.to_string())?;
        let r = spm_matrix_equation_residual(&spm_derive(&p)).map_err(|e| e.to_string())?.residual;
        best_random = best_random.min(r);
        ensure(r >= 1e-3, || format!("random bases: residual {r:e}"))?;
    }
    for d in 3..=6 {
        let perm: Vec<usize> = (0..d).map(|i| (i + 1) % d).collect();
        let phases: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * tau).collect();
        let p = SpmProblem::from_overlap(&permutation_overlap(&perm, &phases)).map_err(|e| e.to_string())?;
        ensure(spm_mei(&p, 0.5, 1e-8).map_err(|e| e.to_string())?, || format!("fixed-point-free permutation, d = {d}"))?;
    }
    let reversal = SpmProblem::from_overlap(&permutation_overlap(&[5, 4, 3, 2, 1, 0], &[0.0; 6])).map_err(|e| e.to_string())?;
    ensure(spm_mei(&reversal, 0.5, 1e-8).map_err(|e| e.to_string())?, || "reversal permutation, d = 6".into())?;
    for _ in 0..10 {
        let mut t = || phase(rng.random::<f64>() * tau);
        let w = dim4_template(t(), t(), t());
        let d1 = CMatrix::from_diag(&[t(), t(), t(), t()]);
        let d2 = CMatrix::from_diag(&[t(), t(), t(), t()]);
        for m in [w.clone(), &(&d1 * &w) * &d2] {
            let p = SpmProblem::from_overlap(&m).map_err(|e| e.to_string())?;
            ensure(spm_mei(&p, 0.5, 1e-8).map_err(|e| e.to_string())?, || "dim-4 template".into())?;
            let (a, b) = p.channels().map_err(|e| e.to_string())?;
            ensure(mei_condition(&a, &b, 0.5, 1e-8).map_err(|e| e.to_string())?.holds, || "dim-4 template (generic check)".into())?;
        }
    }
    Ok(format!(
        "cyclic residual ≤ {worst_perm:.1e}, random residual ≥ {best_random:.1e}, permutations d = 3-6 and dim-4 templates MEI true"
    ))
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("SPM golden values", spm_golden_values),
        ("amplitude-damping sweep", amplitude_damping_sweep),
        ("unitary perfect discrimination", unitary_perfect_discrimination),
        ("unital qubit suite", unital_qubit_suite),
        ("duality and complementary slackness", duality),
        ("rank-1 absolute value oracle", rank1_oracle),
        ("diamond-norm bound chain", diamond_chain),
        ("product-scheme necessary conditions", product_scheme),
        ("SPM structural propositions", spm_structure),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match verdict {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
