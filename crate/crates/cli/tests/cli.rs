use std::process::{Command, Output};

fn chdisc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chdisc")).args(args).output().expect("run chdisc")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.split_whitespace()
        .find_map(|w| w.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing from {text}"))
        .to_string()
}

#[test]
fn mei_check_exit_codes() {
    let out = chdisc(&["mei-check", "wh", "id:2"]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert_eq!(field(&stdout(&out), "mei_holds"), "true");

    let out = chdisc(&["mei-check", "ad:0.5", "id:2", "--lambda", "0.5"]);
    assert_eq!(code(&out), 1);
    assert_eq!(field(&stdout(&out), "mei_holds"), "false");
    assert!(field(&stdout(&out), "deviation").parse::<f64>().unwrap() > 0.1);
}

#[test]
fn unital_pair_from_files_holds() {
    let dir = tempfile::tempdir().unwrap();
    let depol = dir.path().join("dep.json");
    std::fs::write(&depol, r#"{"kind": "depolarizing", "dim": 2, "p": 0.3}"#).unwrap();
    let u = dir.path().join("u.json");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    std::fs::write(&u, format!("[[[{s}, 0], [{s}, 0]], [[{s}, 0], [-{s}, 0]]]")).unwrap();
    let out = chdisc(&["mei-check", depol.to_str().unwrap(), &format!("unitary:@{}", u.display())]);
    assert_eq!(code(&out), 0, "{out:?}");
}

#[test]
fn input_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["mei-check", "ad:", "id:2"],
        &["mei-check", "ad:1.5", "id:2"],
        &["mei-check", "teleporter:2", "id:2"],
        &["mei-check", "id:2", "id:3"],
        &["mei-check", "id:2", "id:2", "--lambda", "1.5"],
        &["mei-check", "id:2"],
        &["bounds", "id:2"],
        &["sweep", "id:2", "ad:theta", "--grid", "0:1:1", "--param", "theta"],
        &["sweep", "id:2", "ad:theta", "--grid", "0:2:3", "--param", "theta"],
        &["sweep", "id:2", "ad:0.5", "--grid", "0:1:3"],
        &["certify", "spm:3", "--scheme", "product:7"],
        &["mei-check", "@/nonexistent/channel.json", "id:2"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = chdisc(args);
        assert_eq!(code(&out), 2, "{args:?}: {out:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn malformed_json_names_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind": "kraus", "dim_in": 2, "dim_out": 2, "operators": [[[[1, 0], [0, 0]], [[0, 0], [0.5, 0]]]]}"#).unwrap();
    let out = chdisc(&["mei-check", bad.to_str().unwrap(), "id:2"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("trace preserving"), "{out:?}");
}

#[test]
fn bounds_reports() {
    let out = chdisc(&["bounds", "spm:3", "--solve"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let get = |k: &str| field(&text, k).parse::<f64>().unwrap();
    assert!((get("p_mei") - 0.7357).abs() < 1e-4);
    assert!((get("upper_bound") - 0.853553).abs() < 1e-6);
    assert!((get("p_opt") - 0.853553).abs() < 1e-5);

    let out = chdisc(&["bounds", "ad:0.3", "ad:0.3", "--solve"]);
    let text = stdout(&out);
    for k in ["p_mei", "upper_bound", "p_opt"] {
        assert!((field(&text, k).parse::<f64>().unwrap() - 0.5).abs() < 1e-9, "{text}");
    }

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("row.csv");
    let out = chdisc(&["bounds", "id:3", "phases:0,pi/1.5,-pi/1.5", "--solve", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for k in ["p_mei", "upper_bound", "p_opt"] {
        assert!((field(&text, k).parse::<f64>().unwrap() - 1.0).abs() < 1e-6, "{text}");
    }
    let row = std::fs::read_to_string(&csv).unwrap();
    assert!(row.starts_with("param,p_mei,p_opt,upper_bound,mei,eps\n,1,"), "{row}");
}

#[test]
fn bounds_without_solve_omits_p_opt() {
    let out = chdisc(&["bounds", "id:2", "ad:0.5"]);
    assert_eq!(code(&out), 0);
    assert!(!stdout(&out).contains("p_opt"));
}

#[test]
fn sweep_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &std::path::Path| {
        vec!["sweep", "id:2", "ad:theta", "--param", "theta", "--grid", "0:1:7", "--solve", "--out", p.to_str().unwrap()]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>()
    };
    let run = |p: &std::path::Path, threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_chdisc")).args(args(p)).env("CHDISC_THREADS", threads).output().unwrap();
        assert_eq!(code(&out), 0, "{out:?}");
    };
    run(&a, "1");
    run(&b, "4");
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());

    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,p_mei,p_opt,upper_bound,mei,eps"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').filter_map(|c| c.parse().ok()).collect()).collect();
    assert_eq!(rows.len(), 7);
    assert_eq!(&rows[0][..4], &[0.0, 0.5, 0.5, 0.5]);
    for r in &rows {
        assert!(r[1] <= r[2] + 2e-6 && r[2] <= r[3] + 2e-6, "{r:?}");
    }
    for w in rows.windows(2) {
        assert!(w[0][0] < w[1][0]);
    }
}

#[test]
fn sweep_to_stdout_for_a_unitary_family() {
    let out = chdisc(&["sweep", "id:3", "phases:0,pi/2,xi", "--param", "xi", "--grid", "0:pi:4"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    // p_opt column stays empty without --solve
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(2) == Some("")));
}

#[test]
fn certify_verdicts() {
    let out = chdisc(&["certify", "wh", "dep:2:0.4", "--scheme", "me", "--lambda", "0.3"]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("semantics=sufficient"));

    let out = chdisc(&["certify", "id:2", "ad:0.5", "--scheme", "me"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert_eq!(field(&text, "condition_ii"), "false");
    assert!(field(&text, "proportionality_residual").parse::<f64>().unwrap() > 1e-3);

    let out = chdisc(&["certify", "spm:3", "--scheme", "bell2", "--solve"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("necessary-only"));
    assert!((field(&text, "lambda0").parse::<f64>().unwrap() - 0.853553390593).abs() < 1e-9);
}
