use super::*;

fn ad_sweep(count: usize, solve: bool) -> SweepSpec {
    SweepSpec {
        parameter: "theta".into(),
        grid: Grid::new(0.0, 1.0, count).unwrap(),
        channels: vec!["id:2".into(), "ad:theta".into()],
        lambda: 0.5,
        solve,
    }
}

fn csv(rows: &[SweepRow]) -> String {
    let mut out = Vec::new();
    write_csv(rows, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn grids() {
    let g = Grid::parse("0:1:5").unwrap();
    assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    let g = Grid::parse("0:pi:100").unwrap();
    let p = g.points();
    assert_eq!((p.len(), p[0], p[99]), (100, 0.0, std::f64::consts::PI));
    for bad in ["0:1", "0:1:1", "0:1:-3", "a:1:3", "0:1:3:4"] {
        assert!(Grid::parse(bad).is_err(), "{bad}");
    }
}

#[test]
fn significant_digits() {
    let cases = [
        (0.0, "0"),
        (-0.0, "0"),
        (0.5, "0.5"),
        (1.0, "1"),
        (std::f64::consts::PI, "3.14159265359"),
        (0.853_553_390_593_273_8, "0.853553390593"),
        (-2.0 / 3.0, "-0.666666666667"),
        (1.0 / 3.0 * 1e-9, "3.33333333333e-10"),
        (1.234e-5, "0.00001234"),
        (6.02214076e23, "6.02214076e23"),
        (9.999_999_999_999_5, "10"),
        (123_456_789_012_345.0, "1.23456789012e14"),
    ];
    for (x, s) in cases {
        assert_eq!(format_sig(x), s, "{x:e}");
    }
}

#[test]
fn amplitude_damping_sweep_without_solver() {
    let rows = run_sweep(&ad_sweep(11, false), Execution::Sequential).unwrap();
    assert_eq!(rows.len(), 11);
    assert!((rows[0].p_mei - 0.5).abs() < 1e-12 && (rows[0].upper_bound - 0.5).abs() < 1e-12);
    for r in &rows {
        let theta = r.param;
        let root = (theta * theta + 4.0 * (1.0 - (1.0 - theta).sqrt()).powi(2)).sqrt();
        let l1 = (theta + root) / 2.0;
        assert!((r.p_mei - 0.5 * (1.0 + 0.5 * l1)).abs() < 1e-9, "θ = {theta}");
        assert!(r.p_mei <= r.upper_bound + 1e-12 && r.p_opt.is_none());
    }
    let text = csv(&rows);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.next().unwrap().split(',').collect::<Vec<_>>()[2], "");
    assert_eq!(lines.count(), 10);
}

#[test]
fn solved_sweep_sandwich_and_determinism() {
    let spec = ad_sweep(6, true);
    let seq = run_sweep(&spec, Execution::Sequential).unwrap();
    for r in &seq {
        let p = r.p_opt.unwrap();
        assert!(r.p_mei <= p + 2e-6 && p <= r.upper_bound + 2e-6, "{r:?}");
    }
    let par = run_sweep(&spec, Execution::with_threads(Some(3))).unwrap();
    assert_eq!(csv(&seq), csv(&par));
    assert_eq!(csv(&seq), csv(&run_sweep(&spec, Execution::Sequential).unwrap()));
}

#[test]
fn unitary_family_sweep() {
    let spec = SweepSpec {
        parameter: "xi".into(),
        grid: Grid::new(0.0, std::f64::consts::TAU, 5).unwrap(),
        channels: vec!["id:3".into(), "phases:0,pi/2,xi".into()],
        lambda: 0.5,
        solve: false,
    };
    let rows = run_sweep(&spec, Execution::Sequential).unwrap();
    // ξ = π gives diag(1, i, −1) with trace i: not traceless, three distinct phases
    assert!(!rows[2].mei);
    assert!(rows.iter().all(|r| r.p_mei <= r.upper_bound + 1e-12));
}

#[test]
fn invalid_sweeps() {
    let mut s = ad_sweep(3, false);
    s.grid = Grid::new(0.0, 2.0, 3).unwrap();
    assert!(matches!(run_sweep(&s, Execution::Sequential), Err(SpecError::Channel(_))));
    let mut s = ad_sweep(3, false);
    s.channels = vec!["id:2".into(), "ad:0.5".into()];
    assert!(matches!(s.validate(), Err(SpecError::Invalid(_))));
    let mut s = ad_sweep(3, false);
    s.channels.truncate(1);
    assert!(s.validate().is_err());
}
