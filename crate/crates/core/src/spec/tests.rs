use proptest::prelude::*;

use super::*;
use crate::analytic::spm_mei;
use crate::discrimination::{check_scheme_optimality, p_mei_two, CertificateSemantics};
use crate::random;

fn none() -> Bindings {
    Bindings::new()
}

fn temp_file(name: &str, contents: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("chdisc-spec-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn inline_forms_build_the_named_channels() {
    let id = parse_channel("identity:3", &none()).unwrap().build().unwrap();
    assert_eq!(id.choi().matrix(), channels::identity(3).choi().matrix());
    assert_eq!(parse_channel("id:2", &none()).unwrap(), ChannelSpec::Identity { dim: 2 });

    let ad = parse_channel("ad:0.5", &none()).unwrap().build().unwrap();
    assert_eq!(ad.kraus(), channels::amplitude_damping(0.5).unwrap().kraus());

    let wh = parse_channel("wh", &none()).unwrap().build().unwrap();
    assert_eq!(wh.choi().matrix(), channels::werner_holevo_qubit().choi().matrix());

    let dep = parse_channel("dep:3:0.25", &none()).unwrap().build().unwrap();
    assert_eq!(dep.choi().matrix(), channels::depolarizing(3, 0.25).unwrap().choi().matrix());

    let meas = parse_channel("meas:2", &none()).unwrap().build().unwrap();
    assert_eq!(meas.choi().matrix(), &CMatrix::from_real_diag(&[1.0, 0.0, 0.0, 1.0]));
}

#[test]
fn phases_with_a_bound_parameter() {
    let mut b = none();
    b.insert("xi".into(), 0.3);
    let spec = parse_channel("phases:0,pi/2,xi", &b).unwrap();
    let ChannelSpec::Unitary { dim, matrix } = &spec else { panic!("{spec:?}") };
    assert_eq!(*dim, 3);
    let u = matrix_from_entries(matrix, 3, 3).unwrap();
    let expected = CMatrix::from_diag(&[C64::new(1.0, 0.0), C64::from_polar(1.0, std::f64::consts::FRAC_PI_2), C64::from_polar(1.0, 0.3)]);
    assert!((&u - &expected).max_abs() < 1e-16);
    assert!(matches!(parse_channel("phases:0,xi", &none()), Err(SpecError::Parse { .. })));
}

#[test]
fn numbers() {
    let b: Bindings = [("theta".to_string(), 0.25)].into_iter().collect();
    assert_eq!(parse_number("0.5", &b).unwrap(), 0.5);
    assert_eq!(parse_number("-pi", &b).unwrap(), -std::f64::consts::PI);
    assert_eq!(parse_number("pi/4", &b).unwrap(), std::f64::consts::FRAC_PI_4);
    assert_eq!(parse_number("theta", &b).unwrap(), 0.25);
    for bad in ["", "pi/", "nan", "inf", "1e999", "x"] {
        assert!(parse_number(bad, &b).is_err(), "{bad}");
    }
}

#[test]
fn malformed_forms_are_rejected() {
    assert!(matches!(parse_channel("ad:2", &none()).unwrap().build(), Err(SpecError::Channel(ChannelError::ParameterOutOfRange { .. }))));
    for bad in ["foo:1", "identity:0", "identity", "ad", "ad:0.1:0.2", "unitary:file", "dep:2"] {
        assert!(parse_channel(bad, &none()).is_err(), "{bad}");
    }
    assert!(parse_channel("@/nonexistent/spec.json", &none()).is_err());
    assert!(ChannelSpec::from_json(r#"{"kind": "teleporter"}"#).is_err());
    let not_unitary = ChannelSpec::Unitary { dim: 2, matrix: vec![vec![[1.0, 0.0], [1.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]] };
    assert!(matches!(not_unitary.build(), Err(SpecError::Channel(ChannelError::NotUnitary { .. }))));
    let ragged = ChannelSpec::Unitary { dim: 2, matrix: vec![vec![[1.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]] };
    assert!(matches!(ragged.build(), Err(SpecError::Invalid(_))));
}

#[test]
fn json_records() {
    let wh = ChannelSpec::from_json(r#"{"kind": "werner_holevo"}"#).unwrap();
    assert_eq!(wh, ChannelSpec::WernerHolevo);
    let k = ChannelSpec::from_json(r#"{"kind": "kraus", "dim_in": 1, "dim_out": 2, "operators": [[[[0.6, 0]], [[0, 0.8]]]]}"#).unwrap();
    let ch = k.build().unwrap();
    assert_eq!(ch.dims(), BipartiteDims::new(2, 1));
    assert_eq!(ch.kraus()[0][(1, 0)], C64::new(0.0, 0.8));
}

#[test]
fn files() {
    let w = CMatrix::from_vec(2, 2, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
    let path = temp_file("u.json", &serde_json::to_string(&matrix_to_entries(&w)).unwrap());
    let ch = parse_channel(&format!("unitary:@{}", path.display()), &none()).unwrap().build().unwrap();
    assert_eq!(ch.kraus()[0], w);

    let rec = temp_file("ad.json", &ChannelSpec::AmplitudeDamping { theta: 0.3 }.to_json());
    for form in [format!("@{}", rec.display()), rec.display().to_string()] {
        assert_eq!(parse_channel(&form, &none()).unwrap(), ChannelSpec::AmplitudeDamping { theta: 0.3 });
    }
    let _ = std::fs::remove_file(path);
    let _ = std::fs::remove_file(rec);
}

#[test]
fn problems() {
    let p = parse_problem(&["spm:3".to_string()], 0.5, &none()).unwrap().build().unwrap();
    let pm = p_mei_two(p.channel(0), p.channel(1), 0.5).unwrap();
    assert!((pm - (0.5 + 1.0 / (3.0 * std::f64::consts::SQRT_2))).abs() < 1e-12);

    let spm = SpmProblem::rotated_pair(3).unwrap();
    assert!(!spm_mei(&spm, 0.5, 1e-8).unwrap());

    let args: Vec<String> = ["id:2", "wh", "ad:0.5"].iter().map(|s| s.to_string()).collect();
    let three = parse_problem(&args, 0.5, &none()).unwrap();
    assert_eq!(three.weights, vec![1.0 / 3.0; 3]);
    assert_eq!(three.build().unwrap().len(), 3);

    let spec = ProblemSpec::from_channels(vec![ChannelSpec::Identity { dim: 2 }, ChannelSpec::WernerHolevo], 0.3);
    let path = temp_file("problem.json", &serde_json::to_string(&spec).unwrap());
    assert_eq!(parse_problem(&[path.display().to_string()], 0.9, &none()).unwrap(), spec);
    let _ = std::fs::remove_file(path);

    assert!(parse_problem(&["id:2".to_string()], 0.5, &none()).is_err());
    let mismatched = ProblemSpec::from_channels(vec![ChannelSpec::Identity { dim: 2 }, ChannelSpec::Identity { dim: 3 }], 0.5);
    assert!(matches!(mismatched.build(), Err(SpecError::Discrimination(DiscriminationError::DimensionMismatch { .. }))));
}

#[test]
fn schemes() {
    let mut rng = random::rng(50);
    let unital = DiscriminationProblem::two(random::unital_qubit_channel(&mut rng), random::unital_qubit_channel(&mut rng), 0.5).unwrap();
    let cert = check_scheme_optimality(&unital, &parse_scheme("me", &unital).unwrap()).unwrap();
    assert!(cert.verdict && cert.semantics == CertificateSemantics::Sufficient);

    let spm = parse_problem(&["spm:3".to_string()], 0.5, &none()).unwrap().build().unwrap();
    let cert = check_scheme_optimality(&spm, &parse_scheme("bell2", &spm).unwrap()).unwrap();
    assert!(cert.verdict && cert.semantics == CertificateSemantics::NecessaryOnly);
    let cert = check_scheme_optimality(&spm, &parse_scheme("product:0", &spm).unwrap()).unwrap();
    assert!(cert.condition_i && cert.condition_ii);

    let s = parse_scheme("me", &spm).unwrap();
    let spec = SchemeSpec {
        dim_in: 3,
        dim_out: 3,
        input_state: s.input_state().amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        povm: s.povm().effects().iter().map(|e| matrix_to_entries(e.matrix())).collect(),
    };
    let path = temp_file("scheme.json", &serde_json::to_string(&spec).unwrap());
    let back = parse_scheme(&path.display().to_string(), &spm).unwrap();
    assert_eq!(back.povm().effects()[0].matrix(), s.povm().effects()[0].matrix());
    let _ = std::fs::remove_file(path);

    for bad in ["product:3", "product", "nope"] {
        assert!(parse_scheme(bad, &spm).is_err(), "{bad}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kraus_and_choi_records_round_trip_bit_exactly(seed in any::<u64>(), dh in 1usize..=3, dk in 1usize..=3, rank in 1usize..=4) {
        let mut rng = random::rng(seed);
        let ch = random::channel(&mut rng, dh, dk, rank);

        let k = ChannelSpec::kraus_of(&ch);
        let back = ChannelSpec::from_json(&k.to_json()).unwrap();
        prop_assert_eq!(&back, &k);
        let rebuilt = back.build().unwrap();
        prop_assert_eq!(rebuilt.kraus(), ch.kraus());
        prop_assert_eq!(ChannelSpec::kraus_of(&rebuilt).to_json(), k.to_json());

        let c = ChannelSpec::choi_of(&ch);
        let back = ChannelSpec::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(&back, &c);
        let rebuilt = back.build().unwrap();
        prop_assert_eq!(rebuilt.choi().matrix(), ch.choi().matrix());
    }
}
