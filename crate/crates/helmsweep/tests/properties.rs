use helmsweep::assembly::{dump_field, parse_field, random_source};
use helmsweep::harness::verify::suite_problem;
use helmsweep::harness::{parse_source, run_experiment, Driver, ExperimentConfig, Setting, SourceSpec};
use helmsweep::linalg::{block_tridiag_factor, LinearMap, StopOn};
use helmsweep::mesh::{evaluate_k, layered_wavenumber};
use helmsweep::partition::{make_strip_partition, Direction};
use helmsweep::precond::{build_method, MethodSpec, METHOD_NAMES};
use helmsweep::transmission::TransmissionKind;
use helmsweep::C64;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn rel_gap(a: &[C64], b: &[C64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let s: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    d / s.max(1e-300)
}

fn kind_for(name: &str) -> TransmissionKind {
    match name {
        "slp1" | "slp2" | "resid-sub" | "source-transfer" => TransmissionKind::Pml(3),
        _ => TransmissionKind::IdentExt,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn layered_profile_is_piecewise_constant(
        base in prop::collection::vec(5.0..40.0f64, 1..5),
        alpha in 0.0..1.0f64,
        repeats in 1usize..4,
        x in 0.001..0.999f64,
    ) {
        let delta: Vec<f64> = base.iter().map(|b| b / 2.0).collect();
        let prof = layered_wavenumber(&base, &delta, alpha, repeats).unwrap();
        let n = base.len() * repeats;
        let l = (x * n as f64).floor() as usize;
        prop_assume!((x * n as f64 - l as f64).abs() > 1e-9);
        let want = base[l % base.len()] + alpha * delta[l % base.len()];
        prop_assert!((evaluate_k(&prof, x).unwrap() - want).abs() < 1e-12);
        prop_assert!(evaluate_k(&prof, 0.0).is_err() && evaluate_k(&prof, 1.0 + x).is_err());
    }

    #[test]
    fn weights_partition_unity(jc in 2usize..6, overlap in 0usize..3, forward in any::<bool>()) {
        let pb = suite_problem(23, 0.5, false);
        let Ok(part) = make_strip_partition(&pb.op, jc, overlap) else { return Ok(()) };
        let dir = if forward { Direction::Forward } else { Direction::Backward };
        let sums = part.weighting(dir).line_sums(pb.op.n_lines());
        prop_assert!(sums.iter().all(|&s| s == 1.0), "{sums:?}");
    }

    #[test]
    fn field_dump_round_trips(seed in any::<u64>(), open in any::<bool>()) {
        let pb = suite_problem(7, 0.3, open);
        let u = random_source(&pb.op, seed);
        let rows = parse_field(&dump_field(&pb.op, &u, true).unwrap()).unwrap();
        let back: Vec<C64> = rows.into_iter().flat_map(|(_, v)| v).collect();
        prop_assert_eq!(back, u);
    }

    #[test]
    fn source_specs_round_trip(i in -5i64..100, j in -5i64..100, seed in any::<u64>()) {
        prop_assert_eq!(parse_source(&format!("point:{i},{j}")).unwrap(), SourceSpec::Point(i, j));
        prop_assert_eq!(parse_source(&format!("random:{seed}")).unwrap(), SourceSpec::Random(seed));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn methods_are_linear(
        which in 0..METHOD_NAMES.len(),
        alpha in 0.0..1.0f64,
        s1 in any::<u64>(),
        s2 in any::<u64>(),
        a in (-2.0..2.0f64, -2.0..2.0f64),
        b in (-2.0..2.0f64, -2.0..2.0f64),
    ) {
        let name = METHOD_NAMES[which];
        let pb = suite_problem(15, alpha, false);
        let m = build_method(&pb, &MethodSpec::new(name, 2, kind_for(name))).unwrap();
        let (x, y) = (random_source(&pb.op, s1), random_source(&pb.op, s2));
        let (a, b) = (C64::new(a.0, a.1), C64::new(b.0, b.1));
        let xy: Vec<C64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let (mx, my) = (m.apply(&x), m.apply(&y));
        let want: Vec<C64> = mx.iter().zip(&my).map(|(p, q)| a * p + b * q).collect();
        prop_assert!(rel_gap(&m.apply(&xy), &want) < 1e-12, "{name}");
    }

    #[test]
    fn block_solve_matches_dense_lu(alpha in 0.0..1.0f64, open in any::<bool>(), seed in any::<u64>()) {
        let pb = suite_problem(9, alpha, open);
        let f = random_source(&pb.op, seed);
        let u = block_tridiag_factor(&pb.op.to_block_system()).unwrap().solve(&f);
        let n = pb.op.dim();
        let a = DMatrix::from_row_slice(n, n, pb.op.to_dense().as_slice());
        let oracle = a.lu().solve(&DVector::from_column_slice(&f)).unwrap();
        prop_assert!(rel_gap(&u, oracle.as_slice()) < 1e-10);
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), gmres in any::<bool>()) {
        let cfg = ExperimentConfig {
            nx: 15,
            ny: 15,
            base_k: vec![10.0; 4],
            delta_k: vec![0.0, 10.0, 5.0, -5.0],
            alpha: 0.1,
            repeats: 1,
            outer: "pml:3".into(),
            setting: Setting::Open,
            p: 4,
            method: "dosm".into(),
            transmission: "ident-ext".into(),
            driver: if gmres { Driver::Gmres } else { Driver::Richardson },
            tol: 1e-6,
            maxit: 50,
            seed,
            overlap: 0,
            theta: 0.5,
            stop: StopOn::Preconditioned,
        };
        let (r1, r2) = (run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
        prop_assert_eq!(r1.report.history, r2.report.history);
        prop_assert_eq!(r1.solution, r2.solution);
    }
}
