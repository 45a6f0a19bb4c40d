use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use vlfuse::fusion::normalize_stacked;
use vlfuse::io::{format_sig6, parse_config_str, serialize_config, RunConfig};
use vlfuse::numeric::solve_least_squares;
use vlfuse::ridge::{hkb_ridge_parameter, ridge_solve_step};
use vlfuse::sim::{child_seed, intersection_error_bound, NoiseSpec, ScenarioSpec};
use vlfuse::{Algorithm, PlatformPose, Point3, ProjectionMatrix};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-10.0..10.0_f64, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn vector(len: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-10.0..10.0_f64, len).prop_map(DVector::from_vec)
}

fn system() -> impl Strategy<Value = (DMatrix<f64>, DVector<f64>)> {
    (6usize..30).prop_flat_map(|rows| (matrix(rows, 4), vector(rows)))
}

proptest! {
    #[test]
    fn normalized_blocks_span_the_unit_interval(
        (dpsi, hv) in (4usize..20).prop_flat_map(|n| (vector(n), matrix(n, 3))),
        (dphi, hr) in (2usize..10).prop_flat_map(|n| (vector(n), matrix(n, 3))),
    ) {
        prop_assume!(dpsi.max() - dpsi.min() > 1e-6 && dphi.max() - dphi.min() > 1e-6);
        let sys = normalize_stacked(&dpsi, &dphi, &hv, &hr).unwrap();
        let nv = dpsi.len();
        for (i, v) in sys.response.iter().enumerate() {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(v), "row {i}: {v}");
        }
        let vision = sys.response.rows(0, nv);
        let range = sys.response.rows(nv, dphi.len());
        prop_assert!(vision.min().abs() < 1e-12 && (vision.max() - 1.0).abs() < 1e-12);
        prop_assert!(range.min().abs() < 1e-12 && (range.max() - 1.0).abs() < 1e-12);
        // The offset column reproduces the raw residual when w = 1.
        let w1 = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);
        let raw = &sys.response - &sys.t * w1;
        let vs = dpsi.max() - dpsi.min();
        for i in 0..nv {
            prop_assert!((raw[i] * vs - dpsi[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn hkb_ignores_row_order((t, dphi) in system(), shift in 0usize..64) {
        let base = hkb_ridge_parameter(&t, &dphi);
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        let rows = t.nrows();
        let perm: Vec<usize> = (0..rows).map(|i| (i * 7 + shift) % rows).collect();
        prop_assume!({
            let mut p = perm.clone();
            p.sort_unstable();
            p.dedup();
            p.len() == rows
        });
        let tp = DMatrix::from_fn(rows, 4, |i, j| t[(perm[i], j)]);
        let dp = DVector::from_fn(rows, |i, _| dphi[perm[i]]);
        let other = hkb_ridge_parameter(&tp, &dp).unwrap();
        prop_assert_eq!(base.rank, other.rank);
        prop_assert!((base.k - other.k).abs() <= 1e-9 * base.k.abs().max(1e-12));
    }

    #[test]
    fn hkb_is_non_negative((t, dphi) in system()) {
        if let Ok(h) = hkb_ridge_parameter(&t, &dphi) {
            prop_assert!(h.k >= 0.0 && h.delta0_sq >= 0.0);
        }
    }

    #[test]
    fn ridge_shrinks_monotonically((t, dphi) in system(), mut ks in prop::collection::vec(0.0..100.0_f64, 2..8)) {
        ks.sort_by(f64::total_cmp);
        let norms: Vec<f64> = ks.iter().filter(|&&k| k > 0.0).map(|&k| ridge_solve_step(&t, &dphi, k).unwrap().norm()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn ridge_at_zero_is_least_squares((t, dphi) in system()) {
        let ls = solve_least_squares(&t, &dphi).unwrap();
        prop_assume!(!ls.rank_deficient);
        let r = ridge_solve_step(&t, &dphi, 0.0).unwrap();
        prop_assert!((&r - &ls.solution).norm() <= 1e-8 * ls.solution.norm().max(1.0));
    }

    #[test]
    fn bound_grows_with_delta_and_shrinking_gamma(
        gamma in 2.0..170.0_f64,
        frac in 0.01..0.45_f64,
        base in 10.0..5000.0_f64,
    ) {
        let delta = gamma / 2.0 * frac;
        let e = intersection_error_bound(gamma, delta, base).unwrap();
        prop_assert!(e > 0.0);
        prop_assert!(intersection_error_bound(gamma, delta * 1.1, base).unwrap() > e);
        prop_assert!(intersection_error_bound(gamma * 0.95, delta, base).unwrap() > e);
        // Linear in the baseline.
        let scaled = intersection_error_bound(gamma, delta, 2.0 * base).unwrap();
        prop_assert!((scaled - 2.0 * e).abs() <= 1e-9 * e);
    }

    #[test]
    fn sig6_round_trips_to_six_digits(v in prop::num::f64::NORMAL) {
        let s = format_sig6(v);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-6 * v.abs(), "{v} -> {s}");
    }

    #[test]
    fn projection_inverts_its_ray(
        px in -3000.0..3000.0_f64,
        py in -3000.0..3000.0_f64,
        depth in 10.0..10000.0_f64,
        yaw in -180.0..180.0_f64,
        pitch in -80.0..80.0_f64,
    ) {
        let pose = PlatformPose::from_ypr_deg(Point3::new(100.0, -50.0, 2000.0), yaw, pitch, 0.0).unwrap();
        let p = ProjectionMatrix::build(&Default::default(), &pose);
        let pixel = vlfuse::Pixel::new(px, py);
        let ray = p.ray_direction(&pixel).unwrap();
        let x = p.camera_center().unwrap() + ray * depth;
        let back = p.project(&x).unwrap();
        prop_assert!((back.x - px).abs() < 1e-6 && (back.y - py).abs() < 1e-6);
    }

    #[test]
    fn config_round_trips(
        trials in 1usize..100_000,
        seed in 0u64..=i64::MAX as u64,
        gammas in prop::collection::vec(0.5..179.5_f64, 1..10),
        n_obs in 2usize..100,
        pos in 0.0..50.0_f64,
        threshold in 1e-9..1.0_f64,
    ) {
        let cfg = RunConfig {
            trials,
            seed,
            gamma_sweep: gammas,
            algorithms: vec![Algorithm::Fused, Algorithm::Los],
            scenario: ScenarioSpec { n_obs, ..ScenarioSpec::default() },
            noise: NoiseSpec { pos_sigma: pos, ..NoiseSpec::default() },
            solver: vlfuse::SolverConfig { threshold, ..Default::default() },
            ..RunConfig::default()
        };
        let text = serialize_config(&cfg).unwrap();
        prop_assert_eq!(parse_config_str(&text).unwrap(), cfg);
    }

    #[test]
    fn child_seeds_differ_across_masters(master in any::<u64>(), trial in 0u64..1_000_000) {
        prop_assert_ne!(child_seed(master, trial), child_seed(master, trial + 1));
        prop_assert_ne!(child_seed(master, trial), child_seed(master ^ 1, trial));
    }
}
