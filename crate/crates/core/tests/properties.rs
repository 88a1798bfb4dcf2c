mod common;

use std::f64::consts::PI;

use kbf_core::cli::config::parse_config;
use kbf_core::cli::output::snapshot_csv;
use kbf_core::initial::{parse_profile_csv, profile_on_grid};
use kbf_core::{
    apply_linear, build_propagator, derivative, evolve, linear_symbol, nonlinear_rhs_physical,
    nonlinear_rhs_spectral, to_physical, to_spectral, ModelParams, NormSpec, SolveConfig,
};
use num_complex::Complex64;
use proptest::prelude::*;

use common::{grid, max_abs_diff, random_band_limited, rng};

/// Direct O(N^2) forward DFT, unscaled.
fn direct_dft(v: &[f64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|k| {
            v.iter()
                .enumerate()
                .map(|(j, &x)| x * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn real_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

fn params() -> impl Strategy<Value = ModelParams> {
    (0.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)
        .prop_map(|(a, b, c, d, e)| ModelParams::new(a, b, c, d, e).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_transform_matches_direct_sum(v in real_vec(32)) {
        let g = grid(32);
        let s = to_spectral(&v, &g).unwrap();
        for (a, b) in s.coeffs().iter().zip(direct_dft(&v)) {
            prop_assert!((a - b).norm() <= 1e-11);
        }
        prop_assert!(max_abs_diff(&to_physical(&s).unwrap(), &v) <= 1e-12);
    }

    #[test]
    fn parseval(v in real_vec(64)) {
        let g = grid(64);
        let direct = (g.spacing() * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        let spectral = to_spectral(&v, &g).unwrap().norm(NormSpec::l2());
        prop_assert!((direct - spectral).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn transform_and_derivative_are_linear(u in real_vec(32), v in real_vec(32), a in -3.0f64..3.0) {
        let g = grid(32);
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + y).collect();
        let su = to_spectral(&u, &g).unwrap();
        let sv = to_spectral(&v, &g).unwrap();
        let sw = to_spectral(&w, &g).unwrap();
        let combo = sv.add_scaled(a, &su).unwrap();
        prop_assert!(sw.sub(&combo).unwrap().norm(NormSpec::l2()) <= 1e-12 * sw.norm(NormSpec::l2()).max(1.0));
        for order in 1..=3 {
            let lhs = derivative(&sw, order).unwrap();
            let rhs = derivative(&sv, order).unwrap().add_scaled(a, &derivative(&su, order).unwrap()).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().norm(NormSpec::l2()) <= 1e-12 * lhs.norm(NormSpec::l2()).max(1.0) * 4f64.powi(order as i32));
        }
    }

    #[test]
    fn first_derivative_twice_is_second(seed in any::<u64>()) {
        let g = grid(64);
        let u = random_band_limited(&g, 31, &mut rng(seed));
        let a = derivative(&derivative(&u, 1).unwrap(), 1).unwrap();
        let b = derivative(&u, 2).unwrap();
        prop_assert!(a.sub(&b).unwrap().norm(NormSpec::l2()) <= 1e-12 * b.norm(NormSpec::l2()));
    }

    #[test]
    fn linear_flow_is_dissipative(seed in any::<u64>(), p in params(), t in 0.0f64..2.0) {
        let g = grid(32);
        let u = random_band_limited(&g, 15, &mut rng(seed));
        let v = apply_linear(&build_propagator(&linear_symbol(&p, &g), t).unwrap(), &u).unwrap();
        for s in 0..=2 {
            prop_assert!(v.norm(NormSpec::hs(s)) <= u.norm(NormSpec::hs(s)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn nonlinear_rhs_physical_equals_spectral(seed in any::<u64>(), p in params()) {
        let g = grid(96);
        let u = random_band_limited(&g, 15, &mut rng(seed));
        let phys = nonlinear_rhs_physical(&to_physical(&u).unwrap(), &p, &g).unwrap();
        let spec = to_physical(&nonlinear_rhs_spectral(&u, &p, None).unwrap()).unwrap();
        let scale = phys.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(max_abs_diff(&phys, &spec) <= 1e-10 * scale);
    }

    #[test]
    fn snapshot_csv_round_trips(seed in any::<u64>()) {
        let g = grid(64);
        let u = random_band_limited(&g, 20, &mut rng(seed));
        let text = snapshot_csv(&u, &[("step", "0".into())]).unwrap();
        let back = profile_on_grid(&parse_profile_csv(&text).unwrap(), &g).unwrap();
        let orig = to_physical(&u).unwrap();
        for (a, b) in back.iter().zip(&orig) {
            prop_assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    #[test]
    fn config_round_trips(
        nu in 0.0f64..5.0,
        mu in -5.0f64..5.0,
        gamma in -5.0f64..5.0,
        n_pow in 3u32..9,
        steps in 1usize..500,
        t_final in 0.1f64..10.0,
        stride in 0usize..50,
    ) {
        let src = format!(
            "nu = {nu}\nmu = {mu}\ngamma = {gamma}\neps_conv = 1\neps_react = 0.5\n\
             n_modes = {}\ndt = {}\nt_final = {t_final}\nsnapshot_stride = {stride}\n\
             scheme = lie_trotter\nic.kind = mode\nic.mode_k = 3\nnorm = H2\n",
            1usize << n_pow,
            t_final / steps as f64,
        );
        let cfg = parse_config(&src, &[]).unwrap();
        let again = parse_config(&cfg.to_kv(), &[]).unwrap();
        prop_assert_eq!(cfg, again);
    }
}

#[test]
fn constants_stay_fixed_for_1000_steps() {
    let g = grid(64);
    let p = ModelParams::default();
    for c in [0.0, 1.0] {
        let init = to_spectral(&vec![c; 64], &g).unwrap();
        let traj = evolve(&init, &p, &SolveConfig::new(0.005, 5.0), None).unwrap();
        assert_eq!(traj.steps_taken, 1000);
        assert!(max_abs_diff(&to_physical(&traj.final_state).unwrap(), &[c; 64]) <= 1e-10);
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    let g = grid(128);
    let p = ModelParams::default();
    let init = common::benchmark_state(&g);
    let cfg = SolveConfig::new(1.0 / 64.0, 1.0);
    let a = evolve(&init, &p, &cfg, None).unwrap();
    let b = evolve(&init, &p, &cfg, None).unwrap();
    for (x, y) in a.final_state.coeffs().iter().zip(b.final_state.coeffs()) {
        assert_eq!(x.re.to_bits(), y.re.to_bits());
        assert_eq!(x.im.to_bits(), y.im.to_bits());
    }
}
