mod common;

use std::f64::consts::PI;

use ar1cd::bayes::{log_c2_ratio_via_b, spike_from_cd, spike_from_curve, FLAT_PRIOR_LOWER};
use ar1cd::stats::mean_var;
use ar1cd::{
    delta_method_sd, flat_prior_cd, g_func, h_func, implied_log_prior, integrated_likelihood,
    mle_phi, proposition1_check, quantity_b, spike_prior_cd, CdSource, DensityModel, Error,
    PhiGrid, Prop1Config, Prop1Density, Sigma2Mode, TimeSeries,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use common::{ar1_path, naive_phi_hat, normals, rel_err};

fn ts(v: &[f64]) -> TimeSeries {
    TimeSeries::new(v.to_vec()).unwrap()
}

/// Conditional-density log-likelihood written out term by term.
fn oracle_log_lik(y: &[f64], phi: f64, sigma2: f64) -> f64 {
    let mut prev = 0.0;
    let mut ll = 0.0;
    for &v in y {
        let e = v - phi * prev;
        ll += -0.5 * (2.0 * PI * sigma2).ln() - e * e / (2.0 * sigma2);
        prev = v;
    }
    ll
}

/// `log` of the normal density with mean `phi_obs` and variance
/// `(1 - phi_obs^2) / n`.
fn oracle_log_c2(phi: f64, phi_obs: f64, n: usize) -> f64 {
    let var = (1.0 - phi_obs * phi_obs) / n as f64;
    -0.5 * (2.0 * PI * var).ln() - (phi - phi_obs).powi(2) / (2.0 * var)
}

#[test]
fn b_examples() {
    assert_eq!(quantity_b(&ts(&[1.0, 0.0]), 0.0, 1.0).unwrap(), -1.0);
    assert!(matches!(
        quantity_b(&ts(&[1.0, 1.0, 1.0]), 0.2, 1.0),
        Err(Error::Domain(_))
    ));
    assert!(log_c2_ratio_via_b(&ts(&[1.0, 0.5]), 0.2, 0.0).is_err());
}

proptest! {
    #[test]
    fn ratio_paths_agree(
        seed in 0u64..10_000,
        n in 5usize..300,
        phi0 in -0.8f64..0.8,
        phi in -0.99f64..0.99,
        sigma2 in 0.3f64..3.0,
    ) {
        let y = ar1_path(phi0, sigma2.sqrt(), &normals(seed, n));
        let phi_obs = naive_phi_hat(&y);
        prop_assume!(phi_obs.abs() < 0.99);
        let direct = oracle_log_c2(phi, phi_obs, n) - oracle_log_lik(&y, phi, sigma2);
        let s = ts(&y);
        let via_b = log_c2_ratio_via_b(&s, phi, sigma2).unwrap();
        prop_assert!(rel_err(via_b, direct) < 1e-9, "{via_b} vs {direct}");
        let implied = implied_log_prior(&s, phi, Sigma2Mode::Known(sigma2), &DensityModel::ClosedFormC2).unwrap();
        prop_assert!(rel_err(implied, direct) < 1e-9);
    }

    #[test]
    fn spike_prior_is_monotone_with_exact_jump(seed in 0u64..1000, b in 0.0f64..0.99) {
        let y = ar1_path(0.7, 1.0, &normals(seed, 40));
        let grid = PhiGrid::to_unit_root(FLAT_PRIOR_LOWER, 300).unwrap();
        let spike = spike_prior_cd(&ts(&y), &grid, b).unwrap();
        let v = &spike.cd.values;
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(v[v.len() - 1], 1.0 - b);
        prop_assert_eq!(v[0], 0.0);
    }
}

#[test]
fn scaled_b_tends_to_minus_sigma2() {
    let (phi0, sigma2) = (0.5, 2.0f64);
    let mut previous = f64::INFINITY;
    for n in [1_000usize, 10_000, 100_000] {
        let mut deviations = Vec::new();
        for r in 0..20 {
            let y = ar1_path(phi0, sigma2.sqrt(), &normals(300 + r, n));
            let s = ts(&y);
            for phi in [0.2, 0.5, 0.8] {
                let scaled = quantity_b(&s, phi, sigma2).unwrap() / n as f64;
                deviations.push((scaled + sigma2).abs());
                if n == 100_000 {
                    assert!((scaled / sigma2 + 1.0).abs() < 0.05, "{scaled}");
                }
            }
        }
        let mad = deviations.iter().sum::<f64>() / deviations.len() as f64;
        assert!(mad < previous, "n = {n}: {mad} >= {previous}");
        previous = mad;
    }
}

#[test]
fn h_and_g_values_and_identity() {
    assert_eq!(h_func(0.0, 0.0).unwrap(), 1.0);
    assert_eq!(g_func(0.0, 0.0).unwrap(), 1.0);
    assert!((h_func(0.5, 0.5).unwrap() - 1.1547005383792515).abs() < 1e-12);
    for k in -9..=9 {
        let p0 = k as f64 / 10.0;
        let q = 1.0 - p0 * p0;
        assert!(rel_err(h_func(p0, p0).unwrap(), q.powf(-0.5)) < 1e-12);
        assert!(rel_err(g_func(p0, p0).unwrap(), 1.0 / q) < 1e-12);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    for _ in 0..20 {
        let phi = rng.random_range(-1.0..1.0);
        let phi0 = rng.random_range(-0.95..0.95);
        let h = h_func(phi, phi0).unwrap();
        let g = g_func(phi, phi0).unwrap();
        assert!(rel_err(h, g * (1.0 - phi0 * phi0).sqrt()) < 1e-12);
    }
    assert!(h_func(0.0, 1.0).is_err());
    assert!(g_func(0.0, -1.2).is_err());
}

#[test]
fn integrated_likelihood_shapes() {
    let grid = PhiGrid::new(-1.0, 1.0, 400).unwrap();
    let flat = integrated_likelihood(&ts(&[0.0, 0.0, 0.0]), &grid, 1.0).unwrap();
    for (&phi, &c) in grid.points().iter().zip(&flat.cumulative) {
        assert!((c / flat.total() - (phi + 1.0) / 2.0).abs() < 1e-12);
    }

    // Likelihood proportional to exp(-400 (phi - 0.5)^2 / 2).
    let il = integrated_likelihood(&ts(&[20.0, 10.0]), &grid, 1.0).unwrap();
    assert_eq!(
        il.profile.relative().iter().copied().fold(0.0, f64::max),
        1.0
    );
    assert!(il.cumulative.windows(2).all(|w| w[0] <= w[1]));
    let half = il.total() / 2.0;
    let k = il.cumulative.iter().position(|&c| c >= half).unwrap();
    let (c0, c1) = (il.cumulative[k - 1], il.cumulative[k]);
    let (p0, p1) = (grid.points()[k - 1], grid.points()[k]);
    let mid = p0 + (half - c0) / (c1 - c0) * (p1 - p0);
    assert!((mid - 0.5).abs() < 1e-3, "{mid}");
}

/// Composite Simpson rule with `m` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for k in 1..m {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn integrated_likelihood_matches_fine_quadrature() {
    let y = ar1_path(0.6, 1.0, &normals(19, 60));
    let grid = PhiGrid::to_unit_root(FLAT_PRIOR_LOWER, 2000).unwrap();
    let il = integrated_likelihood(&ts(&y), &grid, 1.0).unwrap();
    let peak = oracle_log_lik(&y, naive_phi_hat(&y), 1.0);
    let f = |phi: f64| (oracle_log_lik(&y, phi, 1.0) - peak).exp();
    let lo = grid.first();
    let total = simpson(f, lo, 1.0, 20_000);
    for k in (200..=2000).step_by(200) {
        let phi = grid.points()[k];
        let part = simpson(f, lo, phi, 20_000);
        if part < 1e-3 * total {
            continue;
        }
        let got = il.cumulative[k] / il.total();
        assert!(
            rel_err(got, part / total) < 1e-4,
            "{phi}: {got} vs {}",
            part / total
        );
    }
}

#[test]
fn flat_and_spike_prior_endpoints() {
    let y = ar1_path(0.9, 1.0, &normals(23, 80));
    let s = ts(&y);
    let grid = PhiGrid::to_unit_root(FLAT_PRIOR_LOWER, 800).unwrap();
    let flat = flat_prior_cd(&s, &grid).unwrap();
    assert_eq!(flat.source, CdSource::FlatPrior);
    assert_eq!(flat.values[0], 0.0);
    assert_eq!(flat.values[800], 1.0);
    assert_eq!(flat.phi_obs, mle_phi(&s).unwrap());

    let zero = spike_prior_cd(&s, &grid, 0.0).unwrap();
    assert_eq!(zero.cd.values, flat.values);
    assert_eq!(zero.cd.source, CdSource::SpikePrior);
    let spike = spike_prior_cd(&s, &grid, 0.3).unwrap();
    assert_eq!(spike.cd.values[800], 0.7);
    for (a, b) in spike.cd.values.iter().zip(&flat.values).take(800) {
        assert!((a - 0.7 * b).abs() < 1e-15);
    }
    assert!(spike_prior_cd(&s, &grid, 1.0).is_err());
    assert!(spike_prior_cd(&s, &grid, -0.1).is_err());

    assert!((spike_from_cd(0.88) - 0.12).abs() < 1e-15);
    assert!((spike_from_curve(0.76) - 0.24).abs() < 1e-15);
}

#[test]
fn lagged_sum_of_squares_moments_match_exact_values() {
    // y_t = sum_j phi^{t-j} e_j, so sum_{t<n} y_t^2 = e' C e with
    // C = L L'; mean sigma2 tr(C) and variance 2 sigma2^2 tr(C^2).
    let (n, reps, sigma2) = (400usize, 20_000u64, 1.0);
    for phi0 in [0.5f64, 0.8] {
        let m = n - 1;
        let mut l = vec![0.0; m * m];
        for t in 0..m {
            for j in 0..=t {
                l[t * m + j] = phi0.powi((t - j) as i32);
            }
        }
        let mut c = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                c[i * m + j] = (0..=i.min(j)).map(|k| l[i * m + k] * l[j * m + k]).sum();
            }
        }
        let trace: f64 = (0..m).map(|i| c[i * m + i]).sum();
        let trace_sq: f64 = c.iter().map(|v| v * v).sum();
        let sums: Vec<f64> = (0..reps)
            .map(|r| {
                let y = ar1_path(phi0, 1.0, &normals(900_000 + r, n));
                ts(&y).stats().sum_sq_lag
            })
            .collect();
        let (mean, var) = mean_var(&sums);
        let se = (var / reps as f64).sqrt();
        assert!(
            (mean - sigma2 * trace).abs() < 3.0 * se,
            "{phi0}: {mean} vs {trace}"
        );
        assert!(
            rel_err(var, 2.0 * trace_sq) < 0.10,
            "{phi0}: {var} vs {}",
            2.0 * trace_sq
        );
    }
}

fn prop1_config(phi0: f64, n: usize, reps: usize) -> Prop1Config {
    let mut cfg = Prop1Config::new(phi0, 1.0, n, reps, 5).unwrap();
    cfg.grid = PhiGrid::new(0.3, 0.7, 8).unwrap();
    cfg
}

#[test]
fn fluctuation_matches_delta_method() {
    let (phi0, n) = (0.5, 1600);
    let report = proposition1_check(&prop1_config(phi0, n, 4000)).unwrap();
    let delta = report.delta_sd.as_ref().unwrap();
    for ((&phi, &sd), &d) in report.grid.points().iter().zip(&report.sd_curve).zip(delta) {
        assert!(rel_err(sd, d) < 0.06, "{phi}: {sd} vs {d}");
    }

    // Same statistic computed from scratch on independent noise.
    let curves: Vec<Vec<f64>> = (0..3000)
        .map(|r| {
            let y = ar1_path(phi0, 1.0, &normals(2_000_000 + r, n));
            let phi_obs = naive_phi_hat(&y);
            [0.3, 0.5, 0.7]
                .iter()
                .map(|&phi| {
                    (oracle_log_c2(phi, phi_obs, n) - oracle_log_lik(&y, phi, 1.0)) / n as f64
                })
                .collect()
        })
        .collect();
    for (k, phi) in [0.3, 0.5, 0.7].into_iter().enumerate() {
        let column: Vec<f64> = curves.iter().map(|c| c[k]).collect();
        let sd = mean_var(&column).1.sqrt();
        let d = delta_method_sd(phi, phi0, n).unwrap();
        assert!(rel_err(sd, d) < 0.06, "{phi}: {sd} vs {d}");
    }
}

#[test]
fn fluctuation_is_proportional_to_h() {
    // Claimed shape: sd(phi) / |h(phi, phi0)| constant within 15% over the
    // grid at n = 1600. The delta-method test above gives the shape that
    // the simulation actually follows.
    let report = proposition1_check(&prop1_config(0.5, 1600, 4000)).unwrap();
    let ratios: Vec<f64> = report
        .sd_curve
        .iter()
        .zip(&report.predicted_sd)
        .map(|(s, p)| s / p)
        .collect();
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(
        max / min < 1.15,
        "sd / |h| ranges over [{min:.3}, {max:.3}]"
    );
}

#[test]
fn implied_prior_level_with_closed_form_density() {
    let report = proposition1_check(&prop1_config(0.5, 400, 1000)).unwrap();
    assert!((report.expected_level - 1.4264278639).abs() < 1e-9);
    assert!(report.level_deviation.abs() < 0.05, "{report:?}");
    let mut cfg = prop1_config(0.5, 400, 1000);
    cfg.estimate_sigma2 = true;
    let est = proposition1_check(&cfg).unwrap();
    assert!(est.delta_sd.is_none());
    assert!(est.level_deviation.abs() < 0.05);
    assert!(proposition1_check(&prop1_config(0.5, 400, 0)).is_err());
    assert!(Prop1Config::new(1.0, 1.0, 400, 10, 1).is_err());
}

#[test]
fn implied_prior_with_smoothed_density_is_deterministic() {
    let mut cfg = prop1_config(0.5, 100, 16);
    cfg.density = Prop1Density::Smoothed {
        inner_reps: 300,
        inner_intervals: 40,
    };
    let a = proposition1_check(&cfg.clone()).unwrap();
    cfg.max_parallel = 3;
    let b = proposition1_check(&cfg).unwrap();
    assert_eq!(a.mean_curve, b.mean_curve);
    assert!(a.used + a.skipped == 16 && a.used >= 12);
}
