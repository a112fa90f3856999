use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use compclass::experiment::{builtin, builtin_names, read_csv, sweep_records, write_csv, Overrides, ScenarioConfig};
use compclass::{design_for_source, estimate_perr, snr_sweep, MapClassifier, SnrGrid, Vector};

#[test]
fn builtin_configs_round_trip_through_toml() {
    for name in builtin_names() {
        let cfg = builtin(name).unwrap();
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg, "{name}");
    }
}

#[test]
fn sweeps_are_reproducible_and_seed_dependent() {
    let cfg = builtin("fig1a-zero-mean-2class").unwrap();
    let src = cfg.build_source().unwrap();
    let k = cfg.build_kernel(&src).unwrap();
    let grid = SnrGrid::range(0.0, 20.0, 10.0).unwrap();
    let a = snr_sweep("x", &src, &k, &grid, 2000, 5).unwrap();
    let b = snr_sweep("x", &src, &k, &grid, 2000, 5).unwrap();
    let c = snr_sweep("x", &src, &k, &grid, 2000, 6).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn sweep_csv_round_trip() {
    let cfg = builtin("fig1c-4class")
        .unwrap()
        .with_overrides(&Overrides { trials: Some(300), ..Default::default() })
        .unwrap();
    let src = cfg.build_source().unwrap();
    let k = cfg.build_kernel(&src).unwrap();
    let sweep = snr_sweep(&cfg.name, &src, &k, &cfg.snr_grid().unwrap(), cfg.trials, cfg.seed).unwrap();
    let rows = sweep_records(&sweep);
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).unwrap();
    let back = read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), 31);
    for (x, y) in rows.iter().zip(&back) {
        assert_eq!(x.n_trials, y.n_trials);
        // `{:e}` prints the shortest round-tripping form
        assert_eq!(x.perr_ub, y.perr_ub);
        assert_eq!(x.perr_mc, y.perr_mc);
    }
}

/// Classifying independently drawn signals agrees with the Monte Carlo harness.
#[test]
fn classifier_on_sampled_signals_matches_harness() {
    let cfg = builtin("fig7-designed-3class").unwrap();
    let src = cfg.build_source().unwrap();
    let k = design_for_source(&src, 2).unwrap();
    let sigma2 = 0.05;
    let n = 20_000;
    let clf = MapClassifier::new(&k, &src, sigma2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut errors = 0;
    for (label, x) in src.sample_labeled(123, n).unwrap() {
        let noise = Vector::from_fn(k.m(), |_, _| StandardNormal.sample(&mut rng));
        let y = k.phi() * x + noise * sigma2.sqrt();
        if clf.classify(&y).unwrap() != label {
            errors += 1;
        }
    }
    let direct = errors as f64 / n as f64;
    let harness = estimate_perr(&src, &k, sigma2, n as u64, 7).unwrap();
    let se = (2.0 * harness.std_err.powi(2)).sqrt();
    assert!((direct - harness.p_err).abs() < 4.0 * se, "direct {direct}, harness {}", harness.p_err);
}

#[test]
fn designed_rows_are_orthonormal() {
    for (name, m) in
        [("fig5-designed-2class-zero", 2), ("fig6-designed-2class-nonzero", 1), ("fig7-designed-3class", 2)]
    {
        let src = builtin(name).unwrap().build_source().unwrap();
        let k = design_for_source(&src, m).unwrap();
        let gram = k.phi() * k.phi().transpose();
        assert!((gram - compclass::Mat::identity(m, m)).abs().max() < 1e-10, "{name}");
    }
}
