use mdivw::diagnostics::standardized_residuals;
use mdivw::estimators::{Method, SelectionMask};
use mdivw::simulation::{build_truth, draw_dataset, run_monte_carlo, stream_rng, sweep, SimConfig};

fn scenario(s: usize, reps: usize) -> SimConfig {
    SimConfig {
        s,
        reps,
        seed: 21,
        ..SimConfig::default()
    }
}

#[test]
fn selection_gwas_noise_matches_its_sample_size() {
    let config = scenario(100, 1);
    let truth = build_truth(&config, &mut stream_rng(config.seed, 0)).unwrap();
    let (mut exposure, mut selection) = (0.0, 0.0);
    let mut draws = 0usize;
    for r in 0..100 {
        let ds = draw_dataset(&truth, &config, &mut stream_rng(config.seed, r + 1));
        for (rec, g) in ds.records().iter().zip(&truth.gamma) {
            exposure += (rec.beta_exposure - g).powi(2);
            selection += (rec.selection.as_ref().unwrap().beta - g).powi(2);
            draws += 1;
        }
    }
    assert!(draws >= 100_000);
    let ratio = selection / exposure;
    let expected = 1.0 / config.selection_fraction;
    assert!((ratio / expected - 1.0).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn estimated_se_tracks_empirical_spread() {
    let table = run_monte_carlo(&scenario(100, 400), &[Method::Mdivw, Method::Divw]).unwrap();
    assert!(table.mean_psi_hat > 10.0);
    for m in [Method::Mdivw, Method::Divw] {
        let row = table.row(m).unwrap();
        let ratio = row.mean_estimated_se / row.empirical_se;
        assert!((ratio - 1.0).abs() < 0.10, "{m}: se ratio {ratio}");
    }
}

#[test]
fn strength_grows_with_number_of_causal_snps() {
    let grid: Vec<SimConfig> = [25, 50, 100, 200]
        .iter()
        .map(|&s| scenario(s, 20))
        .collect();
    let results = sweep(&grid, &[Method::Mdivw]).unwrap();
    let psi: Vec<f64> = results
        .iter()
        .map(|r| r.as_ref().unwrap().mean_psi_hat)
        .collect();
    assert!(psi.windows(2).all(|w| w[0] < w[1]), "{psi:?}");
}

#[test]
fn residuals_at_true_effect_are_standard_normal() {
    let config = scenario(100, 1);
    let truth = build_truth(&config, &mut stream_rng(config.seed, 0)).unwrap();
    let ds = draw_dataset(&truth, &config, &mut stream_rng(config.seed, 1));
    let set = standardized_residuals(&ds, &SelectionMask::all(ds.len()), config.beta0).unwrap();
    let r: Vec<f64> = set.entries.iter().map(|e| e.residual).collect();
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 4.0 / n.sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 0.19, "variance {var}");
}

#[test]
fn mean_strength_estimate_matches_population_value() {
    let table = run_monte_carlo(&scenario(100, 400), &[Method::Mdivw]).unwrap();
    let rel = table.mean_psi_hat / table.truth.psi - 1.0;
    assert!(
        rel.abs() < 0.05,
        "{} vs {}",
        table.mean_psi_hat,
        table.truth.psi
    );
}

#[test]
fn debiased_estimators_are_nearly_unbiased_where_ivw_is_not() {
    let table = run_monte_carlo(&scenario(100, 400), &[Method::Ivw, Method::Mdivw]).unwrap();
    let ivw = table.row(Method::Ivw).unwrap().relative_bias_pct;
    let md = table.row(Method::Mdivw).unwrap().relative_bias_pct;
    assert!(md.abs() < 3.0, "mdIVW bias {md}%");
    assert!(ivw < -20.0, "IVW bias {ivw}%");
}
