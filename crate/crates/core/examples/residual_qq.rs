//! Standardized residuals at the mdIVW estimate against normal quantiles.
//!
//! Prints a coarse text Q-Q comparison and writes the full residual table
//! when an output path is given:
//!
//! ```text
//! cargo run --example residual_qq -- residuals.csv
//! ```

use mdivw::diagnostics::residuals_with_tau;
use mdivw::estimators::{self, SelectionMask};
use mdivw::simulation::{build_truth, draw_dataset, stream_rng, SimConfig};

fn main() -> mdivw::Result<()> {
    for tau0 in [0.0, 0.01] {
        let config = SimConfig {
            tau0,
            ..SimConfig::default()
        };
        let truth = build_truth(&config, &mut stream_rng(config.seed, 0))?;
        let dataset = draw_dataset(&truth, &config, &mut stream_rng(config.seed, 1));
        let all = SelectionMask::all(dataset.len());

        let fit = estimators::mdivw(&dataset, &all, true)?;
        let tau2 = fit.tau2.unwrap_or(0.0).max(0.0);
        let plain = residuals_with_tau(&dataset, &all, fit.beta, 0.0)?;
        let adjusted = residuals_with_tau(&dataset, &all, fit.beta, tau2)?;

        println!(
            "tau0 = {tau0}: beta_hat = {:.4}, tau2_hat = {tau2:.3e}",
            fit.beta
        );
        println!(
            "  variance without tau2 = {:.3}, with tau2 = {:.3}",
            plain.variance(),
            adjusted.variance()
        );
        println!("  {:>8} {:>10} {:>10}", "normal", "plain", "adjusted");
        let n = plain.entries.len();
        for k in [
            n / 100,
            n / 10,
            n / 4,
            n / 2,
            3 * n / 4,
            9 * n / 10,
            n - 1 - n / 100,
        ] {
            println!(
                "  {:>8.3} {:>10.3} {:>10.3}",
                plain.entries[k].theoretical_quantile,
                plain.entries[k].residual,
                adjusted.entries[k].residual
            );
        }

        if let Some(path) = std::env::args().nth(1) {
            let path = format!("{path}.tau{tau0}");
            let file = std::fs::File::create(&path).map_err(|source| mdivw::MrError::Io {
                path: path.clone().into(),
                source,
            })?;
            adjusted.write_csv(file)?;
            println!("  wrote {path}");
        }
    }
    Ok(())
}
