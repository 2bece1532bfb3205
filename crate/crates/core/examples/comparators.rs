//! mdIVW next to MR-Egger and the weighted median on one dataset with and
//! without balanced pleiotropy.
//!
//! ```text
//! cargo run --example comparators
//! ```

use mdivw::comparators::{egger_fit, weighted_median, DEFAULT_BOOTSTRAP_REPS};
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

        println!("tau0 = {tau0} (true effect {})", config.beta0);
        let md = estimators::mdivw(&dataset, &all, tau0 > 0.0)?;
        println!("  mdIVW      {:>8.4} (se {:.4})", md.beta, md.se);

        let egger = egger_fit(&dataset, &all)?;
        println!(
            "  MR-Egger   {:>8.4} (se {:.4}), intercept {:.2e} (se {:.2e}), residual scale {:.2}",
            egger.slope, egger.se_slope, egger.intercept, egger.se_intercept, egger.residual_scale
        );

        let median = weighted_median(&dataset, &all, DEFAULT_BOOTSTRAP_REPS, 42)?;
        println!("  MR-Median  {:>8.4} (se {:.4})\n", median.beta, median.se);
    }
    Ok(())
}
