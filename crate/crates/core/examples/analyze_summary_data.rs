//! Loads exposure and outcome summary statistics (comma- or tab-separated)
//! and reports every estimator.
//!
//! With no arguments a synthetic dataset is written to a temporary
//! directory first:
//!
//! ```text
//! cargo run --example analyze_summary_data
//! cargo run --example analyze_summary_data -- exposure.csv outcome.csv
//! ```

use std::path::PathBuf;

use mdivw::estimators::{self, iv_strength, Method, SelectionMask};
use mdivw::simulation::{build_truth, draw_dataset, stream_rng, SimConfig};
use mdivw::summary_data::{load_dataset, write_dataset, ColumnSchema};

fn main() -> mdivw::Result<()> {
    let args: Vec<PathBuf> = std::env::args_os().skip(1).map(PathBuf::from).collect();
    let (exposure, outcome) = match args.as_slice() {
        [e, o, ..] => (e.clone(), o.clone()),
        _ => {
            let config = SimConfig {
                p: 500,
                s: 50,
                ..SimConfig::default()
            };
            let truth = build_truth(&config, &mut stream_rng(config.seed, 0))?;
            let data = draw_dataset(&truth, &config, &mut stream_rng(config.seed, 1));
            let dir = std::env::temp_dir().join("mdivw-analyze-example");
            std::fs::create_dir_all(&dir).map_err(|source| mdivw::MrError::Io {
                path: dir.clone(),
                source,
            })?;
            let files = write_dataset(&data, &dir)?;
            println!(
                "wrote synthetic data (true effect {}) to {}",
                config.beta0,
                dir.display()
            );
            (files.exposure, files.outcome)
        }
    };

    let (dataset, load) = load_dataset(
        &exposure,
        &outcome,
        None::<&std::path::Path>,
        &ColumnSchema::default(),
    )?;
    println!(
        "{} SNPs joined, {} dropped",
        dataset.len(),
        load.dropped.len()
    );

    let all = SelectionMask::all(dataset.len());
    let strength = iv_strength(&dataset, &all)?;
    println!(
        "kappa_hat = {:.3}, psi_hat = {:.2}\n",
        strength.kappa_hat, strength.psi_hat
    );

    println!(
        "{:<10} {:>9} {:>9} {:>20}",
        "method", "beta", "se", "95% CI"
    );
    for method in [
        Method::Ivw,
        Method::Divw,
        Method::Mdivw,
        Method::Egger,
        Method::WeightedMedian,
    ] {
        match estimators::estimate(method, &dataset, &all, false) {
            Ok(e) => println!(
                "{:<10} {:>9.4} {:>9.4}   [{:>7.4}, {:>7.4}]",
                method.label(),
                e.beta,
                e.se,
                e.ci_lower,
                e.ci_upper
            ),
            Err(err) => println!("{:<10} failed: {err}", method.label()),
        }
    }
    Ok(())
}
