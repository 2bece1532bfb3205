//! Screens instruments on an independent selection GWAS and shows how the
//! threshold trades instrument count against strength.
//!
//! ```text
//! cargo run --example iv_selection
//! ```

use mdivw::estimators::{self, default_lambda, iv_strength, select_ivs, Method};
use mdivw::simulation::{build_truth, draw_dataset, stream_rng, SimConfig};

fn main() -> mdivw::Result<()> {
    // a weak scenario where screening matters
    let config = SimConfig {
        s: 50,
        n_x: 8e4,
        n_y: 4e4,
        ..SimConfig::default()
    };
    let truth = build_truth(&config, &mut stream_rng(config.seed, 0))?;
    let dataset = draw_dataset(&truth, &config, &mut stream_rng(config.seed, 1));

    let auto = default_lambda(dataset.len());
    println!(
        "p = {}, true effect = {}, auto threshold = {auto:.4}\n",
        dataset.len(),
        config.beta0
    );
    println!(
        "{:>7} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "lambda", "p_sel", "psi_hat", "IVW", "dIVW", "mdIVW", "se"
    );
    for lambda in [0.0, 1.0, 2.0, 3.0, auto, 4.5, 5.45] {
        let mask = select_ivs(&dataset, lambda)?;
        if mask.p_lambda_hat == 0 {
            println!("{lambda:>7.3} {:>6}  no instruments pass", 0);
            continue;
        }
        let strength = iv_strength(&dataset, &mask)?;
        let fmt = |m| {
            estimators::estimate(m, &dataset, &mask, false)
                .map(|e| format!("{:>9.4}", e.beta))
                .unwrap_or_else(|e| format!("{:>9}", e.code()))
        };
        let se = estimators::mdivw(&dataset, &mask, false)
            .map(|e| e.se)
            .unwrap_or(f64::NAN);
        println!(
            "{lambda:>7.3} {:>6} {:>9.2} {} {} {} {se:>9.4}",
            mask.p_lambda_hat,
            strength.psi_hat,
            fmt(Method::Ivw),
            fmt(Method::Divw),
            fmt(Method::Mdivw),
        );
    }
    Ok(())
}
