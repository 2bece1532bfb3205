//! Sweeps the number of causal SNPs and the GWAS size, writing one long-format
//! CSV row per (scenario, method, metric).
//!
//! ```text
//! cargo run --release --example sweep_grid > sweep.csv
//! ```

use mdivw::estimators::Method;
use mdivw::simulation::{sweep, write_long_csv, SimConfig};

fn main() -> mdivw::Result<()> {
    let base = SimConfig {
        reps: 100,
        ..SimConfig::default()
    };
    let mut grid = Vec::new();
    for s in [50, 100, 200] {
        for n_x in [5e4, 1.5e5] {
            grid.push(SimConfig {
                s,
                n_x,
                n_y: n_x / 2.0,
                ..base.clone()
            });
        }
    }
    let results = sweep(&grid, &[Method::Ivw, Method::Mdivw])?;
    for (config, result) in grid.iter().zip(&results) {
        match result {
            Ok(t) => eprintln!(
                "s = {:>3}, n_x = {:>7}: mean psi_hat = {:.2}",
                config.s, config.n_x, t.mean_psi_hat
            ),
            Err(e) => eprintln!("s = {:>3}, n_x = {:>7}: {e}", config.s, config.n_x),
        }
    }
    write_long_csv(&grid, &results, std::io::stdout().lock())
}
