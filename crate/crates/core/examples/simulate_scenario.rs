//! Runs one Monte Carlo scenario and prints the metrics table as CSV.
//!
//! ```text
//! cargo run --release --example simulate_scenario -- 500
//! ```
//! The optional argument sets the number of replications.

use mdivw::estimators::Method;
use mdivw::simulation::{run_monte_carlo, SimConfig};

fn main() -> mdivw::Result<()> {
    let reps = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(200);
    let config = SimConfig {
        reps,
        ..SimConfig::default()
    };
    let methods = [Method::Ivw, Method::Divw, Method::Mdivw, Method::Egger];
    let table = run_monte_carlo(&config, &methods)?;

    eprintln!(
        "population psi = {:.2}, mean psi_hat = {:.2}",
        table.truth.psi, table.mean_psi_hat
    );
    table.write_csv(std::io::stdout().lock())
}
