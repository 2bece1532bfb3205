use std::process::ExitCode;

use clap::Parser;
use mdivw::cli::{execute, Cli, RunConfig};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match RunConfig::from_cli(&cli).and_then(|config| execute(&config)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: no requested result could be produced");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(2)
        }
    }
}
