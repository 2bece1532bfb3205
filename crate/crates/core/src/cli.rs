//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE`, a TOML file that may set any
//! flag (plus `[scenario]` and `[grid]` tables for simulations). Flags given
//! on the command line win over the file. Outputs start with `#` comment
//! lines holding the resolved configuration as JSON (CSV) or carry it in a
//! `config` field (JSON), so every report records how it was produced.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::comparators;
use crate::diagnostics::residuals_with_tau;
use crate::error::{MrError, Result};
use crate::estimators::{
    self, default_lambda, iv_strength, parse_methods, select_ivs, Estimate, Method, SelectionMask,
};
use crate::simulation::{self, MetricsTable, SimConfig};
use crate::summary_data::{load_dataset, ColumnSchema, LoadSummary, SummaryDataset};

#[derive(Debug, Parser)]
#[command(
    name = "mdivw",
    version,
    about = "Summary-data Mendelian randomization with many weak instruments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the causal effect from exposure and outcome summary statistics.
    Analyze(DataCommand),
    /// Run a Monte Carlo study for one scenario.
    Simulate(SimCommand),
    /// Run a Monte Carlo study over a grid of scenarios.
    Sweep(SimCommand),
    /// Write standardized residuals with normal Q-Q coordinates.
    Diagnose(DiagnoseCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Analyze,
    Simulate,
    Sweep,
    Diagnose,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Screening threshold as given by the user; `auto` becomes
/// `sqrt(2 ln p)` once `p` is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSpec {
    Auto,
    Value(f64),
}

impl FromStr for LambdaSpec {
    type Err = MrError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LambdaSpec::Auto);
        }
        let v: f64 = s.parse().map_err(|_| {
            MrError::Config(format!("lambda must be a number or \"auto\", got {s:?}"))
        })?;
        if !(v >= 0.0 && v.is_finite()) {
            return Err(MrError::InvalidLambda(v));
        }
        Ok(LambdaSpec::Value(v))
    }
}

impl LambdaSpec {
    pub fn resolve(self, p: usize) -> f64 {
        match self {
            LambdaSpec::Auto => default_lambda(p),
            LambdaSpec::Value(v) => v,
        }
    }
}

impl Serialize for LambdaSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LambdaSpec::Auto => s.serialize_str("auto"),
            LambdaSpec::Value(v) => s.serialize_f64(*v),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file supplying any of these options; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated methods: ivw, divw, mdivw, egger, median.
    #[arg(long)]
    pub methods: Option<String>,
    /// Screening threshold on |beta*/se*|, or "auto" for sqrt(2 ln p).
    #[arg(long)]
    pub lambda: Option<String>,
    /// Allow balanced pleiotropy in the mdIVW variance.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub pleiotropy: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Bootstrap replicates for the weighted-median standard error.
    #[arg(long)]
    pub bootstrap_reps: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub exposure: Option<PathBuf>,
    #[arg(long)]
    pub outcome: Option<PathBuf>,
    /// Independent exposure GWAS used only to screen instruments.
    #[arg(long)]
    pub selection: Option<PathBuf>,
    /// Column mapping such as "snp_id=SNP,beta=BETA,se=SE".
    #[arg(long)]
    pub schema: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataCommand {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DiagnoseCommand {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Causal effect at which residuals are evaluated.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Method supplying the causal effect when --beta is absent.
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimCommand {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub tau0: Option<f64>,
    #[arg(long)]
    pub n_x: Option<f64>,
    #[arg(long)]
    pub n_y: Option<f64>,
    #[arg(long)]
    pub selection_fraction: Option<f64>,
    /// Sweep axis: comma-separated values of s.
    #[arg(long, value_delimiter = ',')]
    pub grid_s: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub grid_sigma2: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub grid_n_x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub grid_tau0: Option<Vec<f64>>,
    /// Tie the outcome GWAS size to the exposure one: n_y = ratio * n_x.
    #[arg(long)]
    pub n_y_ratio: Option<f64>,
}

/// Sweep axes. Empty axes keep the base scenario value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub s: Vec<usize>,
    pub sigma2: Vec<f64>,
    pub n_x: Vec<f64>,
    pub tau0: Vec<f64>,
    pub n_y_ratio: Option<f64>,
}

impl GridSpec {
    /// Cartesian product over the axes, `s` varying slowest.
    pub fn expand(&self, base: &SimConfig) -> Vec<SimConfig> {
        fn axis<T: Copy>(values: &[T], default: T) -> Vec<T> {
            if values.is_empty() {
                vec![default]
            } else {
                values.to_vec()
            }
        }
        let mut out = Vec::new();
        for s in axis(&self.s, base.s) {
            for sigma2 in axis(&self.sigma2, base.sigma2) {
                for n_x in axis(&self.n_x, base.n_x) {
                    for tau0 in axis(&self.tau0, base.tau0) {
                        let n_y = self.n_y_ratio.map_or(base.n_y, |r| r * n_x);
                        out.push(SimConfig {
                            s,
                            sigma2,
                            n_x,
                            n_y,
                            tau0,
                            ..base.clone()
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ListOrString {
    List(Vec<String>),
    One(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NumberOrString {
    Number(f64),
    Text(String),
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    exposure: Option<PathBuf>,
    outcome: Option<PathBuf>,
    selection: Option<PathBuf>,
    schema: Option<String>,
    methods: Option<ListOrString>,
    lambda: Option<NumberOrString>,
    pleiotropy: Option<bool>,
    reps: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
    bootstrap_reps: Option<usize>,
    beta: Option<f64>,
    method: Option<String>,
    scenario: Option<SimConfig>,
    grid: Option<GridSpec>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| MrError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| MrError::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved options for one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub exposure: Option<PathBuf>,
    pub outcome: Option<PathBuf>,
    pub selection: Option<PathBuf>,
    pub schema: ColumnSchema,
    pub methods: Vec<Method>,
    pub lambda: LambdaSpec,
    /// `lambda` after resolving `auto`; set once `p` is known.
    pub resolved_lambda: Option<f64>,
    pub pleiotropy: bool,
    pub seed: u64,
    pub bootstrap_reps: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// Explicit causal effect for `diagnose`.
    pub beta: Option<f64>,
    /// Method supplying the causal effect for `diagnose`.
    pub diagnose_method: Method,
    pub scenario: Option<SimConfig>,
    pub grid: Option<GridSpec>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        match &cli.command {
            Command::Analyze(c) => {
                Self::resolve(CommandKind::Analyze, &c.common, Some(&c.data), None, None)
            }
            Command::Diagnose(c) => Self::resolve(
                CommandKind::Diagnose,
                &c.common,
                Some(&c.data),
                None,
                Some(c),
            ),
            Command::Simulate(c) => {
                Self::resolve(CommandKind::Simulate, &c.common, None, Some(c), None)
            }
            Command::Sweep(c) => Self::resolve(CommandKind::Sweep, &c.common, None, Some(c), None),
        }
    }

    fn resolve(
        command: CommandKind,
        common: &CommonArgs,
        data: Option<&DataArgs>,
        sim: Option<&SimCommand>,
        diag: Option<&DiagnoseCommand>,
    ) -> Result<Self> {
        let file = match &common.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let data = data.cloned().unwrap_or_default();

        let schema = match data.schema.as_ref().or(file.schema.as_ref()) {
            Some(s) => s.parse()?,
            None => ColumnSchema::default(),
        };
        let methods = match (&common.methods, &file.methods) {
            (Some(list), _) | (None, Some(ListOrString::One(list))) => parse_methods(list)?,
            (None, Some(ListOrString::List(items))) => {
                items.iter().map(|m| m.parse()).collect::<Result<_>>()?
            }
            (None, None) => vec![Method::Ivw, Method::Divw, Method::Mdivw],
        };
        if methods.is_empty() {
            return Err(MrError::Config("at least one method is required".into()));
        }
        let lambda = match (&common.lambda, &file.lambda) {
            (Some(s), _) | (None, Some(NumberOrString::Text(s))) => s.parse()?,
            (None, Some(NumberOrString::Number(v))) => LambdaSpec::from_str(&v.to_string())?,
            (None, None) => LambdaSpec::Value(0.0),
        };
        let diagnose_method = match diag.and_then(|d| d.method.clone()).or(file.method.clone()) {
            Some(m) => m.parse()?,
            None => Method::Mdivw,
        };

        let (scenario, grid) = match sim {
            Some(sim) => {
                let mut sc = file.scenario.clone().unwrap_or_default();
                macro_rules! set {
                    ($field:ident) => {
                        if let Some(v) = sim.$field {
                            sc.$field = v;
                        }
                    };
                }
                set!(p);
                set!(s);
                set!(sigma2);
                set!(beta0);
                set!(tau0);
                set!(n_x);
                set!(n_y);
                set!(selection_fraction);
                if let Some(v) = sim.reps.or(file.reps) {
                    sc.reps = v;
                }
                if let Some(v) = common.seed.or(file.seed) {
                    sc.seed = v;
                }
                if let Some(v) = common.bootstrap_reps.or(file.bootstrap_reps) {
                    sc.bootstrap_reps = v;
                }
                if let Some(v) = common.pleiotropy.or(file.pleiotropy) {
                    sc.pleiotropy_adjust = v;
                }
                if common.lambda.is_some() || file.lambda.is_some() {
                    sc.lambda = lambda.resolve(sc.p);
                }
                let mut grid = file.grid.clone().unwrap_or_default();
                if let Some(v) = &sim.grid_s {
                    grid.s = v.clone();
                }
                if let Some(v) = &sim.grid_sigma2 {
                    grid.sigma2 = v.clone();
                }
                if let Some(v) = &sim.grid_n_x {
                    grid.n_x = v.clone();
                }
                if let Some(v) = &sim.grid_tau0 {
                    grid.tau0 = v.clone();
                }
                if sim.n_y_ratio.is_some() {
                    grid.n_y_ratio = sim.n_y_ratio;
                }
                sc.validate()?;
                let grid = (command == CommandKind::Sweep).then_some(grid);
                (Some(sc), grid)
            }
            None => (None, None),
        };
        let resolved_lambda = scenario.as_ref().map(|s| s.lambda);

        Ok(Self {
            command,
            exposure: data.exposure.or(file.exposure),
            outcome: data.outcome.or(file.outcome),
            selection: data.selection.or(file.selection),
            schema,
            methods,
            lambda,
            resolved_lambda,
            pleiotropy: common.pleiotropy.or(file.pleiotropy).unwrap_or(false),
            seed: scenario
                .as_ref()
                .map(|s| s.seed)
                .or(common.seed)
                .or(file.seed)
                .unwrap_or(1),
            bootstrap_reps: common
                .bootstrap_reps
                .or(file.bootstrap_reps)
                .unwrap_or(comparators::DEFAULT_BOOTSTRAP_REPS),
            out: common.out.clone().or(file.out),
            format: common.format.or(file.format).unwrap_or_default(),
            beta: diag.and_then(|d| d.beta).or(file.beta),
            diagnose_method,
            scenario,
            grid,
        })
    }

    fn config_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// One row of an `analyze` report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisRow {
    pub lambda: f64,
    pub method: Method,
    pub psi_hat: Option<f64>,
    pub beta: Option<f64>,
    pub se: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub tau2: Option<f64>,
    pub p_used: Option<usize>,
    pub variance_fallback: bool,
    pub error: Option<String>,
    pub message: Option<String>,
}

impl AnalysisRow {
    fn new(lambda: f64, method: Method, psi_hat: Option<f64>, result: Result<Estimate>) -> Self {
        match result {
            Ok(e) => Self {
                lambda,
                method,
                psi_hat: Some(e.strength.psi_hat),
                beta: Some(e.beta),
                se: Some(e.se),
                ci_lower: Some(e.ci_lower),
                ci_upper: Some(e.ci_upper),
                tau2: e.tau2,
                p_used: Some(e.p_used),
                variance_fallback: e.variance_fallback,
                error: None,
                message: None,
            },
            Err(err) => Self {
                lambda,
                method,
                psi_hat,
                beta: None,
                se: None,
                ci_lower: None,
                ci_upper: None,
                tau2: None,
                p_used: None,
                variance_fallback: false,
                error: Some(err.code().to_string()),
                message: Some(err.to_string()),
            },
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Runs `method` with the CLI's bootstrap settings.
fn run_method(
    method: Method,
    dataset: &SummaryDataset,
    mask: &SelectionMask,
    config: &RunConfig,
) -> Result<Estimate> {
    match method {
        Method::WeightedMedian => {
            comparators::weighted_median(dataset, mask, config.bootstrap_reps, config.seed)
        }
        _ => estimators::estimate(method, dataset, mask, config.pleiotropy),
    }
}

fn require_path<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| MrError::Config(format!("--{flag} is required")))
}

fn load(config: &RunConfig) -> Result<(SummaryDataset, LoadSummary)> {
    let exposure = require_path(&config.exposure, "exposure")?;
    let outcome = require_path(&config.outcome, "outcome")?;
    if config.lambda != LambdaSpec::Value(0.0) && config.selection.is_none() {
        return Err(MrError::MissingSelectionData);
    }
    load_dataset(
        exposure,
        outcome,
        config.selection.as_deref(),
        &config.schema,
    )
}

/// Estimates for every requested method at `lambda = 0` and, when it
/// differs, at the requested threshold.
pub fn analyze(config: &RunConfig) -> Result<(RunConfig, LoadSummary, Vec<AnalysisRow>)> {
    let (dataset, summary) = load(config)?;
    let mut resolved = config.clone();
    let lambda = config.lambda.resolve(dataset.len());
    resolved.resolved_lambda = Some(lambda);

    let mut lambdas = vec![0.0];
    if lambda > 0.0 {
        lambdas.push(lambda);
    }
    let mut rows = Vec::new();
    for lam in lambdas {
        let mask = select_ivs(&dataset, lam);
        let psi = mask
            .as_ref()
            .ok()
            .and_then(|m| iv_strength(&dataset, m).ok())
            .map(|s| s.psi_hat);
        for &method in &config.methods {
            let result = match &mask {
                Ok(m) => run_method(method, &dataset, m, config),
                Err(e) => Err(clone_error(e)),
            };
            rows.push(AnalysisRow::new(lam, method, psi, result));
        }
    }
    Ok((resolved, summary, rows))
}

fn clone_error(e: &MrError) -> MrError {
    match e {
        MrError::EmptySelection => MrError::EmptySelection,
        MrError::MissingSelectionData => MrError::MissingSelectionData,
        MrError::InvalidLambda(v) => MrError::InvalidLambda(*v),
        other => MrError::Config(other.to_string()),
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn write_analysis<W: Write>(
    mut w: W,
    config: &RunConfig,
    summary: &LoadSummary,
    rows: &[AnalysisRow],
) -> Result<()> {
    match config.format {
        OutputFormat::Json => {
            let doc = serde_json::json!({ "config": config, "load": summary, "results": rows });
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w).map_err(csv::Error::from)?;
        }
        OutputFormat::Csv => {
            writeln!(w, "# config: {}", config.config_json()?).map_err(csv::Error::from)?;
            writeln!(w, "# load: {}", serde_json::to_string(summary)?).map_err(csv::Error::from)?;
            let mut out = csv::Writer::from_writer(w);
            out.write_record([
                "lambda",
                "method",
                "psi_hat",
                "beta",
                "se",
                "ci_lower",
                "ci_upper",
                "tau2",
                "p_used",
                "variance_fallback",
                "error",
            ])?;
            for r in rows {
                out.write_record([
                    r.lambda.to_string(),
                    r.method.label().to_string(),
                    opt(&r.psi_hat),
                    opt(&r.beta),
                    opt(&r.se),
                    opt(&r.ci_lower),
                    opt(&r.ci_upper),
                    opt(&r.tau2),
                    opt(&r.p_used),
                    r.variance_fallback.to_string(),
                    opt(&r.error),
                ])?;
            }
            out.flush().map_err(csv::Error::from)?;
        }
    }
    Ok(())
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| {
            MrError::Io {
                path: p.clone(),
                source,
            }
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Summary printed by `diagnose` next to the residual file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnoseSummary {
    pub beta: f64,
    pub tau2: f64,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Residuals at the explicit `beta`, or at the estimate from
/// `diagnose_method`.
pub fn diagnose(
    config: &RunConfig,
) -> Result<(RunConfig, crate::diagnostics::ResidualSet, DiagnoseSummary)> {
    let (dataset, _) = load(config)?;
    let mut resolved = config.clone();
    let lambda = config.lambda.resolve(dataset.len());
    resolved.resolved_lambda = Some(lambda);
    let mask = select_ivs(&dataset, lambda)?;
    let beta = match config.beta {
        Some(b) => b,
        None => run_method(config.diagnose_method, &dataset, &mask, config)?.beta,
    };
    let tau2 = if config.pleiotropy {
        estimators::tau_squared(&dataset, &mask, beta)?.max(0.0)
    } else {
        0.0
    };
    let set = residuals_with_tau(&dataset, &mask, beta, tau2)?;
    let summary = DiagnoseSummary {
        beta,
        tau2,
        n: set.entries.len(),
        mean: set.mean(),
        variance: set.variance(),
    };
    Ok((resolved, set, summary))
}

/// Executes a resolved configuration. Returns whether at least one
/// requested result was produced.
pub fn execute(config: &RunConfig) -> Result<bool> {
    match config.command {
        CommandKind::Analyze => {
            let (resolved, summary, rows) = analyze(config)?;
            for r in rows.iter().filter(|r| !r.is_ok()) {
                log::warn!("{} at lambda = {}: {}", r.method, r.lambda, opt(&r.message));
            }
            for r in rows.iter().filter(|r| r.variance_fallback) {
                log::warn!(
                    "{} at lambda = {}: variance estimate was not positive (psi_hat = {}); reported the leading term",
                    r.method,
                    r.lambda,
                    opt(&r.psi_hat)
                );
            }
            write_analysis(open_output(&config.out)?, &resolved, &summary, &rows)?;
            Ok(rows.iter().any(AnalysisRow::is_ok))
        }
        CommandKind::Diagnose => {
            let (resolved, set, summary) = diagnose(config)?;
            let mut w = open_output(&config.out)?;
            match config.format {
                OutputFormat::Json => {
                    let doc = serde_json::json!({
                        "config": resolved,
                        "summary": summary,
                        "residuals": set.entries,
                    });
                    serde_json::to_writer_pretty(&mut w, &doc)?;
                    writeln!(w).map_err(csv::Error::from)?;
                }
                OutputFormat::Csv => {
                    writeln!(w, "# config: {}", resolved.config_json()?)
                        .map_err(csv::Error::from)?;
                    set.write_csv(&mut w)?;
                }
            }
            w.flush().map_err(csv::Error::from)?;
            let line = format!(
                "beta = {}, n = {}, residual mean = {:.6}, residual variance = {:.6}",
                summary.beta, summary.n, summary.mean, summary.variance
            );
            if config.out.is_some() {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
            Ok(summary.n > 0)
        }
        CommandKind::Simulate => {
            let scenario = config
                .scenario
                .as_ref()
                .expect("simulate resolves a scenario");
            let table = simulation::run_monte_carlo(scenario, &config.methods)?;
            let mut w = open_output(&config.out)?;
            match config.format {
                OutputFormat::Json => {
                    let doc = serde_json::json!({ "config": config, "table": table });
                    serde_json::to_writer_pretty(&mut w, &doc)?;
                    writeln!(w).map_err(csv::Error::from)?;
                }
                OutputFormat::Csv => {
                    writeln!(w, "# config: {}", config.config_json()?).map_err(csv::Error::from)?;
                    table.write_csv(&mut w)?;
                }
            }
            w.flush().map_err(csv::Error::from)?;
            Ok(table.rows.iter().any(|r| r.error.is_none()))
        }
        CommandKind::Sweep => {
            let base = config.scenario.as_ref().expect("sweep resolves a scenario");
            let grid = config.grid.clone().unwrap_or_default().expand(base);
            for c in &grid {
                c.validate()?;
            }
            let results = simulation::sweep(&grid, &config.methods)?;
            let mut w = open_output(&config.out)?;
            match config.format {
                OutputFormat::Json => {
                    let entries: Vec<serde_json::Value> = results
                        .iter()
                        .map(|r| match r {
                            Ok(t) => serde_json::to_value(t),
                            Err(e) => Ok(
                                serde_json::json!({ "error": e.code(), "message": e.to_string() }),
                            ),
                        })
                        .collect::<std::result::Result<_, _>>()?;
                    let doc = serde_json::json!({ "config": config, "results": entries });
                    serde_json::to_writer_pretty(&mut w, &doc)?;
                    writeln!(w).map_err(csv::Error::from)?;
                }
                OutputFormat::Csv => {
                    writeln!(w, "# config: {}", config.config_json()?).map_err(csv::Error::from)?;
                    simulation::write_long_csv(&grid, &results, &mut w)?;
                }
            }
            w.flush().map_err(csv::Error::from)?;
            Ok(results.iter().any(|r| {
                r.as_ref()
                    .is_ok_and(|t: &MetricsTable| t.rows.iter().any(|row| row.error.is_none()))
            }))
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<bool>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| MrError::Config(e.to_string()))?;
    execute(&RunConfig::from_cli(&cli)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        let cli =
            Cli::try_parse_from(std::iter::once("mdivw").chain(args.iter().copied())).unwrap();
        RunConfig::from_cli(&cli).unwrap()
    }

    #[test]
    fn lambda_spec_parsing() {
        assert_eq!("auto".parse::<LambdaSpec>().unwrap(), LambdaSpec::Auto);
        assert_eq!(
            " 3.5 ".parse::<LambdaSpec>().unwrap(),
            LambdaSpec::Value(3.5)
        );
        assert!(matches!(
            "-1".parse::<LambdaSpec>(),
            Err(MrError::InvalidLambda(_))
        ));
        assert!("high".parse::<LambdaSpec>().is_err());
        assert!((LambdaSpec::Auto.resolve(1000) - 3.7169).abs() < 1e-4);
    }

    #[test]
    fn defaults_for_analyze() {
        let c = parse(&["analyze", "--exposure", "e.tsv", "--outcome", "o.tsv"]);
        assert_eq!(c.methods, vec![Method::Ivw, Method::Divw, Method::Mdivw]);
        assert_eq!(c.lambda, LambdaSpec::Value(0.0));
        assert_eq!(c.format, OutputFormat::Csv);
        assert!(!c.pleiotropy);
        assert!(c.scenario.is_none());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "methods = [\"ivw\", \"egger\"]\nlambda = 2.5\npleiotropy = true\nseed = 9\nformat = \"json\"\n\
             [scenario]\ns = 50\nreps = 10\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["simulate", "--config", p]);
        assert_eq!(c.methods, vec![Method::Ivw, Method::Egger]);
        assert_eq!(c.format, OutputFormat::Json);
        let sc = c.scenario.unwrap();
        assert_eq!((sc.s, sc.reps, sc.seed, sc.lambda), (50, 10, 9, 2.5));
        assert!(sc.pleiotropy_adjust);

        let c = parse(&[
            "simulate",
            "--config",
            p,
            "--methods",
            "mdivw",
            "--s",
            "70",
            "--seed",
            "4",
            "--lambda",
            "auto",
            "--pleiotropy",
            "false",
            "--format",
            "csv",
        ]);
        assert_eq!(c.methods, vec![Method::Mdivw]);
        assert_eq!(c.format, OutputFormat::Csv);
        let sc = c.scenario.unwrap();
        assert_eq!((sc.s, sc.seed, sc.reps), (70, 4, 10));
        assert!((sc.lambda - default_lambda(1000)).abs() < 1e-15);
        assert!(!sc.pleiotropy_adjust);
    }

    #[test]
    fn invalid_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "colour = \"blue\"\n").unwrap();
        let cli =
            Cli::try_parse_from(["mdivw", "analyze", "--config", path.to_str().unwrap()]).unwrap();
        assert!(matches!(RunConfig::from_cli(&cli), Err(MrError::Config(_))));
        let cli = Cli::try_parse_from(["mdivw", "simulate", "--s", "5000"]).unwrap();
        assert!(matches!(RunConfig::from_cli(&cli), Err(MrError::Config(_))));
    }

    #[test]
    fn grid_expansion() {
        let c = parse(&[
            "sweep",
            "--grid-s",
            "50,100,150",
            "--grid-sigma2",
            "2.5e-4,5e-4",
            "--grid-n-x",
            "1e5,2e5",
            "--n-y-ratio",
            "0.5",
        ]);
        let grid = c.grid.unwrap().expand(c.scenario.as_ref().unwrap());
        assert_eq!(grid.len(), 12);
        assert_eq!(
            (grid[0].s, grid[0].sigma2, grid[0].n_x, grid[0].n_y),
            (50, 2.5e-4, 1e5, 5e4)
        );
        assert_eq!(grid[11].s, 150);
        assert!(GridSpec::default().expand(&SimConfig::default()) == vec![SimConfig::default()]);
    }
}
