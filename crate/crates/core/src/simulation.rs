//! Summary-data simulation and Monte Carlo evaluation of the estimators.
//!
//! The data-generating process follows the usual two-sample MR set-up:
//! `p` independent SNPs with minor allele frequencies drawn from U(0.1, 0.5),
//! the first `s` of which have exposure effects drawn from N(0, sigma2). The
//! exposure is `X = sum gamma_j Z_j + U + E_X` and the outcome
//! `Y = beta0 X + sum alpha_j Z_j + U + E_Y`. Standard errors follow from the
//! trait variances and GWAS sample sizes; summary statistics are then drawn
//! from their normal sampling distributions.
//!
//! Randomness comes from ChaCha8 streams of one master seed: stream 0 builds
//! the truth, stream `r + 1` draws replication `r`. Replications run in
//! parallel and are aggregated in index order, so results depend only on
//! `(config, seed)`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::comparators;
use crate::error::{MrError, Result};
use crate::estimators::{self, select_ivs, Method, StrengthStats};
use crate::sum::{csum, mean, sample_variance};
use crate::summary_data::{Association, SnpRecord, SummaryDataset};

/// Parameters of one simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Total number of SNPs.
    pub p: usize,
    /// Number of SNPs with a non-zero exposure effect.
    pub s: usize,
    /// Variance of the non-zero exposure effects.
    pub sigma2: f64,
    pub beta0: f64,
    /// Standard deviation of the pleiotropic effects.
    pub tau0: f64,
    pub n_x: f64,
    pub n_y: f64,
    /// Selection GWAS size as a fraction of `n_x`.
    pub selection_fraction: f64,
    /// Screening threshold on the selection z-statistic; 0 disables selection.
    pub lambda: f64,
    pub reps: usize,
    pub seed: u64,
    pub var_u: f64,
    pub var_ex: f64,
    pub var_ey: f64,
    /// Use the balanced-pleiotropy variance for mdIVW.
    pub pleiotropy_adjust: bool,
    /// Bootstrap replicates for the weighted-median standard error.
    pub bootstrap_reps: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            p: 1000,
            s: 100,
            sigma2: 5e-4,
            beta0: 0.5,
            tau0: 0.0,
            n_x: 150_000.0,
            n_y: 75_000.0,
            selection_fraction: 0.5,
            lambda: 0.0,
            reps: 1000,
            seed: 1,
            var_u: 2.0,
            var_ex: 2.0,
            var_ey: 2.0,
            pleiotropy_adjust: false,
            bootstrap_reps: comparators::DEFAULT_BOOTSTRAP_REPS,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(MrError::Config(msg));
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if self.p == 0 {
            return fail("p must be at least 1".into());
        }
        if self.s > self.p {
            return fail(format!("s = {} exceeds p = {}", self.s, self.p));
        }
        if self.reps == 0 {
            return fail("reps must be at least 1".into());
        }
        for (name, v) in [
            ("sigma2", self.sigma2),
            ("n_x", self.n_x),
            ("n_y", self.n_y),
            ("var_u", self.var_u),
            ("var_ex", self.var_ex),
            ("var_ey", self.var_ey),
        ] {
            if !positive(v) {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !self.beta0.is_finite() {
            return fail(format!("beta0 must be finite, got {}", self.beta0));
        }
        if !(self.tau0 >= 0.0 && self.tau0.is_finite()) {
            return fail(format!("tau0 must be non-negative, got {}", self.tau0));
        }
        if !(self.selection_fraction > 0.0 && self.selection_fraction <= 1.0) {
            return fail(format!(
                "selection_fraction must lie in (0, 1], got {}",
                self.selection_fraction
            ));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be non-negative, got {}", self.lambda));
        }
        Ok(())
    }
}

/// Population-level moments without selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PopulationMoments {
    pub theta1: f64,
    pub theta2: f64,
    pub v1: f64,
    pub v2: f64,
    pub v12: f64,
    /// Leading variance advantage `Var(dIVW) - Var(mdIVW) = 2 beta0^2 delta / theta2^4`.
    pub variance_gap: f64,
    /// `delta`; NaN when `beta0 = 0`.
    pub delta: f64,
}

/// Fixed per-scenario quantities shared by all replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTruth {
    pub gamma: Vec<f64>,
    /// Pleiotropic effects realized when the truth was built (enter Var(Y)).
    pub alpha: Vec<f64>,
    pub maf: Vec<f64>,
    pub var_z: Vec<f64>,
    pub var_x: f64,
    pub var_y: f64,
    pub se_exposure: Vec<f64>,
    pub se_outcome: Vec<f64>,
    pub se_selection: Vec<f64>,
    pub kappa: f64,
    pub psi: f64,
    /// Probability that each SNP passes the screening threshold.
    pub q_lambda: Vec<f64>,
    pub p_lambda: f64,
    pub kappa_lambda: f64,
    /// Deflator `omega = sqrt(p_lambda^-1 sum sG^-4 gamma^4 q (1 - q))`.
    pub omega: f64,
    /// `kappa_lambda sqrt(p_lambda) / max(1, omega)`.
    pub psi_lambda: f64,
    pub population: PopulationMoments,
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// RNG for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn build_truth(config: &SimConfig, rng: &mut ChaCha8Rng) -> Result<SimTruth> {
    config.validate()?;
    let p = config.p;
    let sd = config.sigma2.sqrt();
    let gamma: Vec<f64> = (0..p)
        .map(|j| {
            if j < config.s {
                sd * std_normal(rng)
            } else {
                0.0
            }
        })
        .collect();
    let maf: Vec<f64> = (0..p).map(|_| rng.random_range(0.1..0.5)).collect();
    let alpha: Vec<f64> = (0..p).map(|_| config.tau0 * std_normal(rng)).collect();
    let var_z: Vec<f64> = maf.iter().map(|m| 2.0 * m * (1.0 - m)).collect();

    let b0 = config.beta0;
    let var_x =
        csum(gamma.iter().zip(&var_z).map(|(g, v)| g * g * v)) + config.var_u + config.var_ex;
    // Cov(X, U) = Var(U)
    let var_y = b0 * b0 * var_x
        + 2.0 * b0 * config.var_u
        + csum(alpha.iter().zip(&var_z).map(|(a, v)| a * a * v))
        + config.var_u
        + config.var_ey;

    let mut se_exposure = Vec::with_capacity(p);
    let mut se_outcome = Vec::with_capacity(p);
    for j in 0..p {
        let g2v = gamma[j] * gamma[j] * var_z[j];
        let sg2 = (var_x - g2v) / (config.n_x * var_z[j]);
        let sy2 = (var_y - b0 * b0 * g2v) / (config.n_y * var_z[j]);
        if !(sg2 > 0.0 && sy2 > 0.0) {
            return Err(MrError::Config(format!(
                "SNP {} has non-positive sampling variance (exposure {sg2:e}, outcome {sy2:e})",
                j + 1
            )));
        }
        se_exposure.push(sg2.sqrt());
        se_outcome.push(sy2.sqrt());
    }
    let se_selection: Vec<f64> = se_exposure
        .iter()
        .map(|s| s / config.selection_fraction.sqrt())
        .collect();

    let normal = Normal::standard();
    let q_lambda: Vec<f64> = if config.lambda == 0.0 {
        vec![1.0; p]
    } else {
        gamma
            .iter()
            .zip(&se_selection)
            .map(|(g, s)| {
                let shift = g / s;
                normal.cdf(shift - config.lambda) + normal.cdf(-shift - config.lambda)
            })
            .collect()
    };

    let strength_j: Vec<f64> = gamma
        .iter()
        .zip(&se_exposure)
        .map(|(g, s)| g * g / (s * s))
        .collect();
    let kappa = csum(strength_j.iter().copied()) / p as f64;
    let psi = kappa * (p as f64).sqrt();
    let p_lambda = csum(q_lambda.iter().copied());
    let kappa_lambda = csum(strength_j.iter().zip(&q_lambda).map(|(k, q)| k * q)) / p_lambda;
    let omega = (csum((0..p).map(|j| {
        let sy2 = se_outcome[j] * se_outcome[j];
        gamma[j].powi(4) / (sy2 * sy2) * q_lambda[j] * (1.0 - q_lambda[j])
    })) / p_lambda)
        .sqrt();
    let psi_lambda = kappa_lambda * p_lambda.sqrt() / omega.max(1.0);

    let population = population_moments(&gamma, &se_exposure, &se_outcome, b0);
    Ok(SimTruth {
        gamma,
        alpha,
        maf,
        var_z,
        var_x,
        var_y,
        se_exposure,
        se_outcome,
        se_selection,
        kappa,
        psi,
        q_lambda,
        p_lambda,
        kappa_lambda,
        omega,
        psi_lambda,
        population,
    })
}

fn population_moments(gamma: &[f64], sg: &[f64], sy: &[f64], b0: f64) -> PopulationMoments {
    let idx = 0..gamma.len();
    let term = |f: &dyn Fn(f64, f64, f64) -> f64| {
        csum(
            idx.clone()
                .map(|j| f(gamma[j] * gamma[j], sg[j] * sg[j], sy[j] * sy[j])),
        )
    };
    let theta2 = term(&|g2, _, sy2| g2 / sy2);
    let theta1 = b0 * theta2;
    let v2 = term(&|g2, sg2, sy2| (4.0 * sg2 * g2 + 2.0 * sg2 * sg2) / (sy2 * sy2));
    let v12 = 2.0 * b0 * term(&|g2, sg2, sy2| sg2 * g2 / (sy2 * sy2));
    let v1 = term(&|g2, sg2, sy2| (b0 * b0 * sg2 * g2 + sy2 * g2 + sg2 * sy2) / (sy2 * sy2));
    let cubic = term(&|g2, sg2, sy2| sg2 * sg2 * (6.0 * g2 + 8.0 * sg2) / (sy2 * sy2 * sy2));
    let quadratic = term(&|g2, sg2, sy2| sg2 * (g2 + sg2) / (sy2 * sy2));
    let b2 = b0 * b0;
    let beta2_delta = v1 * v2 - 6.0 * v12 * v2 * b0 + 2.0 * v12 * v12 + 3.0 * v2 * v2 * b2
        - theta2 * b2 * cubic
        - 2.0 * theta2 * quadratic;
    PopulationMoments {
        theta1,
        theta2,
        v1,
        v2,
        v12,
        variance_gap: 2.0 * beta2_delta / theta2.powi(4),
        delta: if b0 == 0.0 {
            f64::NAN
        } else {
            beta2_delta / b2
        },
    }
}

/// Draws one replication of summary statistics (with selection data).
pub fn draw_dataset(truth: &SimTruth, config: &SimConfig, rng: &mut ChaCha8Rng) -> SummaryDataset {
    let records = (0..truth.gamma.len())
        .map(|j| {
            let g = truth.gamma[j];
            let beta_exposure = g + truth.se_exposure[j] * std_normal(rng);
            let alpha = config.tau0 * std_normal(rng);
            let beta_outcome = config.beta0 * g + alpha + truth.se_outcome[j] * std_normal(rng);
            let beta_selection = g + truth.se_selection[j] * std_normal(rng);
            SnpRecord {
                snp_id: format!("snp{}", j + 1),
                beta_exposure,
                se_exposure: truth.se_exposure[j],
                beta_outcome,
                se_outcome: truth.se_outcome[j],
                selection: Some(Association::new(beta_selection, truth.se_selection[j])),
            }
        })
        .collect();
    SummaryDataset::new(records).expect("simulated SNP ids are unique and p >= 1")
}

/// Monte Carlo summary of one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub method: Method,
    pub mean_psi_hat: f64,
    pub relative_bias_pct: f64,
    pub bias: f64,
    pub empirical_se: f64,
    pub mean_estimated_se: f64,
    pub mse: f64,
    pub coverage_probability: f64,
    pub n_ok: usize,
    pub n_failed: usize,
    /// Replications whose mdIVW variance fell back to the leading term.
    pub n_variance_fallback: usize,
    pub error: Option<String>,
}

/// Scenario truth echoed alongside the Monte Carlo metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruthSummary {
    pub kappa: f64,
    pub psi: f64,
    pub p_lambda: f64,
    pub kappa_lambda: f64,
    pub omega: f64,
    pub psi_lambda: f64,
    pub variance_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsTable {
    pub scenario: SimConfig,
    pub truth: TruthSummary,
    /// Mean of `kappa_hat sqrt(p_selected)` over replications.
    pub mean_psi_hat: f64,
    pub mean_p_selected: f64,
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn row(&self, method: Method) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Wide CSV: one row per method, preceded by `#` comment lines carrying
    /// the scenario as JSON.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        let io = |e: std::io::Error| MrError::Csv(e.into());
        writeln!(
            writer,
            "# scenario: {}",
            serde_json::to_string(&self.scenario)?
        )
        .map_err(io)?;
        writeln!(writer, "# truth: {}", serde_json::to_string(&self.truth)?).map_err(io)?;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "method",
            "mean_psi_hat",
            "relative_bias_pct",
            "bias",
            "empirical_se",
            "mean_estimated_se",
            "mse",
            "coverage_probability",
            "n_ok",
            "n_failed",
            "n_variance_fallback",
            "error",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.method.label().to_string(),
                r.mean_psi_hat.to_string(),
                r.relative_bias_pct.to_string(),
                r.bias.to_string(),
                r.empirical_se.to_string(),
                r.mean_estimated_se.to_string(),
                r.mse.to_string(),
                r.coverage_probability.to_string(),
                r.n_ok.to_string(),
                r.n_failed.to_string(),
                r.n_variance_fallback.to_string(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }
}

struct Replication {
    strength: Option<StrengthStats>,
    estimates: Vec<Option<(f64, f64, bool)>>,
}

fn run_replication(
    truth: &SimTruth,
    config: &SimConfig,
    methods: &[Method],
    rep: usize,
) -> Replication {
    let mut rng = stream_rng(config.seed, rep as u64 + 1);
    let dataset = draw_dataset(truth, config, &mut rng);
    let bootstrap_seed: u64 = rng.random();
    let Ok(mask) = select_ivs(&dataset, config.lambda) else {
        return Replication {
            strength: None,
            estimates: vec![None; methods.len()],
        };
    };
    let strength = estimators::iv_strength(&dataset, &mask).ok();
    let estimates = methods
        .iter()
        .map(|&m| {
            let est = match m {
                Method::WeightedMedian => comparators::weighted_median(
                    &dataset,
                    &mask,
                    config.bootstrap_reps,
                    bootstrap_seed,
                ),
                _ => estimators::estimate(m, &dataset, &mask, config.pleiotropy_adjust),
            };
            est.ok().map(|e| (e.beta, e.se, e.variance_fallback))
        })
        .collect();
    Replication {
        strength,
        estimates,
    }
}

fn summarize(
    method: Method,
    beta0: f64,
    mean_psi_hat: f64,
    results: &[Option<(f64, f64, bool)>],
) -> MetricsRow {
    let ok: Vec<(f64, f64, bool)> = results.iter().flatten().copied().collect();
    let n_failed = results.len() - ok.len();
    if ok.is_empty() {
        let err = MrError::MethodFailure {
            method: method.label().to_string(),
            reps: results.len(),
        };
        return MetricsRow {
            method,
            mean_psi_hat,
            relative_bias_pct: f64::NAN,
            bias: f64::NAN,
            empirical_se: f64::NAN,
            mean_estimated_se: f64::NAN,
            mse: f64::NAN,
            coverage_probability: f64::NAN,
            n_ok: 0,
            n_failed,
            n_variance_fallback: 0,
            error: Some(err.to_string()),
        };
    }
    let betas: Vec<f64> = ok.iter().map(|e| e.0).collect();
    let ses: Vec<f64> = ok.iter().map(|e| e.1).collect();
    let bias = mean(&betas) - beta0;
    let covered = ok
        .iter()
        .filter(|(b, se, _)| {
            let half = estimators::Z_95 * se;
            b - half <= beta0 && beta0 <= b + half
        })
        .count();
    MetricsRow {
        method,
        mean_psi_hat,
        relative_bias_pct: 100.0 * bias / beta0,
        bias,
        empirical_se: sample_variance(&betas).sqrt(),
        mean_estimated_se: mean(&ses),
        mse: csum(betas.iter().map(|b| (b - beta0) * (b - beta0))) / betas.len() as f64,
        coverage_probability: covered as f64 / ok.len() as f64,
        n_ok: ok.len(),
        n_failed,
        n_variance_fallback: ok.iter().filter(|e| e.2).count(),
        error: None,
    }
}

/// Runs `config.reps` replications and summarizes each method.
///
/// Replications where a method fails (for example a non-positive
/// `theta2`) are excluded for that method and counted in `n_failed`.
pub fn run_monte_carlo(config: &SimConfig, methods: &[Method]) -> Result<MetricsTable> {
    if methods.is_empty() {
        return Err(MrError::Config("at least one method is required".into()));
    }
    config.validate()?;
    let truth = build_truth(config, &mut stream_rng(config.seed, 0))?;
    let reps: Vec<Replication> = (0..config.reps)
        .into_par_iter()
        .map(|r| run_replication(&truth, config, methods, r))
        .collect();

    let psi: Vec<f64> = reps
        .iter()
        .filter_map(|r| r.strength.map(|s| s.psi_hat))
        .collect();
    let p_sel: Vec<f64> = reps
        .iter()
        .filter_map(|r| r.strength.map(|s| s.p_selected as f64))
        .collect();
    let mean_psi_hat = mean(&psi);
    let rows = methods
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let results: Vec<Option<(f64, f64, bool)>> =
                reps.iter().map(|r| r.estimates[i]).collect();
            summarize(m, config.beta0, mean_psi_hat, &results)
        })
        .collect();

    Ok(MetricsTable {
        scenario: config.clone(),
        truth: TruthSummary {
            kappa: truth.kappa,
            psi: truth.psi,
            p_lambda: truth.p_lambda,
            kappa_lambda: truth.kappa_lambda,
            omega: truth.omega,
            psi_lambda: truth.psi_lambda,
            variance_gap: truth.population.variance_gap,
        },
        mean_psi_hat,
        mean_p_selected: mean(&p_sel),
        rows,
    })
}

/// Runs every scenario in `grid`. A failing scenario yields an `Err` entry
/// and does not stop the sweep.
pub fn sweep(grid: &[SimConfig], methods: &[Method]) -> Result<Vec<Result<MetricsTable>>> {
    if grid.is_empty() {
        return Err(MrError::Config("sweep grid is empty".into()));
    }
    if methods.is_empty() {
        return Err(MrError::Config("at least one method is required".into()));
    }
    Ok(grid.iter().map(|c| run_monte_carlo(c, methods)).collect())
}

const SCENARIO_COLUMNS: [&str; 11] = [
    "p",
    "s",
    "sigma2",
    "beta0",
    "tau0",
    "n_x",
    "n_y",
    "selection_fraction",
    "lambda",
    "reps",
    "seed",
];

fn scenario_fields(c: &SimConfig) -> Vec<String> {
    vec![
        c.p.to_string(),
        c.s.to_string(),
        c.sigma2.to_string(),
        c.beta0.to_string(),
        c.tau0.to_string(),
        c.n_x.to_string(),
        c.n_y.to_string(),
        c.selection_fraction.to_string(),
        c.lambda.to_string(),
        c.reps.to_string(),
        c.seed.to_string(),
    ]
}

/// Long-format CSV of a sweep: scenario columns, then `method,metric,value`.
pub fn write_long_csv<W: Write>(
    grid: &[SimConfig],
    results: &[Result<MetricsTable>],
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = SCENARIO_COLUMNS.to_vec();
    header.extend(["method", "metric", "value"]);
    w.write_record(&header)?;
    for (config, result) in grid.iter().zip(results) {
        let base = scenario_fields(config);
        let mut emit = |method: &str, metric: &str, value: String| {
            let mut rec = base.clone();
            rec.extend([method.to_string(), metric.to_string(), value]);
            w.write_record(&rec)
        };
        match result {
            Ok(table) => {
                emit("*", "truth_psi", table.truth.psi.to_string())?;
                emit("*", "truth_psi_lambda", table.truth.psi_lambda.to_string())?;
                for r in &table.rows {
                    let m = r.method.label();
                    emit(m, "mean_psi_hat", r.mean_psi_hat.to_string())?;
                    emit(m, "relative_bias_pct", r.relative_bias_pct.to_string())?;
                    emit(m, "empirical_se", r.empirical_se.to_string())?;
                    emit(m, "mean_estimated_se", r.mean_estimated_se.to_string())?;
                    emit(m, "mse", r.mse.to_string())?;
                    emit(
                        m,
                        "coverage_probability",
                        r.coverage_probability.to_string(),
                    )?;
                    emit(m, "n_failed", r.n_failed.to_string())?;
                    emit(m, "n_variance_fallback", r.n_variance_fallback.to_string())?;
                }
            }
            Err(e) => emit("*", "error", e.code().to_string())?,
        }
    }
    w.flush().map_err(|e| MrError::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            p: 200,
            s: 40,
            sigma2: 1e-3,
            reps: 50,
            seed: 3,
            ..SimConfig::default()
        }
    }

    #[test]
    fn null_effects_truth() {
        let cfg = SimConfig {
            s: 0,
            ..SimConfig::default()
        };
        let truth = build_truth(&cfg, &mut stream_rng(1, 0)).unwrap();
        assert!(truth.gamma.iter().all(|&g| g == 0.0));
        assert_eq!(truth.var_x, 4.0);
        assert_eq!((truth.kappa, truth.psi), (0.0, 0.0));
        for (v, m) in truth.var_z.iter().zip(&truth.maf) {
            assert_eq!(*v, 2.0 * m * (1.0 - m));
            assert!((0.1..0.5).contains(m));
        }
    }

    #[test]
    fn unscreened_truth_has_unit_inclusion() {
        let truth = build_truth(&small(), &mut stream_rng(1, 0)).unwrap();
        assert!(truth.q_lambda.iter().all(|&q| q == 1.0));
        assert_eq!(truth.p_lambda, 200.0);
        assert!((truth.kappa_lambda - truth.kappa).abs() < 1e-12);
        assert_eq!(truth.omega, 0.0);
        assert!((truth.psi_lambda - truth.psi).abs() < 1e-9);
        assert!(truth.population.variance_gap > 0.0);
    }

    #[test]
    fn screened_truth_probabilities() {
        let cfg = SimConfig {
            lambda: 3.0,
            ..small()
        };
        let truth = build_truth(&cfg, &mut stream_rng(1, 0)).unwrap();
        assert!(truth.q_lambda.iter().all(|&q| (0.0..=1.0).contains(&q)));
        let null_q = truth.q_lambda[150];
        assert!((null_q - 2.0 * Normal::standard().cdf(-3.0)).abs() < 1e-15);
        assert!(truth.p_lambda < 200.0);
    }

    #[test]
    fn zero_noise_draw_is_exact() {
        let mut truth = build_truth(&small(), &mut stream_rng(1, 0)).unwrap();
        truth.se_exposure.iter_mut().for_each(|s| *s = 0.0);
        truth.se_outcome.iter_mut().for_each(|s| *s = 0.0);
        let ds = draw_dataset(&truth, &small(), &mut stream_rng(1, 5));
        for (r, g) in ds.records().iter().zip(&truth.gamma) {
            assert_eq!(r.beta_exposure, *g);
            assert_eq!(r.beta_outcome, 0.5 * g);
        }
    }

    #[test]
    fn draws_are_deterministic_per_stream() {
        let truth = build_truth(&small(), &mut stream_rng(1, 0)).unwrap();
        let a = draw_dataset(&truth, &small(), &mut stream_rng(9, 4));
        let b = draw_dataset(&truth, &small(), &mut stream_rng(9, 4));
        let c = draw_dataset(&truth, &small(), &mut stream_rng(9, 5));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_configs_rejected() {
        for cfg in [
            SimConfig {
                s: 2000,
                ..SimConfig::default()
            },
            SimConfig {
                reps: 0,
                ..SimConfig::default()
            },
            SimConfig {
                selection_fraction: 0.0,
                ..SimConfig::default()
            },
            SimConfig {
                sigma2: -1.0,
                ..SimConfig::default()
            },
            SimConfig {
                lambda: f64::NAN,
                ..SimConfig::default()
            },
        ] {
            assert!(matches!(
                run_monte_carlo(&cfg, &[Method::Ivw]),
                Err(MrError::Config(_))
            ));
        }
        assert!(run_monte_carlo(&small(), &[]).is_err());
        assert!(sweep(&[], &[Method::Ivw]).is_err());
        assert!(sweep(&[small()], &[]).is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic_and_consistent() {
        let methods = [Method::Ivw, Method::Divw, Method::Mdivw];
        let a = run_monte_carlo(&small(), &methods).unwrap();
        let b = run_monte_carlo(&small(), &methods).unwrap();
        assert_eq!(a, b);
        for row in &a.rows {
            assert!((0.0..=1.0).contains(&row.coverage_probability));
            assert!(row.mse >= row.bias * row.bias - 1e-15);
            assert_eq!(row.n_ok + row.n_failed, 50);
        }
        let one = sweep(&[small()], &methods).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].as_ref().unwrap(), &a);
    }

    #[test]
    fn single_replication_table() {
        let cfg = SimConfig { reps: 1, ..small() };
        let t = run_monte_carlo(&cfg, &[Method::Mdivw]).unwrap();
        let row = &t.rows[0];
        assert_eq!(row.n_ok, 1);
        assert!(row.empirical_se.is_nan());
        assert!(row.coverage_probability == 0.0 || row.coverage_probability == 1.0);
    }

    #[test]
    fn all_failures_marked_in_row() {
        // screening so strict nothing survives
        let cfg = SimConfig {
            lambda: 50.0,
            reps: 5,
            ..small()
        };
        let t = run_monte_carlo(&cfg, &[Method::Divw]).unwrap();
        assert_eq!(t.rows[0].n_failed, 5);
        assert!(t.rows[0].error.as_deref().unwrap().contains("failed"));
    }

    #[test]
    fn csv_outputs() {
        let t = run_monte_carlo(&small(), &[Method::Mdivw]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# scenario: {"));
        assert!(text.contains("\nmethod,mean_psi_hat,"));
        assert!(text.contains("\nmdIVW,"));

        let grid = vec![small(), SimConfig { s: 500, ..small() }];
        let results = sweep(&grid, &[Method::Mdivw]).unwrap();
        let mut buf = Vec::new();
        write_long_csv(&grid, &results, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p,s,sigma2,beta0,tau0,n_x,n_y,selection_fraction,lambda,reps,seed,method,metric,value\n"));
        assert!(text.contains(",mdIVW,coverage_probability,"));
    }
}
