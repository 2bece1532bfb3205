//! Standardized residuals and normal Q-Q coordinates.

use std::io::Write;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{MrError, Result};
use crate::estimators::SelectionMask;
use crate::sum::{mean, sample_variance};
use crate::summary_data::SummaryDataset;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub snp_id: String,
    pub residual: f64,
    pub theoretical_quantile: f64,
}

/// Residuals sorted ascending, each paired with the standard-normal
/// quantile at plotting position `(r - 0.5) / n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSet {
    pub beta: f64,
    pub entries: Vec<ResidualEntry>,
}

impl ResidualSet {
    pub fn residuals(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.residual).collect()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.residuals())
    }

    pub fn variance(&self) -> f64 {
        sample_variance(&self.residuals())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["snp_id", "residual", "theoretical_quantile"])?;
        for e in &self.entries {
            w.write_record([
                e.snp_id.clone(),
                e.residual.to_string(),
                e.theoretical_quantile.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// `(G - beta g) / sqrt(sG^2 + beta^2 sg^2)` for every selected SNP.
pub fn standardized_residuals(
    dataset: &SummaryDataset,
    mask: &SelectionMask,
    beta: f64,
) -> Result<ResidualSet> {
    residuals_with_tau(dataset, mask, beta, 0.0)
}

/// As [`standardized_residuals`] with `tau2` added to the denominator
/// variance, for data analysed under balanced pleiotropy.
pub fn residuals_with_tau(
    dataset: &SummaryDataset,
    mask: &SelectionMask,
    beta: f64,
    tau2: f64,
) -> Result<ResidualSet> {
    if !beta.is_finite() {
        return Err(MrError::Config(format!("beta must be finite, got {beta}")));
    }
    if !(tau2 >= 0.0 && tau2.is_finite()) {
        return Err(MrError::Config(format!(
            "tau2 must be non-negative, got {tau2}"
        )));
    }
    let selected = mask.apply(dataset)?;
    let mut pairs: Vec<(String, f64)> = selected
        .iter()
        .map(|r| {
            let scale =
                (r.se_outcome * r.se_outcome + beta * beta * r.se_exposure * r.se_exposure + tau2)
                    .sqrt();
            (
                r.snp_id.clone(),
                (r.beta_outcome - beta * r.beta_exposure) / scale,
            )
        })
        .collect();
    pairs.sort_by(|a, b| a.1.total_cmp(&b.1));

    let n = pairs.len() as f64;
    let normal = Normal::standard();
    let entries = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (snp_id, residual))| ResidualEntry {
            snp_id,
            residual,
            theoretical_quantile: normal.inverse_cdf((i as f64 + 0.5) / n),
        })
        .collect();
    Ok(ResidualSet { beta, entries })
}
