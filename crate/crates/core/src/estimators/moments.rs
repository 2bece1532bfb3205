use serde::Serialize;

use super::selection::SelectionMask;
use crate::error::Result;
use crate::sum::csum;
use crate::summary_data::{SnpRecord, SummaryDataset};

/// Weighted moment sums over the selected SNPs.
///
/// With exposure coefficient `g`, its SE `sg`, outcome coefficient `G` and
/// its SE `sG`:
///
/// * `theta1 = sum sG^-2 g G`
/// * `theta2 = sum sG^-2 (g^2 - sg^2)`
/// * `v1 = sum sG^-4 (sg^2 G^2 + sG^2 g^2 - sg^2 sG^2)` (estimates Var(theta1))
/// * `v2 = sum sG^-4 (4 sg^2 g^2 - 2 sg^4)` (estimates Var(theta2))
/// * `v12 = 2 sum sG^-4 sg^2 g G` (estimates Cov(theta1, theta2))
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub theta1: f64,
    pub theta2: f64,
    pub v1: f64,
    pub v2: f64,
    pub v12: f64,
    pub p_used: usize,
}

impl Moments {
    pub(crate) fn from_records(selected: &[&SnpRecord]) -> Self {
        let theta1 = csum(
            selected
                .iter()
                .map(|r| r.beta_exposure * r.beta_outcome / (r.se_outcome * r.se_outcome)),
        );
        let theta2 = csum(selected.iter().map(|r| {
            (r.beta_exposure * r.beta_exposure - r.se_exposure * r.se_exposure)
                / (r.se_outcome * r.se_outcome)
        }));
        let v1 = v1_inflated(selected, 0.0);
        let v2 = csum(selected.iter().map(|r| {
            let (sg2, sy2) = (r.se_exposure * r.se_exposure, r.se_outcome * r.se_outcome);
            (4.0 * sg2 * r.beta_exposure * r.beta_exposure - 2.0 * sg2 * sg2) / (sy2 * sy2)
        }));
        let v12 = 2.0
            * csum(selected.iter().map(|r| {
                let (sg2, sy2) = (r.se_exposure * r.se_exposure, r.se_outcome * r.se_outcome);
                sg2 * r.beta_exposure * r.beta_outcome / (sy2 * sy2)
            }));
        Self {
            theta1,
            theta2,
            v1,
            v2,
            v12,
            p_used: selected.len(),
        }
    }
}

/// `sum sG^-4 {sg^2 G^2 + (sG^2 + tau2) g^2 - (sG^2 + tau2) sg^2}`; equals
/// `v1` at `tau2 = 0`.
pub(crate) fn v1_inflated(selected: &[&SnpRecord], tau2: f64) -> f64 {
    csum(selected.iter().map(|r| {
        let (sg2, sy2) = (r.se_exposure * r.se_exposure, r.se_outcome * r.se_outcome);
        let inflated = sy2 + tau2;
        (sg2 * (r.beta_outcome * r.beta_outcome) + inflated * (r.beta_exposure * r.beta_exposure)
            - inflated * sg2)
            / (sy2 * sy2)
    }))
}

pub fn compute_moments(dataset: &SummaryDataset, mask: &SelectionMask) -> Result<Moments> {
    Ok(Moments::from_records(&mask.apply(dataset)?))
}

/// Average instrument strength and effective sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrengthStats {
    pub kappa_hat: f64,
    pub p_selected: usize,
    pub psi_hat: f64,
    pub lambda: f64,
}

impl StrengthStats {
    pub(crate) fn from_records(selected: &[&SnpRecord], lambda: f64) -> Self {
        let p = selected.len();
        let kappa_hat = csum(
            selected
                .iter()
                .map(|r| (r.beta_exposure * r.beta_exposure) / (r.se_exposure * r.se_exposure)),
        ) / p as f64
            - 1.0;
        Self {
            kappa_hat,
            p_selected: p,
            psi_hat: kappa_hat * (p as f64).sqrt(),
            lambda,
        }
    }
}

/// `kappa_hat = mean(g^2 / sg^2) - 1` over selected SNPs and
/// `psi_hat = kappa_hat * sqrt(p_selected)`.
pub fn iv_strength(dataset: &SummaryDataset, mask: &SelectionMask) -> Result<StrengthStats> {
    Ok(StrengthStats::from_records(
        &mask.apply(dataset)?,
        mask.lambda,
    ))
}
