//! MR-Egger regression and the weighted-median estimator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{MrError, Result};
use crate::estimators::{Estimate, Method, SelectionMask, StrengthStats};
use crate::sum::{csum, sample_variance};
use crate::summary_data::SummaryDataset;

pub const DEFAULT_BOOTSTRAP_REPS: usize = 1000;
pub const MIN_BOOTSTRAP_REPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EggerFit {
    pub intercept: f64,
    pub slope: f64,
    pub se_intercept: f64,
    pub se_slope: f64,
    /// Residual standard error of the weighted fit; standard errors are
    /// multiplied by `max(1, residual_scale)`.
    pub residual_scale: f64,
}

/// Weighted least squares of outcome on exposure coefficients with an
/// intercept and weights `sG^-2`, after orienting every SNP so that its
/// exposure coefficient is non-negative.
pub fn egger_fit(dataset: &SummaryDataset, mask: &SelectionMask) -> Result<EggerFit> {
    let selected = mask.apply(dataset)?;
    let n = selected.len();
    if n < 3 {
        return Err(MrError::InsufficientInstruments {
            method: "MR-Egger",
            needed: 3,
            got: n,
        });
    }
    let points: Vec<(f64, f64, f64)> = selected
        .iter()
        .map(|r| {
            let sign = if r.beta_exposure < 0.0 { -1.0 } else { 1.0 };
            let w = 1.0 / (r.se_outcome * r.se_outcome);
            (sign * r.beta_exposure, sign * r.beta_outcome, w)
        })
        .collect();

    let sw = csum(points.iter().map(|p| p.2));
    let x_bar = csum(points.iter().map(|p| p.2 * p.0)) / sw;
    let y_bar = csum(points.iter().map(|p| p.2 * p.1)) / sw;
    let sxx = csum(points.iter().map(|p| p.2 * (p.0 - x_bar) * (p.0 - x_bar)));
    let sxy = csum(points.iter().map(|p| p.2 * (p.0 - x_bar) * (p.1 - y_bar)));
    let scale_x = csum(points.iter().map(|p| p.2 * p.0 * p.0));
    if sxx.is_nan() || sxx <= 1e-12 * scale_x {
        return Err(MrError::SingularDesign);
    }

    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let rss = csum(points.iter().map(|p| {
        let r = p.1 - intercept - slope * p.0;
        p.2 * r * r
    }));
    let residual_scale = (rss / (n - 2) as f64).sqrt();
    let inflate = residual_scale.max(1.0);
    Ok(EggerFit {
        intercept,
        slope,
        se_intercept: (1.0 / sw + x_bar * x_bar / sxx).sqrt() * inflate,
        se_slope: (1.0 / sxx).sqrt() * inflate,
        residual_scale,
    })
}

/// MR-Egger slope as a causal estimate.
pub fn egger(dataset: &SummaryDataset, mask: &SelectionMask) -> Result<Estimate> {
    let fit = egger_fit(dataset, mask)?;
    let strength = StrengthStats::from_records(&mask.apply(dataset)?, mask.lambda);
    Ok(Estimate::new(
        Method::Egger,
        fit.slope,
        fit.se_slope,
        strength,
    ))
}

/// 50% quantile of a weighted empirical distribution.
///
/// Values are sorted, each is placed at cumulative weight
/// `sum_{k<=j} w_k - w_j / 2` (weights normalized to one), and the median is
/// interpolated linearly between the two order statistics that bracket 0.5.
pub fn weighted_median_of(values: &[f64], weights: &[f64]) -> f64 {
    assert_eq!(values.len(), weights.len());
    assert!(!values.is_empty());
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total = csum(weights.iter().copied());

    let mut cumulative = 0.0;
    let mut positions = Vec::with_capacity(order.len());
    for &i in &order {
        let w = weights[i] / total;
        positions.push(cumulative + w / 2.0);
        cumulative += w;
    }
    // first position at or beyond 0.5
    let above = positions
        .iter()
        .position(|&s| s >= 0.5)
        .unwrap_or(order.len() - 1);
    if positions[above] == 0.5 || above == 0 {
        return values[order[above]];
    }
    let below = above - 1;
    let (s_lo, s_hi) = (positions[below], positions[above]);
    let (v_lo, v_hi) = (values[order[below]], values[order[above]]);
    v_lo + (v_hi - v_lo) * (0.5 - s_lo) / (s_hi - s_lo)
}

/// Weighted median of the Wald ratios `G/g` with weights `sG^-2 g^2`; the
/// standard error comes from a parametric bootstrap of `(g, G)` using the
/// original weights.
pub fn weighted_median(
    dataset: &SummaryDataset,
    mask: &SelectionMask,
    bootstrap_reps: usize,
    seed: u64,
) -> Result<Estimate> {
    let selected = mask.apply(dataset)?;
    if selected.len() < 2 {
        return Err(MrError::InsufficientInstruments {
            method: "MR-Median",
            needed: 2,
            got: selected.len(),
        });
    }
    if bootstrap_reps < MIN_BOOTSTRAP_REPS {
        return Err(MrError::Config(format!(
            "bootstrap_reps must be at least {MIN_BOOTSTRAP_REPS}, got {bootstrap_reps}"
        )));
    }
    if let Some(r) = selected.iter().find(|r| r.beta_exposure == 0.0) {
        return Err(MrError::UndefinedRatio(r.snp_id.clone()));
    }
    let ratios: Vec<f64> = selected
        .iter()
        .map(|r| r.beta_outcome / r.beta_exposure)
        .collect();
    let weights: Vec<f64> = selected
        .iter()
        .map(|r| (r.beta_exposure * r.beta_exposure) / (r.se_outcome * r.se_outcome))
        .collect();
    let beta = weighted_median_of(&ratios, &weights);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resampled = vec![0.0; selected.len()];
    let boot: Vec<f64> = (0..bootstrap_reps)
        .map(|_| {
            for (slot, r) in resampled.iter_mut().zip(&selected) {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                let g = r.beta_exposure + r.se_exposure * z1;
                let y = r.beta_outcome + r.se_outcome * z2;
                *slot = y / g;
            }
            weighted_median_of(&resampled, &weights)
        })
        .collect();
    let se = sample_variance(&boot).sqrt();

    let strength = StrengthStats::from_records(&selected, mask.lambda);
    Ok(Estimate::new(Method::WeightedMedian, beta, se, strength))
}
