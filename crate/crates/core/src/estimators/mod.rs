//! Inverse-variance weighted causal-effect estimators.
//!
//! All estimators work on the SNPs selected by a [`SelectionMask`]; the
//! unselected analysis is the special case `SelectionMask::all(p)`.
//!
//! * [`ivw`]: ratio of `sum sG^-2 g G` to `sum sG^-2 g^2`. Biased towards
//!   zero under many weak instruments.
//! * [`divw`]: replaces `g^2` by its unbiased estimate `g^2 - sg^2`.
//! * [`mdivw`]: multiplies the dIVW estimate by the first-order bias
//!   correction factor `1 - v2/theta2^2 + v12/(theta1 theta2)`.

mod moments;
mod selection;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use moments::{compute_moments, iv_strength, Moments, StrengthStats};
pub use selection::{default_lambda, select_ivs, SelectionMask};

use crate::error::{MrError, Result};
use crate::sum::csum;
use crate::summary_data::{SnpRecord, SummaryDataset};

/// Two-sided 95% standard-normal critical value.
pub const Z_95: f64 = 1.959964;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    #[serde(rename = "IVW")]
    Ivw,
    #[serde(rename = "dIVW")]
    Divw,
    #[serde(rename = "mdIVW")]
    Mdivw,
    #[serde(rename = "MR-Egger")]
    Egger,
    #[serde(rename = "MR-Median")]
    WeightedMedian,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Ivw,
        Method::Divw,
        Method::Mdivw,
        Method::Egger,
        Method::WeightedMedian,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Ivw => "IVW",
            Method::Divw => "dIVW",
            Method::Mdivw => "mdIVW",
            Method::Egger => "MR-Egger",
            Method::WeightedMedian => "MR-Median",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = MrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ivw" => Ok(Method::Ivw),
            "divw" => Ok(Method::Divw),
            "mdivw" => Ok(Method::Mdivw),
            "egger" | "mr-egger" => Ok(Method::Egger),
            "median" | "wm" | "weighted-median" | "mr-median" => Ok(Method::WeightedMedian),
            _ => Err(MrError::UnknownMethod(s.to_string())),
        }
    }
}

/// Parses a comma-separated method list.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// A causal-effect estimate with its standard error and normal interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub method: Method,
    pub beta: f64,
    pub se: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// Raw (unclamped) pleiotropy variance estimate, when requested.
    pub tau2: Option<f64>,
    pub strength: StrengthStats,
    pub p_used: usize,
    /// Set when the mdIVW variance estimate was not positive and the
    /// leading (dIVW-form) term was used instead.
    pub variance_fallback: bool,
}

impl Estimate {
    pub(crate) fn new(method: Method, beta: f64, se: f64, strength: StrengthStats) -> Self {
        Self {
            method,
            beta,
            se,
            ci_lower: beta - Z_95 * se,
            ci_upper: beta + Z_95 * se,
            tau2: None,
            strength,
            p_used: strength.p_selected,
            variance_fallback: false,
        }
    }

    /// Recomputes the interval with a different critical value.
    pub fn with_critical_value(mut self, z: f64) -> Self {
        self.ci_lower = self.beta - z * self.se;
        self.ci_upper = self.beta + z * self.se;
        self
    }

    pub fn covers(&self, value: f64) -> bool {
        self.ci_lower <= value && value <= self.ci_upper
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Inverse-variance weighted estimate. The standard error is the
/// fixed-effect `sqrt(1 / sum sG^-2 g^2)`.
pub fn ivw(dataset: &SummaryDataset, mask: &SelectionMask) -> Result<Estimate> {
    let selected = mask.apply(dataset)?;
    let strength = StrengthStats::from_records(&selected, mask.lambda);
    let theta1 = Moments::from_records(&selected).theta1;
    let denom = csum(
        selected
            .iter()
            .map(|r| sq(r.beta_exposure) / sq(r.se_outcome)),
    );
    if denom <= 0.0 || !denom.is_finite() {
        return Err(MrError::DegenerateDenominator {
            quantity: "sum se_outcome^-2 beta_exposure^2",
            value: denom,
        });
    }
    Ok(Estimate::new(
        Method::Ivw,
        theta1 / denom,
        (1.0 / denom).sqrt(),
        strength,
    ))
}

/// `theta2^-2 sum { sG^-2 g^2 (1 + sG^-2 tau2) + b^2 sG^-4 sg^2 (g^2 + sg^2) }`,
/// the dIVW-form variance evaluated at `beta`.
fn leading_variance(selected: &[&SnpRecord], theta2: f64, beta: f64, tau2: f64) -> f64 {
    let total = csum(selected.iter().map(|r| {
        let (g2, sg2, sy2) = (sq(r.beta_exposure), sq(r.se_exposure), sq(r.se_outcome));
        g2 / sy2 * (1.0 + tau2 / sy2) + beta * beta * sg2 * (g2 + sg2) / (sy2 * sy2)
    }));
    total / (theta2 * theta2)
}

fn check_theta2(moments: &Moments, strength: &StrengthStats) -> Result<()> {
    if moments.theta2 <= 0.0 || !moments.theta2.is_finite() {
        return Err(MrError::WeakInstrument {
            theta2: moments.theta2,
            psi_hat: strength.psi_hat,
        });
    }
    Ok(())
}

/// Debiased IVW estimate `theta1 / theta2`.
pub fn divw(dataset: &SummaryDataset, mask: &SelectionMask) -> Result<Estimate> {
    let selected = mask.apply(dataset)?;
    let strength = StrengthStats::from_records(&selected, mask.lambda);
    let m = Moments::from_records(&selected);
    check_theta2(&m, &strength)?;
    let beta = m.theta1 / m.theta2;
    let var = leading_variance(&selected, m.theta2, beta, 0.0);
    Ok(Estimate::new(Method::Divw, beta, var.sqrt(), strength))
}

/// The mdIVW modification factor `1 - v2/theta2^2 + v12/(theta1 theta2)`.
pub fn modification_factor(m: &Moments) -> f64 {
    1.0 - m.v2 / (m.theta2 * m.theta2) + m.v12 / (m.theta1 * m.theta2)
}

/// Pieces of the mdIVW variance estimate, exposed for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MdivwVariance {
    /// dIVW-form term evaluated at the mdIVW estimate.
    pub leading: f64,
    /// `beta^2 * delta_hat`; kept in this form so that `beta = 0` is finite.
    pub beta2_delta: f64,
    /// `leading - 2 beta^2 delta_hat / theta2^4`.
    pub variance: f64,
}

impl MdivwVariance {
    pub fn delta(&self, beta: f64) -> f64 {
        self.beta2_delta / (beta * beta)
    }
}

/// Variance of the mdIVW estimate at `beta`, with pleiotropy variance
/// `tau2` (pass 0 for none; negative values must be clamped by the caller).
///
/// `v1` is inflated to `v1 + tau2 sum sG^-4 (g^2 - sg^2)` and the last
/// correction sum in delta_hat carries the factor `1 + sG^-2 tau2`, so the
/// expression reduces exactly to the unadjusted one at `tau2 = 0`.
/// `moments.v1` is not used; `v1` is recomputed with the inflation.
pub fn mdivw_variance(
    selected: &[&SnpRecord],
    moments: &Moments,
    beta: f64,
    tau2: f64,
) -> MdivwVariance {
    let Moments {
        theta2, v2, v12, ..
    } = *moments;
    let v1 = moments::v1_inflated(selected, tau2);
    // sum sG^-6 sg^6 (6 sg^-2 g^2 + 2), written without sg^-2
    let cubic = csum(selected.iter().map(|r| {
        let (sg2, sy2) = (sq(r.se_exposure), sq(r.se_outcome));
        sg2 * sg2 * (6.0 * sq(r.beta_exposure) + 2.0 * sg2) / (sy2 * sy2 * sy2)
    }));
    let quadratic = csum(selected.iter().map(|r| {
        let (sg2, sy2) = (sq(r.se_exposure), sq(r.se_outcome));
        sg2 * sq(r.beta_exposure) / (sy2 * sy2) * (1.0 + tau2 / sy2)
    }));
    let b2 = beta * beta;
    let beta2_delta = v1 * v2 - 6.0 * v12 * v2 * beta + 2.0 * v12 * v12 + 3.0 * v2 * v2 * b2
        - theta2 * b2 * cubic
        - 2.0 * theta2 * quadratic;
    let leading = leading_variance(selected, theta2, beta, tau2);
    let variance = leading - 2.0 * beta2_delta / theta2.powi(4);
    MdivwVariance {
        leading,
        beta2_delta,
        variance,
    }
}

/// Modified debiased IVW estimate.
///
/// With `pleiotropy = true` the balanced-pleiotropy variance `tau2` is
/// estimated at the mdIVW estimate, clamped at zero, and used in the
/// variance; the raw value is reported in [`Estimate::tau2`]. The point
/// estimate does not depend on `pleiotropy`.
pub fn mdivw(dataset: &SummaryDataset, mask: &SelectionMask, pleiotropy: bool) -> Result<Estimate> {
    let selected = mask.apply(dataset)?;
    let strength = StrengthStats::from_records(&selected, mask.lambda);
    let m = Moments::from_records(&selected);
    if m.theta1 == 0.0 {
        return Err(MrError::ZeroNumerator);
    }
    check_theta2(&m, &strength)?;
    let beta = modification_factor(&m) * (m.theta1 / m.theta2);

    let tau2_raw = pleiotropy.then(|| tau_squared_records(&selected, beta));
    let tau2 = tau2_raw.map_or(0.0, |t| t.max(0.0));
    let var = mdivw_variance(&selected, &m, beta, tau2);

    let (variance, fallback) = if var.variance > 0.0 && var.variance.is_finite() {
        (var.variance, false)
    } else {
        log::debug!(
            "mdIVW variance estimate {} is not positive (psi_hat = {:.3}); using the leading term",
            var.variance,
            strength.psi_hat
        );
        (var.leading, true)
    };
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(MrError::VarianceDegenerate {
            delta: var.delta(beta),
        });
    }

    let mut est = Estimate::new(Method::Mdivw, beta, variance.sqrt(), strength);
    est.tau2 = tau2_raw;
    est.variance_fallback = fallback;
    Ok(est)
}

fn tau_squared_records(selected: &[&SnpRecord], beta: f64) -> f64 {
    let num = csum(selected.iter().map(|r| {
        let sy2 = sq(r.se_outcome);
        (sq(r.beta_outcome - beta * r.beta_exposure) - sy2 - beta * beta * sq(r.se_exposure)) / sy2
    }));
    let den = csum(selected.iter().map(|r| 1.0 / sq(r.se_outcome)));
    num / den
}

/// Raw method-of-moments estimate of the balanced-pleiotropy variance at
/// `beta`. May be negative.
pub fn tau_squared(dataset: &SummaryDataset, mask: &SelectionMask, beta: f64) -> Result<f64> {
    if !beta.is_finite() {
        return Err(MrError::Config(format!("beta must be finite, got {beta}")));
    }
    Ok(tau_squared_records(&mask.apply(dataset)?, beta))
}

/// Runs one of the closed-form estimators.
pub fn estimate(
    method: Method,
    dataset: &SummaryDataset,
    mask: &SelectionMask,
    pleiotropy: bool,
) -> Result<Estimate> {
    match method {
        Method::Ivw => ivw(dataset, mask),
        Method::Divw => divw(dataset, mask),
        Method::Mdivw => mdivw(dataset, mask, pleiotropy),
        Method::Egger => crate::comparators::egger(dataset, mask),
        Method::WeightedMedian => crate::comparators::weighted_median(
            dataset,
            mask,
            crate::comparators::DEFAULT_BOOTSTRAP_REPS,
            0,
        ),
    }
}
