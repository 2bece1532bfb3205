use serde::Serialize;

use crate::error::{MrError, Result};
use crate::summary_data::{SnpRecord, SummaryDataset};

/// Which SNPs enter an analysis after screening on the selection GWAS.
///
/// A SNP is included iff `|beta*| / se* > lambda` (ties excluded). With
/// `lambda = 0` every SNP is included and no selection data is needed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionMask {
    pub lambda: f64,
    pub included: Vec<bool>,
    pub p_lambda_hat: usize,
}

impl SelectionMask {
    /// Mask that includes all `p` SNPs.
    pub fn all(p: usize) -> Self {
        Self {
            lambda: 0.0,
            included: vec![true; p],
            p_lambda_hat: p,
        }
    }

    /// Mask from explicit inclusion flags; `lambda` is recorded as given.
    pub fn from_flags(lambda: f64, included: Vec<bool>) -> Self {
        let p_lambda_hat = included.iter().filter(|&&b| b).count();
        Self {
            lambda,
            included,
            p_lambda_hat,
        }
    }

    pub fn len(&self) -> usize {
        self.included.len()
    }

    pub fn is_empty(&self) -> bool {
        self.included.is_empty()
    }

    /// Records of `dataset` selected by this mask, in dataset order.
    pub fn apply<'a>(&self, dataset: &'a SummaryDataset) -> Result<Vec<&'a SnpRecord>> {
        if self.included.len() != dataset.len() {
            return Err(MrError::MaskLength {
                mask: self.included.len(),
                dataset: dataset.len(),
            });
        }
        let selected: Vec<_> = dataset
            .records()
            .iter()
            .zip(&self.included)
            .filter_map(|(r, &keep)| keep.then_some(r))
            .collect();
        if selected.is_empty() {
            return Err(MrError::EmptySelection);
        }
        Ok(selected)
    }
}

/// Screens instruments on the selection-GWAS z-statistic.
pub fn select_ivs(dataset: &SummaryDataset, lambda: f64) -> Result<SelectionMask> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(MrError::InvalidLambda(lambda));
    }
    if lambda == 0.0 {
        return Ok(SelectionMask::all(dataset.len()));
    }
    if !dataset.has_selection() {
        return Err(MrError::MissingSelectionData);
    }
    let included = dataset
        .records()
        .iter()
        .map(|r| r.selection_z().is_some_and(|z| z > lambda))
        .collect();
    Ok(SelectionMask::from_flags(lambda, included))
}

/// Recommended screening threshold `sqrt(2 ln p)`; zero for `p <= 1`.
pub fn default_lambda(p: usize) -> f64 {
    if p <= 1 {
        return 0.0;
    }
    (2.0 * (p as f64).ln()).sqrt()
}
