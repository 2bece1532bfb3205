//! Two-sample summary-data Mendelian randomization with many weak
//! instruments.
//!
//! The central estimator is the modified debiased inverse-variance weighted
//! (mdIVW) estimator, which removes the first-order bias that the debiased
//! IVW estimator still carries when instruments are weak. The crate also
//! provides IVW, dIVW, MR-Egger and a weighted-median comparator, screening
//! of instruments on an independent selection GWAS, a Monte Carlo simulator
//! and residual diagnostics.
//!
//! ```
//! use mdivw::estimators::{mdivw, SelectionMask};
//! use mdivw::summary_data::{SnpRecord, SummaryDataset};
//!
//! let data = SummaryDataset::new(vec![
//!     SnpRecord::new("rs1", 0.2, 0.05, 0.1, 0.1),
//!     SnpRecord::new("rs2", 0.1, 0.05, 0.05, 0.1),
//!     SnpRecord::new("rs3", 0.3, 0.05, 0.15, 0.1),
//! ])?;
//! let est = mdivw(&data, &SelectionMask::all(data.len()), false)?;
//! assert!((est.beta - 0.5072).abs() < 1e-4);
//! # Ok::<(), mdivw::MrError>(())
//! ```

pub mod cli;
pub mod comparators;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod simulation;
pub mod sum;
pub mod summary_data;

pub use error::{MrError, Result};
pub use estimators::{Estimate, Method, SelectionMask};
pub use summary_data::{SnpRecord, SummaryDataset};
