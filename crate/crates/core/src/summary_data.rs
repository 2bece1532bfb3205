//! GWAS summary statistics: loading, joining and validation.
//!
//! Inputs are delimited text files (tab or comma, detected from the header
//! line) with one row per SNP. A [`ColumnSchema`] names the identifier,
//! coefficient and standard-error columns so that exports with arbitrary
//! headers load without preprocessing. Alleles are assumed harmonized.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MrError, ParseError, Result};

/// Marginal association of one SNP with one trait.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub beta: f64,
    pub se: f64,
}

impl Association {
    pub fn new(beta: f64, se: f64) -> Self {
        Self { beta, se }
    }
}

/// Summary statistics of one SNP across the exposure, outcome and
/// (optionally) selection GWAS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnpRecord {
    pub snp_id: String,
    /// Exposure coefficient and its standard error.
    pub beta_exposure: f64,
    pub se_exposure: f64,
    /// Outcome coefficient and its standard error.
    pub beta_outcome: f64,
    pub se_outcome: f64,
    /// Exposure association in an independent selection GWAS.
    pub selection: Option<Association>,
}

impl SnpRecord {
    pub fn new(
        snp_id: impl Into<String>,
        beta_exposure: f64,
        se_exposure: f64,
        beta_outcome: f64,
        se_outcome: f64,
    ) -> Self {
        Self {
            snp_id: snp_id.into(),
            beta_exposure,
            se_exposure,
            beta_outcome,
            se_outcome,
            selection: None,
        }
    }

    pub fn with_selection(mut self, beta: f64, se: f64) -> Self {
        self.selection = Some(Association::new(beta, se));
        self
    }

    /// Selection z-statistic |beta*| / se*, if selection data is present.
    pub fn selection_z(&self) -> Option<f64> {
        self.selection.map(|a| a.beta.abs() / a.se)
    }
}

/// An ordered, non-empty set of SNPs with unique identifiers.
///
/// Numeric invariants (finite values, positive standard errors) are
/// enforced by [`load_dataset`] and reported by [`validate`]; datasets built
/// in memory may carry zero standard errors for degenerate checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryDataset {
    records: Vec<SnpRecord>,
}

impl SummaryDataset {
    pub fn new(records: Vec<SnpRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(MrError::EmptyDataset);
        }
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.snp_id.as_str()) {
                return Err(MrError::DuplicateRecord(r.snp_id.clone()));
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[SnpRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// True iff every record carries selection-dataset statistics.
    pub fn has_selection(&self) -> bool {
        self.records.iter().all(|r| r.selection.is_some())
    }

    /// Copy of the dataset with the outcome coefficients and standard errors
    /// multiplied by `c`.
    pub fn scale_outcome(&self, c: f64) -> Self {
        let records = self
            .records
            .iter()
            .map(|r| SnpRecord {
                beta_outcome: r.beta_outcome * c,
                se_outcome: r.se_outcome * c,
                ..r.clone()
            })
            .collect();
        Self { records }
    }
}

/// Column names used to read one summary-statistics file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub snp_id: String,
    pub beta: String,
    pub se: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        Self {
            snp_id: "snp_id".into(),
            beta: "beta".into(),
            se: "se".into(),
        }
    }
}

impl FromStr for ColumnSchema {
    type Err = MrError;

    /// Parses `key=column` pairs separated by commas, e.g.
    /// `snp_id=SNP,beta=BETA,se=SE`. Unspecified keys keep their defaults.
    fn from_str(s: &str) -> Result<Self> {
        let mut schema = ColumnSchema::default();
        for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                MrError::Config(format!("schema entry `{pair}` is not key=column"))
            })?;
            let value = value.trim().to_string();
            match key.trim() {
                "snp_id" | "snp" => schema.snp_id = value,
                "beta" => schema.beta = value,
                "se" => schema.se = value,
                other => {
                    return Err(MrError::Config(format!(
                        "unknown schema key `{other}` (expected snp_id, beta, se)"
                    )))
                }
            }
        }
        Ok(schema)
    }
}

impl fmt::Display for ColumnSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "snp_id={},beta={},se={}",
            self.snp_id, self.beta, self.se
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    MissingFromOutcome,
    MissingFromSelection,
    OutcomeOnly,
    SelectionOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedSnp {
    pub snp_id: String,
    pub reason: DropReason,
}

/// What happened during the join. Every SNP that did not make it into the
/// dataset is listed with its reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadSummary {
    pub exposure_rows: usize,
    pub outcome_rows: usize,
    pub selection_rows: Option<usize>,
    pub joined: usize,
    pub dropped: Vec<DroppedSnp>,
}

impl LoadSummary {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug)]
struct Table {
    rows: Vec<(String, Association)>,
    index: HashMap<String, usize>,
}

fn detect_delimiter(header: &str) -> u8 {
    if header.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

fn read_table(path: &Path, schema: &ColumnSchema) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|source| MrError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let header_line = text.lines().next().unwrap_or("");
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(header_line))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let malformed = |e: csv::Error| MrError::Malformed {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let headers = reader.headers().map_err(malformed)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MrError::Schema {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };
    let id_col = column(&schema.snp_id)?;
    let beta_col = column(&schema.beta)?;
    let se_col = column(&schema.se)?;

    let mut rows = Vec::new();
    let mut index = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(malformed)?;
        // header is line 1
        let row = i + 2;
        let snp_id = record.get(id_col).unwrap_or("").to_string();
        let cell = |col: usize, name: &str, positive: bool| -> Result<f64> {
            let raw = record.get(col).unwrap_or("");
            let err = |message: &str| {
                MrError::Parse(Box::new(ParseError {
                    path: path.to_path_buf(),
                    row,
                    snp_id: snp_id.clone(),
                    column: name.to_string(),
                    value: raw.to_string(),
                    message: message.to_string(),
                }))
            };
            let v: f64 = raw.parse().map_err(|_| err("not a number"))?;
            if !v.is_finite() {
                return Err(err("not finite"));
            }
            if positive && v <= 0.0 {
                return Err(err("standard error must be positive"));
            }
            Ok(v)
        };
        let beta = cell(beta_col, &schema.beta, false)?;
        let se = cell(se_col, &schema.se, true)?;
        if snp_id.is_empty() {
            return Err(MrError::Parse(Box::new(ParseError {
                path: path.to_path_buf(),
                row,
                snp_id,
                column: schema.snp_id.clone(),
                value: String::new(),
                message: "empty identifier".into(),
            })));
        }
        if index.insert(snp_id.clone(), rows.len()).is_some() {
            return Err(MrError::DuplicateSnp {
                path: path.to_path_buf(),
                snp_id,
            });
        }
        rows.push((snp_id, Association::new(beta, se)));
    }
    Ok(Table { rows, index })
}

/// Loads exposure, outcome and optional selection files and inner-joins them
/// on `snp_id`, keeping exposure-file order.
pub fn load_dataset(
    exposure_path: impl AsRef<Path>,
    outcome_path: impl AsRef<Path>,
    selection_path: Option<&Path>,
    schema: &ColumnSchema,
) -> Result<(SummaryDataset, LoadSummary)> {
    let exposure = read_table(exposure_path.as_ref(), schema)?;
    let outcome = read_table(outcome_path.as_ref(), schema)?;
    let selection = selection_path.map(|p| read_table(p, schema)).transpose()?;

    let mut records = Vec::new();
    let mut dropped = Vec::new();
    for (id, exp) in &exposure.rows {
        let Some(&oi) = outcome.index.get(id) else {
            dropped.push(DroppedSnp {
                snp_id: id.clone(),
                reason: DropReason::MissingFromOutcome,
            });
            continue;
        };
        let out = outcome.rows[oi].1;
        let mut record = SnpRecord::new(id.clone(), exp.beta, exp.se, out.beta, out.se);
        if let Some(sel) = &selection {
            match sel.index.get(id) {
                Some(&si) => record.selection = Some(sel.rows[si].1),
                None => {
                    dropped.push(DroppedSnp {
                        snp_id: id.clone(),
                        reason: DropReason::MissingFromSelection,
                    });
                    continue;
                }
            }
        }
        records.push(record);
    }
    for (id, _) in &outcome.rows {
        if !exposure.index.contains_key(id) {
            dropped.push(DroppedSnp {
                snp_id: id.clone(),
                reason: DropReason::OutcomeOnly,
            });
        }
    }
    if let Some(sel) = &selection {
        for (id, _) in &sel.rows {
            if !exposure.index.contains_key(id) {
                dropped.push(DroppedSnp {
                    snp_id: id.clone(),
                    reason: DropReason::SelectionOnly,
                });
            }
        }
    }

    if records.is_empty() {
        return Err(MrError::EmptyJoin);
    }
    let summary = LoadSummary {
        exposure_rows: exposure.rows.len(),
        outcome_rows: outcome.rows.len(),
        selection_rows: selection.as_ref().map(|s| s.rows.len()),
        joined: records.len(),
        dropped,
    };
    for d in &summary.dropped {
        log::debug!("dropped {} ({:?})", d.snp_id, d.reason);
    }
    Ok((SummaryDataset::new(records)?, summary))
}

/// Paths written by [`write_dataset`].
#[derive(Debug, Clone)]
pub struct DatasetFiles {
    pub exposure: PathBuf,
    pub outcome: PathBuf,
    pub selection: Option<PathBuf>,
}

/// Writes the dataset as tab-separated files using the default
/// [`ColumnSchema`]. Numbers use the shortest representation that parses
/// back to the same `f64`.
pub fn write_dataset(dataset: &SummaryDataset, dir: impl AsRef<Path>) -> Result<DatasetFiles> {
    let dir = dir.as_ref();
    let write = |name: &str, f: &dyn Fn(&SnpRecord) -> Association| -> Result<PathBuf> {
        let path = dir.join(name);
        let io_err = |source| MrError::Io {
            path: path.clone(),
            source,
        };
        let mut file = std::io::BufWriter::new(fs::File::create(&path).map_err(io_err)?);
        writeln!(file, "snp_id\tbeta\tse").map_err(io_err)?;
        for r in dataset.records() {
            let a = f(r);
            writeln!(file, "{}\t{}\t{}", r.snp_id, a.beta, a.se).map_err(io_err)?;
        }
        file.flush().map_err(io_err)?;
        Ok(path)
    };
    let exposure = write("exposure.tsv", &|r| {
        Association::new(r.beta_exposure, r.se_exposure)
    })?;
    let outcome = write("outcome.tsv", &|r| {
        Association::new(r.beta_outcome, r.se_outcome)
    })?;
    let selection = if dataset.has_selection() {
        Some(write("selection.tsv", &|r| {
            r.selection.expect("has_selection")
        })?)
    } else {
        None
    };
    Ok(DatasetFiles {
        exposure,
        outcome,
        selection,
    })
}

/// Bounds on sigma_exposure^2 / sigma_outcome^2 outside of which a warning
/// is raised.
pub const VARIANCE_RATIO_BOUNDS: (f64, f64) = (1e-6, 1e6);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub snp_id: String,
    pub field: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.warnings.is_empty()
    }
}

/// Reports per-record invariant violations and extreme variance ratios.
pub fn validate(dataset: &SummaryDataset) -> ValidationReport {
    let mut report = ValidationReport::default();
    for r in dataset.records() {
        let mut violation = |field: &'static str, message: String| {
            report.violations.push(Issue {
                snp_id: r.snp_id.clone(),
                field,
                message,
            })
        };
        let mut fields: Vec<(&'static str, f64, bool)> = vec![
            ("beta_exposure", r.beta_exposure, false),
            ("se_exposure", r.se_exposure, true),
            ("beta_outcome", r.beta_outcome, false),
            ("se_outcome", r.se_outcome, true),
        ];
        if let Some(sel) = r.selection {
            fields.push(("beta_selection", sel.beta, false));
            fields.push(("se_selection", sel.se, true));
        }
        for (field, value, is_se) in fields {
            if !value.is_finite() {
                violation(field, format!("non-finite value {value}"));
            } else if is_se && value <= 0.0 {
                violation(field, format!("standard error {value} is not positive"));
            }
        }

        let ratio = (r.se_exposure * r.se_exposure) / (r.se_outcome * r.se_outcome);
        let (lo, hi) = VARIANCE_RATIO_BOUNDS;
        if ratio.is_finite() && ratio > 0.0 && !(lo..=hi).contains(&ratio) {
            report.warnings.push(Issue {
                snp_id: r.snp_id.clone(),
                field: "variance_ratio",
                message: format!(
                    "se_exposure^2 / se_outcome^2 = {ratio:e} outside [{lo:e}, {hi:e}]"
                ),
            });
        }
    }
    report
}
