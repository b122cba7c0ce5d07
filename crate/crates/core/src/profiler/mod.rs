//! Dataset profiling: per-column statistics, split audits and advice.

mod advise;
mod blocks;
mod file;
mod schema;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;

pub use advise::{advise, Suggestion, SuggestionKind, CROSS_VALIDATION_ROWS, HIGH_MISSING_FRACTION};
pub use file::{parse_profile, write_profile, ProfileFileError};
pub use schema::{parse_schema, ColumnMeta, SchemaError, SchemaMeta};

/// Cell values treated as missing (after trimming).
pub const MISSING_MARKERS: &[&str] = &["", "NA"];
/// Default total-variation threshold of [`audit_split`].
pub const DEFAULT_SPLIT_THRESHOLD: f64 = 0.05;
/// Tolerance on the total mass of a distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;
/// Tolerance of the z-score check on both mean and standard deviation.
pub const ZSCORE_TOLERANCE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    Numeric,
    Categorical,
    /// Every cell is missing.
    Unknown,
}

impl ColumnKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::Unknown => "unknown",
        }
    }

    pub fn from_keyword(word: &str) -> Option<ColumnKind> {
        match word {
            "numeric" => Some(ColumnKind::Numeric),
            "categorical" => Some(ColumnKind::Categorical),
            "unknown" => Some(ColumnKind::Unknown),
            _ => None,
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Normalization {
    UnitRange,
    Zscore,
    None,
}

impl Normalization {
    pub fn keyword(self) -> &'static str {
        match self {
            Normalization::UnitRange => "unit_range",
            Normalization::Zscore => "zscore",
            Normalization::None => "none",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Normalization> {
        match word {
            "unit_range" => Some(Normalization::UnitRange),
            "zscore" => Some(Normalization::Zscore),
            "none" => Some(Normalization::None),
            _ => None,
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnProfile {
    pub name: String,
    pub kind: ColumnKind,
    pub row_count: usize,
    pub missing_count: usize,
    pub distinct_count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub std: Option<f64>,
    /// Categorical columns only.
    pub value_counts: BTreeMap<String, usize>,
    pub entropy_bits: f64,
    pub normalization: Normalization,
    /// Whether the schema marks the column as ordered; `None` without schema.
    pub ordered: Option<bool>,
}

impl ColumnProfile {
    pub fn present(&self) -> usize {
        self.row_count - self.missing_count
    }

    pub fn missing_fraction(&self) -> f64 {
        if self.row_count == 0 {
            0.0
        } else {
            self.missing_count as f64 / self.row_count as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataProfile {
    pub source: String,
    pub row_count: usize,
    /// In header order.
    pub columns: Vec<ColumnProfile>,
    pub label_column: Option<String>,
}

impl DataProfile {
    pub fn column(&self, name: &str) -> Option<&ColumnProfile> {
        self.columns.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("file is empty")]
    Empty,
    #[error("line {line}: row has {found} fields, expected {expected}")]
    Ragged { line: u64, expected: usize, found: usize },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("column `{column}` not found in {source_name}")]
    MissingColumn { column: String, source_name: String },
    #[error("column `{0}` is not categorical")]
    NotCategorical(String),
    #[error("column `{0}` is not numeric")]
    NotNumeric(String),
    #[error("column `{0}` needs at least two values")]
    TooFewValues(String),
    #[error("schema declares `{column}` numeric but it contains {value:?}")]
    SchemaKind { column: String, value: String },
    #[error("counts are all zero")]
    ZeroCounts,
    #[error("distribution sums to {0}, expected 1")]
    NotNormalized(f64),
    #[error("probabilities must be non-negative")]
    NegativeProbability,
}

/// Per-column accumulator: counts of each distinct non-missing cell.
#[derive(Default)]
struct ColumnAcc {
    missing: usize,
    counts: HashMap<String, usize>,
}

fn is_missing(cell: &str) -> bool {
    MISSING_MARKERS.contains(&cell)
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn finish_column(name: String, acc: ColumnAcc, rows: usize, meta: Option<&ColumnMeta>) -> Result<ColumnProfile, ProfileError> {
    let present = rows - acc.missing;
    let all_numeric = acc.counts.keys().all(|c| parse_number(c).is_some());
    let kind = match meta.and_then(|m| m.kind) {
        _ if present == 0 => ColumnKind::Unknown,
        Some(ColumnKind::Numeric) if !all_numeric => {
            let mut bad: Vec<&String> = acc.counts.keys().filter(|c| parse_number(c).is_none()).collect();
            bad.sort();
            return Err(ProfileError::SchemaKind { column: name, value: bad[0].clone() });
        }
        Some(k) => k,
        None if all_numeric => ColumnKind::Numeric,
        None => ColumnKind::Categorical,
    };
    let mut col = ColumnProfile {
        name,
        kind,
        row_count: rows,
        missing_count: acc.missing,
        distinct_count: 0,
        min: None,
        max: None,
        mean: None,
        std: None,
        value_counts: BTreeMap::new(),
        entropy_bits: 0.0,
        normalization: Normalization::None,
        ordered: meta.map(|m| m.ordered),
    };
    match kind {
        ColumnKind::Unknown => {}
        ColumnKind::Categorical => {
            col.value_counts = acc.counts.into_iter().collect();
            col.distinct_count = col.value_counts.len();
            let counts: Vec<u64> = col.value_counts.values().map(|c| *c as u64).collect();
            col.entropy_bits = entropy(&counts)?;
        }
        ColumnKind::Numeric => {
            // Merge spellings of the same number ("1" and "1.0").
            let mut by_value: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
            for (cell, n) in &acc.counts {
                let v = parse_number(cell).unwrap_or_default();
                let v = if v == 0.0 { 0.0 } else { v };
                by_value.entry(v.to_bits()).or_insert((v, 0)).1 += n;
            }
            let mut values: Vec<(f64, usize)> = by_value.into_values().collect();
            values.sort_by(|a, b| a.0.total_cmp(&b.0));
            let n = present as f64;
            let mean = values.iter().map(|(v, c)| v * *c as f64).sum::<f64>() / n;
            let var = values.iter().map(|(v, c)| (v - mean).powi(2) * *c as f64).sum::<f64>() / n;
            col.min = values.first().map(|v| v.0);
            col.max = values.last().map(|v| v.0);
            col.mean = Some(mean);
            col.std = Some(var.sqrt());
            col.distinct_count = values.len();
            let counts: Vec<u64> = values.iter().map(|(_, c)| *c as u64).collect();
            col.entropy_bits = entropy(&counts)?;
            if present >= 2 {
                col.normalization = detect_normalization(&col)?;
            }
        }
    }
    Ok(col)
}

/// Profiles CSV text read from `reader` in a single pass.
pub fn profile_reader<R: Read>(reader: R, source: &str, schema: Option<&SchemaMeta>) -> Result<DataProfile, ProfileError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let header: Vec<String> = match records.next() {
        None => return Err(ProfileError::Empty),
        Some(r) => r.map_err(|e| ProfileError::Csv(e.to_string()))?.iter().map(|h| h.trim().to_string()).collect(),
    };
    if header.iter().all(|h| h.is_empty()) {
        return Err(ProfileError::Empty);
    }
    let mut accs: Vec<ColumnAcc> = header.iter().map(|_| ColumnAcc::default()).collect();
    let mut rows = 0;
    for rec in records {
        let rec = rec.map_err(|e| ProfileError::Csv(e.to_string()))?;
        if rec.len() != header.len() {
            let line = rec.position().map_or(0, |p| p.line());
            return Err(ProfileError::Ragged { line, expected: header.len(), found: rec.len() });
        }
        rows += 1;
        for (acc, cell) in accs.iter_mut().zip(rec.iter()) {
            let cell = cell.trim();
            if is_missing(cell) {
                acc.missing += 1;
            } else {
                *acc.counts.entry(cell.to_string()).or_default() += 1;
            }
        }
    }
    let columns = header
        .into_iter()
        .zip(accs)
        .map(|(name, acc)| {
            let meta = schema.and_then(|s| s.column(&name));
            finish_column(name, acc, rows, meta)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DataProfile { source: source.to_string(), row_count: rows, columns, label_column: None })
}

/// Profiles an in-memory table whose first row is the header.
pub fn profile_table(rows: &[Vec<String>], source: &str, schema: Option<&SchemaMeta>) -> Result<DataProfile, ProfileError> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    for r in rows {
        w.write_record(r).map_err(|e| ProfileError::Csv(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| ProfileError::Csv(e.to_string()))?;
    profile_reader(bytes.as_slice(), source, schema)
}

/// Shannon entropy in bits of the distribution given by `counts`.
pub fn entropy(counts: &[u64]) -> Result<f64, ProfileError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(ProfileError::ZeroCounts);
    }
    let total = total as f64;
    let h = counts
        .iter()
        .filter(|c| **c > 0)
        .map(|c| {
            let p = *c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

/// A probability distribution over category names.
pub type Distribution = BTreeMap<String, f64>;

fn check_distribution(d: &Distribution) -> Result<(), ProfileError> {
    if d.values().any(|p| *p < 0.0) {
        return Err(ProfileError::NegativeProbability);
    }
    let sum: f64 = d.values().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(ProfileError::NotNormalized(sum));
    }
    Ok(())
}

/// Total variation distance: half the L1 distance over the union of
/// categories.
pub fn distribution_distance(p: &Distribution, q: &Distribution) -> Result<f64, ProfileError> {
    check_distribution(p)?;
    check_distribution(q)?;
    let keys: std::collections::BTreeSet<&String> = p.keys().chain(q.keys()).collect();
    let l1: f64 = keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum();
    Ok((l1 / 2.0).clamp(0.0, 1.0))
}

/// Normalized value counts of a categorical column.
pub fn label_distribution(profile: &DataProfile, label: &str) -> Result<Distribution, ProfileError> {
    let col = profile.column(label).ok_or_else(|| ProfileError::MissingColumn {
        column: label.to_string(),
        source_name: profile.source.clone(),
    })?;
    if col.kind != ColumnKind::Categorical {
        return Err(ProfileError::NotCategorical(label.to_string()));
    }
    let total = col.present() as f64;
    Ok(col.value_counts.iter().map(|(k, c)| (k.clone(), *c as f64 / total)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Stratified,
    Skewed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stratified => "stratified",
            Verdict::Skewed => "skewed",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitDistance {
    pub source: String,
    pub distribution: Distribution,
    pub tv_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitAudit {
    pub label: String,
    pub threshold: f64,
    pub full: Distribution,
    pub splits: Vec<SplitDistance>,
    pub verdict: Verdict,
}

/// Compares each split's label distribution with the full dataset's.
/// The verdict is stratified iff every distance is at most `threshold`.
pub fn audit_split(full: &DataProfile, splits: &[DataProfile], label: &str, threshold: f64) -> Result<SplitAudit, ProfileError> {
    let reference = label_distribution(full, label)?;
    let mut out = Vec::with_capacity(splits.len());
    for s in splits {
        let distribution = label_distribution(s, label)?;
        let tv_distance = distribution_distance(&reference, &distribution)?;
        out.push(SplitDistance { source: s.source.clone(), distribution, tv_distance });
    }
    let verdict = if out.iter().all(|s| s.tv_distance <= threshold) { Verdict::Stratified } else { Verdict::Skewed };
    Ok(SplitAudit { label: label.to_string(), threshold, full: reference, splits: out, verdict })
}

/// Classifies how a numeric column appears to be scaled.
pub fn detect_normalization(col: &ColumnProfile) -> Result<Normalization, ProfileError> {
    if col.kind != ColumnKind::Numeric {
        return Err(ProfileError::NotNumeric(col.name.clone()));
    }
    let (Some(min), Some(max), Some(mean), Some(std)) = (col.min, col.max, col.mean, col.std) else {
        return Err(ProfileError::TooFewValues(col.name.clone()));
    };
    if col.present() < 2 {
        return Err(ProfileError::TooFewValues(col.name.clone()));
    }
    Ok(if min >= 0.0 && max <= 1.0 {
        Normalization::UnitRange
    } else if mean.abs() <= ZSCORE_TOLERANCE && (std - 1.0).abs() <= ZSCORE_TOLERANCE {
        Normalization::Zscore
    } else {
        Normalization::None
    })
}
