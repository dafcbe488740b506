//! Dataset ingestion: raw tabular rows, quantization of continuous features,
//! de-duplication and conversion into an [`Instance`].

mod csv;
mod random;
mod synthetic;

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::instance::{CoreError, Instance, ObjectRecord, TestSpec};

pub use self::csv::{read_csv, read_csv_str, CsvOptions, LabelColumn};
pub use random::{random_instance, RandomSpec};
pub use synthetic::{gen_fig1, gen_synthetic_outlier};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("dataset has no usable rows")]
    EmptyDataset,
    #[error("row {row} has {found} fields, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("label column {0} not found")]
    LabelColumn(String),
    #[error("quantization needs at least 2 levels, got {0}")]
    InvalidLevels(usize),
    #[error("cost vector has {found} entries for {expected} features")]
    CostLength { expected: usize, found: usize },
    #[error("feature {0} is continuous; quantize before conversion")]
    Unquantized(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone)]
pub enum FeatureValue {
    Number(f64),
    Category(String),
}

impl PartialEq for FeatureValue {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (FeatureValue::Number(a), FeatureValue::Number(b)) => a.to_bits() == b.to_bits(),
            (FeatureValue::Category(a), FeatureValue::Category(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for FeatureValue {}

impl Hash for FeatureValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            FeatureValue::Number(v) => {
                0u8.hash(state);
                v.to_bits().hash(state);
            }
            FeatureValue::Category(s) => {
                1u8.hash(state);
                s.hash(state);
            }
        }
    }
}

impl FeatureValue {
    fn render(&self) -> String {
        match self {
            FeatureValue::Number(v) => v.to_string(),
            FeatureValue::Category(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRow {
    pub features: Vec<FeatureValue>,
    pub label: String,
}

/// Rectangular rows of feature values with string labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDataset {
    pub feature_names: Vec<String>,
    pub kinds: Vec<FeatureKind>,
    pub rows: Vec<RawRow>,
    /// Rows dropped at load time for missing values.
    pub rejected_rows: usize,
}

impl RawDataset {
    pub fn new(feature_names: Vec<String>, kinds: Vec<FeatureKind>, rows: Vec<RawRow>) -> Result<Self, DataError> {
        let expected = feature_names.len();
        if kinds.len() != expected {
            return Err(DataError::Ragged { row: 0, expected, found: kinds.len() });
        }
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.features.len() != expected) {
            return Err(DataError::Ragged { row, expected, found: r.features.len() });
        }
        Ok(RawDataset { feature_names, kinds, rows, rejected_rows: 0 })
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Distinct labels in class-id order.
    pub fn class_labels(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.rows.iter().map(|r| r.label.as_str()).collect();
        let mut labels: Vec<String> = set.into_iter().map(str::to_string).collect();
        sort_values(&mut labels);
        labels
    }

    pub fn label_distribution(&self) -> Vec<usize> {
        let labels = self.class_labels();
        let index = index_of(&labels);
        let mut counts = vec![0; labels.len()];
        for r in &self.rows {
            counts[index[r.label.as_str()]] += 1;
        }
        counts
    }
}

/// Numeric order when every value parses as a number, lexicographic
/// otherwise.
fn sort_values(values: &mut [String]) {
    let numeric: Option<Vec<f64>> = values.iter().map(|v| v.trim().parse::<f64>().ok()).collect();
    if numeric.is_some_and(|n| n.iter().all(|x| x.is_finite())) {
        values.sort_by(|a, b| {
            let (x, y): (f64, f64) = (a.trim().parse().unwrap(), b.trim().parse().unwrap());
            x.partial_cmp(&y).unwrap_or(Ordering::Equal).then_with(|| a.cmp(b))
        });
    } else {
        values.sort();
    }
}

fn index_of(values: &[String]) -> HashMap<&str, usize> {
    values.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantizationSpec {
    pub levels: usize,
}

impl Default for QuantizationSpec {
    fn default() -> Self {
        QuantizationSpec { levels: 10 }
    }
}

/// Maps each continuous value to `floor(levels·(v−min)/(max−min))`, clamped
/// to `[0, levels−1]`. Constant features map to level 0. Categorical
/// features pass through.
pub fn quantize(raw: &RawDataset, spec: QuantizationSpec) -> Result<RawDataset, DataError> {
    if spec.levels < 2 {
        return Err(DataError::InvalidLevels(spec.levels));
    }
    let mut out = raw.clone();
    for (f, kind) in raw.kinds.iter().enumerate() {
        if *kind != FeatureKind::Continuous {
            continue;
        }
        let values: Vec<f64> = raw
            .rows
            .iter()
            .map(|r| match &r.features[f] {
                FeatureValue::Number(v) => *v,
                FeatureValue::Category(s) => s.trim().parse().unwrap_or(f64::NAN),
            })
            .collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (row, v) in out.rows.iter_mut().zip(values) {
            row.features[f] = FeatureValue::Category(quantize_value(v, min, max, spec.levels).to_string());
        }
        out.kinds[f] = FeatureKind::Categorical;
    }
    Ok(out)
}

pub fn quantize_value(v: f64, min: f64, max: f64, levels: usize) -> usize {
    if max.partial_cmp(&min) != Some(std::cmp::Ordering::Greater) || !v.is_finite() {
        return 0;
    }
    let level = (levels as f64 * (v - min) / (max - min)).floor();
    level.clamp(0.0, (levels - 1) as f64) as usize
}

/// One row per distinct feature vector, in order of first occurrence. The
/// surviving label is the most common one in the group; ties go to the
/// lowest label id.
pub fn deduplicate(raw: &RawDataset) -> RawDataset {
    let labels = raw.class_labels();
    let label_id = index_of(&labels);
    let mut groups: HashMap<&[FeatureValue], usize> = HashMap::new();
    let mut order: Vec<(&[FeatureValue], Vec<usize>)> = Vec::new();
    for r in &raw.rows {
        let slot = *groups.entry(r.features.as_slice()).or_insert_with(|| {
            order.push((r.features.as_slice(), vec![0; labels.len()]));
            order.len() - 1
        });
        order[slot].1[label_id[r.label.as_str()]] += 1;
    }
    let rows = order
        .into_iter()
        .map(|(features, counts)| {
            let mut best = 0;
            for (i, &c) in counts.iter().enumerate() {
                if c > counts[best] {
                    best = i;
                }
            }
            RawRow { features: features.to_vec(), label: labels[best].clone() }
        })
        .collect();
    RawDataset { rows, ..raw.clone() }
}

/// Converts an all-categorical dataset into an instance: one test per
/// feature with dense outcome codes, one class per distinct label. Features
/// with a single observed value are dropped. `costs` gives one cost per
/// input feature; unit costs otherwise.
pub fn to_instance(raw: &RawDataset, costs: Option<&[u64]>) -> Result<Instance, DataError> {
    if raw.rows.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    if let Some(c) = costs {
        if c.len() != raw.num_features() {
            return Err(DataError::CostLength { expected: raw.num_features(), found: c.len() });
        }
    }
    let labels = raw.class_labels();
    let label_id = index_of(&labels);
    let mut tests = Vec::new();
    let mut columns: Vec<Vec<usize>> = Vec::new();
    for f in 0..raw.num_features() {
        if raw.kinds[f] == FeatureKind::Continuous {
            return Err(DataError::Unquantized(raw.feature_names[f].clone()));
        }
        let rendered: Vec<String> = raw.rows.iter().map(|r| r.features[f].render()).collect();
        let set: BTreeSet<&str> = rendered.iter().map(String::as_str).collect();
        let mut distinct: Vec<String> = set.into_iter().map(str::to_string).collect();
        if distinct.len() < 2 {
            log::warn!("dropping feature `{}`: a single observed value cannot split", raw.feature_names[f]);
            continue;
        }
        sort_values(&mut distinct);
        let code = index_of(&distinct);
        columns.push(rendered.iter().map(|v| code[v.as_str()]).collect());
        let cost = costs.map_or(1, |c| c[f]);
        tests.push(TestSpec::new(tests.len(), raw.feature_names[f].clone(), distinct.len(), cost));
    }
    let objects = raw
        .rows
        .iter()
        .enumerate()
        .map(|(id, r)| ObjectRecord {
            id,
            class_id: label_id[r.label.as_str()],
            outcomes: columns.iter().map(|c| c[id]).collect(),
        })
        .collect();
    Ok(Instance::new(objects, labels.len(), tests, 1)?)
}

/// Quantize, de-duplicate and convert in one step.
pub fn prepare(raw: &RawDataset, spec: QuantizationSpec, costs: Option<&[u64]>) -> Result<Instance, DataError> {
    let dedup = deduplicate(&quantize(raw, spec)?);
    if dedup.rows.len() < raw.rows.len() {
        log::info!("merged {} duplicate rows", raw.rows.len() - dedup.rows.len());
    }
    to_instance(&dedup, costs)
}
