use std::collections::HashSet;
use std::path::Path;

use super::{DataError, FeatureKind, FeatureValue, RawDataset, RawRow};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Last,
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label: LabelColumn,
    pub delimiter: u8,
    /// Cell values treated as missing; rows containing one are rejected.
    pub missing: Vec<String>,
    /// A column is continuous when every value is numeric and it has more
    /// distinct values than this.
    pub continuous_above: usize,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label: LabelColumn::Last,
            delimiter: b',',
            missing: vec![String::new(), "?".to_string()],
            continuous_above: 10,
        }
    }
}

pub fn read_csv(path: &Path, options: &CsvOptions) -> Result<RawDataset, DataError> {
    let text = std::fs::read_to_string(path)?;
    read_csv_str(&text, options)
}

/// Parses a header-first CSV. Rows with missing values are dropped and
/// counted in [`RawDataset::rejected_rows`].
pub fn read_csv_str(text: &str, options: &CsvOptions) -> Result<RawDataset, DataError> {
    let mut reader = ::csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(DataError::EmptyDataset);
    }
    let label_at = match &options.label {
        LabelColumn::Last => header.len() - 1,
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(i) => return Err(DataError::LabelColumn(i.to_string())),
        LabelColumn::Name(n) => header.iter().position(|h| h == n).ok_or_else(|| DataError::LabelColumn(n.clone()))?,
    };
    let missing: HashSet<&str> = options.missing.iter().map(String::as_str).collect();
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut rejected = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(DataError::Ragged { row: i + 1, expected: header.len(), found: record.len() });
        }
        if record.iter().any(|v| missing.contains(v)) {
            rejected += 1;
            continue;
        }
        cells.push(record.iter().map(str::to_string).collect());
    }
    if rejected > 0 {
        log::warn!("rejected {rejected} rows with missing values");
    }
    if cells.is_empty() {
        return Err(DataError::EmptyDataset);
    }

    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != label_at).collect();
    let kinds: Vec<FeatureKind> = feature_cols
        .iter()
        .map(|&c| {
            let numeric = cells.iter().all(|r| r[c].parse::<f64>().is_ok_and(f64::is_finite));
            let distinct: HashSet<&str> = cells.iter().map(|r| r[c].as_str()).collect();
            if numeric && distinct.len() > options.continuous_above {
                FeatureKind::Continuous
            } else {
                FeatureKind::Categorical
            }
        })
        .collect();
    let rows = cells
        .iter()
        .map(|r| RawRow {
            features: feature_cols
                .iter()
                .zip(&kinds)
                .map(|(&c, k)| match k {
                    FeatureKind::Continuous => FeatureValue::Number(r[c].parse().unwrap()),
                    FeatureKind::Categorical => FeatureValue::Category(r[c].clone()),
                })
                .collect(),
            label: r[label_at].clone(),
        })
        .collect();
    let names = feature_cols.iter().map(|&c| header[c].clone()).collect();
    let mut raw = RawDataset::new(names, kinds, rows)?;
    raw.rejected_rows = rejected;
    Ok(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_header_label_and_missing() {
        let text = "a,b,class\nx,1,yes\ny,?,no\nx,2,no\n";
        let raw = read_csv_str(text, &CsvOptions::default()).unwrap();
        assert_eq!(raw.feature_names, ["a", "b"]);
        assert_eq!(raw.rows.len(), 2);
        assert_eq!(raw.rejected_rows, 1);
        assert_eq!(raw.kinds, [FeatureKind::Categorical, FeatureKind::Categorical]);
        assert_eq!(raw.rows[1].label, "no");
    }

    #[test]
    fn detects_continuous_columns() {
        let mut text = String::from("v,label\n");
        for i in 0..12 {
            text.push_str(&format!("{}.5,{}\n", i, i % 2));
        }
        let raw = read_csv_str(&text, &CsvOptions::default()).unwrap();
        assert_eq!(raw.kinds, [FeatureKind::Continuous]);
        let few = read_csv_str(&text, &CsvOptions { continuous_above: 20, ..Default::default() }).unwrap();
        assert_eq!(few.kinds, [FeatureKind::Categorical]);
    }

    #[test]
    fn label_column_by_name_or_index() {
        let text = "class,a\np,x\nq,y\n";
        let opts = CsvOptions { label: LabelColumn::Name("class".into()), ..Default::default() };
        let raw = read_csv_str(text, &opts).unwrap();
        assert_eq!(raw.feature_names, ["a"]);
        assert_eq!(raw.rows[0].label, "p");
        let opts = CsvOptions { label: LabelColumn::Index(0), ..Default::default() };
        assert_eq!(read_csv_str(text, &opts).unwrap(), raw);
        let opts = CsvOptions { label: LabelColumn::Name("nope".into()), ..Default::default() };
        assert!(matches!(read_csv_str(text, &opts), Err(DataError::LabelColumn(_))));
    }

    #[test]
    fn empty_and_ragged_inputs() {
        assert!(read_csv_str("", &CsvOptions::default()).is_err());
        assert!(matches!(read_csv_str("a,b\n", &CsvOptions::default()), Err(DataError::EmptyDataset)));
        assert!(matches!(read_csv_str("a,b\n1,2\n3\n", &CsvOptions::default()), Err(DataError::Ragged { .. })));
    }
}
