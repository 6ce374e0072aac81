//! Columnar tabular data with hybrid cells (numeric, categorical, or missing),
//! CSV ingestion, and deterministic train/validation/test partitioning.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Cell markers treated as missing on ingestion, besides parsed NaN.
const MISSING_MARKERS: [&str; 3] = ["", "?", "NA"];

/// A single cell of a hybrid feature.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    /// Finite 64-bit float. Never NaN; `-0.0` is normalized to `0.0`.
    Numeric(f64),
    /// Token compared by exact byte equality.
    Categorical(String),
    Missing,
}

impl Value {
    /// Parses a raw cell the same way for CSV ingestion and row prediction:
    /// number first, categorical on failure, missing markers and NaN untouched
    /// as `Missing`. Rejects non-finite numerics.
    pub fn parse_cell(cell: &str) -> Result<Value, NonFiniteCell> {
        if MISSING_MARKERS.contains(&cell) {
            return Ok(Value::Missing);
        }
        match cell.parse::<f64>() {
            Ok(v) if v.is_nan() => Ok(Value::Missing),
            Ok(v) if v.is_infinite() => Err(NonFiniteCell),
            // -0.0 and 0.0 compare equal but have distinct bits; keep one
            // representative so hashing by bits agrees with numeric equality
            Ok(v) => Ok(Value::Numeric(if v == 0.0 { 0.0 } else { v })),
            Err(_) => Ok(Value::Categorical(cell.to_owned())),
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Numeric(v) => write!(f, "{v}"),
            Value::Categorical(t) => f.write_str(t),
            Value::Missing => Ok(()),
        }
    }
}

/// A numeric cell would have been infinite.
#[derive(Debug, Error)]
#[error("non-finite numeric value")]
pub struct NonFiniteCell;

/// One feature column; all columns of a dataset have equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<Value>,
}

/// Prediction target of a single example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Label {
    /// Index into the dataset's class-name table.
    Class(usize),
    Numeric(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Classification,
    Regression,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Classification => f.write_str("classification"),
            Task::Regression => f.write_str("regression"),
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "classification" => Ok(Task::Classification),
            "regression" => Ok(Task::Regression),
            other => Err(format!("unknown task {other:?} (expected classification or regression)")),
        }
    }
}

/// Homogeneous label storage: every example is a class id, or every example
/// is a numeric target. Labels are never missing.
#[derive(Debug, Clone, PartialEq)]
pub enum Labels {
    Classes { ids: Vec<usize>, names: Vec<String> },
    Numeric(Vec<f64>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Classes { ids, .. } => ids.len(),
            Labels::Numeric(ys) => ys.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Immutable columnar dataset: K feature columns over M examples plus labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    labels: Labels,
    label_name: String,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, labels: Labels, label_name: impl Into<String>) -> Dataset {
        let ds = Dataset { columns, labels, label_name: label_name.into() };
        debug_assert!(ds.columns.iter().all(|c| c.values.len() == ds.labels.len()));
        ds
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn task(&self) -> Task {
        match self.labels {
            Labels::Classes { .. } => Task::Classification,
            Labels::Numeric(_) => Task::Regression,
        }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn value(&self, row: usize, feature: usize) -> &Value {
        &self.columns[feature].values[row]
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn label(&self, row: usize) -> Label {
        match &self.labels {
            Labels::Classes { ids, .. } => Label::Class(ids[row]),
            Labels::Numeric(ys) => Label::Numeric(ys[row]),
        }
    }

    /// Class-name table; empty for regression.
    pub fn class_names(&self) -> &[String] {
        match &self.labels {
            Labels::Classes { names, .. } => names,
            Labels::Numeric(_) => &[],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.class_names().len()
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    /// Row-gathered copy, in the order given.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                values: rows.iter().map(|&r| c.values[r].clone()).collect(),
            })
            .collect();
        let labels = match &self.labels {
            Labels::Classes { ids, names } => Labels::Classes {
                ids: rows.iter().map(|&r| ids[r]).collect(),
                names: names.clone(),
            },
            Labels::Numeric(ys) => Labels::Numeric(rows.iter().map(|&r| ys[r]).collect()),
        };
        Dataset { columns, labels, label_name: self.label_name.clone() }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("input has no data rows")]
    Empty,
    #[error("input has no feature columns")]
    NoFeatures,
    #[error("label column {0:?} not found in header")]
    LabelColumnNotFound(String),
    #[error("label column name {0:?} matches more than one header field")]
    AmbiguousLabelColumn(String),
    #[error("row {row}: missing label")]
    MissingLabel { row: usize },
    #[error("row {row}: label {cell:?} is not numeric (regression task)")]
    NonNumericLabel { row: usize, cell: String },
    #[error("row {row}, column {column:?}: non-finite numeric value")]
    NonFinite { row: usize, column: String },
}

/// The label column of a CSV input, by header name or zero-based index.
#[derive(Debug, Clone)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl From<&str> for LabelColumn {
    fn from(s: &str) -> LabelColumn {
        LabelColumn::Name(s.to_owned())
    }
}

fn resolve_label_column(headers: &[String], selector: &LabelColumn) -> Result<usize, IngestError> {
    match selector {
        LabelColumn::Index(i) if *i < headers.len() => Ok(*i),
        LabelColumn::Index(i) => Err(IngestError::LabelColumnNotFound(i.to_string())),
        LabelColumn::Name(name) => {
            let mut found = headers.iter().enumerate().filter(|(_, h)| *h == name);
            match (found.next(), found.next()) {
                (Some((i, _)), None) => Ok(i),
                (Some(_), Some(_)) => Err(IngestError::AmbiguousLabelColumn(name.clone())),
                // fall back to a numeric index for headerless-style selectors
                (None, _) => match name.parse::<usize>() {
                    Ok(i) if i < headers.len() => Ok(i),
                    _ => Err(IngestError::LabelColumnNotFound(name.clone())),
                },
            }
        }
    }
}

/// Parses RFC-4180-style CSV (header row mandatory) into a columnar dataset.
///
/// Every non-label cell is read as a number first and becomes categorical if
/// the conversion fails; empty cells, `?`, `NA`, and NaN stay missing. The
/// label column is parsed according to `task` and must be present in every
/// row.
pub fn parse_csv(input: impl Read, label: &LabelColumn, task: Task) -> Result<Dataset, IngestError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(input);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let label_idx = resolve_label_column(&headers, label)?;
    if headers.len() < 2 {
        return Err(IngestError::NoFeatures);
    }

    let mut columns: Vec<Column> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, name)| Column { name: name.clone(), values: Vec::new() })
        .collect();

    let mut class_ids: Vec<usize> = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    let mut numeric_labels: Vec<f64> = Vec::new();

    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let label_cell = &record[label_idx];
        if MISSING_MARKERS.contains(&label_cell) {
            return Err(IngestError::MissingLabel { row });
        }
        match task {
            Task::Classification => {
                let id = *class_index.entry(label_cell.to_owned()).or_insert_with(|| {
                    class_names.push(label_cell.to_owned());
                    class_names.len() - 1
                });
                class_ids.push(id);
            }
            Task::Regression => {
                let y: f64 = label_cell.parse().map_err(|_| IngestError::NonNumericLabel {
                    row,
                    cell: label_cell.to_owned(),
                })?;
                if y.is_nan() {
                    return Err(IngestError::MissingLabel { row });
                }
                if y.is_infinite() {
                    return Err(IngestError::NonFinite { row, column: headers[label_idx].clone() });
                }
                numeric_labels.push(y);
            }
        }

        let mut col = 0;
        for (i, cell) in record.iter().enumerate() {
            if i == label_idx {
                continue;
            }
            let value = Value::parse_cell(cell).map_err(|_| IngestError::NonFinite {
                row,
                column: headers[i].clone(),
            })?;
            columns[col].values.push(value);
            col += 1;
        }
    }

    let labels = match task {
        Task::Classification => Labels::Classes { ids: class_ids, names: class_names },
        Task::Regression => Labels::Numeric(numeric_labels),
    };
    if labels.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(Dataset::new(columns, labels, headers[label_idx].clone()))
}

/// Parses feature-only CSV rows (no label column) for prediction input.
/// Unlike [`parse_csv`], zero data rows is fine.
pub fn parse_feature_csv(input: impl Read) -> Result<Vec<Column>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(input);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let mut columns: Vec<Column> = headers
        .iter()
        .map(|name| Column { name: name.clone(), values: Vec::new() })
        .collect();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        for (i, cell) in record.iter().enumerate() {
            let value = Value::parse_cell(cell).map_err(|_| IngestError::NonFinite {
                row,
                column: headers[i].clone(),
            })?;
            columns[i].values.push(value);
        }
    }
    Ok(columns)
}

/// Writes the dataset back to CSV with the label in the last column.
/// Re-parsing the output with the same task yields an identical dataset.
pub fn to_csv_string(d: &Dataset) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = d.columns.iter().map(|c| c.name.as_str()).collect();
    header.push(d.label_name());
    w.write_record(&header).expect("write to vec");
    for row in 0..d.n_rows() {
        let mut record: Vec<String> = d.columns.iter().map(|c| c.values[row].to_string()).collect();
        record.push(match d.label(row) {
            Label::Class(id) => d.class_names()[id].clone(),
            Label::Numeric(y) => y.to_string(),
        });
        w.write_record(&record).expect("write to vec");
    }
    String::from_utf8(w.into_inner().expect("flush vec")).expect("csv output is utf-8")
}

#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("fractions must be positive and sum to 1")]
    BadFractions,
    #[error("partitioning would leave an empty subset")]
    EmptyPartition,
}

/// Deterministically shuffles rows by `seed` and slices them into
/// train/validation/test subsets of the given fractions.
pub fn split_dataset(
    d: &Dataset,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset), SplitError> {
    let (ft, fv, fe) = fractions;
    if !(ft > 0.0 && fv > 0.0 && fe > 0.0) || (ft + fv + fe - 1.0).abs() > 1e-9 {
        return Err(SplitError::BadFractions);
    }
    let m = d.n_rows();
    let n_train = (ft * m as f64).round() as usize;
    let n_valid = (fv * m as f64).round() as usize;
    if n_train == 0 || n_valid == 0 || n_train + n_valid >= m {
        return Err(SplitError::EmptyPartition);
    }
    let n_test = m - n_train - n_valid;

    let mut order: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let train = d.subset(&order[..n_train]);
    let valid = d.subset(&order[n_train..n_train + n_valid]);
    let test = d.subset(&order[n_train + n_valid..]);
    debug_assert_eq!(test.n_rows(), n_test);
    Ok((train, valid, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_dataset(text: &str) -> Dataset {
        parse_csv(text.as_bytes(), &LabelColumn::Name("label".into()), Task::Classification).unwrap()
    }

    #[test]
    fn cell_parsing_rules() {
        assert_eq!(Value::parse_cell("3.5").unwrap(), Value::Numeric(3.5));
        assert_eq!(Value::parse_cell("cat").unwrap(), Value::Categorical("cat".into()));
        assert_eq!(Value::parse_cell("").unwrap(), Value::Missing);
        assert_eq!(Value::parse_cell("?").unwrap(), Value::Missing);
        assert_eq!(Value::parse_cell("NA").unwrap(), Value::Missing);
        assert_eq!(Value::parse_cell("NaN").unwrap(), Value::Missing);
        assert_eq!(Value::parse_cell("nan").unwrap(), Value::Missing);
        assert!(Value::parse_cell("inf").is_err());
        assert!(Value::parse_cell("-inf").is_err());
        // na is not a missing marker, and byte equality is case-sensitive
        assert_eq!(Value::parse_cell("na").unwrap(), Value::Categorical("na".into()));
        assert_eq!(Value::parse_cell("-0.0").unwrap(), Value::Numeric(0.0));
        match Value::parse_cell("-0.0").unwrap() {
            Value::Numeric(v) => assert_eq!(v.to_bits(), 0.0f64.to_bits()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn parse_basic_classification() {
        let d = csv_dataset("f1,f2,label\n1.5,red,yes\n2,blue,no\nx,?,yes\n");
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.task(), Task::Classification);
        assert_eq!(d.class_names(), ["yes", "no"]);
        assert_eq!(d.value(0, 0), &Value::Numeric(1.5));
        assert_eq!(d.value(2, 0), &Value::Categorical("x".into()));
        assert_eq!(d.value(2, 1), &Value::Missing);
        assert_eq!(d.label(2), Label::Class(0));
    }

    #[test]
    fn parse_regression_labels() {
        let text = "f,label\n1,0.5\n2,1.5\n";
        let d = parse_csv(text.as_bytes(), &"label".into(), Task::Regression).unwrap();
        assert_eq!(d.labels(), &Labels::Numeric(vec![0.5, 1.5]));

        let bad = "f,label\n1,high\n";
        let err = parse_csv(bad.as_bytes(), &"label".into(), Task::Regression).unwrap_err();
        assert!(matches!(err, IngestError::NonNumericLabel { row: 0, .. }));
    }

    #[test]
    fn parse_rejects_bad_input() {
        let ragged = "a,b,label\n1,2,x\n1,x\n";
        assert!(matches!(
            parse_csv(ragged.as_bytes(), &"label".into(), Task::Classification),
            Err(IngestError::Csv(_))
        ));
        let missing_label = "a,label\n1,\n";
        assert!(matches!(
            parse_csv(missing_label.as_bytes(), &"label".into(), Task::Classification),
            Err(IngestError::MissingLabel { row: 0 })
        ));
        let empty = "a,label\n";
        assert!(matches!(
            parse_csv(empty.as_bytes(), &"label".into(), Task::Classification),
            Err(IngestError::Empty)
        ));
        let infinite = "a,label\ninf,x\n";
        assert!(matches!(
            parse_csv(infinite.as_bytes(), &"label".into(), Task::Classification),
            Err(IngestError::NonFinite { .. })
        ));
        let no_features = "label\nx\n";
        assert!(matches!(
            parse_csv(no_features.as_bytes(), &"label".into(), Task::Classification),
            Err(IngestError::NoFeatures)
        ));
    }

    #[test]
    fn label_column_by_index_or_name() {
        let text = "label,f\nx,1\ny,2\n";
        let by_name = parse_csv(text.as_bytes(), &"label".into(), Task::Classification).unwrap();
        let by_index = parse_csv(text.as_bytes(), &LabelColumn::Index(0), Task::Classification).unwrap();
        assert_eq!(by_name, by_index);
        assert!(matches!(
            parse_csv(text.as_bytes(), &"nope".into(), Task::Classification),
            Err(IngestError::LabelColumnNotFound(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let text = "f1,f2,label\n1.5,red,yes\n2,\"a,b\",no\n0.25,?,yes\n-3e-4,x y,no\n";
        let d = csv_dataset(text);
        let d2 = csv_dataset(&to_csv_string(&d));
        assert_eq!(d, d2);
    }

    proptest::proptest! {
        // parse -> serialize -> parse is the identity on any parsed dataset
        #[test]
        fn csv_round_trip_holds_for_arbitrary_cells(
            cells in proptest::collection::vec(
                proptest::collection::vec(
                    proptest::prop_oneof![
                        proptest::prelude::Just("1.5".to_string()),
                        proptest::prelude::Just("-17".to_string()),
                        proptest::prelude::Just("6.02e23".to_string()),
                        proptest::prelude::Just("?".to_string()),
                        proptest::prelude::Just("NA".to_string()),
                        proptest::prelude::Just(String::new()),
                        "[a-z ,\"]{1,8}",
                    ],
                    3,
                ),
                1..20,
            ),
        ) {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["f1", "f2", "label"]).unwrap();
            let mut rows = 0;
            for row in &cells {
                // missing labels are rejected at ingestion; give those rows
                // a fixed class instead
                let label = if MISSING_MARKERS.contains(&row[2].as_str()) { "k" } else { &row[2] };
                w.write_record([&row[0], &row[1], &label.to_string()]).unwrap();
                rows += 1;
            }
            let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
            let d = match parse_csv(text.as_bytes(), &"label".into(), Task::Classification) {
                Ok(d) => d,
                // tokens that happen to parse as non-finite numbers are rejected
                Err(IngestError::NonFinite { .. }) => return Ok(()),
                Err(e) => panic!("unexpected ingest error: {e}"),
            };
            proptest::prop_assert_eq!(d.n_rows(), rows);
            let d2 = parse_csv(to_csv_string(&d).as_bytes(), &"label".into(), Task::Classification).unwrap();
            proptest::prop_assert_eq!(&d, &d2);
        }
    }

    #[test]
    fn split_sizes_and_determinism() {
        let values: Vec<Value> = (0..10).map(|i| Value::Numeric(i as f64)).collect();
        let labels = Labels::Numeric((0..10).map(|i| i as f64).collect());
        let d = Dataset::new(vec![Column { name: "f".into(), values }], labels, "y");

        let (tr, va, te) = split_dataset(&d, (0.8, 0.1, 0.1), 7).unwrap();
        assert_eq!((tr.n_rows(), va.n_rows(), te.n_rows()), (8, 1, 1));

        let (tr2, va2, te2) = split_dataset(&d, (0.8, 0.1, 0.1), 7).unwrap();
        assert_eq!((tr, va, te), (tr2, va2, te2));
    }

    #[test]
    fn split_preserves_row_multiset() {
        let values: Vec<Value> = (0..23).map(|i| Value::Numeric((i % 5) as f64)).collect();
        let labels = Labels::Numeric((0..23).map(|i| (i % 3) as f64).collect());
        let d = Dataset::new(vec![Column { name: "f".into(), values }], labels, "y");
        let (tr, va, te) = split_dataset(&d, (0.6, 0.2, 0.2), 42).unwrap();

        let mut rows: Vec<(String, String)> = Vec::new();
        for part in [&tr, &va, &te] {
            for r in 0..part.n_rows() {
                rows.push((part.value(r, 0).to_string(), format!("{:?}", part.label(r))));
            }
        }
        rows.sort();
        let mut expected: Vec<(String, String)> = (0..23)
            .map(|r| (d.value(r, 0).to_string(), format!("{:?}", d.label(r))))
            .collect();
        expected.sort();
        assert_eq!(rows, expected);
    }

    #[test]
    fn split_large_exact_sizes() {
        let values: Vec<Value> = (0..100_000).map(|i| Value::Numeric(i as f64)).collect();
        let labels = Labels::Numeric(vec![0.0; 100_000]);
        let d = Dataset::new(vec![Column { name: "f".into(), values }], labels, "y");
        let (tr, va, te) = split_dataset(&d, (0.8, 0.1, 0.1), 1).unwrap();
        assert_eq!((tr.n_rows(), va.n_rows(), te.n_rows()), (80_000, 10_000, 10_000));
    }

    #[test]
    fn split_rejects_bad_inputs() {
        let values: Vec<Value> = (0..3).map(|i| Value::Numeric(i as f64)).collect();
        let labels = Labels::Numeric(vec![0.0; 3]);
        let d = Dataset::new(vec![Column { name: "f".into(), values }], labels, "y");
        assert_eq!(split_dataset(&d, (0.5, 0.2, 0.2), 0).unwrap_err(), SplitError::BadFractions);
        assert_eq!(split_dataset(&d, (0.9, 0.05, 0.05), 0).unwrap_err(), SplitError::EmptyPartition);
    }
}
