//! Versioned, human-readable model files.
//!
//! A model is a JSON document with the tree's nodes listed in build (queue)
//! order, plus the metadata needed to predict on raw rows: task, criterion,
//! feature names, and the class-name table. The encoding is lossless, so
//! `load(save(m))` reproduces the model exactly, and stable, so retraining
//! with the same inputs yields byte-identical files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::criteria::Criterion;
use crate::dataset::{Column, Dataset, Label, Task};
use crate::selection::{SplitPredicate, SplitTest};
use crate::tree::{Node, Tree};

const FORMAT: &str = "arbor-tree";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("not a model file (format {0:?})")]
    WrongFormat(String),
    #[error("unsupported model schema version {0} (supported: {VERSION})")]
    UnsupportedVersion(u32),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// A trained tree plus everything needed to apply it to raw rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub task: Task,
    pub criterion: Criterion,
    pub feature_names: Vec<String>,
    /// Class-name table for classification; empty for regression.
    pub class_names: Vec<String>,
    pub tree: Tree,
}

impl Model {
    pub fn new(tree: Tree, data: &Dataset, criterion: Criterion) -> Model {
        Model {
            task: data.task(),
            criterion,
            feature_names: data.feature_names(),
            class_names: data.class_names().to_vec(),
            tree,
        }
    }

    /// Renders a label for output: class name or numeric value.
    pub fn format_label(&self, label: &Label) -> String {
        match label {
            Label::Class(id) => self.class_names[*id].clone(),
            Label::Numeric(y) => y.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: FORMAT.to_owned(),
            version: VERSION,
            task: self.task.to_string(),
            criterion: self.criterion.name().to_owned(),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            nodes: self
                .tree
                .nodes()
                .iter()
                .enumerate()
                .map(|(id, n)| NodeRecord {
                    id,
                    depth: n.depth,
                    n: n.n_examples,
                    label: match n.label {
                        Label::Class(c) => LabelRecord::Class(c),
                        Label::Numeric(y) => LabelRecord::Value(y),
                    },
                    split: n.split.as_ref().map(|s| match &s.test {
                        SplitTest::Leq(x) => SplitRecord { feature: s.feature, test: TestRecord::Leq(*x) },
                        SplitTest::Gt(x) => SplitRecord { feature: s.feature, test: TestRecord::Gt(*x) },
                        SplitTest::Eq(t) => SplitRecord { feature: s.feature, test: TestRecord::Eq(t.clone()) },
                    }),
                    pos: n.children.map(|(p, _)| p),
                    neg: n.children.map(|(_, n)| n),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("model serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Model, ModelError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != FORMAT {
            return Err(ModelError::WrongFormat(file.format));
        }
        if file.version != VERSION {
            return Err(ModelError::UnsupportedVersion(file.version));
        }
        let task: Task = file.task.parse().map_err(ModelError::Invalid)?;
        let criterion: Criterion = file.criterion.parse().map_err(ModelError::Invalid)?;
        if file.nodes.is_empty() {
            return Err(ModelError::Invalid("model has no nodes".into()));
        }

        let n_nodes = file.nodes.len();
        let mut nodes = Vec::with_capacity(n_nodes);
        for (index, rec) in file.nodes.iter().enumerate() {
            if rec.id != index {
                return Err(ModelError::Invalid(format!(
                    "node id {} at position {index}",
                    rec.id
                )));
            }
            let label = match (&rec.label, task) {
                (LabelRecord::Class(c), Task::Classification) if *c < file.class_names.len() => {
                    Label::Class(*c)
                }
                (LabelRecord::Value(y), Task::Regression) => Label::Numeric(*y),
                _ => {
                    return Err(ModelError::Invalid(format!(
                        "node {index}: label does not match task {task}"
                    )))
                }
            };
            let split = match &rec.split {
                None => None,
                Some(s) => {
                    if s.feature >= file.feature_names.len() {
                        return Err(ModelError::Invalid(format!(
                            "node {index}: feature {} out of range",
                            s.feature
                        )));
                    }
                    Some(SplitPredicate {
                        feature: s.feature,
                        test: match &s.test {
                            TestRecord::Leq(x) => SplitTest::Leq(*x),
                            TestRecord::Gt(x) => SplitTest::Gt(*x),
                            TestRecord::Eq(t) => SplitTest::Eq(t.clone()),
                        },
                    })
                }
            };
            let children = match (rec.pos, rec.neg) {
                (Some(p), Some(n)) => Some((p, n)),
                (None, None) => None,
                _ => {
                    return Err(ModelError::Invalid(format!(
                        "node {index}: children must come in pairs"
                    )))
                }
            };
            match (&split, children) {
                (Some(_), Some((p, n))) => {
                    for child in [p, n] {
                        if child <= index || child >= n_nodes {
                            return Err(ModelError::Invalid(format!(
                                "node {index}: child id {child} out of order"
                            )));
                        }
                        if file.nodes[child].depth != rec.depth + 1 {
                            return Err(ModelError::Invalid(format!(
                                "node {child}: depth must be {}",
                                rec.depth + 1
                            )));
                        }
                    }
                }
                (None, None) => {}
                _ => {
                    return Err(ModelError::Invalid(format!(
                        "node {index}: split and children must appear together"
                    )))
                }
            }
            nodes.push(Node { depth: rec.depth, n_examples: rec.n, label, split, children });
        }
        if nodes[0].depth != 1 {
            return Err(ModelError::Invalid("root must have depth 1".into()));
        }

        Ok(Model {
            task,
            criterion,
            feature_names: file.feature_names,
            class_names: file.class_names,
            tree: Tree::from_nodes(nodes),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model, ModelError> {
        Model::from_json(&std::fs::read_to_string(path)?)
    }

    /// Maps prediction-input columns to the model's feature order by header
    /// name. Extra input columns (including a label column) are ignored.
    pub fn align_columns<'a>(&self, columns: &'a [Column]) -> Result<Vec<&'a Column>, ModelError> {
        self.feature_names
            .iter()
            .map(|name| {
                columns
                    .iter()
                    .find(|c| &c.name == name)
                    .ok_or_else(|| ModelError::Invalid(format!("input is missing feature column {name:?}")))
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    task: String,
    criterion: String,
    feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    class_names: Vec<String>,
    nodes: Vec<NodeRecord>,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: usize,
    depth: usize,
    n: usize,
    label: LabelRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<SplitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    neg: Option<usize>,
}

#[derive(Serialize, Deserialize)]
enum LabelRecord {
    #[serde(rename = "class")]
    Class(usize),
    #[serde(rename = "value")]
    Value(f64),
}

#[derive(Serialize, Deserialize)]
struct SplitRecord {
    feature: usize,
    #[serde(flatten)]
    test: TestRecord,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", content = "value", rename_all = "lowercase")]
enum TestRecord {
    Leq(f64),
    Gt(f64),
    Eq(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_fixtures::hybrid_example_dataset;
    use crate::tree::build_tree;

    fn example_model() -> Model {
        let d = hybrid_example_dataset();
        let tree = build_tree(&d, Criterion::InfoGain);
        Model::new(tree, &d, Criterion::InfoGain)
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let m = example_model();
        let text = m.to_json();
        let m2 = Model::from_json(&text).unwrap();
        assert_eq!(m, m2);
        // and the re-serialization is byte-identical
        assert_eq!(text, m2.to_json());
    }

    #[test]
    fn regression_model_round_trip() {
        let csv = "f,y\n0.5,1\n1.5,1\n2.5,2\n3.25,10\n4,10\n";
        let d = crate::dataset::parse_csv(csv.as_bytes(), &"y".into(), crate::dataset::Task::Regression)
            .unwrap();
        let m = Model::new(build_tree(&d, Criterion::Gini), &d, Criterion::Gini);
        let m2 = Model::from_json(&m.to_json()).unwrap();
        assert_eq!(m, m2);
        assert!(m2.class_names.is_empty());
        for row in 0..d.n_rows() {
            assert_eq!(
                m2.tree.predict(d.columns(), row, usize::MAX, 0),
                m.tree.predict(d.columns(), row, usize::MAX, 0)
            );
        }
    }

    #[test]
    fn rejects_foreign_and_future_files() {
        assert!(matches!(
            Model::from_json(r#"{"format":"other","version":1,"task":"classification","criterion":"gini","feature_names":[],"nodes":[]}"#),
            Err(ModelError::WrongFormat(_))
        ));
        let future = example_model().to_json().replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(Model::from_json(&future), Err(ModelError::UnsupportedVersion(99))));
        assert!(matches!(Model::from_json("not json"), Err(ModelError::Parse(_))));
    }

    #[test]
    fn rejects_inconsistent_nodes() {
        let m = example_model();
        let broken = m.to_json().replace("\"id\": 1,", "\"id\": 5,");
        assert!(matches!(Model::from_json(&broken), Err(ModelError::Invalid(_))));
    }

    #[test]
    fn align_columns_by_name() {
        let m = example_model();
        let extra = Column { name: "extra".into(), values: vec![] };
        let feature = Column { name: m.feature_names[0].clone(), values: vec![] };
        let input = [extra.clone(), feature.clone()];
        let aligned = m.align_columns(&input).unwrap();
        assert_eq!(aligned[0].name, feature.name);
        assert!(m.align_columns(std::slice::from_ref(&extra)).is_err());
    }
}
