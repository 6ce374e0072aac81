//! Hyper-parameter tuning against a single full tree.
//!
//! Restricted predict walks make every (depth_max, split_min) configuration
//! observable on the already-built tree, so the sweep never retrains: depths
//! 1..=D first, then 201 minimum-split values from 0 to 4% of the training
//! set at the chosen depth. The winner prunes the tree, and rebuilding with
//! the same limits reproduces the pruned tree node for node.

use std::collections::VecDeque;

use thiserror::Error;

use crate::dataset::{Dataset, Label, Task};
use crate::tree::{Node, Tree};

/// Fraction of the training set covered by the minimum-split sweep.
const SPLIT_SWEEP_SPAN: f64 = 0.04;
/// Sweep step as a fraction of the training set (201 grid points with 0).
const SPLIT_SWEEP_STEP: f64 = 0.0002;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TuningConfig {
    pub depth_max: usize,
    pub split_min: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Accuracy,
    Mae,
    Rmse,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::Mae => "mae",
            MetricKind::Rmse => "rmse",
        }
    }

    fn maximize(&self) -> bool {
        matches!(self, MetricKind::Accuracy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    pub kind: MetricKind,
    pub value: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("metric {metric} does not apply to {task} labels")]
    TaskMismatch { metric: &'static str, task: Task },
    #[error("tree predicts {tree} labels but the data is {data}")]
    TreeTaskMismatch { tree: Task, data: Task },
    #[error("cannot evaluate on an empty dataset")]
    Empty,
}

/// Metric of the tree on `data` under a restricted predict walk.
pub fn evaluate(tree: &Tree, data: &Dataset, cfg: TuningConfig, kind: MetricKind) -> Result<Metric, EvalError> {
    if data.n_rows() == 0 {
        return Err(EvalError::Empty);
    }
    let matches_task = match kind {
        MetricKind::Accuracy => data.task() == Task::Classification,
        MetricKind::Mae | MetricKind::Rmse => data.task() == Task::Regression,
    };
    if !matches_task {
        return Err(EvalError::TaskMismatch { metric: kind.name(), task: data.task() });
    }
    let tree_task = match tree.root().label {
        Label::Class(_) => Task::Classification,
        Label::Numeric(_) => Task::Regression,
    };
    if tree_task != data.task() {
        return Err(EvalError::TreeTaskMismatch { tree: tree_task, data: data.task() });
    }

    let m = data.n_rows() as f64;
    let value = match kind {
        MetricKind::Accuracy => {
            let hits = (0..data.n_rows())
                .filter(|&row| {
                    tree.predict(data.columns(), row, cfg.depth_max, cfg.split_min) == data.label(row)
                })
                .count();
            hits as f64 / m
        }
        MetricKind::Mae | MetricKind::Rmse => {
            let mut acc = 0.0;
            for row in 0..data.n_rows() {
                let Label::Numeric(pred) = tree.predict(data.columns(), row, cfg.depth_max, cfg.split_min)
                else {
                    unreachable!("regression tree stores numeric labels");
                };
                let Label::Numeric(truth) = data.label(row) else { unreachable!() };
                let err = pred - truth;
                acc += if kind == MetricKind::Mae { err.abs() } else { err * err };
            }
            if kind == MetricKind::Rmse {
                (acc / m).sqrt()
            } else {
                acc / m
            }
        }
    };
    Ok(Metric { kind, value })
}

/// Outcome of the two-phase sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningResult {
    pub best: TuningConfig,
    pub metric: MetricKind,
    /// Validation metric of the winning configuration.
    pub best_metric: f64,
    /// Validation metric per depth_max, split_min fixed at 0.
    pub depth_curve: Vec<(usize, f64)>,
    /// Validation metric per split_min, depth fixed at the phase-1 winner.
    pub split_curve: Vec<(usize, f64)>,
    pub n_configs_evaluated: usize,
}

impl TuningResult {
    /// Plot-ready TSV: one row per evaluated configuration.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# best depth_max {} split_min {} ({} {})\n",
            self.best.depth_max,
            self.best.split_min,
            self.metric.name(),
            self.best_metric
        ));
        out.push_str(&format!("phase\tparam\t{}\n", self.metric.name()));
        for (d, v) in &self.depth_curve {
            out.push_str(&format!("depth_max\t{d}\t{v}\n"));
        }
        for (s, v) in &self.split_curve {
            out.push_str(&format!("split_min\t{s}\t{v}\n"));
        }
        out
    }
}

/// Sweeps depth 1..=D (ties to the smaller depth), then the 201-point
/// minimum-split grid at the winning depth (ties to the larger value, which
/// prunes harder). Only restricted predict walks run here: tuning performs
/// zero split searches.
pub fn tune(tree: &Tree, validation: &Dataset) -> TuningResult {
    let kind = match validation.task() {
        Task::Classification => MetricKind::Accuracy,
        Task::Regression => MetricKind::Rmse,
    };
    let maximize = kind.maximize();
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };

    let full_depth = tree.depth();
    let mut depth_curve = Vec::with_capacity(full_depth);
    let mut best_depth = 1;
    let mut best_value = f64::NAN;
    for depth_max in 1..=full_depth {
        let cfg = TuningConfig { depth_max, split_min: 0 };
        let metric = evaluate(tree, validation, cfg, kind).expect("kind matches task");
        depth_curve.push((depth_max, metric.value));
        if depth_max == 1 || better(metric.value, best_value) {
            best_depth = depth_max;
            best_value = metric.value;
        }
    }

    let m_train = tree.n_training_examples() as f64;
    let steps = (SPLIT_SWEEP_SPAN / SPLIT_SWEEP_STEP) as usize;
    let mut split_curve = Vec::with_capacity(steps + 1);
    let mut best_split = 0;
    let mut best_split_value = f64::NAN;
    for k in 0..=steps {
        let split_min = (k as f64 * SPLIT_SWEEP_STEP * m_train).round() as usize;
        let cfg = TuningConfig { depth_max: best_depth, split_min };
        let metric = evaluate(tree, validation, cfg, kind).expect("kind matches task");
        split_curve.push((split_min, metric.value));
        if k == 0 || better(metric.value, best_split_value) || metric.value == best_split_value {
            best_split = split_min;
            best_split_value = metric.value;
        }
    }

    TuningResult {
        best: TuningConfig { depth_max: best_depth, split_min: best_split },
        metric: kind,
        best_metric: best_split_value,
        n_configs_evaluated: depth_curve.len() + split_curve.len(),
        depth_curve,
        split_curve,
    }
}

/// Copy of the tree where every node at `depth_max`, and every node with
/// fewer than `split_min` examples, becomes a leaf; stored labels are kept.
/// Surviving nodes are renumbered in breadth-first order, matching a tree
/// built with the same limits from scratch.
pub fn prune(tree: &Tree, cfg: TuningConfig) -> Tree {
    let old = tree.nodes();
    let mut nodes: Vec<Node> = vec![leaf_copy(&old[0])];
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    let mut new_id = 0;
    while let Some(old_id) = queue.pop_front() {
        let node = &old[old_id];
        let keep_split =
            node.children.is_some() && node.depth < cfg.depth_max && node.n_examples >= cfg.split_min;
        if keep_split {
            let (pos, neg) = node.children.expect("internal node");
            let pos_new = nodes.len();
            nodes.push(leaf_copy(&old[pos]));
            let neg_new = nodes.len();
            nodes.push(leaf_copy(&old[neg]));
            nodes[new_id].split = node.split.clone();
            nodes[new_id].children = Some((pos_new, neg_new));
            queue.push_back(pos);
            queue.push_back(neg);
        }
        new_id += 1;
    }
    Tree::from_nodes(nodes)
}

fn leaf_copy(node: &Node) -> Node {
    Node {
        depth: node.depth,
        n_examples: node.n_examples,
        label: node.label,
        split: None,
        children: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::Criterion;
    use crate::dataset::{parse_csv, Labels};
    use crate::selection::split_search_calls;
    use crate::test_fixtures::hybrid_example_dataset;
    use crate::tree::{build_tree, build_tree_limited, Limits};

    #[test]
    fn prune_identity_and_root() {
        let d = hybrid_example_dataset();
        let tree = build_tree(&d, Criterion::InfoGain);
        let unchanged = prune(&tree, TuningConfig { depth_max: usize::MAX, split_min: 0 });
        assert_eq!(tree, unchanged);
        let root_only = prune(&tree, TuningConfig { depth_max: 1, split_min: 0 });
        assert_eq!(root_only.n_nodes(), 1);
        assert_eq!(root_only.root().label, tree.root().label);
    }

    #[test]
    fn prune_commutes_with_restricted_predict() {
        let d = hybrid_example_dataset();
        let tree = build_tree(&d, Criterion::InfoGain);
        for depth_max in 1..=tree.depth() + 1 {
            for split_min in [0, 1, 2, 3, 5, 8, 23] {
                let cfg = TuningConfig { depth_max, split_min };
                let pruned = prune(&tree, cfg);
                for row in 0..d.n_rows() {
                    assert_eq!(
                        pruned.predict(d.columns(), row, usize::MAX, 0),
                        tree.predict(d.columns(), row, depth_max, split_min),
                    );
                }
            }
        }
    }

    #[test]
    fn prune_matches_limited_build() {
        let d = hybrid_example_dataset();
        let tree = build_tree(&d, Criterion::InfoGain);
        for cfg in [
            TuningConfig { depth_max: 2, split_min: 0 },
            TuningConfig { depth_max: 3, split_min: 4 },
            TuningConfig { depth_max: usize::MAX, split_min: 6 },
        ] {
            let pruned = prune(&tree, cfg);
            let rebuilt = build_tree_limited(&d, Criterion::InfoGain, Limits::new(cfg.depth_max, cfg.split_min));
            assert_eq!(pruned, rebuilt);
        }
    }

    #[test]
    fn pruned_node_count_is_monotone() {
        let d = hybrid_example_dataset();
        let tree = build_tree(&d, Criterion::InfoGain);
        let mut last = usize::MAX;
        for depth_max in (1..=tree.depth()).rev() {
            let n = prune(&tree, TuningConfig { depth_max, split_min: 0 }).n_nodes();
            assert!(n <= last);
            last = n;
        }
        last = usize::MAX;
        for split_min in [0, 1, 2, 4, 8, 16, 32] {
            let n = prune(&tree, TuningConfig { depth_max: usize::MAX, split_min }).n_nodes();
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn evaluate_trivial_metrics() {
        let csv = "f,y\n1,5\n2,3\n";
        let d = parse_csv(csv.as_bytes(), &"y".into(), Task::Regression).unwrap();
        let tree = build_tree(&d, Criterion::InfoGain);
        let cfg = TuningConfig { depth_max: usize::MAX, split_min: 0 };
        assert_eq!(evaluate(&tree, &d, cfg, MetricKind::Mae).unwrap().value, 0.0);
        assert_eq!(evaluate(&tree, &d, cfg, MetricKind::Rmse).unwrap().value, 0.0);

        // constant prediction c on labels {c-1, c+1}
        let root = TuningConfig { depth_max: 1, split_min: 0 };
        let csv = "f,y\n1,3\n2,5\n";
        let d = parse_csv(csv.as_bytes(), &"y".into(), Task::Regression).unwrap();
        let tree = build_tree(&d, Criterion::InfoGain);
        assert_eq!(tree.root().label, Label::Numeric(4.0));
        assert_eq!(evaluate(&tree, &d, root, MetricKind::Mae).unwrap().value, 1.0);
        assert_eq!(evaluate(&tree, &d, root, MetricKind::Rmse).unwrap().value, 1.0);

        assert_eq!(
            evaluate(&tree, &d, root, MetricKind::Accuracy),
            Err(EvalError::TaskMismatch { metric: "accuracy", task: Task::Regression })
        );
    }

    #[test]
    fn tune_counts_and_depth_one_tree() {
        let csv = "f,label\n1,a\n2,a\n3,a\n4,a\n";
        let d = parse_csv(csv.as_bytes(), &"label".into(), Task::Classification).unwrap();
        let tree = build_tree(&d, Criterion::InfoGain);
        assert_eq!(tree.depth(), 1);
        let result = tune(&tree, &d);
        assert_eq!(result.n_configs_evaluated, 1 + 201);
        assert_eq!(result.best.depth_max, 1);
        assert_eq!(result.depth_curve.len(), 1);
        assert_eq!(result.split_curve.len(), 201);
    }

    #[test]
    fn tune_never_searches_splits() {
        let d = hybrid_example_dataset();
        let tree = build_tree(&d, Criterion::InfoGain);
        let before = split_search_calls();
        let result = tune(&tree, &d);
        assert_eq!(split_search_calls(), before);
        assert_eq!(result.n_configs_evaluated, tree.depth() + 201);
    }

    #[test]
    fn tune_prefers_simpler_models_on_ties() {
        // a pure dataset scores 1.0 at every depth: expect depth 1 and the
        // largest swept split_min
        let ids = vec![0usize; 40];
        let names = vec!["a".into()];
        let values: Vec<crate::dataset::Value> =
            (0..40).map(|i| crate::dataset::Value::Numeric(i as f64)).collect();
        let d = Dataset::new(
            vec![crate::dataset::Column { name: "f".into(), values }],
            Labels::Classes { ids, names },
            "label",
        );
        let tree = build_tree(&d, Criterion::InfoGain);
        let result = tune(&tree, &d);
        assert_eq!(result.best.depth_max, 1);
        let max_swept = result.split_curve.iter().map(|&(s, _)| s).max().unwrap();
        assert_eq!(result.best.split_min, max_swept);
        assert_eq!(result.best_metric, 1.0);
    }
}
