//! Queue-driven CART-style tree builder.
//!
//! Numeric values of every feature are sorted once at the root; children
//! inherit their lists by presence filtering, never re-sorting, so the sort
//! cost amortizes across the whole build. Regression nodes binarize their
//! labels at the best sum-of-squared-errors threshold and reuse the two-class
//! classification selector.


use crate::bits::{BitsMap, BitsSet};
use crate::criteria::{sse_partition_score, Criterion};
use crate::dataset::{Column, Dataset, Label, Labels};
use crate::selection::{
    best_split_over_features, sorted_unique_numerics, SplitPredicate,
};

/// One node of the tree, addressed by its breadth-first id.
/// `split` and `children` are both present (internal node) or both absent
/// (leaf); every node stores a label so restricted walks can stop anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// Root is depth 1.
    pub depth: usize,
    pub n_examples: usize,
    pub label: Label,
    pub split: Option<SplitPredicate>,
    /// (positive child id, negative child id).
    pub children: Option<(usize, usize)>,
}

/// Binary decision tree stored as a breadth-first arena: node 0 is the root
/// and children always carry larger ids than their parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub(crate) fn from_nodes(nodes: Vec<Node>) -> Tree {
        Tree { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    /// Number of training examples that reached the root.
    pub fn n_training_examples(&self) -> usize {
        self.nodes[0].n_examples
    }

    /// Walks at most `depth_max - 1` edges from the root, stopping early at
    /// leaves and at nodes holding fewer than `split_min` training examples,
    /// and returns the stored label of the node it stops at. Pass
    /// `usize::MAX` and `0` for an unrestricted walk.
    pub fn predict(&self, columns: &[Column], row: usize, depth_max: usize, split_min: usize) -> Label {
        let mut node = &self.nodes[0];
        let mut edges = 1;
        while edges < depth_max {
            if node.n_examples < split_min {
                break;
            }
            let (Some(split), Some((pos, neg))) = (&node.split, node.children) else {
                break;
            };
            let value = &columns[split.feature].values[row];
            node = if split.evaluate(value) { &self.nodes[pos] } else { &self.nodes[neg] };
            edges += 1;
        }
        node.label
    }
}

/// Growth limits enforced during construction; the default grows the tree
/// until every node is pure or inseparable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// A node at this depth becomes a leaf (root is depth 1).
    pub depth_max: usize,
    /// A node with fewer examples than this becomes a leaf.
    pub split_min: usize,
}

impl Limits {
    pub const NONE: Limits = Limits { depth_max: usize::MAX, split_min: 0 };

    pub fn new(depth_max: usize, split_min: usize) -> Limits {
        Limits { depth_max, split_min }
    }
}

/// Per-node build record kept by [`build_tree_traced`], aligned with node
/// ids: the example view and the maintained per-feature sorted lists.
#[derive(Debug, Clone)]
pub struct NodeTrace {
    pub rows: Vec<usize>,
    pub numeric_lists: Vec<Vec<f64>>,
}

/// Grows the unrestricted tree: nodes split until pure or inseparable.
pub fn build_tree(data: &Dataset, criterion: Criterion) -> Tree {
    build(data, criterion, Limits::NONE, None)
}

/// Grows a tree with depth and minimum-split limits enforced during
/// construction. Training data and deterministic selection make this
/// node-for-node identical to pruning the unrestricted tree afterwards.
pub fn build_tree_limited(data: &Dataset, criterion: Criterion, limits: Limits) -> Tree {
    build(data, criterion, limits, None)
}

/// [`build_tree`] plus a per-node trace for structural verification.
pub fn build_tree_traced(data: &Dataset, criterion: Criterion) -> (Tree, Vec<NodeTrace>) {
    let mut trace = Vec::new();
    let tree = build(data, criterion, Limits::NONE, Some(&mut trace));
    (tree, trace)
}

struct Pending {
    node_id: usize,
    rows: Vec<usize>,
    numeric_lists: Vec<Vec<f64>>,
    /// Sorted unique labels of the node (regression only).
    label_list: Vec<f64>,
}

fn build(
    data: &Dataset,
    criterion: Criterion,
    limits: Limits,
    mut trace: Option<&mut Vec<NodeTrace>>,
) -> Tree {
    assert!(data.n_rows() > 0, "cannot build a tree from an empty dataset");
    let columns = data.columns();
    let rows: Vec<usize> = (0..data.n_rows()).collect();

    // the only sorting of the whole build
    let root_lists: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| sorted_unique_numerics(&rows, &c.values))
        .collect();
    let root_labels = match data.labels() {
        Labels::Numeric(ys) => {
            let mut l = ys.clone();
            l.sort_by(f64::total_cmp);
            l.dedup();
            l
        }
        Labels::Classes { .. } => Vec::new(),
    };

    let mut nodes = vec![Node {
        depth: 1,
        n_examples: rows.len(),
        label: generate_label(&rows, data.labels()),
        split: None,
        children: None,
    }];
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(Pending { node_id: 0, rows, numeric_lists: root_lists, label_list: root_labels });

    while let Some(pending) = queue.pop_front() {
        let Pending { node_id, rows, numeric_lists, label_list } = pending;
        if let Some(trace) = trace.as_deref_mut() {
            debug_assert_eq!(trace.len(), node_id);
            trace.push(NodeTrace { rows: rows.clone(), numeric_lists: numeric_lists.clone() });
        }
        let depth = nodes[node_id].depth;
        if depth >= limits.depth_max || rows.len() < limits.split_min {
            continue;
        }

        let best = match data.labels() {
            Labels::Classes { ids, names } => {
                if is_pure(&rows, ids) {
                    continue;
                }
                best_split_over_features(&rows, columns, &numeric_lists, names.len(), |r| ids[r], criterion)
            }
            Labels::Numeric(ys) => {
                let Some(cut) = best_label_split(&rows, ys, &label_list) else {
                    continue;
                };
                best_split_over_features(
                    &rows,
                    columns,
                    &numeric_lists,
                    2,
                    |r| usize::from(ys[r] > cut),
                    criterion,
                )
            }
        };
        let Some(best) = best else {
            continue;
        };

        let (pos_rows, neg_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| best.predicate.evaluate(data.value(r, best.predicate.feature)));
        debug_assert!(!pos_rows.is_empty() && !neg_rows.is_empty());

        let pos_lists = filter_sorted_lists(&numeric_lists, &pos_rows, columns);
        let neg_lists = filter_sorted_lists(&numeric_lists, &neg_rows, columns);
        let (pos_labels, neg_labels) = match data.labels() {
            Labels::Numeric(ys) => (
                filter_sorted_labels(&label_list, &pos_rows, ys),
                filter_sorted_labels(&label_list, &neg_rows, ys),
            ),
            Labels::Classes { .. } => (Vec::new(), Vec::new()),
        };

        let pos_id = nodes.len();
        nodes.push(Node {
            depth: depth + 1,
            n_examples: pos_rows.len(),
            label: generate_label(&pos_rows, data.labels()),
            split: None,
            children: None,
        });
        let neg_id = nodes.len();
        nodes.push(Node {
            depth: depth + 1,
            n_examples: neg_rows.len(),
            label: generate_label(&neg_rows, data.labels()),
            split: None,
            children: None,
        });
        nodes[node_id].split = Some(best.predicate);
        nodes[node_id].children = Some((pos_id, neg_id));
        queue.push_back(Pending { node_id: pos_id, rows: pos_rows, numeric_lists: pos_lists, label_list: pos_labels });
        queue.push_back(Pending { node_id: neg_id, rows: neg_rows, numeric_lists: neg_lists, label_list: neg_labels });
    }

    Tree { nodes }
}

fn is_pure(rows: &[usize], ids: &[usize]) -> bool {
    let first = ids[rows[0]];
    rows.iter().all(|&r| ids[r] == first)
}

/// Majority class (ties to the smallest class id) or mean label.
pub fn generate_label(rows: &[usize], labels: &Labels) -> Label {
    match labels {
        Labels::Classes { ids, names } => {
            let mut counts = vec![0usize; names.len()];
            for &r in rows {
                counts[ids[r]] += 1;
            }
            let best = counts
                .iter()
                .enumerate()
                .max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i)))
                .map(|(i, _)| i)
                .unwrap_or(0);
            Label::Class(best)
        }
        Labels::Numeric(ys) => {
            let sum: f64 = rows.iter().map(|&r| ys[r]).sum();
            Label::Numeric(sum / rows.len() as f64)
        }
    }
}

/// Propagates the per-feature sorted unique-value lists to a child view:
/// keeps exactly the values present in the child, preserving order. A hash
/// set of the child's values makes the pass O(child rows + parent list).
pub fn filter_sorted_lists(
    parent: &[Vec<f64>],
    child_rows: &[usize],
    columns: &[Column],
) -> Vec<Vec<f64>> {
    parent
        .iter()
        .zip(columns)
        .map(|(list, column)| {
            let present: BitsSet = child_rows
                .iter()
                .filter_map(|&r| match column.values[r] {
                    crate::dataset::Value::Numeric(v) => Some(v.to_bits()),
                    _ => None,
                })
                .collect();
            list.iter().copied().filter(|v| present.contains(&v.to_bits())).collect()
        })
        .collect()
}

fn filter_sorted_labels(parent: &[f64], child_rows: &[usize], labels: &[f64]) -> Vec<f64> {
    let present: BitsSet = child_rows.iter().map(|&r| labels[r].to_bits()).collect();
    parent.iter().copied().filter(|v| present.contains(&v.to_bits())).collect()
}

/// Best binarization threshold for a regression node's labels: prefix sums
/// over the node's sorted unique labels score every cut in one pass, and the
/// cut maximizing the partition score (equivalently minimizing the summed
/// squared error) wins. Labels `<=` the returned threshold form class 0.
/// `None` when the node has a single distinct label.
pub fn best_label_split(rows: &[usize], labels: &[f64], sorted_labels: &[f64]) -> Option<f64> {
    if sorted_labels.len() < 2 {
        return None;
    }
    let index: BitsMap<usize> = sorted_labels
        .iter()
        .enumerate()
        .map(|(j, v)| (v.to_bits(), j))
        .collect();
    let mut counts = vec![0usize; sorted_labels.len()];
    for &r in rows {
        counts[index[&labels[r].to_bits()]] += 1;
    }
    debug_assert!(counts.iter().all(|&c| c > 0));

    // totals accumulated in ascending label order for determinism
    let total: f64 = sorted_labels.iter().zip(&counts).map(|(&v, &c)| v * c as f64).sum();
    let n_total = rows.len();

    let mut sum_below = 0.0;
    let mut n_below = 0usize;
    let mut best: Option<(f64, f64)> = None;
    for (j, (&value, &count)) in sorted_labels.iter().zip(&counts).enumerate() {
        sum_below += value * count as f64;
        n_below += count;
        if j + 1 == sorted_labels.len() {
            break; // cutting at the last label leaves the high side empty
        }
        let score = sse_partition_score(sum_below, n_below, total, n_total)
            .expect("interior cut is non-degenerate");
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, value));
        }
    }
    best.map(|(_, cut)| cut)
}
