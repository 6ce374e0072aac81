//! Split-candidate scoring engines.
//!
//! [`best_split_from_stats`] scores every candidate split of one feature from
//! prefix-summed count tables: one O(M) pass to collect counts, then O(C) per
//! candidate, O(M + N*C) total. [`rescan_best_split`] is the plain baseline
//! that rescans all M rows for each of the N candidates, kept as a
//! correctness oracle and benchmark reference. Both engines share the same
//! candidate set, scoring kernel, and tie-break, so they agree exactly.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use crate::bits::BitsMap;
use crate::criteria::Criterion;
use crate::dataset::{Column, Value};

static SPLIT_SEARCH_CALLS: AtomicU64 = AtomicU64::new(0);

/// Number of per-feature split searches performed so far, either engine.
/// Tuning walks an already-built tree and must leave this untouched.
pub fn split_search_calls() -> u64 {
    SPLIT_SEARCH_CALLS.load(AtomicOrdering::Relaxed)
}

/// The boolean test of a split: numeric threshold or token equality.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitTest {
    Leq(f64),
    Gt(f64),
    Eq(String),
}

impl SplitTest {
    fn op_rank(&self) -> u8 {
        match self {
            SplitTest::Leq(_) => 0,
            SplitTest::Gt(_) => 1,
            SplitTest::Eq(_) => 2,
        }
    }
}

/// Routes an example to the positive or negative child of a node.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPredicate {
    pub feature: usize,
    pub test: SplitTest,
}

impl SplitPredicate {
    /// Total over all values: numeric comparisons hold only between numbers,
    /// token equality only between tokens, and missing fails everything, so
    /// missing rows always take the negative branch.
    pub fn evaluate(&self, v: &Value) -> bool {
        match (&self.test, v) {
            (SplitTest::Leq(x), Value::Numeric(n)) => n <= x,
            (SplitTest::Gt(x), Value::Numeric(n)) => n > x,
            (SplitTest::Eq(t), Value::Categorical(s)) => t == s,
            _ => false,
        }
    }
}

impl std::fmt::Display for SplitPredicate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.test {
            SplitTest::Leq(x) => write!(f, "feature {} <= {x}", self.feature),
            SplitTest::Gt(x) => write!(f, "feature {} > {x}", self.feature),
            SplitTest::Eq(t) => write!(f, "feature {} = {t:?}", self.feature),
        }
    }
}

/// Winning candidate of a split search.
#[derive(Debug, Clone, PartialEq)]
pub struct BestSplit {
    pub predicate: SplitPredicate,
    pub score: f64,
}

// Candidate borrowed from the stats tables; only the winner gets owned.
#[derive(Clone, Copy)]
enum Candidate<'a> {
    Leq(f64),
    Gt(f64),
    Eq(&'a str),
}

impl<'a> Candidate<'a> {
    fn rank(&self) -> u8 {
        match self {
            Candidate::Leq(_) => 0,
            Candidate::Gt(_) => 1,
            Candidate::Eq(_) => 2,
        }
    }

    fn to_test(self) -> SplitTest {
        match self {
            Candidate::Leq(x) => SplitTest::Leq(x),
            Candidate::Gt(x) => SplitTest::Gt(x),
            Candidate::Eq(t) => SplitTest::Eq(t.to_owned()),
        }
    }
}

// Deterministic candidate order used for tie-breaking: <= before > before =,
// then ascending value (numeric order / lexicographic).
fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    match (a, b) {
        (Candidate::Leq(x), Candidate::Leq(y)) | (Candidate::Gt(x), Candidate::Gt(y)) => {
            x.total_cmp(y)
        }
        (Candidate::Eq(s), Candidate::Eq(t)) => s.cmp(t),
        _ => a.rank().cmp(&b.rank()),
    }
}

fn test_order(a: &SplitTest, b: &SplitTest) -> Ordering {
    match (a, b) {
        (SplitTest::Leq(x), SplitTest::Leq(y)) | (SplitTest::Gt(x), SplitTest::Gt(y)) => {
            x.total_cmp(y)
        }
        (SplitTest::Eq(s), SplitTest::Eq(t)) => s.cmp(t),
        _ => a.op_rank().cmp(&b.op_rank()),
    }
}

/// Shared tie-break for reducing candidates across features: higher score,
/// then lower feature id, then `<=` before `>` before `=`, then ascending
/// value. Returns true when `a` must win over `b`.
pub fn beats(a: &BestSplit, b: &BestSplit) -> bool {
    if a.score != b.score {
        return a.score > b.score;
    }
    match a.predicate.feature.cmp(&b.predicate.feature) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => test_order(&a.predicate.test, &b.predicate.test) == Ordering::Less,
    }
}

/// Per-feature, per-class count tables over one node's examples.
///
/// `cnt_numeric` is prefix-summed along `values`, so the number of class-`y`
/// examples with a numeric cell `<= values[j]` is a single lookup.
#[derive(Debug, Clone)]
pub struct FeatureStats<'a> {
    /// Ascending unique numeric values present in the node (pre-sorted,
    /// maintained by the tree builder).
    pub values: &'a [f64],
    /// Unique categorical tokens present in the node, lexicographic.
    pub tokens: Vec<&'a str>,
    /// Class-major `[class * values.len() + j]`, prefix-summed along values.
    pub cnt_numeric: Vec<u32>,
    /// Class-major `[class * tokens.len() + t]`.
    pub cnt_categorical: Vec<u32>,
    /// Per-class totals of numeric, categorical, and missing cells.
    pub tot_numeric: Vec<u32>,
    pub tot_categorical: Vec<u32>,
    pub tot_missing: Vec<u32>,
    pub n_classes: usize,
}

/// One pass over the node's rows, bucketing cells into the count tables.
/// `sorted_values` is the node's maintained unique-value list for this
/// feature; it is indexed by hash, never re-sorted.
pub fn collect_stats<'a>(
    rows: &[usize],
    column: &'a [Value],
    sorted_values: &'a [f64],
    n_classes: usize,
    class_of: impl Fn(usize) -> usize,
) -> FeatureStats<'a> {
    let n_vals = sorted_values.len();
    let value_index: BitsMap<usize> = sorted_values
        .iter()
        .enumerate()
        .map(|(j, v)| (v.to_bits(), j))
        .collect();

    let mut cnt_numeric = vec![0u32; n_classes * n_vals];
    let mut tot_numeric = vec![0u32; n_classes];
    let mut tot_categorical = vec![0u32; n_classes];
    let mut tot_missing = vec![0u32; n_classes];

    // tokens are discovered during the scan; counts are token-major until
    // the final lexicographic reorder
    let mut token_index: HashMap<&'a str, usize> = HashMap::new();
    let mut tokens: Vec<&'a str> = Vec::new();
    let mut token_counts: Vec<u32> = Vec::new();

    for &row in rows {
        let y = class_of(row);
        match &column[row] {
            Value::Numeric(v) => {
                let j = value_index[&v.to_bits()];
                cnt_numeric[y * n_vals + j] += 1;
                tot_numeric[y] += 1;
            }
            Value::Categorical(tok) => {
                let t = *token_index.entry(tok.as_str()).or_insert_with(|| {
                    tokens.push(tok.as_str());
                    token_counts.extend(std::iter::repeat_n(0, n_classes));
                    tokens.len() - 1
                });
                token_counts[t * n_classes + y] += 1;
                tot_categorical[y] += 1;
            }
            Value::Missing => tot_missing[y] += 1,
        }
    }

    for y in 0..n_classes {
        let row = &mut cnt_numeric[y * n_vals..(y + 1) * n_vals];
        for j in 1..n_vals {
            row[j] += row[j - 1];
        }
    }

    let mut order: Vec<usize> = (0..tokens.len()).collect();
    order.sort_by(|&a, &b| tokens[a].cmp(tokens[b]));
    let sorted_tokens: Vec<&'a str> = order.iter().map(|&t| tokens[t]).collect();
    let mut cnt_categorical = vec![0u32; n_classes * sorted_tokens.len()];
    for (new_t, &old_t) in order.iter().enumerate() {
        for y in 0..n_classes {
            cnt_categorical[y * sorted_tokens.len() + new_t] = token_counts[old_t * n_classes + y];
        }
    }

    FeatureStats {
        values: sorted_values,
        tokens: sorted_tokens,
        cnt_numeric,
        cnt_categorical,
        tot_numeric,
        tot_categorical,
        tot_missing,
        n_classes,
    }
}

// Scores every non-degenerate candidate of the feature in O(C) each.
// Candidates follow the comparison semantics of `SplitPredicate::evaluate`:
// categorical and missing cells fail numeric comparisons, so they sit on the
// negative side of every <=/> candidate, and missing cells likewise join the
// negative side of every = candidate.
fn for_each_candidate<'a>(
    stats: &FeatureStats<'a>,
    criterion: Criterion,
    mut visit: impl FnMut(Candidate<'a>, f64),
) {
    let c = stats.n_classes;
    let n_vals = stats.values.len();
    let n_toks = stats.tokens.len();
    let mut pos = vec![0u32; c];
    let mut neg = vec![0u32; c];

    let emit = |cand: Candidate<'a>, pos: &[u32], neg: &[u32], visit: &mut dyn FnMut(Candidate<'a>, f64)| {
        let sum_pos: u64 = pos.iter().map(|&x| x as u64).sum();
        let sum_neg: u64 = neg.iter().map(|&x| x as u64).sum();
        // a candidate that separates nothing is useless to a tree builder
        if sum_pos == 0 || sum_neg == 0 {
            return;
        }
        visit(cand, criterion.score(pos, neg));
    };

    for (j, &x) in stats.values.iter().enumerate() {
        for y in 0..c {
            let le = stats.cnt_numeric[y * n_vals + j];
            pos[y] = le;
            neg[y] = stats.tot_numeric[y] - le + stats.tot_categorical[y] + stats.tot_missing[y];
        }
        emit(Candidate::Leq(x), &pos, &neg, &mut visit);
        for y in 0..c {
            let le = stats.cnt_numeric[y * n_vals + j];
            pos[y] = stats.tot_numeric[y] - le;
            neg[y] = le + stats.tot_categorical[y] + stats.tot_missing[y];
        }
        emit(Candidate::Gt(x), &pos, &neg, &mut visit);
    }
    for (t, &tok) in stats.tokens.iter().enumerate() {
        for y in 0..c {
            let eq = stats.cnt_categorical[y * n_toks + t];
            pos[y] = eq;
            neg[y] = stats.tot_categorical[y] - eq + stats.tot_numeric[y] + stats.tot_missing[y];
        }
        emit(Candidate::Eq(tok), &pos, &neg, &mut visit);
    }
}

/// Picks the best split of one feature from prepared statistics. Returns
/// `None` when every candidate is degenerate (for instance all values equal).
pub fn best_split_from_stats(
    stats: &FeatureStats<'_>,
    feature: usize,
    criterion: Criterion,
) -> Option<BestSplit> {
    SPLIT_SEARCH_CALLS.fetch_add(1, AtomicOrdering::Relaxed);
    let mut best: Option<(Candidate, f64)> = None;
    for_each_candidate(stats, criterion, |cand, score| {
        let wins = match &best {
            None => true,
            Some((bc, bs)) => {
                score > *bs || (score == *bs && candidate_order(&cand, bc) == Ordering::Less)
            }
        };
        if wins {
            best = Some((cand, score));
        }
    });
    best.map(|(cand, score)| BestSplit {
        predicate: SplitPredicate { feature, test: cand.to_test() },
        score,
    })
}

/// Every non-degenerate candidate of the feature with its score, in
/// deterministic candidate order. Debug and test surface.
pub fn candidate_scores(
    stats: &FeatureStats<'_>,
    feature: usize,
    criterion: Criterion,
) -> Vec<BestSplit> {
    let mut out = Vec::new();
    for_each_candidate(stats, criterion, |cand, score| {
        out.push(BestSplit {
            predicate: SplitPredicate { feature, test: cand.to_test() },
            score,
        });
    });
    out
}

/// Baseline selector: collects the unique value set, then rescans all rows
/// once per unique value, O(M*N). Same candidates, scores, and tie-break as
/// [`best_split_from_stats`]; exists as oracle and benchmark baseline.
pub fn rescan_best_split(
    rows: &[usize],
    column: &[Value],
    n_classes: usize,
    class_of: impl Fn(usize) -> usize,
    feature: usize,
    criterion: Criterion,
) -> Option<BestSplit> {
    SPLIT_SEARCH_CALLS.fetch_add(1, AtomicOrdering::Relaxed);

    let mut numerics: Vec<f64> = rows
        .iter()
        .filter_map(|&r| match column[r] {
            Value::Numeric(v) => Some(v),
            _ => None,
        })
        .collect();
    numerics.sort_by(f64::total_cmp);
    numerics.dedup();
    let mut tokens: Vec<&str> = rows
        .iter()
        .filter_map(|&r| match &column[r] {
            Value::Categorical(t) => Some(t.as_str()),
            _ => None,
        })
        .collect();
    tokens.sort_unstable();
    tokens.dedup();

    fn challenge<'a>(
        cand: Candidate<'a>,
        pos: &[u32],
        neg: &[u32],
        criterion: Criterion,
        best: &mut Option<(Candidate<'a>, f64)>,
    ) {
        let sum_pos: u64 = pos.iter().map(|&x| x as u64).sum();
        let sum_neg: u64 = neg.iter().map(|&x| x as u64).sum();
        if sum_pos == 0 || sum_neg == 0 {
            return;
        }
        let score = criterion.score(pos, neg);
        let wins = match best {
            None => true,
            Some((bc, bs)) => {
                score > *bs || (score == *bs && candidate_order(&cand, bc) == Ordering::Less)
            }
        };
        if wins {
            *best = Some((cand, score));
        }
    }
    let mut best: Option<(Candidate, f64)> = None;

    let mut le_counts = vec![0u32; n_classes];
    let mut gt_counts = vec![0u32; n_classes];
    let mut rest = vec![0u32; n_classes];
    for &x in &numerics {
        le_counts.fill(0);
        gt_counts.fill(0);
        rest.fill(0);
        for &r in rows {
            let y = class_of(r);
            match column[r] {
                Value::Numeric(v) if v <= x => le_counts[y] += 1,
                Value::Numeric(_) => gt_counts[y] += 1,
                _ => rest[y] += 1,
            }
        }
        let neg: Vec<u32> = (0..n_classes).map(|y| gt_counts[y] + rest[y]).collect();
        challenge(Candidate::Leq(x), &le_counts, &neg, criterion, &mut best);
        let neg: Vec<u32> = (0..n_classes).map(|y| le_counts[y] + rest[y]).collect();
        challenge(Candidate::Gt(x), &gt_counts, &neg, criterion, &mut best);
    }
    let mut eq_counts = vec![0u32; n_classes];
    let mut ne_counts = vec![0u32; n_classes];
    for &tok in &tokens {
        eq_counts.fill(0);
        ne_counts.fill(0);
        for &r in rows {
            let y = class_of(r);
            match &column[r] {
                Value::Categorical(t) if t == tok => eq_counts[y] += 1,
                _ => ne_counts[y] += 1,
            }
        }
        challenge(Candidate::Eq(tok), &eq_counts, &ne_counts, criterion, &mut best);
    }

    best.map(|(cand, score)| BestSplit {
        predicate: SplitPredicate { feature, test: cand.to_test() },
        score,
    })
}

/// Best split across all features of a node view, reduced with [`beats`].
pub fn best_split_over_features(
    rows: &[usize],
    columns: &[Column],
    sorted_lists: &[Vec<f64>],
    n_classes: usize,
    class_of: impl Fn(usize) -> usize + Copy,
    criterion: Criterion,
) -> Option<BestSplit> {
    let mut best: Option<BestSplit> = None;
    for (feature, column) in columns.iter().enumerate() {
        let stats = collect_stats(rows, &column.values, &sorted_lists[feature], n_classes, class_of);
        if let Some(cand) = best_split_from_stats(&stats, feature, criterion) {
            if best.as_ref().is_none_or(|b| beats(&cand, b)) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Sorted unique numeric values of a column over the given rows. Used to seed
/// the root's per-feature lists (the only sort of the whole build).
pub fn sorted_unique_numerics(rows: &[usize], column: &[Value]) -> Vec<f64> {
    let mut vals: Vec<f64> = rows
        .iter()
        .filter_map(|&r| match column[r] {
            Value::Numeric(v) => Some(v),
            _ => None,
        })
        .collect();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    vals
}
