//! Split-quality scores over per-class positive/negative counts.
//!
//! Every score is oriented so that higher is better and the selector can
//! maximize uniformly. Both classification criteria peak at exactly 0 when
//! each class falls entirely on one side of the split.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CriteriaError {
    #[error("cannot score an empty set of counts")]
    EmptyCounts,
    #[error("partition leaves one side empty")]
    DegenerateSplit,
}

/// Classification split criterion, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    InfoGain,
    Gini,
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::InfoGain => "info-gain",
            Criterion::Gini => "gini",
        }
    }

    /// Scores one candidate split; callers guarantee the counts are not all
    /// zero. The inner O(C) kernel of every selector.
    #[inline]
    pub(crate) fn score(&self, pos: &[u32], neg: &[u32]) -> f64 {
        match self {
            Criterion::InfoGain => info_gain(pos, neg),
            Criterion::Gini => gini(pos, neg),
        }
    }
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Criterion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "info-gain" => Ok(Criterion::InfoGain),
            "gini" => Ok(Criterion::Gini),
            other => Err(format!("unknown criterion {other:?} (expected info-gain or gini)")),
        }
    }
}

// Negated conditional entropy of the binary partition:
//   (1/M) [ sum_{p_i>0} p_i ln(p_i / sum p_j) + sum_{n_i>0} n_i ln(n_i / sum n_j) ]
// The parent-entropy term of full information gain is constant across
// candidates of a node and is dropped, so values lie in [-ln C, 0].
fn info_gain(pos: &[u32], neg: &[u32]) -> f64 {
    let tot_p: u64 = pos.iter().map(|&c| c as u64).sum();
    let tot_n: u64 = neg.iter().map(|&c| c as u64).sum();
    let tot = (tot_p + tot_n) as f64;
    debug_assert!(tot > 0.0);
    let mut ret = 0.0;
    for &p in pos {
        if p > 0 {
            let p = p as f64;
            ret += p / tot * (p / tot_p as f64).ln();
        }
    }
    for &n in neg {
        if n > 0 {
            let n = n as f64;
            ret += n / tot * (n / tot_n as f64).ln();
        }
    }
    ret
}

// Weighted Gini impurity of the two sides, negated. An empty side
// contributes zero, matching the pure-side convention of the entropy score.
fn gini(pos: &[u32], neg: &[u32]) -> f64 {
    let tot_p: u64 = pos.iter().map(|&c| c as u64).sum();
    let tot_n: u64 = neg.iter().map(|&c| c as u64).sum();
    let tot = (tot_p + tot_n) as f64;
    debug_assert!(tot > 0.0);
    let side = |counts: &[u32], side_tot: u64| -> f64 {
        if side_tot == 0 {
            return 0.0;
        }
        let st = side_tot as f64;
        let sum_sq: f64 = counts.iter().map(|&c| (c as f64 / st) * (c as f64 / st)).sum();
        st / tot * (1.0 - sum_sq)
    };
    -(side(pos, tot_p) + side(neg, tot_n))
}

/// Simplified information gain over per-class counts; higher is better,
/// 0 iff each class is pure on one side.
pub fn info_gain_score(pos: &[u32], neg: &[u32]) -> Result<f64, CriteriaError> {
    if pos.iter().all(|&c| c == 0) && neg.iter().all(|&c| c == 0) {
        return Err(CriteriaError::EmptyCounts);
    }
    Ok(info_gain(pos, neg))
}

/// Negated weighted Gini impurity; higher is better, 0 iff both sides pure.
pub fn gini_score(pos: &[u32], neg: &[u32]) -> Result<f64, CriteriaError> {
    if pos.iter().all(|&c| c == 0) && neg.iter().all(|&c| c == 0) {
        return Err(CriteriaError::EmptyCounts);
    }
    Ok(gini(pos, neg))
}

/// Proxy score for a regression label split: `sum1^2/n1 + sum2^2/n2` over the
/// two sides. Maximizing it minimizes the post-split sum of squared errors,
/// whose `sum y_i^2` terms are constant per label set and dropped.
pub fn sse_partition_score(
    sum1: f64,
    n1: usize,
    sum_total: f64,
    n_total: usize,
) -> Result<f64, CriteriaError> {
    if n1 == 0 || n1 >= n_total {
        return Err(CriteriaError::DegenerateSplit);
    }
    let sum2 = sum_total - sum1;
    let n2 = (n_total - n1) as f64;
    Ok(sum1 * sum1 / n1 as f64 + sum2 * sum2 / n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn info_gain_worked_examples() {
        // counts taken from the hybrid 22-example reference split at <= 2
        close(info_gain_score(&[0, 4, 0], &[7, 4, 7]).unwrap(), -0.8744896414035008);
        assert!((info_gain_score(&[0, 4, 0], &[7, 4, 7]).unwrap() + 0.87).abs() <= 0.005);
        // and at = x
        close(info_gain_score(&[2, 0, 0], &[5, 8, 7]).unwrap(), -0.982297842367429);
        assert!((info_gain_score(&[2, 0, 0], &[5, 8, 7]).unwrap() + 0.98).abs() <= 0.005);
    }

    #[test]
    fn info_gain_pure_sides_score_zero() {
        for (k, j) in [(1u32, 1u32), (4, 9), (100, 3)] {
            assert_eq!(info_gain_score(&[k, 0], &[0, j]).unwrap(), 0.0);
        }
    }

    #[test]
    fn info_gain_balanced_two_class() {
        close(info_gain_score(&[1, 1], &[1, 1]).unwrap(), -(2f64.ln()));
    }

    #[test]
    fn gini_worked_examples() {
        assert_eq!(gini_score(&[3, 0], &[0, 5]).unwrap(), -0.0);
        close(gini_score(&[1, 1], &[1, 1]).unwrap(), -0.5);
        close(gini_score(&[0, 0], &[3, 1]).unwrap(), -0.375);
    }

    #[test]
    fn empty_counts_rejected() {
        assert_eq!(info_gain_score(&[0, 0], &[0, 0]).unwrap_err(), CriteriaError::EmptyCounts);
        assert_eq!(gini_score(&[0, 0], &[0, 0]).unwrap_err(), CriteriaError::EmptyCounts);
    }

    #[test]
    fn sse_partition_examples() {
        // labels {1,1,2,10,10} split at <= 2: 16/3 + 400/2
        close(sse_partition_score(4.0, 3, 24.0, 5).unwrap(), 205.33333333333334);
        // constant labels score identically at every cut
        let full = sse_partition_score(6.0, 2, 12.0, 4).unwrap();
        close(full, 12.0 * 12.0 / 4.0);
        close(sse_partition_score(3.0, 1, 12.0, 4).unwrap(), full);
        // zero labels
        close(sse_partition_score(0.0, 1, 0.0, 2).unwrap(), 0.0);
        assert_eq!(sse_partition_score(1.0, 0, 2.0, 3).unwrap_err(), CriteriaError::DegenerateSplit);
        assert_eq!(sse_partition_score(1.0, 3, 2.0, 3).unwrap_err(), CriteriaError::DegenerateSplit);
    }

    fn counts_strategy() -> impl Strategy<Value = (Vec<u32>, Vec<u32>)> {
        (1usize..=6).prop_flat_map(|c| {
            (
                proptest::collection::vec(0u32..50, c),
                proptest::collection::vec(0u32..50, c),
            )
                .prop_filter("non-empty", |(p, n)| {
                    p.iter().any(|&x| x > 0) || n.iter().any(|&x| x > 0)
                })
        })
    }

    proptest! {
        #[test]
        fn scores_bounded((pos, neg) in counts_strategy()) {
            let c = pos.len() as f64;
            let ig = info_gain_score(&pos, &neg).unwrap();
            prop_assert!(ig <= 1e-12 && ig >= -c.ln() - 1e-9, "ig = {ig}");
            let g = gini_score(&pos, &neg).unwrap();
            prop_assert!(g <= 1e-12 && g >= -(1.0 - 1.0 / c) - 1e-9, "gini = {g}");
        }

        #[test]
        fn class_permutation_invariance((pos, neg) in counts_strategy(), seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut order: Vec<usize> = (0..pos.len()).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let pos2: Vec<u32> = order.iter().map(|&i| pos[i]).collect();
            let neg2: Vec<u32> = order.iter().map(|&i| neg[i]).collect();
            let ig = info_gain_score(&pos, &neg).unwrap();
            let ig2 = info_gain_score(&pos2, &neg2).unwrap();
            prop_assert!((ig - ig2).abs() < 1e-12);
            let g = gini_score(&pos, &neg).unwrap();
            let g2 = gini_score(&pos2, &neg2).unwrap();
            prop_assert!((g - g2).abs() < 1e-12);
        }

        #[test]
        fn side_swap_invariance((pos, neg) in counts_strategy()) {
            let ig = info_gain_score(&pos, &neg).unwrap();
            let ig2 = info_gain_score(&neg, &pos).unwrap();
            prop_assert!((ig - ig2).abs() < 1e-12);
            let g = gini_score(&pos, &neg).unwrap();
            let g2 = gini_score(&neg, &pos).unwrap();
            prop_assert!((g - g2).abs() < 1e-12);
        }

        // maximizing the proxy equals minimizing the sum of squared errors
        // measured directly against each side's mean
        #[test]
        fn sse_proxy_matches_brute_force(
            labels in proptest::collection::vec(-5i32..=5, 2..30),
        ) {
            let labels: Vec<f64> = labels.into_iter().map(f64::from).collect();
            let mut unique = labels.clone();
            unique.sort_by(f64::total_cmp);
            unique.dedup();
            prop_assume!(unique.len() >= 2);

            let sum_total: f64 = labels.iter().sum();
            let n_total = labels.len();
            let brute_sse = |cut: f64| {
                let (s1, s2): (Vec<f64>, Vec<f64>) = labels.iter().partition(|&&y| y <= cut);
                let m1 = s1.iter().sum::<f64>() / s1.len() as f64;
                let m2 = s2.iter().sum::<f64>() / s2.len() as f64;
                s1.iter().map(|y| (y - m1) * (y - m1)).sum::<f64>()
                    + s2.iter().map(|y| (y - m2) * (y - m2)).sum::<f64>()
            };

            let mut best_proxy = f64::NEG_INFINITY;
            let mut best_cut = f64::NAN;
            for &cut in &unique[..unique.len() - 1] {
                let n1 = labels.iter().filter(|&&y| y <= cut).count();
                let sum1: f64 = labels.iter().filter(|&&y| y <= cut).sum();
                let proxy = sse_partition_score(sum1, n1, sum_total, n_total).unwrap();
                if proxy > best_proxy {
                    best_proxy = proxy;
                    best_cut = cut;
                }
            }
            let min_sse = unique[..unique.len() - 1]
                .iter()
                .map(|&c| brute_sse(c))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(brute_sse(best_cut) <= min_sse + 1e-9);
        }
    }
}
