//! Wall-clock comparison of the two split-selection engines on a synthetic
//! single feature. The feature draws from `size / 2` integer values so the
//! unique-value count N scales with the example count M, which is what
//! separates the O(M*N) baseline from the O(M + N*C) prefix-sum engine.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::criteria::Criterion;
use crate::dataset::Value;
use crate::selection::{
    best_split_from_stats, collect_stats, rescan_best_split, sorted_unique_numerics, BestSplit,
};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub size: usize,
    pub rescan_ms: f64,
    pub prefix_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub repetitions: usize,
}

impl BenchReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("size\trescan_ms\tprefix_ms\tspeedup\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{}\t{:.3}\t{:.3}\t{:.1}\n",
                row.size,
                row.rescan_ms,
                row.prefix_ms,
                row.rescan_ms / row.prefix_ms
            ));
        }
        out
    }
}

/// Two-class synthetic feature with roughly `size / 2` unique numeric values.
pub fn synthetic_feature(size: usize, seed: u64) -> (Vec<Value>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = (size / 2).max(1);
    let values = (0..size).map(|_| Value::Numeric(rng.gen_range(0..span) as f64)).collect();
    let classes = (0..size).map(|_| rng.gen_range(0..2usize)).collect();
    (values, classes)
}

/// Per-repetition times in milliseconds after one discarded warm-up run.
pub fn time_rescan(column: &[Value], classes: &[usize], repetitions: usize) -> Vec<f64> {
    let rows: Vec<usize> = (0..column.len()).collect();
    let run = || rescan_best_split(&rows, column, 2, |r| classes[r], 0, Criterion::InfoGain);
    black_box(run());
    (0..repetitions)
        .map(|_| {
            let start = Instant::now();
            black_box(run());
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect()
}

/// Per-repetition times in milliseconds after one discarded warm-up run.
/// The unique-value list is prepared once outside the clock, mirroring the
/// tree builder, where sorting happens once and is filtered down the tree.
pub fn time_prefix(column: &[Value], classes: &[usize], repetitions: usize) -> Vec<f64> {
    let rows: Vec<usize> = (0..column.len()).collect();
    let sorted = sorted_unique_numerics(&rows, column);
    let run = || {
        let stats = collect_stats(&rows, column, &sorted, 2, |r| classes[r]);
        best_split_from_stats(&stats, 0, Criterion::InfoGain)
    };
    black_box(run());
    (0..repetitions)
        .map(|_| {
            let start = Instant::now();
            black_box(run());
            start.elapsed().as_secs_f64() * 1e3
        })
        .collect()
}

/// Fastest mean per-call time in milliseconds over `samples` blocks of
/// `batch` consecutive prefix-engine runs. Single calls finish in
/// milliseconds, far below scheduler noise; timing whole blocks and keeping
/// the best one gives a stable estimate for growth-ratio comparisons.
pub fn time_prefix_batch(column: &[Value], classes: &[usize], batch: usize, samples: usize) -> f64 {
    let rows: Vec<usize> = (0..column.len()).collect();
    let sorted = sorted_unique_numerics(&rows, column);
    let run = || {
        let stats = collect_stats(&rows, column, &sorted, 2, |r| classes[r]);
        best_split_from_stats(&stats, 0, Criterion::InfoGain)
    };
    black_box(run());
    (0..samples)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..batch {
                black_box(run());
            }
            start.elapsed().as_secs_f64() * 1e3 / batch as f64
        })
        .fold(f64::INFINITY, f64::min)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Times both engines at every size and reports mean times. Panics if the
/// engines ever disagree on the winning split; they share candidates,
/// scores, and tie-break, so disagreement is a bug.
pub fn run(sizes: &[usize], repetitions: usize, seed: u64) -> BenchReport {
    let rows = sizes
        .iter()
        .map(|&size| {
            let (column, classes) = synthetic_feature(size, seed);
            let all: Vec<usize> = (0..size).collect();
            let sorted = sorted_unique_numerics(&all, &column);
            let stats = collect_stats(&all, &column, &sorted, 2, |r| classes[r]);
            let fast: Option<BestSplit> = best_split_from_stats(&stats, 0, Criterion::InfoGain);
            let slow = rescan_best_split(&all, &column, 2, |r| classes[r], 0, Criterion::InfoGain);
            assert_eq!(fast, slow, "selection engines disagree at size {size}");

            BenchRow {
                size,
                rescan_ms: mean(&time_rescan(&column, &classes, repetitions)),
                prefix_ms: mean(&time_prefix(&column, &classes, repetitions)),
            }
        })
        .collect();
    BenchReport { rows, repetitions }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_feature_shape() {
        let (column, classes) = synthetic_feature(2000, 9);
        assert_eq!(column.len(), 2000);
        assert_eq!(classes.len(), 2000);
        let rows: Vec<usize> = (0..2000).collect();
        let unique = sorted_unique_numerics(&rows, &column);
        assert!(unique.len() > 500 && unique.len() <= 1000, "{}", unique.len());
        assert!(classes.contains(&0) && classes.contains(&1));
        // deterministic by seed
        assert_eq!(synthetic_feature(2000, 9).0, column);
    }

    #[test]
    fn report_runs_and_agrees() {
        let report = run(&[1000, 2000], 2, 4);
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows.iter().all(|r| r.prefix_ms >= 0.0 && r.rescan_ms >= 0.0));
        let tsv = report.to_tsv();
        assert!(tsv.starts_with("size\t"));
        assert_eq!(tsv.lines().count(), 3);
    }
}
