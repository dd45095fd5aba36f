//! Sample-size allocation across strata: proportional-to-frequency,
//! proportional-to-CV, and the per-bucket split for predicate queries.
//!
//! Real-valued shares are rounded by largest remainder (floor everything,
//! hand the leftover units to the largest fractional parts, ties to the
//! lower index), so allocations always sum to exactly `m`. Any nonempty
//! stratum left at zero is then topped up to one sample, taken from the
//! largest allocations, as long as `m` allows.

use std::fmt;

use thiserror::Error;

use crate::catalog::{GroupStats, Histogram};

#[derive(Debug, Error)]
pub enum AllocError {
    #[error("column '{0}' has no catalog statistics")]
    UnknownColumn(String),
    #[error("no buckets intersect the predicate")]
    EmptyBuckets,
}

/// Which coefficient-of-variation ratio weights the per-group shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CvKind {
    /// sigma / |mu|.
    #[default]
    Standard,
    /// |mu| / sigma.
    Inverted,
}

impl CvKind {
    fn weight(self, mean: f64, stddev: f64) -> f64 {
        match self {
            CvKind::Standard => stddev / mean.abs(),
            CvKind::Inverted => mean.abs() / stddev,
        }
    }
}

/// One allocation target: a group, optionally inside a histogram bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stratum {
    pub group: usize,
    pub bucket: Option<usize>,
}

/// Integer sample counts per stratum, summing to the requested total.
#[derive(Debug, Clone)]
pub struct AllocationPlan {
    strata: Vec<Stratum>,
    counts: Vec<usize>,
    total: usize,
}

impl AllocationPlan {
    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Stratum, usize)> + '_ {
        self.strata.iter().copied().zip(self.counts.iter().copied())
    }

    /// Samples allocated to a group, summed over buckets.
    pub fn count_for_group(&self, group: usize) -> usize {
        self.iter()
            .filter(|(s, _)| s.group == group)
            .map(|(_, c)| c)
            .sum()
    }
}

impl fmt::Display for AllocationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "allocation: {} samples over {} strata", self.total, self.len())?;
        for (s, c) in self.iter() {
            match s.bucket {
                Some(b) => writeln!(f, "  bucket {b} group {}: {c}", s.group)?,
                None => writeln!(f, "  group {}: {c}", s.group)?,
            }
        }
        Ok(())
    }
}

/// Largest-remainder rounding of `m * w_i / sum(w)`. Zero-weight entries
/// stay at zero.
fn largest_remainder(weights: &[f64], m: usize) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let mut counts = vec![0usize; weights.len()];
    if total <= 0.0 || m == 0 {
        return counts;
    }
    let mut fracs: Vec<(usize, f64)> = Vec::with_capacity(weights.len());
    let mut assigned = 0usize;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let share = m as f64 * w / total;
        let floor = share.floor() as usize;
        counts[i] = floor;
        assigned += floor;
        fracs.push((i, share - floor as f64));
    }
    let mut leftover = m.saturating_sub(assigned);
    fracs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    // Float rounding can leave at most a unit or two beyond the positive
    // fractional parts; cycle to stay exact.
    while leftover > 0 {
        for &(i, _) in &fracs {
            if leftover == 0 {
                break;
            }
            counts[i] += 1;
            leftover -= 1;
        }
    }
    counts
}

/// Moves single samples from the largest allocations onto nonempty strata
/// that received zero, while donors can spare them. Needy strata are served
/// in descending weight order and donors give from the largest allocation
/// with the smallest weight, which keeps allocations weakly monotone in the
/// weights.
fn top_up_empty(counts: &mut [usize], eligible: &[bool], weights: &[f64]) {
    let mut needy: Vec<usize> = (0..counts.len())
        .filter(|&i| eligible[i] && counts[i] == 0)
        .collect();
    needy.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
    for i in needy {
        let donor = counts
            .iter()
            .enumerate()
            .filter(|(j, &c)| eligible[*j] && c >= 2)
            .max_by(|a, b| {
                a.1.cmp(b.1)
                    .then(weights[b.0].partial_cmp(&weights[a.0]).unwrap())
                    .then(b.0.cmp(&a.0))
            })
            .map(|(j, _)| j);
        match donor {
            Some(j) => {
                counts[j] -= 1;
                counts[i] += 1;
            }
            None => break,
        }
    }
}

fn group_strata(g: usize) -> Vec<Stratum> {
    (0..g).map(|group| Stratum { group, bucket: None }).collect()
}

/// Per-group sample sizes proportional to group frequency.
pub fn allocate_uniform(stats: &GroupStats, m: usize) -> AllocationPlan {
    let weights: Vec<f64> = stats.counts().iter().map(|&c| c as f64).collect();
    let mut counts = largest_remainder(&weights, m);
    let eligible: Vec<bool> = stats.counts().iter().map(|&c| c > 0).collect();
    top_up_empty(&mut counts, &eligible, &weights);
    AllocationPlan {
        strata: group_strata(stats.group_count()),
        counts,
        total: m,
    }
}

/// Per-group sample sizes proportional to the coefficient of variation of
/// the aggregate column. Degenerate groups (zero mean or zero stddev) get
/// weight zero in the proportional step, then one sample each via top-up.
/// If every group is degenerate the allocation falls back to uniform.
pub fn allocate_cv(
    stats: &GroupStats,
    column: &str,
    m: usize,
    kind: CvKind,
) -> Result<AllocationPlan, AllocError> {
    let col = stats
        .column_index(column)
        .ok_or_else(|| AllocError::UnknownColumn(column.to_string()))?;
    let g = stats.group_count();
    let mut weights = vec![0.0; g];
    for (i, w) in weights.iter_mut().enumerate() {
        if stats.count(i) == 0 {
            continue;
        }
        let mean = stats.mean(col, i);
        let stddev = stats.stddev(col, i);
        if mean != 0.0 && stddev > 0.0 {
            *w = kind.weight(mean, stddev);
        }
    }
    if weights.iter().all(|&w| w == 0.0) {
        log::warn!("all groups degenerate for CV allocation on '{column}'; falling back to uniform");
        return Ok(allocate_uniform(stats, m));
    }
    let mut counts = largest_remainder(&weights, m);
    let eligible: Vec<bool> = stats.counts().iter().map(|&c| c > 0).collect();
    top_up_empty(&mut counts, &eligible, &weights);
    Ok(AllocationPlan {
        strata: group_strata(g),
        counts,
        total: m,
    })
}

/// How samples are split across groups inside one bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketAllocation {
    /// CV-proportional using the per-(bucket, group) statistics.
    Cv(CvKind),
    /// Proportional to the per-(bucket, group) row counts.
    Frequency,
}

/// Predicate-query allocation: the per-bucket budget is an equal split of
/// `m` over the intersecting buckets (leftover units to lower-indexed
/// buckets), then split across groups inside each bucket per `within`.
/// Empty cells are excluded.
pub fn allocate_bucketed(
    hist: &Histogram,
    relevant_buckets: &[usize],
    column: &str,
    m: usize,
    within: BucketAllocation,
) -> Result<AllocationPlan, AllocError> {
    if relevant_buckets.is_empty() {
        return Err(AllocError::EmptyBuckets);
    }
    let col = hist
        .stat_column_index(column)
        .ok_or_else(|| AllocError::UnknownColumn(column.to_string()))?;
    let g = hist.group_count();
    let per_bucket = m / relevant_buckets.len();
    let leftover = m % relevant_buckets.len();

    let mut strata = Vec::new();
    let mut counts = Vec::new();
    for (pos, &bucket) in relevant_buckets.iter().enumerate() {
        let budget = per_bucket + usize::from(pos < leftover);
        let mut weights = vec![0.0; g];
        let mut eligible = vec![false; g];
        for group in 0..g {
            if hist.cell_count(bucket, group) == 0 {
                continue;
            }
            eligible[group] = true;
            match within {
                BucketAllocation::Cv(kind) => {
                    let mean = hist.cell_mean(col, bucket, group);
                    let stddev = hist.cell_stddev(col, bucket, group);
                    if mean != 0.0 && stddev > 0.0 {
                        weights[group] = kind.weight(mean, stddev);
                    }
                }
                BucketAllocation::Frequency => {
                    weights[group] = hist.cell_count(bucket, group) as f64;
                }
            }
        }
        if weights.iter().all(|&w| w == 0.0) {
            // Every nonempty cell degenerate: split by cell frequency.
            weights = (0..g).map(|j| hist.cell_count(bucket, j) as f64).collect();
        }
        let mut cell_counts = largest_remainder(&weights, budget);
        top_up_empty(&mut cell_counts, &eligible, &weights);
        for (group, c) in cell_counts.into_iter().enumerate() {
            strata.push(Stratum {
                group,
                bucket: Some(bucket),
            });
            counts.push(c);
        }
    }
    Ok(AllocationPlan {
        strata,
        counts,
        total: m,
    })
}

/// Uniform whole-table allocation at cell granularity for a bucketed model:
/// every (bucket, group) cell weighted by its row count, so the generated
/// sample restores the joint (bucket, group) distribution.
pub fn allocate_cells_by_frequency(hist: &Histogram, m: usize) -> AllocationPlan {
    let g = hist.group_count();
    let mut strata = Vec::with_capacity(hist.n_buckets() * g);
    let mut weights = Vec::with_capacity(hist.n_buckets() * g);
    for bucket in 0..hist.n_buckets() {
        for group in 0..g {
            strata.push(Stratum {
                group,
                bucket: Some(bucket),
            });
            weights.push(hist.cell_count(bucket, group) as f64);
        }
    }
    let mut counts = largest_remainder(&weights, m);
    let eligible: Vec<bool> = weights.iter().map(|&w| w > 0.0).collect();
    top_up_empty(&mut counts, &eligible, &weights);
    AllocationPlan {
        strata,
        counts,
        total: m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_histogram, GroupStats, HistogramScheme};
    use crate::data::{Schema, Table};
    use proptest::prelude::*;

    fn raw_stats(counts: Vec<u64>, means: Vec<f64>, stddevs: Vec<f64>) -> GroupStats {
        GroupStats::from_parts(vec!["v".into()], counts, vec![means], vec![stddevs])
    }

    #[test]
    fn uniform_exact_shares() {
        let stats = raw_stats(vec![100, 300, 600], vec![0.0; 3], vec![0.0; 3]);
        let plan = allocate_uniform(&stats, 100);
        assert_eq!(plan.counts(), &[10, 30, 60]);
        assert_eq!(plan.total(), 100);
    }

    #[test]
    fn uniform_largest_remainder_tie_break() {
        let stats = raw_stats(vec![2, 2, 2], vec![0.0; 3], vec![0.0; 3]);
        let plan = allocate_uniform(&stats, 10);
        assert_eq!(plan.counts(), &[4, 3, 3]);
    }

    #[test]
    fn uniform_gauss_proportions() {
        let stats = raw_stats(
            vec![10_000, 20_000, 30_000, 40_000],
            vec![0.0; 4],
            vec![0.0; 4],
        );
        let plan = allocate_uniform(&stats, 1000);
        assert_eq!(plan.counts(), &[100, 200, 300, 400]);
    }

    #[test]
    fn cv_exact_shares() {
        // mu = [10, 5], sigma = [2, 4] -> CV = [0.2, 0.8] -> [20, 80].
        let stats = raw_stats(vec![100, 100], vec![10.0, 5.0], vec![2.0, 4.0]);
        let plan = allocate_cv(&stats, "v", 100, CvKind::Standard).unwrap();
        assert_eq!(plan.counts(), &[20, 80]);
    }

    #[test]
    fn cv_degenerate_group_topped_up() {
        // sigma = [0, 3]: proportional gives [0, 10]; top-up -> [1, 9].
        let stats = raw_stats(vec![10, 10], vec![5.0, 5.0], vec![0.0, 3.0]);
        let plan = allocate_cv(&stats, "v", 10, CvKind::Standard).unwrap();
        assert_eq!(plan.counts(), &[1, 9]);
    }

    #[test]
    fn cv_all_degenerate_falls_back_to_uniform() {
        let stats = raw_stats(vec![10, 30], vec![5.0, 7.0], vec![0.0, 0.0]);
        let plan = allocate_cv(&stats, "v", 4, CvKind::Standard).unwrap();
        assert_eq!(plan.counts(), &[1, 3]);
    }

    #[test]
    fn cv_unknown_column() {
        let stats = raw_stats(vec![10], vec![5.0], vec![0.0]);
        assert!(matches!(
            allocate_cv(&stats, "nope", 4, CvKind::Standard),
            Err(AllocError::UnknownColumn(_))
        ));
    }

    #[test]
    fn cv_negative_mean_uses_magnitude() {
        let stats = raw_stats(vec![100, 100], vec![-10.0, 5.0], vec![2.0, 4.0]);
        let plan = allocate_cv(&stats, "v", 100, CvKind::Standard).unwrap();
        assert_eq!(plan.counts(), &[20, 80]);
    }

    #[test]
    fn mixture_z_cvs_are_nearly_equal() {
        // z ~ U[0, R] per group has CV = (R/sqrt(12))/(R/2) = 0.577
        // regardless of R, so the CV allocation is close to an even split.
        let table = crate::data::gen_gauss(&crate::data::GaussSpec::reference(1e-4, 12)).unwrap();
        let stats = crate::catalog::build_group_stats(&table).unwrap();
        let plan = allocate_cv(&stats, "z", 1000, CvKind::Standard).unwrap();
        for &c in plan.counts() {
            assert!(
                (240..=260).contains(&c),
                "allocation {:?} far from even",
                plan.counts()
            );
        }
        assert_eq!(plan.counts().iter().sum::<usize>(), 1000);
    }

    #[test]
    fn inverted_cv_flips_proportions() {
        // CV weights [0.2, 0.8]; inverted weights [5, 1.25] -> [80, 20].
        let stats = raw_stats(vec![100, 100], vec![10.0, 5.0], vec![2.0, 4.0]);
        let plan = allocate_cv(&stats, "v", 100, CvKind::Inverted).unwrap();
        assert_eq!(plan.counts(), &[80, 20]);
    }

    fn bucket_fixture() -> Histogram {
        // 3 equi-width buckets over v in [0, 30), two groups with distinct
        // spreads inside each bucket.
        let mut values = Vec::new();
        let mut groups = Vec::new();
        for b in 0..3 {
            let base = b as f64 * 10.0;
            for (g, spread) in [(0u32, 1.0f64), (1, 4.0)] {
                for k in 0..8 {
                    let off = if k % 2 == 0 { -spread } else { spread };
                    values.push(base + 5.0 + off);
                    groups.push(g);
                }
            }
        }
        let schema = Schema::with_all_candidates(vec!["v".into()], "g").unwrap();
        let table = Table::from_parts(
            schema,
            vec![values],
            groups,
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        build_histogram(&table, "v", 3, HistogramScheme::EquiWidth).unwrap()
    }

    #[test]
    fn bucketed_budget_split() {
        let hist = bucket_fixture();
        let plan = allocate_bucketed(&hist, &[0, 1, 2], "v", 10, BucketAllocation::Cv(CvKind::Standard)).unwrap();
        let mut per_bucket = [0usize; 3];
        for (s, c) in plan.iter() {
            per_bucket[s.bucket.unwrap()] += c;
        }
        assert_eq!(per_bucket, [4, 3, 3]);
        assert_eq!(plan.counts().iter().sum::<usize>(), 10);
    }

    #[test]
    fn bucketed_empty_rb_is_error() {
        let hist = bucket_fixture();
        assert!(matches!(
            allocate_bucketed(&hist, &[], "v", 10, BucketAllocation::Cv(CvKind::Standard)),
            Err(AllocError::EmptyBuckets)
        ));
    }

    #[test]
    fn bucketed_empty_cells_get_nothing() {
        // Group 1 only exists in bucket 2.
        let mut values = Vec::new();
        let mut groups = Vec::new();
        for b in 0..3 {
            let base = b as f64 * 10.0;
            for k in 0..6 {
                values.push(base + 2.0 + k as f64);
                groups.push(0u32);
            }
        }
        for k in 0..6 {
            values.push(22.0 + k as f64 * 0.5);
            groups.push(1);
        }
        let schema = Schema::with_all_candidates(vec!["v".into()], "g").unwrap();
        let table = Table::from_parts(
            schema,
            vec![values],
            groups,
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let hist = build_histogram(&table, "v", 3, HistogramScheme::EquiWidth).unwrap();
        let plan = allocate_bucketed(&hist, &[0, 1, 2], "v", 30, BucketAllocation::Cv(CvKind::Standard)).unwrap();
        for (s, c) in plan.iter() {
            if s.group == 1 && s.bucket != Some(2) {
                assert_eq!(c, 0, "empty cell {s:?} received samples");
            }
        }
        assert_eq!(plan.counts().iter().sum::<usize>(), 30);
    }

    #[test]
    fn equal_cv_groups_split_evenly_in_bucket() {
        let mut values = Vec::new();
        let mut groups = Vec::new();
        for (g, _) in [(0u32, ()), (1, ())] {
            for k in 0..10 {
                let off = if k % 2 == 0 { -1.0 } else { 1.0 };
                values.push(5.0 + off);
                groups.push(g);
            }
        }
        let schema = Schema::with_all_candidates(vec!["v".into()], "g").unwrap();
        let table = Table::from_parts(
            schema,
            vec![values],
            groups,
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let hist = build_histogram(&table, "v", 1, HistogramScheme::EquiDepth).unwrap();
        let plan = allocate_bucketed(&hist, &[0], "v", 10, BucketAllocation::Cv(CvKind::Standard)).unwrap();
        assert_eq!(plan.counts(), &[5, 5]);
    }

    proptest! {
        #[test]
        fn allocations_sum_to_m(
            counts in proptest::collection::vec(0u64..10_000, 1..12),
            m in 0usize..5_000,
        ) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let g = counts.len();
            let means: Vec<f64> = (0..g).map(|i| (i + 1) as f64).collect();
            let stddevs: Vec<f64> = (0..g).map(|i| (i % 3) as f64).collect();
            let stats = raw_stats(counts.clone(), means, stddevs);
            let uniform = allocate_uniform(&stats, m);
            prop_assert_eq!(uniform.counts().iter().sum::<usize>(), m);
            let cv = allocate_cv(&stats, "v", m, CvKind::Standard).unwrap();
            prop_assert_eq!(cv.counts().iter().sum::<usize>(), m);
        }

        #[test]
        fn uniform_is_monotone_in_group_size(
            counts in proptest::collection::vec(0u64..10_000, 2..10),
            m in 16usize..2_000,
        ) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let stats = raw_stats(
                counts.clone(),
                vec![1.0; counts.len()],
                vec![0.0; counts.len()],
            );
            let plan = allocate_uniform(&stats, m);
            for i in 0..counts.len() {
                for j in 0..counts.len() {
                    if counts[i] > counts[j] {
                        prop_assert!(
                            plan.counts()[i] >= plan.counts()[j],
                            "counts {:?} -> plan {:?}", counts, plan.counts()
                        );
                    }
                }
            }
        }

        #[test]
        fn cv_allocation_is_scale_invariant(
            means in proptest::collection::vec(1f64..100.0, 2..8),
            spreads in proptest::collection::vec(0.5f64..20.0, 2..8),
            m in 1usize..2_000,
            pow in -3i32..4,
        ) {
            let g = means.len().min(spreads.len());
            let means = &means[..g];
            let spreads = &spreads[..g];
            // Power-of-two factors scale float ratios exactly.
            let factor = 2f64.powi(pow);
            let base = raw_stats(vec![16; g], means.to_vec(), spreads.to_vec());
            let scaled = raw_stats(
                vec![16; g],
                means.to_vec(),
                spreads.iter().map(|s| s * factor).collect(),
            );
            let a = allocate_cv(&base, "v", m, CvKind::Standard).unwrap();
            let b = allocate_cv(&scaled, "v", m, CvKind::Standard).unwrap();
            prop_assert_eq!(a.counts(), b.counts());
        }

        #[test]
        fn permuting_groups_permutes_allocation(
            means in proptest::collection::vec(1f64..100.0, 3..7),
            spreads in proptest::collection::vec(0.5f64..20.0, 3..7),
            m in 1usize..1_000,
        ) {
            let g = means.len().min(spreads.len());
            let means = &means[..g];
            let spreads = &spreads[..g];
            // Distinct weights avoid the documented index tie-break.
            let mut ws: Vec<f64> = means.iter().zip(spreads).map(|(m, s)| s / m).collect();
            ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assume!(ws.windows(2).all(|w| (w[1] - w[0]).abs() > 1e-6));

            let fwd = raw_stats(vec![16; g], means.to_vec(), spreads.to_vec());
            let rev_means: Vec<f64> = means.iter().rev().cloned().collect();
            let rev_spreads: Vec<f64> = spreads.iter().rev().cloned().collect();
            let rev = raw_stats(vec![16; g], rev_means, rev_spreads);
            let a = allocate_cv(&fwd, "v", m, CvKind::Standard).unwrap();
            let b = allocate_cv(&rev, "v", m, CvKind::Standard).unwrap();
            let reversed: Vec<usize> = b.counts().iter().rev().cloned().collect();
            prop_assert_eq!(a.counts(), &reversed[..]);
        }
    }
}
