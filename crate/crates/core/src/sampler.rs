//! Turns allocation plans plus a sample source into per-stratum sample sets:
//! uniform sampling, CV-stratified sampling, the online-aggregation loop,
//! and bucket-targeted generation for predicate queries.
//!
//! The generated source never touches the base table. The data-random source
//! exists as the evaluation baseline; it scans the table once per call
//! (selection sampling in row order), which is exactly the cost the
//! generated path avoids.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::alloc::{
    allocate_bucketed, allocate_cv, allocate_uniform, AllocError, AllocationPlan,
    BucketAllocation, CvKind,
};
use crate::catalog::{GroupStats, Histogram};
use crate::cgen::{CgenError, GeneratorHandle, SampleBatch};
use crate::data::Table;
use crate::rng::{mix, stream, tag};
use crate::stat::{critical_value, Welford};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error(transparent)]
    Cgen(#[from] CgenError),
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error("invalid online config: {0}")]
    InvalidOnlineConfig(String),
    #[error("source has {got} groups but {expected} were requested")]
    GroupCountMismatch { got: usize, expected: usize },
    #[error("aggregate column index {0} out of range ({1} feature columns)")]
    ColumnOutOfRange(usize, usize),
}

/// Where samples come from: the trained generator, or simple random sampling
/// over a base table (the evaluation baseline).
#[derive(Clone, Copy)]
pub enum SampleSource<'a> {
    Generated(&'a GeneratorHandle),
    DataRandom(&'a Table),
}

impl SampleSource<'_> {
    fn group_count(&self) -> usize {
        match self {
            SampleSource::Generated(h) => h.group_count(),
            SampleSource::DataRandom(t) => t.group_count(),
        }
    }
}

/// Per-group samples proportional to group frequency (uniform sampling).
pub fn sample_uniform(
    source: SampleSource<'_>,
    stats: &GroupStats,
    m: usize,
    seed: u64,
) -> Result<Vec<SampleBatch>, SamplerError> {
    let plan = allocate_uniform(stats, m);
    draw_group_plan(source, stats, &plan, seed)
}

/// Per-group samples proportional to the coefficient of variation of the
/// aggregate column (CVOPT stratified sampling).
pub fn sample_stratified(
    source: SampleSource<'_>,
    stats: &GroupStats,
    column: &str,
    m: usize,
    seed: u64,
    kind: CvKind,
) -> Result<Vec<SampleBatch>, SamplerError> {
    let plan = allocate_cv(stats, column, m, kind)?;
    draw_group_plan(source, stats, &plan, seed)
}

/// Materializes a per-group plan from either source. Generated batch sizes
/// equal the plan exactly; data-random batches are clamped to the group
/// population (with a warning) since sampling is without replacement.
pub fn draw_group_plan(
    source: SampleSource<'_>,
    stats: &GroupStats,
    plan: &AllocationPlan,
    seed: u64,
) -> Result<Vec<SampleBatch>, SamplerError> {
    let g = stats.group_count();
    if source.group_count() != g {
        return Err(SamplerError::GroupCountMismatch {
            got: source.group_count(),
            expected: g,
        });
    }
    match source {
        SampleSource::Generated(handle) => {
            let mut batches = Vec::with_capacity(g);
            for (stratum, count) in plan.iter() {
                batches.push(handle.generate(stratum.group, count, seed)?);
            }
            Ok(batches)
        }
        SampleSource::DataRandom(table) => {
            let mut want: Vec<usize> = vec![0; g];
            for (stratum, count) in plan.iter() {
                want[stratum.group] += count;
            }
            for (group, w) in want.iter_mut().enumerate() {
                let pop = stats.count(group) as usize;
                if *w > pop {
                    log::warn!(
                        "group {group}: allocation {w} exceeds population {pop}; clamping"
                    );
                    *w = pop;
                }
            }
            Ok(sample_table_by_group(table, &want, seed))
        }
    }
}

/// Selection sampling without replacement inside each group, in one scan
/// over the table. Rows come out in table order, so a census (want = group
/// population) returns every row exactly once, in order.
fn sample_table_by_group(table: &Table, want: &[usize], seed: u64) -> Vec<SampleBatch> {
    let g = want.len();
    let mut rngs: Vec<ChaCha12Rng> = (0..g)
        .map(|group| stream(seed, &[tag::DATA_SAMPLE, group as u64]))
        .collect();
    let mut remaining_pop = vec![0usize; g];
    for &gid in table.group_ids() {
        remaining_pop[gid as usize] += 1;
    }
    let mut remaining_take = want.to_vec();
    let mut rows: Vec<Vec<Vec<f64>>> = vec![Vec::new(); g];
    for row in 0..table.n_rows() {
        let group = table.group_id(row);
        if remaining_take[group] > 0 {
            let p = remaining_take[group] as f64 / remaining_pop[group] as f64;
            if rngs[group].random::<f64>() < p {
                rows[group].push(table.feature_row(row));
                remaining_take[group] -= 1;
            }
        }
        remaining_pop[group] -= 1;
    }
    rows.into_iter()
        .enumerate()
        .map(|(group, rows)| SampleBatch {
            requested: want[group],
            rows,
            group,
            bucket: None,
        })
        .collect()
}

/// Ordered selection sample of `m` row indices over the whole table.
pub fn table_uniform_sample(table: &Table, m: usize, seed: u64) -> Vec<usize> {
    let n = table.n_rows();
    let mut take = m.min(n);
    let mut rng = stream(seed, &[tag::DATA_SAMPLE, u64::MAX]);
    let mut out = Vec::with_capacity(take);
    for row in 0..n {
        if take == 0 {
            break;
        }
        let p = take as f64 / (n - row) as f64;
        if rng.random::<f64>() < p {
            out.push(row);
            take -= 1;
        }
    }
    out
}

/// Termination targets for the online-aggregation loop.
#[derive(Debug, Clone)]
pub struct OnlineConfig {
    /// Target confidence-interval half-width per group, in units of the
    /// aggregate column.
    pub targets: Vec<f64>,
    pub confidence: f64,
    /// No half-width is trusted before a group has this many samples.
    pub min_samples: usize,
    /// Hard cap per group; guarantees termination.
    pub cap: usize,
}

impl OnlineConfig {
    pub fn new(targets: Vec<f64>) -> Self {
        Self {
            targets,
            confidence: 0.95,
            min_samples: 30,
            cap: 10_000,
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: &str| Err(SamplerError::InvalidOnlineConfig(m.to_string()));
        if self.targets.is_empty() {
            return bad("no target half-widths");
        }
        if !self.targets.iter().all(|&t| t > 0.0) {
            return bad("target half-widths must be positive");
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad("confidence must be in (0, 1)");
        }
        if self.min_samples < 2 {
            return bad("min_samples must be at least 2");
        }
        if self.cap < self.min_samples {
            return bad("cap must be at least min_samples");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineTraceRow {
    pub round: usize,
    pub group: usize,
    pub n: usize,
    pub half_width: f64,
}

#[derive(Debug, Clone, Default)]
pub struct OnlineTrace {
    pub rows: Vec<OnlineTraceRow>,
    pub cap_hit: Vec<bool>,
}

/// Round-robin online aggregation: one sample per active group per round;
/// a group deactivates once its confidence-interval half-width drops below
/// its target (or it hits the cap). Per-group draws use independent streams
/// keyed by (seed, round, group), so internal batching cannot change
/// results.
pub fn sample_online(
    source: SampleSource<'_>,
    config: &OnlineConfig,
    agg_idx: usize,
    seed: u64,
) -> Result<(Vec<SampleBatch>, OnlineTrace), SamplerError> {
    config.validate()?;
    let g = config.targets.len();
    if source.group_count() != g {
        return Err(SamplerError::GroupCountMismatch {
            got: source.group_count(),
            expected: g,
        });
    }
    let feature_count = match source {
        SampleSource::Generated(h) => h.feature_count(),
        SampleSource::DataRandom(t) => t.schema().feature_columns().len(),
    };
    if agg_idx >= feature_count {
        return Err(SamplerError::ColumnOutOfRange(agg_idx, feature_count));
    }
    let z = critical_value(config.confidence);

    // Table source: index the groups once up front, then draw with
    // replacement per round.
    let mut table_index: Vec<Vec<usize>> = Vec::new();
    let mut table_rngs: Vec<ChaCha12Rng> = Vec::new();
    if let SampleSource::DataRandom(table) = source {
        table_index = vec![Vec::new(); g];
        for row in 0..table.n_rows() {
            table_index[table.group_id(row)].push(row);
        }
        table_rngs = (0..g)
            .map(|group| stream(seed, &[tag::ONLINE, group as u64]))
            .collect();
    }

    let mut rows: Vec<Vec<Vec<f64>>> = vec![Vec::new(); g];
    let mut welford: Vec<Welford> = vec![Welford::new(); g];
    let mut active: Vec<bool> = vec![true; g];
    let mut trace = OnlineTrace {
        rows: Vec::new(),
        cap_hit: vec![false; g],
    };
    // Empty groups in a table source can never produce a sample.
    if let SampleSource::DataRandom(_) = source {
        for (group, idx) in table_index.iter().enumerate() {
            if idx.is_empty() {
                active[group] = false;
            }
        }
    }

    let mut round = 0usize;
    while active.iter().any(|&a| a) {
        for group in 0..g {
            if !active[group] {
                continue;
            }
            let row = match source {
                SampleSource::Generated(handle) => {
                    let call_seed = mix(seed, &[tag::ONLINE, round as u64]);
                    let batch = handle.generate(group, 1, call_seed)?;
                    batch.rows.into_iter().next().expect("one sample")
                }
                SampleSource::DataRandom(table) => {
                    let idx = &table_index[group];
                    let pick = idx[table_rngs[group].random_range(0..idx.len())];
                    table.feature_row(pick)
                }
            };
            welford[group].push(row[agg_idx]);
            rows[group].push(row);
            let n = welford[group].count() as usize;
            if n >= config.min_samples {
                let half_width = z * welford[group].sample_std() / (n as f64).sqrt();
                trace.rows.push(OnlineTraceRow {
                    round,
                    group,
                    n,
                    half_width,
                });
                if half_width < config.targets[group] {
                    active[group] = false;
                } else if n >= config.cap {
                    active[group] = false;
                    trace.cap_hit[group] = true;
                }
            }
        }
        round += 1;
    }

    let batches = rows
        .into_iter()
        .enumerate()
        .map(|(group, rows)| SampleBatch {
            requested: rows.len(),
            rows,
            group,
            bucket: None,
        })
        .collect();
    Ok((batches, trace))
}

/// One stratum of a predicate-targeted sample: the generated batch plus the
/// per-row predicate verdicts.
#[derive(Debug, Clone)]
pub struct PredicateStratum {
    pub bucket: usize,
    pub group: usize,
    pub batch: SampleBatch,
    /// Per-row: does the generated predicate-column value fall in [l, r]?
    pub accepted: Vec<bool>,
    pub allocated: usize,
}

impl PredicateStratum {
    pub fn accepted_count(&self) -> usize {
        self.accepted.iter().filter(|&&a| a).count()
    }

    /// Values of `col` over the accepted rows only.
    pub fn accepted_values(&self, col: usize) -> Vec<f64> {
        self.batch
            .rows
            .iter()
            .zip(&self.accepted)
            .filter(|(_, &keep)| keep)
            .map(|(row, _)| row[col])
            .collect()
    }
}

/// Output of the predicate sampling path (bucket-targeted generation).
#[derive(Debug, Clone, Default)]
pub struct PredicateSamples {
    pub strata: Vec<PredicateStratum>,
    pub relevant_buckets: Vec<usize>,
    /// True when no bucket intersects the predicate range.
    pub empty: bool,
    pub allocated: usize,
    pub accepted: usize,
    pub plan: Option<AllocationPlan>,
}

impl PredicateSamples {
    /// Fraction of generated rows that satisfied the predicate.
    pub fn efficiency(&self) -> f64 {
        if self.allocated == 0 {
            0.0
        } else {
            self.accepted as f64 / self.allocated as f64
        }
    }
}

/// Generates targeted samples for a range predicate `l <= C <= r` on the
/// histogram column: equal per-bucket budgets over the intersecting buckets,
/// `within`-weighted allocation across groups inside each bucket, then a
/// predicate filter on the generated rows. Rejected rows are kept for
/// accounting.
#[allow(clippy::too_many_arguments)]
pub fn sample_for_predicate(
    handle: &GeneratorHandle,
    hist: &Histogram,
    pred_idx: usize,
    lo: f64,
    hi: f64,
    agg_column: &str,
    m: usize,
    seed: u64,
    within: BucketAllocation,
) -> Result<PredicateSamples, SamplerError> {
    if pred_idx >= handle.feature_count() {
        return Err(SamplerError::ColumnOutOfRange(
            pred_idx,
            handle.feature_count(),
        ));
    }
    let rb = hist.intersecting(lo, hi);
    if rb.is_empty() {
        return Ok(PredicateSamples {
            empty: true,
            ..PredicateSamples::default()
        });
    }
    let plan = allocate_bucketed(hist, &rb, agg_column, m, within)?;
    let mut strata = Vec::with_capacity(plan.len());
    let mut allocated = 0usize;
    let mut accepted_total = 0usize;
    for (stratum, count) in plan.iter() {
        let bucket = stratum.bucket.expect("bucketed plan");
        let batch = handle.generate_bucketed(bucket, stratum.group, count, seed)?;
        let accepted: Vec<bool> = batch
            .rows
            .iter()
            .map(|row| {
                let v = row[pred_idx];
                v >= lo && v <= hi
            })
            .collect();
        allocated += count;
        accepted_total += accepted.iter().filter(|&&a| a).count();
        strata.push(PredicateStratum {
            bucket,
            group: stratum.group,
            batch,
            accepted,
            allocated: count,
        });
    }
    Ok(PredicateSamples {
        strata,
        relevant_buckets: rb,
        empty: false,
        allocated,
        accepted: accepted_total,
        plan: Some(plan),
    })
}
