//! Exact execution (full scan; the ground-truth oracle) and approximate
//! execution from generated or baseline samples.
//!
//! Estimators: AVG is the accepted-sample mean (weighted across strata for
//! predicate queries); SUM is the estimated qualifying population times the
//! AVG estimate; COUNT is the estimated qualifying population itself. The
//! qualifying population N~_g is the catalog group count without a
//! predicate, or the covered-fraction-weighted sum of (bucket, group) cell
//! counts with one.

use std::fmt;

use thiserror::Error;

use crate::alloc::{AllocationPlan, BucketAllocation, CvKind};
use crate::catalog::Catalog;
use crate::cgen::GeneratorHandle;
use crate::data::Table;
use crate::model::{validate_against_catalog, ModelError};
use crate::sampler::{
    draw_group_plan, sample_for_predicate, sample_online, OnlineConfig, SampleSource,
    SamplerError,
};
use crate::stat::{critical_value, mean_and_sample_std};

use super::{AggFn, QuerySpec};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("column '{0}' is not an aggregate candidate")]
    NotAggregateCandidate(String),
    #[error("query groups by '{query}' but the data's group column is '{data}'")]
    GroupColumnMismatch { query: String, data: String },
    #[error("predicates on the group column are not supported; use the group label instead")]
    PredicateOnGroupColumn,
    #[error("{0} needs an aggregate column")]
    MissingAggregateColumn(AggFn),
    #[error("predicate queries need a catalog histogram")]
    MissingHistogram,
    #[error("predicate column '{query}' does not match the histogram column '{histogram}'")]
    PredicateColumnMismatch { query: String, histogram: String },
    #[error("online strategy does not support predicates")]
    OnlineWithPredicate,
    #[error("predicate queries need a generated source")]
    BaselineWithPredicate,
    #[error("online strategy needs an online budget (and vice versa)")]
    BudgetMismatch,
    #[error("online config covers {targets} groups but the catalog has {groups}")]
    TargetCountMismatch { targets: usize, groups: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Alloc(#[from] crate::alloc::AllocError),
}

/// One group's estimate: the aggregate value, a confidence-interval
/// half-width, and how many accepted samples produced it.
#[derive(Debug, Clone)]
pub struct GroupEstimate {
    pub label: String,
    pub value: f64,
    pub half_width: f64,
    pub n: usize,
    /// No qualifying rows (exact) or no usable samples (approx).
    pub missing: bool,
    /// Online aggregation stopped at the cap, not at the target width.
    pub cap_hit: bool,
}

/// Allocation and acceptance accounting for `--explain` output.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub plan: AllocationPlan,
    pub allocated: usize,
    pub accepted: usize,
}

impl Diagnostics {
    pub fn efficiency(&self) -> f64 {
        if self.allocated == 0 {
            0.0
        } else {
            self.accepted as f64 / self.allocated as f64
        }
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.plan)?;
        writeln!(
            f,
            "sample efficiency: {}/{} = {:.4}",
            self.accepted,
            self.allocated,
            self.efficiency()
        )
    }
}

#[derive(Debug, Clone)]
pub struct EstimateSet {
    pub groups: Vec<GroupEstimate>,
    pub diagnostics: Option<Diagnostics>,
}

impl EstimateSet {
    pub fn value_for(&self, label: &str) -> Option<&GroupEstimate> {
        self.groups.iter().find(|g| g.label == label)
    }

    /// Per-group values in domain order, missing groups as 0.
    pub fn values(&self) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| if g.missing { 0.0 } else { g.value })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Uniform,
    Cv,
    Online,
    Auto,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Strategy::Uniform),
            "cv" => Ok(Strategy::Cv),
            "online" => Ok(Strategy::Online),
            "auto" => Ok(Strategy::Auto),
            other => Err(format!("unknown strategy '{other}'")),
        }
    }
}

/// Sample budget: a fixed total, or online targets.
#[derive(Debug, Clone)]
pub enum Budget {
    Samples(usize),
    Online(OnlineConfig),
}

#[derive(Clone, Copy)]
pub enum ApproxSource<'a> {
    Generated(&'a GeneratorHandle),
    Baseline(&'a Table),
}

#[derive(Debug, Clone)]
pub struct ApproxOptions {
    pub seed: u64,
    pub cv_kind: CvKind,
    pub confidence: f64,
    pub explain: bool,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            cv_kind: CvKind::Standard,
            confidence: 0.95,
            explain: false,
        }
    }
}

fn validate_exact(spec: &QuerySpec, table: &Table) -> Result<(), QueryError> {
    let schema = table.schema();
    if spec.group_column != schema.group_column() {
        return Err(QueryError::GroupColumnMismatch {
            query: spec.group_column.clone(),
            data: schema.group_column().to_string(),
        });
    }
    if let Some(col) = &spec.agg_column {
        if schema.feature_index(col).is_none() {
            return Err(QueryError::UnknownColumn(col.clone()));
        }
        if !schema.is_aggregate_candidate(col) {
            return Err(QueryError::NotAggregateCandidate(col.clone()));
        }
    } else if spec.agg != AggFn::Count {
        return Err(QueryError::MissingAggregateColumn(spec.agg));
    }
    if let Some(p) = &spec.predicate {
        if p.column == schema.group_column() {
            return Err(QueryError::PredicateOnGroupColumn);
        }
        if schema.feature_index(&p.column).is_none() {
            return Err(QueryError::UnknownColumn(p.column.clone()));
        }
    }
    Ok(())
}

/// Full-scan ground truth. Group means accumulate in row order, which is
/// also the order the census-baseline sampler delivers rows in.
pub fn execute_exact(spec: &QuerySpec, table: &Table) -> Result<EstimateSet, QueryError> {
    validate_exact(spec, table)?;
    let g = table.group_count();
    let agg_idx = spec
        .agg_column
        .as_ref()
        .map(|c| table.schema().feature_index(c).expect("validated"));
    let pred = spec
        .predicate
        .as_ref()
        .map(|p| (table.schema().feature_index(&p.column).expect("validated"), p.lo, p.hi));

    let mut counts = vec![0usize; g];
    let mut sums = vec![0.0f64; g];
    for row in 0..table.n_rows() {
        if let Some((ci, lo, hi)) = pred {
            let v = table.value(row, ci);
            if v < lo || v > hi {
                continue;
            }
        }
        let group = table.group_id(row);
        counts[group] += 1;
        if let Some(ai) = agg_idx {
            sums[group] += table.value(row, ai);
        }
    }
    let groups = (0..g)
        .map(|group| {
            let n = counts[group];
            let missing = n == 0;
            let value = match spec.agg {
                AggFn::Count => n as f64,
                AggFn::Sum => sums[group],
                AggFn::Avg => {
                    if missing {
                        0.0
                    } else {
                        sums[group] / n as f64
                    }
                }
            };
            GroupEstimate {
                label: table.group_label(group).to_string(),
                value: if missing { 0.0 } else { value },
                half_width: 0.0,
                n,
                missing,
                cap_hit: false,
            }
        })
        .collect();
    Ok(EstimateSet {
        groups,
        diagnostics: None,
    })
}

fn validate_approx(spec: &QuerySpec, catalog: &Catalog) -> Result<(), QueryError> {
    if spec.group_column != catalog.group_column() {
        return Err(QueryError::GroupColumnMismatch {
            query: spec.group_column.clone(),
            data: catalog.group_column().to_string(),
        });
    }
    if let Some(col) = &spec.agg_column {
        if catalog.feature_index(col).is_none() {
            return Err(QueryError::UnknownColumn(col.clone()));
        }
        if catalog.stats().column_index(col).is_none() {
            return Err(QueryError::NotAggregateCandidate(col.clone()));
        }
    } else if spec.agg != AggFn::Count {
        return Err(QueryError::MissingAggregateColumn(spec.agg));
    }
    if let Some(p) = &spec.predicate {
        if p.column == catalog.group_column() {
            return Err(QueryError::PredicateOnGroupColumn);
        }
        if catalog.feature_index(&p.column).is_none() {
            return Err(QueryError::UnknownColumn(p.column.clone()));
        }
    }
    Ok(())
}

/// Approximate execution. Without a predicate the strategy picks the
/// per-group allocation (uniform, CV, or online); with a predicate the
/// bucket-targeted path runs (strategy selects the within-bucket split).
pub fn execute_approx(
    spec: &QuerySpec,
    catalog: &Catalog,
    source: ApproxSource<'_>,
    strategy: Strategy,
    budget: Budget,
    opts: &ApproxOptions,
) -> Result<EstimateSet, QueryError> {
    validate_approx(spec, catalog)?;
    if let ApproxSource::Generated(handle) = source {
        validate_against_catalog(handle, catalog)?;
    }
    let strategy = match strategy {
        Strategy::Auto => {
            if spec.agg_column.is_some() {
                Strategy::Cv
            } else {
                Strategy::Uniform
            }
        }
        s => s,
    };
    match (&budget, strategy) {
        (Budget::Online(_), Strategy::Online) | (Budget::Samples(_), Strategy::Uniform)
        | (Budget::Samples(_), Strategy::Cv) => {}
        _ => return Err(QueryError::BudgetMismatch),
    }

    if spec.predicate.is_some() {
        approx_with_predicate(spec, catalog, source, strategy, budget, opts)
    } else {
        approx_whole_groups(spec, catalog, source, strategy, budget, opts)
    }
}

fn approx_whole_groups(
    spec: &QuerySpec,
    catalog: &Catalog,
    source: ApproxSource<'_>,
    strategy: Strategy,
    budget: Budget,
    opts: &ApproxOptions,
) -> Result<EstimateSet, QueryError> {
    let stats = catalog.stats();
    let g = catalog.group_count();

    // COUNT without a predicate is the catalog itself; no sampling.
    if spec.agg == AggFn::Count {
        let groups = (0..g)
            .map(|group| {
                let count = stats.count(group);
                GroupEstimate {
                    label: catalog.group_domain()[group].clone(),
                    value: count as f64,
                    half_width: 0.0,
                    n: 0,
                    missing: count == 0,
                    cap_hit: false,
                }
            })
            .collect();
        return Ok(EstimateSet {
            groups,
            diagnostics: None,
        });
    }

    let agg_col = spec.agg_column.as_ref().expect("validated");
    let agg_idx = catalog.feature_index(agg_col).expect("validated");
    let sampler_source = match source {
        ApproxSource::Generated(h) => SampleSource::Generated(h),
        ApproxSource::Baseline(t) => SampleSource::DataRandom(t),
    };

    let (batches, cap_hit, plan) = match (strategy, budget) {
        (Strategy::Online, Budget::Online(config)) => {
            if config.targets.len() != g {
                return Err(QueryError::TargetCountMismatch {
                    targets: config.targets.len(),
                    groups: g,
                });
            }
            let (batches, trace) = sample_online(sampler_source, &config, agg_idx, opts.seed)?;
            (batches, trace.cap_hit, None)
        }
        (Strategy::Uniform, Budget::Samples(m)) => {
            let plan = crate::alloc::allocate_uniform(stats, m);
            let batches = draw_group_plan(sampler_source, stats, &plan, opts.seed)?;
            (batches, vec![false; g], Some(plan))
        }
        (Strategy::Cv, Budget::Samples(m)) => {
            let plan = crate::alloc::allocate_cv(stats, agg_col, m, opts.cv_kind)?;
            let batches = draw_group_plan(sampler_source, stats, &plan, opts.seed)?;
            (batches, vec![false; g], Some(plan))
        }
        _ => return Err(QueryError::BudgetMismatch),
    };

    let z = critical_value(opts.confidence);
    let groups = batches
        .iter()
        .map(|batch| {
            let group = batch.group;
            let population = stats.count(group);
            let values = batch.column_values(agg_idx);
            let n = values.len();
            let missing = n == 0 || population == 0;
            let (mean, std) = mean_and_sample_std(&values);
            let hw_mean = if missing {
                0.0
            } else if n < 2 {
                f64::INFINITY
            } else {
                z * std / (n as f64).sqrt()
            };
            let (value, half_width) = match spec.agg {
                AggFn::Avg => (mean, hw_mean),
                AggFn::Sum => (population as f64 * mean, population as f64 * hw_mean),
                AggFn::Count => unreachable!("handled above"),
            };
            GroupEstimate {
                label: catalog.group_domain()[group].clone(),
                value: if missing { 0.0 } else { value },
                half_width,
                n,
                missing,
                cap_hit: cap_hit[group],
            }
        })
        .collect();

    let allocated: usize = batches.iter().map(|b| b.len()).sum();
    let diagnostics = if opts.explain {
        plan.map(|plan| Diagnostics {
            plan,
            allocated,
            accepted: allocated,
        })
    } else {
        None
    };
    Ok(EstimateSet {
        groups,
        diagnostics,
    })
}

fn approx_with_predicate(
    spec: &QuerySpec,
    catalog: &Catalog,
    source: ApproxSource<'_>,
    strategy: Strategy,
    budget: Budget,
    opts: &ApproxOptions,
) -> Result<EstimateSet, QueryError> {
    if strategy == Strategy::Online {
        return Err(QueryError::OnlineWithPredicate);
    }
    let handle = match source {
        ApproxSource::Generated(h) => h,
        ApproxSource::Baseline(_) => return Err(QueryError::BaselineWithPredicate),
    };
    let hist = catalog.histogram().ok_or(QueryError::MissingHistogram)?;
    let pred = spec.predicate.as_ref().expect("caller checked");
    if pred.column != hist.column() {
        return Err(QueryError::PredicateColumnMismatch {
            query: pred.column.clone(),
            histogram: hist.column().to_string(),
        });
    }
    let g = catalog.group_count();
    let rb = hist.intersecting(pred.lo, pred.hi);

    // Estimated qualifying rows per group under the within-bucket
    // uniformity assumption.
    let qualifying: Vec<f64> = (0..g)
        .map(|group| {
            rb.iter()
                .map(|&b| {
                    hist.cell_count(b, group) as f64 * hist.covered_fraction(b, pred.lo, pred.hi)
                })
                .sum()
        })
        .collect();

    // COUNT(*) with a predicate needs no samples at all.
    if spec.agg == AggFn::Count {
        let groups = (0..g)
            .map(|group| GroupEstimate {
                label: catalog.group_domain()[group].clone(),
                value: qualifying[group],
                half_width: 0.0,
                n: 0,
                missing: qualifying[group] <= 0.0,
                cap_hit: false,
            })
            .collect();
        return Ok(EstimateSet {
            groups,
            diagnostics: None,
        });
    }

    let agg_col = spec.agg_column.as_ref().expect("validated");
    let agg_idx = catalog.feature_index(agg_col).expect("validated");
    let pred_idx = catalog.feature_index(&pred.column).expect("validated");
    let m = match budget {
        Budget::Samples(m) => m,
        Budget::Online(_) => return Err(QueryError::BudgetMismatch),
    };
    let within = match strategy {
        Strategy::Uniform => BucketAllocation::Frequency,
        _ => BucketAllocation::Cv(opts.cv_kind),
    };
    let samples = sample_for_predicate(
        handle, hist, pred_idx, pred.lo, pred.hi, agg_col, m, opts.seed, within,
    )?;

    let z = critical_value(opts.confidence);
    let mut groups = Vec::with_capacity(g);
    #[allow(clippy::needless_range_loop)]
    for group in 0..g {
        // Stratified mean over buckets: accepted-sample cell means weighted
        // by estimated qualifying rows; strata with no accepted samples drop
        // out and the weights renormalize.
        let mut weight_sum = 0.0;
        let mut weighted_mean = 0.0;
        let mut pooled: Vec<f64> = Vec::new();
        for stratum in samples.strata.iter().filter(|s| s.group == group) {
            let vals = stratum.accepted_values(agg_idx);
            pooled.extend_from_slice(&vals);
            if vals.is_empty() {
                continue;
            }
            let w = hist.cell_count(stratum.bucket, group) as f64
                * hist.covered_fraction(stratum.bucket, pred.lo, pred.hi);
            if w > 0.0 {
                let (mean, _) = mean_and_sample_std(&vals);
                weighted_mean += w * mean;
                weight_sum += w;
            }
        }
        let n = pooled.len();
        let missing = qualifying[group] <= 0.0 || n == 0 || weight_sum <= 0.0;
        let mean = if missing { 0.0 } else { weighted_mean / weight_sum };
        let (_, pooled_std) = mean_and_sample_std(&pooled);
        let hw_mean = if missing {
            0.0
        } else if n < 2 {
            f64::INFINITY
        } else {
            z * pooled_std / (n as f64).sqrt()
        };
        let (value, half_width) = match spec.agg {
            AggFn::Avg => (mean, hw_mean),
            AggFn::Sum => (qualifying[group] * mean, qualifying[group] * hw_mean),
            AggFn::Count => unreachable!("handled above"),
        };
        groups.push(GroupEstimate {
            label: catalog.group_domain()[group].clone(),
            value,
            half_width,
            n: if missing { 0 } else { n },
            missing,
            cap_hit: false,
        });
    }

    let diagnostics = if opts.explain {
        samples.plan.clone().map(|plan| Diagnostics {
            plan,
            allocated: samples.allocated,
            accepted: samples.accepted,
        })
    } else {
        None
    };
    Ok(EstimateSet {
        groups,
        diagnostics,
    })
}
