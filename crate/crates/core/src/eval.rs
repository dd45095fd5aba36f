//! Accuracy metrics and the benchmark harness: selectivity sweeps, online
//! confidence-interval shrinkage, sample-distribution snapshots, and
//! sampling-efficiency timings. Everything emits plot-ready rows.

use std::time::Instant;

use thiserror::Error;

use crate::alloc::{allocate_cells_by_frequency, allocate_uniform};
use crate::catalog::Catalog;
use crate::cgen::GeneratorHandle;
use crate::data::Table;
use crate::model::ModelError;
use crate::query::{
    execute_approx, execute_exact, ApproxOptions, ApproxSource, Budget, EstimateSet, QueryError,
    QuerySpec, Strategy,
};
use crate::rng::{mix, stream, tag};
use crate::sampler::{draw_group_plan, table_uniform_sample, SampleSource, SamplerError};
use crate::stat::{critical_value, mean_and_sample_std};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("group domains differ: {est} estimates vs {truth} truths")]
    DomainMismatch { est: usize, truth: usize },
    #[error(
        "could not hit selectivity band ({lo}, {hi}] after {tries} tries; achieved {achieved:?}"
    )]
    BandInfeasible {
        lo: f64,
        hi: f64,
        tries: usize,
        achieved: Vec<f64>,
    },
    #[error("selectivity band must satisfy 0 < lo < hi <= 1")]
    BadBand,
    #[error("query template needs a predicate column")]
    NoPredicateTemplate,
    #[error("sweep of sample sizes is empty")]
    EmptySweep,
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Cgen(#[from] crate::cgen::CgenError),
}

/// Average relative error over groups with positive truth. `None` when no
/// group has positive truth (the metric is undefined there, never zero).
pub fn are(est: &[f64], truth: &[f64]) -> Result<Option<f64>, EvalError> {
    if est.len() != truth.len() {
        return Err(EvalError::DomainMismatch {
            est: est.len(),
            truth: truth.len(),
        });
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for (&e, &t) in est.iter().zip(truth) {
        if t > 0.0 {
            sum += (e - t).abs() / t;
            count += 1;
        }
    }
    Ok(if count == 0 { None } else { Some(sum / count as f64) })
}

/// Mean squared error over all groups; missing estimates enter as 0.
pub fn mse(est: &[f64], truth: &[f64]) -> Result<f64, EvalError> {
    if est.len() != truth.len() {
        return Err(EvalError::DomainMismatch {
            est: est.len(),
            truth: truth.len(),
        });
    }
    if est.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = est
        .iter()
        .zip(truth)
        .map(|(&e, &t)| (e - t).powi(2))
        .sum();
    Ok(sum / est.len() as f64)
}

/// Both accuracy metrics plus the per-group error breakdown. `are` is None
/// (undefined, never zero) when no group has positive truth; groups with
/// nonpositive truth are listed in `excluded_groups` and carry a None
/// relative error.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub are: Option<f64>,
    pub mse: f64,
    pub abs_errors: Vec<f64>,
    pub rel_errors: Vec<Option<f64>>,
    pub excluded_groups: Vec<usize>,
}

pub fn metrics_report(est: &[f64], truth: &[f64]) -> Result<MetricsReport, EvalError> {
    let are = are(est, truth)?;
    let mse = mse(est, truth)?;
    let abs_errors: Vec<f64> = est.iter().zip(truth).map(|(&e, &t)| (e - t).abs()).collect();
    let rel_errors: Vec<Option<f64>> = est
        .iter()
        .zip(truth)
        .map(|(&e, &t)| if t > 0.0 { Some((e - t).abs() / t) } else { None })
        .collect();
    let excluded_groups: Vec<usize> = truth
        .iter()
        .enumerate()
        .filter(|(_, &t)| t <= 0.0)
        .map(|(i, _)| i)
        .collect();
    Ok(MetricsReport {
        are,
        mse,
        abs_errors,
        rel_errors,
        excluded_groups,
    })
}

/// Uniform whole-table generated sampling: group-proportional for a
/// group-label model, cell-proportional for a bucketed model (restoring the
/// joint distribution either way); rows are then filtered by the predicate
/// if one is present and reduced to per-group estimates like the main
/// estimator.
pub fn uniform_generated_estimate(
    spec: &QuerySpec,
    catalog: &Catalog,
    handle: &GeneratorHandle,
    m: usize,
    seed: u64,
) -> Result<EstimateSet, EvalError> {
    crate::model::validate_against_catalog(handle, catalog)?;
    let agg_idx = spec
        .agg_column
        .as_ref()
        .and_then(|c| catalog.feature_index(c));
    let pred = spec.predicate.as_ref().map(|p| {
        (
            catalog.feature_index(&p.column).expect("validated upstream"),
            p.lo,
            p.hi,
        )
    });

    let batches: Vec<crate::cgen::SampleBatch> = if handle.has_bucket_labels() {
        let hist = catalog.histogram().ok_or(QueryError::MissingHistogram)?;
        let plan = allocate_cells_by_frequency(hist, m);
        let mut out = Vec::new();
        for (stratum, count) in plan.iter() {
            out.push(handle.generate_bucketed(
                stratum.bucket.expect("cell plan"),
                stratum.group,
                count,
                seed,
            )?);
        }
        out
    } else {
        let plan = allocate_uniform(catalog.stats(), m);
        draw_group_plan(SampleSource::Generated(handle), catalog.stats(), &plan, seed)?
    };

    let g = catalog.group_count();
    let n_total = catalog.rows() as f64;
    let mut per_group: Vec<Vec<f64>> = vec![Vec::new(); g];
    let mut allocated = 0usize;
    for batch in &batches {
        allocated += batch.len();
        for row in &batch.rows {
            if let Some((ci, lo, hi)) = pred {
                if row[ci] < lo || row[ci] > hi {
                    continue;
                }
            }
            per_group[batch.group].push(agg_idx.map_or(0.0, |ai| row[ai]));
        }
    }

    let z = critical_value(0.95);
    let groups = (0..g)
        .map(|group| {
            let vals = &per_group[group];
            let n = vals.len();
            let share = if allocated == 0 {
                0.0
            } else {
                n as f64 / allocated as f64
            };
            let (mean, std) = mean_and_sample_std(vals);
            let hw_mean = if n < 2 {
                if n == 0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                z * std / (n as f64).sqrt()
            };
            let missing = n == 0;
            let (value, half_width) = match spec.agg {
                crate::query::AggFn::Avg => (mean, hw_mean),
                crate::query::AggFn::Sum => {
                    (n_total * share * mean, n_total * share * hw_mean)
                }
                crate::query::AggFn::Count => (n_total * share, 0.0),
            };
            crate::query::GroupEstimate {
                label: catalog.group_domain()[group].clone(),
                value: if missing { 0.0 } else { value },
                half_width,
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

/// The classic random-sample baseline: a uniform whole-table sample,
/// filtered by the predicate, reduced per group. COUNT and SUM scale by the
/// sampled qualifying share.
pub fn random_baseline_estimate(
    spec: &QuerySpec,
    table: &Table,
    m: usize,
    seed: u64,
) -> Result<EstimateSet, EvalError> {
    let agg_idx = spec
        .agg_column
        .as_ref()
        .and_then(|c| table.schema().feature_index(c));
    let pred = spec.predicate.as_ref().map(|p| {
        (
            table
                .schema()
                .feature_index(&p.column)
                .expect("validated upstream"),
            p.lo,
            p.hi,
        )
    });
    let idx = table_uniform_sample(table, m, seed);
    let drawn = idx.len();
    let g = table.group_count();
    let mut per_group: Vec<Vec<f64>> = vec![Vec::new(); g];
    for &row in &idx {
        if let Some((ci, lo, hi)) = pred {
            let v = table.value(row, ci);
            if v < lo || v > hi {
                continue;
            }
        }
        per_group[table.group_id(row)].push(agg_idx.map_or(0.0, |ai| table.value(row, ai)));
    }
    let z = critical_value(0.95);
    let n_total = table.n_rows() as f64;
    let groups = (0..g)
        .map(|group| {
            let vals = &per_group[group];
            let n = vals.len();
            let share = if drawn == 0 { 0.0 } else { n as f64 / drawn as f64 };
            let (mean, std) = mean_and_sample_std(vals);
            let hw_mean = if n < 2 {
                if n == 0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                z * std / (n as f64).sqrt()
            };
            let missing = n == 0;
            let (value, half_width) = match spec.agg {
                crate::query::AggFn::Avg => (mean, hw_mean),
                crate::query::AggFn::Sum => (n_total * share * mean, n_total * share * hw_mean),
                crate::query::AggFn::Count => (n_total * share, 0.0),
            };
            crate::query::GroupEstimate {
                label: table.group_label(group).to_string(),
                value: if missing { 0.0 } else { value },
                half_width,
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

/// Per-query accuracy of the methods compared in the selectivity study.
#[derive(Debug, Clone)]
pub struct SelectivityReport {
    pub query_index: usize,
    pub lo: f64,
    pub hi: f64,
    pub selectivity: f64,
    pub m: usize,
    pub targeted: MetricsReport,
    pub uniform_generated: MetricsReport,
    pub random: MetricsReport,
    /// Accepted / allocated under the bucket-targeted path.
    pub efficiency_targeted: f64,
}

/// Draws `k` random range predicates whose exact selectivity lands in
/// `(band.0, band.1]`, then scores the bucket-targeted estimator, the
/// uniform generated baseline, and the random-sample baseline against the
/// exact answer on each.
#[allow(clippy::too_many_arguments)]
pub fn bench_selectivity(
    table: &Table,
    catalog: &Catalog,
    handle: &GeneratorHandle,
    template: &QuerySpec,
    band: (f64, f64),
    k: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<SelectivityReport>, EvalError> {
    if !(band.0 >= 0.0 && band.0 < band.1 && band.1 <= 1.0) {
        return Err(EvalError::BadBand);
    }
    let pred_col = template
        .predicate
        .as_ref()
        .map(|p| p.column.clone())
        .ok_or(EvalError::NoPredicateTemplate)?;
    let pred_idx = table
        .schema()
        .feature_index(&pred_col)
        .ok_or_else(|| QueryError::UnknownColumn(pred_col.clone()))?;
    let mut sorted = table.column(pred_idx).to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN in data"));
    let n = sorted.len();

    let mut rng = stream(seed, &[tag::BENCH, 1]);
    let mut reports = Vec::with_capacity(k);
    let max_tries = 64 * k.max(1);
    let mut tries = 0usize;
    let mut achieved = Vec::new();
    for query_index in 0..k {
        let mut found = None;
        while found.is_none() {
            tries += 1;
            if tries > max_tries {
                achieved.sort_by(|a: &f64, b: &f64| a.partial_cmp(b).unwrap());
                achieved.dedup();
                return Err(EvalError::BandInfeasible {
                    lo: band.0,
                    hi: band.1,
                    tries,
                    achieved,
                });
            }
            use rand::Rng;
            let target = band.0 + (band.1 - band.0) * rng.random::<f64>();
            let span = ((target * n as f64).round() as usize).clamp(1, n);
            let start = rng.random_range(0..=n - span);
            let lo = sorted[start];
            let hi = sorted[start + span - 1];
            // Ties can widen the realized selectivity; measure exactly.
            let below = sorted.partition_point(|&v| v < lo);
            let through = sorted.partition_point(|&v| v <= hi);
            let selectivity = (through - below) as f64 / n as f64;
            if selectivity > band.0 && selectivity <= band.1 {
                found = Some((lo, hi, selectivity));
            } else {
                achieved.push(selectivity);
            }
        }
        let (lo, hi, selectivity) = found.expect("loop exits on success");
        let mut spec = template.clone();
        spec.predicate = Some(crate::query::Predicate {
            column: pred_col.clone(),
            lo,
            hi,
        });
        let query_seed = mix(seed, &[tag::BENCH, query_index as u64]);

        let exact = execute_exact(&spec, table)?;
        let truth = exact.values();
        let opts = ApproxOptions {
            seed: query_seed,
            explain: true,
            ..ApproxOptions::default()
        };
        let targeted = execute_approx(
            &spec,
            catalog,
            ApproxSource::Generated(handle),
            Strategy::Cv,
            Budget::Samples(m),
            &opts,
        )?;
        let uniform = uniform_generated_estimate(&spec, catalog, handle, m, query_seed)?;
        let random = random_baseline_estimate(&spec, table, m, query_seed)?;

        let efficiency = targeted
            .diagnostics
            .as_ref()
            .map_or(0.0, |d| d.efficiency());
        reports.push(SelectivityReport {
            query_index,
            lo,
            hi,
            selectivity,
            m,
            targeted: metrics_report(&targeted.values(), &truth)?,
            uniform_generated: metrics_report(&uniform.values(), &truth)?,
            random: metrics_report(&random.values(), &truth)?,
            efficiency_targeted: efficiency,
        });
    }
    Ok(reports)
}

/// Mean of the defined AREs in a report column.
pub fn mean_are(reports: &[SelectivityReport], pick: impl Fn(&SelectivityReport) -> Option<f64>) -> Option<f64> {
    let vals: Vec<f64> = reports.iter().filter_map(pick).collect();
    if vals.is_empty() {
        None
    } else {
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

/// One row of the online-aggregation sweep: confidence-interval half-width
/// and half-width/|mean| ratio for one group at one sample size.
#[derive(Debug, Clone)]
pub struct OnlineSweepRow {
    pub n: usize,
    pub group: String,
    pub half_width: f64,
    pub ratio: f64,
}

/// Generates max(sweep) rows per group once, then reports the running
/// confidence interval at each sweep point, mirroring how online
/// aggregation accumulates samples. Bucketed models draw each row's bucket
/// label from the group's cell-count marginal.
pub fn bench_online(
    handle: &GeneratorHandle,
    catalog: &Catalog,
    agg_column: &str,
    sweep: &[usize],
    confidence: f64,
    seed: u64,
) -> Result<Vec<OnlineSweepRow>, EvalError> {
    crate::model::validate_against_catalog(handle, catalog)?;
    if sweep.is_empty() {
        return Err(EvalError::EmptySweep);
    }
    let agg_idx = catalog
        .feature_index(agg_column)
        .ok_or_else(|| QueryError::UnknownColumn(agg_column.to_string()))?;
    let max_n = *sweep.iter().max().expect("nonempty");
    let z = critical_value(confidence);
    let mut rows = Vec::with_capacity(sweep.len() * catalog.group_count());
    for group in 0..catalog.group_count() {
        let group_seed = mix(seed, &[tag::BENCH, group as u64]);
        let values = if handle.has_bucket_labels() {
            generate_group_marginal(handle, catalog, group, max_n, group_seed)?
                .iter()
                .map(|row| row[agg_idx])
                .collect::<Vec<f64>>()
        } else {
            handle
                .generate(group, max_n, group_seed)?
                .column_values(agg_idx)
        };
        if values.is_empty() {
            continue;
        }
        for &n in sweep {
            let n = n.min(values.len()).max(2);
            let (mean, std) = mean_and_sample_std(&values[..n]);
            let half_width = z * std / (n as f64).sqrt();
            rows.push(OnlineSweepRow {
                n,
                group: catalog.group_domain()[group].clone(),
                half_width,
                ratio: half_width / mean.abs(),
            });
        }
    }
    Ok(rows)
}

/// Rows from a bucketed model distributed like one group's real rows:
/// bucket labels drawn i.i.d. from the group's cell-count marginal, batched
/// per bucket but returned in draw order. Returns an empty vec for a group
/// with no rows.
fn generate_group_marginal(
    handle: &GeneratorHandle,
    catalog: &Catalog,
    group: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, EvalError> {
    use rand::Rng;
    let hist = catalog.histogram().ok_or(QueryError::MissingHistogram)?;
    let weights: Vec<f64> = (0..hist.n_buckets())
        .map(|b| hist.cell_count(b, group) as f64)
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Ok(Vec::new());
    }
    let mut rng = stream(seed, &[tag::BENCH, u64::MAX]);
    let sequence: Vec<usize> = (0..count)
        .map(|_| {
            let mut pick = rng.random::<f64>() * total;
            let mut bucket = 0;
            for (b, &w) in weights.iter().enumerate() {
                bucket = b;
                if pick < w {
                    break;
                }
                pick -= w;
            }
            bucket
        })
        .collect();
    let mut tallies = vec![0usize; hist.n_buckets()];
    for &b in &sequence {
        tallies[b] += 1;
    }
    let mut per_bucket: Vec<std::vec::IntoIter<Vec<f64>>> = Vec::with_capacity(tallies.len());
    for (bucket, &n) in tallies.iter().enumerate() {
        let batch = if n > 0 {
            handle.generate_bucketed(bucket, group, n, seed)?.rows
        } else {
            Vec::new()
        };
        per_bucket.push(batch.into_iter());
    }
    Ok(sequence
        .into_iter()
        .map(|b| per_bucket[b].next().expect("tallied"))
        .collect())
}

/// A generated or random sample point for the distribution snapshot
/// (first two feature columns).
#[derive(Debug, Clone)]
pub struct SamplePoint {
    pub kind: &'static str,
    pub x: f64,
    pub y: f64,
    pub group: String,
}

/// Uniform random rows vs uniform generated rows, for eyeballing whether
/// the model restored the data distribution.
pub fn sample_distribution_snapshot(
    table: &Table,
    catalog: &Catalog,
    handle: &GeneratorHandle,
    m: usize,
    seed: u64,
) -> Result<Vec<SamplePoint>, EvalError> {
    let mut points = Vec::with_capacity(2 * m);
    for &row in &table_uniform_sample(table, m, seed) {
        points.push(SamplePoint {
            kind: "random",
            x: table.value(row, 0),
            y: if table.schema().feature_columns().len() > 1 {
                table.value(row, 1)
            } else {
                0.0
            },
            group: table.group_label(table.group_id(row)).to_string(),
        });
    }
    let batches: Vec<crate::cgen::SampleBatch> = if handle.has_bucket_labels() {
        let hist = catalog.histogram().ok_or(QueryError::MissingHistogram)?;
        let plan = allocate_cells_by_frequency(hist, m);
        let mut out = Vec::new();
        for (stratum, count) in plan.iter() {
            out.push(handle.generate_bucketed(
                stratum.bucket.expect("cell plan"),
                stratum.group,
                count,
                seed,
            )?);
        }
        out
    } else {
        let plan = allocate_uniform(catalog.stats(), m);
        draw_group_plan(SampleSource::Generated(handle), catalog.stats(), &plan, seed)?
    };
    for batch in &batches {
        for row in &batch.rows {
            points.push(SamplePoint {
                kind: "generated",
                x: row[0],
                y: if row.len() > 1 { row[1] } else { 0.0 },
                group: catalog.group_domain()[batch.group].clone(),
            });
        }
    }
    Ok(points)
}

/// Wall-clock comparison row: generating m samples is table-size
/// independent, sampling the table is not.
#[derive(Debug, Clone)]
pub struct EfficiencyRow {
    pub table_rows: usize,
    pub seed: u64,
    pub generate_seconds: f64,
    pub table_sample_seconds: f64,
}

/// Times `m` generated samples against `m` data-random samples on each
/// table.
pub fn bench_efficiency(
    handle: &GeneratorHandle,
    tables: &[&Table],
    m: usize,
    seeds: &[u64],
) -> Result<Vec<EfficiencyRow>, EvalError> {
    // Untimed warm-up so the first measurement doesn't carry cold-start
    // costs.
    for group in 0..handle.group_count() {
        std::hint::black_box(handle.generate(group, m.min(64), 0)?);
    }
    let mut rows = Vec::with_capacity(tables.len() * seeds.len());
    for table in tables {
        let stats = crate::catalog::build_group_stats(table).expect("bench tables are nonempty");
        for &seed in seeds {
            let start = Instant::now();
            let plan = allocate_uniform(&stats, m);
            let gen_batches =
                draw_group_plan(SampleSource::Generated(handle), &stats, &plan, seed)?;
            let generate_seconds = start.elapsed().as_secs_f64();
            std::hint::black_box(&gen_batches);

            let start = Instant::now();
            let data_batches =
                draw_group_plan(SampleSource::DataRandom(table), &stats, &plan, seed)?;
            let table_sample_seconds = start.elapsed().as_secs_f64();
            std::hint::black_box(&data_batches);

            rows.push(EfficiencyRow {
                table_rows: table.n_rows(),
                seed,
                generate_seconds,
                table_sample_seconds,
            });
        }
    }
    Ok(rows)
}

/// Per-(bucket, group) accuracy row for the bucket-query study: exact
/// average against the generated stratified estimate and the random-sample
/// estimate.
#[derive(Debug, Clone)]
pub struct BucketAccuracyRow {
    pub bucket: usize,
    pub group: String,
    pub true_avg: Option<f64>,
    pub generated_avg: Option<f64>,
    pub generated_half_width: f64,
    pub generated_n: usize,
    pub random_avg: Option<f64>,
    pub random_half_width: f64,
    pub random_n: usize,
}

/// Runs the per-bucket AVG queries: m samples split equally over buckets
/// with CV allocation inside (generated), against m uniform random rows
/// (baseline), against the exact per-cell answer.
pub fn bench_bucket_accuracy(
    table: &Table,
    catalog: &Catalog,
    handle: &GeneratorHandle,
    agg_column: &str,
    m: usize,
    seed: u64,
) -> Result<Vec<BucketAccuracyRow>, EvalError> {
    crate::model::validate_against_catalog(handle, catalog)?;
    let hist = catalog.histogram().ok_or(QueryError::MissingHistogram)?;
    let agg_idx = catalog
        .feature_index(agg_column)
        .ok_or_else(|| QueryError::UnknownColumn(agg_column.to_string()))?;
    let pred_idx = catalog
        .feature_index(hist.column())
        .expect("histogram column is a feature");
    let all_buckets: Vec<usize> = (0..hist.n_buckets()).collect();
    let plan = crate::alloc::allocate_bucketed(
        hist,
        &all_buckets,
        agg_column,
        m,
        crate::alloc::BucketAllocation::Cv(crate::alloc::CvKind::Standard),
    )
    .map_err(SamplerError::from)?;

    let g = catalog.group_count();
    let cells = hist.n_buckets() * g;
    let mut generated: Vec<Vec<f64>> = vec![Vec::new(); cells];
    for (stratum, count) in plan.iter() {
        let bucket = stratum.bucket.expect("bucketed plan");
        let batch = handle.generate_bucketed(bucket, stratum.group, count, seed)?;
        generated[bucket * g + stratum.group].extend(batch.column_values(agg_idx));
    }

    let mut random: Vec<Vec<f64>> = vec![Vec::new(); cells];
    for &row in &table_uniform_sample(table, m, seed) {
        let bucket = hist.bucket_of(table.value(row, pred_idx));
        let group = table.group_id(row);
        random[bucket * g + group].push(table.value(row, agg_idx));
    }

    let exact_col = hist
        .stat_column_index(agg_column)
        .ok_or_else(|| QueryError::NotAggregateCandidate(agg_column.to_string()))?;
    let z = critical_value(0.95);
    let ci = |vals: &[f64]| -> (Option<f64>, f64, usize) {
        let n = vals.len();
        if n == 0 {
            return (None, 0.0, 0);
        }
        let (mean, std) = mean_and_sample_std(vals);
        let hw = if n < 2 {
            f64::INFINITY
        } else {
            z * std / (n as f64).sqrt()
        };
        (Some(mean), hw, n)
    };

    let mut rows = Vec::with_capacity(cells);
    for bucket in 0..hist.n_buckets() {
        for group in 0..g {
            let cell = bucket * g + group;
            let (generated_avg, generated_half_width, generated_n) = ci(&generated[cell]);
            let (random_avg, random_half_width, random_n) = ci(&random[cell]);
            let true_avg = if hist.cell_count(bucket, group) > 0 {
                Some(hist.cell_mean(exact_col, bucket, group))
            } else {
                None
            };
            rows.push(BucketAccuracyRow {
                bucket,
                group: catalog.group_domain()[group].clone(),
                true_avg,
                generated_avg,
                generated_half_width,
                generated_n,
                random_avg,
                random_half_width,
                random_n,
            });
        }
    }
    Ok(rows)
}
