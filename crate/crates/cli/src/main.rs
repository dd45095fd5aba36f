//! `gen-aqp`: single-binary front-end for the pipeline
//! gen-data -> stats -> train -> query / bench.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime failure. All randomness
//! flows from `--seed` (a fixed default, never time-based), so every
//! subcommand is reproducible.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use genaqp::alloc::CvKind;
use genaqp::catalog::{Catalog, HistogramScheme};
use genaqp::cgen::{build_training_set, GeneratorHandle};
use genaqp::data::{gen_gauss, infer_schema, load_csv, write_csv, GaussComponent, GaussSpec, Table};
use genaqp::eval;
use genaqp::model::{load_model, save_model, validate_against_catalog};
use genaqp::neural::{train_cwgan, WganConfig};
use genaqp::query::{
    execute_approx, execute_exact, parse, ApproxOptions, ApproxSource, Budget, EstimateSet,
    QuerySpec, Strategy,
};
use genaqp::sampler::OnlineConfig;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "gen-aqp",
    about = "Approximate group-by queries from conditionally generated samples",
    version
)]
struct Cli {
    /// Log level: off, error, warn, info, debug, trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a gaussian-mixture dataset (columns x, y, z, GroupID).
    GenData(GenDataArgs),
    /// Build the statistics catalog (group stats + histogram) from a CSV.
    Stats(StatsArgs),
    /// Train the conditional generative model.
    Train(TrainArgs),
    /// Run one query, exactly or approximately.
    Query(QueryArgs),
    /// Run a benchmark suite and emit plot-ready CSVs.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenDataArgs {
    /// Component spec `mean_x,mean_y,var_x,var_y,z_lo,z_hi,count`;
    /// repeat once per mixture component.
    #[arg(long = "component", required = true)]
    components: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Input CSV.
    #[arg(long)]
    data: PathBuf,
    /// Name of the categorical group column in the CSV.
    #[arg(long, default_value = "GroupID")]
    group_column: String,
    /// Histogram bucket count; 0 skips the histogram.
    #[arg(long, default_value_t = 10)]
    buckets: usize,
    #[arg(long, default_value = "equi-depth")]
    scheme: HistogramScheme,
    /// Column to bucket; defaults to the first feature column.
    #[arg(long)]
    bucket_column: Option<String>,
    /// Output catalog path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Training CSV (the file the catalog was built from).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    catalog: PathBuf,
    /// Conditioning labels: `group` or `group+bucket`.
    #[arg(long, default_value = "group")]
    labels: String,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 64)]
    batch: usize,
    #[arg(long, default_value_t = 8)]
    noise_dim: usize,
    /// Critic updates per generator update.
    #[arg(long, default_value_t = 5)]
    n_critic: usize,
    /// Per-epoch decay for generator weight averaging (e.g. 0.9); omit to
    /// keep the last-epoch generator.
    #[arg(long)]
    ema_decay: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output model path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    /// Query text, e.g. "SELECT GroupID, AVG(z) FROM gauss GROUP BY GroupID".
    #[arg(long)]
    sql: String,
    /// exact | approx
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Data CSV: required for exact mode, and for approx with --baseline.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Trained model (approx mode, generated source).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Approximate from data-random samples instead of the model.
    #[arg(long, default_value_t = false)]
    baseline: bool,
    #[arg(long, default_value = "auto")]
    strategy: Strategy,
    /// Total sample budget for uniform/cv strategies.
    #[arg(long, default_value_t = 1000)]
    m: usize,
    /// Online target half-width; repeat per group or give one to broadcast.
    #[arg(long = "target")]
    targets: Vec<f64>,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    #[arg(long, default_value_t = 30)]
    min_samples: usize,
    #[arg(long, default_value_t = 10_000)]
    cap: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Print the allocation plan and sample efficiency.
    #[arg(long, default_value_t = false)]
    explain: bool,
    /// Use the inverted mean/stddev ratio for CV allocation.
    #[arg(long, default_value_t = false)]
    alloc_invert_cv: bool,
    /// Also write the estimates as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// selectivity | online | accuracy | efficiency
    #[arg(long)]
    suite: String,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Output directory (created if absent); one CSV per figure analog.
    #[arg(long)]
    out: PathBuf,
    /// Aggregate column; defaults to the last aggregate candidate.
    #[arg(long)]
    agg_column: Option<String>,
    /// Selectivity band `lo,hi` for the selectivity suite.
    #[arg(long, default_value = "0.0,0.05")]
    band: String,
    /// Number of queries for the selectivity suite.
    #[arg(long, default_value_t = 100)]
    queries: usize,
    #[arg(long, default_value_t = 1000)]
    m: usize,
    /// Sample-size sweep for the online suite.
    #[arg(long, default_value = "1000,2000,4000,8000,10000")]
    sweep: String,
    /// Synthetic table sizes (rows) for the efficiency suite.
    #[arg(long, default_value = "100000,1000000,10000000")]
    sizes: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenData(args) => cmd_gen_data(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Train(args) => cmd_train(args),
        Command::Query(args) => cmd_query(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn cmd_gen_data(args: GenDataArgs) -> Result<()> {
    let components = args
        .components
        .iter()
        .map(|raw| parse_component(raw))
        .collect::<Result<Vec<_>>>()?;
    let spec = GaussSpec {
        components,
        seed: args.seed,
    };
    let table = gen_gauss(&spec)?;
    write_csv(&table, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} rows to {}", table.n_rows(), args.out.display());
    Ok(())
}

fn parse_component(raw: &str) -> Result<GaussComponent> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 7 {
        bail!("--component needs 7 comma-separated values, got '{raw}'");
    }
    let num = |i: usize| -> Result<f64> {
        parts[i]
            .trim()
            .parse()
            .with_context(|| format!("bad number '{}' in --component", parts[i]))
    };
    Ok(GaussComponent {
        mean: [num(0)?, num(1)?],
        cov_diag: [num(2)?, num(3)?],
        z_range: [num(4)?, num(5)?],
        rows: num(6)?.round() as usize,
    })
}

fn load_table(path: &Path, group_column: &str) -> Result<Table> {
    let schema = infer_schema(path, group_column)
        .with_context(|| format!("reading header of {}", path.display()))?;
    load_csv(path, &schema).with_context(|| format!("loading {}", path.display()))
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let table = load_table(&args.data, &args.group_column)?;
    let hist_spec = if args.buckets == 0 {
        None
    } else {
        let column = match &args.bucket_column {
            Some(c) => c.clone(),
            None => table.schema().feature_columns()[0].clone(),
        };
        Some((column, args.buckets, args.scheme))
    };
    let catalog = Catalog::build(
        &table,
        hist_spec.as_ref().map(|(c, n, s)| (c.as_str(), *n, *s)),
    )?;
    catalog
        .save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    let buckets = catalog.histogram().map_or(0, |h| h.n_buckets());
    println!(
        "catalog: {} rows, {} groups, {} buckets -> {}",
        catalog.rows(),
        catalog.group_count(),
        buckets,
        args.out.display()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let catalog = Catalog::load(&args.catalog)
        .with_context(|| format!("loading catalog {}", args.catalog.display()))?;
    let table = load_table(&args.data, catalog.group_column())?;
    if table.schema_hash() != catalog.schema_hash() {
        bail!(
            "data file {} does not match the catalog (schema hash mismatch)",
            args.data.display()
        );
    }
    let with_buckets = match args.labels.as_str() {
        "group" => false,
        "group+bucket" => true,
        other => bail!("--labels must be 'group' or 'group+bucket', got '{other}'"),
    };
    let ts = build_training_set(&table, &catalog, with_buckets)?;
    let cfg = WganConfig {
        noise_dim: args.noise_dim,
        batch_size: args.batch,
        epochs: args.epochs,
        n_critic: args.n_critic,
        ema_decay: args.ema_decay,
        ..WganConfig::default()
    };
    log::info!(
        "training: {} rows, {} label bits, {} epochs",
        table.n_rows(),
        ts.labels.cols(),
        args.epochs
    );
    let model = train_cwgan(&ts.rows, &ts.labels, &cfg, args.seed)?;
    if let Some(last) = model.log.epochs.last() {
        log::info!("final critic loss {:.6}", last.critic_loss);
    }
    let handle = GeneratorHandle::new(
        model.generator,
        catalog.group_codec(),
        if with_buckets { catalog.bucket_codec() } else { None },
        ts.scaler,
        args.noise_dim,
        catalog.schema_hash(),
    )?;
    save_model(&args.out, &handle, &model.critic)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "model: {} generator params, {} critic batches -> {}",
        handle.generator().param_count(),
        model.log.critic_batches,
        args.out.display()
    );
    Ok(())
}

fn cmd_query(args: QueryArgs) -> Result<()> {
    let spec: QuerySpec = parse(&args.sql).map_err(|e| anyhow::anyhow!("{e}"))?;
    let estimates = match args.mode.as_str() {
        "exact" => {
            let data = args
                .data
                .as_ref()
                .context("exact mode needs --data")?;
            let table = load_table(data, &spec.group_column)?;
            execute_exact(&spec, &table)?
        }
        "approx" => {
            let catalog_path = args.catalog.as_ref().context("approx mode needs --catalog")?;
            let catalog = Catalog::load(catalog_path)
                .with_context(|| format!("loading catalog {}", catalog_path.display()))?;
            let budget = if matches!(args.strategy, Strategy::Online) {
                let g = catalog.group_count();
                let targets = match args.targets.len() {
                    0 => bail!("online strategy needs --target"),
                    1 => vec![args.targets[0]; g],
                    n if n == g => args.targets.clone(),
                    n => bail!("{n} targets for {g} groups; give one or one per group"),
                };
                Budget::Online(OnlineConfig {
                    targets,
                    confidence: args.confidence,
                    min_samples: args.min_samples,
                    cap: args.cap,
                })
            } else {
                Budget::Samples(args.m)
            };
            let opts = ApproxOptions {
                seed: args.seed,
                cv_kind: if args.alloc_invert_cv {
                    CvKind::Inverted
                } else {
                    CvKind::Standard
                },
                confidence: args.confidence,
                explain: args.explain,
            };
            if args.baseline {
                let data = args
                    .data
                    .as_ref()
                    .context("--baseline needs --data")?;
                let table = load_table(data, catalog.group_column())?;
                execute_approx(
                    &spec,
                    &catalog,
                    ApproxSource::Baseline(&table),
                    args.strategy,
                    budget,
                    &opts,
                )?
            } else {
                let model_path = args
                    .model
                    .as_ref()
                    .context("approx mode needs --model (or --baseline with --data)")?;
                let (handle, _critic) = load_model(model_path)
                    .with_context(|| format!("loading model {}", model_path.display()))?;
                validate_against_catalog(&handle, &catalog)?;
                execute_approx(
                    &spec,
                    &catalog,
                    ApproxSource::Generated(&handle),
                    args.strategy,
                    budget,
                    &opts,
                )?
            }
        }
        other => bail!("--mode must be 'exact' or 'approx', got '{other}'"),
    };

    if let Some(diag) = &estimates.diagnostics {
        print!("{diag}");
    }
    print!("{}", render_estimates(&spec, &estimates));
    if let Some(path) = &args.csv {
        write_estimates_csv(path, &estimates)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn render_estimates(spec: &QuerySpec, estimates: &EstimateSet) -> String {
    let value_header = match &spec.agg_column {
        Some(c) => format!("{}({c})", spec.agg),
        None => format!("{}(*)", spec.agg),
    };
    let mut rows: Vec<[String; 5]> = vec![[
        spec.group_column.clone(),
        value_header,
        "ci".into(),
        "n".into(),
        "flags".into(),
    ]];
    for g in &estimates.groups {
        let mut flags = Vec::new();
        if g.missing {
            flags.push("missing");
        }
        if g.cap_hit {
            flags.push("cap-hit");
        }
        rows.push([
            g.label.clone(),
            if g.missing {
                "-".into()
            } else {
                format!("{:.6}", g.value)
            },
            if g.missing || g.half_width == 0.0 {
                "-".into()
            } else {
                format!("\u{b1}{:.6}", g.half_width)
            },
            g.n.to_string(),
            flags.join(","),
        ]);
    }
    let mut widths = [0usize; 5];
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            let _ = write!(out, "{cell:width$}", width = widths[i]);
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    }
    out
}

fn write_estimates_csv(path: &Path, estimates: &EstimateSet) -> Result<()> {
    let mut s = String::from("group,value,half_width,n,missing,cap_hit\n");
    for g in &estimates.groups {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            g.label, g.value, g.half_width, g.n, g.missing, g.cap_hit
        );
    }
    std::fs::write(path, s)?;
    Ok(())
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad {what} entry '{t}': {e}"))
        })
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut summary = String::new();
    match args.suite.as_str() {
        "selectivity" => bench_selectivity(&args, &mut summary)?,
        "online" => bench_online(&args, &mut summary)?,
        "accuracy" => bench_accuracy(&args, &mut summary)?,
        "efficiency" => bench_efficiency(&args, &mut summary)?,
        other => bail!("unknown suite '{other}'"),
    }
    let summary_path = args.out.join("summary.txt");
    std::fs::write(&summary_path, &summary)?;
    print!("{summary}");
    println!("reports in {}", args.out.display());
    Ok(())
}

struct BenchInputs {
    table: Table,
    catalog: Catalog,
    handle: GeneratorHandle,
}

fn bench_inputs(args: &BenchArgs) -> Result<BenchInputs> {
    let catalog_path = args.catalog.as_ref().context("this suite needs --catalog")?;
    let catalog = Catalog::load(catalog_path)
        .with_context(|| format!("loading catalog {}", catalog_path.display()))?;
    let data = args.data.as_ref().context("this suite needs --data")?;
    let table = load_table(data, catalog.group_column())?;
    let model_path = args.model.as_ref().context("this suite needs --model")?;
    let (handle, _critic) = load_model(model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    validate_against_catalog(&handle, &catalog)?;
    Ok(BenchInputs {
        table,
        catalog,
        handle,
    })
}

fn pick_agg_column(args: &BenchArgs, catalog: &Catalog) -> Result<String> {
    if let Some(c) = &args.agg_column {
        return Ok(c.clone());
    }
    let hist_col = catalog.histogram().map(|h| h.column().to_string());
    catalog
        .stats()
        .columns()
        .iter()
        .rev()
        .find(|c| Some(c.as_str()) != hist_col.as_deref())
        .cloned()
        .context("no aggregate candidate available")
}

fn bench_selectivity(args: &BenchArgs, summary: &mut String) -> Result<()> {
    let inputs = bench_inputs(args)?;
    let band = parse_list::<f64>(&args.band, "band")?;
    if band.len() != 2 {
        bail!("--band needs 'lo,hi'");
    }
    let hist = inputs
        .catalog
        .histogram()
        .context("selectivity suite needs a catalog with a histogram")?;
    let agg = pick_agg_column(args, &inputs.catalog)?;
    let template = QuerySpec {
        agg: genaqp::query::AggFn::Avg,
        agg_column: Some(agg.clone()),
        group_column: inputs.catalog.group_column().to_string(),
        table: "data".into(),
        predicate: Some(genaqp::query::Predicate {
            column: hist.column().to_string(),
            lo: 0.0,
            hi: 0.0,
        }),
    };
    let reports = eval::bench_selectivity(
        &inputs.table,
        &inputs.catalog,
        &inputs.handle,
        &template,
        (band[0], band[1]),
        args.queries,
        args.m,
        args.seed,
    )?;

    let mut csv = String::from(
        "query,lo,hi,selectivity,m,are_targeted,mse_targeted,are_uniform_generated,\
         mse_uniform_generated,are_random,mse_random,efficiency_targeted\n",
    );
    let fmt_opt = |v: Option<f64>| v.map_or(String::from(""), |v| v.to_string());
    for r in &reports {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.query_index,
            r.lo,
            r.hi,
            r.selectivity,
            r.m,
            fmt_opt(r.targeted.are),
            r.targeted.mse,
            fmt_opt(r.uniform_generated.are),
            r.uniform_generated.mse,
            fmt_opt(r.random.are),
            r.random.mse,
            r.efficiency_targeted,
        );
    }
    std::fs::write(args.out.join("selectivity.csv"), csv)?;

    let mean_sel = reports.iter().map(|r| r.selectivity).sum::<f64>() / reports.len().max(1) as f64;
    let mean_eff =
        reports.iter().map(|r| r.efficiency_targeted).sum::<f64>() / reports.len().max(1) as f64;
    let _ = writeln!(summary, "selectivity suite: {} queries on AVG({agg})", reports.len());
    let _ = writeln!(summary, "mean selectivity: {mean_sel:.5}");
    let _ = writeln!(summary, "mean sample efficiency (targeted): {mean_eff:.4}");
    type Pick = Box<dyn Fn(&eval::SelectivityReport) -> Option<f64>>;
    let picks: [(&str, Pick); 3] = [
        ("targeted", Box::new(|r| r.targeted.are)),
        ("uniform-generated", Box::new(|r| r.uniform_generated.are)),
        ("random", Box::new(|r| r.random.are)),
    ];
    for (name, pick) in picks {
        if let Some(v) = eval::mean_are(&reports, pick) {
            let _ = writeln!(summary, "mean ARE ({name}): {v:.5}");
        }
    }
    Ok(())
}

fn bench_online(args: &BenchArgs, summary: &mut String) -> Result<()> {
    let inputs = bench_inputs(args)?;
    let sweep = parse_list::<usize>(&args.sweep, "sweep")?;
    let agg = pick_agg_column(args, &inputs.catalog)?;
    let rows = eval::bench_online(&inputs.handle, &inputs.catalog, &agg, &sweep, 0.95, args.seed)?;
    let mut csv = String::from("n,group,half_width,ratio\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{}", r.n, r.group, r.half_width, r.ratio);
    }
    std::fs::write(args.out.join("online.csv"), csv)?;
    let _ = writeln!(
        summary,
        "online suite: sweep {:?} on AVG({agg}), {} rows",
        sweep,
        rows.len()
    );
    Ok(())
}

fn bench_accuracy(args: &BenchArgs, summary: &mut String) -> Result<()> {
    let inputs = bench_inputs(args)?;
    let points = eval::sample_distribution_snapshot(
        &inputs.table,
        &inputs.catalog,
        &inputs.handle,
        args.m,
        args.seed,
    )?;
    let mut csv = String::from("kind,x,y,group\n");
    for p in &points {
        let _ = writeln!(csv, "{},{},{},{}", p.kind, p.x, p.y, p.group);
    }
    std::fs::write(args.out.join("samples.csv"), csv)?;
    let _ = writeln!(summary, "accuracy suite: {} sample points", points.len());

    if inputs.catalog.histogram().is_some() && inputs.handle.has_bucket_labels() {
        let agg = pick_agg_column(args, &inputs.catalog)?;
        let rows = eval::bench_bucket_accuracy(
            &inputs.table,
            &inputs.catalog,
            &inputs.handle,
            &agg,
            args.m,
            args.seed,
        )?;
        let mut csv = String::from(
            "bucket,group,true_avg,generated_avg,generated_half_width,generated_n,\
             random_avg,random_half_width,random_n\n",
        );
        let fmt_opt = |v: Option<f64>| v.map_or(String::from(""), |v| v.to_string());
        for r in &rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                r.bucket,
                r.group,
                fmt_opt(r.true_avg),
                fmt_opt(r.generated_avg),
                r.generated_half_width,
                r.generated_n,
                fmt_opt(r.random_avg),
                r.random_half_width,
                r.random_n,
            );
        }
        std::fs::write(args.out.join("buckets.csv"), csv)?;
        let _ = writeln!(summary, "bucket accuracy rows: {} (AVG({agg}))", rows.len());
    } else {
        let _ = writeln!(
            summary,
            "bucket accuracy skipped: needs a histogram catalog and a group+bucket model"
        );
    }
    Ok(())
}

fn bench_efficiency(args: &BenchArgs, summary: &mut String) -> Result<()> {
    let model_path = args.model.as_ref().context("this suite needs --model")?;
    let (handle, _critic) = load_model(model_path)
        .with_context(|| format!("loading model {}", model_path.display()))?;
    let sizes = parse_list::<usize>(&args.sizes, "sizes")?;
    let tables: Vec<Table> = sizes
        .iter()
        .map(|&rows| {
            let scale = rows as f64 / 100e6;
            gen_gauss(&GaussSpec::reference(scale, args.seed)).map_err(anyhow::Error::from)
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&Table> = tables.iter().collect();
    let seeds: Vec<u64> = (0..3).map(|k| args.seed.wrapping_add(k)).collect();
    let rows = eval::bench_efficiency(&handle, &refs, args.m, &seeds)?;
    let mut csv = String::from("table_rows,seed,generate_seconds,table_sample_seconds\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.table_rows, r.seed, r.generate_seconds, r.table_sample_seconds
        );
    }
    std::fs::write(args.out.join("efficiency.csv"), csv)?;
    let _ = writeln!(summary, "efficiency suite: {} samples per draw", args.m);
    for &size in &sizes {
        let gen: Vec<f64> = rows
            .iter()
            .filter(|r| r.table_rows == size)
            .map(|r| r.generate_seconds)
            .collect();
        let tab: Vec<f64> = rows
            .iter()
            .filter(|r| r.table_rows == size)
            .map(|r| r.table_sample_seconds)
            .collect();
        let med = |mut v: Vec<f64>| -> f64 {
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v[v.len() / 2]
        };
        let _ = writeln!(
            summary,
            "{size} rows: generate {:.4}s, table-sample {:.4}s (medians)",
            med(gen),
            med(tab)
        );
    }
    Ok(())
}
