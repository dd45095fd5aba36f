//! Precomputed statistics consumed at query time: per-group and
//! per-(bucket, group) count/mean/stddev, histogram boundaries, and one-hot
//! label codecs. Everything is computed in one pass over the data and is
//! immutable afterwards.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::data::Table;
use crate::stat::Welford;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("table is empty")]
    EmptyTable,
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("bucket count must be at least 1")]
    ZeroBuckets,
    #[error("{requested} buckets requested but column '{column}' has only {distinct} distinct values")]
    TooFewDistinct {
        column: String,
        requested: usize,
        distinct: usize,
    },
    #[error("column '{0}' is constant; equi-width buckets would have zero width")]
    ConstantColumn(String),
    #[error("value '{0}' is not in the label domain")]
    UnknownLabel(String),
    #[error("label index {0} out of range (domain size {1})")]
    LabelIndexOutOfRange(usize, usize),
    #[error("malformed one-hot vector")]
    MalformedOneHot,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("catalog file parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Exact per-group statistics for every aggregate-candidate column:
/// count, mean, and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    columns: Vec<String>,
    counts: Vec<u64>,
    means: Vec<Vec<f64>>,   // [column][group]
    stddevs: Vec<Vec<f64>>, // [column][group]
}

impl GroupStats {
    /// Assembles statistics from already-known values, e.g. when they were
    /// computed elsewhere. `means` and `stddevs` are indexed [column][group].
    pub fn from_parts(
        columns: Vec<String>,
        counts: Vec<u64>,
        means: Vec<Vec<f64>>,
        stddevs: Vec<Vec<f64>>,
    ) -> Self {
        assert_eq!(means.len(), columns.len());
        assert_eq!(stddevs.len(), columns.len());
        for per_group in means.iter().chain(&stddevs) {
            assert_eq!(per_group.len(), counts.len());
        }
        Self {
            columns,
            counts,
            means,
            stddevs,
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn group_count(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, group: usize) -> u64 {
        self.counts[group]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn column_index(&self, column: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == column)
    }

    pub fn mean(&self, column_idx: usize, group: usize) -> f64 {
        self.means[column_idx][group]
    }

    pub fn stddev(&self, column_idx: usize, group: usize) -> f64 {
        self.stddevs[column_idx][group]
    }
}

/// Exact per-group statistics in one pass over the table.
pub fn build_group_stats(table: &Table) -> Result<GroupStats, CatalogError> {
    if table.n_rows() == 0 {
        return Err(CatalogError::EmptyTable);
    }
    let columns: Vec<String> = table.schema().aggregate_candidates().to_vec();
    let col_idx: Vec<usize> = columns
        .iter()
        .map(|c| table.schema().feature_index(c).expect("candidate is a feature"))
        .collect();
    let g = table.group_count();
    let mut acc: Vec<Vec<Welford>> = vec![vec![Welford::new(); g]; columns.len()];
    let mut counts = vec![0u64; g];
    for row in 0..table.n_rows() {
        let group = table.group_id(row);
        counts[group] += 1;
        for (c, &fi) in col_idx.iter().enumerate() {
            acc[c][group].push(table.value(row, fi));
        }
    }
    let means = acc
        .iter()
        .map(|per_group| per_group.iter().map(|w| w.mean()).collect())
        .collect();
    let stddevs = acc
        .iter()
        .map(|per_group| per_group.iter().map(|w| w.population_std()).collect())
        .collect();
    Ok(GroupStats {
        columns,
        counts,
        means,
        stddevs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistogramScheme {
    EquiDepth,
    EquiWidth,
}

impl fmt::Display for HistogramScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HistogramScheme::EquiDepth => write!(f, "equi-depth"),
            HistogramScheme::EquiWidth => write!(f, "equi-width"),
        }
    }
}

impl FromStr for HistogramScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equi-depth" => Ok(HistogramScheme::EquiDepth),
            "equi-width" => Ok(HistogramScheme::EquiWidth),
            other => Err(format!("unknown histogram scheme '{other}'")),
        }
    }
}

/// Histogram over one column plus per-(bucket, group) statistics for every
/// aggregate candidate. Bucket i spans `[b_i, b_{i+1})`; the last bucket is
/// closed so the column max belongs to it.
#[derive(Debug, Clone)]
pub struct Histogram {
    column: String,
    scheme: HistogramScheme,
    lo: f64,
    hi: f64,
    boundaries: Vec<f64>,
    bucket_counts: Vec<u64>,
    stat_columns: Vec<String>,
    cell_counts: Vec<u64>,      // [bucket * g + group]
    cell_means: Vec<Vec<f64>>,  // [column][bucket * g + group]
    cell_stddevs: Vec<Vec<f64>>,
    group_count: usize,
}

impl Histogram {
    pub fn column(&self) -> &str {
        &self.column
    }

    pub fn scheme(&self) -> HistogramScheme {
        self.scheme
    }

    pub fn n_buckets(&self) -> usize {
        self.boundaries.len() + 1
    }

    pub fn group_count(&self) -> usize {
        self.group_count
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn stat_columns(&self) -> &[String] {
        &self.stat_columns
    }

    pub fn stat_column_index(&self, column: &str) -> Option<usize> {
        self.stat_columns.iter().position(|c| c == column)
    }

    pub fn bucket_counts(&self) -> &[u64] {
        &self.bucket_counts
    }

    /// Span of bucket `i` as a closed-below interval; the upper edge is open
    /// except for the last bucket.
    pub fn bucket_range(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { self.lo } else { self.boundaries[i - 1] };
        let hi = if i == self.boundaries.len() {
            self.hi
        } else {
            self.boundaries[i]
        };
        (lo, hi)
    }

    /// Bucket index for a value; total on `[lo, hi]`, clamping outside.
    pub fn bucket_of(&self, v: f64) -> usize {
        bucket_index(&self.boundaries, v)
    }

    /// Buckets whose span intersects the closed interval `[l, r]`.
    pub fn intersecting(&self, l: f64, r: f64) -> Vec<usize> {
        let last = self.n_buckets() - 1;
        (0..self.n_buckets())
            .filter(|&i| {
                let (lo, hi) = self.bucket_range(i);
                let upper_ok = if i == last { l <= hi } else { l < hi };
                lo <= r && upper_ok
            })
            .collect()
    }

    /// Fraction of bucket `i`'s span covered by the closed interval `[l, r]`
    /// under a continuous-uniform within-bucket assumption.
    pub fn covered_fraction(&self, i: usize, l: f64, r: f64) -> f64 {
        let (lo, hi) = self.bucket_range(i);
        if hi == lo {
            return if l <= lo && lo <= r { 1.0 } else { 0.0 };
        }
        let overlap = (r.min(hi) - l.max(lo)).max(0.0);
        (overlap / (hi - lo)).clamp(0.0, 1.0)
    }

    pub fn cell_count(&self, bucket: usize, group: usize) -> u64 {
        self.cell_counts[bucket * self.group_count + group]
    }

    pub fn cell_mean(&self, column_idx: usize, bucket: usize, group: usize) -> f64 {
        self.cell_means[column_idx][bucket * self.group_count + group]
    }

    pub fn cell_stddev(&self, column_idx: usize, bucket: usize, group: usize) -> f64 {
        self.cell_stddevs[column_idx][bucket * self.group_count + group]
    }
}

fn bucket_index(boundaries: &[f64], v: f64) -> usize {
    boundaries.partition_point(|&b| b <= v)
}

/// Builds the histogram and its per-(bucket, group) statistics in one pass
/// (after an initial sort for equi-depth boundaries).
///
/// Equi-depth boundaries sit at the ceil(k*N/n)-th order statistics; an
/// order-statistic boundary equal to its predecessor (or to the column min)
/// is dropped, yielding fewer, wider buckets when values repeat heavily.
pub fn build_histogram(
    table: &Table,
    column: &str,
    n: usize,
    scheme: HistogramScheme,
) -> Result<Histogram, CatalogError> {
    if n == 0 {
        return Err(CatalogError::ZeroBuckets);
    }
    if table.n_rows() == 0 {
        return Err(CatalogError::EmptyTable);
    }
    let values = table
        .column_by_name(column)
        .map_err(|_| CatalogError::UnknownColumn(column.to_string()))?;
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let boundaries = match scheme {
        HistogramScheme::EquiDepth => {
            let mut sorted = values.to_vec();
            sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN in data"));
            let mut distinct = 1usize;
            for w in sorted.windows(2) {
                if w[0] != w[1] {
                    distinct += 1;
                }
            }
            if n > distinct {
                return Err(CatalogError::TooFewDistinct {
                    column: column.to_string(),
                    requested: n,
                    distinct,
                });
            }
            let rows = sorted.len();
            let mut cuts = Vec::with_capacity(n.saturating_sub(1));
            let mut prev = lo;
            for k in 1..n {
                // Smallest value with at least ceil(k * rows / n) rows below
                // it; for 1..8 and n = 4 this yields cuts [3, 5, 7].
                let rank = (k * rows).div_ceil(n);
                let b = sorted[rank];
                if b > prev {
                    cuts.push(b);
                    prev = b;
                }
            }
            cuts
        }
        HistogramScheme::EquiWidth => {
            if lo == hi && n > 1 {
                return Err(CatalogError::ConstantColumn(column.to_string()));
            }
            let width = (hi - lo) / n as f64;
            (1..n).map(|i| lo + width * i as f64).collect()
        }
    };

    let g = table.group_count();
    let stat_columns: Vec<String> = table.schema().aggregate_candidates().to_vec();
    let col_idx: Vec<usize> = stat_columns
        .iter()
        .map(|c| table.schema().feature_index(c).expect("candidate is a feature"))
        .collect();
    let n_buckets = boundaries.len() + 1;
    let cells = n_buckets * g;
    let mut bucket_counts = vec![0u64; n_buckets];
    let mut cell_counts = vec![0u64; cells];
    let mut acc: Vec<Vec<Welford>> = vec![vec![Welford::new(); cells]; stat_columns.len()];

    let pred_idx = table
        .schema()
        .feature_index(column)
        .expect("column checked above");
    for row in 0..table.n_rows() {
        let bucket = bucket_index(&boundaries, table.value(row, pred_idx));
        let group = table.group_id(row);
        bucket_counts[bucket] += 1;
        let cell = bucket * g + group;
        cell_counts[cell] += 1;
        for (c, &fi) in col_idx.iter().enumerate() {
            acc[c][cell].push(table.value(row, fi));
        }
    }
    let cell_means = acc
        .iter()
        .map(|cells| cells.iter().map(|w| w.mean()).collect())
        .collect();
    let cell_stddevs = acc
        .iter()
        .map(|cells| cells.iter().map(|w| w.population_std()).collect())
        .collect();

    Ok(Histogram {
        column: column.to_string(),
        scheme,
        lo,
        hi,
        boundaries,
        bucket_counts,
        stat_columns,
        cell_counts,
        cell_means,
        cell_stddevs,
        group_count: g,
    })
}

/// One-hot codec over an ordered domain of distinct values.
#[derive(Debug, Clone)]
pub struct LabelCodec {
    domain: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelCodec {
    pub fn new(domain: Vec<String>) -> Self {
        let index = domain
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        Self { domain, index }
    }

    pub fn width(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn index_of(&self, value: &str) -> Result<usize, CatalogError> {
        self.index
            .get(value)
            .copied()
            .ok_or_else(|| CatalogError::UnknownLabel(value.to_string()))
    }

    pub fn encode(&self, value: &str) -> Result<Vec<f64>, CatalogError> {
        self.encode_index(self.index_of(value)?)
    }

    pub fn encode_index(&self, idx: usize) -> Result<Vec<f64>, CatalogError> {
        if idx >= self.domain.len() {
            return Err(CatalogError::LabelIndexOutOfRange(idx, self.domain.len()));
        }
        let mut v = vec![0.0; self.domain.len()];
        v[idx] = 1.0;
        Ok(v)
    }

    pub fn decode(&self, one_hot: &[f64]) -> Result<&str, CatalogError> {
        if one_hot.len() != self.domain.len() {
            return Err(CatalogError::MalformedOneHot);
        }
        let mut hot = None;
        for (i, &v) in one_hot.iter().enumerate() {
            if v == 1.0 {
                if hot.is_some() {
                    return Err(CatalogError::MalformedOneHot);
                }
                hot = Some(i);
            } else if v != 0.0 {
                return Err(CatalogError::MalformedOneHot);
            }
        }
        hot.map(|i| self.domain[i].as_str())
            .ok_or(CatalogError::MalformedOneHot)
    }
}

/// Everything the samplers and estimators read at query time, bundled with
/// the schema hash of the table it was built from.
#[derive(Debug, Clone)]
pub struct Catalog {
    schema_hash: u64,
    rows: u64,
    group_column: String,
    feature_columns: Vec<String>,
    group_domain: Vec<String>,
    stats: GroupStats,
    histogram: Option<Histogram>,
}

impl Catalog {
    pub fn build(
        table: &Table,
        histogram: Option<(&str, usize, HistogramScheme)>,
    ) -> Result<Self, CatalogError> {
        let stats = build_group_stats(table)?;
        let histogram = match histogram {
            Some((column, n, scheme)) => Some(build_histogram(table, column, n, scheme)?),
            None => None,
        };
        Ok(Self {
            schema_hash: table.schema_hash(),
            rows: table.n_rows() as u64,
            group_column: table.schema().group_column().to_string(),
            feature_columns: table.schema().feature_columns().to_vec(),
            group_domain: table.group_domain().to_vec(),
            stats,
            histogram,
        })
    }

    pub fn schema_hash(&self) -> u64 {
        self.schema_hash
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn group_column(&self) -> &str {
        &self.group_column
    }

    pub fn feature_columns(&self) -> &[String] {
        &self.feature_columns
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_columns.iter().position(|c| c == name)
    }

    pub fn group_domain(&self) -> &[String] {
        &self.group_domain
    }

    pub fn group_count(&self) -> usize {
        self.group_domain.len()
    }

    pub fn stats(&self) -> &GroupStats {
        &self.stats
    }

    pub fn histogram(&self) -> Option<&Histogram> {
        self.histogram.as_ref()
    }

    pub fn group_codec(&self) -> LabelCodec {
        LabelCodec::new(self.group_domain.clone())
    }

    pub fn bucket_codec(&self) -> Option<LabelCodec> {
        self.histogram
            .as_ref()
            .map(|h| LabelCodec::new((0..h.n_buckets()).map(|i| i.to_string()).collect()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CatalogError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "genaqp catalog v1");
        let _ = writeln!(s, "schema_hash = {:016x}", self.schema_hash);
        let _ = writeln!(s, "rows = {}", self.rows);
        let _ = writeln!(s, "group_column = {}", self.group_column);
        let _ = writeln!(s, "feature_count = {}", self.feature_columns.len());
        for (i, name) in self.feature_columns.iter().enumerate() {
            let _ = writeln!(s, "feature {i} = {name}");
        }
        let _ = writeln!(s, "group_count = {}", self.group_domain.len());
        for (i, label) in self.group_domain.iter().enumerate() {
            let _ = writeln!(s, "group {i} = {label}");
        }
        let _ = writeln!(s, "stat_column_count = {}", self.stats.columns.len());
        for (i, name) in self.stats.columns.iter().enumerate() {
            let _ = writeln!(s, "stat_column {i} = {name}");
        }
        let _ = writeln!(s, "counts = {}", join_u64(&self.stats.counts));
        for (i, per_group) in self.stats.means.iter().enumerate() {
            let _ = writeln!(s, "mean {i} = {}", join_f64(per_group));
        }
        for (i, per_group) in self.stats.stddevs.iter().enumerate() {
            let _ = writeln!(s, "stddev {i} = {}", join_f64(per_group));
        }
        match &self.histogram {
            None => {
                let _ = writeln!(s, "histogram = none");
            }
            Some(h) => {
                let _ = writeln!(s, "histogram = {}", h.column);
                let _ = writeln!(s, "scheme = {}", h.scheme);
                let _ = writeln!(s, "range = {} {}", fmt_f64(h.lo), fmt_f64(h.hi));
                let _ = writeln!(s, "boundaries = {}", join_f64(&h.boundaries));
                let _ = writeln!(s, "bucket_counts = {}", join_u64(&h.bucket_counts));
                let _ = writeln!(s, "cell_counts = {}", join_u64(&h.cell_counts));
                for (i, cells) in h.cell_means.iter().enumerate() {
                    let _ = writeln!(s, "cell_mean {i} = {}", join_f64(cells));
                }
                for (i, cells) in h.cell_stddevs.iter().enumerate() {
                    let _ = writeln!(s, "cell_stddev {i} = {}", join_f64(cells));
                }
            }
        }
        s
    }

    fn from_text(text: &str) -> Result<Self, CatalogError> {
        let mut lines = Parser::new(text);
        lines.expect_header("genaqp catalog v1")?;
        let schema_hash = u64::from_str_radix(&lines.value("schema_hash")?, 16)
            .map_err(|e| lines.err(format!("bad schema_hash: {e}")))?;
        let rows: u64 = lines.parse_value("rows")?;
        let group_column = lines.value("group_column")?;
        let feature_count: usize = lines.parse_value("feature_count")?;
        let mut feature_columns = Vec::with_capacity(feature_count);
        for i in 0..feature_count {
            feature_columns.push(lines.value(&format!("feature {i}"))?);
        }
        let group_count: usize = lines.parse_value("group_count")?;
        let mut group_domain = Vec::with_capacity(group_count);
        for i in 0..group_count {
            group_domain.push(lines.value(&format!("group {i}"))?);
        }
        let stat_count: usize = lines.parse_value("stat_column_count")?;
        let mut stat_columns = Vec::with_capacity(stat_count);
        for i in 0..stat_count {
            stat_columns.push(lines.value(&format!("stat_column {i}"))?);
        }
        let counts = lines.u64_array("counts", group_count)?;
        let mut means = Vec::with_capacity(stat_count);
        for i in 0..stat_count {
            means.push(lines.f64_array(&format!("mean {i}"), group_count)?);
        }
        let mut stddevs = Vec::with_capacity(stat_count);
        for i in 0..stat_count {
            stddevs.push(lines.f64_array(&format!("stddev {i}"), group_count)?);
        }
        let stats = GroupStats {
            columns: stat_columns.clone(),
            counts,
            means,
            stddevs,
        };
        let hist_col = lines.value("histogram")?;
        let histogram = if hist_col == "none" {
            None
        } else {
            let scheme: HistogramScheme = lines
                .value("scheme")?
                .parse()
                .map_err(|e| lines.err(e))?;
            let range = lines.f64_array("range", 2)?;
            let boundaries = lines.f64_array_any("boundaries")?;
            let n_buckets = boundaries.len() + 1;
            let bucket_counts = lines.u64_array("bucket_counts", n_buckets)?;
            let cell_counts = lines.u64_array("cell_counts", n_buckets * group_count)?;
            let mut cell_means = Vec::with_capacity(stat_count);
            for i in 0..stat_count {
                cell_means.push(lines.f64_array(&format!("cell_mean {i}"), n_buckets * group_count)?);
            }
            let mut cell_stddevs = Vec::with_capacity(stat_count);
            for i in 0..stat_count {
                cell_stddevs
                    .push(lines.f64_array(&format!("cell_stddev {i}"), n_buckets * group_count)?);
            }
            Some(Histogram {
                column: hist_col,
                scheme,
                lo: range[0],
                hi: range[1],
                boundaries,
                bucket_counts,
                stat_columns,
                cell_counts,
                cell_means,
                cell_stddevs,
                group_count,
            })
        };
        Ok(Self {
            schema_hash,
            rows,
            group_column,
            feature_columns,
            group_domain,
            stats,
            histogram,
        })
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    // `{}` on f64 prints the shortest string that parses back to the same
    // bits, so text persistence is lossless.
    format!("{v}")
}

fn join_f64(vals: &[f64]) -> String {
    vals.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" ")
}

fn join_u64(vals: &[u64]) -> String {
    vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

/// Line-oriented `key = value` reader shared by the catalog and model files.
pub(crate) struct Parser<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Parser<'a> {
    pub fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines(),
            line_no: 0,
        }
    }

    pub fn err(&self, message: impl Into<String>) -> CatalogError {
        CatalogError::Parse {
            line: self.line_no,
            message: message.into(),
        }
    }

    pub fn expect_header(&mut self, header: &str) -> Result<(), CatalogError> {
        self.line_no += 1;
        match self.lines.next() {
            Some(l) if l == header => Ok(()),
            Some(l) => Err(self.err(format!("expected header '{header}', found '{l}'"))),
            None => Err(self.err("empty file")),
        }
    }

    /// Next line must be `key = value`; returns the value.
    pub fn value(&mut self, key: &str) -> Result<String, CatalogError> {
        self.line_no += 1;
        let line = self
            .lines
            .next()
            .ok_or_else(|| self.err(format!("expected '{key} = ...', found end of file")))?;
        let (k, v) = line
            .split_once(" = ")
            .ok_or_else(|| self.err(format!("expected '{key} = ...', found '{line}'")))?;
        if k != key {
            return Err(self.err(format!("expected key '{key}', found '{k}'")));
        }
        Ok(v.to_string())
    }

    pub fn parse_value<T: FromStr>(&mut self, key: &str) -> Result<T, CatalogError>
    where
        T::Err: fmt::Display,
    {
        let v = self.value(key)?;
        v.parse()
            .map_err(|e| self.err(format!("bad value for '{key}': {e}")))
    }

    pub fn f64_array(&mut self, key: &str, expect_len: usize) -> Result<Vec<f64>, CatalogError> {
        let vals = self.f64_array_any(key)?;
        if vals.len() != expect_len {
            return Err(self.err(format!(
                "'{key}' has {} entries, expected {expect_len}",
                vals.len()
            )));
        }
        Ok(vals)
    }

    pub fn f64_array_any(&mut self, key: &str) -> Result<Vec<f64>, CatalogError> {
        let raw = self.value(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(' ')
            .map(|t| {
                t.parse()
                    .map_err(|e| self.err(format!("bad float in '{key}': {e}")))
            })
            .collect()
    }

    pub fn u64_array(&mut self, key: &str, expect_len: usize) -> Result<Vec<u64>, CatalogError> {
        let raw = self.value(key)?;
        let vals: Vec<u64> = if raw.is_empty() {
            Vec::new()
        } else {
            raw.split(' ')
                .map(|t| {
                    t.parse()
                        .map_err(|e| self.err(format!("bad integer in '{key}': {e}")))
                })
                .collect::<Result<_, _>>()?
        };
        if vals.len() != expect_len {
            return Err(self.err(format!(
                "'{key}' has {} entries, expected {expect_len}",
                vals.len()
            )));
        }
        Ok(vals)
    }
}
