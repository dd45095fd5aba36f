//! Dataset ingestion, schema handling, and synthetic data generation.
//!
//! Tables are columnar and immutable after construction: one `Vec<f64>` per
//! numeric feature column plus a dictionary-encoded group column. Group
//! values are stored as 0-based dictionary indices; the original labels are
//! kept for display and one-hot encoding.

use std::collections::HashSet;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::rng::{stream, tag};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("schema needs at least one numeric feature column")]
    NoFeatureColumns,
    #[error("duplicate column name '{0}'")]
    DuplicateColumn(String),
    #[error("aggregate candidate '{0}' is not a feature column")]
    UnknownCandidate(String),
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("non-numeric value '{value}' in column '{column}' at data row {row}")]
    NonNumeric {
        column: String,
        row: usize,
        value: String,
    },
    #[error("file has no data rows")]
    EmptyFile,
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid gauss spec: {0}")]
    InvalidGaussSpec(String),
    #[error("column '{0}' is constant; cannot derive {1} groups from a zero-width range")]
    ConstantColumn(String, usize),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("partition count must be at least 1")]
    ZeroPartitions,
}

/// Column layout: ordered numeric feature columns, one categorical group
/// column, and the subset of features allowed as aggregation targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    feature_columns: Vec<String>,
    group_column: String,
    aggregate_candidates: Vec<String>,
}

impl Schema {
    pub fn new(
        feature_columns: Vec<String>,
        group_column: impl Into<String>,
        aggregate_candidates: Vec<String>,
    ) -> Result<Self, DataError> {
        let group_column = group_column.into();
        if feature_columns.is_empty() {
            return Err(DataError::NoFeatureColumns);
        }
        let mut seen = HashSet::new();
        for name in feature_columns.iter().chain(std::iter::once(&group_column)) {
            if !seen.insert(name.clone()) {
                return Err(DataError::DuplicateColumn(name.clone()));
            }
        }
        for cand in &aggregate_candidates {
            if !feature_columns.contains(cand) {
                return Err(DataError::UnknownCandidate(cand.clone()));
            }
        }
        Ok(Self {
            feature_columns,
            group_column,
            aggregate_candidates,
        })
    }

    /// All feature columns double as aggregate candidates.
    pub fn with_all_candidates(
        feature_columns: Vec<String>,
        group_column: impl Into<String>,
    ) -> Result<Self, DataError> {
        let candidates = feature_columns.clone();
        Self::new(feature_columns, group_column, candidates)
    }

    pub fn feature_columns(&self) -> &[String] {
        &self.feature_columns
    }

    pub fn group_column(&self) -> &str {
        &self.group_column
    }

    pub fn aggregate_candidates(&self) -> &[String] {
        &self.aggregate_candidates
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_columns.iter().position(|c| c == name)
    }

    pub fn is_aggregate_candidate(&self, name: &str) -> bool {
        self.aggregate_candidates.iter().any(|c| c == name)
    }
}

/// Columnar in-memory dataset. Immutable after construction; safe for
/// concurrent reads.
#[derive(Debug, Clone)]
pub struct Table {
    schema: Schema,
    columns: Vec<Vec<f64>>,
    group_ids: Vec<u32>,
    group_domain: Vec<String>,
}

impl Table {
    pub fn from_parts(
        schema: Schema,
        columns: Vec<Vec<f64>>,
        group_ids: Vec<u32>,
        group_domain: Vec<String>,
    ) -> Result<Self, DataError> {
        assert_eq!(columns.len(), schema.feature_columns().len());
        let n = group_ids.len();
        for col in &columns {
            assert_eq!(col.len(), n, "column length mismatch");
        }
        assert!(
            group_ids.iter().all(|&g| (g as usize) < group_domain.len()),
            "group id outside domain"
        );
        Ok(Self {
            schema,
            columns,
            group_ids,
            group_domain,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.group_ids.len()
    }

    pub fn group_count(&self) -> usize {
        self.group_domain.len()
    }

    pub fn group_domain(&self) -> &[String] {
        &self.group_domain
    }

    pub fn group_label(&self, id: usize) -> &str {
        &self.group_domain[id]
    }

    pub fn group_ids(&self) -> &[u32] {
        &self.group_ids
    }

    pub fn column(&self, idx: usize) -> &[f64] {
        &self.columns[idx]
    }

    pub fn column_by_name(&self, name: &str) -> Result<&[f64], DataError> {
        let idx = self
            .schema
            .feature_index(name)
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))?;
        Ok(&self.columns[idx])
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    pub fn group_id(&self, row: usize) -> usize {
        self.group_ids[row] as usize
    }

    /// Copies one row's feature values in schema order.
    pub fn feature_row(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[row]).collect()
    }

    /// Stable FNV-1a hash over column names, candidates, and the group
    /// domain; ties catalogs and models to the data layout they were built
    /// against.
    pub fn schema_hash(&self) -> u64 {
        let mut h = Fnv::new();
        for name in self.schema.feature_columns() {
            h.write(name.as_bytes());
            h.write(b"\x1f");
        }
        h.write(b"\x1e");
        h.write(self.schema.group_column().as_bytes());
        h.write(b"\x1e");
        for name in self.schema.aggregate_candidates() {
            h.write(name.as_bytes());
            h.write(b"\x1f");
        }
        h.write(b"\x1e");
        for label in &self.group_domain {
            h.write(label.as_bytes());
            h.write(b"\x1f");
        }
        h.finish()
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Reads the header row of a CSV file and builds a schema where every column
/// except `group_column` is a numeric feature (all of them aggregate
/// candidates).
pub fn infer_schema(path: impl AsRef<Path>, group_column: &str) -> Result<Schema, DataError> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let mut features = Vec::new();
    let mut found_group = false;
    for name in headers.iter() {
        if name == group_column {
            found_group = true;
        } else {
            features.push(name.to_string());
        }
    }
    if !found_group {
        return Err(DataError::MissingColumn(group_column.to_string()));
    }
    Schema::with_all_candidates(features, group_column)
}

/// Loads a CSV file against a known schema. One header row, UTF-8, '.'
/// decimal separator. Numeric parse failures are hard errors naming the row
/// and column.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Table, DataError> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let position = |name: &str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let feature_pos: Vec<usize> = schema
        .feature_columns()
        .iter()
        .map(|n| position(n))
        .collect::<Result<_, _>>()?;
    let group_pos = position(schema.group_column())?;

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); feature_pos.len()];
    let mut group_ids = Vec::new();
    let mut group_domain: Vec<String> = Vec::new();
    let mut domain_index = std::collections::HashMap::new();

    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        for (col_idx, &pos) in feature_pos.iter().enumerate() {
            let raw = record.get(pos).unwrap_or("");
            // Non-finite values would poison every downstream statistic;
            // reject them like any other unparsable field.
            let value = raw
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DataError::NonNumeric {
                    column: schema.feature_columns()[col_idx].clone(),
                    row: row_idx,
                    value: raw.to_string(),
                })?;
            columns[col_idx].push(value);
        }
        let label = record.get(group_pos).unwrap_or("").trim().to_string();
        let id = *domain_index.entry(label.clone()).or_insert_with(|| {
            group_domain.push(label);
            (group_domain.len() - 1) as u32
        });
        group_ids.push(id);
    }
    if group_ids.is_empty() {
        return Err(DataError::EmptyFile);
    }
    Table::from_parts(schema.clone(), columns, group_ids, group_domain)
}

/// Writes a table back out as CSV (features in schema order, then the group
/// column with its original labels).
pub fn write_csv(table: &Table, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    let mut header: Vec<&str> = table
        .schema()
        .feature_columns()
        .iter()
        .map(|s| s.as_str())
        .collect();
    header.push(table.schema().group_column());
    writer.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for row in 0..table.n_rows() {
        record.clear();
        for col in 0..table.schema().feature_columns().len() {
            record.push(table.value(row, col).to_string());
        }
        record.push(table.group_label(table.group_id(row)).to_string());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// One mixture component: a diagonal-covariance 2-d gaussian for (x, y), a
/// uniform range for z, and an exact row count.
#[derive(Debug, Clone, Copy)]
pub struct GaussComponent {
    pub mean: [f64; 2],
    pub cov_diag: [f64; 2],
    pub z_range: [f64; 2],
    pub rows: usize,
}

/// Specification for the synthetic gaussian-mixture dataset with columns
/// (x, y, z, GroupID), GroupID = 1-based component index.
#[derive(Debug, Clone)]
pub struct GaussSpec {
    pub components: Vec<GaussComponent>,
    pub seed: u64,
}

impl GaussSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.components.is_empty() {
            return Err(DataError::InvalidGaussSpec("no components".into()));
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.cov_diag[0] < 0.0 || c.cov_diag[1] < 0.0 {
                return Err(DataError::InvalidGaussSpec(format!(
                    "component {i}: negative covariance"
                )));
            }
            if c.z_range[0] > c.z_range[1] {
                return Err(DataError::InvalidGaussSpec(format!(
                    "component {i}: z range lo > hi"
                )));
            }
            if c.rows == 0 {
                return Err(DataError::InvalidGaussSpec(format!(
                    "component {i}: row count must be >= 1"
                )));
            }
        }
        Ok(())
    }

    /// The four-component mixture used throughout the experiments, with the
    /// per-component row counts scaled by `count_scale` (1.0 keeps the
    /// canonical 10M/20M/30M/40M split).
    pub fn reference(count_scale: f64, seed: u64) -> Self {
        let base: [(f64, f64, f64, f64, f64, f64, f64); 4] = [
            (2.0, 2.0, 30.0, 30.0, 0.0, 10_000.0, 10e6),
            (80.0, 10.0, 80.0, 30.0, 0.0, 1_000.0, 20e6),
            (10.0, 40.0, 10.0, 20.0, 0.0, 100.0, 30e6),
            (70.0, 60.0, 100.0, 100.0, 0.0, 10.0, 40e6),
        ];
        let components = base
            .iter()
            .map(|&(mx, my, vx, vy, zlo, zhi, rows)| GaussComponent {
                mean: [mx, my],
                cov_diag: [vx, vy],
                z_range: [zlo, zhi],
                rows: (rows * count_scale).round() as usize,
            })
            .collect();
        GaussSpec { components, seed }
    }
}

/// Generates the synthetic mixture table. Row counts per component are exact
/// and each component draws from its own RNG stream, so the output is fully
/// determined by the spec.
pub fn gen_gauss(spec: &GaussSpec) -> Result<Table, DataError> {
    spec.validate()?;
    let total: usize = spec.components.iter().map(|c| c.rows).sum();
    let schema = Schema::with_all_candidates(
        vec!["x".into(), "y".into(), "z".into()],
        "GroupID",
    )?;
    let mut xs = Vec::with_capacity(total);
    let mut ys = Vec::with_capacity(total);
    let mut zs = Vec::with_capacity(total);
    let mut group_ids = Vec::with_capacity(total);
    let group_domain: Vec<String> = (1..=spec.components.len()).map(|i| i.to_string()).collect();

    for (idx, comp) in spec.components.iter().enumerate() {
        let mut rng = stream(spec.seed, &[tag::GAUSS_COMPONENT, idx as u64]);
        let sx = comp.cov_diag[0].sqrt();
        let sy = comp.cov_diag[1].sqrt();
        let z_span = comp.z_range[1] - comp.z_range[0];
        for _ in 0..comp.rows {
            let nx: f64 = rng.sample(StandardNormal);
            let ny: f64 = rng.sample(StandardNormal);
            xs.push(comp.mean[0] + sx * nx);
            ys.push(comp.mean[1] + sy * ny);
            zs.push(comp.z_range[0] + z_span * rng.random::<f64>());
            group_ids.push(idx as u32);
        }
    }
    Table::from_parts(schema, vec![xs, ys, zs], group_ids, group_domain)
}

/// Replaces the table's group column with the index of the equal-width
/// sub-range of `[min, max]` of `source_column` containing each value.
/// Bins are half-open `[lo, hi)` with the global max folded into bin k-1.
pub fn derive_group_column(
    table: &Table,
    source_column: &str,
    k: usize,
) -> Result<Table, DataError> {
    if k == 0 {
        return Err(DataError::ZeroPartitions);
    }
    let values = table.column_by_name(source_column)?;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max && k > 1 {
        return Err(DataError::ConstantColumn(source_column.to_string(), k));
    }
    let width = (max - min) / k as f64;
    let group_ids: Vec<u32> = values
        .iter()
        .map(|&v| {
            if k == 1 || width == 0.0 {
                0
            } else {
                (((v - min) / width) as usize).min(k - 1) as u32
            }
        })
        .collect();
    let group_domain: Vec<String> = (0..k).map(|i| i.to_string()).collect();
    Table::from_parts(
        table.schema().clone(),
        table.columns.clone(),
        group_ids,
        group_domain,
    )
}
