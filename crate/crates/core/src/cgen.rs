//! Conditional sample generation around a trained model: label assembly,
//! noise draws, and denormalization back to original units.
//!
//! Generator input layout is `noise ++ bucket one-hot (if any) ++ group
//! one-hot`; critic input during training is `features ++ the same labels`.
//! [`label_vec`](GeneratorHandle::label_vec) and [`build_training_set`] are
//! the single source of truth for that layout.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::catalog::{Catalog, CatalogError, LabelCodec};
use crate::data::Table;
use crate::neural::{Matrix, Mlp};
use crate::rng::{stream, tag};

#[derive(Debug, Error)]
pub enum CgenError {
    #[error("column '{0}' is constant; min-max scaling needs a nonzero range")]
    ConstantColumn(String),
    #[error("scaler has {mins} mins and {maxs} maxs")]
    MismatchedScaler { mins: usize, maxs: usize },
    #[error("group index {0} out of range (domain size {1})")]
    UnknownGroup(usize, usize),
    #[error("bucket index {0} out of range ({1} buckets)")]
    UnknownBucket(usize, usize),
    #[error("model was trained without bucket labels")]
    NoBucketLabels,
    #[error("model conditions on buckets; group-only generation needs a bucket label")]
    BucketRequired,
    #[error(
        "generator input dim {input} does not match noise {noise} + labels {labels}"
    )]
    InputDimMismatch {
        input: usize,
        noise: usize,
        labels: usize,
    },
    #[error("generator output dim {output} does not match {features} feature columns")]
    OutputDimMismatch { output: usize, features: usize },
    #[error("catalog has no histogram; bucket labels need one")]
    MissingHistogram,
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Per-column min-max scaling between original units and the generator's
/// [-1, 1] output range.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl FeatureScaler {
    /// Fits on a table's feature columns; constant columns are rejected.
    pub fn fit(table: &Table) -> Result<Self, CgenError> {
        let mut mins = Vec::new();
        let mut maxs = Vec::new();
        for (i, name) in table.schema().feature_columns().iter().enumerate() {
            let col = table.column(i);
            let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if min >= max {
                return Err(CgenError::ConstantColumn(name.clone()));
            }
            mins.push(min);
            maxs.push(max);
        }
        Ok(Self { mins, maxs })
    }

    pub fn from_parts(mins: Vec<f64>, maxs: Vec<f64>) -> Result<Self, CgenError> {
        if mins.len() != maxs.len() {
            return Err(CgenError::MismatchedScaler {
                mins: mins.len(),
                maxs: maxs.len(),
            });
        }
        for (c, (&lo, &hi)) in mins.iter().zip(&maxs).enumerate() {
            if lo >= hi {
                return Err(CgenError::ConstantColumn(format!("column {c}")));
            }
        }
        Ok(Self { mins, maxs })
    }

    pub fn width(&self) -> usize {
        self.mins.len()
    }

    pub fn bounds(&self, col: usize) -> (f64, f64) {
        (self.mins[col], self.maxs[col])
    }

    pub fn scale_value(&self, col: usize, v: f64) -> f64 {
        2.0 * (v - self.mins[col]) / (self.maxs[col] - self.mins[col]) - 1.0
    }

    pub fn unscale_value(&self, col: usize, v: f64) -> f64 {
        (v + 1.0) / 2.0 * (self.maxs[col] - self.mins[col]) + self.mins[col]
    }

    /// All feature columns of a table scaled into [-1, 1].
    pub fn scale_table(&self, table: &Table) -> Matrix {
        let cols = self.width();
        let mut out = Matrix::zeros(table.n_rows(), cols);
        for row in 0..table.n_rows() {
            let r = out.row_mut(row);
            for (c, slot) in r.iter_mut().enumerate() {
                *slot = self.scale_value(c, table.value(row, c));
            }
        }
        out
    }

    pub fn unscale_row_in_place(&self, row: &mut [f64]) {
        for (c, v) in row.iter_mut().enumerate() {
            *v = self.unscale_value(c, *v);
        }
    }
}

/// A batch of generated feature rows for one conditioning stratum, in
/// original (denormalized) units.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub rows: Vec<Vec<f64>>,
    pub group: usize,
    pub bucket: Option<usize>,
    pub requested: usize,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_values(&self, col: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[col]).collect()
    }
}

/// Immutable wrapper around a trained generator. Generation calls are safe
/// to run concurrently: each call derives its own RNG stream from
/// (seed, group, bucket).
#[derive(Debug, Clone)]
pub struct GeneratorHandle {
    generator: Mlp,
    group_codec: LabelCodec,
    bucket_codec: Option<LabelCodec>,
    scaler: FeatureScaler,
    noise_dim: usize,
    schema_hash: u64,
}

impl GeneratorHandle {
    pub fn new(
        generator: Mlp,
        group_codec: LabelCodec,
        bucket_codec: Option<LabelCodec>,
        scaler: FeatureScaler,
        noise_dim: usize,
        schema_hash: u64,
    ) -> Result<Self, CgenError> {
        let label_width = group_codec.width() + bucket_codec.as_ref().map_or(0, |c| c.width());
        if generator.input_dim() != noise_dim + label_width {
            return Err(CgenError::InputDimMismatch {
                input: generator.input_dim(),
                noise: noise_dim,
                labels: label_width,
            });
        }
        if generator.output_dim() != scaler.width() {
            return Err(CgenError::OutputDimMismatch {
                output: generator.output_dim(),
                features: scaler.width(),
            });
        }
        Ok(Self {
            generator,
            group_codec,
            bucket_codec,
            scaler,
            noise_dim,
            schema_hash,
        })
    }

    pub fn generator(&self) -> &Mlp {
        &self.generator
    }

    pub fn group_codec(&self) -> &LabelCodec {
        &self.group_codec
    }

    pub fn bucket_codec(&self) -> Option<&LabelCodec> {
        self.bucket_codec.as_ref()
    }

    pub fn scaler(&self) -> &FeatureScaler {
        &self.scaler
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_dim
    }

    pub fn schema_hash(&self) -> u64 {
        self.schema_hash
    }

    pub fn feature_count(&self) -> usize {
        self.scaler.width()
    }

    pub fn group_count(&self) -> usize {
        self.group_codec.width()
    }

    pub fn has_bucket_labels(&self) -> bool {
        self.bucket_codec.is_some()
    }

    /// Conditioning label vector: bucket one-hot (when trained with buckets)
    /// followed by group one-hot.
    pub fn label_vec(&self, bucket: Option<usize>, group: usize) -> Result<Vec<f64>, CgenError> {
        if group >= self.group_codec.width() {
            return Err(CgenError::UnknownGroup(group, self.group_codec.width()));
        }
        let mut label = Vec::new();
        match (&self.bucket_codec, bucket) {
            (Some(codec), Some(b)) => {
                if b >= codec.width() {
                    return Err(CgenError::UnknownBucket(b, codec.width()));
                }
                label.extend(codec.encode_index(b)?);
            }
            (Some(_), None) => return Err(CgenError::BucketRequired),
            (None, Some(_)) => return Err(CgenError::NoBucketLabels),
            (None, None) => {}
        }
        label.extend(self.group_codec.encode_index(group)?);
        Ok(label)
    }

    /// Generates `count` rows conditioned on a group label.
    pub fn generate(&self, group: usize, count: usize, seed: u64) -> Result<SampleBatch, CgenError> {
        let label = self.label_vec(None, group)?;
        let rows = self.run(&label, count, seed, group as u64, u64::MAX);
        Ok(SampleBatch {
            rows,
            group,
            bucket: None,
            requested: count,
        })
    }

    /// Generates `count` rows conditioned on both a bucket and a group label.
    pub fn generate_bucketed(
        &self,
        bucket: usize,
        group: usize,
        count: usize,
        seed: u64,
    ) -> Result<SampleBatch, CgenError> {
        if self.bucket_codec.is_none() {
            return Err(CgenError::NoBucketLabels);
        }
        let label = self.label_vec(Some(bucket), group)?;
        let rows = self.run(&label, count, seed, group as u64, bucket as u64);
        Ok(SampleBatch {
            rows,
            group,
            bucket: Some(bucket),
            requested: count,
        })
    }

    fn run(&self, label: &[f64], count: usize, seed: u64, group: u64, bucket: u64) -> Vec<Vec<f64>> {
        let mut rng = stream(seed, &[tag::GENERATE, group, bucket]);
        let width = self.noise_dim + label.len();
        let mut input = Matrix::zeros(count, width);
        for r in 0..count {
            let row = input.row_mut(r);
            for slot in row.iter_mut().take(self.noise_dim) {
                *slot = rng.sample(StandardNormal);
            }
            row[self.noise_dim..].copy_from_slice(label);
        }
        let cache = self.generator.forward_batch(&input);
        cache
            .output()
            .iter_rows()
            .map(|r| {
                let mut row = r.to_vec();
                self.scaler.unscale_row_in_place(&mut row);
                row
            })
            .collect()
    }
}

/// Scaled rows plus conditioning labels, ready for the training loop.
#[derive(Debug)]
pub struct TrainingSet {
    pub rows: Matrix,
    pub labels: Matrix,
    pub scaler: FeatureScaler,
    pub group_width: usize,
    pub bucket_width: usize,
}

/// Assembles the training inputs for a table: features scaled to [-1, 1]
/// and per-row one-hot labels (bucket label first when `with_buckets`).
pub fn build_training_set(
    table: &Table,
    catalog: &Catalog,
    with_buckets: bool,
) -> Result<TrainingSet, CgenError> {
    let scaler = FeatureScaler::fit(table)?;
    let rows = scaler.scale_table(table);
    let group_width = catalog.group_count();
    let (bucket_width, histogram) = if with_buckets {
        let h = catalog.histogram().ok_or(CgenError::MissingHistogram)?;
        (h.n_buckets(), Some(h))
    } else {
        (0, None)
    };
    let pred_idx = histogram.map(|h| {
        table
            .schema()
            .feature_index(h.column())
            .expect("histogram column is a feature")
    });

    let mut labels = Matrix::zeros(table.n_rows(), bucket_width + group_width);
    for row in 0..table.n_rows() {
        let out = labels.row_mut(row);
        if let (Some(h), Some(ci)) = (histogram, pred_idx) {
            let bucket = h.bucket_of(table.value(row, ci));
            out[bucket] = 1.0;
        }
        out[bucket_width + table.group_id(row)] = 1.0;
    }
    Ok(TrainingSet {
        rows,
        labels,
        scaler,
        group_width,
        bucket_width,
    })
}
