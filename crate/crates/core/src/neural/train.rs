//! Conditional WGAN training with weight clipping.
//!
//! The generator maps (noise ++ label) to a feature row; the critic scores
//! (features ++ label) with a linear head. Each generator update follows
//! `n_critic` critic updates; critic parameters are clamped to the clip
//! interval after every critic step. Training is single-threaded and fully
//! determined by the seed.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::rng::{stream, tag};

use super::matrix::Matrix;
use super::mlp::{Activation, Mlp, RmsProp};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("rows and labels disagree: {rows} rows vs {labels} labels")]
    RowLabelMismatch { rows: usize, labels: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("non-finite parameter or loss at epoch {epoch}")]
    NonFinite { epoch: usize },
}

/// Training hyperparameters. The optimizer settings (RMSprop lr 1e-4,
/// rho 0.95) and the clip half-width 0.1 are the reference configuration;
/// epochs and batch size are workload-dependent.
#[derive(Debug, Clone)]
pub struct WganConfig {
    pub noise_dim: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub n_critic: usize,
    /// Critic parameters are clamped to [-clip, clip] after each step.
    pub clip: f64,
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
    pub generator_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    /// Per-epoch decay for an exponential moving average of the generator
    /// parameters; the averaged generator is returned. `None` returns the
    /// last-epoch generator. Adversarial updates orbit the equilibrium
    /// rather than settling on it, and the average sits near the center of
    /// the orbit.
    pub ema_decay: Option<f64>,
}

impl Default for WganConfig {
    fn default() -> Self {
        Self {
            noise_dim: 8,
            batch_size: 64,
            epochs: 500,
            n_critic: 5,
            clip: 0.1,
            lr: 1e-4,
            rho: 0.95,
            eps: 1e-7,
            generator_hidden: vec![128, 64, 32],
            critic_hidden: vec![128, 64, 32],
            ema_decay: None,
        }
    }
}

impl WganConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: &str| Err(TrainError::InvalidConfig(msg.to_string()));
        if self.noise_dim == 0 {
            return bad("noise_dim must be >= 1");
        }
        if self.n_critic == 0 {
            return bad("n_critic must be >= 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be >= 1");
        }
        if !self.clip.is_finite() || self.clip <= 0.0 {
            return bad("clip half-width must be positive");
        }
        let lr_ok = self.lr.is_finite() && self.lr > 0.0;
        let eps_ok = self.eps.is_finite() && self.eps > 0.0;
        if !lr_ok || !(0.0..1.0).contains(&self.rho) || !eps_ok {
            return bad("optimizer settings out of range");
        }
        if let Some(d) = self.ema_decay {
            if !(0.0 < d && d < 1.0) {
                return bad("ema_decay must be in (0, 1)");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean over the epoch of (mean critic(fake) - mean critic(real)):
    /// the quantity the critic descends; more negative means the critic
    /// separates real from fake more strongly.
    pub critic_loss: f64,
    pub critic_batches: u64,
    pub generator_batches: u64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    pub critic_batches: u64,
    pub generator_batches: u64,
}

#[derive(Debug)]
pub struct CwganModel {
    pub generator: Mlp,
    pub critic: Mlp,
    pub log: TrainLog,
}

/// Trains a conditional WGAN on `real` rows (already scaled to the
/// generator's output range) with paired one-hot `labels`.
pub fn train_cwgan(
    real: &Matrix,
    labels: &Matrix,
    cfg: &WganConfig,
    seed: u64,
) -> Result<CwganModel, TrainError> {
    cfg.validate()?;
    let n = real.rows();
    if n == 0 {
        return Err(TrainError::EmptyTrainingSet);
    }
    if labels.rows() != n {
        return Err(TrainError::RowLabelMismatch {
            rows: n,
            labels: labels.rows(),
        });
    }
    let features = real.cols();
    let label_width = labels.cols();

    let mut gen_dims = vec![cfg.noise_dim + label_width];
    gen_dims.extend_from_slice(&cfg.generator_hidden);
    gen_dims.push(features);
    let mut critic_dims = vec![features + label_width];
    critic_dims.extend_from_slice(&cfg.critic_hidden);
    critic_dims.push(1);

    let mut generator = Mlp::new(
        &gen_dims,
        Activation::Relu,
        Activation::Tanh,
        &mut stream(seed, &[tag::WEIGHT_INIT, 0]),
    );
    let mut critic = Mlp::new(
        &critic_dims,
        Activation::Relu,
        Activation::Linear,
        &mut stream(seed, &[tag::WEIGHT_INIT, 1]),
    );
    let mut gen_opt = RmsProp::new(&generator, cfg.lr, cfg.rho, cfg.eps);
    let mut critic_opt = RmsProp::new(&critic, cfg.lr, cfg.rho, cfg.eps);

    let mut batch_rng = stream(seed, &[tag::TRAIN_BATCH]);
    let mut noise_rng = stream(seed, &[tag::TRAIN_NOISE]);

    // One epoch gives the critic roughly one pass over the real rows.
    let gen_steps_per_epoch = n.div_ceil(cfg.batch_size * cfg.n_critic).max(1);

    let mut log = TrainLog::default();
    let mut averaged: Option<Mlp> = None;
    for epoch in 0..cfg.epochs {
        let mut epoch_critic_loss = 0.0;
        let mut epoch_critic_batches = 0u64;
        let mut epoch_gen_batches = 0u64;
        for _ in 0..gen_steps_per_epoch {
            for _ in 0..cfg.n_critic {
                let loss = critic_step(
                    &generator,
                    &mut critic,
                    &mut critic_opt,
                    real,
                    labels,
                    cfg,
                    &mut batch_rng,
                    &mut noise_rng,
                );
                epoch_critic_loss += loss;
                epoch_critic_batches += 1;
            }
            generator_step(
                &mut generator,
                &critic,
                &mut gen_opt,
                labels,
                cfg,
                &mut batch_rng,
                &mut noise_rng,
            );
            epoch_gen_batches += 1;
        }
        let critic_loss = epoch_critic_loss / epoch_critic_batches as f64;
        if !critic_loss.is_finite() || !generator.all_finite() || !critic.all_finite() {
            return Err(TrainError::NonFinite { epoch });
        }
        log.critic_batches += epoch_critic_batches;
        log.generator_batches += epoch_gen_batches;
        log.epochs.push(EpochLog {
            epoch,
            critic_loss,
            critic_batches: epoch_critic_batches,
            generator_batches: epoch_gen_batches,
        });
        log::debug!("epoch {epoch}: critic loss {critic_loss:.6}");
        if let Some(decay) = cfg.ema_decay {
            match &mut averaged {
                None => averaged = Some(generator.clone()),
                Some(avg) => avg.blend_from(&generator, decay),
            }
        }
    }

    Ok(CwganModel {
        generator: averaged.unwrap_or(generator),
        critic,
        log,
    })
}

fn sample_batch_indices(rng: &mut ChaCha12Rng, n: usize, batch: usize) -> Vec<usize> {
    (0..batch).map(|_| rng.random_range(0..n)).collect()
}

fn sample_noise(rng: &mut ChaCha12Rng, batch: usize, dim: usize) -> Matrix {
    let data: Vec<f64> = (0..batch * dim).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_vec(batch, dim, data)
}

/// Uniform upstream gradient: dL/d critic_output = sign / batch for
/// L = sign * mean(critic_output).
fn mean_upstream(batch: usize, sign: f64) -> Matrix {
    Matrix::from_vec(batch, 1, vec![sign / batch as f64; batch])
}

#[allow(clippy::too_many_arguments)]
fn critic_step(
    generator: &Mlp,
    critic: &mut Mlp,
    opt: &mut RmsProp,
    real: &Matrix,
    labels: &Matrix,
    cfg: &WganConfig,
    batch_rng: &mut ChaCha12Rng,
    noise_rng: &mut ChaCha12Rng,
) -> f64 {
    let b = cfg.batch_size;
    let idx = sample_batch_indices(batch_rng, real.rows(), b);
    let real_batch = real.gather_rows(&idx);
    let label_batch = labels.gather_rows(&idx);

    let noise = sample_noise(noise_rng, b, cfg.noise_dim);
    let gen_input = Matrix::concat_cols(&noise, &label_batch);
    let fake_batch = generator.forward_batch(&gen_input).output().clone();

    let real_input = Matrix::concat_cols(&real_batch, &label_batch);
    let fake_input = Matrix::concat_cols(&fake_batch, &label_batch);

    let real_cache = critic.forward_batch(&real_input);
    let fake_cache = critic.forward_batch(&fake_input);
    let mean_real = real_cache.output().data().iter().sum::<f64>() / b as f64;
    let mean_fake = fake_cache.output().data().iter().sum::<f64>() / b as f64;

    // Descend on mean(fake) - mean(real), i.e. maximize real-fake separation.
    let (mut grads, _) = critic.backward(&fake_input, &fake_cache, &mean_upstream(b, 1.0));
    let (real_grads, _) = critic.backward(&real_input, &real_cache, &mean_upstream(b, -1.0));
    grads.add(&real_grads);
    opt.step(critic, &grads);
    critic.clip_params(cfg.clip);

    mean_fake - mean_real
}

fn generator_step(
    generator: &mut Mlp,
    critic: &Mlp,
    opt: &mut RmsProp,
    labels: &Matrix,
    cfg: &WganConfig,
    batch_rng: &mut ChaCha12Rng,
    noise_rng: &mut ChaCha12Rng,
) {
    let b = cfg.batch_size;
    let idx = sample_batch_indices(batch_rng, labels.rows(), b);
    let label_batch = labels.gather_rows(&idx);
    let noise = sample_noise(noise_rng, b, cfg.noise_dim);

    let gen_input = Matrix::concat_cols(&noise, &label_batch);
    let gen_cache = generator.forward_batch(&gen_input);
    let fake_batch = gen_cache.output();

    let critic_input = Matrix::concat_cols(fake_batch, &label_batch);
    let critic_cache = critic.forward_batch(&critic_input);

    // Minimize -mean(critic(fake)): push generated rows toward higher scores.
    let (_, dinput) = critic.backward(&critic_input, &critic_cache, &mean_upstream(b, -1.0));
    let upstream = dinput.slice_cols(0, fake_batch.cols());
    let (grads, _) = generator.backward(&gen_input, &gen_cache, &upstream);
    opt.step(generator, &grads);
}
