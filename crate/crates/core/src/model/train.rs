//! Adam on mean binary cross-entropy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{channel_positions, sigmoid, ChannelSet, NormalizationStages, PerceptronModel, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::ingest::{Hypnogram, BS};
use crate::preprocess::{FeatureMode, FeatureSeries};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassBalance {
    /// Randomly drop majority-class windows down to the minority count.
    #[default]
    TruncateMajority,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub class_balance: ClassBalance,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 500,
            batch_size: 32,
            seed: 0,
            class_balance: ClassBalance::TruncateMajority,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && self.beta1 > 0.0
            && (0.0..1.0).contains(&self.beta2)
            && self.beta2 > 0.0
            && self.epsilon > 0.0
            && self.epochs > 0
            && self.batch_size > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid training config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: PerceptronModel,
    /// Accuracy on the (balanced) training windows at threshold 0.5.
    pub training_accuracy: f64,
    /// Mean loss over the training windows after each epoch.
    pub loss_history: Vec<f64>,
    pub samples_used: usize,
}

/// `ln(1 + e^z) - y z`, the cross-entropy of `sigmoid(z)` against `y`.
#[inline]
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z
}

fn logit(weights: &[f64], bias: f64, x: &[f64]) -> f64 {
    x.iter().zip(weights).fold(bias, |acc, (xi, wi)| acc + xi * wi)
}

/// Mean binary cross-entropy.
pub fn bce_loss(weights: &[f64], bias: f64, xs: &[Vec<f64>], ys: &[u8]) -> f64 {
    let total: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| bce_from_logit(logit(weights, bias, x), f64::from(y)))
        .sum();
    total / xs.len() as f64
}

/// Gradient of [`bce_loss`]: `mean((p - y) x)` and `mean(p - y)`.
pub fn bce_gradient(weights: &[f64], bias: f64, xs: &[Vec<f64>], ys: &[u8]) -> (Vec<f64>, f64) {
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    accumulate_gradient(weights, bias, xs.iter().zip(ys), &mut gw, &mut gb);
    let n = xs.len() as f64;
    gw.iter_mut().for_each(|g| *g /= n);
    (gw, gb / n)
}

fn accumulate_gradient<'a>(
    weights: &[f64],
    bias: f64,
    batch: impl Iterator<Item = (&'a Vec<f64>, &'a u8)>,
    gw: &mut [f64],
    gb: &mut f64,
) {
    gw.iter_mut().for_each(|g| *g = 0.0);
    *gb = 0.0;
    for (x, &y) in batch {
        let err = sigmoid(logit(weights, bias, x)) - f64::from(y);
        for (g, xi) in gw.iter_mut().zip(x) {
            *g += err * xi;
        }
        *gb += err;
    }
}

/// Trains on windows of `fs` labelled by the grid points of `labels` that
/// coincide with the feature times.
pub fn train(
    fs: &FeatureSeries,
    labels: &Hypnogram,
    cfg: &TrainConfig,
    channel_set: ChannelSet,
) -> Result<TrainOutcome> {
    if (labels.stride_s() - fs.stride_s).abs() > crate::ingest::STRIDE_TOLERANCE_S {
        return Err(Error::GridMismatch(format!(
            "label stride {} s differs from feature stride {} s",
            labels.stride_s(),
            fs.stride_s
        )));
    }
    let aligned = labels.align_to(fs.start_time_s, fs.len())?;
    let positions = channel_positions(channel_set, &fs.channel_ids)?;
    let xs: Vec<Vec<f64>> = (0..fs.len())
        .map(|j| {
            let mut x = Vec::with_capacity(channel_set.input_len());
            fs.feature_vector_into(j, &positions, &mut x);
            x
        })
        .collect();
    train_on_samples(&xs, aligned.labels(), cfg, channel_set, fs.mode)
}

pub fn train_on_samples(
    xs: &[Vec<f64>],
    ys: &[u8],
    cfg: &TrainConfig,
    channel_set: ChannelSet,
    feature_mode: FeatureMode,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    let dim = channel_set.input_len();
    if let Some(x) = xs.iter().find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: x.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut bs: Vec<usize> = (0..ys.len()).filter(|&i| ys[i] == BS).collect();
    let mut ws: Vec<usize> = (0..ys.len()).filter(|&i| ys[i] != BS).collect();
    if bs.is_empty() || ws.is_empty() {
        return Err(Error::SingleClass);
    }
    let index: Vec<usize> = match cfg.class_balance {
        ClassBalance::None => (0..ys.len()).collect(),
        ClassBalance::TruncateMajority => {
            let keep = bs.len().min(ws.len());
            bs.shuffle(&mut rng);
            ws.shuffle(&mut rng);
            let mut kept: Vec<usize> = bs[..keep].iter().chain(&ws[..keep]).copied().collect();
            kept.sort_unstable();
            kept
        }
    };
    let train_x: Vec<Vec<f64>> = index.iter().map(|&i| xs[i].clone()).collect();
    let train_y: Vec<u8> = index.iter().map(|&i| ys[i]).collect();

    let mut weights: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
    let mut bias = 0.0;

    let n = train_x.len();
    let mut order: Vec<usize> = (0..n).collect();
    let (mut m_w, mut v_w) = (vec![0.0; dim], vec![0.0; dim]);
    let (mut m_b, mut v_b) = (0.0, 0.0);
    let mut gw = vec![0.0; dim];
    let mut gb = 0.0;
    let mut step = 0i32;
    let mut loss_history = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        if cfg.batch_size < n {
            order.shuffle(&mut rng);
        }
        for batch in order.chunks(cfg.batch_size) {
            accumulate_gradient(
                &weights,
                bias,
                batch.iter().map(|&i| (&train_x[i], &train_y[i])),
                &mut gw,
                &mut gb,
            );
            let scale = 1.0 / batch.len() as f64;
            step += 1;
            let c1 = 1.0 - cfg.beta1.powi(step);
            let c2 = 1.0 - cfg.beta2.powi(step);
            let adam = |param: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                *param -= cfg.learning_rate * (*m / c1) / ((*v / c2).sqrt() + cfg.epsilon);
            };
            for k in 0..dim {
                adam(&mut weights[k], &mut m_w[k], &mut v_w[k], gw[k] * scale);
            }
            adam(&mut bias, &mut m_b, &mut v_b, gb * scale);
        }
        loss_history.push(bce_loss(&weights, bias, &train_x, &train_y));
    }

    let correct = train_x
        .iter()
        .zip(&train_y)
        .filter(|(x, &y)| (sigmoid(logit(&weights, bias, x)) >= DEFAULT_THRESHOLD) == (y == BS))
        .count();

    let model = PerceptronModel {
        channel_set,
        weights,
        bias,
        threshold: DEFAULT_THRESHOLD,
        feature_mode,
        normalization: NormalizationStages::default(),
    };
    model.validate()?;
    Ok(TrainOutcome {
        model,
        training_accuracy: correct as f64 / n as f64,
        loss_history,
        samples_used: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn clusters(per_class: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..2 * per_class {
            let y = (i % 2) as u8;
            let centre = if y == 1 { [0.3, 0.8, 0.3, 0.8] } else { [0.6, 0.2, 0.6, 0.2] };
            xs.push(centre.iter().map(|c| c + noise.sample(&mut rng)).collect());
            ys.push(y);
        }
        (xs, ys)
    }

    #[test]
    fn separable_clusters_are_learned() {
        let (xs, ys) = clusters(500, 1);
        let out = train_on_samples(&xs, &ys, &TrainConfig::default(), ChannelSet::C12, FeatureMode::SampleVariance)
            .unwrap();
        assert!(out.training_accuracy >= 0.99, "{}", out.training_accuracy);
        assert_eq!(out.samples_used, 1000);
    }

    #[test]
    fn identical_inputs_give_chance() {
        let xs = vec![vec![0.5; 4]; 200];
        let ys: Vec<u8> = (0..200).map(|i| (i % 2) as u8).collect();
        let out = train_on_samples(&xs, &ys, &TrainConfig::default(), ChannelSet::C12, FeatureMode::SampleVariance)
            .unwrap();
        let p = super::super::forward(&out.model, &[0.5; 4]).unwrap();
        assert!((p - 0.5).abs() < 0.02, "{p}");
        assert_eq!(out.training_accuracy, 0.5);
    }

    #[test]
    fn single_class_is_rejected() {
        let xs = vec![vec![0.5; 4]; 10];
        let ys = vec![1u8; 10];
        assert!(matches!(
            train_on_samples(&xs, &ys, &TrainConfig::default(), ChannelSet::C12, FeatureMode::SampleVariance),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn truncation_balances_classes() {
        let (mut xs, mut ys) = clusters(50, 2);
        xs.extend(vec![vec![0.6, 0.2, 0.6, 0.2]; 100]);
        ys.extend(vec![0u8; 100]);
        let cfg = TrainConfig {
            epochs: 1,
            ..TrainConfig::default()
        };
        let out = train_on_samples(&xs, &ys, &cfg, ChannelSet::C12, FeatureMode::SampleVariance).unwrap();
        assert_eq!(out.samples_used, 100);
        let cfg = TrainConfig {
            class_balance: ClassBalance::None,
            ..cfg
        };
        let out = train_on_samples(&xs, &ys, &cfg, ChannelSet::C12, FeatureMode::SampleVariance).unwrap();
        assert_eq!(out.samples_used, 200);
    }

    #[test]
    fn training_is_deterministic() {
        let (xs, ys) = clusters(100, 3);
        let cfg = TrainConfig {
            epochs: 20,
            seed: 42,
            ..TrainConfig::default()
        };
        let a = train_on_samples(&xs, &ys, &cfg, ChannelSet::C12, FeatureMode::SampleVariance).unwrap();
        let b = train_on_samples(&xs, &ys, &cfg, ChannelSet::C12, FeatureMode::SampleVariance).unwrap();
        assert_eq!(a, b);
        let c = train_on_samples(&xs, &ys, &TrainConfig { seed: 43, ..cfg }, ChannelSet::C12, FeatureMode::SampleVariance)
            .unwrap();
        assert_ne!(a.model, c.model);
    }

    #[test]
    fn loss_matches_textbook_form() {
        let w = [0.3f64, -0.7];
        let xs: Vec<Vec<f64>> = vec![vec![0.2, 0.9], vec![1.5, -0.4]];
        let ys = vec![1u8, 0u8];
        let direct: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, &y)| {
                let p: f64 = 1.0 / (1.0 + (-(0.1 + x[0] * w[0] + x[1] * w[1])).exp());
                let y = f64::from(y);
                -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
            })
            .sum::<f64>()
            / 2.0;
        assert!((bce_loss(&w, 0.1, &xs, &ys) - direct).abs() < 1e-14);
    }

    #[test]
    fn bad_config_is_rejected() {
        let (xs, ys) = clusters(5, 4);
        for cfg in [
            TrainConfig { learning_rate: 0.0, ..TrainConfig::default() },
            TrainConfig { beta1: 1.0, ..TrainConfig::default() },
            TrainConfig { batch_size: 0, ..TrainConfig::default() },
            TrainConfig { epochs: 0, ..TrainConfig::default() },
        ] {
            assert!(train_on_samples(&xs, &ys, &cfg, ChannelSet::C12, FeatureMode::SampleVariance).is_err());
        }
    }
}
