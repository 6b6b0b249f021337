//! Single sigmoid neuron over windowed `(mu, sigma)` features.
//!
//! `p = 1 / (1 + exp(-(sum_k x_k w_k + b)))`, with inputs ordered
//! `(mu_a, sigma_a, mu_b, sigma_b[, mu_c, sigma_c])` in ascending channel
//! order. A window is labelled BS when `p >= threshold`.

mod stream;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use stream::{RingBuffer, StreamOutput, StreamingClassifier};
pub use train::{
    bce_gradient, bce_loss, train, train_on_samples, ClassBalance, TrainConfig, TrainOutcome,
};

use crate::error::{Error, Result};
use crate::ingest::{Hypnogram, BS, WS};
use crate::preprocess::{FeatureMode, FeatureSeries};

/// Channel combinations the classifier accepts. A single channel is not
/// enough to separate the states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub enum ChannelSet {
    C12,
    C13,
    C23,
    C123,
}

impl ChannelSet {
    pub const ALL: [ChannelSet; 4] = [ChannelSet::C12, ChannelSet::C13, ChannelSet::C23, ChannelSet::C123];

    /// 1-based channel numbers, ascending.
    pub fn ids(self) -> &'static [usize] {
        match self {
            ChannelSet::C12 => &[1, 2],
            ChannelSet::C13 => &[1, 3],
            ChannelSet::C23 => &[2, 3],
            ChannelSet::C123 => &[1, 2, 3],
        }
    }

    pub fn input_len(self) -> usize {
        2 * self.ids().len()
    }

    pub fn from_ids(ids: &[usize]) -> Result<Self> {
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        match sorted.as_slice() {
            [1, 2] => Ok(ChannelSet::C12),
            [1, 3] => Ok(ChannelSet::C13),
            [2, 3] => Ok(ChannelSet::C23),
            [1, 2, 3] => Ok(ChannelSet::C123),
            _ => Err(Error::InvalidParameter(format!(
                "unsupported channel set {ids:?}; use (1,2), (1,3), (2,3) or (1,2,3)"
            ))),
        }
    }
}

impl TryFrom<Vec<usize>> for ChannelSet {
    type Error = Error;

    fn try_from(ids: Vec<usize>) -> Result<Self> {
        ChannelSet::from_ids(&ids)
    }
}

impl From<ChannelSet> for Vec<usize> {
    fn from(set: ChannelSet) -> Self {
        set.ids().to_vec()
    }
}

/// Accepts `12`, `1,2`, `(1,2)`, `1-2-3` and similar.
impl FromStr for ChannelSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ids: Vec<usize> = s
            .chars()
            .filter_map(|c| c.to_digit(10))
            .map(|d| d as usize)
            .collect();
        ChannelSet::from_ids(&ids)
    }
}

impl fmt::Display for ChannelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for id in self.ids() {
            write!(f, "{id}")?;
        }
        Ok(())
    }
}

/// Which normalization stages the model's inputs went through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationStages {
    pub signal: bool,
    pub features: bool,
}

impl Default for NormalizationStages {
    fn default() -> Self {
        Self {
            signal: true,
            features: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptronModel {
    pub channel_set: ChannelSet,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub threshold: f64,
    #[serde(default)]
    pub feature_mode: FeatureMode,
    #[serde(default)]
    pub normalization: NormalizationStages,
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

impl PerceptronModel {
    pub fn new(channel_set: ChannelSet, weights: Vec<f64>, bias: f64, threshold: f64) -> Result<Self> {
        let model = Self {
            channel_set,
            weights,
            bias,
            threshold,
            feature_mode: FeatureMode::SampleVariance,
            normalization: NormalizationStages::default(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.channel_set.input_len() {
            return Err(Error::DimensionMismatch {
                expected: self.channel_set.input_len(),
                actual: self.weights.len(),
            });
        }
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("model parameters must be finite".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        Ok(())
    }

    /// Pre-activation `x . w + b`. No length check.
    #[inline]
    pub(crate) fn logit_unchecked(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.weights)
            .fold(self.bias, |acc, (xi, wi)| acc + xi * wi)
    }

    #[inline]
    pub(crate) fn label_for(&self, probability: f64) -> u8 {
        if probability >= self.threshold {
            BS
        } else {
            WS
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }
}

/// Logistic function, evaluated on the branch that cannot overflow.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn forward(model: &PerceptronModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: model.weights.len(),
            actual: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite model input".into()));
    }
    Ok(sigmoid(model.logit_unchecked(x)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub hypnogram: Hypnogram,
    pub probabilities: Vec<f64>,
}

impl Classification {
    /// `time_s,probability,label` rows.
    pub fn probabilities_csv(&self) -> String {
        let mut out = String::from("time_s,probability,label\n");
        for (i, (p, l)) in self
            .probabilities
            .iter()
            .zip(self.hypnogram.labels())
            .enumerate()
        {
            out.push_str(&format!("{},{:.16e},{l}\n", self.hypnogram.time_at(i), p));
        }
        out
    }
}

/// Positions in `fs` of the model's channels, in model input order.
pub(crate) fn channel_positions(set: ChannelSet, ids: &[usize]) -> Result<Vec<usize>> {
    set.ids()
        .iter()
        .map(|id| {
            ids.iter().position(|c| c == id).ok_or_else(|| {
                Error::ChannelMismatch(format!(
                    "model needs channel {id}, features have {ids:?}"
                ))
            })
        })
        .collect()
}

pub fn classify(model: &PerceptronModel, fs: &FeatureSeries) -> Result<Classification> {
    model.validate()?;
    let positions = channel_positions(model.channel_set, &fs.channel_ids)?;
    let mut x = Vec::with_capacity(model.weights.len());
    let mut probabilities = Vec::with_capacity(fs.len());
    let mut labels = Vec::with_capacity(fs.len());
    for j in 0..fs.len() {
        fs.feature_vector_into(j, &positions, &mut x);
        let p = sigmoid(model.logit_unchecked(&x));
        probabilities.push(p);
        labels.push(model.label_for(p));
    }
    Ok(Classification {
        hypnogram: Hypnogram::new(fs.start_time_s, fs.stride_s, labels)?,
        probabilities,
    })
}

/// Componentwise mean of weights and bias; threshold and metadata come from
/// the first model.
pub fn average_models(models: &[PerceptronModel]) -> Result<PerceptronModel> {
    let first = models
        .first()
        .ok_or(Error::Empty("no models to average"))?;
    if let Some(other) = models.iter().find(|m| m.channel_set != first.channel_set) {
        return Err(Error::ChannelMismatch(format!(
            "cannot average channel sets {} and {}",
            first.channel_set, other.channel_set
        )));
    }
    let n = models.len() as f64;
    let mut weights = vec![0.0; first.weights.len()];
    let mut bias = 0.0;
    for m in models {
        m.validate()?;
        for (acc, w) in weights.iter_mut().zip(&m.weights) {
            *acc += w;
        }
        bias += m.bias;
    }
    if models.len() > 1 {
        weights.iter_mut().for_each(|w| *w /= n);
        bias /= n;
    }
    Ok(PerceptronModel {
        weights,
        bias,
        ..first.clone()
    })
}

/// Published averaged coefficients for each channel set.
pub fn pretrained(channel_set: ChannelSet) -> PerceptronModel {
    let (bias, weights): (f64, &[f64]) = match channel_set {
        ChannelSet::C12 => (-3.02, &[-0.51, 3.22, -1.56, 4.76]),
        ChannelSet::C13 => (-2.13, &[-0.06, 6.52, -1.05, -1.23]),
        ChannelSet::C23 => (-2.59, &[-0.97, 8.78, -1.36, -1.73]),
        ChannelSet::C123 => (-2.67, &[-0.10, 3.59, -0.84, 6.29, -1.24, -2.78]),
    };
    PerceptronModel {
        channel_set,
        weights: weights.to_vec(),
        bias,
        threshold: DEFAULT_THRESHOLD,
        feature_mode: FeatureMode::SampleVariance,
        normalization: NormalizationStages::default(),
    }
}

/// Pretrained model for a set given as channel numbers, e.g. `&[1, 2]`.
pub fn pretrained_for(ids: &[usize]) -> Result<PerceptronModel> {
    Ok(pretrained(ChannelSet::from_ids(ids)?))
}

/// Model files shipped under `models/`.
pub fn shipped_model_json(channel_set: ChannelSet) -> &'static str {
    match channel_set {
        ChannelSet::C12 => include_str!("../../models/pretrained_12.json"),
        ChannelSet::C13 => include_str!("../../models/pretrained_13.json"),
        ChannelSet::C23 => include_str!("../../models/pretrained_23.json"),
        ChannelSet::C123 => include_str!("../../models/pretrained_123.json"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_model_outputs_one_half() {
        let m = PerceptronModel::new(ChannelSet::C12, vec![0.0; 4], 0.0, 0.5).unwrap();
        assert_eq!(forward(&m, &[0.3, -2.0, 9.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn published_pair_forward() {
        let m = pretrained(ChannelSet::C12);
        // z = -3.02 + 0.5 * 5.91 = -0.065
        let expected = 1.0 / (1.0 + 0.065f64.exp());
        assert_relative_eq!(forward(&m, &[0.5; 4]).unwrap(), expected, epsilon = 1e-12);
        assert_relative_eq!(expected, 0.48376, epsilon = 1e-5);
        // z = -3.02 + 3.22 + 4.76 = 4.96
        let p = forward(&m, &[0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(p, 1.0 / (1.0 + (-4.96f64).exp()), epsilon = 1e-12);
        assert_relative_eq!(p, 0.99303, epsilon = 1e-5);
    }

    #[test]
    fn forward_dimension_mismatch() {
        let m = pretrained(ChannelSet::C123);
        assert!(matches!(
            forward(&m, &[0.5; 4]),
            Err(Error::DimensionMismatch { expected: 6, actual: 4 })
        ));
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(-800.0), 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
        assert!(sigmoid(-700.0) > 0.0 && sigmoid(-700.0).is_finite());
        assert!(sigmoid(700.0) <= 1.0);
    }

    #[test]
    fn pretrained_rows() {
        let m = pretrained(ChannelSet::C23);
        assert_eq!(m.bias, -2.59);
        assert_eq!(m.weights, vec![-0.97, 8.78, -1.36, -1.73]);
        let m = pretrained(ChannelSet::C123);
        assert_eq!(m.bias, -2.67);
        assert_eq!(m.weights, vec![-0.10, 3.59, -0.84, 6.29, -1.24, -2.78]);
        assert!(pretrained_for(&[3]).is_err());
        assert!(pretrained_for(&[1, 4]).is_err());
    }

    #[test]
    fn shipped_files_match_table() {
        for set in ChannelSet::ALL {
            let m = PerceptronModel::from_json(shipped_model_json(set)).unwrap();
            assert_eq!(m, pretrained(set));
        }
    }

    #[test]
    fn channel_set_parsing() {
        assert_eq!("12".parse::<ChannelSet>().unwrap(), ChannelSet::C12);
        assert_eq!("(1,3)".parse::<ChannelSet>().unwrap(), ChannelSet::C13);
        assert_eq!("3,2".parse::<ChannelSet>().unwrap(), ChannelSet::C23);
        assert_eq!("123".parse::<ChannelSet>().unwrap(), ChannelSet::C123);
        assert!("3".parse::<ChannelSet>().is_err());
    }

    #[test]
    fn model_json_shape() {
        let json: serde_json::Value =
            serde_json::from_str(&pretrained(ChannelSet::C12).to_json().unwrap()).unwrap();
        assert_eq!(json["channel_set"], serde_json::json!([1, 2]));
        assert_eq!(json["feature_mode"], "literal-eq3");
        assert_eq!(json["normalization"]["features"], true);
        let bad = r#"{"channel_set":[1,2],"weights":[1,2],"bias":0,"threshold":0.5}"#;
        assert!(PerceptronModel::from_json(bad).is_err());
    }

    fn features(mu: f64, sigma: f64, n: usize) -> FeatureSeries {
        FeatureSeries {
            window_s: 10.0,
            stride_s: 1.0,
            start_time_s: 10.0,
            mode: FeatureMode::SampleVariance,
            channel_ids: vec![1, 2, 3],
            mu: vec![vec![mu; n]; 3],
            sigma: vec![vec![sigma; n]; 3],
        }
    }

    #[test]
    fn constant_features_classify_as_wake() {
        let c = classify(&pretrained(ChannelSet::C12), &features(0.5, 0.5, 5)).unwrap();
        assert!(c.hypnogram.labels().iter().all(|&l| l == WS));
        assert_eq!(c.hypnogram.start_time_s(), 10.0);
        assert_relative_eq!(c.probabilities[0], 0.48376, epsilon = 1e-5);
    }

    #[test]
    fn threshold_tie_goes_to_sleep() {
        let m = PerceptronModel::new(ChannelSet::C12, vec![0.0; 4], 0.0, 0.5).unwrap();
        let c = classify(&m, &features(0.1, 0.1, 3)).unwrap();
        assert!(c.hypnogram.labels().iter().all(|&l| l == BS));
        // p = sigmoid(-0.04) ~ 0.49
        let m = PerceptronModel::new(ChannelSet::C12, vec![0.0; 4], -0.04, 0.5).unwrap();
        let c = classify(&m, &features(0.1, 0.1, 3)).unwrap();
        assert!(c.hypnogram.labels().iter().all(|&l| l == WS));
    }

    #[test]
    fn classify_channel_mismatch() {
        let mut fs = features(0.5, 0.5, 2);
        fs.channel_ids = vec![1, 2, 4];
        assert!(matches!(
            classify(&pretrained(ChannelSet::C13), &fs),
            Err(Error::ChannelMismatch(_))
        ));
    }

    #[test]
    fn averaging() {
        let a = pretrained(ChannelSet::C12);
        assert_eq!(average_models(std::slice::from_ref(&a)).unwrap(), a);
        let many = average_models(&vec![a.clone(); 7]).unwrap();
        assert!((many.bias - a.bias).abs() < 1e-12);
        for (x, y) in many.weights.iter().zip(&a.weights) {
            assert!((x - y).abs() < 1e-12);
        }

        let w = vec![0.3, -1.2, 2.5, 0.7];
        let m1 = PerceptronModel::new(ChannelSet::C12, w.clone(), 1.0, 0.5).unwrap();
        let m2 = PerceptronModel::new(ChannelSet::C12, w.iter().map(|v| -v).collect(), 3.0, 0.5).unwrap();
        let avg = average_models(&[m1, m2]).unwrap();
        assert_eq!(avg.weights, vec![0.0; 4]);
        assert_eq!(avg.bias, 2.0);

        assert!(average_models(&[]).is_err());
        assert!(average_models(&[a, pretrained(ChannelSet::C13)]).is_err());
    }

    proptest! {
        #[test]
        fn forward_is_monotone_in_weight_sign(
            x in prop::collection::vec(0.0f64..1.0, 6),
            k in 0usize..6,
            dx in 1e-3f64..0.5,
        ) {
            let m = pretrained(ChannelSet::C123);
            let p0 = forward(&m, &x).unwrap();
            let mut y = x.clone();
            y[k] += dx;
            let p1 = forward(&m, &y).unwrap();
            if m.weights[k] > 0.0 {
                prop_assert!(p1 > p0);
            } else {
                prop_assert!(p1 < p0);
            }
        }

        #[test]
        fn label_depends_only_on_logit_sign(
            x in prop::collection::vec(0.0f64..1.0, 4),
            threshold in 0.05f64..0.95,
        ) {
            let mut m = pretrained(ChannelSet::C12);
            m.threshold = threshold;
            let z = m.logit_unchecked(&x);
            let cut = (threshold / (1.0 - threshold)).ln();
            let p = forward(&m, &x).unwrap();
            prop_assume!((z - cut).abs() > 1e-9);
            prop_assert_eq!(m.label_for(p) == BS, z > cut);
        }
    }
}
