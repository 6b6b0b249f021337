//! Frame-at-a-time classification with frozen normalization constants.

use super::{channel_positions, sigmoid, PerceptronModel};
use crate::error::{Error, Result};
use crate::preprocess::{window_stats, Calibration, FeatureParams};

/// Fixed-capacity ring buffer; once full, each push overwrites the oldest
/// value.
#[derive(Debug, Clone)]
pub struct RingBuffer {
    data: Vec<f64>,
    head: usize,
    len: usize,
}

impl RingBuffer {
    pub fn with_capacity(capacity: usize) -> Self {
        assert!(capacity > 0, "ring buffer capacity must be positive");
        Self {
            data: vec![0.0; capacity],
            head: 0,
            len: 0,
        }
    }

    pub fn push(&mut self, value: f64) {
        let cap = self.data.len();
        let slot = (self.head + self.len) % cap;
        self.data[slot] = value;
        if self.len < cap {
            self.len += 1;
        } else {
            self.head = (self.head + 1) % cap;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.data.len()
    }

    pub fn capacity(&self) -> usize {
        self.data.len()
    }

    /// Oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = f64> + Clone + '_ {
        let cap = self.data.len();
        let first = (self.head + self.len).min(cap);
        let wrapped = (self.head + self.len).saturating_sub(cap);
        self.data[self.head..first]
            .iter()
            .chain(&self.data[..wrapped])
            .copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamOutput {
    pub time_s: f64,
    pub probability: f64,
    pub label: u8,
}

/// Buffers one window of normalized samples per channel and emits a label
/// every stride once the buffers are full.
#[derive(Debug, Clone)]
pub struct StreamingClassifier {
    model: PerceptronModel,
    sampling_rate_hz: u32,
    params: FeatureParams,
    window: usize,
    stride: usize,
    calibration: Option<Calibration>,
    positions: Vec<usize>,
    buffers: Vec<RingBuffer>,
    frames: u64,
    input: Vec<f64>,
}

impl StreamingClassifier {
    pub fn new(model: PerceptronModel, calibration: Calibration) -> Result<Self> {
        let mut sc = Self::uncalibrated(model, calibration.sampling_rate_hz, calibration.params())?;
        sc.set_calibration(calibration)?;
        Ok(sc)
    }

    /// A classifier that rejects frames until [`set_calibration`] is called.
    ///
    /// [`set_calibration`]: StreamingClassifier::set_calibration
    pub fn uncalibrated(model: PerceptronModel, sampling_rate_hz: u32, params: FeatureParams) -> Result<Self> {
        model.validate()?;
        if model.feature_mode != params.mode {
            return Err(Error::InvalidParameter(format!(
                "model expects {} features, stream computes {}",
                model.feature_mode.as_str(),
                params.mode.as_str()
            )));
        }
        let (window, stride) = params.sample_counts(sampling_rate_hz)?;
        Ok(Self {
            input: Vec::with_capacity(model.weights.len()),
            model,
            sampling_rate_hz,
            params,
            window,
            stride,
            calibration: None,
            positions: Vec::new(),
            buffers: Vec::new(),
            frames: 0,
        })
    }

    /// Installs constants and clears any buffered samples.
    pub fn set_calibration(&mut self, calibration: Calibration) -> Result<()> {
        if calibration.sampling_rate_hz != self.sampling_rate_hz || calibration.params() != self.params {
            return Err(Error::InvalidParameter(
                "calibration window geometry differs from the stream's".into(),
            ));
        }
        let ids: Vec<usize> = calibration.channels.iter().map(|c| c.channel).collect();
        self.positions = channel_positions(self.model.channel_set, &ids)?;
        self.buffers = vec![RingBuffer::with_capacity(self.window); ids.len()];
        self.calibration = Some(calibration);
        self.frames = 0;
        Ok(())
    }

    pub fn is_calibrated(&self) -> bool {
        self.calibration.is_some()
    }

    pub fn channel_count(&self) -> Option<usize> {
        self.calibration.as_ref().map(|c| c.channels.len())
    }

    pub fn model(&self) -> &PerceptronModel {
        &self.model
    }

    /// Appends one frame (one raw sample per calibrated channel). Returns a
    /// result at `t = window + j * stride` once the window is full.
    pub fn push(&mut self, frame: &[f64]) -> Result<Option<StreamOutput>> {
        let cal = self.calibration.as_ref().ok_or(Error::NotCalibrated)?;
        if frame.len() != cal.channels.len() {
            return Err(Error::DimensionMismatch {
                expected: cal.channels.len(),
                actual: frame.len(),
            });
        }
        for ((buf, c), &x) in self.buffers.iter_mut().zip(&cal.channels).zip(frame) {
            buf.push(c.signal.apply(x));
        }
        self.frames += 1;
        let window = self.window as u64;
        if self.frames < window || !(self.frames - window).is_multiple_of(self.stride as u64) {
            return Ok(None);
        }
        let j = (self.frames - window) / self.stride as u64;

        self.input.clear();
        for &p in &self.positions {
            let (mu, sigma) = window_stats(self.buffers[p].iter(), self.window, self.params.mode);
            let c = &cal.channels[p];
            if self.model.normalization.features {
                self.input.push(c.mu.apply(mu));
                self.input.push(c.sigma.apply(sigma));
            } else {
                self.input.push(mu);
                self.input.push(sigma);
            }
        }
        let probability = sigmoid(self.model.logit_unchecked(&self.input));
        Ok(Some(StreamOutput {
            time_s: self.params.window_s + j as f64 * self.params.stride_s,
            probability,
            label: self.model.label_for(probability),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pretrained, ChannelSet};
    use crate::preprocess::{ChannelCalibration, FeatureMode, NormConstants};

    fn identity_calibration(channels: usize, rate: u32, window_s: f64, stride_s: f64) -> Calibration {
        let unit = NormConstants {
            offset: 0.0,
            scale: 1.0,
        };
        Calibration {
            sampling_rate_hz: rate,
            window_s,
            stride_s,
            feature_mode: FeatureMode::SampleVariance,
            channels: (1..=channels)
                .map(|channel| ChannelCalibration {
                    channel,
                    signal: unit,
                    mu: unit,
                    sigma: unit,
                })
                .collect(),
        }
    }

    #[test]
    fn ring_buffer_keeps_latest_in_order() {
        let mut rb = RingBuffer::with_capacity(3);
        rb.push(1.0);
        rb.push(2.0);
        assert_eq!(rb.iter().collect::<Vec<_>>(), vec![1.0, 2.0]);
        assert!(!rb.is_full());
        for v in 3..=7 {
            rb.push(v as f64);
        }
        assert!(rb.is_full());
        assert_eq!(rb.iter().collect::<Vec<_>>(), vec![5.0, 6.0, 7.0]);
    }

    #[test]
    fn silent_until_window_fills() {
        let cal = identity_calibration(3, 10, 2.0, 1.0);
        let mut sc = StreamingClassifier::new(pretrained(ChannelSet::C12), cal).unwrap();
        for _ in 0..19 {
            assert!(sc.push(&[0.1, 0.2, 0.3]).unwrap().is_none());
        }
        let out = sc.push(&[0.1, 0.2, 0.3]).unwrap().unwrap();
        assert_eq!(out.time_s, 2.0);
        for _ in 0..9 {
            assert!(sc.push(&[0.1, 0.2, 0.3]).unwrap().is_none());
        }
        assert_eq!(sc.push(&[0.1, 0.2, 0.3]).unwrap().unwrap().time_s, 3.0);
    }

    #[test]
    fn constant_frames_give_fixed_probability() {
        let cal = identity_calibration(2, 10, 1.0, 0.5);
        let mut sc = StreamingClassifier::new(pretrained(ChannelSet::C12), cal).unwrap();
        let outs: Vec<_> = (0..100)
            .filter_map(|_| sc.push(&[0.5, 0.5]).unwrap())
            .collect();
        assert_eq!(outs.len(), 19);
        // sigma = 0, mu = 0.5: z = -3.02 - 0.5 * 0.51 - 0.5 * 1.56
        let expected = sigmoid(-3.02 + 0.5 * -0.51 + 0.5 * -1.56);
        assert!(outs.iter().all(|o| o.probability == outs[0].probability));
        assert!((outs[0].probability - expected).abs() < 1e-15);
    }

    #[test]
    fn push_before_calibration_fails() {
        let mut sc = StreamingClassifier::uncalibrated(
            pretrained(ChannelSet::C12),
            400,
            FeatureParams::default(),
        )
        .unwrap();
        assert!(matches!(sc.push(&[0.0, 0.0]), Err(Error::NotCalibrated)));
        sc.set_calibration(identity_calibration(2, 400, 10.0, 1.0)).unwrap();
        assert!(sc.push(&[0.0, 0.0]).unwrap().is_none());
        assert!(sc.push(&[0.0]).is_err());
    }

    #[test]
    fn calibration_must_cover_model_channels() {
        let cal = identity_calibration(2, 400, 10.0, 1.0);
        assert!(StreamingClassifier::new(pretrained(ChannelSet::C13), cal).is_err());
    }
}
