//! Two-stage normalization and trailing-window mean/deviation features.
//!
//! Stage one maps every channel with `y = (x - min) / (2 * mean(x - min))`,
//! so the shifted signal has minimum 0 and mean 0.5. Windowed means and
//! deviations are then taken over the `window_s * f_d` samples strictly
//! preceding each `t_j = window_s + j * stride_s`. Stage two applies the same
//! map to every resulting feature sequence.
//!
//! The deviation feature is, by default, `sum |x - mu|^2 / (N - 1)` without a
//! square root ([`FeatureMode::SampleVariance`]); [`FeatureMode::StdDev`]
//! takes the root.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{recover_grid, Recording};

/// Whole-sample tolerance for window and stride lengths.
const SAMPLE_COUNT_TOLERANCE: f64 = 1e-9;

/// Offset and scale of one min-shift / half-mean normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormConstants {
    pub offset: f64,
    pub scale: f64,
}

impl NormConstants {
    /// `offset = min(x)`, `scale = 2 * mean(x - offset)`.
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("cannot normalize an empty sequence"));
        }
        let offset = values.iter().copied().fold(f64::INFINITY, f64::min);
        let sum = values.iter().fold(0.0, |acc, &v| acc + (v - offset));
        let scale = 2.0 * sum / values.len() as f64;
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::DegenerateSignal);
        }
        Ok(Self { offset, scale })
    }

    #[inline]
    pub fn apply(&self, value: f64) -> f64 {
        (value - self.offset) / self.scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSignal {
    pub samples: Vec<f64>,
    pub constants: NormConstants,
}

impl NormalizedSignal {
    pub fn offset(&self) -> f64 {
        self.constants.offset
    }

    pub fn scale(&self) -> f64 {
        self.constants.scale
    }
}

pub fn normalize(signal: &[f64]) -> Result<NormalizedSignal> {
    let constants = NormConstants::fit(signal)?;
    Ok(normalize_with(signal, constants))
}

/// Applies previously fitted constants, e.g. from a calibration recording.
pub fn normalize_with(signal: &[f64], constants: NormConstants) -> NormalizedSignal {
    let samples: Vec<f64> = signal.iter().map(|&v| constants.apply(v)).collect();
    let above = samples.iter().filter(|&&v| v > 1.0).count();
    if above > 0 {
        log::debug!(
            "{above} of {} normalized samples exceed 1 (skewed signal)",
            samples.len()
        );
    }
    NormalizedSignal { samples, constants }
}

/// Form of the windowed deviation feature.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureMode {
    /// `sum |x - mu|^2 / (N - 1)`, no square root.
    #[default]
    #[serde(rename = "literal-eq3")]
    SampleVariance,
    /// Square root of the above.
    #[serde(rename = "true-std")]
    StdDev,
}

impl FeatureMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::SampleVariance => "literal-eq3",
            FeatureMode::StdDev => "true-std",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    pub window_s: f64,
    pub stride_s: f64,
    pub mode: FeatureMode,
}

impl Default for FeatureParams {
    fn default() -> Self {
        Self {
            window_s: 10.0,
            stride_s: 1.0,
            mode: FeatureMode::SampleVariance,
        }
    }
}

impl FeatureParams {
    /// Window and stride lengths in samples.
    pub fn sample_counts(&self, sampling_rate_hz: u32) -> Result<(usize, usize)> {
        let fs = sampling_rate_hz as f64;
        let window = whole_samples("window", self.window_s, fs)?;
        let stride = whole_samples("stride", self.stride_s, fs)?;
        if window < 2 {
            return Err(Error::InvalidParameter(
                "window must span at least 2 samples".into(),
            ));
        }
        Ok((window, stride))
    }
}

fn whole_samples(what: &str, seconds: f64, fs: f64) -> Result<usize> {
    let n = seconds * fs;
    if !(seconds > 0.0) || !n.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{what} must be positive, got {seconds} s"
        )));
    }
    let rounded = n.round();
    if (n - rounded).abs() > SAMPLE_COUNT_TOLERANCE || rounded < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "{what} of {seconds} s is not a whole number of samples at {fs} Hz"
        )));
    }
    Ok(rounded as usize)
}

/// Mean and deviation of one window, two-pass, summed in iteration order.
///
/// Shared by the offline extractor and the streaming classifier so both
/// produce bitwise-identical features.
#[inline]
pub(crate) fn window_stats<I>(samples: I, n: usize, mode: FeatureMode) -> (f64, f64)
where
    I: Iterator<Item = f64> + Clone,
{
    let mean = samples.clone().fold(0.0, |acc, x| acc + x) / n as f64;
    let ss = samples.fold(0.0, |acc, x| {
        let d = x - mean;
        acc + d * d
    });
    let var = ss / (n - 1) as f64;
    let dev = match mode {
        FeatureMode::SampleVariance => var,
        FeatureMode::StdDev => var.sqrt(),
    };
    (mean, dev)
}

/// All channels of a recording after stage-one normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedRecording {
    pub channels: Vec<NormalizedSignal>,
    pub sampling_rate_hz: u32,
    /// 1-based channel numbers.
    pub channel_ids: Vec<usize>,
}

pub fn normalize_recording(rec: &Recording) -> Result<NormalizedRecording> {
    let channels = rec
        .channels()
        .iter()
        .map(|ch| normalize(ch))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalizedRecording {
        channels,
        sampling_rate_hz: rec.sampling_rate_hz(),
        channel_ids: (1..=rec.channel_count()).collect(),
    })
}

pub fn normalize_recording_with(
    rec: &Recording,
    constants: &[NormConstants],
) -> Result<NormalizedRecording> {
    if constants.len() != rec.channel_count() {
        return Err(Error::ChannelMismatch(format!(
            "{} normalization constants for {} channels",
            constants.len(),
            rec.channel_count()
        )));
    }
    Ok(NormalizedRecording {
        channels: rec
            .channels()
            .iter()
            .zip(constants)
            .map(|(ch, &c)| normalize_with(ch, c))
            .collect(),
        sampling_rate_hz: rec.sampling_rate_hz(),
        channel_ids: (1..=rec.channel_count()).collect(),
    })
}

/// Per-channel windowed mean and deviation on the grid
/// `t_j = start_time_s + j * stride_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSeries {
    pub window_s: f64,
    pub stride_s: f64,
    pub start_time_s: f64,
    pub mode: FeatureMode,
    /// 1-based channel numbers, one per `mu`/`sigma` entry.
    pub channel_ids: Vec<usize>,
    pub mu: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
}

impl FeatureSeries {
    pub fn len(&self) -> usize {
        self.mu.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time_at(&self, j: usize) -> f64 {
        self.start_time_s + j as f64 * self.stride_s
    }

    pub fn position_of(&self, channel_id: usize) -> Option<usize> {
        self.channel_ids.iter().position(|&c| c == channel_id)
    }

    /// `(mu_a, sigma_a, mu_b, sigma_b, ..)` at window `j` for the given
    /// channel positions.
    pub fn feature_vector_into(&self, j: usize, positions: &[usize], out: &mut Vec<f64>) {
        out.clear();
        for &p in positions {
            out.push(self.mu[p][j]);
            out.push(self.sigma[p][j]);
        }
    }
}

/// Number of windows: `floor((len - window) / stride) + 1`, or 0 when the
/// signal is shorter than one window.
pub fn window_count(len: usize, window: usize, stride: usize) -> usize {
    if len < window {
        0
    } else {
        (len - window) / stride + 1
    }
}

pub fn sliding_features(rec: &NormalizedRecording, params: &FeatureParams) -> Result<FeatureSeries> {
    let (window, stride) = params.sample_counts(rec.sampling_rate_hz)?;
    let len = rec.channels.first().map_or(0, |c| c.samples.len());
    let count = window_count(len, window, stride);
    if count == 0 {
        return Err(Error::InvalidParameter(format!(
            "window of {} s is longer than the {} s signal",
            params.window_s,
            len as f64 / rec.sampling_rate_hz as f64
        )));
    }
    let mode = params.mode;
    let (mu, sigma): (Vec<_>, Vec<_>) = rec
        .channels
        .par_iter()
        .map(|ch| {
            let mut mu = Vec::with_capacity(count);
            let mut sigma = Vec::with_capacity(count);
            for j in 0..count {
                let w = &ch.samples[j * stride..j * stride + window];
                let (m, s) = window_stats(w.iter().copied(), window, mode);
                mu.push(m);
                sigma.push(s);
            }
            (mu, sigma)
        })
        .unzip();
    Ok(FeatureSeries {
        window_s: params.window_s,
        stride_s: params.stride_s,
        start_time_s: params.window_s,
        mode,
        channel_ids: rec.channel_ids.clone(),
        mu,
        sigma,
    })
}

/// Stage-two constants for one channel's feature pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureNorm {
    pub mu: NormConstants,
    pub sigma: NormConstants,
}

pub fn renormalize_features(fs: &FeatureSeries) -> Result<(FeatureSeries, Vec<FeatureNorm>)> {
    let norms = fs
        .mu
        .iter()
        .zip(&fs.sigma)
        .map(|(m, s)| {
            Ok(FeatureNorm {
                mu: NormConstants::fit(m)?,
                sigma: NormConstants::fit(s)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let out = apply_feature_norms(fs, &norms)?;
    Ok((out, norms))
}

pub fn apply_feature_norms(fs: &FeatureSeries, norms: &[FeatureNorm]) -> Result<FeatureSeries> {
    if norms.len() != fs.channel_ids.len() {
        return Err(Error::ChannelMismatch(format!(
            "{} feature normalizations for {} channels",
            norms.len(),
            fs.channel_ids.len()
        )));
    }
    let map = |seq: &[f64], c: NormConstants| seq.iter().map(|&v| c.apply(v)).collect::<Vec<_>>();
    Ok(FeatureSeries {
        mu: fs.mu.iter().zip(norms).map(|(m, n)| map(m, n.mu)).collect(),
        sigma: fs.sigma.iter().zip(norms).map(|(s, n)| map(s, n.sigma)).collect(),
        ..fs.clone()
    })
}

/// Everything needed to reproduce the feature pipeline on new data with
/// frozen normalization: stage-one constants per channel, stage-two
/// constants per feature sequence, and the window geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub sampling_rate_hz: u32,
    pub window_s: f64,
    pub stride_s: f64,
    pub feature_mode: FeatureMode,
    pub channels: Vec<ChannelCalibration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelCalibration {
    pub channel: usize,
    pub signal: NormConstants,
    pub mu: NormConstants,
    pub sigma: NormConstants,
}

impl Calibration {
    pub fn params(&self) -> FeatureParams {
        FeatureParams {
            window_s: self.window_s,
            stride_s: self.stride_s,
            mode: self.feature_mode,
        }
    }

    pub fn feature_norms(&self) -> Vec<FeatureNorm> {
        self.channels
            .iter()
            .map(|c| FeatureNorm {
                mu: c.mu,
                sigma: c.sigma,
            })
            .collect()
    }
}

/// Full two-stage pipeline with constants fitted on `rec` itself.
pub fn extract_features(rec: &Recording, params: &FeatureParams) -> Result<(FeatureSeries, Calibration)> {
    let normalized = normalize_recording(rec)?;
    let raw = sliding_features(&normalized, params)?;
    let (features, norms) = renormalize_features(&raw)?;
    let calibration = Calibration {
        sampling_rate_hz: rec.sampling_rate_hz(),
        window_s: params.window_s,
        stride_s: params.stride_s,
        feature_mode: params.mode,
        channels: normalized
            .channels
            .iter()
            .zip(&norms)
            .zip(&normalized.channel_ids)
            .map(|((sig, n), &id)| ChannelCalibration {
                channel: id,
                signal: sig.constants,
                mu: n.mu,
                sigma: n.sigma,
            })
            .collect(),
    };
    Ok((features, calibration))
}

/// Two-stage pipeline with frozen constants.
pub fn extract_features_calibrated(rec: &Recording, calibration: &Calibration) -> Result<FeatureSeries> {
    if calibration.sampling_rate_hz != rec.sampling_rate_hz() {
        return Err(Error::InvalidParameter(format!(
            "calibration is for {} Hz, recording is {} Hz",
            calibration.sampling_rate_hz,
            rec.sampling_rate_hz()
        )));
    }
    let signal: Vec<NormConstants> = calibration.channels.iter().map(|c| c.signal).collect();
    let normalized = normalize_recording_with(rec, &signal)?;
    let raw = sliding_features(&normalized, &calibration.params())?;
    apply_feature_norms(&raw, &calibration.feature_norms())
}

pub fn features_to_csv(fs: &FeatureSeries) -> String {
    let mut out = String::from("time_s");
    for id in &fs.channel_ids {
        out.push_str(&format!(",mu_{id},sigma_{id}"));
    }
    out.push('\n');
    for j in 0..fs.len() {
        out.push_str(&format!("{}", fs.time_at(j)));
        for (m, s) in fs.mu.iter().zip(&fs.sigma) {
            out.push_str(&format!(",{:.16e},{:.16e}", m[j], s[j]));
        }
        out.push('\n');
    }
    out
}

/// Parses a feature CSV. The window length is taken to equal the first
/// time stamp, as written by [`features_to_csv`].
pub fn parse_features_csv(text: &str, mode: FeatureMode) -> Result<FeatureSeries> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::MalformedHeader("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"time_s") || cols.len() < 3 || cols.len() % 2 != 1 {
        return Err(Error::MalformedHeader(format!(
            "expected `time_s,mu_1,sigma_1,...`, found {header:?}"
        )));
    }
    let mut channel_ids = Vec::new();
    for pair in cols[1..].chunks(2) {
        let id = pair[0]
            .strip_prefix("mu_")
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|id| pair[1] == format!("sigma_{id}"))
            .ok_or_else(|| Error::MalformedHeader(format!("bad column pair {pair:?}")))?;
        channel_ids.push(id);
    }

    let n = channel_ids.len();
    let mut times = Vec::new();
    let mut time_text = Vec::new();
    let mut mu = vec![Vec::new(); n];
    let mut sigma = vec![Vec::new(); n];
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected {} fields, found {}", cols.len(), fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            let v = s.parse::<f64>().map_err(|e| Error::Parse {
                line: lineno + 1,
                message: format!("{s:?}: {e}"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse {
                    line: lineno + 1,
                    message: "non-finite feature".into(),
                })
            }
        };
        times.push(parse(fields[0])?);
        time_text.push(fields[0]);
        for c in 0..n {
            mu[c].push(parse(fields[1 + 2 * c])?);
            sigma[c].push(parse(fields[2 + 2 * c])?);
        }
    }
    let (start, stride) = recover_grid(&times, &time_text)?;
    Ok(FeatureSeries {
        window_s: start,
        stride_s: stride,
        start_time_s: start,
        mode,
        channel_ids,
        mu,
        sigma,
    })
}
