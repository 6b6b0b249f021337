//! Synthetic multichannel ECoG with a known BS/WS schedule.
//!
//! Waking segments are low-amplitude white noise. Sleep segments are
//! higher-amplitude: a sum of five random-phase sinusoids in 0.5-4 Hz plus
//! white noise, with optional 0.5 s Hann-windowed 14 Hz spindle bursts.
//! Channels share segment timing and spindle times but draw independent
//! noise and phases. A per-channel subject gain multiplies the result last.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Hypnogram, Recording, BS, WS};

const DELTA_COMPONENTS: usize = 5;
const DELTA_BAND_HZ: (f64, f64) = (0.5, 4.0);
const SPINDLE_HZ: f64 = 14.0;
const SPINDLE_S: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum State {
    #[serde(rename = "WS")]
    Wake,
    #[serde(rename = "BS")]
    Sleep,
}

impl State {
    pub fn label(self) -> u8 {
        match self {
            State::Wake => WS,
            State::Sleep => BS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub state: State,
    pub duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub duration_s: f64,
    pub sampling_rate_hz: u32,
    pub schedule: Vec<Segment>,
    /// RMS amplitude per channel during waking, mV.
    pub ws_amplitude_mv: Vec<f64>,
    /// RMS amplitude per channel during sleep, mV.
    pub bs_amplitude_mv: Vec<f64>,
    /// Fraction of sleep power in the delta oscillation.
    pub bs_delta_weight: f64,
    /// Spindle bursts per minute of sleep.
    pub spindle_rate_per_min: f64,
    /// RMS of white noise added everywhere, mV.
    pub noise_floor_mv: f64,
    pub subject_gain: Vec<f64>,
    pub seed: u64,
}

impl SynthSpec {
    /// Alternating WS/BS segments of `segment_s` each, starting awake, with
    /// three channels and sleep amplitude `ratio` times the waking one.
    pub fn alternating(segments: usize, segment_s: f64, ratio: f64, seed: u64) -> Self {
        let schedule = (0..segments)
            .map(|i| Segment {
                state: if i % 2 == 0 { State::Wake } else { State::Sleep },
                duration_s: segment_s,
            })
            .collect();
        Self {
            duration_s: segments as f64 * segment_s,
            sampling_rate_hz: 400,
            schedule,
            ws_amplitude_mv: vec![20.0; 3],
            bs_amplitude_mv: vec![20.0 * ratio; 3],
            bs_delta_weight: 0.8,
            spindle_rate_per_min: 6.0,
            noise_floor_mv: 1.0,
            subject_gain: vec![1.0; 3],
            seed,
        }
    }

    pub fn channel_count(&self) -> usize {
        self.subject_gain.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.duration_s > 0.0) || self.sampling_rate_hz == 0 {
            return bad("duration and sampling rate must be positive".into());
        }
        if self.schedule.is_empty() || self.schedule.iter().any(|s| !(s.duration_s > 0.0)) {
            return bad("schedule needs segments of positive duration".into());
        }
        let total: f64 = self.schedule.iter().map(|s| s.duration_s).sum();
        if (total - self.duration_s).abs() > 1e-9 * self.duration_s.max(1.0) {
            return bad(format!(
                "schedule sums to {total} s but duration is {} s",
                self.duration_s
            ));
        }
        let n = self.channel_count();
        if n == 0 || self.ws_amplitude_mv.len() != n || self.bs_amplitude_mv.len() != n {
            return bad("amplitude and gain vectors must have one entry per channel".into());
        }
        for c in 0..n {
            let (ws, bs, g) = (self.ws_amplitude_mv[c], self.bs_amplitude_mv[c], self.subject_gain[c]);
            if !(ws > 0.0) || !(g > 0.0) {
                return bad(format!("channel {}: amplitudes and gain must be positive", c + 1));
            }
            if !(bs > ws) {
                return bad(format!("channel {}: sleep amplitude must exceed waking", c + 1));
            }
        }
        if !(0.0..=1.0).contains(&self.bs_delta_weight) {
            return bad("delta weight must lie in [0, 1]".into());
        }
        if !(self.spindle_rate_per_min >= 0.0) || !(self.noise_floor_mv >= 0.0) {
            return bad("spindle rate and noise floor must be nonnegative".into());
        }
        Ok(())
    }

    /// State over the half-open second `(t - 1, t]`, i.e. at `t - 0.5`.
    fn state_at(&self, t: f64) -> State {
        let mut end = 0.0;
        for seg in &self.schedule {
            end += seg.duration_s;
            if t < end {
                return seg.state;
            }
        }
        self.schedule[self.schedule.len() - 1].state
    }
}

/// Generates the recording and its ground-truth hypnogram.
///
/// The hypnogram is sampled at 1 s stride from `t = 1 s`; the label at `t`
/// is the state of the second ending at `t`, so every trailing feature
/// window end in `1..=duration` has a label.
pub fn generate(spec: &SynthSpec) -> Result<(Recording, Hypnogram)> {
    spec.validate()?;
    let fs = spec.sampling_rate_hz as f64;
    let total = (spec.duration_s * fs).round() as usize;
    let channels = spec.channel_count();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = vec![vec![0.0; total]; channels];

    let mut start_s = 0.0;
    for seg in &spec.schedule {
        let lo = (start_s * fs).round() as usize;
        let hi = (((start_s + seg.duration_s) * fs).round() as usize).min(total);
        start_s += seg.duration_s;
        match seg.state {
            State::Wake => {
                for (c, ch) in data.iter_mut().enumerate() {
                    let amp = spec.ws_amplitude_mv[c];
                    for v in &mut ch[lo..hi] {
                        *v = amp * gaussian(&mut rng);
                    }
                }
            }
            State::Sleep => fill_sleep(spec, &mut rng, &mut data, lo, hi),
        }
    }

    for (c, ch) in data.iter_mut().enumerate() {
        for v in ch.iter_mut() {
            *v = (*v + spec.noise_floor_mv * gaussian(&mut rng)) * spec.subject_gain[c];
        }
    }

    let rec = Recording::new(data, spec.sampling_rate_hz, Vec::new(), None)?;
    let n = (spec.duration_s + 1e-9).floor() as usize;
    let labels = (1..=n).map(|k| spec.state_at(k as f64 - 0.5).label()).collect();
    Ok((rec, Hypnogram::new(1.0, 1.0, labels)?))
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn fill_sleep(spec: &SynthSpec, rng: &mut ChaCha8Rng, data: &mut [Vec<f64>], lo: usize, hi: usize) {
    let fs = spec.sampling_rate_hz as f64;
    let w = spec.bs_delta_weight;

    // Spindle onsets, shared across channels.
    let mut spindles = Vec::new();
    if spec.spindle_rate_per_min > 0.0 {
        let gap = Exp::new(spec.spindle_rate_per_min / 60.0).expect("positive rate");
        let mut t = lo as f64 / fs + gap.sample(rng);
        while t + SPINDLE_S <= hi as f64 / fs {
            spindles.push((t * fs).round() as usize);
            t += SPINDLE_S + gap.sample(rng);
        }
    }
    let spindle_len = (SPINDLE_S * fs).round() as usize;

    for (c, ch) in data.iter_mut().enumerate() {
        let amp = spec.bs_amplitude_mv[c];
        // Five unit sinusoids have RMS sqrt(5/2).
        let delta_gain = amp * w.sqrt() / (DELTA_COMPONENTS as f64 / 2.0).sqrt();
        let noise_gain = amp * (1.0 - w).sqrt();
        let components: Vec<(f64, f64)> = (0..DELTA_COMPONENTS)
            .map(|_| {
                (
                    rng.random_range(DELTA_BAND_HZ.0..DELTA_BAND_HZ.1),
                    rng.random_range(0.0..2.0 * PI),
                )
            })
            .collect();
        for (i, v) in ch[lo..hi].iter_mut().enumerate() {
            let t = (lo + i) as f64 / fs;
            let delta: f64 = components
                .iter()
                .map(|&(f, phase)| (2.0 * PI * f * t + phase).sin())
                .sum();
            *v = delta_gain * delta + noise_gain * gaussian(rng);
        }
        for &onset in &spindles {
            for k in 0..spindle_len.min(hi - onset) {
                let hann = 0.5 - 0.5 * (2.0 * PI * k as f64 / (spindle_len - 1) as f64).cos();
                ch[onset + k] += amp * hann * (2.0 * PI * SPINDLE_HZ * k as f64 / fs).sin();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_sleep_schedule() {
        let spec = SynthSpec::alternating(4, 30.0, 3.0, 7);
        let (rec, hyp) = generate(&spec).unwrap();
        assert_eq!(rec.len(), 120 * 400);
        assert_eq!(rec.channel_count(), 3);
        assert_eq!(hyp.len(), 120);
        assert_eq!(hyp.bs_fraction(), 0.5);
        assert_eq!(hyp.start_time_s(), 1.0);
        assert_eq!(&hyp.labels()[28..32], &[0, 0, 1, 1]);
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = SynthSpec::alternating(2, 10.0, 3.0, 11);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SynthSpec { seed: 12, ..spec.clone() };
        assert_ne!(generate(&spec).unwrap().0, generate(&other).unwrap().0);
    }

    #[test]
    fn sleep_is_louder() {
        let spec = SynthSpec::alternating(2, 20.0, 3.0, 5);
        let (rec, _) = generate(&spec).unwrap();
        let ch = rec.channel(0);
        let rms = |s: &[f64]| (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt();
        let ratio = rms(&ch[8000..]) / rms(&ch[..8000]);
        assert!(ratio > 2.5 && ratio < 3.5, "{ratio}");
    }

    #[test]
    fn invalid_specs() {
        let good = SynthSpec::alternating(2, 10.0, 3.0, 1);
        let cases = [
            SynthSpec { duration_s: 25.0, ..good.clone() },
            SynthSpec { bs_amplitude_mv: vec![10.0; 3], ..good.clone() },
            SynthSpec { subject_gain: vec![1.0, 0.0, 1.0], ..good.clone() },
            SynthSpec { subject_gain: vec![1.0; 2], ..good.clone() },
            SynthSpec { bs_delta_weight: 1.5, ..good.clone() },
            SynthSpec { schedule: vec![], ..good.clone() },
        ];
        for spec in cases {
            assert!(generate(&spec).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SynthSpec::alternating(2, 10.0, 3.0, 1);
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains(r#""state":"WS""#));
        assert_eq!(serde_json::from_str::<SynthSpec>(&json).unwrap(), spec);
    }
}
