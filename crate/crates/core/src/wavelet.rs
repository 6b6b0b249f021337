//! Morlet continuous wavelet transform, band energies and double-threshold
//! BS/WS markup used to produce training labels.
//!
//! The transform is parameterized by frequency: the mother wavelet
//! `psi(x) = pi^(-1/4) e^(-1/4) e^(i 2 pi x) e^(-x^2 / 2)` is evaluated at
//! `x = f (t - t0)`, so a tone of `f0` Hz peaks near `f = f0`:
//!
//! ```text
//! W(f, t0) = sqrt(f) * sum_k x(t_k) conj(psi(f (t_k - t0))) dt,   dt = 1 / f_d
//! ```
//!
//! The kernel is truncated where the Gaussian envelope drops below 1e-8 of
//! its peak.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Hypnogram, Recording, BS, WS};

/// Relative envelope level at which the kernel is cut.
pub const ENVELOPE_CUTOFF: f64 = 1e-8;

/// Half-width of the kernel in units of `f (t - t0)`.
pub fn morlet_support() -> f64 {
    (-2.0 * ENVELOPE_CUTOFF.ln()).sqrt()
}

/// The mother wavelet.
pub fn morlet(x: f64) -> Complex64 {
    let norm = PI.powf(-0.25) * (-0.25f64).exp() * (-0.5 * x * x).exp();
    Complex64::from_polar(norm, 2.0 * PI * x)
}

/// `lo, lo + step, ..` up to and including `hi` (within 1e-9).
pub fn frequency_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CwtSurface {
    pub frequencies_hz: Vec<f64>,
    pub times_s: Vec<f64>,
    /// `coefficients[f][t]`.
    pub coefficients: Vec<Vec<Complex64>>,
}

impl CwtSurface {
    /// Grid frequency with the largest `|W|` at time column `t`.
    pub fn peak_frequency(&self, t: usize) -> f64 {
        let (i, _) = self
            .coefficients
            .iter()
            .map(|row| row[t].norm_sqr())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
        self.frequencies_hz[i]
    }
}

/// CWT at every sample.
pub fn cwt_morlet(signal: &[f64], sampling_rate_hz: u32, frequencies_hz: &[f64]) -> Result<CwtSurface> {
    cwt_morlet_strided(signal, sampling_rate_hz, frequencies_hz, 0, 1)
}

/// CWT at samples `first, first + hop, ..`.
pub fn cwt_morlet_strided(
    signal: &[f64],
    sampling_rate_hz: u32,
    frequencies_hz: &[f64],
    first: usize,
    hop: usize,
) -> Result<CwtSurface> {
    if signal.is_empty() {
        return Err(Error::Empty("cannot transform an empty signal"));
    }
    if sampling_rate_hz == 0 || hop == 0 {
        return Err(Error::InvalidParameter("sampling rate and hop must be positive".into()));
    }
    if frequencies_hz.is_empty() {
        return Err(Error::Empty("frequency grid is empty"));
    }
    if let Some(f) = frequencies_hz.iter().find(|&&f| !(f > 0.0 && f.is_finite())) {
        return Err(Error::InvalidParameter(format!("nonpositive frequency {f}")));
    }
    let fs = sampling_rate_hz as f64;
    let positions: Vec<usize> = (first..signal.len()).step_by(hop).collect();
    let coefficients = frequencies_hz
        .par_iter()
        .map(|&f| {
            let kernel = kernel(f, fs);
            let half = (kernel.len() / 2) as isize;
            positions
                .iter()
                .map(|&n| {
                    let n = n as isize;
                    let lo = (n - half).max(0);
                    let hi = (n + half).min(signal.len() as isize - 1);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in lo..=hi {
                        acc += kernel[(m - n + half) as usize] * signal[m as usize];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(CwtSurface {
        frequencies_hz: frequencies_hz.to_vec(),
        times_s: positions.iter().map(|&n| n as f64 / fs).collect(),
        coefficients,
    })
}

/// Taps `sqrt(f) conj(psi(f k / fs)) / fs` for `k = -K..=K`.
fn kernel(f: f64, fs: f64) -> Vec<Complex64> {
    let half = (morlet_support() * fs / f).floor() as isize;
    let gain = f.sqrt() / fs;
    (-half..=half)
        .map(|k| morlet(f * k as f64 / fs).conj() * gain)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Band {
    pub const fn new(lo_hz: f64, hi_hz: f64) -> Self {
        Self { lo_hz, hi_hz }
    }
}

/// The four comparison bands: 2.5-4.5, 5-10, 10.5-12.5 and 15-18 Hz.
pub const DEFAULT_BANDS: [Band; 4] = [
    Band::new(2.5, 4.5),
    Band::new(5.0, 10.0),
    Band::new(10.5, 12.5),
    Band::new(15.0, 18.0),
];

#[derive(Debug, Clone, PartialEq)]
pub struct BandEnergySeries {
    pub band: Band,
    pub times_s: Vec<f64>,
    pub energy: Vec<f64>,
}

/// Trapezoidal integral of `|W|^2` over the grid frequencies inside the band.
pub fn band_energy(surf: &CwtSurface, band: Band) -> Result<BandEnergySeries> {
    const EPS: f64 = 1e-9;
    if !(band.lo_hz < band.hi_hz) {
        return Err(Error::InvalidParameter(format!(
            "band [{}, {}] is empty",
            band.lo_hz, band.hi_hz
        )));
    }
    let freqs = &surf.frequencies_hz;
    let (first, last) = (freqs[0], freqs[freqs.len() - 1]);
    if band.lo_hz < first - EPS || band.hi_hz > last + EPS {
        return Err(Error::InvalidParameter(format!(
            "band [{}, {}] Hz lies outside the grid [{first}, {last}] Hz",
            band.lo_hz, band.hi_hz
        )));
    }
    let rows: Vec<usize> = (0..freqs.len())
        .filter(|&i| freqs[i] >= band.lo_hz - EPS && freqs[i] <= band.hi_hz + EPS)
        .collect();
    if rows.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "band [{}, {}] Hz covers fewer than two grid frequencies",
            band.lo_hz, band.hi_hz
        )));
    }
    let energy = (0..surf.times_s.len())
        .map(|t| {
            rows.windows(2)
                .map(|w| {
                    let (a, b) = (w[0], w[1]);
                    let df = freqs[b] - freqs[a];
                    0.5 * df
                        * (surf.coefficients[a][t].norm_sqr() + surf.coefficients[b][t].norm_sqr())
                })
                .sum()
        })
        .collect();
    Ok(BandEnergySeries {
        band,
        times_s: surf.times_s.clone(),
        energy,
    })
}

/// Onset (`tr1`) and offset (`tr2`) thresholds of one band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub tr1: f64,
    pub tr2: f64,
    pub comparison_window_s: f64,
}

impl ThresholdConfig {
    pub fn new(tr1: f64, tr2: f64, comparison_window_s: f64) -> Result<Self> {
        if !(tr2 > 0.0 && tr1 >= tr2 && tr1.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "thresholds need tr1 >= tr2 > 0, got tr1 = {tr1}, tr2 = {tr2}"
            )));
        }
        if !(comparison_window_s > 0.0) {
            return Err(Error::InvalidParameter("comparison window must be positive".into()));
        }
        Ok(Self {
            tr1,
            tr2,
            comparison_window_s,
        })
    }
}

/// Linear-interpolation percentile (`p` in [0, 100]) of unsorted values.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (rank - lo as f64) * (sorted[hi] - sorted[lo])
}

pub const DEFAULT_ONSET_PERCENTILE: f64 = 75.0;
pub const DEFAULT_OFFSET_PERCENTILE: f64 = 60.0;
pub const DEFAULT_COMPARISON_WINDOW_S: f64 = 0.5;

pub fn estimate_thresholds(energy: &[f64], onset_pct: f64, offset_pct: f64) -> Result<ThresholdConfig> {
    if energy.is_empty() {
        return Err(Error::Empty("no energy values"));
    }
    if !(0.0 < offset_pct && offset_pct <= onset_pct && onset_pct < 100.0) {
        return Err(Error::InvalidParameter(format!(
            "percentiles need 0 < offset ({offset_pct}) <= onset ({onset_pct}) < 100"
        )));
    }
    ThresholdConfig::new(
        percentile(energy, onset_pct),
        percentile(energy, offset_pct),
        DEFAULT_COMPARISON_WINDOW_S,
    )
}

/// How per-band threshold crossings combine into one decision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandFusion {
    #[default]
    Majority,
    All,
    Any,
}

impl BandFusion {
    fn holds(self, count: usize, total: usize) -> bool {
        match self {
            BandFusion::Majority => 2 * count > total,
            BandFusion::All => count == total,
            BandFusion::Any => count > 0,
        }
    }
}

/// How channel energies combine before thresholding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelCombine {
    #[default]
    Mean,
    Max,
}

/// Hysteresis over blocks. Starts in WS; enters BS when the fused count of
/// bands above `tr1` holds, returns to WS when the fused count of bands
/// below `tr2` holds.
///
/// `energy[band][block]`.
pub fn detect_states(
    energy: &[Vec<f64>],
    thresholds: &[ThresholdConfig],
    fusion: BandFusion,
) -> Result<Vec<u8>> {
    if energy.len() != thresholds.len() || energy.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: energy.len(),
            actual: thresholds.len(),
        });
    }
    let blocks = energy[0].len();
    if energy.iter().any(|e| e.len() != blocks) {
        return Err(Error::InvalidParameter("band energy traces differ in length".into()));
    }
    let bands = energy.len();
    let mut state = WS;
    let mut out = Vec::with_capacity(blocks);
    for b in 0..blocks {
        state = if state == WS {
            let above = energy.iter().zip(thresholds).filter(|(e, t)| e[b] > t.tr1).count();
            if fusion.holds(above, bands) { BS } else { WS }
        } else {
            let below = energy.iter().zip(thresholds).filter(|(e, t)| e[b] < t.tr2).count();
            if fusion.holds(below, bands) { WS } else { BS }
        };
        out.push(state);
    }
    Ok(out)
}

/// Samples block labels onto `t_j = start + j * stride`, `t_j <= duration`,
/// taking the label of the block that contains each `t_j` (the last block
/// for `t_j` at the very end).
pub fn blocks_to_hypnogram(
    block_labels: &[u8],
    block_s: f64,
    duration_s: f64,
    start_s: f64,
    stride_s: f64,
) -> Result<Hypnogram> {
    if block_labels.is_empty() {
        return Err(Error::Empty("no markup blocks"));
    }
    if start_s < 0.0 || start_s > duration_s {
        return Err(Error::InvalidParameter(format!(
            "hypnogram start {start_s} s outside the {duration_s} s recording"
        )));
    }
    let n = ((duration_s - start_s) / stride_s + 1e-9).floor() as usize + 1;
    let labels = (0..n)
        .map(|j| {
            let t = start_s + j as f64 * stride_s;
            let b = ((t / block_s + 1e-9).floor() as usize).min(block_labels.len() - 1);
            block_labels[b]
        })
        .collect();
    Hypnogram::new(start_s, stride_s, labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ThresholdSource {
    /// One threshold pair per band.
    Fixed { per_band: Vec<ThresholdConfig> },
    /// Per-band percentiles of the recording's own block energies.
    Percentile { onset_pct: f64, offset_pct: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarkupConfig {
    pub bands: Vec<Band>,
    pub thresholds: ThresholdSource,
    pub comparison_window_s: f64,
    pub fusion: BandFusion,
    pub channel_combine: ChannelCombine,
    pub grid_lo_hz: f64,
    pub grid_hi_hz: f64,
    pub grid_step_hz: f64,
}

impl Default for MarkupConfig {
    fn default() -> Self {
        Self {
            bands: DEFAULT_BANDS.to_vec(),
            thresholds: ThresholdSource::Percentile {
                onset_pct: DEFAULT_ONSET_PERCENTILE,
                offset_pct: DEFAULT_OFFSET_PERCENTILE,
            },
            comparison_window_s: DEFAULT_COMPARISON_WINDOW_S,
            fusion: BandFusion::Majority,
            channel_combine: ChannelCombine::Mean,
            grid_lo_hz: 2.0,
            grid_hi_hz: 20.0,
            grid_step_hz: 0.25,
        }
    }
}

/// Channel-combined band energy at the centre of each comparison block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEnergies {
    pub block_s: f64,
    pub times_s: Vec<f64>,
    pub bands: Vec<Band>,
    /// `energy[band][block]`.
    pub energy: Vec<Vec<f64>>,
}

impl BlockEnergies {
    /// `time_s,E_band1,...` rows, one per block.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time_s");
        for k in 1..=self.bands.len() {
            out.push_str(&format!(",E_band{k}"));
        }
        out.push('\n');
        for (b, t) in self.times_s.iter().enumerate() {
            out.push_str(&format!("{t}"));
            for e in &self.energy {
                out.push_str(&format!(",{:.16e}", e[b]));
            }
            out.push('\n');
        }
        out
    }
}

pub fn block_energies(rec: &Recording, cfg: &MarkupConfig) -> Result<BlockEnergies> {
    let fs = rec.sampling_rate_hz() as f64;
    let block_len = cfg.comparison_window_s * fs;
    if !(block_len >= 1.0) || (block_len - block_len.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "comparison window of {} s is not a whole number of samples",
            cfg.comparison_window_s
        )));
    }
    let block_len = block_len.round() as usize;
    let blocks = rec.len() / block_len;
    if blocks == 0 {
        return Err(Error::InvalidParameter(
            "recording is shorter than one comparison window".into(),
        ));
    }
    if cfg.bands.is_empty() {
        return Err(Error::Empty("no markup bands"));
    }
    let grid = frequency_grid(cfg.grid_lo_hz, cfg.grid_hi_hz, cfg.grid_step_hz);
    let mut combined = vec![vec![0.0; blocks]; cfg.bands.len()];
    for (c, ch) in rec.channels().iter().enumerate() {
        let surf = cwt_morlet_strided(&ch[..blocks * block_len], rec.sampling_rate_hz(), &grid, block_len / 2, block_len)?;
        for (k, &band) in cfg.bands.iter().enumerate() {
            let e = band_energy(&surf, band)?;
            for (acc, v) in combined[k].iter_mut().zip(e.energy) {
                *acc = match cfg.channel_combine {
                    ChannelCombine::Mean => *acc + v / rec.channel_count() as f64,
                    ChannelCombine::Max if c == 0 => v,
                    ChannelCombine::Max => acc.max(v),
                };
            }
        }
    }
    Ok(BlockEnergies {
        block_s: cfg.comparison_window_s,
        times_s: (0..blocks)
            .map(|b| (b * block_len + block_len / 2) as f64 / fs)
            .collect(),
        bands: cfg.bands.clone(),
        energy: combined,
    })
}

#[derive(Debug, Clone)]
pub struct Markup {
    pub hypnogram: Hypnogram,
    pub block_labels: Vec<u8>,
    pub thresholds: Vec<ThresholdConfig>,
    pub energies: BlockEnergies,
}

/// Labels a recording BS/WS and samples the result on
/// `start_s + j * stride_s`.
pub fn markup_bs_ws(rec: &Recording, cfg: &MarkupConfig, start_s: f64, stride_s: f64) -> Result<Markup> {
    let energies = block_energies(rec, cfg)?;
    let thresholds = match &cfg.thresholds {
        ThresholdSource::Fixed { per_band } => {
            if per_band.len() != cfg.bands.len() {
                return Err(Error::DimensionMismatch {
                    expected: cfg.bands.len(),
                    actual: per_band.len(),
                });
            }
            per_band.clone()
        }
        ThresholdSource::Percentile { onset_pct, offset_pct } => energies
            .energy
            .iter()
            .map(|e| {
                let t = estimate_thresholds(e, *onset_pct, *offset_pct)?;
                ThresholdConfig::new(t.tr1, t.tr2, cfg.comparison_window_s)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let block_labels = detect_states(&energies.energy, &thresholds, cfg.fusion)?;
    let hypnogram = blocks_to_hypnogram(
        &block_labels,
        cfg.comparison_window_s,
        rec.duration_s(),
        start_s,
        stride_s,
    )?;
    Ok(Markup {
        hypnogram,
        block_labels,
        thresholds,
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tone(freq: f64, seconds: f64, fs: u32) -> Vec<f64> {
        (0..(seconds * fs as f64) as usize)
            .map(|i| (2.0 * PI * freq * i as f64 / fs as f64).sin())
            .collect()
    }

    #[test]
    fn zero_signal_gives_zero_surface() {
        let surf = cwt_morlet(&[0.0; 64], 32, &[2.0, 4.0]).unwrap();
        assert!(surf.coefficients.iter().flatten().all(|c| c.norm() == 0.0));
        let e = band_energy(&surf, Band::new(2.0, 4.0)).unwrap();
        assert!(e.energy.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn transform_is_linear() {
        let x: Vec<f64> = (0..200).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let grid = frequency_grid(2.0, 10.0, 1.0);
        let a = cwt_morlet(&x, 100, &grid).unwrap();
        let b = cwt_morlet(&x2, 100, &grid).unwrap();
        for (ra, rb) in a.coefficients.iter().zip(&b.coefficients) {
            for (ca, cb) in ra.iter().zip(rb) {
                assert_relative_eq!(cb.re, 2.0 * ca.re, max_relative = 1e-12, epsilon = 1e-14);
                assert_relative_eq!(cb.im, 2.0 * ca.im, max_relative = 1e-12, epsilon = 1e-14);
            }
        }
        let ea = band_energy(&a, Band::new(4.0, 8.0)).unwrap();
        let eb = band_energy(&b, Band::new(4.0, 8.0)).unwrap();
        for (u, v) in ea.energy.iter().zip(&eb.energy) {
            assert_relative_eq!(*v, 4.0 * u, max_relative = 1e-12, epsilon = 1e-24);
        }
    }

    #[test]
    fn cwt_argument_errors() {
        assert!(cwt_morlet(&[], 100, &[1.0]).is_err());
        assert!(cwt_morlet(&[1.0, 2.0], 100, &[1.0, 0.0]).is_err());
        assert!(cwt_morlet(&[1.0, 2.0], 100, &[-3.0]).is_err());
    }

    #[test]
    fn strided_matches_dense_columns() {
        let x = tone(5.0, 2.0, 100);
        let grid = [4.0, 5.0, 6.0];
        let dense = cwt_morlet(&x, 100, &grid).unwrap();
        let sparse = cwt_morlet_strided(&x, 100, &grid, 25, 50).unwrap();
        assert_eq!(sparse.times_s, vec![0.25, 0.75, 1.25, 1.75]);
        for (f, row) in sparse.coefficients.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                assert_eq!(*c, dense.coefficients[f][25 + 50 * k]);
            }
        }
    }

    #[test]
    fn band_outside_grid_is_rejected() {
        let surf = cwt_morlet(&tone(5.0, 1.0, 100), 100, &frequency_grid(2.0, 10.0, 0.5)).unwrap();
        assert!(band_energy(&surf, Band::new(1.0, 4.0)).is_err());
        assert!(band_energy(&surf, Band::new(8.0, 12.0)).is_err());
        assert!(band_energy(&surf, Band::new(5.0, 5.0)).is_err());
    }

    #[test]
    fn percentile_thresholds() {
        let t = estimate_thresholds(&[1.0, 2.0, 3.0, 4.0], 75.0, 50.0).unwrap();
        assert_relative_eq!(t.tr1, 3.25);
        assert_relative_eq!(t.tr2, 2.5);
        let t = estimate_thresholds(&[7.0; 5], 75.0, 60.0).unwrap();
        assert_eq!((t.tr1, t.tr2), (7.0, 7.0));
        assert!(estimate_thresholds(&[1.0, 2.0], 50.0, 75.0).is_err());
        assert!(estimate_thresholds(&[1.0, 2.0], 100.0, 75.0).is_err());
        assert!(estimate_thresholds(&[], 75.0, 60.0).is_err());
    }

    #[test]
    fn threshold_invariant() {
        assert!(ThresholdConfig::new(1.0, 2.0, 0.5).is_err());
        assert!(ThresholdConfig::new(1.0, 0.0, 0.5).is_err());
        assert!(ThresholdConfig::new(1.0, 1.0, 0.5).is_ok());
    }

    #[test]
    fn states_follow_thresholds() {
        let th = [ThresholdConfig::new(1.0, 0.5, 0.5).unwrap()];
        let low = vec![vec![0.1; 20]];
        let high = vec![vec![5.0; 20]];
        assert!(detect_states(&low, &th, BandFusion::Majority).unwrap().iter().all(|&s| s == WS));
        assert!(detect_states(&high, &th, BandFusion::Majority).unwrap().iter().all(|&s| s == BS));
        // Between the thresholds the state is held.
        let trace = vec![vec![0.1, 2.0, 0.7, 0.7, 0.4, 0.7]];
        assert_eq!(
            detect_states(&trace, &th, BandFusion::Majority).unwrap(),
            vec![0, 1, 1, 1, 0, 0]
        );
    }

    #[test]
    fn fusion_rules() {
        let th = vec![ThresholdConfig::new(1.0, 0.5, 0.5).unwrap(); 3];
        let e = vec![vec![2.0], vec![2.0], vec![0.0]];
        assert_eq!(detect_states(&e, &th, BandFusion::Majority).unwrap(), vec![BS]);
        assert_eq!(detect_states(&e, &th, BandFusion::All).unwrap(), vec![WS]);
        let e = vec![vec![2.0], vec![0.0], vec![0.0]];
        assert_eq!(detect_states(&e, &th, BandFusion::Any).unwrap(), vec![BS]);
        assert_eq!(detect_states(&e, &th, BandFusion::Majority).unwrap(), vec![WS]);
    }

    #[test]
    fn block_resampling() {
        let blocks = [0, 0, 1, 1, 1, 0];
        let h = blocks_to_hypnogram(&blocks, 0.5, 3.0, 0.0, 1.0).unwrap();
        assert_eq!(h.labels(), &[0, 1, 1, 0]);
        let h = blocks_to_hypnogram(&blocks, 0.5, 3.0, 0.5, 0.5).unwrap();
        assert_eq!(h.labels(), &[0, 1, 1, 1, 0, 0]);
    }
}
