//! Recording and hypnogram I/O.
//!
//! Two recording formats are supported:
//!
//! * CSV: header `t,<label1>,<label2>[,<label3>]`, one row per sample. The
//!   time column is informative; the sampling rate is supplied by the caller
//!   and checked against the time column to 1 part in 10^6.
//! * raw-f32: little-endian `f32` values in channel-interleaved frame order
//!   (`s0c0 s0c1 .. s1c0 ..`) plus a `<name>.meta.json` sidecar.
//!
//! Hypnograms are stored as `time_s,label` CSV.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use byteorder::{ByteOrder, LittleEndian, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the hypnogram time stride, seconds.
pub const STRIDE_TOLERANCE_S: f64 = 1e-9;

/// Relative tolerance between the CSV time column and the declared rate.
pub const RATE_TOLERANCE: f64 = 1e-6;

/// Multichannel ECoG recording in millivolts.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    channels: Vec<Vec<f64>>,
    sampling_rate_hz: u32,
    channel_labels: Vec<String>,
    subject_id: Option<String>,
}

impl Recording {
    /// Builds a recording, checking every invariant. Labels default to
    /// `ECoG1`, `ECoG2`, ... when `channel_labels` is empty.
    pub fn new(
        channels: Vec<Vec<f64>>,
        sampling_rate_hz: u32,
        channel_labels: Vec<String>,
        subject_id: Option<String>,
    ) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::Empty("recording has no channels"));
        }
        if sampling_rate_hz == 0 {
            return Err(Error::InvalidParameter(
                "sampling rate must be positive".into(),
            ));
        }
        let len = channels[0].len();
        if len == 0 {
            return Err(Error::Empty("recording has no samples"));
        }
        if let Some((c, ch)) = channels.iter().enumerate().find(|(_, ch)| ch.len() != len) {
            return Err(Error::RaggedChannels(format!(
                "channel 1 has {len} samples but channel {} has {}",
                c + 1,
                ch.len()
            )));
        }
        for (c, ch) in channels.iter().enumerate() {
            if let Some(index) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSample { channel: c + 1, index });
            }
        }
        let channel_labels = if channel_labels.is_empty() {
            default_labels(channels.len())
        } else if channel_labels.len() != channels.len() {
            return Err(Error::ChannelMismatch(format!(
                "{} labels for {} channels",
                channel_labels.len(),
                channels.len()
            )));
        } else {
            channel_labels
        };
        Ok(Self {
            channels,
            sampling_rate_hz,
            channel_labels,
            subject_id,
        })
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sampling_rate_hz(&self) -> u32 {
        self.sampling_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sampling_rate_hz as f64
    }

    pub fn channel_labels(&self) -> &[String] {
        &self.channel_labels
    }

    pub fn subject_id(&self) -> Option<&str> {
        self.subject_id.as_deref()
    }

    /// Iterates over frames, one sample per channel.
    pub fn frames(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.channels.iter().map(|ch| ch[i]).collect())
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("ECoG{i}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordingFormat {
    Csv { sampling_rate_hz: u32 },
    RawF32,
}

impl RecordingFormat {
    /// Picks the format from the file extension: `.f32` is raw, anything
    /// else CSV at the given rate.
    pub fn from_path(path: &Path, csv_rate_hz: u32) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("f32") => RecordingFormat::RawF32,
            _ => RecordingFormat::Csv {
                sampling_rate_hz: csv_rate_hz,
            },
        }
    }
}

/// Sidecar metadata for raw-f32 recordings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawMeta {
    pub channels: usize,
    pub sampling_rate_hz: u32,
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default)]
    pub subject_id: Option<String>,
}

/// `rec.f32` -> `rec.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

pub fn load_recording(path: &Path, format: RecordingFormat) -> Result<Recording> {
    match format {
        RecordingFormat::Csv { sampling_rate_hz } => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_recording_csv(&text, sampling_rate_hz)
        }
        RecordingFormat::RawF32 => {
            let meta_path = sidecar_path(path);
            if !meta_path.exists() {
                return Err(Error::MissingSidecar(meta_path));
            }
            let meta_text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
            let meta: RawMeta = serde_json::from_str(&meta_text)?;
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            decode_raw_f32(&bytes, &meta)
        }
    }
}

pub fn parse_recording_csv(text: &str, sampling_rate_hz: u32) -> Result<Recording> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::MalformedHeader("empty file".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.len() < 2 || columns[0] != "t" {
        return Err(Error::MalformedHeader(format!(
            "expected `t,<label>...`, found {header:?}"
        )));
    }
    let labels: Vec<String> = columns[1..].iter().map(|s| s.to_string()).collect();
    if labels.iter().any(|l| l.is_empty()) {
        return Err(Error::MalformedHeader("empty channel label".into()));
    }

    let mut times = Vec::new();
    let mut channels = vec![Vec::new(); labels.len()];
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::RaggedChannels(format!(
                "line {} has {} fields, header has {}",
                lineno + 1,
                fields.len(),
                columns.len()
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line: lineno + 1,
                message: format!("{s:?}: {e}"),
            })
        };
        times.push(parse(fields[0])?);
        for (ch, field) in channels.iter_mut().zip(&fields[1..]) {
            ch.push(parse(field)?);
        }
    }

    let rec = Recording::new(channels, sampling_rate_hz, labels, None)?;
    check_time_column(&times, sampling_rate_hz)?;
    Ok(rec)
}

fn check_time_column(times: &[f64], sampling_rate_hz: u32) -> Result<()> {
    let n = times.len();
    if n < 2 {
        return Ok(());
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let ratio = dt * sampling_rate_hz as f64;
    if !ratio.is_finite() || (ratio - 1.0).abs() > RATE_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "time column implies {:.6} Hz but sampling rate is {sampling_rate_hz} Hz",
            1.0 / dt
        )));
    }
    Ok(())
}

fn decode_raw_f32(bytes: &[u8], meta: &RawMeta) -> Result<Recording> {
    if meta.channels == 0 {
        return Err(Error::InvalidParameter("sidecar declares 0 channels".into()));
    }
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::RaggedChannels(format!(
            "{} bytes is not a whole number of f32 values",
            bytes.len()
        )));
    }
    let values = bytes.len() / 4;
    if !values.is_multiple_of(meta.channels) {
        return Err(Error::RaggedChannels(format!(
            "{values} values do not split into {} channels",
            meta.channels
        )));
    }
    let frames = values / meta.channels;
    let mut channels = vec![Vec::with_capacity(frames); meta.channels];
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        channels[i % meta.channels].push(f64::from(LittleEndian::read_f32(chunk)));
    }
    Recording::new(
        channels,
        meta.sampling_rate_hz,
        meta.labels.clone(),
        meta.subject_id.clone(),
    )
}

pub fn save_recording(rec: &Recording, path: &Path, format: RecordingFormat) -> Result<()> {
    match format {
        RecordingFormat::Csv { .. } => {
            let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let mut out = BufWriter::new(file);
            write_recording_csv(rec, &mut out).map_err(|e| Error::io(path, e))
        }
        RecordingFormat::RawF32 => {
            let mut bytes = Vec::with_capacity(rec.len() * rec.channel_count() * 4);
            for i in 0..rec.len() {
                for ch in rec.channels() {
                    bytes
                        .write_f32::<LittleEndian>(ch[i] as f32)
                        .expect("writing to a Vec cannot fail");
                }
            }
            fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
            let meta = RawMeta {
                channels: rec.channel_count(),
                sampling_rate_hz: rec.sampling_rate_hz(),
                labels: rec.channel_labels().to_vec(),
                subject_id: rec.subject_id().map(str::to_owned),
            };
            let meta_path = sidecar_path(path);
            fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)
                .map_err(|e| Error::io(&meta_path, e))
        }
    }
}

fn write_recording_csv(rec: &Recording, out: &mut impl Write) -> std::io::Result<()> {
    write!(out, "t")?;
    for label in rec.channel_labels() {
        write!(out, ",{label}")?;
    }
    writeln!(out)?;
    let rate = rec.sampling_rate_hz() as f64;
    for i in 0..rec.len() {
        write!(out, "{}", i as f64 / rate)?;
        for ch in rec.channels() {
            write!(out, ",{}", ch[i])?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Binary BS/WS labels on a uniform time grid. 0 = waking state, 1 =
/// behavioral sleep.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypnogram {
    start_time_s: f64,
    stride_s: f64,
    labels: Vec<u8>,
}

pub const WS: u8 = 0;
pub const BS: u8 = 1;

impl Hypnogram {
    pub fn new(start_time_s: f64, stride_s: f64, labels: Vec<u8>) -> Result<Self> {
        if !(stride_s > 0.0 && stride_s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "hypnogram stride must be positive, got {stride_s}"
            )));
        }
        if !start_time_s.is_finite() {
            return Err(Error::InvalidParameter("non-finite start time".into()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidLabel(bad.to_string()));
        }
        Ok(Self {
            start_time_s,
            stride_s,
            labels,
        })
    }

    pub fn start_time_s(&self) -> f64 {
        self.start_time_s
    }

    pub fn stride_s(&self) -> f64 {
        self.stride_s
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.start_time_s + index as f64 * self.stride_s
    }

    /// Fraction of entries labelled BS; 0 for an empty hypnogram.
    pub fn bs_fraction(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|&&l| l == BS).count() as f64 / self.labels.len() as f64
    }

    /// Index of the grid point at time `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = ((t - self.start_time_s) / self.stride_s).round();
        if k < 0.0 || k >= self.labels.len() as f64 {
            return None;
        }
        let k = k as usize;
        ((self.time_at(k) - t).abs() <= STRIDE_TOLERANCE_S).then_some(k)
    }

    /// Relabels onto another grid with the same stride whose points all lie
    /// on this grid.
    pub fn align_to(&self, start_time_s: f64, len: usize) -> Result<Hypnogram> {
        let mut labels = Vec::with_capacity(len);
        for j in 0..len {
            let t = start_time_s + j as f64 * self.stride_s;
            let k = self.index_of(t).ok_or_else(|| {
                Error::GridMismatch(format!("t = {t} s is not on the label grid"))
            })?;
            labels.push(self.labels[k]);
        }
        Hypnogram::new(start_time_s, self.stride_s, labels)
    }

    pub fn same_grid(&self, other: &Hypnogram) -> bool {
        self.labels.len() == other.labels.len()
            && (self.start_time_s - other.start_time_s).abs() <= STRIDE_TOLERANCE_S
            && (self.stride_s - other.stride_s).abs() <= STRIDE_TOLERANCE_S
    }
}

pub fn save_hypnogram(h: &Hypnogram, path: &Path) -> Result<()> {
    fs::write(path, hypnogram_to_csv(h)).map_err(|e| Error::io(path, e))
}

pub fn hypnogram_to_csv(h: &Hypnogram) -> String {
    let mut out = String::from("time_s,label\n");
    for (i, label) in h.labels.iter().enumerate() {
        out.push_str(&format!("{},{}\n", h.time_at(i), label));
    }
    out
}

pub fn load_hypnogram(path: &Path) -> Result<Hypnogram> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_hypnogram_csv(&text)
}

pub fn parse_hypnogram_csv(text: &str) -> Result<Hypnogram> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::MalformedHeader("empty file".into()))?;
    if header.trim() != "time_s,label" {
        return Err(Error::MalformedHeader(format!(
            "expected `time_s,label`, found {header:?}"
        )));
    }
    let mut time_text = Vec::new();
    let mut times = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in lines {
        let (t, l) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: lineno + 1,
            message: "expected two fields".into(),
        })?;
        let (t, l) = (t.trim(), l.trim());
        times.push(t.parse::<f64>().map_err(|e| Error::Parse {
            line: lineno + 1,
            message: format!("{t:?}: {e}"),
        })?);
        time_text.push(t);
        labels.push(match l {
            "0" => WS,
            "1" => BS,
            other => return Err(Error::InvalidLabel(other.to_string())),
        });
    }
    let (start, stride) = recover_grid(&times, &time_text)?;
    Hypnogram::new(start, stride, labels)
}

/// Recovers `(start, stride)` from a rendered time column.
///
/// The stride is chosen so that `start + i * stride` reproduces every
/// rendered time exactly when possible, which keeps save/load bit-exact for
/// grids written by this crate. Grids that only agree within
/// [`STRIDE_TOLERANCE_S`] are accepted with the best candidate; anything
/// coarser is a non-uniform stride.
pub(crate) fn recover_grid(times: &[f64], rendered: &[&str]) -> Result<(f64, f64)> {
    let n = times.len();
    match n {
        0 => return Ok((0.0, 1.0)),
        1 => return Ok((times[0], 1.0)),
        _ => {}
    }
    let start = times[0];
    let first = times[1] - start;
    if !(first > 0.0) {
        return Err(Error::NonUniformStride {
            row: 1,
            expected: start,
            found: times[1],
        });
    }
    for (i, &t) in times.iter().enumerate() {
        let expected = start + i as f64 * first;
        if (t - expected).abs() > STRIDE_TOLERANCE_S.max(4.0 * f64::EPSILON * t.abs()) {
            return Err(Error::NonUniformStride {
                row: i,
                expected,
                found: t,
            });
        }
    }

    let mean = (times[n - 1] - start) / (n - 1) as f64;
    let mut candidates = vec![first, mean];
    for digits in 1..=17 {
        if let Ok(v) = format!("{mean:.digits$}").parse::<f64>() {
            if v > 0.0 {
                candidates.push(v);
            }
        }
    }
    let reproduces = |stride: f64| {
        rendered
            .iter()
            .enumerate()
            .all(|(i, text)| format!("{}", start + i as f64 * stride) == *text)
    };
    // Neighbouring floats of each candidate, nearest first.
    let nearby = candidates.iter().flat_map(|&c| {
        (0..=8i64).flat_map(move |k| [k, -k]).map(move |k| f64::from_bits((c.to_bits() as i64 + k) as u64))
    });
    let stride = nearby.filter(|s| *s > 0.0).find(|&s| reproduces(s)).unwrap_or(mean);
    Ok((start, stride))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_recording_with_two_channels() {
        let text = "t,ECoG1,ECoG2\n0,1.5,-2\n0.0025,2.5,-3\n0.005,3.5,-4\n";
        let rec = parse_recording_csv(text, 400).unwrap();
        assert_eq!(rec.channel_count(), 2);
        assert_eq!(rec.len(), 3);
        assert_eq!(rec.channel(1), &[-2.0, -3.0, -4.0]);
        assert_eq!(rec.channel_labels(), &["ECoG1", "ECoG2"]);
    }

    #[test]
    fn csv_nan_is_rejected() {
        let text = "t,ECoG1\n0,1\n0.0025,NaN\n";
        let err = parse_recording_csv(text, 400).unwrap_err();
        assert!(err.to_string().contains("non-finite sample"), "{err}");
    }

    #[test]
    fn csv_ragged_row_is_rejected() {
        let text = "t,ECoG1,ECoG2\n0,1,2\n0.0025,3\n";
        assert!(matches!(
            parse_recording_csv(text, 400),
            Err(Error::RaggedChannels(_))
        ));
    }

    #[test]
    fn csv_bad_header_is_rejected() {
        assert!(matches!(
            parse_recording_csv("time,a\n0,1\n", 400),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_recording_csv("", 400),
            Err(Error::MalformedHeader(_))
        ));
    }

    #[test]
    fn csv_time_column_must_match_rate() {
        let text = "t,ECoG1\n0,1\n0.01,2\n0.02,3\n";
        assert!(parse_recording_csv(text, 400).is_err());
        assert!(parse_recording_csv(text, 100).is_ok());
    }

    #[test]
    fn raw_f32_interleaved() {
        let meta = RawMeta {
            channels: 3,
            sampling_rate_hz: 400,
            labels: vec![],
            subject_id: Some("rat1".into()),
        };
        let mut bytes = Vec::new();
        for i in 0..2400 {
            bytes.write_f32::<LittleEndian>(i as f32).unwrap();
        }
        let rec = decode_raw_f32(&bytes, &meta).unwrap();
        assert_eq!(rec.channel_count(), 3);
        assert_eq!(rec.len(), 800);
        assert_eq!(rec.duration_s(), 2.0);
        assert_eq!(rec.channel(1)[..2], [1.0, 4.0]);
        assert_eq!(rec.channel_labels()[2], "ECoG3");
    }

    #[test]
    fn raw_f32_ragged_is_rejected() {
        let meta = RawMeta {
            channels: 3,
            sampling_rate_hz: 400,
            labels: vec![],
            subject_id: None,
        };
        assert!(decode_raw_f32(&[0u8; 16], &meta).is_err());
        assert!(decode_raw_f32(&[0u8; 6], &meta).is_err());
    }

    #[test]
    fn recording_invariants() {
        assert!(Recording::new(vec![vec![1.0]], 0, vec![], None).is_err());
        assert!(Recording::new(vec![vec![]], 400, vec![], None).is_err());
        assert!(Recording::new(vec![vec![1.0], vec![1.0, 2.0]], 400, vec![], None).is_err());
        assert!(Recording::new(vec![vec![f64::INFINITY]], 400, vec![], None).is_err());
    }

    #[test]
    fn hypnogram_csv_format() {
        let h = Hypnogram::new(10.0, 1.0, vec![0, 1, 1]).unwrap();
        assert_eq!(hypnogram_to_csv(&h), "time_s,label\n10,0\n11,1\n12,1\n");
        assert_eq!(parse_hypnogram_csv(&hypnogram_to_csv(&h)).unwrap(), h);
    }

    #[test]
    fn empty_hypnogram_is_header_only() {
        let h = Hypnogram::new(0.0, 1.0, vec![]).unwrap();
        let text = hypnogram_to_csv(&h);
        assert_eq!(text, "time_s,label\n");
        assert!(parse_hypnogram_csv(&text).unwrap().is_empty());
    }

    #[test]
    fn hypnogram_rejects_bad_label() {
        let err = parse_hypnogram_csv("time_s,label\n0,0\n1,2\n").unwrap_err();
        assert!(matches!(err, Error::InvalidLabel(ref l) if l == "2"));
    }

    #[test]
    fn hypnogram_rejects_non_uniform_stride() {
        let err = parse_hypnogram_csv("time_s,label\n0,0\n1,1\n2,1\n4,0\n").unwrap_err();
        assert!(err.to_string().contains("non-uniform stride"), "{err}");
    }

    #[test]
    fn fractional_stride_round_trips() {
        let h = Hypnogram::new(0.1, 0.2, vec![0, 1, 0, 1, 1, 0, 0]).unwrap();
        let text = hypnogram_to_csv(&h);
        let back = parse_hypnogram_csv(&text).unwrap();
        assert_eq!(hypnogram_to_csv(&back), text);
    }

    #[test]
    fn align_to_subgrid() {
        let h = Hypnogram::new(0.0, 1.0, vec![0, 0, 1, 1, 0]).unwrap();
        let sub = h.align_to(2.0, 3).unwrap();
        assert_eq!(sub.labels(), &[1, 1, 0]);
        assert!(h.align_to(2.5, 1).is_err());
        assert!(h.align_to(3.0, 3).is_err());
    }
}
