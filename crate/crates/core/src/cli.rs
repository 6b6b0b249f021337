//! Command-line front end. The `sleepwatch` binary is a thin wrapper around
//! [`run`].

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, BufReader, ErrorKind, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{ByteOrder, LittleEndian};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ingest::{self, Hypnogram, RecordingFormat};
use crate::metrics::{self, DorCorrection};
use crate::model::{self, ChannelSet, PerceptronModel, StreamingClassifier, TrainConfig};
use crate::preprocess::{self, Calibration, FeatureMode, FeatureParams, FeatureSeries};
use crate::synth::{self, SynthSpec};
use crate::wavelet::{BandFusion, MarkupConfig, ThresholdSource};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Settings shared by all subcommands. Loaded from `--config` when given;
/// explicit flags win.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub window_s: f64,
    pub stride_s: f64,
    pub feature_mode: FeatureMode,
    pub channel_set: ChannelSet,
    pub threshold: f64,
    pub sampling_rate_hz: u32,
    pub markup: MarkupConfig,
    pub train: TrainConfig,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            window_s: 10.0,
            stride_s: 1.0,
            feature_mode: FeatureMode::SampleVariance,
            channel_set: ChannelSet::C12,
            threshold: model::DEFAULT_THRESHOLD,
            sampling_rate_hz: 400,
            markup: MarkupConfig::default(),
            train: TrainConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sleepwatch", version, about = "BS/WS detection in multichannel ECoG")]
struct Cli {
    /// JSON pipeline config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct FeatureArgs {
    /// Sampling rate of CSV recordings (raw-f32 takes it from the sidecar).
    #[arg(long)]
    sampling_rate: Option<u32>,
    /// Averaging window, seconds.
    #[arg(long)]
    window: Option<f64>,
    /// Window shift, seconds.
    #[arg(long)]
    stride: Option<f64>,
    /// Take the square root of the windowed deviation.
    #[arg(long)]
    true_std: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FusionArg {
    Majority,
    All,
    Any,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    RawF32,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recording -> feature CSV.
    Features {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Also write the normalization constants as JSON.
        #[arg(long)]
        calibration_out: Option<PathBuf>,
        #[command(flatten)]
        features: FeatureArgs,
    },
    /// Recording -> hypnogram via wavelet band energies.
    Markup {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Per-block band energy CSV for threshold tuning.
        #[arg(long)]
        energy_out: Option<PathBuf>,
        #[arg(long)]
        sampling_rate: Option<u32>,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stride: Option<f64>,
        #[arg(long)]
        onset_pct: Option<f64>,
        #[arg(long)]
        offset_pct: Option<f64>,
        #[arg(long, value_enum)]
        fusion: Option<FusionArg>,
    },
    /// Features + hypnogram -> model JSON.
    Train {
        /// Feature CSV from `features`.
        #[arg(long, conflicts_with = "input")]
        features: Option<PathBuf>,
        /// Recording; features are extracted in process.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        channels: Option<ChannelSet>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        /// Train on all windows instead of truncating the majority class.
        #[arg(long)]
        no_balance: bool,
        #[command(flatten)]
        feature_args: FeatureArgs,
    },
    /// Recording or features + model -> hypnogram and probabilities.
    Classify {
        #[arg(long, conflicts_with = "features")]
        input: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long, conflicts_with = "pretrained")]
        model: Option<PathBuf>,
        /// Use the published coefficients for a channel set, e.g. `12`.
        #[arg(long)]
        pretrained: Option<ChannelSet>,
        /// Frozen normalization constants instead of fitting on the input.
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        probabilities: Option<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        feature_args: FeatureArgs,
    },
    /// Two hypnograms -> metrics JSON.
    Evaluate {
        predicted: PathBuf,
        truth: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        disagreements: Option<PathBuf>,
        /// Add 0.5 to every cell before computing the odds ratio.
        #[arg(long)]
        haldane: bool,
        /// Resample the truth onto the prediction grid first.
        #[arg(long)]
        align: bool,
    },
    /// Model JSONs -> averaged model JSON.
    Average {
        #[arg(required = true)]
        models: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Spec JSON -> synthetic recording + hypnogram.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        recording: PathBuf,
        #[arg(long)]
        hypnogram: PathBuf,
        /// Defaults to raw-f32 for `.f32` paths, CSV otherwise.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Raw-f32 frames on stdin -> `time_s,probability,label` lines on stdout.
    Stream {
        #[arg(long, conflicts_with = "pretrained")]
        model: Option<PathBuf>,
        #[arg(long)]
        pretrained: Option<ChannelSet>,
        #[arg(long)]
        calibration: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs one command and returns the process exit code: 0 on success, 1 for
/// usage errors, 2 for data errors.
pub fn run<I, T>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "usage error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> CliResult<PipelineConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(Error::from)?
        }
        None => PipelineConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    cfg.train.seed = cfg.seed;
    Ok(cfg)
}

impl FeatureArgs {
    fn params(&self, cfg: &PipelineConfig) -> FeatureParams {
        FeatureParams {
            window_s: self.window.unwrap_or(cfg.window_s),
            stride_s: self.stride.unwrap_or(cfg.stride_s),
            mode: if self.true_std {
                FeatureMode::StdDev
            } else {
                cfg.feature_mode
            },
        }
    }

    fn rate(&self, cfg: &PipelineConfig) -> u32 {
        self.sampling_rate.unwrap_or(cfg.sampling_rate_hz)
    }
}

fn load_recording(path: &Path, csv_rate: u32) -> CliResult<ingest::Recording> {
    Ok(ingest::load_recording(path, RecordingFormat::from_path(path, csv_rate))?)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::Data(Error::io(path, e)))
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Data(Error::io(path, e)))
}

fn load_model(path: Option<&Path>, pretrained: Option<ChannelSet>) -> CliResult<PerceptronModel> {
    match (path, pretrained) {
        (Some(p), None) => Ok(PerceptronModel::from_json(&read_file(p)?)?),
        (None, Some(set)) => Ok(model::pretrained(set)),
        _ => Err(Failure::Usage("give exactly one of --model or --pretrained".into())),
    }
}

fn load_calibration(path: &Path) -> CliResult<Calibration> {
    Ok(serde_json::from_str(&read_file(path)?).map_err(Error::from)?)
}

fn execute(cli: Cli, stdin: &mut dyn Read, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = load_config(cli.config.as_deref(), cli.seed)?;
    match cli.command {
        Command::Features {
            input,
            output,
            calibration_out,
            features,
        } => {
            let rec = load_recording(&input, features.rate(&cfg))?;
            let (fs, cal) = preprocess::extract_features(&rec, &features.params(&cfg))?;
            write_file(&output, &preprocess::features_to_csv(&fs))?;
            if let Some(path) = calibration_out {
                write_file(&path, &serde_json::to_string_pretty(&cal).map_err(Error::from)?)?;
            }
            Ok(())
        }

        Command::Markup {
            input,
            output,
            energy_out,
            sampling_rate,
            start,
            stride,
            onset_pct,
            offset_pct,
            fusion,
        } => {
            let rec = load_recording(&input, sampling_rate.unwrap_or(cfg.sampling_rate_hz))?;
            let mut mcfg = cfg.markup.clone();
            if let Some(f) = fusion {
                mcfg.fusion = match f {
                    FusionArg::Majority => BandFusion::Majority,
                    FusionArg::All => BandFusion::All,
                    FusionArg::Any => BandFusion::Any,
                };
            }
            if onset_pct.is_some() || offset_pct.is_some() {
                let (d_on, d_off) = match mcfg.thresholds {
                    ThresholdSource::Percentile { onset_pct, offset_pct } => (onset_pct, offset_pct),
                    ThresholdSource::Fixed { .. } => (
                        crate::wavelet::DEFAULT_ONSET_PERCENTILE,
                        crate::wavelet::DEFAULT_OFFSET_PERCENTILE,
                    ),
                };
                mcfg.thresholds = ThresholdSource::Percentile {
                    onset_pct: onset_pct.unwrap_or(d_on),
                    offset_pct: offset_pct.unwrap_or(d_off),
                };
            }
            let stride = stride.unwrap_or(cfg.stride_s);
            let markup = crate::wavelet::markup_bs_ws(&rec, &mcfg, start.unwrap_or(0.0), stride)?;
            ingest::save_hypnogram(&markup.hypnogram, &output)?;
            if let Some(path) = energy_out {
                write_file(&path, &markup.energies.to_csv())?;
            }
            Ok(())
        }

        Command::Train {
            features,
            input,
            labels,
            output,
            channels,
            epochs,
            learning_rate,
            batch_size,
            no_balance,
            feature_args,
        } => {
            let params = feature_args.params(&cfg);
            let fs = feature_source(
                features.as_deref(),
                input.as_deref(),
                params,
                feature_args.rate(&cfg),
            )?;
            let hyp = ingest::load_hypnogram(&labels)?;
            let mut tcfg = cfg.train.clone();
            if let Some(e) = epochs {
                tcfg.epochs = e;
            }
            if let Some(lr) = learning_rate {
                tcfg.learning_rate = lr;
            }
            if let Some(b) = batch_size {
                tcfg.batch_size = b;
            }
            if no_balance {
                tcfg.class_balance = model::ClassBalance::None;
            }
            let set = channels.unwrap_or(cfg.channel_set);
            let outcome = model::train(&fs, &hyp, &tcfg, set)?;
            let mut m = outcome.model;
            m.threshold = cfg.threshold;
            m.validate()?;
            write_file(&output, &m.to_json()?)?;
            writeln!(stdout, "training accuracy: {:.4}", outcome.training_accuracy)
                .map_err(|e| Error::io("<stdout>", e))?;
            Ok(())
        }

        Command::Classify {
            input,
            features,
            model: model_path,
            pretrained,
            calibration,
            output,
            probabilities,
            threshold,
            feature_args,
        } => {
            let mut m = load_model(model_path.as_deref(), pretrained)?;
            if let Some(t) = threshold {
                m.threshold = t;
                m.validate()?;
            }
            let fs = match (&input, &features, &calibration) {
                (Some(rec_path), None, Some(cal_path)) => {
                    let cal = load_calibration(cal_path)?;
                    let rec = load_recording(rec_path, cal.sampling_rate_hz)?;
                    preprocess::extract_features_calibrated(&rec, &cal)?
                }
                (_, _, Some(_)) => {
                    return Err(Failure::Usage("--calibration requires --input".into()))
                }
                _ => {
                    let mut params = feature_args.params(&cfg);
                    params.mode = m.feature_mode;
                    if m.normalization.features {
                        feature_source(
                            features.as_deref(),
                            input.as_deref(),
                            params,
                            feature_args.rate(&cfg),
                        )?
                    } else {
                        let path = input
                            .as_deref()
                            .ok_or_else(|| Failure::Usage("this model needs --input".into()))?;
                        let rec = load_recording(path, feature_args.rate(&cfg))?;
                        preprocess::sliding_features(&preprocess::normalize_recording(&rec)?, &params)?
                    }
                }
            };
            let result = model::classify(&m, &fs)?;
            ingest::save_hypnogram(&result.hypnogram, &output)?;
            if let Some(path) = probabilities {
                write_file(&path, &result.probabilities_csv())?;
            }
            Ok(())
        }

        Command::Evaluate {
            predicted,
            truth,
            output,
            disagreements,
            haldane,
            align,
        } => {
            let pred = ingest::load_hypnogram(&predicted)?;
            let mut truth = ingest::load_hypnogram(&truth)?;
            if align {
                truth = truth.align_to(pred.start_time_s(), pred.len())?;
            }
            let correction = if haldane {
                DorCorrection::Haldane
            } else {
                DorCorrection::None
            };
            let eval = metrics::evaluate(&pred, &truth, correction)?;
            let json = serde_json::to_string_pretty(&eval).map_err(Error::from)?;
            match output {
                Some(path) => write_file(&path, &json)?,
                None => writeln!(stdout, "{json}").map_err(|e| Error::io("<stdout>", e))?,
            }
            if let Some(path) = disagreements {
                write_file(&path, &metrics::disagreements_csv(&pred, &truth)?)?;
            }
            Ok(())
        }

        Command::Average { models, output } => {
            let loaded = models
                .iter()
                .map(|p| Ok(PerceptronModel::from_json(&read_file(p)?)?))
                .collect::<CliResult<Vec<_>>>()?;
            write_file(&output, &model::average_models(&loaded)?.to_json()?)
        }

        Command::Synth {
            spec,
            recording,
            hypnogram,
            format,
        } => {
            let mut spec: SynthSpec = serde_json::from_str(&read_file(&spec)?).map_err(Error::from)?;
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            let (rec, hyp) = synth::generate(&spec)?;
            let format = match format {
                Some(FormatArg::Csv) => RecordingFormat::Csv {
                    sampling_rate_hz: spec.sampling_rate_hz,
                },
                Some(FormatArg::RawF32) => RecordingFormat::RawF32,
                None => RecordingFormat::from_path(&recording, spec.sampling_rate_hz),
            };
            ingest::save_recording(&rec, &recording, format)?;
            ingest::save_hypnogram(&hyp, &hypnogram)?;
            Ok(())
        }

        Command::Stream {
            model: model_path,
            pretrained,
            calibration,
        } => {
            let m = load_model(model_path.as_deref(), pretrained)?;
            let cal = load_calibration(&calibration)?;
            stream_frames(m, cal, stdin, stdout)
        }
    }
}

fn feature_source(
    features: Option<&Path>,
    input: Option<&Path>,
    params: FeatureParams,
    csv_rate: u32,
) -> CliResult<FeatureSeries> {
    match (features, input) {
        (Some(path), None) => Ok(preprocess::parse_features_csv(&read_file(path)?, params.mode)?),
        (None, Some(path)) => {
            let rec = load_recording(path, csv_rate)?;
            Ok(preprocess::extract_features(&rec, &params)?.0)
        }
        _ => Err(Failure::Usage("give exactly one of --input or --features".into())),
    }
}

fn stream_frames(
    m: PerceptronModel,
    cal: Calibration,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let channels = cal.channels.len();
    let mut sc = StreamingClassifier::new(m, cal)?;
    let mut reader = BufReader::new(stdin);
    let mut bytes = vec![0u8; channels * 4];
    let mut frame = vec![0.0; channels];
    loop {
        let available = reader.fill_buf().map_err(|e| Error::io("<stdin>", e))?.len();
        if available == 0 {
            break;
        }
        match reader.read_exact(&mut bytes) {
            Ok(()) => {}
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => {
                return Err(Failure::Data(Error::RaggedChannels(
                    "stream ended mid-frame".into(),
                )))
            }
            Err(e) => return Err(Failure::Data(Error::io("<stdin>", e))),
        }
        for (v, chunk) in frame.iter_mut().zip(bytes.chunks_exact(4)) {
            *v = f64::from(LittleEndian::read_f32(chunk));
        }
        if let Some(out) = sc.push(&frame)? {
            writeln!(stdout, "{},{:.16e},{}", out.time_s, out.probability, out.label)
                .map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    stdout.flush().map_err(|e| Error::io("<stdout>", e))?;
    Ok(())
}

/// Aligns a hypnogram onto another's grid; used by `evaluate --align`.
pub fn align_truth(pred: &Hypnogram, truth: &Hypnogram) -> crate::error::Result<Hypnogram> {
    truth.align_to(pred.start_time_s(), pred.len())
}
