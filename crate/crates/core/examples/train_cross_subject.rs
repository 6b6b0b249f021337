// Train on one synthetic subject, classify another.
//
// The two subjects differ in seed, per-channel gain and noise floor, so the
// per-recording normalization has to carry the transfer.

use sleepwatch::metrics::{self, DorCorrection, Evaluation};
use sleepwatch::model::{self, ChannelSet, TrainConfig};
use sleepwatch::preprocess::{self, FeatureParams};
use sleepwatch::synth::{self, SynthSpec};

#[derive(Debug)]
pub struct Report {
    pub training_accuracy: f64,
    pub evaluation: Evaluation,
}

pub fn subject(seed: u64, gain: f64, noise_mv: f64) -> SynthSpec {
    SynthSpec {
        subject_gain: vec![gain; 3],
        noise_floor_mv: noise_mv,
        ..SynthSpec::alternating(8, 90.0, 3.0, seed)
    }
}

pub fn run_example() -> sleepwatch::Result<Report> {
    let params = FeatureParams::default();
    let (rec_a, truth_a) = synth::generate(&subject(1, 0.5, 1.0))?;
    let (rec_b, truth_b) = synth::generate(&subject(2, 2.0, 3.0))?;

    let (fs_a, _) = preprocess::extract_features(&rec_a, &params)?;
    let cfg = TrainConfig {
        seed: 7,
        ..TrainConfig::default()
    };
    let outcome = model::train(&fs_a, &truth_a, &cfg, ChannelSet::C12)?;

    let (fs_b, _) = preprocess::extract_features(&rec_b, &params)?;
    let predicted = model::classify(&outcome.model, &fs_b)?.hypnogram;
    let truth = truth_b.align_to(predicted.start_time_s(), predicted.len())?;
    Ok(Report {
        training_accuracy: outcome.training_accuracy,
        evaluation: metrics::evaluate(&predicted, &truth, DorCorrection::None)?,
    })
}

fn main() -> sleepwatch::Result<()> {
    let report = run_example()?;
    println!("training accuracy: {:.3}", report.training_accuracy);
    println!("subject B: {}", serde_json::to_string_pretty(&report.evaluation)?);
    Ok(())
}
