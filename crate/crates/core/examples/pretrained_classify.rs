// Classify a synthetic recording with the published channel-(1,2)
// coefficients and score it against the known schedule.

use sleepwatch::metrics::{self, DorCorrection, Evaluation};
use sleepwatch::model::{self, ChannelSet};
use sleepwatch::preprocess::{self, FeatureParams};
use sleepwatch::synth::{self, SynthSpec};

pub fn run_example() -> sleepwatch::Result<Evaluation> {
    let (rec, truth) = synth::generate(&SynthSpec::alternating(6, 60.0, 3.0, 3))?;
    let (features, _) = preprocess::extract_features(&rec, &FeatureParams::default())?;
    let result = model::classify(&model::pretrained(ChannelSet::C12), &features)?;
    let truth = truth.align_to(result.hypnogram.start_time_s(), result.hypnogram.len())?;
    metrics::evaluate(&result.hypnogram, &truth, DorCorrection::Haldane)
}

fn main() -> sleepwatch::Result<()> {
    let eval = run_example()?;
    println!("{}", serde_json::to_string_pretty(&eval)?);
    Ok(())
}
