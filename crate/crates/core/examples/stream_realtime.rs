// Replay a recording frame by frame through the streaming classifier using
// constants frozen from an offline pass, and compare with offline labels.

use std::time::Instant;

use sleepwatch::model::{self, ChannelSet, StreamingClassifier};
use sleepwatch::preprocess::{self, FeatureParams};
use sleepwatch::synth::{self, SynthSpec};

pub struct Report {
    pub emitted: usize,
    pub mismatches: usize,
    pub micros_per_frame: f64,
}

pub fn run_example() -> sleepwatch::Result<Report> {
    let (rec, _) = synth::generate(&SynthSpec::alternating(4, 30.0, 3.0, 21))?;
    let (features, calibration) = preprocess::extract_features(&rec, &FeatureParams::default())?;
    let m = model::pretrained(ChannelSet::C123);
    let offline = model::classify(&m, &features)?;

    let mut stream = StreamingClassifier::new(m, calibration)?;
    let mut outputs = Vec::new();
    let started = Instant::now();
    for frame in rec.frames() {
        if let Some(out) = stream.push(&frame)? {
            outputs.push(out);
        }
    }
    let elapsed = started.elapsed().as_secs_f64();

    let mismatches = outputs
        .iter()
        .zip(offline.hypnogram.labels())
        .filter(|(o, &l)| o.label != l)
        .count()
        + outputs.len().abs_diff(offline.hypnogram.len());
    Ok(Report {
        emitted: outputs.len(),
        mismatches,
        micros_per_frame: elapsed * 1e6 / rec.len() as f64,
    })
}

fn main() -> sleepwatch::Result<()> {
    let report = run_example()?;
    println!(
        "{} labels streamed, {} differ from offline, {:.2} us per frame",
        report.emitted, report.mismatches, report.micros_per_frame
    );
    Ok(())
}
