// Windowed mean/deviation features with both normalization stages, and the
// CSV round trip used between the `features` and `train` commands.

use sleepwatch::preprocess::{self, Calibration, FeatureParams, FeatureSeries};
use sleepwatch::synth::{self, SynthSpec};

pub struct Report {
    pub features: FeatureSeries,
    pub calibration: Calibration,
    pub round_trip_exact: bool,
}

pub fn run_example() -> sleepwatch::Result<Report> {
    let (rec, _) = synth::generate(&SynthSpec::alternating(2, 60.0, 3.0, 5))?;
    let params = FeatureParams::default();
    let (features, calibration) = preprocess::extract_features(&rec, &params)?;
    let csv = preprocess::features_to_csv(&features);
    let reparsed = preprocess::parse_features_csv(&csv, params.mode)?;
    Ok(Report {
        round_trip_exact: reparsed == features,
        features,
        calibration,
    })
}

fn main() -> sleepwatch::Result<()> {
    let report = run_example()?;
    let fs = &report.features;
    println!(
        "{} windows per channel, first at t = {} s, stride {} s",
        fs.len(),
        fs.time_at(0),
        fs.stride_s
    );
    for (c, id) in fs.channel_ids.iter().enumerate() {
        println!("channel {id}: mu[0] = {:.4}, sigma[0] = {:.4}", fs.mu[c][0], fs.sigma[c][0]);
    }
    println!("CSV round trip exact: {}", report.round_trip_exact);
    println!("{}", serde_json::to_string_pretty(&report.calibration)?);
    Ok(())
}
