// Reference BS/WS labels from Morlet band energies and double thresholds.

use sleepwatch::metrics::{self, DorCorrection, Evaluation};
use sleepwatch::wavelet::{self, MarkupConfig};
use sleepwatch::synth::{self, SynthSpec};

pub struct Report {
    pub thresholds: Vec<(f64, f64)>,
    pub evaluation: Evaluation,
}

pub fn run_example() -> sleepwatch::Result<Report> {
    let (rec, truth) = synth::generate(&SynthSpec::alternating(4, 30.0, 3.0, 9))?;
    let markup = wavelet::markup_bs_ws(&rec, &MarkupConfig::default(), 1.0, 1.0)?;
    let truth = truth.align_to(markup.hypnogram.start_time_s(), markup.hypnogram.len())?;
    Ok(Report {
        thresholds: markup.thresholds.iter().map(|t| (t.tr1, t.tr2)).collect(),
        evaluation: metrics::evaluate(&markup.hypnogram, &truth, DorCorrection::Haldane)?,
    })
}

fn main() -> sleepwatch::Result<()> {
    let report = run_example()?;
    for (k, (tr1, tr2)) in report.thresholds.iter().enumerate() {
        println!("band {}: onset {tr1:.4e}, offset {tr2:.4e}", k + 1);
    }
    println!("{}", serde_json::to_string_pretty(&report.evaluation)?);
    Ok(())
}
