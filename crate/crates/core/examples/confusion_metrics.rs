// Accuracy and diagnostic odds ratio from a confusion matrix and from a
// pair of hypnograms.

use sleepwatch::metrics::{self, ConfusionMatrix, Dor, DorCorrection};
use sleepwatch::Hypnogram;

pub struct Report {
    pub accuracy: f64,
    pub dor: Dor,
    pub perfect_dor: Dor,
    pub perfect_dor_haldane: Dor,
}

pub fn run_example() -> sleepwatch::Result<Report> {
    let cm = ConfusionMatrix::new(90, 85, 10, 15);
    let truth = Hypnogram::new(10.0, 1.0, vec![0, 0, 1, 1, 1, 0])?;
    let perfect = metrics::confusion(&truth, &truth)?;
    Ok(Report {
        accuracy: cm.accuracy()?,
        dor: cm.dor(DorCorrection::None),
        perfect_dor: perfect.dor(DorCorrection::None),
        perfect_dor_haldane: perfect.dor(DorCorrection::Haldane),
    })
}

fn main() -> sleepwatch::Result<()> {
    let r = run_example()?;
    println!("(90, 85, 10, 15): accuracy {}, DOR {}", r.accuracy, r.dor);
    println!("self-comparison: DOR {} ({} with Haldane correction)", r.perfect_dor, r.perfect_dor_haldane);
    Ok(())
}
