// Generate a synthetic subject and write it in both recording formats.

use std::path::{Path, PathBuf};

use sleepwatch::ingest::{self, RecordingFormat};
use sleepwatch::synth::{self, SynthSpec};

pub struct Report {
    pub files: Vec<PathBuf>,
    pub formats_agree: bool,
}

pub fn write_subject(dir: &Path) -> sleepwatch::Result<Report> {
    let spec = SynthSpec::alternating(2, 20.0, 3.0, 13);
    let (rec, hyp) = synth::generate(&spec)?;
    let csv = dir.join("subject.csv");
    let raw = dir.join("subject.f32");
    let labels = dir.join("subject_hypnogram.csv");
    let csv_format = RecordingFormat::Csv {
        sampling_rate_hz: spec.sampling_rate_hz,
    };
    ingest::save_recording(&rec, &csv, csv_format)?;
    ingest::save_recording(&rec, &raw, RecordingFormat::RawF32)?;
    ingest::save_hypnogram(&hyp, &labels)?;

    let from_csv = ingest::load_recording(&csv, csv_format)?;
    let from_raw = ingest::load_recording(&raw, RecordingFormat::RawF32)?;
    let formats_agree = from_csv.len() == from_raw.len()
        && from_csv
            .channels()
            .iter()
            .flatten()
            .zip(from_raw.channels().iter().flatten())
            .all(|(a, b)| (a - b).abs() <= 1e-6 * a.abs().max(1.0));
    Ok(Report {
        files: vec![csv, raw.clone(), ingest::sidecar_path(&raw), labels],
        formats_agree,
    })
}

pub fn run_example() -> sleepwatch::Result<Report> {
    let dir = std::env::temp_dir().join(format!("sleepwatch-synth-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| sleepwatch::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let report = write_subject(&dir)?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(report)
}

fn main() -> sleepwatch::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let report = write_subject(&dir)?;
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    println!("CSV and raw-f32 agree: {}", report.formats_agree);
    Ok(())
}
