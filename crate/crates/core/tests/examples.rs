//! Every cargo example runs and produces a sensible result.

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(pretrained_classify);
example!(extract_features);
example!(wavelet_markup);
example!(train_cross_subject);
example!(stream_realtime);
example!(confusion_metrics);
example!(synth_to_files);
example!(cli_pipeline);

#[test]
fn pretrained_classify_beats_chance() {
    let eval = pretrained_classify::run_example().unwrap();
    assert!(eval.accuracy > 0.8, "{eval:?}");
}

#[test]
fn extract_features_round_trips() {
    let r = extract_features::run_example().unwrap();
    assert!(r.round_trip_exact);
    assert_eq!(r.features.len(), 111);
    assert_eq!(r.calibration.channels.len(), 3);
}

#[test]
fn wavelet_markup_agrees_with_schedule() {
    let r = wavelet_markup::run_example().unwrap();
    assert_eq!(r.thresholds.len(), 4);
    assert!(r.thresholds.iter().all(|(on, off)| on >= off));
    assert!(r.evaluation.accuracy >= 0.75, "{:?}", r.evaluation);
}

#[test]
fn train_cross_subject_transfers() {
    let r = train_cross_subject::run_example().unwrap();
    assert!(r.training_accuracy > 0.9);
    assert!(r.evaluation.accuracy >= 0.8);
}

#[test]
fn stream_realtime_matches_offline() {
    let r = stream_realtime::run_example().unwrap();
    assert_eq!(r.emitted, 111);
    assert_eq!(r.mismatches, 0);
}

#[test]
fn confusion_metrics_values() {
    let r = confusion_metrics::run_example().unwrap();
    assert_eq!(r.accuracy, 0.875);
    assert_eq!(r.dor.value(), Some(51.0));
    assert_eq!(r.perfect_dor, sleepwatch::metrics::Dor::Infinite);
    assert!(r.perfect_dor_haldane.value().unwrap() > 1.0);
}

#[test]
fn synth_to_files_writes_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let r = synth_to_files::write_subject(dir.path()).unwrap();
    assert!(r.formats_agree);
    assert!(r.files.iter().all(|f| f.exists()));
    assert!(synth_to_files::run_example().unwrap().formats_agree);
}

#[test]
fn cli_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let eval = cli_pipeline::pipeline(dir.path()).unwrap();
    assert!(eval["accuracy"].as_f64().unwrap() > 0.8, "{eval}");
}
