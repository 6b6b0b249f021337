// The command-line pipeline driven in process: synth, features, train,
// classify, evaluate.

use std::path::Path;

use sleepwatch::cli;
use sleepwatch::synth::SynthSpec;

fn sw(args: &[&str]) -> i32 {
    let argv = std::iter::once("sleepwatch").chain(args.iter().copied());
    cli::run(argv, &mut std::io::empty(), &mut std::io::sink(), &mut std::io::stderr())
}

/// Returns the evaluation JSON written by the last step.
pub fn pipeline(dir: &Path) -> sleepwatch::Result<serde_json::Value> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let spec = SynthSpec::alternating(4, 60.0, 3.0, 17);
    std::fs::write(p("spec.json"), serde_json::to_string(&spec)?).map_err(|e| sleepwatch::Error::Io {
        path: dir.join("spec.json"),
        source: e,
    })?;

    let steps: [Vec<String>; 5] = [
        vec!["synth".into(), "--spec".into(), p("spec.json"), "--recording".into(), p("rec.f32"), "--hypnogram".into(), p("truth.csv")],
        vec!["features".into(), "--input".into(), p("rec.f32"), "--output".into(), p("features.csv")],
        vec!["train".into(), "--features".into(), p("features.csv"), "--labels".into(), p("truth.csv"), "--output".into(), p("model.json"), "--seed".into(), "3".into()],
        vec!["classify".into(), "--features".into(), p("features.csv"), "--model".into(), p("model.json"), "--output".into(), p("predicted.csv")],
        vec!["evaluate".into(), p("predicted.csv"), p("truth.csv"), "--align".into(), "--output".into(), p("eval.json")],
    ];
    for step in &steps {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        let code = sw(&args);
        if code != cli::EXIT_OK {
            return Err(sleepwatch::Error::InvalidParameter(format!("`{}` exited with {code}", step[0])));
        }
    }
    let text = std::fs::read_to_string(dir.join("eval.json")).map_err(|e| sleepwatch::Error::Io {
        path: dir.join("eval.json"),
        source: e,
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn run_example() -> sleepwatch::Result<serde_json::Value> {
    let dir = std::env::temp_dir().join(format!("sleepwatch-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| sleepwatch::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let out = pipeline(&dir);
    let _ = std::fs::remove_dir_all(&dir);
    out
}

fn main() -> sleepwatch::Result<()> {
    println!("{}", serde_json::to_string_pretty(&run_example()?)?);
    Ok(())
}
