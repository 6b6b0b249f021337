//! Hypnogram agreement: confusion counts, accuracy and diagnostic odds ratio.
//! BS (label 1) is the positive class throughout.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ingest::{Hypnogram, BS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// The matrix obtained by treating WS as the positive class.
    pub fn swapped(&self) -> Self {
        Self {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }

    pub fn accuracy(&self) -> Result<f64> {
        accuracy(self)
    }

    pub fn dor(&self, correction: DorCorrection) -> Dor {
        dor(self, correction)
    }
}

pub fn confusion(pred: &Hypnogram, truth: &Hypnogram) -> Result<ConfusionMatrix> {
    if !pred.same_grid(truth) {
        return Err(Error::GridMismatch(format!(
            "prediction ({} @ {} s from {} s) vs truth ({} @ {} s from {} s)",
            pred.len(),
            pred.stride_s(),
            pred.start_time_s(),
            truth.len(),
            truth.stride_s(),
            truth.start_time_s()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        match (p == BS, t == BS) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Empty("confusion matrix has no entries"));
    }
    Ok((cm.tp + cm.tn) as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DorCorrection {
    #[default]
    None,
    /// Adds 0.5 to every cell.
    Haldane,
}

/// Diagnostic odds ratio. Zero cells are reported explicitly rather than
/// folded into a number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dor {
    Finite(f64),
    /// `fp * fn = 0` with `tp * tn > 0`.
    Infinite,
    /// `tp * tn = 0` and `fp * fn = 0`.
    Undefined,
}

impl Dor {
    pub fn value(self) -> Option<f64> {
        match self {
            Dor::Finite(v) => Some(v),
            Dor::Infinite => Some(f64::INFINITY),
            Dor::Undefined => None,
        }
    }
}

impl fmt::Display for Dor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dor::Finite(v) => write!(f, "{v}"),
            Dor::Infinite => f.write_str("inf"),
            Dor::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Dor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dor::Finite(v) => s.serialize_f64(*v),
            Dor::Infinite => s.serialize_str("inf"),
            Dor::Undefined => s.serialize_str("undefined"),
        }
    }
}

pub fn dor(cm: &ConfusionMatrix, correction: DorCorrection) -> Dor {
    let pad = match correction {
        DorCorrection::None => 0.0,
        DorCorrection::Haldane => 0.5,
    };
    let num = (cm.tp as f64 + pad) * (cm.tn as f64 + pad);
    let den = (cm.fp as f64 + pad) * (cm.fn_ as f64 + pad);
    match (num > 0.0, den > 0.0) {
        (_, true) => Dor::Finite(num / den),
        (true, false) => Dor::Infinite,
        (false, false) => Dor::Undefined,
    }
}

/// Summary written by the `evaluate` command.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub accuracy: f64,
    pub dor: Dor,
}

pub fn evaluate(pred: &Hypnogram, truth: &Hypnogram, correction: DorCorrection) -> Result<Evaluation> {
    let cm = confusion(pred, truth)?;
    Ok(Evaluation {
        tp: cm.tp,
        tn: cm.tn,
        fp: cm.fp,
        fn_: cm.fn_,
        accuracy: accuracy(&cm)?,
        dor: dor(&cm, correction),
    })
}

/// `time_s,predicted,truth` rows for every window where the two disagree.
pub fn disagreements_csv(pred: &Hypnogram, truth: &Hypnogram) -> Result<String> {
    confusion(pred, truth)?;
    let mut out = String::from("time_s,predicted,truth\n");
    for (i, (p, t)) in pred.labels().iter().zip(truth.labels()).enumerate() {
        if p != t {
            out.push_str(&format!("{},{p},{t}\n", truth.time_at(i)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyp(labels: &[u8]) -> Hypnogram {
        Hypnogram::new(0.0, 1.0, labels.to_vec()).unwrap()
    }

    #[test]
    fn confusion_counts() {
        let cm = confusion(&hyp(&[1, 0, 1]), &hyp(&[1, 0, 1])).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(2, 1, 0, 0));

        let cm = confusion(&hyp(&[0, 1, 0]), &hyp(&[1, 0, 1])).unwrap();
        assert_eq!((cm.tp, cm.tn), (0, 0));

        let cm = confusion(&hyp(&[1, 1, 0, 0]), &hyp(&[1, 0, 1, 0])).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(1, 1, 1, 1));
    }

    #[test]
    fn confusion_requires_same_grid() {
        let a = hyp(&[1, 0]);
        let b = Hypnogram::new(1.0, 1.0, vec![1, 0]).unwrap();
        assert!(matches!(confusion(&a, &b), Err(Error::GridMismatch(_))));
        assert!(confusion(&a, &hyp(&[1])).is_err());
    }

    #[test]
    fn accuracy_values() {
        assert_eq!(accuracy(&ConfusionMatrix::new(90, 85, 10, 15)).unwrap(), 0.875);
        assert_eq!(accuracy(&ConfusionMatrix::new(5, 5, 0, 0)).unwrap(), 1.0);
        assert_eq!(accuracy(&ConfusionMatrix::new(0, 0, 3, 4)).unwrap(), 0.0);
        assert!(accuracy(&ConfusionMatrix::default()).is_err());
    }

    #[test]
    fn dor_values() {
        let none = DorCorrection::None;
        assert_eq!(dor(&ConfusionMatrix::new(10, 10, 10, 10), none), Dor::Finite(1.0));
        assert_eq!(dor(&ConfusionMatrix::new(90, 85, 10, 15), none), Dor::Finite(51.0));
        assert_eq!(dor(&ConfusionMatrix::new(90, 85, 0, 15), none), Dor::Infinite);
        assert_eq!(dor(&ConfusionMatrix::new(0, 85, 0, 15), none), Dor::Undefined);
        assert_eq!(
            dor(&ConfusionMatrix::new(1, 1, 0, 1), DorCorrection::Haldane),
            Dor::Finite(1.5 * 1.5 / (0.5 * 1.5))
        );
    }

    #[test]
    fn evaluation_json_shape() {
        let e = evaluate(&hyp(&[1, 0]), &hyp(&[1, 0]), DorCorrection::None).unwrap();
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["fn"], 0);
        assert_eq!(json["accuracy"], 1.0);
        assert_eq!(json["dor"], "inf");
    }

    #[test]
    fn disagreement_rows() {
        let csv = disagreements_csv(&hyp(&[1, 1, 0]), &hyp(&[1, 0, 0])).unwrap();
        assert_eq!(csv, "time_s,predicted,truth\n1,1,0\n");
    }
}
