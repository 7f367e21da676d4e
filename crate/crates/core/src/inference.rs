//! Analysis encoding of unseen samples and classification with the learned
//! linear classifier.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::linalg::{matmul, Matrix};
use crate::model::{AnalysisDictionary, LinearClassifier};
use crate::optimizer::shrink;
use crate::patching::extract_patches;

/// Test-time representation options.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EncodeOptions {
    pub lambda1: f64,
    /// Soft-threshold the analysis codes by `lambda1` before scoring.
    pub apply_threshold: bool,
}

impl EncodeOptions {
    pub fn raw() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class_index: usize,
    pub class_name: String,
    pub scores: Vec<f64>,
}

/// Code of one sample laid out like a column of the `mp × n` training view:
/// entry `i·p + k` is atom `i` applied to patch `k`.
pub fn encode(sample: &Matrix, dict: &AnalysisDictionary, opts: EncodeOptions) -> Result<Vec<f64>> {
    let patches = extract_patches(sample, dict.geom())?;
    let mut code = matmul(dict.omega(), &patches)?.into_vec();
    if opts.apply_threshold {
        if !(opts.lambda1 >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "threshold must be nonnegative, got {}",
                opts.lambda1
            )));
        }
        for v in code.iter_mut() {
            *v = shrink(*v, opts.lambda1);
        }
    }
    Ok(code)
}

/// Index of the largest score; the lowest index wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn classify(
    sample: &Matrix,
    dict: &AnalysisDictionary,
    clf: &LinearClassifier,
    opts: EncodeOptions,
) -> Result<Prediction> {
    clf.check_compatible(dict)?;
    let code = encode(sample, dict, opts)?;
    let w = clf.w();
    let scores: Vec<f64> = (0..w.rows())
        .map(|c| w.row(c).iter().zip(&code).map(|(a, b)| a * b).sum())
        .collect();
    let class_index = argmax(&scores);
    Ok(Prediction {
        class_index,
        class_name: clf.class_names()[class_index].clone(),
        scores,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub samples: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub total_time: Duration,
    /// Mean wall time of a single `classify` call.
    pub mean_time_per_sample: Duration,
    pub predictions: Vec<usize>,
}

/// Classifies every sample and scores against `labels`. Labels absent from
/// the classifier's vocabulary count as errors.
pub fn evaluate<S: AsRef<str>>(
    samples: &[Matrix],
    labels: &[S],
    dict: &AnalysisDictionary,
    clf: &LinearClassifier,
    opts: EncodeOptions,
) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("evaluation set is empty".into()));
    }
    if samples.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} samples but {} labels",
            samples.len(),
            labels.len()
        )));
    }
    clf.check_compatible(dict)?;
    let start = Instant::now();
    let mut classify_time = Duration::ZERO;
    let mut correct = 0;
    let mut predictions = Vec::with_capacity(samples.len());
    for (sample, label) in samples.iter().zip(labels) {
        let t = Instant::now();
        let pred = classify(sample, dict, clf, opts)?;
        classify_time += t.elapsed();
        if pred.class_name == label.as_ref() {
            correct += 1;
        }
        predictions.push(pred.class_index);
    }
    let n = samples.len();
    Ok(EvalReport {
        samples: n,
        correct,
        accuracy: correct as f64 / n as f64,
        total_time: start.elapsed(),
        mean_time_per_sample: classify_time / n as u32,
        predictions,
    })
}
