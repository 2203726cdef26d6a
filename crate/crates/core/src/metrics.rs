//! Top-1 accuracy and aggregation over repetitions.

use serde::{Deserialize, Serialize};

use crate::correction::Correction;
use crate::error::{Error, Result};

/// One trained-and-evaluated repetition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub model: String,
    pub dataset: String,
    pub correction: Correction,
    pub seed: u64,
    /// Percentage in [0, 100].
    pub top1: f64,
    pub estimated_matrix: Option<Vec<Vec<f64>>>,
    /// Excluded from serialized reports so they stay byte-reproducible.
    #[serde(skip)]
    pub wall_clock_seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub mean_top1: f64,
    /// Sample (n − 1) standard deviation; zero for a single run.
    pub std_top1: f64,
    pub runs: usize,
}

pub fn top1_accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let correct = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(100.0 * correct as f64 / truth.len() as f64)
}

pub fn aggregate(runs: &[RunResult]) -> Result<AggregateResult> {
    let first = runs.first().ok_or(Error::EmptyInput)?;
    if let Some(odd) = runs
        .iter()
        .find(|r| r.model != first.model || r.dataset != first.dataset || r.correction != first.correction)
    {
        return Err(Error::HeterogeneousRuns(format!(
            "{}/{}/{:?} vs {}/{}/{:?}",
            first.model, first.dataset, first.correction, odd.model, odd.dataset, odd.correction
        )));
    }
    let values: Vec<f64> = runs.iter().map(|r| r.top1).collect();
    let (mean, std) = mean_and_sample_std(&values);
    Ok(AggregateResult {
        mean_top1: mean,
        std_top1: std,
        runs: runs.len(),
    })
}

pub(crate) fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
