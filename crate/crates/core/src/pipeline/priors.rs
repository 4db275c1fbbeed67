use std::collections::BTreeSet;
use std::path::Path;

use super::io::{LabelFile, TaskMode};
use crate::error::{Error, Result};
use crate::types::PriorVector;

/// Class priors from training labels.
///
/// Single-label: `(count_j + eps) / sum_k (count_k + eps)`.
/// Multi-label: per-class positive rate `(pos_j + eps) / (N + 2 eps)`.
pub fn class_priors(labels: &[BTreeSet<usize>], m: usize, mode: TaskMode, smoothing: f64) -> Result<PriorVector> {
    if !(smoothing >= 0.0) || !smoothing.is_finite() {
        return Err(Error::invalid("prior smoothing must be a finite value >= 0"));
    }
    if labels.is_empty() {
        return Err(Error::invalid("no training labels"));
    }
    let mut counts = vec![0.0; m];
    for set in labels {
        for &j in set {
            if j >= m {
                return Err(Error::invalid(format!("label index {j} out of range for {m} classes")));
            }
            counts[j] += 1.0;
        }
    }
    let weights = match mode {
        TaskMode::Single => {
            let total: f64 = counts.iter().map(|c| c + smoothing).sum();
            counts.iter().map(|c| (c + smoothing) / total).collect()
        }
        TaskMode::Multi => {
            let n = labels.len() as f64;
            counts.iter().map(|c| (c + smoothing) / (n + 2.0 * smoothing)).collect()
        }
    };
    PriorVector::new(weights)
}

/// Loads `path` against `class_names` and computes [`class_priors`].
pub fn compute_priors(path: &Path, class_names: &[String], mode: TaskMode, smoothing: f64) -> Result<PriorVector> {
    let labels = LabelFile::load(path, class_names, mode)?;
    class_priors(&labels.labels, class_names.len(), mode, smoothing)
}
