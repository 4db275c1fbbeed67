//! Evaluation: prior-weighted expected accuracy and its relative gain, the
//! argmax-flip accuracy gain, top-1 accuracy and loose macro/micro F1.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::types::{argmax, PriorVector, ProbabilityVector};

/// `q^T b / m`, for a prior normalized to unit sum.
pub fn expected_accuracy(q: &PriorVector, b: &ProbabilityVector) -> Result<f64> {
    if q.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            found: b.len(),
        });
    }
    let total: f64 = q.as_slice().iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "expected accuracy needs a normalized prior, sum is {total}"
        )));
    }
    let dot: f64 = q.as_slice().iter().zip(b.as_slice()).map(|(a, b)| a * b).sum();
    Ok(dot / q.len() as f64)
}

/// Relative changes in expected accuracy at or below this size are reported as zero.
pub const GAIN_TOLERANCE: f64 = 1e-12;

/// Relative change in expected accuracy from `b0` to `b1`.
///
/// Changes within [`GAIN_TOLERANCE`] are rounding residue (a uniform prior
/// makes expected accuracy constant) and return exactly zero.
pub fn expected_gain(q: &PriorVector, b0: &ProbabilityVector, b1: &ProbabilityVector) -> Result<f64> {
    let e0 = expected_accuracy(q, b0)?;
    let e1 = expected_accuracy(q, b1)?;
    if e0 <= 0.0 {
        return Err(Error::UndefinedGain);
    }
    let delta = (e1 - e0) / e0;
    Ok(if delta.abs() <= GAIN_TOLERANCE { 0.0 } else { delta })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    pub per_example_delta: Vec<f64>,
    /// Fraction of examples with positive gain whose argmax changed.
    pub accuracy_gain: f64,
}

impl GainReport {
    pub fn mean_delta(&self) -> f64 {
        if self.per_example_delta.is_empty() {
            return 0.0;
        }
        self.per_example_delta.iter().sum::<f64>() / self.per_example_delta.len() as f64
    }
}

/// Per-example gains and the accuracy gain of `after` with respect to `before`.
pub fn gain_report(q: &PriorVector, before: &[ProbabilityVector], after: &[ProbabilityVector]) -> Result<GainReport> {
    if before.len() != after.len() {
        return Err(Error::DimensionMismatch {
            expected: before.len(),
            found: after.len(),
        });
    }
    let mut per_example_delta = Vec::with_capacity(before.len());
    let mut flips = 0usize;
    for (b0, b1) in before.iter().zip(after) {
        let delta = expected_gain(q, b0, b1)?;
        if delta > 0.0 && b0.argmax() != b1.argmax() {
            flips += 1;
        }
        per_example_delta.push(delta);
    }
    let accuracy_gain = if before.is_empty() {
        0.0
    } else {
        flips as f64 / before.len() as f64
    };
    Ok(GainReport {
        per_example_delta,
        accuracy_gain,
    })
}

pub fn accuracy_gain(q: &PriorVector, before: &[ProbabilityVector], after: &[ProbabilityVector]) -> Result<f64> {
    Ok(gain_report(q, before, after)?.accuracy_gain)
}

/// Fraction of rows whose argmax equals the gold class.
pub fn top1_accuracy<P: AsRef<[f64]>>(pred: &[P], gold: &[usize]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::DimensionMismatch {
            expected: pred.len(),
            found: gold.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::invalid("top-1 accuracy of an empty set"));
    }
    let mut correct = 0usize;
    for (p, &g) in pred.iter().zip(gold) {
        let p = p.as_ref();
        if g >= p.len() {
            return Err(Error::invalid(format!(
                "gold class {g} out of range for {} classes",
                p.len()
            )));
        }
        if argmax(p) == g {
            correct += 1;
        }
    }
    Ok(correct as f64 / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Report {
    pub macro_p: f64,
    pub macro_r: f64,
    pub macro_f1: f64,
    pub micro_p: f64,
    pub micro_r: f64,
    pub micro_f1: f64,
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// `hits / total`, with an empty denominator counting as perfect.
fn ratio_or_one(hits: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        hits as f64 / total as f64
    }
}

/// Loose macro (per-example averaged) and loose micro (pooled) F1.
pub fn loose_f1(pred: &[BTreeSet<usize>], gold: &[BTreeSet<usize>]) -> Result<F1Report> {
    if pred.len() != gold.len() {
        return Err(Error::DimensionMismatch {
            expected: pred.len(),
            found: gold.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::invalid("F1 of an empty set"));
    }
    let (mut p_sum, mut r_sum) = (0.0, 0.0);
    let (mut hits, mut n_pred, mut n_gold) = (0usize, 0usize, 0usize);
    for (p, g) in pred.iter().zip(gold) {
        let overlap = p.intersection(g).count();
        p_sum += ratio_or_one(overlap, p.len());
        r_sum += ratio_or_one(overlap, g.len());
        hits += overlap;
        n_pred += p.len();
        n_gold += g.len();
    }
    let n = pred.len() as f64;
    let (macro_p, macro_r) = (p_sum / n, r_sum / n);
    let (micro_p, micro_r) = (ratio_or_one(hits, n_pred), ratio_or_one(hits, n_gold));
    Ok(F1Report {
        macro_p,
        macro_r,
        macro_f1: harmonic(macro_p, macro_r),
        micro_p,
        micro_r,
        micro_f1: harmonic(micro_p, micro_r),
    })
}
