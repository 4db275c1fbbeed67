//! Fitting a reference set on validation predictions and re-adjusting the
//! challenging units of another prediction file against it.
//!
//! A unit is one example in single-label mode and one `(example, class)` pair
//! in multi-label mode. Units that are not challenging keep their scores
//! exactly.

use rayon::prelude::*;

use super::io::{PredictionFile, TaskMode};
use crate::ambiguity::{ambiguity_score, AmbiguityConfig};
use crate::an::readjust;
use crate::error::{Error, Result};
use crate::metrics::{expected_gain, GainReport};
use crate::multilabel::pair_priors;
use crate::types::{argmax, CanHyperParams, PriorVector, ProbabilityVector, ReferenceMatrix};

/// A reference set built from confident validation units, with the priors used
/// to re-adjust against it.
#[derive(Debug, Clone)]
pub struct CanModel {
    mode: TaskMode,
    hp: CanHyperParams,
    gate: AmbiguityConfig,
    class_names: Vec<String>,
    reference: ReferenceMatrix,
    /// One prior in single-label mode, one pair prior per class in multi-label mode.
    priors: Vec<PriorVector>,
}

/// Per-unit diagnostics of one adjustment.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitRecord {
    pub example: usize,
    /// Class of the pair in multi-label mode.
    pub class: Option<usize>,
    pub ambiguity: f64,
    pub challenging: bool,
    /// Relative expected-accuracy gain; zero for passthrough units.
    pub delta: f64,
    pub argmax_changed: bool,
}

#[derive(Debug, Clone)]
pub struct Adjusted {
    pub file: PredictionFile,
    pub units: Vec<UnitRecord>,
    /// Gain over the challenging units only.
    pub gain: GainReport,
}

impl Adjusted {
    /// Examples with at least one challenging unit, ascending.
    pub fn challenging_examples(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.units.iter().filter(|u| u.challenging).map(|u| u.example).collect();
        out.dedup();
        out
    }
}

impl CanModel {
    /// Builds the reference set from the units of `val` scoring at most `hp.tau`.
    ///
    /// `priors` is the normalized class distribution in single-label mode and
    /// the per-class positive rate in multi-label mode.
    pub fn fit(val: &PredictionFile, priors: &PriorVector, hp: CanHyperParams) -> Result<Self> {
        hp.validate()?;
        let m = val.num_classes();
        if priors.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: priors.len(),
            });
        }
        let mut gate = AmbiguityConfig::new(hp.tau)?;
        if let Some(k) = hp.k_max {
            gate = gate.with_k_max(k)?;
        }
        let (rows, priors) = match val.mode {
            TaskMode::Single => {
                if m < 2 {
                    return Err(Error::invalid("single-label mode needs at least two classes"));
                }
                (val.scores.clone(), vec![priors.normalized()])
            }
            TaskMode::Multi => (pairs(&val.scores), pair_priors(priors.as_slice())?),
        };
        let mut confident = Vec::new();
        for row in rows {
            let v = ProbabilityVector::from_raw(row);
            if ambiguity_score(&v, &gate)? <= gate.tau {
                confident.push(v.into_inner());
            }
        }
        if confident.is_empty() {
            return Err(Error::EmptyReference { tau: hp.tau });
        }
        Ok(Self {
            mode: val.mode,
            hp,
            gate,
            class_names: val.class_names.clone(),
            reference: ReferenceMatrix::from_rows(&confident)?,
            priors,
        })
    }

    pub fn reference(&self) -> &ReferenceMatrix {
        &self.reference
    }

    pub fn hyper_params(&self) -> &CanHyperParams {
        &self.hp
    }

    pub fn mode(&self) -> TaskMode {
        self.mode
    }

    /// Re-adjusts the challenging units of `preds`, preserving order and ids.
    pub fn adjust(&self, preds: &PredictionFile) -> Result<Adjusted> {
        if preds.class_names != self.class_names {
            return Err(Error::invalid(format!(
                "class header mismatch: reference has [{}], predictions have [{}]",
                self.class_names.join(","),
                preds.class_names.join(",")
            )));
        }
        if preds.mode != self.mode {
            return Err(Error::invalid("prediction file mode differs from the reference mode"));
        }
        let m = preds.num_classes();
        let tasks: Vec<(usize, Option<usize>, Vec<f64>)> = match self.mode {
            TaskMode::Single => preds
                .scores
                .iter()
                .enumerate()
                .map(|(i, r)| (i, None, r.clone()))
                .collect(),
            TaskMode::Multi => preds
                .scores
                .iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &p)| (i, Some(j), vec![p, 1.0 - p])))
                .collect(),
        };
        let results: Vec<(UnitRecord, Vec<f64>)> = tasks
            .into_par_iter()
            .map(|(example, class, row)| self.adjust_unit(example, class, row))
            .collect::<Result<_>>()?;

        let mut scores = preds.scores.clone();
        let mut units = Vec::with_capacity(results.len());
        let mut deltas = Vec::new();
        let mut flips = 0usize;
        for (unit, after) in results {
            if unit.challenging {
                match unit.class {
                    None => scores[unit.example] = after,
                    Some(j) => scores[unit.example][j] = after[0],
                }
                deltas.push(unit.delta);
                if unit.delta > 0.0 && unit.argmax_changed {
                    flips += 1;
                }
            }
            units.push(unit);
        }
        debug_assert_eq!(scores.iter().map(Vec::len).sum::<usize>(), preds.len() * m);
        let accuracy_gain = if deltas.is_empty() {
            0.0
        } else {
            flips as f64 / deltas.len() as f64
        };
        Ok(Adjusted {
            file: PredictionFile {
                class_names: preds.class_names.clone(),
                ids: preds.ids.clone(),
                scores,
                mode: preds.mode,
            },
            units,
            gain: GainReport {
                per_example_delta: deltas,
                accuracy_gain,
            },
        })
    }

    fn adjust_unit(&self, example: usize, class: Option<usize>, row: Vec<f64>) -> Result<(UnitRecord, Vec<f64>)> {
        let b0 = ProbabilityVector::from_raw(row);
        let ambiguity = ambiguity_score(&b0, &self.gate)?;
        let mut unit = UnitRecord {
            example,
            class,
            ambiguity,
            challenging: ambiguity > self.gate.tau,
            delta: 0.0,
            argmax_changed: false,
        };
        if !unit.challenging {
            return Ok((unit, b0.into_inner()));
        }
        let q = &self.priors[class.unwrap_or(0)];
        let b1 = readjust(&b0, &self.reference, q, &self.hp)?;
        unit.delta = expected_gain(q, &b0, &b1)?;
        unit.argmax_changed = argmax(b0.as_slice()) != argmax(b1.as_slice());
        Ok((unit, b1.into_inner()))
    }
}

/// Row-major `[p, 1 - p]` pairs of a multi-label score table.
fn pairs(scores: &[Vec<f64>]) -> Vec<Vec<f64>> {
    scores
        .iter()
        .flat_map(|r| r.iter().map(|&p| vec![p, 1.0 - p]))
        .collect()
}
