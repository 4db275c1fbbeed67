//! Grid search over `(alpha, depth, tau)` on validation predictions.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use super::apply::{Adjusted, CanModel};
use super::io::{PredictionFile, TaskMode};
use crate::error::{Error, Result};
use crate::metrics::{loose_f1, top1_accuracy};
use crate::multilabel::{decide_labels, MultilabelMatrix};
use crate::types::{argmax, CanHyperParams, PriorVector};

/// Quantity maximized by the grid search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Objective {
    #[value(name = "macro_f1")]
    MacroF1,
    #[value(name = "micro_f1")]
    MicroF1,
    /// Single-label mode only.
    #[value(name = "top1")]
    Top1,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::MacroF1 => "macro_f1",
            Objective::MicroF1 => "micro_f1",
            Objective::Top1 => "top1",
        })
    }
}

/// Candidate values for each hyperparameter, each sorted ascending without repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperGrid {
    pub alphas: Vec<f64>,
    pub depths: Vec<usize>,
    pub taus: Vec<f64>,
    pub k_max: Option<usize>,
}

pub const DEFAULT_ALPHA_GRID: &str = "0.1:0.9:0.1,1:35:1";
pub const DEFAULT_DEPTH_GRID: &str = "1:5";
pub const DEFAULT_TAU_GRID: &str = "0.25,0.5,0.75";

impl Default for HyperGrid {
    fn default() -> Self {
        Self::parse(DEFAULT_ALPHA_GRID, DEFAULT_DEPTH_GRID, DEFAULT_TAU_GRID).expect("default grids parse")
    }
}

impl HyperGrid {
    pub fn new(alphas: Vec<f64>, depths: Vec<usize>, taus: Vec<f64>) -> Result<Self> {
        let grid = Self {
            alphas: sorted_unique(alphas),
            depths: {
                let mut d = depths;
                d.sort_unstable();
                d.dedup();
                d
            },
            taus: sorted_unique(taus),
            k_max: None,
        };
        if grid.alphas.is_empty() || grid.depths.is_empty() || grid.taus.is_empty() {
            return Err(Error::invalid("every grid needs at least one value"));
        }
        for &alpha in &grid.alphas {
            for &depth in &grid.depths {
                for &tau in &grid.taus {
                    CanHyperParams::new(alpha, depth, tau)?;
                }
            }
        }
        Ok(grid)
    }

    pub fn parse(alphas: &str, depths: &str, taus: &str) -> Result<Self> {
        let depths = parse_grid(depths)?
            .into_iter()
            .map(|d| {
                if d >= 1.0 && d.fract() == 0.0 {
                    Ok(d as usize)
                } else {
                    Err(Error::invalid(format!("depth must be a positive integer, got {d}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parse_grid(alphas)?, depths, parse_grid(taus)?)
    }

    pub fn with_k_max(mut self, k_max: Option<usize>) -> Self {
        self.k_max = k_max;
        self
    }

    pub fn len(&self) -> usize {
        self.alphas.len() * self.depths.len() * self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Combinations in tie-break order: alpha, then depth, then tau, ascending.
    pub fn combinations(&self) -> Vec<CanHyperParams> {
        let mut out = Vec::with_capacity(self.len());
        for &alpha in &self.alphas {
            for &depth in &self.depths {
                for &tau in &self.taus {
                    out.push(CanHyperParams {
                        alpha,
                        depth,
                        tau,
                        k_max: self.k_max,
                    });
                }
            }
        }
        out
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Parses a comma-separated list of values and inclusive `start:end[:step]` ranges.
///
/// Range members are rounded to 12 decimals, so `0.1:0.3:0.1` yields exactly
/// `0.1, 0.2, 0.3`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad grid value `{s}` in `{text}`")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::invalid(format!("grid value `{s}` is not finite")))
        }
    };
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(num(v)?),
            [start, end] | [start, end, _] => {
                let (start, end) = (num(start)?, num(end)?);
                let step = if parts.len() == 3 { num(parts[2])? } else { 1.0 };
                if !(step > 0.0) || end < start {
                    return Err(Error::invalid(format!("bad range `{item}`")));
                }
                let count = ((end - start) / step + 1e-9).floor() as usize;
                if count > 1_000_000 {
                    return Err(Error::invalid(format!("range `{item}` is too large")));
                }
                out.extend((0..=count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12));
            }
            _ => return Err(Error::invalid(format!("bad grid item `{item}`"))),
        }
    }
    if out.is_empty() {
        return Err(Error::invalid(format!("empty grid `{text}`")));
    }
    Ok(out)
}

/// One evaluated grid combination.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub hp: CanHyperParams,
    /// False when the reference set was empty or the normalization degenerated.
    pub valid: bool,
    /// Objective on the full validation set; NaN when invalid.
    pub objective: f64,
    /// Objective restricted to challenging examples; NaN when there are none.
    pub challenging_objective: f64,
    pub challenging: usize,
    pub reference: usize,
    /// Why the combination is invalid; empty otherwise.
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub best: CanHyperParams,
    pub best_objective: f64,
    /// Every combination exactly once, in tie-break order.
    pub table: Vec<GridRow>,
}

/// Gold labels and the rule scoring a prediction file against them.
#[derive(Debug, Clone)]
pub struct Scorer {
    mode: TaskMode,
    objective: Objective,
    gold: Vec<BTreeSet<usize>>,
}

impl Scorer {
    pub fn new(mode: TaskMode, objective: Objective, gold: Vec<BTreeSet<usize>>) -> Result<Self> {
        if mode == TaskMode::Multi && objective == Objective::Top1 {
            return Err(Error::invalid("top1 is only defined in single-label mode"));
        }
        if mode == TaskMode::Single && gold.iter().any(|g| g.len() != 1) {
            return Err(Error::invalid("single-label gold needs exactly one label per example"));
        }
        Ok(Self { mode, objective, gold })
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    /// Predicted label sets: the argmax in single-label mode, the thresholded set otherwise.
    pub fn predicted_sets(&self, scores: &[Vec<f64>]) -> Result<Vec<BTreeSet<usize>>> {
        match self.mode {
            TaskMode::Single => Ok(scores.iter().map(|r| BTreeSet::from([argmax(r)])).collect()),
            TaskMode::Multi => Ok(decide_labels(&MultilabelMatrix::from_rows(scores)?)),
        }
    }

    /// Objective over the examples at `subset` (all examples when `None`); NaN when empty.
    pub fn score(&self, scores: &[Vec<f64>], subset: Option<&[usize]>) -> Result<f64> {
        if scores.len() != self.gold.len() {
            return Err(Error::DimensionMismatch {
                expected: self.gold.len(),
                found: scores.len(),
            });
        }
        let idx: Vec<usize> = match subset {
            Some(s) => s.to_vec(),
            None => (0..scores.len()).collect(),
        };
        if idx.is_empty() {
            return Ok(f64::NAN);
        }
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| scores[i].clone()).collect();
        let gold: Vec<BTreeSet<usize>> = idx.iter().map(|&i| self.gold[i].clone()).collect();
        match self.objective {
            Objective::Top1 => {
                let classes: Vec<usize> = gold.iter().map(|g| *g.first().expect("one gold label")).collect();
                top1_accuracy(&rows, &classes)
            }
            Objective::MacroF1 => Ok(loose_f1(&self.predicted_sets(&rows)?, &gold)?.macro_f1),
            Objective::MicroF1 => Ok(loose_f1(&self.predicted_sets(&rows)?, &gold)?.micro_f1),
        }
    }
}

/// Fits and applies CAN on `val` for every combination and keeps the best.
///
/// The objective scores the full validation set: re-adjusted challenging
/// examples together with untouched confident ones. Ties go to the smaller
/// alpha, then depth, then tau.
pub fn grid_search(
    val: &PredictionFile,
    gold: &[BTreeSet<usize>],
    priors: &PriorVector,
    grid: &HyperGrid,
    objective: Objective,
) -> Result<GridSearchResult> {
    let scorer = Scorer::new(val.mode, objective, gold.to_vec())?;
    if gold.len() != val.len() {
        return Err(Error::DimensionMismatch {
            expected: val.len(),
            found: gold.len(),
        });
    }
    let table: Vec<GridRow> = grid
        .combinations()
        .into_par_iter()
        .map(|hp| evaluate(val, priors, hp, &scorer))
        .collect::<Result<_>>()?;

    let mut best: Option<&GridRow> = None;
    for row in table.iter().filter(|r| r.valid && !r.objective.is_nan()) {
        if best.is_none_or(|b| row.objective > b.objective) {
            best = Some(row);
        }
    }
    let best = best.ok_or_else(|| Error::invalid("no grid combination produced a usable reference set"))?;
    Ok(GridSearchResult {
        best: best.hp,
        best_objective: best.objective,
        table,
    })
}

fn evaluate(val: &PredictionFile, priors: &PriorVector, hp: CanHyperParams, scorer: &Scorer) -> Result<GridRow> {
    let invalid = |note: String| GridRow {
        hp,
        valid: false,
        objective: f64::NAN,
        challenging_objective: f64::NAN,
        challenging: 0,
        reference: 0,
        note,
    };
    let model = match CanModel::fit(val, priors, hp) {
        Ok(model) => model,
        Err(e @ Error::EmptyReference { .. }) => return Ok(invalid(e.to_string())),
        Err(e) => return Err(e),
    };
    let adjusted: Adjusted = match model.adjust(val) {
        Ok(a) => a,
        Err(e @ (Error::DegenerateRow { .. } | Error::UndefinedGain)) => return Ok(invalid(e.to_string())),
        Err(e) => return Err(e),
    };
    let hard = adjusted.challenging_examples();
    Ok(GridRow {
        hp,
        valid: true,
        objective: scorer.score(&adjusted.file.scores, None)?,
        challenging_objective: scorer.score(&adjusted.file.scores, Some(&hard))?,
        challenging: hard.len(),
        reference: model.reference().nrows(),
        note: String::new(),
    })
}
