//! CSV reports written by the `can` command.
//!
//! Floats use the same shortest round-trip form as prediction files, so every
//! report is a deterministic function of its inputs.

use std::collections::BTreeSet;
use std::io::Write;

use super::apply::Adjusted;
use super::io::{format_score, PredictionFile, TaskMode};
use super::tune::{GridSearchResult, Objective, Scorer};
use crate::error::Result;
use crate::metrics::{loose_f1, top1_accuracy};

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

fn finish<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `id,class,ambiguity,challenging,delta,argmax_changed`; `class` is empty in single-label mode.
pub fn write_units<W: Write>(out: W, adjusted: &Adjusted) -> Result<()> {
    let mut w = writer(
        out,
        &["id", "class", "ambiguity", "challenging", "delta", "argmax_changed"],
    )?;
    let file = &adjusted.file;
    for u in &adjusted.units {
        let class = u.class.map(|j| file.class_names[j].as_str()).unwrap_or("");
        w.write_record([
            file.ids[u.example].as_str(),
            class,
            &format_score(u.ambiguity),
            if u.challenging { "true" } else { "false" },
            &format_score(u.delta),
            if u.argmax_changed { "true" } else { "false" },
        ])?;
    }
    finish(w)
}

/// One split's before/after predictions with gold labels, when available.
pub struct SplitOutcome<'a> {
    pub name: &'a str,
    pub before: &'a PredictionFile,
    pub after: &'a Adjusted,
    pub gold: Option<&'a [BTreeSet<usize>]>,
}

/// Metric table with one row per split, subset and method.
///
/// Subsets are `full` (every example) and `challenging` (examples with at
/// least one re-adjusted unit). `top1` is empty in multi-label mode.
pub fn write_metrics<W: Write>(out: W, splits: &[SplitOutcome<'_>]) -> Result<()> {
    let mut w = writer(
        out,
        &[
            "split", "subset", "method", "examples", "macro_p", "macro_r", "macro_f1", "micro_p", "micro_r",
            "micro_f1", "top1",
        ],
    )?;
    for split in splits {
        let Some(gold) = split.gold else { continue };
        let mode = split.before.mode;
        let scorer = Scorer::new(mode, Objective::MacroF1, gold.to_vec())?;
        let all: Vec<usize> = (0..split.before.len()).collect();
        let hard = split.after.challenging_examples();
        for (subset, idx) in [("full", &all), ("challenging", &hard)] {
            if idx.is_empty() {
                continue;
            }
            for (method, scores) in [("baseline", &split.before.scores), ("can", &split.after.file.scores)] {
                let rows: Vec<Vec<f64>> = idx.iter().map(|&i| scores[i].clone()).collect();
                let g: Vec<BTreeSet<usize>> = idx.iter().map(|&i| gold[i].clone()).collect();
                let f1 = loose_f1(&scorer.predicted_sets(&rows)?, &g)?;
                let top1 = match mode {
                    TaskMode::Single => {
                        let classes: Vec<usize> = g.iter().map(|s| *s.first().expect("one gold label")).collect();
                        format_score(top1_accuracy(&rows, &classes)?)
                    }
                    TaskMode::Multi => String::new(),
                };
                w.write_record([
                    split.name.to_string(),
                    subset.to_string(),
                    method.to_string(),
                    idx.len().to_string(),
                    format_score(f1.macro_p),
                    format_score(f1.macro_r),
                    format_score(f1.macro_f1),
                    format_score(f1.micro_p),
                    format_score(f1.micro_r),
                    format_score(f1.micro_f1),
                    top1,
                ])?;
            }
        }
    }
    finish(w)
}

/// `split,units,challenging_units,mean_delta,accuracy_gain`, gains over challenging units.
pub fn write_gain<W: Write>(out: W, splits: &[SplitOutcome<'_>]) -> Result<()> {
    let mut w = writer(
        out,
        &["split", "units", "challenging_units", "mean_delta", "accuracy_gain"],
    )?;
    for split in splits {
        let gain = &split.after.gain;
        w.write_record([
            split.name.to_string(),
            split.after.units.len().to_string(),
            gain.per_example_delta.len().to_string(),
            format_score(gain.mean_delta()),
            format_score(gain.accuracy_gain),
        ])?;
    }
    finish(w)
}

/// Every evaluated combination: `alpha,depth,tau,valid,objective,challenging_objective,challenging,reference,note`.
pub fn write_grid<W: Write>(out: W, result: &GridSearchResult) -> Result<()> {
    let mut w = writer(
        out,
        &[
            "alpha",
            "depth",
            "tau",
            "valid",
            "objective",
            "challenging_objective",
            "challenging",
            "reference",
            "note",
        ],
    )?;
    for row in &result.table {
        w.write_record([
            format_score(row.hp.alpha),
            row.hp.depth.to_string(),
            format_score(row.hp.tau),
            row.valid.to_string(),
            format_score(row.objective),
            format_score(row.challenging_objective),
            row.challenging.to_string(),
            row.reference.to_string(),
            row.note.clone(),
        ])?;
    }
    finish(w)
}

/// Single-row `alpha,depth,tau,objective,value`.
pub fn write_best<W: Write>(out: W, result: &GridSearchResult, objective: Objective) -> Result<()> {
    let mut w = writer(out, &["alpha", "depth", "tau", "objective", "value"])?;
    w.write_record([
        format_score(result.best.alpha),
        result.best.depth.to_string(),
        format_score(result.best.tau),
        objective.to_string(),
        format_score(result.best_objective),
    ])?;
    finish(w)
}
