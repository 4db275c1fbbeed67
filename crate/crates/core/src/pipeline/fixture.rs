//! A synthetic three-class validation and test pair whose best
//! `(alpha, depth, tau)` under grid search is known by construction.
//!
//! Training labels are balanced, so the prior is uniform. Each split holds:
//! - `confident`: near one-hot rows, 100 per class, ambiguity at most 0.25;
//! - `tilted`: 100 rows of class 0 with ambiguity in `(0.25, 0.5]`. They join
//!   the reference once `tau >= 0.5` and skew its column sums toward class 0;
//! - `flip`: 50 rows with gold class 1 but argmax 0, ambiguity in `(0.5, 0.75]`;
//! - `keep`: 50 rows with gold class 0 and argmax 0, same ambiguity band.
//!
//! `flip` and `keep` rows are exact preimages, under one step with `alpha = 1`
//! against the validation reference at `tau = 0.5`, of targets a small margin
//! on either side of the class 0 / class 1 boundary. That single step makes
//! every row correct. Weaker pushes leave `flip` rows wrong and stronger ones
//! move `keep` rows across the boundary. At `tau = 0.25` the reference loses its
//! tilt, and at `tau = 0.75` nothing is re-adjusted.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::io::{LabelFile, PredictionFile, TaskMode};
use crate::ambiguity::{ambiguity_score, AmbiguityConfig};
use crate::error::{Error, Result};
use crate::types::{argmax, CanHyperParams, ProbabilityVector};

pub const CLASS_NAMES: [&str; 3] = ["a", "b", "c"];
const CONFIDENT_PER_CLASS: usize = 100;
const TILTED: usize = 100;
const FLIP: usize = 50;
const KEEP: usize = 50;
const TRAIN_PER_CLASS: usize = 100;

/// Generated files plus the combination the grid search should return.
#[derive(Debug, Clone)]
pub struct PlantedFixture {
    pub val: PredictionFile,
    pub val_labels: LabelFile,
    pub test: PredictionFile,
    pub test_labels: LabelFile,
    pub train_labels: LabelFile,
    pub planted: CanHyperParams,
}

impl PlantedFixture {
    /// Writes `val_preds.csv`, `val_labels.csv`, `test_preds.csv`,
    /// `test_labels.csv` and `train_labels.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let names = class_names();
        self.val.write(&dir.join("val_preds.csv"))?;
        self.val_labels.write(&dir.join("val_labels.csv"), &names)?;
        self.test.write(&dir.join("test_preds.csv"))?;
        self.test_labels.write(&dir.join("test_labels.csv"), &names)?;
        self.train_labels.write(&dir.join("train_labels.csv"), &names)
    }
}

fn class_names() -> Vec<String> {
    CLASS_NAMES.iter().map(|s| s.to_string()).collect()
}

/// Builds the fixture deterministically from `seed`.
pub fn planted_fixture(seed: u64) -> Result<PlantedFixture> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let planted = CanHyperParams::new(1.0, 1, 0.5)?;
    let gate = AmbiguityConfig::new(planted.tau)?;

    let val_base = base_rows(&mut rng);
    let mut col_sums = [0.0; 3];
    for (row, _) in &val_base {
        col_sums.iter_mut().zip(row).for_each(|(c, v)| *c += v);
    }
    let (val, val_labels) = split(&mut rng, "v", val_base, &col_sums, &gate)?;
    let test_base = base_rows(&mut rng);
    let (test, test_labels) = split(&mut rng, "t", test_base, &col_sums, &gate)?;

    let mut train = Vec::new();
    for class in 0..3 {
        train.extend(std::iter::repeat_n(class, TRAIN_PER_CLASS));
    }
    train.shuffle(&mut rng);
    let train_labels = LabelFile {
        ids: (0..train.len()).map(|i| format!("r{i:03}")).collect(),
        labels: train.into_iter().map(|c| BTreeSet::from([c])).collect(),
    };
    Ok(PlantedFixture {
        val,
        val_labels,
        test,
        test_labels,
        train_labels,
        planted,
    })
}

/// Confident and tilted rows with their gold classes.
fn base_rows<R: Rng>(rng: &mut R) -> Vec<([f64; 3], usize)> {
    let mut rows = Vec::new();
    for class in 0..3 {
        for _ in 0..CONFIDENT_PER_CLASS {
            rows.push((peaked(rng, class, 0.01..0.03), class));
        }
    }
    for _ in 0..TILTED {
        rows.push((peaked(rng, 0, 0.10..0.14), 0));
    }
    rows
}

/// `1 - e` on `class`, the remaining `e` split at random between the others.
fn peaked<R: Rng>(rng: &mut R, class: usize, spill: std::ops::Range<f64>) -> [f64; 3] {
    let e = rng.random_range(spill);
    let f = rng.random_range(0.3..0.7);
    let mut row = [0.0; 3];
    row[class] = 1.0 - e;
    row[(class + 1) % 3] = e * f;
    row[(class + 2) % 3] = e * (1.0 - f);
    row
}

fn split<R: Rng>(
    rng: &mut R,
    prefix: &str,
    mut rows: Vec<([f64; 3], usize)>,
    col_sums: &[f64; 3],
    gate: &AmbiguityConfig,
) -> Result<(PredictionFile, LabelFile)> {
    let base = rows.len();
    for (count, gold) in [(FLIP, 1), (KEEP, 0)] {
        for _ in 0..count {
            let z = rng.random_range(0.005..0.02);
            let margin = rng.random_range(0.005..0.015);
            let sign = if gold == 1 { 1.0 } else { -1.0 };
            let half = (1.0 - z) / 2.0;
            let target = [half - sign * margin, half + sign * margin, z];
            rows.push((invert_one_step(&target, col_sums), gold));
        }
    }
    for (i, (row, gold)) in rows.iter().enumerate() {
        let score = ambiguity_score(&ProbabilityVector::from_raw(row.to_vec()), gate)?;
        // Bands are (lo, hi].
        let (lo, hi) = match i {
            i if i < 3 * CONFIDENT_PER_CLASS => (f64::NEG_INFINITY, 0.25),
            i if i < base => (0.25, 0.5),
            _ => (0.5, 0.75),
        };
        let expected_argmax = if i < base { *gold } else { 0 };
        if !(score > lo && score <= hi) || argmax(row) != expected_argmax {
            return Err(Error::invalid(format!(
                "fixture row {i} left its design band (score {score})"
            )));
        }
    }
    rows.shuffle(rng);
    let ids: Vec<String> = (0..rows.len()).map(|i| format!("{prefix}{i:03}")).collect();
    let preds = PredictionFile {
        class_names: class_names(),
        ids: ids.clone(),
        scores: rows.iter().map(|(r, _)| r.to_vec()).collect(),
        mode: TaskMode::Single,
    };
    let labels = LabelFile {
        ids,
        labels: rows.iter().map(|(_, g)| BTreeSet::from([*g])).collect(),
    };
    Ok((preds, labels))
}

/// Source row that one uniform-prior step with `alpha = 1` maps to `target`,
/// given the reference column sums.
///
/// The step sends `b` to `b_j / (c_j + b_j)` renormalized, so the preimage is
/// `b_j = t r_j c_j / (1 - t r_j)` with `t` chosen for unit mass.
pub fn invert_one_step(target: &[f64; 3], col_sums: &[f64; 3]) -> [f64; 3] {
    let at = |t: f64| -> [f64; 3] {
        let mut b = [0.0; 3];
        for j in 0..3 {
            b[j] = t * target[j] * col_sums[j] / (1.0 - t * target[j]);
        }
        b
    };
    let mut lo = 0.0;
    let mut hi = target.iter().map(|r| 1.0 / r).fold(f64::INFINITY, f64::min);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid).iter().sum::<f64>() > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut b = at(0.5 * (lo + hi));
    let total: f64 = b.iter().sum();
    b.iter_mut().for_each(|v| *v /= total);
    b
}
