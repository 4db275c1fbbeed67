use std::io::Write;

use serde::Serialize;

use super::Interval;
use crate::error::Result;

/// Aggregate of one `(m, reference bin, source bin, alpha)` slice.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAggregate {
    pub m: usize,
    pub interval_a: Interval,
    pub interval_b: Interval,
    pub a_bin: usize,
    pub b_bin: usize,
    pub alpha: f64,
    /// Completed trials.
    pub trials: usize,
    /// Mean over trials of the per-trial mean expected gain.
    pub mean_delta: f64,
    /// Mean over trials of the accuracy gain.
    pub mean_accuracy_gain: f64,
    /// Trials skipped because sampling or re-adjustment failed.
    pub failures: usize,
}

/// One cell of the 4x4 bin grid, pooled over class counts and alphas.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryCell {
    pub interval_a: Interval,
    pub interval_b: Interval,
    pub a_bin: usize,
    pub b_bin: usize,
    pub mean_delta: f64,
    pub mean_accuracy_gain: f64,
    /// Completed trials contributing to the means.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub rng_algorithm: String,
    pub seed: u64,
    pub bins: Vec<Interval>,
    pub rows: Vec<CellAggregate>,
}

#[derive(Serialize)]
struct DetailRecord<'a> {
    m: usize,
    #[serde(rename = "interval_A")]
    interval_a: &'a str,
    interval_b: &'a str,
    alpha: f64,
    trials: usize,
    mean_delta: f64,
    mean_accuracy_gain: f64,
    failures: usize,
}

#[derive(Serialize)]
struct SummaryRecord<'a> {
    #[serde(rename = "interval_A")]
    interval_a: &'a str,
    interval_b: &'a str,
    mean_delta: f64,
    mean_accuracy_gain: f64,
    count: usize,
}

impl SimulationReport {
    /// Trial-weighted means per bin pair, row-major over `(a_bin, b_bin)`.
    pub fn summary(&self) -> Vec<SummaryCell> {
        let k = self.bins.len();
        let mut acc = vec![(0.0, 0.0, 0usize); k * k];
        for row in self.rows.iter().filter(|r| r.trials > 0) {
            let slot = &mut acc[row.a_bin * k + row.b_bin];
            slot.0 += row.mean_delta * row.trials as f64;
            slot.1 += row.mean_accuracy_gain * row.trials as f64;
            slot.2 += row.trials;
        }
        acc.into_iter()
            .enumerate()
            .map(|(i, (delta, gain, count))| SummaryCell {
                interval_a: self.bins[i / k],
                interval_b: self.bins[i % k],
                a_bin: i / k,
                b_bin: i % k,
                mean_delta: delta / count as f64,
                mean_accuracy_gain: gain / count as f64,
                count,
            })
            .collect()
    }

    /// Largest range of a summary statistic across reference bins, over source bins.
    pub fn spread_across_reference_bins(&self, stat: impl Fn(&SummaryCell) -> f64) -> f64 {
        let k = self.bins.len();
        let summary = self.summary();
        (0..k)
            .map(|b| range((0..k).map(|a| stat(&summary[a * k + b]))))
            .fold(0.0, f64::max)
    }

    /// Largest range of a summary statistic across source bins, over reference bins.
    pub fn spread_across_source_bins(&self, stat: impl Fn(&SummaryCell) -> f64) -> f64 {
        let k = self.bins.len();
        let summary = self.summary();
        (0..k)
            .map(|a| range((0..k).map(|b| stat(&summary[a * k + b]))))
            .fold(0.0, f64::max)
    }

    /// Per-slice table: `m,interval_A,interval_b,alpha,trials,mean_delta,mean_accuracy_gain,failures`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(DetailRecord {
                m: row.m,
                interval_a: &row.interval_a.label(),
                interval_b: &row.interval_b.label(),
                alpha: row.alpha,
                trials: row.trials,
                mean_delta: row.mean_delta,
                mean_accuracy_gain: row.mean_accuracy_gain,
                failures: row.failures,
            })?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Bin-grid table: `interval_A,interval_b,mean_delta,mean_accuracy_gain,count`.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for cell in self.summary() {
            w.serialize(SummaryRecord {
                interval_a: &cell.interval_a.label(),
                interval_b: &cell.interval_b.label(),
                mean_delta: cell.mean_delta,
                mean_accuracy_gain: cell.mean_accuracy_gain,
                count: cell.count,
            })?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn range(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}
