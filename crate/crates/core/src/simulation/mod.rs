//! Monte Carlo study of how the ambiguity of the reference set and of the
//! source predictions affects the gain of one re-adjustment step.
//!
//! For every class count `m` and pair of ambiguity bins, each trial draws a
//! reference matrix with `m - 1` rows, `n` source rows and a class prior, then
//! re-adjusts every source row independently for each `alpha`. Randomness is
//! keyed by `(seed, sample cell, trial)` so results do not depend on thread
//! scheduling, and all alphas of a cell see the same sampled matrices.

mod report;
mod sampler;

pub use report::{CellAggregate, SimulationReport, SummaryCell};
pub use sampler::{
    max_ambiguity, sample_in_interval, sample_prior, BinSampler, Interval, Strategy, MAX_DRAWS, MIN_ACCEPTANCE,
    PILOT_DRAWS,
};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambiguity::DEFAULT_K_MAX;
use crate::an::readjust;
use crate::error::{Error, Result};
use crate::metrics::gain_report;
use crate::types::{CanHyperParams, PriorVector, ProbabilityVector, ReferenceMatrix};

/// Identifier of the generator behind every simulation stream.
pub const RNG_ALGORITHM: &str = "chacha20 (rand_chacha 0.9, seed_from_u64 + set_stream)";

/// Stream reserved for a cell's pilot draws.
const PILOT_STREAM: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub m_values: Vec<usize>,
    pub intervals: Vec<Interval>,
    pub trials: usize,
    /// Source rows per trial.
    pub n: usize,
    pub alphas: Vec<f64>,
    pub depth: usize,
    pub seed: u64,
    /// Scan bound for top-k entropy; `None` means `min(10, m)`.
    pub k_max: Option<usize>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        let mut m_values: Vec<usize> = (2..=10).collect();
        m_values.extend((20..=100).step_by(10));
        let mut alphas: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        alphas.extend((1..=9).map(|i| i as f64));
        Self {
            m_values,
            intervals: Interval::quartiles(),
            trials: 200,
            n: 100,
            alphas,
            depth: 1,
            seed: 0,
            k_max: None,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.n == 0 {
            return Err(Error::invalid("trials and n must be at least 1"));
        }
        if self.depth == 0 {
            return Err(Error::invalid("depth must be at least 1"));
        }
        if self.m_values.is_empty() || self.m_values.iter().any(|&m| m < 2) {
            return Err(Error::invalid("m_values must be non-empty with every m >= 2"));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::invalid("alphas must be non-empty and positive"));
        }
        if matches!(self.k_max, Some(k) if k < 2) {
            return Err(Error::invalid("k_max must be at least 2"));
        }
        self.check_partition()
    }

    fn check_partition(&self) -> Result<()> {
        let bins = &self.intervals;
        let (first, last) = match (bins.first(), bins.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::invalid("at least one interval is required")),
        };
        let ok = first.lo == 0.0
            && last.hi == 1.0
            && last.closed
            && bins.iter().all(|b| b.lo < b.hi)
            && bins.windows(2).all(|w| w[0].hi == w[1].lo && !w[0].closed);
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("intervals must partition [0, 1] into contiguous bins"))
        }
    }

    pub fn k_max_for(&self, m: usize) -> usize {
        self.k_max.unwrap_or(DEFAULT_K_MAX).min(m)
    }

    /// `(m, reference bin, source bin)` in sweep order.
    pub fn sample_cells(&self) -> Vec<CellSpec> {
        let mut cells = Vec::new();
        for &m in &self.m_values {
            for (ai, &interval_a) in self.intervals.iter().enumerate() {
                for (bi, &interval_b) in self.intervals.iter().enumerate() {
                    cells.push(CellSpec {
                        m,
                        interval_a,
                        interval_b,
                        a_bin: ai,
                        b_bin: bi,
                    });
                }
            }
        }
        cells
    }
}

/// One sampling cell: a class count and the bins for the reference and source rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub m: usize,
    pub interval_a: Interval,
    pub interval_b: Interval,
    pub a_bin: usize,
    pub b_bin: usize,
}

/// Addresses the random streams of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub cell: u32,
}

impl StreamKey {
    pub fn rng(&self, stream: u32) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream((u64::from(self.cell) << 32) | u64::from(stream));
        rng
    }
}

struct TrialSample {
    reference: ReferenceMatrix,
    sources: Vec<ProbabilityVector>,
    prior: PriorVector,
}

fn draw_trial(
    cell: &CellSpec,
    cfg: &SimulationConfig,
    sampler_a: &mut BinSampler,
    sampler_b: &mut BinSampler,
    rng: &mut ChaCha20Rng,
) -> Result<TrialSample> {
    let rows = (0..cell.m - 1)
        .map(|_| sampler_a.sample(rng).map(ProbabilityVector::into_inner))
        .collect::<Result<Vec<_>>>()?;
    let sources = (0..cfg.n).map(|_| sampler_b.sample(rng)).collect::<Result<Vec<_>>>()?;
    let prior = PriorVector::new(sample_prior(cell.m, rng))?;
    Ok(TrialSample {
        reference: ReferenceMatrix::from_rows(&rows)?,
        sources,
        prior,
    })
}

/// Mean gain and accuracy gain of one trial at one `alpha`.
fn evaluate_trial(sample: &TrialSample, alpha: f64, depth: usize) -> Result<(f64, f64)> {
    let hp = CanHyperParams::new(alpha, depth, 0.0)?;
    let adjusted = sample
        .sources
        .iter()
        .map(|b0| readjust(b0, &sample.reference, &sample.prior, &hp))
        .collect::<Result<Vec<_>>>()?;
    let report = gain_report(&sample.prior.normalized(), &sample.sources, &adjusted)?;
    Ok((report.mean_delta(), report.accuracy_gain))
}

/// Runs every trial of one sampling cell for each `alpha` in `alphas`.
///
/// Trials whose sampling or re-adjustment fails are skipped and counted.
pub fn run_cell_alphas(
    cell: &CellSpec,
    alphas: &[f64],
    cfg: &SimulationConfig,
    key: StreamKey,
) -> Result<Vec<CellAggregate>> {
    if cell.m < 2 {
        return Err(Error::invalid("simulation needs m >= 2"));
    }
    let k_max = cfg.k_max_for(cell.m);
    let mut pilot = key.rng(PILOT_STREAM);
    let mut sampler_a = BinSampler::new(cell.m, cell.interval_a, k_max, &mut pilot)?;
    let mut sampler_b = BinSampler::new(cell.m, cell.interval_b, k_max, &mut pilot)?;

    let mut sums = vec![(0.0, 0.0, 0usize); alphas.len()];
    for trial in 0..cfg.trials {
        let mut rng = key.rng(trial as u32);
        let sample = match draw_trial(cell, cfg, &mut sampler_a, &mut sampler_b, &mut rng) {
            Ok(s) => s,
            Err(e) => {
                log::debug!(
                    "m={} {}x{} trial {trial}: {e}",
                    cell.m,
                    cell.interval_a.label(),
                    cell.interval_b.label()
                );
                continue;
            }
        };
        for (slot, &alpha) in sums.iter_mut().zip(alphas) {
            match evaluate_trial(&sample, alpha, cfg.depth) {
                Ok((delta, gain)) => {
                    slot.0 += delta;
                    slot.1 += gain;
                    slot.2 += 1;
                }
                Err(e) => log::debug!("m={} alpha={alpha} trial {trial}: {e}", cell.m),
            }
        }
    }

    Ok(alphas
        .iter()
        .zip(sums)
        .map(|(&alpha, (delta, gain, count))| CellAggregate {
            m: cell.m,
            interval_a: cell.interval_a,
            interval_b: cell.interval_b,
            a_bin: cell.a_bin,
            b_bin: cell.b_bin,
            alpha,
            trials: count,
            mean_delta: delta / count as f64,
            mean_accuracy_gain: gain / count as f64,
            failures: cfg.trials - count,
        })
        .collect())
}

/// Single-`alpha` form of [`run_cell_alphas`].
pub fn run_cell(cell: &CellSpec, alpha: f64, cfg: &SimulationConfig, key: StreamKey) -> Result<CellAggregate> {
    Ok(run_cell_alphas(cell, &[alpha], cfg, key)?.remove(0))
}

/// Full sweep over class counts, bin pairs and alphas.
pub fn run_grid(cfg: &SimulationConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let cells = cfg.sample_cells();
    let per_cell = cells
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let key = StreamKey {
                seed: cfg.seed,
                cell: i as u32,
            };
            run_cell_alphas(cell, &cfg.alphas, cfg, key)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationReport {
        rng_algorithm: RNG_ALGORITHM.to_string(),
        seed: cfg.seed,
        bins: cfg.intervals.clone(),
        rows: per_cell.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SimulationConfig {
        SimulationConfig {
            m_values: vec![2, 3],
            trials: 4,
            n: 10,
            alphas: vec![0.5, 1.0],
            seed: 5,
            ..SimulationConfig::default()
        }
    }

    #[test]
    fn default_config_matches_published_sweep() {
        let cfg = SimulationConfig::default();
        assert_eq!(cfg.m_values.len(), 18);
        assert_eq!(cfg.m_values.last(), Some(&100));
        assert_eq!(cfg.alphas.len(), 18);
        assert_eq!((cfg.trials, cfg.n, cfg.depth), (200, 100, 1));
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_partitions() {
        let mut cfg = small_config();
        cfg.intervals = vec![Interval::half_open(0.0, 0.5), Interval::closed(0.6, 1.0)];
        assert!(cfg.validate().is_err());
        cfg.intervals = vec![Interval::half_open(0.0, 1.0)];
        assert!(cfg.validate().is_err());
        cfg.intervals = vec![Interval::closed(0.0, 1.0)];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn cell_is_reproducible() {
        let cfg = SimulationConfig {
            trials: 1,
            ..small_config()
        };
        let cell = cfg.sample_cells()[5];
        let key = StreamKey { seed: 42, cell: 5 };
        let a = run_cell(&cell, 1.0, &cfg, key).unwrap();
        let b = run_cell(&cell, 1.0, &cfg, key).unwrap();
        assert_eq!(a.mean_delta.to_bits(), b.mean_delta.to_bits());
        assert_eq!(a.mean_accuracy_gain.to_bits(), b.mean_accuracy_gain.to_bits());
    }

    #[test]
    fn ambiguous_sources_gain_with_confident_reference() {
        let cfg = SimulationConfig {
            trials: 200,
            n: 100,
            ..small_config()
        };
        let bins = Interval::quartiles();
        let cell = CellSpec {
            m: 2,
            interval_a: bins[0],
            interval_b: bins[3],
            a_bin: 0,
            b_bin: 3,
        };
        let agg = run_cell(&cell, 1.0, &cfg, StreamKey { seed: 1, cell: 0 }).unwrap();
        assert_eq!(agg.trials, 200);
        assert!(agg.mean_accuracy_gain > 0.0);
    }

    #[test]
    fn small_alpha_stays_finite() {
        let cfg = small_config();
        let cell = cfg.sample_cells()[10];
        let agg = run_cell(&cell, 1e-3, &cfg, StreamKey { seed: 3, cell: 10 }).unwrap();
        assert!(agg.mean_delta.is_finite());
    }

    #[test]
    fn grid_is_deterministic_and_complete() {
        let cfg = small_config();
        let a = run_grid(&cfg).unwrap();
        let b = run_grid(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2 * 16 * 2);
        for row in &a.rows {
            assert_eq!(row.trials + row.failures, cfg.trials);
        }
        assert_eq!(a.summary().len(), 16);
    }
}
