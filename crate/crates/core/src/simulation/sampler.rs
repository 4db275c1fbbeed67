//! Draws probability vectors whose ambiguity score lands in a target interval.
//!
//! Vectors come from the flat Dirichlet. When plain rejection accepts fewer than
//! one draw in a thousand, each Dirichlet draw is instead tempered
//! (`x^t`, renormalized) with `t` bisected until the score lands in the bin.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::ambiguity::score_values;
use crate::error::{Error, Result};
use crate::types::ProbabilityVector;

/// Total draws allowed for a single sample before giving up.
pub const MAX_DRAWS: usize = 100_000;
/// Plain draws used to estimate the rejection acceptance rate.
pub const PILOT_DRAWS: usize = 1_000;
/// Acceptance rate below which the tempered strategy takes over.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

const LOG_T_MIN: f64 = -2.0;
const LOG_T_MAX: f64 = 2.0;
const T_GRID: usize = 33;
const BISECTION_STEPS: usize = 60;

/// Half-open ambiguity bin `[lo, hi)`, or closed `[lo, hi]` when `closed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub closed: bool,
}

impl Interval {
    pub const fn half_open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, closed: false }
    }

    pub const fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, closed: true }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && (x < self.hi || (self.closed && x <= self.hi))
    }

    /// `[0,0.25)` style label.
    pub fn label(&self) -> String {
        format!("[{},{}{}", self.lo, self.hi, if self.closed { ']' } else { ')' })
    }

    /// The four quarter bins covering `[0, 1]`.
    pub fn quartiles() -> Vec<Interval> {
        vec![
            Interval::half_open(0.0, 0.25),
            Interval::half_open(0.25, 0.5),
            Interval::half_open(0.5, 0.75),
            Interval::closed(0.75, 1.0),
        ]
    }
}

/// Largest ambiguity score reachable with `m` classes and scan bound `k_max`.
///
/// Each top-k term `-x ln x` peaks at `x = 1/e`. For `k_max >= 3` the mass
/// constraint binds and the optimum is `k_max` entries at `1 / k_max`, giving
/// `ln k_max / ln m`. For `k_max = 2` and `m > 2` both entries sit at `1/e`.
pub fn max_ambiguity(m: usize, k_max: usize) -> f64 {
    let top = if k_max == 2 && m > 2 {
        2.0 / std::f64::consts::E
    } else {
        (k_max as f64).ln()
    };
    top / (m as f64).ln()
}

fn flat_dirichlet<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    x
}

/// `x^t` renormalized, computed in log space so large `t` cannot underflow to zero mass.
fn temper(log_x: &[f64], t: f64, out: &mut [f64]) {
    let peak = log_x.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(t * b));
    let mut total = 0.0;
    for (o, &l) in out.iter_mut().zip(log_x) {
        *o = (t * l - peak).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Rejection,
    Tempered,
}

/// Sampler for one `(m, interval)` pair.
///
/// Remembers bins that are out of reach: after a sample exhausts its budget
/// without this sampler ever succeeding, later calls fail immediately.
#[derive(Debug, Clone)]
pub struct BinSampler {
    m: usize,
    interval: Interval,
    k_max: usize,
    strategy: Strategy,
    succeeded: bool,
    unreachable: bool,
}

impl BinSampler {
    /// Chooses the strategy from [`PILOT_DRAWS`] plain draws on `pilot_rng`.
    pub fn new<R: Rng + ?Sized>(m: usize, interval: Interval, k_max: usize, pilot_rng: &mut R) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("sampling needs m >= 2"));
        }
        if !(0.0..=1.0).contains(&interval.lo) || !(0.0..=1.0).contains(&interval.hi) || interval.lo > interval.hi {
            return Err(Error::invalid(format!(
                "interval {} not within [0, 1]",
                interval.label()
            )));
        }
        let k_max = k_max.clamp(2, m);
        let unreachable = interval.lo > max_ambiguity(m, k_max);
        let mut strategy = Strategy::Rejection;
        if !unreachable {
            let accepted = (0..PILOT_DRAWS)
                .filter(|_| interval.contains(score_values(&flat_dirichlet(m, pilot_rng), k_max)))
                .count();
            if (accepted as f64) < MIN_ACCEPTANCE * PILOT_DRAWS as f64 {
                strategy = Strategy::Tempered;
            }
        }
        Ok(Self {
            m,
            interval,
            k_max,
            strategy,
            succeeded: false,
            unreachable,
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<ProbabilityVector> {
        if self.unreachable {
            return Err(self.failure(0));
        }
        let drawn = match self.strategy {
            Strategy::Rejection => self.rejection(rng, MAX_DRAWS),
            Strategy::Tempered => self.tempered(rng, MAX_DRAWS),
        };
        match drawn {
            Some(v) => {
                self.succeeded = true;
                Ok(ProbabilityVector::from_raw(v))
            }
            None => {
                if !self.succeeded {
                    self.unreachable = true;
                }
                Err(self.failure(MAX_DRAWS))
            }
        }
    }

    fn failure(&self, draws: usize) -> Error {
        Error::SamplingFailure {
            m: self.m,
            interval: self.interval.label(),
            draws,
        }
    }

    fn rejection<R: Rng + ?Sized>(&self, rng: &mut R, budget: usize) -> Option<Vec<f64>> {
        (0..budget)
            .map(|_| flat_dirichlet(self.m, rng))
            .find(|x| self.interval.contains(score_values(x, self.k_max)))
    }

    fn tempered<R: Rng + ?Sized>(&self, rng: &mut R, budget: usize) -> Option<Vec<f64>> {
        let reachable_hi = self.interval.hi.min(max_ambiguity(self.m, self.k_max));
        let mut buf = vec![0.0; self.m];
        for _ in 0..budget {
            let log_x: Vec<f64> = flat_dirichlet(self.m, rng).iter().map(|v| v.ln()).collect();
            let target = self.interval.lo + rng.random::<f64>() * (reachable_hi - self.interval.lo);
            if let Some(v) = self.solve_temperature(&log_x, target, &mut buf) {
                return Some(v);
            }
        }
        None
    }

    /// Finds `t` with `score(x^t) ~ target` by scanning a log grid for a bracket
    /// (largest `t` first, where the score decreases in `t`) and bisecting it.
    fn solve_temperature(&self, log_x: &[f64], target: f64, buf: &mut [f64]) -> Option<Vec<f64>> {
        let score_at = |log_t: f64, buf: &mut [f64]| {
            temper(log_x, 10f64.powf(log_t), buf);
            score_values(buf, self.k_max)
        };
        let step = (LOG_T_MAX - LOG_T_MIN) / (T_GRID - 1) as f64;
        let mut upper = LOG_T_MAX;
        let mut upper_score = score_at(upper, buf);
        for i in (0..T_GRID - 1).rev() {
            let lower = LOG_T_MIN + i as f64 * step;
            let lower_score = score_at(lower, buf);
            let brackets = (lower_score - target) * (upper_score - target) <= 0.0;
            if brackets {
                let (mut lo, mut hi) = (lower, upper);
                let lo_above = lower_score >= target;
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    let s = score_at(mid, buf);
                    if self.interval.contains(s) && (s - target).abs() < 1e-3 {
                        return Some(buf.to_vec());
                    }
                    if (s >= target) == lo_above {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let s = score_at(0.5 * (lo + hi), buf);
                return self.interval.contains(s).then(|| buf.to_vec());
            }
            upper = lower;
            upper_score = lower_score;
        }
        None
    }
}

/// One sample from `interval`: plain rejection for the first [`PILOT_DRAWS`]
/// draws, tempered draws for the rest of the [`MAX_DRAWS`] budget.
pub fn sample_in_interval<R: Rng + ?Sized>(
    m: usize,
    interval: Interval,
    k_max: usize,
    rng: &mut R,
) -> Result<ProbabilityVector> {
    let mut sampler = BinSampler {
        m,
        interval,
        k_max: k_max.clamp(2, m.max(2)),
        strategy: Strategy::Rejection,
        succeeded: false,
        unreachable: false,
    };
    if m < 2 {
        return Err(Error::invalid("sampling needs m >= 2"));
    }
    if let Some(v) = sampler.rejection(rng, PILOT_DRAWS) {
        return Ok(ProbabilityVector::from_raw(v));
    }
    sampler.strategy = Strategy::Tempered;
    sampler
        .tempered(rng, MAX_DRAWS - PILOT_DRAWS)
        .map(ProbabilityVector::from_raw)
        .ok_or_else(|| sampler.failure(MAX_DRAWS))
}

/// Normalized flat-Dirichlet draw, used for the simulated class priors.
pub fn sample_prior<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    flat_dirichlet(m, rng)
}
