//! Random input generators shared by the integration tests.

#![allow(dead_code)]

use can_core::{CanHyperParams, PriorVector, ProbabilityVector, ReferenceMatrix};
use rand::Rng;
use rand_distr::Exp1;

/// Flat Dirichlet draw; with `sparse`, about one entry in ten is zeroed.
pub fn simplex<R: Rng>(rng: &mut R, m: usize, sparse: bool) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..m)
            .map(|_| {
                if sparse && rng.random_bool(0.1) {
                    0.0
                } else {
                    rng.sample::<f64, _>(Exp1)
                }
            })
            .collect();
        let total: f64 = v.iter().sum();
        if total > 0.0 {
            v.iter_mut().for_each(|x| *x /= total);
            return v;
        }
    }
}

/// One random re-adjustment problem.
#[derive(Debug, Clone)]
pub struct Case {
    pub b0: ProbabilityVector,
    pub a0: ReferenceMatrix,
    pub q: PriorVector,
    pub hp: CanHyperParams,
}

/// Bounds for [`random_case`].
#[derive(Debug, Clone, Copy)]
pub struct CaseBounds {
    pub max_m: usize,
    pub max_n: usize,
    pub alpha: (f64, f64),
    pub max_depth: usize,
    pub sparse: bool,
}

pub const SUITE_BOUNDS: CaseBounds = CaseBounds {
    max_m: 100,
    max_n: 200,
    alpha: (0.1, 35.0),
    max_depth: 5,
    sparse: true,
};

/// Alpha is log-uniform; priors are strictly positive.
pub fn random_case<R: Rng>(rng: &mut R, bounds: &CaseBounds) -> Case {
    let m = rng.random_range(2..=bounds.max_m);
    let n = rng.random_range(1..=bounds.max_n);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| simplex(rng, m, bounds.sparse)).collect();
    let (lo, hi) = bounds.alpha;
    let alpha = rng.random_range(lo.ln()..=hi.ln()).exp();
    let depth = rng.random_range(1..=bounds.max_depth);
    Case {
        b0: ProbabilityVector::new(simplex(rng, m, bounds.sparse)).unwrap(),
        a0: ReferenceMatrix::from_rows(&rows).unwrap(),
        q: PriorVector::new(simplex(rng, m, false)).unwrap(),
        hp: CanHyperParams::new(alpha, depth, 0.5).unwrap(),
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
