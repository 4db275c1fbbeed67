//! Top-k entropy and the ambiguity gate that separates challenging examples
//! from the confident reference set.

use crate::error::{Error, Result};
use crate::types::{ProbabilityVector, ReferenceMatrix};

/// Default upper bound on `k`, capped by the class count.
pub const DEFAULT_K_MAX: usize = 10;

/// Threshold and scan bound for the ambiguity predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbiguityConfig {
    pub tau: f64,
    /// `None` resolves to `min(10, m)`.
    pub k_max: Option<usize>,
}

impl AmbiguityConfig {
    pub fn new(tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::invalid(format!("tau must lie in [0, 1], got {tau}")));
        }
        Ok(Self { tau, k_max: None })
    }

    pub fn with_k_max(mut self, k_max: usize) -> Result<Self> {
        if k_max < 2 {
            return Err(Error::invalid("k_max must be at least 2"));
        }
        self.k_max = Some(k_max);
        Ok(self)
    }

    /// Effective `k_max` for `m` classes, always within `[2, m]` when `m >= 2`.
    pub fn k_max_for(&self, m: usize) -> usize {
        self.k_max.unwrap_or(DEFAULT_K_MAX).min(m)
    }
}

/// `-sum v_i log_m v_i` with `0 log 0 = 0`.
pub fn entropy_base_m(v: &[f64], m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::invalid(format!("entropy base needs m >= 2, got {m}")));
    }
    if v.iter().any(|x| *x < 0.0 || !x.is_finite()) {
        return Err(Error::invalid("entropy input must be finite and nonnegative"));
    }
    let ln_m = (m as f64).ln();
    Ok(v.iter().map(|&x| entropy_term(x)).sum::<f64>() / ln_m)
}

fn entropy_term(x: f64) -> f64 {
    if x > 0.0 {
        -x * x.ln()
    } else {
        0.0
    }
}

/// Indices of `v` sorted by descending value, lower index first on ties.
fn descending_order(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    idx
}

/// The `k` largest entries of `v` in descending order.
pub fn top_k(v: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 || k > v.len() {
        return Err(Error::invalid(format!("k = {k} outside [1, {}]", v.len())));
    }
    Ok(descending_order(v).into_iter().take(k).map(|i| v[i]).collect())
}

/// Entropy (base `m`) of the top-k entries, without renormalizing them.
pub fn top_k_entropy(v: &ProbabilityVector, k: usize, m: usize) -> Result<f64> {
    if k < 2 || k > m {
        return Err(Error::invalid(format!("k = {k} outside [2, {m}]")));
    }
    entropy_base_m(&top_k(v.as_slice(), k)?, m)
}

/// Maximum top-k entropy over `k` in `[2, k_max]`, computed after a single sort.
pub fn ambiguity_score(v: &ProbabilityVector, cfg: &AmbiguityConfig) -> Result<f64> {
    let m = v.len();
    if m < 2 {
        return Err(Error::invalid("ambiguity needs at least two classes"));
    }
    Ok(score_values(v.as_slice(), cfg.k_max_for(m)))
}

/// Unchecked scoring kernel: `values` nonnegative, `2 <= k_max <= values.len()`.
pub(crate) fn score_values(values: &[f64], k_max: usize) -> f64 {
    let ln_m = (values.len() as f64).ln();
    let mut running = 0.0;
    let mut best = f64::NEG_INFINITY;
    for (rank, &i) in descending_order(values).iter().take(k_max).enumerate() {
        running += entropy_term(values[i]);
        if rank >= 1 {
            best = best.max(running / ln_m);
        }
    }
    best
}

/// True iff the ambiguity score strictly exceeds `tau`.
pub fn is_ambiguous(v: &ProbabilityVector, cfg: &AmbiguityConfig) -> Result<bool> {
    Ok(ambiguity_score(v, cfg)? > cfg.tau)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionResult {
    /// Indices flagged ambiguous, ascending.
    pub challenging: Vec<usize>,
    /// Indices kept as context, ascending.
    pub confident: Vec<usize>,
    /// Rows of the confident examples in their original order.
    pub reference: ReferenceMatrix,
}

/// Splits predictions into challenging examples and a confident reference set.
pub fn partition_validation(predictions: &[ProbabilityVector], cfg: &AmbiguityConfig) -> Result<PartitionResult> {
    let (challenging, confident) = split_by_ambiguity(predictions, cfg)?;
    if confident.is_empty() {
        return Err(Error::EmptyReference { tau: cfg.tau });
    }
    let rows: Vec<&[f64]> = confident.iter().map(|&i| predictions[i].as_slice()).collect();
    let reference = ReferenceMatrix::from_rows(&rows)?;
    Ok(PartitionResult {
        challenging,
        confident,
        reference,
    })
}

/// Index split without building the reference matrix.
pub fn split_by_ambiguity(
    predictions: &[ProbabilityVector],
    cfg: &AmbiguityConfig,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let first = predictions
        .first()
        .ok_or_else(|| Error::invalid("no predictions to partition"))?;
    let m = first.len();
    let mut challenging = Vec::new();
    let mut confident = Vec::new();
    for (i, p) in predictions.iter().enumerate() {
        if p.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: p.len(),
            });
        }
        if is_ambiguous(p, cfg)? {
            challenging.push(i);
        } else {
            confident.push(i);
        }
    }
    Ok((challenging, confident))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    fn log3(x: f64) -> f64 {
        x.ln() / 3f64.ln()
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_base_m(&[1.0, 0.0, 0.0], 3).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy_base_m(&[1.0 / 3.0; 3], 3).unwrap(), 1.0, epsilon = 1e-12);
        let h = entropy_base_m(&[0.5, 0.25, 0.25], 3).unwrap();
        assert_abs_diff_eq!(h, 0.5 * log3(2.0) + 0.5 * log3(4.0), epsilon = 1e-12);
        assert_abs_diff_eq!(h, 0.94639, epsilon = 1e-4);
        assert!(h > entropy_base_m(&[0.5, 0.5, 0.0], 3).unwrap());
        assert!(entropy_base_m(&[1.0], 1).is_err());
    }

    #[test]
    fn top_k_examples() {
        assert_eq!(top_k(&[0.5, 0.25, 0.25], 2).unwrap(), vec![0.5, 0.25]);
        assert_eq!(top_k(&[0.2, 0.2, 0.6], 2).unwrap(), vec![0.6, 0.2]);
        assert_eq!(top_k(&[0.5, 0.5, 0.0], 3).unwrap(), vec![0.5, 0.5, 0.0]);
        assert!(top_k(&[0.5, 0.5], 0).is_err());
        assert!(top_k(&[0.5, 0.5], 3).is_err());
    }

    #[test]
    fn top_k_tie_resolves_to_lower_index() {
        assert_eq!(descending_order(&[0.2, 0.2, 0.6]), vec![2, 0, 1]);
    }

    #[test]
    fn top_k_entropy_examples() {
        let h = top_k_entropy(&pv(&[0.5, 0.5, 0.0]), 2, 3).unwrap();
        assert_abs_diff_eq!(h, log3(2.0), epsilon = 1e-12);
        assert_abs_diff_eq!(h, 0.63093, epsilon = 1e-4);
        let h2 = top_k_entropy(&pv(&[0.5, 0.25, 0.25]), 2, 3).unwrap();
        assert_abs_diff_eq!(h2, 0.5 * log3(2.0) + 0.25 * log3(4.0), epsilon = 1e-12);
        assert_abs_diff_eq!(h, h2, epsilon = 1e-12);

        let m = 6;
        for k in 2..=m {
            let h = top_k_entropy(&ProbabilityVector::uniform(m), k, m).unwrap();
            assert_abs_diff_eq!(h, k as f64 / m as f64, epsilon = 1e-12);
        }
        assert!(top_k_entropy(&pv(&[0.5, 0.5]), 1, 2).is_err());
    }

    #[test]
    fn ambiguity_score_examples() {
        let cfg = AmbiguityConfig::new(0.5).unwrap();
        for m in [2, 5, 17] {
            let mut v = vec![0.0; m];
            v[m / 2] = 1.0;
            assert_eq!(ambiguity_score(&pv(&v), &cfg).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(
            ambiguity_score(&ProbabilityVector::uniform(3), &cfg).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            ambiguity_score(&pv(&[0.5, 0.5, 0.0]), &cfg).unwrap(),
            log3(2.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn k_max_defaults_to_ten_capped_by_m() {
        let cfg = AmbiguityConfig::new(0.5).unwrap();
        assert_eq!(cfg.k_max_for(3), 3);
        assert_eq!(cfg.k_max_for(40), 10);
        assert_eq!(cfg.with_k_max(4).unwrap().k_max_for(40), 4);
        // Uniform over 20 classes with k_max = 10 scores 10/20.
        let s = ambiguity_score(&ProbabilityVector::uniform(20), &cfg).unwrap();
        assert_abs_diff_eq!(s, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn is_ambiguous_examples() {
        let one_hot = pv(&[0.0, 1.0, 0.0]);
        assert!(!is_ambiguous(&one_hot, &AmbiguityConfig::new(0.25).unwrap()).unwrap());
        assert!(is_ambiguous(&ProbabilityVector::uniform(4), &AmbiguityConfig::new(0.75).unwrap()).unwrap());

        let v = pv(&[0.5, 0.5, 0.0]);
        let score = ambiguity_score(&v, &AmbiguityConfig::new(0.0).unwrap()).unwrap();
        assert!(!is_ambiguous(&v, &AmbiguityConfig::new(score).unwrap()).unwrap());
        assert!(is_ambiguous(&v, &AmbiguityConfig::new(score - 1e-12).unwrap()).unwrap());
    }

    #[test]
    fn partition_examples() {
        let cfg = AmbiguityConfig::new(0.5).unwrap();
        let p = vec![pv(&[1.0, 0.0]), pv(&[0.5, 0.5])];
        let part = partition_validation(&p, &cfg).unwrap();
        assert_eq!(part.challenging, vec![1]);
        assert_eq!(part.confident, vec![0]);
        assert_eq!(part.reference, ReferenceMatrix::from_rows(&[[1.0, 0.0]]).unwrap());

        let hot = vec![pv(&[1.0, 0.0, 0.0]), pv(&[0.0, 0.0, 1.0])];
        for tau in [0.0, 0.3, 1.0] {
            let part = partition_validation(&hot, &AmbiguityConfig::new(tau).unwrap()).unwrap();
            assert!(part.challenging.is_empty());
            assert_eq!(part.reference.nrows(), 2);
        }

        let flat = vec![ProbabilityVector::uniform(3); 4];
        let err = partition_validation(&flat, &AmbiguityConfig::new(0.25).unwrap()).unwrap_err();
        assert!(matches!(err, Error::EmptyReference { .. }));
    }
}
