//! Validated value types shared by every stage of the pipeline.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Absolute tolerance on the unit-sum constraint of a [`ProbabilityVector`].
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A nonnegative vector over `m` classes summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_distribution(&values)?;
        Ok(Self(values))
    }

    /// Scales `values` to unit sum. Fails if any entry is negative or the sum is zero.
    pub fn normalized(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("probabilities must be finite and nonnegative"));
        }
        let total: f64 = values.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        values.iter_mut().for_each(|v| *v /= total);
        Ok(Self(values))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Index of the largest entry; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

impl AsRef<[f64]> for ProbabilityVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Index of the largest entry, lowest index first on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn check_distribution(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid("probability vector is empty"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::invalid(format!(
            "probability entry {v} is negative or non-finite"
        )));
    }
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// Row-stochastic `n x m` matrix of confident predictions, `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMatrix(Array2<f64>);

impl ReferenceMatrix {
    pub fn new(rows: Array2<f64>) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::invalid("reference matrix needs at least one row and one column"));
        }
        for (i, row) in rows.rows().into_iter().enumerate() {
            check_distribution(row.as_slice().unwrap_or(&row.to_vec()))
                .map_err(|e| Error::invalid(format!("reference row {i}: {e}")))?;
        }
        Ok(Self(rows))
    }

    pub fn from_rows<V: AsRef<[f64]>>(rows: &[V]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::invalid("reference matrix needs at least one row"))?;
        let m = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * m);
        for row in rows {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        let array = Array2::from_shape_vec((rows.len(), m), data).map_err(|e| Error::invalid(e.to_string()))?;
        Self::new(array)
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn nclasses(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.0.row(i)
    }
}

/// Class-prior weights `q`, the diagonal of the prior scaling matrix.
///
/// Entries need not sum to one; row normalization absorbs any overall scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorVector(Vec<f64>);

impl PriorVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("prior vector is empty"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("prior weights must be finite and nonnegative"));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(Error::invalid("prior vector has no positive weight"));
        }
        let prior = Self(weights);
        let zeros = prior.zero_classes();
        if !zeros.is_empty() {
            log::warn!("classes {zeros:?} have zero prior and will be annihilated by normalization");
        }
        Ok(prior)
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    /// Adds `epsilon` to every weight; the additive smoothing knob for zero priors.
    pub fn smoothed(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::invalid("prior smoothing must be >= 0"));
        }
        Self::new(self.0.iter().map(|w| w + epsilon).collect())
    }

    /// Copy rescaled to unit sum.
    pub fn normalized(&self) -> Self {
        let total: f64 = self.0.iter().sum();
        Self(self.0.iter().map(|w| w / total).collect())
    }

    pub fn zero_classes(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, w)| **w == 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Hyperparameters of one re-adjustment run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanHyperParams {
    /// Elementwise exponent applied to the working matrix each iteration.
    pub alpha: f64,
    /// Number of full normalization iterations.
    pub depth: usize,
    /// Ambiguity threshold; examples scoring strictly above it are re-adjusted.
    pub tau: f64,
    /// Largest `k` scanned by the top-k entropy; `None` means `min(10, m)`.
    pub k_max: Option<usize>,
}

impl CanHyperParams {
    pub fn new(alpha: f64, depth: usize, tau: f64) -> Result<Self> {
        let hp = Self {
            alpha,
            depth,
            tau,
            k_max: None,
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn with_k_max(mut self, k_max: usize) -> Result<Self> {
        self.k_max = Some(k_max);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.depth == 0 {
            return Err(Error::invalid("depth must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::invalid(format!("tau must lie in [0, 1], got {}", self.tau)));
        }
        if matches!(self.k_max, Some(k) if k < 2) {
            return Err(Error::invalid("k_max must be at least 2"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_vector_rejects_bad_sums_and_signs() {
        assert!(ProbabilityVector::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbabilityVector::new(vec![0.5, 0.4]).is_err());
        assert!(ProbabilityVector::new(vec![1.5, -0.5]).is_err());
        assert!(ProbabilityVector::new(vec![]).is_err());
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
    }

    #[test]
    fn reference_matrix_checks_rows() {
        assert!(ReferenceMatrix::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.5]]).is_ok());
        assert!(matches!(
            ReferenceMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ReferenceMatrix::from_rows(&[vec![0.3, 0.3]]).is_err());
        assert!(ReferenceMatrix::from_rows::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn prior_vector_validation() {
        assert!(PriorVector::new(vec![0.0, 0.0]).is_err());
        assert!(PriorVector::new(vec![-1.0, 2.0]).is_err());
        let q = PriorVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(q.zero_classes(), vec![1]);
        let s = q.smoothed(1.0).unwrap();
        assert_eq!(s.as_slice(), &[2.0, 1.0]);
        assert_eq!(s.normalized().as_slice(), &[2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn hyperparams_validation() {
        assert!(CanHyperParams::new(1.0, 1, 0.5).is_ok());
        assert!(CanHyperParams::new(0.0, 1, 0.5).is_err());
        assert!(CanHyperParams::new(1.0, 0, 0.5).is_err());
        assert!(CanHyperParams::new(1.0, 1, 1.5).is_err());
        assert!(CanHyperParams::new(1.0, 1, 0.5).unwrap().with_k_max(1).is_err());
    }
}
