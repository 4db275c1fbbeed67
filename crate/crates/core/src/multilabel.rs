//! Multi-label support: an `n x m` matrix of independent per-class scores is
//! flattened into `n * m` binary distributions `[p, 1 - p]`, so the single-label
//! machinery applies unchanged with two classes.

use std::collections::BTreeSet;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::types::{argmax, PriorVector, ProbabilityVector};

/// Per-class probabilities in `[0, 1]`; rows need not sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilabelMatrix(Array2<f64>);

impl MultilabelMatrix {
    pub fn new(scores: Array2<f64>) -> Result<Self> {
        if let Some(((i, j), v)) = scores.indexed_iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("score {v} at ({i}, {j}) outside [0, 1]")));
        }
        Ok(Self(scores))
    }

    pub fn from_rows<V: AsRef<[f64]>>(rows: &[V]) -> Result<Self> {
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * m);
        for row in rows {
            if row.as_ref().len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: row.as_ref().len(),
                });
            }
            data.extend_from_slice(row.as_ref());
        }
        let array = Array2::from_shape_vec((rows.len(), m), data).map_err(|e| Error::invalid(e.to_string()))?;
        Self::new(array)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.dim()
    }

    pub fn scores(&self) -> &Array2<f64> {
        &self.0
    }
}

/// `n * m` rows of `[positive, negative]` probabilities, row-major over `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryPairBlock(Vec<[f64; 2]>);

impl BinaryPairBlock {
    pub fn new(pairs: Vec<[f64; 2]>) -> Result<Self> {
        for (r, p) in pairs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p[0]) || !(0.0..=1.0).contains(&p[1]) {
                return Err(Error::invalid(format!("pair row {r} has entries outside [0, 1]")));
            }
            if (p[0] + p[1] - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("pair row {r} does not sum to 1")));
            }
        }
        Ok(Self(pairs))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.0
    }

    /// Each pair as a two-class [`ProbabilityVector`].
    pub fn distributions(&self) -> Vec<ProbabilityVector> {
        self.0.iter().map(|p| ProbabilityVector::from_raw(p.to_vec())).collect()
    }
}

pub fn to_binary_pairs(scores: &MultilabelMatrix) -> BinaryPairBlock {
    BinaryPairBlock(scores.0.iter().map(|&p| [p, 1.0 - p]).collect())
}

/// Inverse of [`to_binary_pairs`]; takes the positive column of each pair.
pub fn from_binary_pairs(block: &BinaryPairBlock, n: usize, m: usize) -> Result<MultilabelMatrix> {
    if block.len() != n * m {
        return Err(Error::DimensionMismatch {
            expected: n * m,
            found: block.len(),
        });
    }
    let data = block.0.iter().map(|p| p[0]).collect();
    let array = Array2::from_shape_vec((n, m), data).map_err(|e| Error::invalid(e.to_string()))?;
    MultilabelMatrix::new(array)
}

/// Labels scoring at least 0.5; an empty row falls back to its argmax class.
pub fn decide_labels(scores: &MultilabelMatrix) -> Vec<BTreeSet<usize>> {
    scores
        .0
        .rows()
        .into_iter()
        .map(|row| {
            let mut set: BTreeSet<usize> = row
                .iter()
                .enumerate()
                .filter(|(_, p)| **p >= 0.5)
                .map(|(j, _)| j)
                .collect();
            if set.is_empty() && !row.is_empty() {
                set.insert(argmax(&row.to_vec()));
            }
            set
        })
        .collect()
}

/// Pair priors `[q_j, 1 - q_j]` from per-class positive rates.
pub fn pair_priors(positive_rates: &[f64]) -> Result<Vec<PriorVector>> {
    positive_rates
        .iter()
        .map(|&r| {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::invalid(format!("positive rate {r} outside [0, 1]")));
            }
            PriorVector::new(vec![r, 1.0 - r])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn to_pairs_examples() {
        let m = MultilabelMatrix::from_rows(&[[0.2, 0.7, 0.1]]).unwrap();
        let b = to_binary_pairs(&m);
        let expect = [[0.2, 0.8], [0.7, 0.30000000000000004], [0.1, 0.9]];
        assert_eq!(b.rows(), &expect);

        let m = MultilabelMatrix::from_rows(&[[1.0, 0.0]]).unwrap();
        assert_eq!(to_binary_pairs(&m).rows(), &[[1.0, 0.0], [0.0, 1.0]]);

        let m = MultilabelMatrix::from_rows(&[[0.1, 0.2], [0.3, 0.4]]).unwrap();
        let firsts: Vec<f64> = to_binary_pairs(&m).rows().iter().map(|p| p[0]).collect();
        assert_eq!(firsts, vec![0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn from_pairs_examples() {
        let b = BinaryPairBlock::new(vec![[0.75, 0.25]]).unwrap();
        assert_eq!(from_binary_pairs(&b, 1, 1).unwrap().scores()[[0, 0]], 0.75);
        assert!(matches!(
            from_binary_pairs(&b, 2, 1),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        let m = MultilabelMatrix::from_rows(&[[0.2, 0.7, 0.1]]).unwrap();
        assert_eq!(from_binary_pairs(&to_binary_pairs(&m), 1, 3).unwrap(), m);
    }

    #[test]
    fn rejects_out_of_range_scores() {
        assert!(MultilabelMatrix::from_rows(&[[0.2, 1.3]]).is_err());
        assert!(MultilabelMatrix::from_rows(&[[-0.1, 0.3]]).is_err());
        assert!(BinaryPairBlock::new(vec![[0.6, 0.6]]).is_err());
    }

    #[test]
    fn decide_label_examples() {
        let sets = |rows: &[[f64; 2]]| decide_labels(&MultilabelMatrix::from_rows(rows).unwrap());
        assert_eq!(
            decide_labels(&MultilabelMatrix::from_rows(&[[0.7, 0.6, 0.1]]).unwrap()),
            vec![BTreeSet::from([0, 1])]
        );
        assert_eq!(sets(&[[0.4, 0.3]]), vec![BTreeSet::from([0])]);
        assert_eq!(sets(&[[0.5, 0.5]]), vec![BTreeSet::from([0, 1])]);
        assert_eq!(sets(&[[0.2, 0.2]]), vec![BTreeSet::from([0])]);
    }

    #[test]
    fn pair_priors_follow_positive_rates() {
        let priors = pair_priors(&[0.25, 1.0]).unwrap();
        assert_eq!(priors[0].as_slice(), &[0.25, 0.75]);
        assert_eq!(priors[1].zero_classes(), vec![1]);
        assert!(pair_priors(&[1.2]).is_err());
    }
}
