//! Alternating normalization of a reference matrix augmented with one source
//! prediction.
//!
//! One iteration maps the working matrix `L` (reference rows on top, the source
//! prediction as the last row) to a new row-stochastic matrix in two passes:
//!
//! 1. `S = L^alpha * diag(colsum(L^alpha))^-1`, which is column stochastic.
//! 2. `L' = diag(rowsum(S * diag(q)))^-1 * S * diag(q)`, which is row stochastic.
//!
//! The first pass is commonly called the "row norm" because it rescales how each
//! class is spread across examples, even though its output has unit columns.
//! This module names the steps by the stochasticity of their output.
//!
//! Conventions where the algebra is undefined:
//! - `0^alpha = 0` for every `alpha > 0`.
//! - A column of `L^alpha` summing to zero stays all-zero (`0/0 = 0`).
//! - A row of `S * diag(q)` summing to zero is an error ([`Error::DegenerateRow`]).

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{CanHyperParams, PriorVector, ProbabilityVector, ReferenceMatrix};

/// The `(n + 1) x m` working matrix: reference rows followed by the source row.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedMatrix(Array2<f64>);

impl AugmentedMatrix {
    /// Wraps an arbitrary nonnegative matrix with at least one row.
    pub fn from_array(body: Array2<f64>) -> Result<Self> {
        if body.nrows() == 0 || body.ncols() == 0 {
            return Err(Error::invalid("augmented matrix must be non-empty"));
        }
        if body.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(
                "augmented matrix entries must be finite and nonnegative",
            ));
        }
        Ok(Self(body))
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    /// The source prediction's working copy (last row).
    pub fn working_row(&self) -> ArrayView1<'_, f64> {
        self.0.row(self.0.nrows() - 1)
    }

    /// The reference block `A_d` (all rows but the last).
    pub fn reference_block(&self) -> ArrayView2<'_, f64> {
        self.0.slice(ndarray::s![..-1, ..])
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn nclasses(&self) -> usize {
        self.0.ncols()
    }
}

/// Stacks the reference rows on top of the source prediction.
pub fn build_augmented(b0: &ProbabilityVector, a0: &ReferenceMatrix) -> Result<AugmentedMatrix> {
    let m = a0.nclasses();
    if b0.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: b0.len(),
        });
    }
    let n = a0.nrows();
    let mut body = Array2::zeros((n + 1, m));
    body.slice_mut(ndarray::s![..n, ..]).assign(&a0.view());
    body.row_mut(n)
        .iter_mut()
        .zip(b0.as_slice())
        .for_each(|(dst, src)| *dst = *src);
    Ok(AugmentedMatrix(body))
}

/// Raises `l` elementwise to `alpha` and divides every column by its sum.
pub fn column_stochastic_step(l: &AugmentedMatrix, alpha: f64) -> Array2<f64> {
    let mut s = if alpha == 1.0 {
        l.0.clone()
    } else {
        l.0.mapv(|x| if x == 0.0 { 0.0 } else { x.powf(alpha) })
    };
    let col_sums: Vec<f64> = s.columns().into_iter().map(|c| exact_sum(c.iter().copied())).collect();
    for mut row in s.rows_mut() {
        for (x, &c) in row.iter_mut().zip(col_sums.iter()) {
            *x = if c > 0.0 { *x / c } else { 0.0 };
        }
    }
    s
}

/// Scales the columns of `s` by the prior and divides every row by its sum.
pub fn row_stochastic_step(s: &Array2<f64>, q: &PriorVector) -> Result<AugmentedMatrix> {
    if s.ncols() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: s.ncols(),
            found: q.len(),
        });
    }
    let prior = q.as_slice();
    let mut l = s.clone();
    for (i, mut row) in l.rows_mut().into_iter().enumerate() {
        row.iter_mut().zip(prior).for_each(|(x, w)| *x *= w);
        let total = exact_sum(row.iter().copied());
        if !(total > 0.0) {
            return Err(Error::DegenerateRow { row: i });
        }
        row.mapv_inplace(|x| x / total);
    }
    Ok(AugmentedMatrix(l))
}

/// One full iteration: column-stochastic pass followed by the row-stochastic pass.
pub fn an_iteration(l: &AugmentedMatrix, alpha: f64, q: &PriorVector) -> Result<AugmentedMatrix> {
    row_stochastic_step(&column_stochastic_step(l, alpha), q)
}

/// Re-adjusts a single source prediction against a fixed reference set.
///
/// Runs `hp.depth` iterations on the augmented matrix and returns its last row.
/// `hp.tau` and `hp.k_max` are not consulted; gating is the caller's concern.
pub fn readjust(
    b0: &ProbabilityVector,
    a0: &ReferenceMatrix,
    q: &PriorVector,
    hp: &CanHyperParams,
) -> Result<ProbabilityVector> {
    hp.validate()?;
    check_prior(q, a0.nclasses())?;
    let mut l = build_augmented(b0, a0)?;
    for _ in 0..hp.depth {
        l = an_iteration(&l, hp.alpha, q)?;
    }
    Ok(ProbabilityVector::from_raw(l.working_row().to_vec()))
}

/// [`readjust`] over many source predictions, each independent of the others.
pub fn readjust_batch(
    sources: &[ProbabilityVector],
    a0: &ReferenceMatrix,
    q: &PriorVector,
    hp: &CanHyperParams,
) -> Result<Vec<ProbabilityVector>> {
    sources.par_iter().map(|b0| readjust(b0, a0, q, hp)).collect()
}

/// Diagonal-scaling form of [`readjust`], kept as an independent cross-check.
///
/// Each iteration computes `Lambda1 = diag(q) / colsum(L^alpha)` and then
/// `b_d = lambda2 * Lambda1 * b_{d-1}^alpha` with `lambda2` the scalar that
/// restores unit mass. Reference rows follow the same recurrence so the column
/// sums at the next iteration are taken over the full working matrix.
pub fn readjust_scalar_oracle(
    b0: &ProbabilityVector,
    a0: &ReferenceMatrix,
    q: &PriorVector,
    hp: &CanHyperParams,
) -> Result<ProbabilityVector> {
    hp.validate()?;
    let m = a0.nclasses();
    if b0.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: b0.len(),
        });
    }
    check_prior(q, m)?;
    let prior = q.as_slice();

    let mut rows: Vec<Vec<f64>> = a0.view().rows().into_iter().map(|r| r.to_vec()).collect();
    rows.push(b0.as_slice().to_vec());

    for _ in 0..hp.depth {
        for row in rows.iter_mut() {
            for x in row.iter_mut() {
                *x = if *x == 0.0 { 0.0 } else { x.powf(hp.alpha) };
            }
        }
        let mut lambda1 = vec![0.0; m];
        for (j, scale) in lambda1.iter_mut().enumerate() {
            let col: f64 = rows.iter().map(|r| r[j]).sum();
            *scale = if col > 0.0 { prior[j] / col } else { 0.0 };
        }
        for (i, row) in rows.iter_mut().enumerate() {
            let mass: f64 = row.iter().zip(&lambda1).map(|(x, s)| x * s).sum();
            if !(mass > 0.0) {
                return Err(Error::DegenerateRow { row: i });
            }
            let lambda2 = 1.0 / mass;
            for (x, s) in row.iter_mut().zip(&lambda1) {
                *x *= lambda2 * s;
            }
        }
    }
    Ok(ProbabilityVector::from_raw(rows.pop().expect("source row")))
}

/// Correctly rounded sum via exact partials, so the result does not depend on
/// the order of the terms. Terms must be finite.
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut kept = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[kept] = lo;
                kept += 1;
            }
            x = hi;
        }
        partials.truncate(kept);
        partials.push(x);
    }
    let Some(mut n) = partials.len().checked_sub(1) else {
        return 0.0;
    };
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    // Half-way cases round to even only when the remaining partials agree in sign.
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

fn check_prior(q: &PriorVector, m: usize) -> Result<()> {
    if q.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: q.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    fn aug(a: Array2<f64>) -> AugmentedMatrix {
        AugmentedMatrix::from_array(a).unwrap()
    }

    fn assert_matrix_eq(got: &ArrayView2<f64>, want: &Array2<f64>, tol: f64) {
        assert_eq!(got.dim(), want.dim());
        for (g, w) in got.iter().zip(want.iter()) {
            assert_abs_diff_eq!(*g, *w, epsilon = tol);
        }
    }

    #[test]
    fn exact_sum_is_correctly_rounded() {
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum([1e100, 1.0, -1e100, 1e-100]), 1.0);
        assert_eq!(exact_sum([]), 0.0);
        let v = [0.3, 1e-17, 0.6, 2.5e-16, 0.1, 7.0];
        let mut w = v;
        w.reverse();
        assert_eq!(exact_sum(v), exact_sum(w));
    }

    #[test]
    fn build_augmented_appends_source_row() {
        let a0 = ReferenceMatrix::from_rows(&[[0.0, 1.0]]).unwrap();
        let l = build_augmented(&pv(&[0.5, 0.5]), &a0).unwrap();
        assert_eq!(l.view(), array![[0.0, 1.0], [0.5, 0.5]]);

        let a0 = ReferenceMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let l = build_augmented(&pv(&[1.0, 0.0]), &a0).unwrap();
        assert_eq!(l.view(), array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]);

        let a0 = ReferenceMatrix::from_rows(&[[0.1, 0.9], [0.6, 0.4], [0.3, 0.7]]).unwrap();
        let l = build_augmented(&pv(&[0.2, 0.8]), &a0).unwrap();
        assert_eq!(l.view().dim(), (4, 2));
        assert_eq!(l.working_row().to_vec(), vec![0.2, 0.8]);
        assert_eq!(l.reference_block(), a0.view());
    }

    #[test]
    fn build_augmented_rejects_mismatch() {
        let a0 = ReferenceMatrix::from_rows(&[[0.0, 1.0]]).unwrap();
        let err = build_augmented(&pv(&[0.2, 0.3, 0.5]), &a0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 3 }));
    }

    #[test]
    fn column_step_hand_values() {
        let s = column_stochastic_step(&aug(array![[0.0, 1.0], [0.5, 0.5]]), 1.0);
        assert_matrix_eq(&s.view(), &array![[0.0, 2.0 / 3.0], [1.0, 1.0 / 3.0]], 1e-15);

        for alpha in [0.1, 1.0, 3.7] {
            let s = column_stochastic_step(&aug(array![[1.0, 0.0], [0.0, 1.0]]), alpha);
            assert_eq!(s, array![[1.0, 0.0], [0.0, 1.0]]);
        }

        let s = column_stochastic_step(&aug(array![[0.25, 0.75]]), 2.0);
        assert_matrix_eq(&s.view(), &array![[1.0, 1.0]], 1e-15);
    }

    #[test]
    fn column_step_keeps_zero_columns_zero() {
        let s = column_stochastic_step(&aug(array![[0.0, 1.0], [0.0, 1.0]]), 2.0);
        assert_eq!(s, array![[0.0, 0.5], [0.0, 0.5]]);
    }

    #[test]
    fn row_step_hand_values() {
        let q = PriorVector::new(vec![0.5, 0.5]).unwrap();
        let l = row_stochastic_step(&array![[0.0, 2.0 / 3.0], [1.0, 1.0 / 3.0]], &q).unwrap();
        assert_matrix_eq(&l.view(), &array![[0.0, 1.0], [0.75, 0.25]], 1e-15);

        let q = PriorVector::uniform(2);
        let l = row_stochastic_step(&array![[1.0, 0.0], [0.0, 1.0]], &q).unwrap();
        assert_eq!(l.view(), array![[1.0, 0.0], [0.0, 1.0]]);

        for c in [1e-3, 0.5, 7.0] {
            let q = PriorVector::new(vec![c, c]).unwrap();
            let l = row_stochastic_step(&array![[0.5, 0.5], [0.5, 0.5]], &q).unwrap();
            assert_matrix_eq(&l.view(), &array![[0.5, 0.5], [0.5, 0.5]], 1e-15);
        }
    }

    #[test]
    fn row_step_reports_degenerate_row() {
        let q = PriorVector::new(vec![0.0, 1.0]).unwrap();
        let err = row_stochastic_step(&array![[0.0, 1.0], [1.0, 0.0]], &q).unwrap_err();
        assert!(matches!(err, Error::DegenerateRow { row: 1 }));
    }

    #[test]
    fn iteration_examples() {
        let q = PriorVector::new(vec![0.5, 0.5]).unwrap();
        let l = an_iteration(&aug(array![[0.0, 1.0], [0.5, 0.5]]), 1.0, &q).unwrap();
        assert_matrix_eq(&l.view(), &array![[0.0, 1.0], [0.75, 0.25]], 1e-15);

        let l = an_iteration(&aug(array![[1.0, 0.0], [0.0, 1.0]]), 1.0, &PriorVector::uniform(2)).unwrap();
        assert_eq!(l.view(), array![[1.0, 0.0], [0.0, 1.0]]);

        // Column sums 1.4 and 0.6: the source row is pulled toward class 1.
        let l = an_iteration(&aug(array![[0.9, 0.1], [0.5, 0.5]]), 1.0, &PriorVector::uniform(2)).unwrap();
        assert!(l.working_row()[1] > 0.5);
        assert_abs_diff_eq!(l.working_row()[1], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn readjust_worked_examples() {
        let q = PriorVector::new(vec![0.5, 0.5]).unwrap();
        let hp = CanHyperParams::new(1.0, 1, 0.5).unwrap();
        let a0 = ReferenceMatrix::from_rows(&[[0.0, 1.0]]).unwrap();
        let b1 = readjust(&pv(&[0.5, 0.5]), &a0, &q, &hp).unwrap();
        assert_abs_diff_eq!(b1.as_slice()[0], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(b1.as_slice()[1], 0.25, epsilon = 1e-12);

        let b1 = readjust(&pv(&[1.0, 0.0]), &a0, &q, &hp).unwrap();
        assert_eq!(b1.argmax(), 0);

        let sym = ReferenceMatrix::from_rows(&[[0.5, 0.5]]).unwrap();
        for (alpha, depth) in [(0.3, 1), (1.0, 4), (9.0, 2)] {
            let hp = CanHyperParams::new(alpha, depth, 0.5).unwrap();
            let b = readjust(&pv(&[0.5, 0.5]), &sym, &q, &hp).unwrap();
            assert_eq!(b.as_slice(), &[0.5, 0.5]);
        }
    }

    #[test]
    fn readjust_rejects_prior_mismatch() {
        let a0 = ReferenceMatrix::from_rows(&[[0.0, 1.0]]).unwrap();
        let hp = CanHyperParams::new(1.0, 1, 0.5).unwrap();
        let err = readjust(&pv(&[0.5, 0.5]), &a0, &PriorVector::uniform(3), &hp).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn readjust_reports_annihilated_source() {
        let a0 = ReferenceMatrix::from_rows(&[[0.5, 0.5]]).unwrap();
        let q = PriorVector::new(vec![0.0, 1.0]).unwrap();
        let hp = CanHyperParams::new(1.0, 1, 0.5).unwrap();
        let err = readjust(&pv(&[1.0, 0.0]), &a0, &q, &hp).unwrap_err();
        assert!(matches!(err, Error::DegenerateRow { row: 1 }));
    }

    #[test]
    fn scalar_oracle_examples() {
        let q = PriorVector::uniform(2);
        let a0 = ReferenceMatrix::from_rows(&[[0.0, 1.0]]).unwrap();
        let hp = CanHyperParams::new(1.0, 1, 0.5).unwrap();
        let b = readjust_scalar_oracle(&pv(&[0.5, 0.5]), &a0, &q, &hp).unwrap();
        assert_abs_diff_eq!(b.as_slice()[0], 0.75, epsilon = 1e-12);

        let sym = ReferenceMatrix::from_rows(&[[0.5, 0.5]]).unwrap();
        let b = readjust_scalar_oracle(&pv(&[0.5, 0.5]), &sym, &q, &hp).unwrap();
        assert_eq!(b.as_slice(), &[0.5, 0.5]);

        // With alpha = 1 the 2x2 scaling keeps the cross ratio 0.9*0.5 / (0.1*0.5) = 9,
        // so the limit is [[3/4, 1/4], [1/4, 3/4]] rather than a permutation matrix.
        let a0 = ReferenceMatrix::from_rows(&[[0.9, 0.1]]).unwrap();
        let hp = CanHyperParams::new(1.0, 200, 0.5).unwrap();
        let b = readjust_scalar_oracle(&pv(&[0.5, 0.5]), &a0, &q, &hp).unwrap();
        assert_abs_diff_eq!(b.as_slice()[0], 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(b.as_slice()[1], 0.75, epsilon = 1e-9);

        // Any alpha > 1 sharpens toward a vertex.
        let hp = CanHyperParams::new(2.0, 200, 0.5).unwrap();
        let b = readjust_scalar_oracle(&pv(&[0.5, 0.5]), &a0, &q, &hp).unwrap();
        assert_abs_diff_eq!(b.as_slice()[1], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn batch_matches_single() {
        let a0 = ReferenceMatrix::from_rows(&[[0.7, 0.2, 0.1], [0.1, 0.1, 0.8]]).unwrap();
        let q = PriorVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let hp = CanHyperParams::new(2.0, 3, 0.5).unwrap();
        let sources = vec![pv(&[0.4, 0.4, 0.2]), pv(&[0.3, 0.3, 0.4])];
        let batch = readjust_batch(&sources, &a0, &q, &hp).unwrap();
        for (b0, b1) in sources.iter().zip(&batch) {
            assert_eq!(&readjust(b0, &a0, &q, &hp).unwrap(), b1);
        }
    }
}
