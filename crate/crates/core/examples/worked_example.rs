//! The smallest re-adjustment: a two-class tie resolved by a one-row reference.
//!
//! The source prediction `[0.5, 0.5]` is stacked under the reference `[[0, 1]]`.
//! The column pass spends all of class 1's mass on the reference row, so the
//! row pass tilts the source toward class 0.

use can_core::an::{build_augmented, column_stochastic_step, row_stochastic_step};
use can_core::{readjust, readjust_scalar_oracle, CanHyperParams, PriorVector, ProbabilityVector, ReferenceMatrix};

fn main() -> can_core::Result<()> {
    let b0 = ProbabilityVector::new(vec![0.5, 0.5])?;
    let a0 = ReferenceMatrix::from_rows(&[[0.0, 1.0]])?;
    let q = PriorVector::uniform(2);
    let hp = CanHyperParams::new(1.0, 1, 0.5)?;

    let l0 = build_augmented(&b0, &a0)?;
    println!("L0 =\n{}", l0.view());
    let s = column_stochastic_step(&l0, hp.alpha);
    println!("after the column pass =\n{s}");
    let l1 = row_stochastic_step(&s, &q)?;
    println!("after the row pass =\n{}", l1.view());

    let b1 = readjust(&b0, &a0, &q, &hp)?;
    let oracle = readjust_scalar_oracle(&b0, &a0, &q, &hp)?;
    println!("b1 = {:?}", b1.as_slice());
    println!("scalar form = {:?}", oracle.as_slice());

    for depth in [2, 3, 5] {
        let b = readjust(&b0, &a0, &q, &CanHyperParams::new(1.0, depth, 0.5)?)?;
        println!("depth {depth}: {:?}", b.as_slice());
    }
    Ok(())
}
