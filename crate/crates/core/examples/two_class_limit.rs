//! Long-run behaviour on a 2x2 working matrix: one reference row `[pA, 1 - pA]`
//! and one source row `[p, 1 - p]` under a uniform prior.
//!
//! With `alpha = 1` the iteration is plain matrix balancing. It keeps the cross
//! ratio `pA (1 - p) / ((1 - pA) p)` fixed and settles on a positive doubly
//! stochastic matrix. With `alpha > 1` each pass sharpens the rows and the source
//! moves to a vertex.

use can_core::{readjust, CanHyperParams, PriorVector, ProbabilityVector, ReferenceMatrix};

/// Source row of the doubly stochastic limit at `alpha = 1`.
fn balanced_limit(pa: f64, p: f64) -> [f64; 2] {
    let cross = pa * (1.0 - p) / ((1.0 - pa) * p);
    // [[x, 1 - x], [1 - x, x]] with x^2 / (1 - x)^2 = cross.
    let x = cross.sqrt() / (1.0 + cross.sqrt());
    [1.0 - x, x]
}

fn main() -> can_core::Result<()> {
    let q = PriorVector::uniform(2);
    for (pa, p) in [(0.9, 0.5), (0.7, 0.4), (0.3, 0.6)] {
        let a0 = ReferenceMatrix::from_rows(&[[pa, 1.0 - pa]])?;
        let b0 = ProbabilityVector::new(vec![p, 1.0 - p])?;
        println!("pA = {pa}, p = {p}");
        for alpha in [1.0, 2.0] {
            for depth in [1, 10, 100, 500] {
                let b = readjust(&b0, &a0, &q, &CanHyperParams::new(alpha, depth, 0.5)?)?;
                println!(
                    "  alpha {alpha} depth {depth:>3}: [{:.6}, {:.6}]",
                    b.as_slice()[0],
                    b.as_slice()[1]
                );
            }
        }
        let limit = balanced_limit(pa, p);
        println!("  balanced limit: [{:.6}, {:.6}]", limit[0], limit[1]);
    }
    Ok(())
}
