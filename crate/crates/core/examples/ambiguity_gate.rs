//! Top-k entropy and the gate that decides which predictions get re-adjusted.

use can_core::ambiguity::{entropy_base_m, top_k_entropy};
use can_core::{ambiguity_score, partition_validation, AmbiguityConfig, ProbabilityVector};

fn main() -> can_core::Result<()> {
    let spread = ProbabilityVector::new(vec![0.5, 0.25, 0.25])?;
    let split = ProbabilityVector::new(vec![0.5, 0.5, 0.0])?;

    println!(
        "full entropy:  {:.5} vs {:.5}",
        entropy_base_m(spread.as_slice(), 3)?,
        entropy_base_m(split.as_slice(), 3)?
    );
    println!(
        "top-2 entropy: {:.5} vs {:.5}",
        top_k_entropy(&spread, 2, 3)?,
        top_k_entropy(&split, 2, 3)?
    );

    let gate = AmbiguityConfig::new(0.5)?;
    for v in [&spread, &split] {
        println!("score {:?} = {:.5}", v.as_slice(), ambiguity_score(v, &gate)?);
    }
    let pairwise = AmbiguityConfig::new(0.5)?.with_k_max(2)?;
    println!("with k_max = 2 both score {:.5}", ambiguity_score(&spread, &pairwise)?);

    let preds: Vec<ProbabilityVector> = [
        vec![0.96, 0.02, 0.02],
        vec![0.4, 0.35, 0.25],
        vec![0.02, 0.9, 0.08],
        vec![0.5, 0.5, 0.0],
        vec![0.1, 0.1, 0.8],
    ]
    .into_iter()
    .map(ProbabilityVector::new)
    .collect::<Result<_, _>>()?;
    for tau in [0.25, 0.5, 0.75] {
        let part = partition_validation(&preds, &AmbiguityConfig::new(tau)?)?;
        println!(
            "tau {tau}: challenging {:?}, reference rows {}",
            part.challenging,
            part.reference.nrows()
        );
    }
    Ok(())
}
