//! Writes the planted three-class fixture and checks that a full grid search
//! recovers the combination it was built for.
//!
//! ```text
//! cargo run --release --example make_fixture -- crates/core/tests/fixtures/planted
//! ```

use std::path::PathBuf;

use can_core::pipeline::fixture::planted_fixture;
use can_core::pipeline::{class_priors, grid_search, HyperGrid, Objective, TaskMode};

const SEED: u64 = 20;

fn main() -> can_core::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("planted_fixture"));
    let fixture = planted_fixture(SEED)?;
    fixture.write(&dir)?;
    println!(
        "wrote {} validation and {} test rows to {}",
        fixture.val.len(),
        fixture.test.len(),
        dir.display()
    );

    let priors = class_priors(&fixture.train_labels.labels, 3, TaskMode::Single, 0.0)?;
    let result = grid_search(
        &fixture.val,
        &fixture.val_labels.labels,
        &priors,
        &HyperGrid::default(),
        Objective::MacroF1,
    )?;
    let best = result.best;
    println!(
        "grid search over {} combinations: alpha={} depth={} tau={} (macro F1 {:.3})",
        result.table.len(),
        best.alpha,
        best.depth,
        best.tau,
        result.best_objective
    );
    let p = fixture.planted;
    println!("planted: alpha={} depth={} tau={}", p.alpha, p.depth, p.tau);
    Ok(())
}
