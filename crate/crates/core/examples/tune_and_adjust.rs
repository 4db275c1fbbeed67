//! Grid search on validation predictions, then re-adjust test predictions
//! with the selected hyperparameters. Reads the bundled planted fixture.

use std::path::Path;

use can_core::metrics::top1_accuracy;
use can_core::pipeline::{
    compute_priors, grid_search, CanModel, HyperGrid, LabelFile, Objective, PredictionFile, TaskMode,
};

fn main() -> can_core::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/planted");
    let mode = TaskMode::Single;
    let val = PredictionFile::load(&dir.join("val_preds.csv"), mode)?;
    let test = PredictionFile::load(&dir.join("test_preds.csv"), mode)?;
    let val_gold = LabelFile::load(&dir.join("val_labels.csv"), &val.class_names, mode)?.aligned_to(&val.ids)?;
    let test_gold = LabelFile::load(&dir.join("test_labels.csv"), &test.class_names, mode)?.aligned_to(&test.ids)?;
    let priors = compute_priors(&dir.join("train_labels.csv"), &val.class_names, mode, 0.0)?;

    let grid = HyperGrid::parse("0.5,1,2", "1:3", "0.25,0.5,0.75")?;
    let result = grid_search(&val, &val_gold, &priors, &grid, Objective::Top1)?;
    for row in result.table.iter().filter(|r| r.hp.tau == 0.5) {
        println!(
            "alpha {:>3} depth {} tau {}: top-1 {:.3} ({} challenging)",
            row.hp.alpha, row.hp.depth, row.hp.tau, row.objective, row.challenging
        );
    }
    let best = result.best;
    println!("selected alpha {} depth {} tau {}", best.alpha, best.depth, best.tau);

    let model = CanModel::fit(&val, &priors, best)?;
    let adjusted = model.adjust(&test)?;
    let gold: Vec<usize> = test_gold.iter().map(|g| *g.first().expect("single label")).collect();
    println!(
        "test top-1: {:.3} -> {:.3}, accuracy gain on challenging rows {:.3}",
        top1_accuracy(&test.scores, &gold)?,
        top1_accuracy(&adjusted.file.scores, &gold)?,
        adjusted.gain.accuracy_gain
    );
    Ok(())
}
