//! Multi-label scores as independent binary pairs: reduction, re-adjustment
//! of the ambiguous pairs against confident ones, and loose F1.

use std::collections::BTreeSet;

use can_core::metrics::loose_f1;
use can_core::multilabel::{decide_labels, from_binary_pairs, to_binary_pairs, MultilabelMatrix};
use can_core::pipeline::{CanModel, PredictionFile, TaskMode};
use can_core::{CanHyperParams, PriorVector};

fn file(ids: &[&str], rows: &[[f64; 3]]) -> PredictionFile {
    PredictionFile {
        class_names: vec!["person".into(), "place".into(), "org".into()],
        ids: ids.iter().map(|s| s.to_string()).collect(),
        scores: rows.iter().map(|r| r.to_vec()).collect(),
        mode: TaskMode::Multi,
    }
}

fn main() -> can_core::Result<()> {
    let scores = MultilabelMatrix::from_rows(&[[0.2, 0.7, 0.1]])?;
    let pairs = to_binary_pairs(&scores);
    println!("pairs of [0.2, 0.7, 0.1]: {:?}", pairs.rows());
    assert_eq!(from_binary_pairs(&pairs, 1, 3)?, scores);

    let val = file(
        &["v1", "v2", "v3", "v4"],
        &[
            [0.97, 0.02, 0.03],
            [0.01, 0.95, 0.04],
            [0.98, 0.03, 0.96],
            [0.02, 0.01, 0.97],
        ],
    );
    let test = file(&["t1", "t2"], &[[0.62, 0.03, 0.45], [0.04, 0.55, 0.02]]);
    let gold: Vec<BTreeSet<usize>> = vec![BTreeSet::from([0, 2]), BTreeSet::from([1])];

    // Per-class positive rates from training data.
    let rates = PriorVector::new(vec![0.5, 0.3, 0.4])?;
    let model = CanModel::fit(&val, &rates, CanHyperParams::new(1.0, 2, 0.5)?)?;
    println!("reference pairs: {}", model.reference().nrows());

    let adjusted = model.adjust(&test)?;
    for unit in adjusted.units.iter().filter(|u| u.challenging) {
        let j = unit.class.expect("multi-label units carry a class");
        println!(
            "{} / {}: {:.3} -> {:.3}",
            test.ids[unit.example],
            test.class_names[j],
            test.scores[unit.example][j],
            adjusted.file.scores[unit.example][j]
        );
    }

    for (name, rows) in [("baseline", &test.scores), ("adjusted", &adjusted.file.scores)] {
        let pred = decide_labels(&MultilabelMatrix::from_rows(rows)?);
        let f1 = loose_f1(&pred, &gold)?;
        println!(
            "{name}: labels {pred:?}, macro F1 {:.3}, micro F1 {:.3}",
            f1.macro_f1, f1.micro_f1
        );
    }
    Ok(())
}
