//! Prediction and label files.
//!
//! Predictions: header `id,<class_1>,...,<class_m>`, one row of scores per
//! example. Labels: header `id,label`, with `;` separating labels in
//! multi-label mode. Scores are written in shortest round-trip decimal form,
//! so loading a written file reproduces every value bit for bit.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::multilabel::MultilabelMatrix;
use crate::types::ProbabilityVector;

/// Tolerance on single-label row sums; rows within it are renormalized on load.
pub const LOAD_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TaskMode {
    /// Rows are distributions over mutually exclusive classes.
    Single,
    /// Each score is an independent per-class probability.
    Multi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionFile {
    pub class_names: Vec<String>,
    pub ids: Vec<String>,
    pub scores: Vec<Vec<f64>>,
    pub mode: TaskMode,
}

impl PredictionFile {
    pub fn load(path: &Path, mode: TaskMode) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, path, mode)
    }

    /// Parses CSV from `reader`; `source` only labels error messages.
    pub fn from_reader<R: Read>(reader: R, source: &Path, mode: TaskMode) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let parse_err = |line: u64, message: String| Error::Parse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        if header.get(0).map(str::trim) != Some("id") {
            return Err(parse_err(1, "first header column must be `id`".into()));
        }
        let class_names: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
        if class_names.is_empty() {
            return Err(parse_err(1, "header names no classes".into()));
        }
        check_unique(&class_names).map_err(|dup| parse_err(1, format!("duplicate class `{dup}`")))?;

        let mut ids = Vec::new();
        let mut scores = Vec::new();
        let mut seen = HashSet::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != class_names.len() + 1 {
                return Err(parse_err(
                    line,
                    format!("expected {} fields, found {}", class_names.len() + 1, record.len()),
                ));
            }
            let id = record[0].trim().to_string();
            if !seen.insert(id.clone()) {
                return Err(Error::Constraint {
                    id,
                    message: "duplicate id".into(),
                });
            }
            let row = record
                .iter()
                .skip(1)
                .map(|field| {
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| parse_err(line, format!("bad score `{field}`: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            let row = validate_row(row, mode).map_err(|message| Error::Constraint {
                id: id.clone(),
                message,
            })?;
            ids.push(id);
            scores.push(row);
        }
        if ids.is_empty() {
            return Err(parse_err(1, "no prediction records".into()));
        }
        Ok(Self {
            class_names,
            ids,
            scores,
            mode,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Rows as distributions; meaningful in single-label mode.
    pub fn distributions(&self) -> Vec<ProbabilityVector> {
        self.scores
            .iter()
            .map(|r| ProbabilityVector::from_raw(r.clone()))
            .collect()
    }

    pub fn multilabel(&self) -> Result<MultilabelMatrix> {
        MultilabelMatrix::from_rows(&self.scores)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_writer(file)
    }

    pub fn to_writer<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string()];
        header.extend(self.class_names.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in self.ids.iter().zip(&self.scores) {
            let mut record = Vec::with_capacity(row.len() + 1);
            record.push(id.clone());
            record.extend(row.iter().map(|v| format_score(*v)));
            w.write_record(&record)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Shortest decimal string that parses back to exactly `v`.
pub fn format_score(v: f64) -> String {
    format!("{v:?}")
}

fn validate_row(mut row: Vec<f64>, mode: TaskMode) -> std::result::Result<Vec<f64>, String> {
    if let Some(v) = row.iter().find(|v| !v.is_finite()) {
        return Err(format!("non-finite score {v}"));
    }
    match mode {
        TaskMode::Single => {
            if let Some(v) = row.iter().find(|v| **v < 0.0) {
                return Err(format!("negative score {v}"));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > LOAD_SUM_TOLERANCE {
                return Err(format!("scores sum to {total}, expected 1"));
            }
            if total != 1.0 {
                row.iter_mut().for_each(|v| *v /= total);
            }
        }
        TaskMode::Multi => {
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(format!("score {v} outside [0, 1]"));
            }
        }
    }
    Ok(row)
}

fn check_unique(names: &[String]) -> std::result::Result<(), String> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n.as_str()) {
            return Err(n.clone());
        }
    }
    Ok(())
}

/// Gold or training labels keyed by example id.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelFile {
    pub ids: Vec<String>,
    pub labels: Vec<BTreeSet<usize>>,
}

impl LabelFile {
    pub fn load(path: &Path, class_names: &[String], mode: TaskMode) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, path, class_names, mode)
    }

    pub fn from_reader<R: Read>(reader: R, source: &Path, class_names: &[String], mode: TaskMode) -> Result<Self> {
        let index: HashMap<&str, usize> = class_names.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let parse_err = |line: u64, message: String| Error::Parse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
        if header.len() != 2 || header[0].trim() != "id" || header[1].trim() != "label" {
            return Err(parse_err(1, "label header must be `id,label`".into()));
        }
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        let mut unknown = BTreeSet::new();
        let mut seen = HashSet::new();
        for record in rdr.records() {
            let record = record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 2 {
                return Err(parse_err(line, format!("expected 2 fields, found {}", record.len())));
            }
            let id = record[0].trim().to_string();
            if !seen.insert(id.clone()) {
                return Err(Error::Constraint {
                    id,
                    message: "duplicate id".into(),
                });
            }
            let names: Vec<&str> = record[1].split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
            if mode == TaskMode::Single && names.len() != 1 {
                return Err(Error::Constraint {
                    id,
                    message: format!("single-label mode needs exactly one label, found {}", names.len()),
                });
            }
            let mut set = BTreeSet::new();
            for name in names {
                match index.get(name) {
                    Some(&j) => {
                        set.insert(j);
                    }
                    None => {
                        unknown.insert(name.to_string());
                    }
                }
            }
            ids.push(id);
            labels.push(set);
        }
        if !unknown.is_empty() {
            let list: Vec<String> = unknown.into_iter().collect();
            return Err(Error::invalid(format!(
                "{}: labels not among the prediction classes: {}",
                source.display(),
                list.join(", ")
            )));
        }
        Ok(Self { ids, labels })
    }

    pub fn write(&self, path: &Path, class_names: &[String]) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_writer(file, class_names)
    }

    /// Writes `id,label` rows, joining multiple labels with `;`.
    pub fn to_writer<W: Write>(&self, out: W, class_names: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["id", "label"])?;
        for (id, set) in self.ids.iter().zip(&self.labels) {
            let names: Vec<&str> = set.iter().map(|&j| class_names[j].as_str()).collect();
            w.write_record([id.as_str(), &names.join(";")])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Labels reordered to follow `ids`; every id must be present.
    pub fn aligned_to(&self, ids: &[String]) -> Result<Vec<BTreeSet<usize>>> {
        let lookup: HashMap<&str, usize> = self.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        ids.iter()
            .map(|id| {
                lookup
                    .get(id.as_str())
                    .map(|&i| self.labels[i].clone())
                    .ok_or_else(|| Error::Constraint {
                        id: id.clone(),
                        message: "no gold label for this id".into(),
                    })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, mode: TaskMode) -> Result<PredictionFile> {
        PredictionFile::from_reader(text.as_bytes(), Path::new("mem.csv"), mode)
    }

    #[test]
    fn loads_two_class_file() {
        let f = load("id,a,b\nx,0.25,0.75\ny,1,0\n", TaskMode::Single).unwrap();
        assert_eq!(f.class_names, vec!["a", "b"]);
        assert_eq!(f.ids, vec!["x", "y"]);
        assert_eq!(f.scores, vec![vec![0.25, 0.75], vec![1.0, 0.0]]);
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let f = load("id,a,b\nx,0.5000004,0.5\n", TaskMode::Single).unwrap();
        let total: f64 = f.scores[0].iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_single_row_with_id() {
        let err = load("id,a,b\nx,0.5,0.5\nbad,0.4,0.4\n", TaskMode::Single).unwrap_err();
        match err {
            Error::Constraint { id, .. } => assert_eq!(id, "bad"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_multilabel_out_of_range() {
        assert!(load("id,a,b\nx,1.3,0.2\n", TaskMode::Multi).is_err());
        assert!(load("id,a,b\nx,1.0,0.9\n", TaskMode::Multi).is_ok());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = load("id,a,b\nx,0.5,0.5\ny,0.5,oops\n", TaskMode::Single).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            load("name,a\nx,1\n", TaskMode::Single),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn write_then_load_is_exact() {
        let f = load(
            "id,a,b,c\nx,0.1,0.2,0.7\ny,0.333333333333333,0.333333333333333,0.333333333333334\n",
            TaskMode::Single,
        )
        .unwrap();
        let mut buf = Vec::new();
        f.to_writer(&mut buf).unwrap();
        let back = load(std::str::from_utf8(&buf).unwrap(), TaskMode::Single).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn labels_single_and_multi() {
        let classes: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let l = LabelFile::from_reader(
            "id,label\nx,b\ny,a\n".as_bytes(),
            Path::new("l"),
            &classes,
            TaskMode::Single,
        )
        .unwrap();
        assert_eq!(l.labels, vec![BTreeSet::from([1]), BTreeSet::from([0])]);
        let aligned = l.aligned_to(&["y".to_string(), "x".to_string()]).unwrap();
        assert_eq!(aligned, vec![BTreeSet::from([0]), BTreeSet::from([1])]);
        assert!(l.aligned_to(&["z".to_string()]).is_err());

        let l = LabelFile::from_reader(
            "id,label\nx,a;c\n".as_bytes(),
            Path::new("l"),
            &classes,
            TaskMode::Multi,
        )
        .unwrap();
        assert_eq!(l.labels, vec![BTreeSet::from([0, 2])]);

        let err = LabelFile::from_reader(
            "id,label\nx,a;zz\ny,qq\n".as_bytes(),
            Path::new("l"),
            &classes,
            TaskMode::Multi,
        )
        .unwrap_err();
        assert!(err.to_string().contains("qq, zz"));
    }
}
