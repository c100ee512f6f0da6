use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ClassifyError;
use crate::label::{Label, NUM_CLASSES};

/// Tolerance on row sums of a valid score matrix.
pub const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub id: String,
    /// Ground-truth label of the sample.
    pub label: Label,
    pub scores: [f64; NUM_CLASSES],
}

/// Per-sample class scores; every row lies in `[0, 1]` and sums to one.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreMatrix {
    pub rows: Vec<ScoreRow>,
}

impl ScoreMatrix {
    pub fn new(rows: Vec<ScoreRow>) -> Result<Self, ClassifyError> {
        let m = ScoreMatrix { rows };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        for r in &self.rows {
            let in_range = r.scores.iter().all(|s| s.is_finite() && (0.0..=1.0).contains(s));
            let sum: f64 = r.scores.iter().sum();
            if !in_range || (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(ClassifyError::InvalidScores {
                    id: r.id.clone(),
                    detail: format!("row sum {sum}, scores {:?}", r.scores),
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn truth(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn column(&self, class: Label) -> Vec<f64> {
        self.rows.iter().map(|r| r.scores[class.index()]).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,label");
        for c in 0..NUM_CLASSES {
            write!(out, ",s{c}").expect("write to string");
        }
        out.push('\n');
        for r in &self.rows {
            write!(out, "{},{}", r.id, r.label).expect("write to string");
            for s in &r.scores {
                write!(out, ",{s:.16e}").expect("write to string");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self, ClassifyError> {
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend((0..NUM_CLASSES).map(|c| format!("s{c}")));
        let rows = parse_rows(text, path, &header)?
            .into_iter()
            .map(|(line, fields)| {
                let label = parse_label(fields[1], path, line)?;
                let mut scores = [0.0; NUM_CLASSES];
                for (s, f) in scores.iter_mut().zip(&fields[2..]) {
                    *s = f.parse().map_err(|_| ClassifyError::Parse {
                        path: path.to_path_buf(),
                        line,
                        message: format!("bad score {f:?}"),
                    })?;
                }
                Ok(ScoreRow {
                    id: fields[0].to_string(),
                    label,
                    scores,
                })
            })
            .collect::<Result<_, ClassifyError>>()?;
        ScoreMatrix::new(rows)
    }
}

/// Argmax per row; exact ties go to the lowest class index.
pub fn predict_labels(scores: &ScoreMatrix) -> Vec<Label> {
    scores.rows.iter().map(|r| argmax(&r.scores)).collect()
}

pub(crate) fn argmax(scores: &[f64; NUM_CLASSES]) -> Label {
    let mut best = 0;
    for (c, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = c;
        }
    }
    Label::from_index(best)
}

/// Scores plus the model's hard decisions.
///
/// For most models the decision is the row argmax. KNN resolves equal vote
/// counts by neighbour distance, which the score row alone cannot express.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub scores: ScoreMatrix,
    pub labels: Vec<Label>,
}

impl Predictions {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,label,pred\n");
        for (r, p) in self.scores.rows.iter().zip(&self.labels) {
            writeln!(out, "{},{},{}", r.id, r.label, p).expect("write to string");
        }
        out
    }
}

/// One decision row: sample id, true label, predicted label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub id: String,
    pub label: Label,
    pub pred: Label,
}

pub fn parse_decisions(text: &str, path: &Path) -> Result<Vec<Decision>, ClassifyError> {
    let header = ["id", "label", "pred"].map(String::from);
    parse_rows(text, path, &header)?
        .into_iter()
        .map(|(line, f)| {
            Ok(Decision {
                id: f[0].to_string(),
                label: parse_label(f[1], path, line)?,
                pred: parse_label(f[2], path, line)?,
            })
        })
        .collect()
}

fn parse_label(text: &str, path: &Path, line: usize) -> Result<Label, ClassifyError> {
    text.parse::<Label>().map_err(|e| ClassifyError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    })
}

fn parse_rows<'a>(text: &'a str, path: &Path, header: &[String]) -> Result<Vec<(usize, Vec<&'a str>)>, ClassifyError> {
    let err = |line: usize, message: String| ClassifyError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    if first.split(',').map(str::trim).ne(header.iter().map(String::as_str)) {
        return Err(err(1, format!("expected header {:?}", header.join(","))));
    }
    lines
        .map(|(line, l)| {
            let fields: Vec<&str> = l.split(',').map(str::trim).collect();
            if fields.len() != header.len() {
                return Err(err(line, format!("expected {} fields, found {}", header.len(), fields.len())));
            }
            Ok((line, fields))
        })
        .collect()
}

pub fn write_scores(scores: &ScoreMatrix, path: impl AsRef<Path>) -> Result<(), ClassifyError> {
    write_text(path.as_ref(), &scores.to_csv())
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<ScoreMatrix, ClassifyError> {
    let path = path.as_ref();
    ScoreMatrix::from_csv(&read_text(path)?, path)
}

pub fn write_predictions(pred: &Predictions, path: impl AsRef<Path>) -> Result<(), ClassifyError> {
    write_text(path.as_ref(), &pred.to_csv())
}

pub fn read_decisions(path: impl AsRef<Path>) -> Result<Vec<Decision>, ClassifyError> {
    let path = path.as_ref();
    parse_decisions(&read_text(path)?, path)
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), ClassifyError> {
    fs::write(path, text).map_err(|source| ClassifyError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn read_text(path: &Path) -> Result<String, ClassifyError> {
    fs::read_to_string(path).map_err(|source| ClassifyError::Io {
        path: path.to_path_buf(),
        source,
    })
}
