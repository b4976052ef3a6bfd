//! CSV readers and writers for scores, p-values and step functions.
//!
//! Score files have a single `score` column. P-value files have columns
//! `index,p_value` (0-based). Step functions are written as `t,value` rows,
//! one per jump.

use crate::conformal::PValueVector;
use crate::empirical::StepFunction;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Deserialize)]
struct ScoreRow {
    score: f64,
}

#[derive(Serialize)]
struct PValueRow {
    index: usize,
    p_value: f64,
}

#[derive(Serialize)]
struct StepRow {
    t: f64,
    value: f64,
}

/// Reads the `score` column. Non-finite scores are rejected with their line.
pub fn read_scores(path: &Path) -> Result<Vec<f64>> {
    let mut rdr =
        csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    if !headers.iter().any(|h| h == "score") {
        return Err(Error::Parse(format!(
            "{}: missing `score` column",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<ScoreRow>().enumerate() {
        let row = row.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if !row.score.is_finite() {
            return Err(Error::Parse(format!(
                "{}: line {}: score {} is not finite",
                path.display(),
                i + 2,
                row.score
            )));
        }
        out.push(row.score);
    }
    Ok(out)
}

pub fn write_scores(path: &Path, scores: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["score"])?;
    for s in scores {
        w.write_record([s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pvalues(path: &Path, p: &PValueVector) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (index, &p_value) in p.values.iter().enumerate() {
        w.serialize(PValueRow { index, p_value })?;
    }
    if p.values.is_empty() {
        w.write_record(["index", "p_value"])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `index,p_value` rows, ordered by index.
pub fn read_pvalues(path: &Path) -> Result<Vec<f64>> {
    #[derive(Deserialize)]
    struct Row {
        index: usize,
        p_value: f64,
    }
    let mut rdr =
        csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    rows.sort_by_key(|r| r.index);
    Ok(rows.into_iter().map(|r| r.p_value).collect())
}

pub fn write_step_function(path: &Path, f: &StepFunction) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (&t, &value) in f.jumps().iter().zip(f.values()) {
        w.serialize(StepRow { t, value })?;
    }
    if f.jumps().is_empty() {
        w.write_record(["t", "value"])?;
    }
    w.flush()?;
    Ok(())
}
