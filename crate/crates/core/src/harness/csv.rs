//! Evaluation-curve CSV files.
//!
//! Header `step,mean_eval_score,max_episode_score,epsilon,mean_phi,mean_step_norm`,
//! one row per record in ascending step order. Floats are written in
//! scientific notation with 17 significant digits, which round-trips every
//! `f64` exactly; a missing `mean_phi`/`mean_step_norm` is written as `NaN`.

use std::fmt::Write as _;
use std::path::Path;

use super::train::{EvalRecord, RunLog};
use crate::error::{Error, Result};

pub const HEADER: &str = "step,mean_eval_score,max_episode_score,epsilon,mean_phi,mean_step_norm";

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv_string(records: &[EvalRecord]) -> String {
    let mut sorted: Vec<&EvalRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.step);
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in sorted {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.step,
            float(r.mean_eval_score),
            float(r.max_episode_score),
            float(r.epsilon),
            float(r.mean_phi.unwrap_or(f64::NAN)),
            float(r.mean_step_norm.unwrap_or(f64::NAN)),
        );
    }
    out
}

pub fn emit_csv(log: &RunLog, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_csv_string(&log.records)).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<EvalRecord>> {
    let bad = |line: usize, msg: &str| Error::Config(format!("csv line {line}: {msg}"));
    let mut lines = text.lines();
    if lines.next() != Some(HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad(i + 2, "expected 6 fields"));
        }
        let f = |k: usize| -> Result<f64> { fields[k].parse().map_err(|_| bad(i + 2, "bad number")) };
        let optional = |v: f64| if v.is_nan() { None } else { Some(v) };
        records.push(EvalRecord {
            step: fields[0].parse().map_err(|_| bad(i + 2, "bad step"))?,
            mean_eval_score: f(1)?,
            max_episode_score: f(2)?,
            epsilon: f(3)?,
            mean_phi: optional(f(4)?),
            mean_step_norm: optional(f(5)?),
        });
    }
    Ok(records)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<EvalRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}
