//! Output files: predictions and scores CSV, report JSON, tables.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use pmac::allencahn::ScoreMatrix;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::pipeline::Timings;

/// Summary of one classification run. Predictions and scores go to their own files.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: u64,
    pub nodes: usize,
    pub classes: usize,
    pub layers: usize,
    pub labeled: usize,
    pub p: f64,
    pub k: usize,
    pub eigenvalues: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub accuracy: Option<f64>,
    pub accuracy_unlabeled: Option<f64>,
    pub misclassification: Option<f64>,
    pub timings: Timings,
    pub outputs: Vec<PathBuf>,
    pub config: RunConfig,
    #[serde(skip)]
    pub predictions: Vec<usize>,
    #[serde(skip)]
    pub scores: Option<ScoreMatrix>,
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::io("writing output", format!("{}: {e}", dir.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| CliError::io("writing output", format!("{}: {e}", path.display())))
}

/// `node_id,class_id` with 0-based nodes and 1-based classes.
pub fn predictions_csv(pred: &[usize]) -> String {
    let mut s = String::with_capacity(pred.len() * 8 + 16);
    s.push_str("node_id,class_id\n");
    for (i, c) in pred.iter().enumerate() {
        s.push_str(&format!("{i},{}\n", c + 1));
    }
    s
}

/// Rows of comma-separated values in shortest round-trip form.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    write_text(path, &(text + "\n"))
}

/// Writes predictions, scores and report JSON into `dir`; returns the report with the file list filled in.
pub fn write_run(dir: &Path, mut report: RunReport) -> CliResult<RunReport> {
    ensure_dir(dir)?;
    let pred = dir.join("predictions.csv");
    write_text(&pred, &predictions_csv(&report.predictions))?;
    report.outputs.insert(0, pred);
    if let Some(scores) = &report.scores {
        let path = dir.join("scores.csv");
        write_text(&path, &matrix_csv(&scores.0))?;
        report.outputs.insert(1, path);
    }
    let json = dir.join("report.json");
    report.outputs.push(json.clone());
    write_json(&json, &report)?;
    Ok(report)
}

/// Columns padded to a common width.
pub fn aligned_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut s = line(header.to_vec());
    for r in rows {
        s += &line(r.iter().map(String::as_str).collect());
    }
    s
}

pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",") + "\n";
    for r in rows {
        s += &(r.join(",") + "\n");
    }
    s
}
