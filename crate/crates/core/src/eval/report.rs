use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::ExperimentReport;
use crate::error::{Error, Result};

/// Per-algorithm medians over a batch of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub runs: usize,
    pub failures: usize,
    pub median_accuracy: Option<f64>,
    pub median_compactness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_informative_found: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_noise_selected: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSet {
    pub reports: Vec<ExperimentReport>,
    pub summary: Vec<AlgorithmSummary>,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    })
}

impl ReportSet {
    pub fn new(reports: Vec<ExperimentReport>) -> Self {
        let mut names: Vec<&str> = Vec::new();
        for r in &reports {
            for row in &r.rows {
                if !names.contains(&row.algorithm.as_str()) {
                    names.push(&row.algorithm);
                }
            }
        }
        let summary = names
            .iter()
            .map(|&name| {
                let rows: Vec<_> = reports.iter().filter_map(|r| r.row(name)).collect();
                let ok: Vec<_> = rows.iter().filter(|r| r.error.is_none()).collect();
                let acc: Vec<f64> = ok.iter().filter_map(|r| r.accuracy.as_ref().map(|a| a.mean)).collect();
                let size: Vec<f64> = ok.iter().map(|r| r.compactness as f64).collect();
                let rec: Vec<_> = ok.iter().filter_map(|r| r.recovery).collect();
                let found: Vec<f64> = rec.iter().map(|r| r.informative_found as f64).collect();
                let noise: Vec<f64> = rec.iter().map(|r| r.noise_selected as f64).collect();
                AlgorithmSummary {
                    algorithm: name.to_string(),
                    runs: rows.len(),
                    failures: rows.len() - ok.len(),
                    median_accuracy: median(&acc),
                    median_compactness: median(&size),
                    median_informative_found: median(&found),
                    median_noise_selected: median(&noise),
                }
            })
            .collect();
        Self { reports, summary }
    }
}

/// Either report shape written by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportFile {
    Set(ReportSet),
    Single(Box<ExperimentReport>),
}

impl ReportFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn reports(&self) -> Vec<&ExperimentReport> {
        match self {
            Self::Set(s) => s.reports.iter().collect(),
            Self::Single(r) => vec![r],
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    run: usize,
    algorithm: &'a str,
    groups: String,
    n_groups: usize,
    n_features: usize,
    compactness: usize,
    accuracy_mean: Option<f64>,
    accuracy_std: Option<f64>,
    seconds: f64,
    error: Option<&'a str>,
}

/// One line per (run, algorithm): accuracy and compactness against the
/// group count, ready for plotting.
pub fn report_csv(file: &ReportFile) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (run, r) in file.reports().into_iter().enumerate() {
        for row in &r.rows {
            w.serialize(CsvRow {
                run,
                algorithm: &row.algorithm,
                groups: r.config.groups.to_string(),
                n_groups: r.n_groups,
                n_features: r.n_features,
                compactness: row.compactness,
                accuracy_mean: row.accuracy.as_ref().map(|a| a.mean),
                accuracy_std: row.accuracy.as_ref().map(|a| a.std),
                seconds: row.seconds,
                error: row.error.as_deref(),
            })
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
