use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, mean_std, CvOptions};
use super::synth::{planted_dataset, SynthConfig};
use crate::baselines::{alpha_investing_run, grafting_run, AlphaConfig, GraftingConfig};
use crate::data::{
    load_dataset, make_group_plan, normalize_features, stream_groups, DataFormat, Dataset, GroupPlan, GroupStrategy,
    LabelSpec,
};
use crate::error::{Error, Result};
use crate::ogfs::{ogfs_run, GroupTrace, OgfsConfig, SelectionResult, StopReason, Timings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DataSource {
    File {
        path: PathBuf,
        format: DataFormat,
        #[serde(default)]
        label: LabelSpec,
    },
    Synthetic(SynthConfig),
}

/// A group strategy, or `file:PATH` pointing at a saved plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GroupSpec {
    Strategy(GroupStrategy),
    File(PathBuf),
}

impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("file:") {
            Some(path) => Ok(Self::File(path.into())),
            None => s.parse().map(Self::Strategy),
        }
    }
}

impl TryFrom<String> for GroupSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GroupSpec> for String {
    fn from(g: GroupSpec) -> Self {
        g.to_string()
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Strategy(s) => write!(f, "{s}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

pub const KNOWN_ALGORITHMS: [&str; 4] = ["ogfs", "alpha", "grafting", "full"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub algorithms: Vec<String>,
    pub groups: GroupSpec,
    pub group_seed: u64,
    pub folds: usize,
    pub knn: usize,
    pub cv_seed: u64,
    pub normalize_per_fold: bool,
    /// Extra OGFS runs over this many random group orders.
    pub order_trials: usize,
    pub ogfs: OgfsConfig,
    pub alpha: AlphaConfig,
    pub grafting: GraftingConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSource::Synthetic(SynthConfig::default()),
            algorithms: vec!["ogfs".into(), "alpha".into(), "grafting".into()],
            groups: GroupSpec::Strategy(GroupStrategy::Natural),
            group_seed: 0,
            folds: 10,
            knn: 3,
            cv_seed: 0,
            normalize_per_fold: false,
            order_trials: 0,
            ogfs: OgfsConfig::default(),
            alpha: AlphaConfig::default(),
            grafting: GraftingConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidParameter(format!(
                "folds must be >= 2, got {}",
                self.folds
            )));
        }
        if self.knn == 0 || self.knn.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "k must be odd and >= 1, got {}",
                self.knn
            )));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter("no algorithms requested".into()));
        }
        if let DataSource::Synthetic(s) = &self.data {
            s.validate()?;
        }
        self.ogfs.validate()
    }

    fn cv_options(&self) -> CvOptions {
        CvOptions {
            folds: self.folds,
            k: self.knn,
            seed: self.cv_seed,
            normalize_per_fold: self.normalize_per_fold,
        }
    }
}

/// Normalized data and group plan shared by every algorithm in a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub dataset: Dataset,
    pub plan: GroupPlan,
    pub constant_features: Vec<usize>,
    pub informative: Option<Vec<usize>>,
    pub strongest: Option<usize>,
}

pub fn prepare_data(config: &ExperimentConfig) -> Result<PreparedData> {
    let (raw, natural, informative, strongest) = match &config.data {
        DataSource::File { path, format, label } => (load_dataset(path, *format, *label)?, None, None, None),
        DataSource::Synthetic(s) => {
            let p = planted_dataset(s)?;
            (p.dataset, Some(p.plan), Some(p.informative), Some(p.strongest))
        }
    };
    let (dataset, report) = normalize_features(&raw);
    if !report.constant_features.is_empty() {
        warn!("{} constant feature(s) zeroed", report.constant_features.len());
    }
    let plan = match &config.groups {
        GroupSpec::File(path) => GroupPlan::load(path)?,
        GroupSpec::Strategy(GroupStrategy::Natural) => natural.ok_or_else(|| {
            Error::InvalidPlan("this data source has no natural grouping; pass a strategy or a plan file".into())
        })?,
        GroupSpec::Strategy(s) => make_group_plan(dataset.n_features(), *s, config.group_seed)?,
    };
    // validates indices against the data
    stream_groups(&dataset, &plan)?;
    Ok(PreparedData {
        dataset,
        plan,
        constant_features: report.constant_features,
        informative,
        strongest,
    })
}

/// ±1 targets for the single-feature baselines: one vector for binary
/// labels, one per class (one-vs-rest) otherwise.
fn baseline_targets(ds: &Dataset) -> Vec<Vec<f64>> {
    let labels = ds.labels();
    match labels.signed_targets() {
        Ok(y) => vec![y],
        Err(_) => (1..=labels.n_classes()).map(|c| labels.one_vs_rest(c)).collect(),
    }
}

/// Union of per-target runs, in stream order.
fn merge_results(mut runs: Vec<SelectionResult>, stream_order: &[usize]) -> SelectionResult {
    if runs.len() == 1 {
        return runs.pop().expect("one run");
    }
    let position = |j: &usize| stream_order.iter().position(|x| x == j).unwrap_or(usize::MAX);
    let union = |lists: Vec<&Vec<usize>>| {
        let mut all: Vec<usize> = lists.into_iter().flatten().copied().collect();
        all.sort_by_key(position);
        all.dedup();
        all
    };
    let selected = union(runs.iter().map(|r| &r.selected).collect());
    let trace = (0..runs[0].trace.len())
        .map(|g| GroupTrace {
            group: runs[0].trace[g].group,
            arrived: runs[0].trace[g].arrived.clone(),
            intra: union(runs.iter().map(|r| &r.trace[g].intra).collect()),
            retained: union(runs.iter().map(|r| &r.trace[g].retained).collect()),
        })
        .collect();
    let timings_ms = runs.iter().fold(Timings::default(), |t, r| Timings {
        intra: t.intra + r.timings_ms.intra,
        inter: t.inter + r.timings_ms.inter,
        total: t.total + r.timings_ms.total,
    });
    SelectionResult {
        selected,
        stop_reason: StopReason::Exhausted,
        trace,
        timings_ms,
        warnings: runs.into_iter().flat_map(|r| r.warnings).collect(),
    }
}

/// Runs one named selector on the prepared stream.
pub fn run_selector(name: &str, data: &PreparedData, config: &ExperimentConfig) -> Result<SelectionResult> {
    let ds = &data.dataset;
    let plan = &data.plan;
    match name {
        "ogfs" => ogfs_run(stream_groups(ds, plan)?, &config.ogfs),
        "alpha" => {
            let runs = baseline_targets(ds)
                .iter()
                .map(|y| alpha_investing_run(stream_groups(ds, plan)?, y, &config.alpha).map(|o| o.result))
                .collect::<Result<Vec<_>>>()?;
            Ok(merge_results(runs, &plan.flattened()))
        }
        "grafting" => {
            let runs = baseline_targets(ds)
                .iter()
                .map(|y| grafting_run(stream_groups(ds, plan)?, y, &config.grafting).map(|o| o.result))
                .collect::<Result<Vec<_>>>()?;
            Ok(merge_results(runs, &plan.flattened()))
        }
        "full" => {
            let started = Instant::now();
            let trace = plan
                .groups()
                .iter()
                .enumerate()
                .scan(Vec::new(), |seen: &mut Vec<usize>, (g, grp)| {
                    seen.extend_from_slice(grp);
                    Some(GroupTrace {
                        group: g,
                        arrived: grp.clone(),
                        intra: grp.clone(),
                        retained: seen.clone(),
                    })
                })
                .collect();
            let total = started.elapsed().as_secs_f64() * 1e3;
            Ok(SelectionResult {
                selected: plan.flattened(),
                stop_reason: StopReason::Exhausted,
                trace,
                timings_ms: Timings {
                    intra: 0.0,
                    inter: 0.0,
                    total,
                },
                warnings: Vec::new(),
            })
        }
        other => Err(Error::UnknownAlgorithm(other.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub mean: f64,
    pub std: f64,
    pub folds: Vec<f64>,
}

/// Ground-truth hits of a selection on planted data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recovery {
    pub informative_found: usize,
    pub informative_total: usize,
    pub noise_selected: usize,
    pub noise_total: usize,
    pub strongest_found: bool,
}

impl Recovery {
    pub fn of(selected: &[usize], informative: &[usize], strongest: usize, d: usize) -> Self {
        let found = selected.iter().filter(|j| informative.contains(j)).count();
        Self {
            informative_found: found,
            informative_total: informative.len(),
            noise_selected: selected.len() - found,
            noise_total: d - informative.len(),
            strongest_found: selected.contains(&strongest),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmRow {
    pub algorithm: String,
    pub compactness: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<Accuracy>,
    pub seconds: f64,
    pub selected: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_reason: Option<StopReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovery: Option<Recovery>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl AlgorithmRow {
    fn failed(algorithm: &str, err: &Error) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            compactness: 0,
            accuracy: None,
            seconds: 0.0,
            selected: Vec::new(),
            stop_reason: None,
            recovery: None,
            warnings: Vec::new(),
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderTrials {
    pub seeds: Vec<u64>,
    pub accuracies: Vec<f64>,
    pub compactness: Vec<usize>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub n_samples: usize,
    pub n_features: usize,
    pub n_groups: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constant_features: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub informative: Option<Vec<usize>>,
    pub rows: Vec<AlgorithmRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_trials: Option<OrderTrials>,
}

impl ExperimentReport {
    pub fn row(&self, algorithm: &str) -> Option<&AlgorithmRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm)
    }

    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    /// Copy with wall-clock fields zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        r.rows.iter_mut().for_each(|row| row.seconds = 0.0);
        r
    }
}

fn evaluate(name: &str, data: &PreparedData, config: &ExperimentConfig) -> Result<AlgorithmRow> {
    let started = Instant::now();
    let result = run_selector(name, data, config)?;
    let seconds = started.elapsed().as_secs_f64();
    let cv = cross_validate(&data.dataset, &result.selected, &config.cv_options())?;
    let recovery = match (&data.informative, data.strongest) {
        (Some(inf), Some(s)) => Some(Recovery::of(&result.selected, inf, s, data.dataset.n_features())),
        _ => None,
    };
    Ok(AlgorithmRow {
        algorithm: name.to_string(),
        compactness: result.selected.len(),
        accuracy: Some(Accuracy {
            mean: cv.mean,
            std: cv.std,
            folds: cv.fold_accuracies,
        }),
        seconds,
        selected: result.selected,
        stop_reason: Some(result.stop_reason),
        recovery,
        warnings: result.warnings,
        error: None,
    })
}

/// Reruns OGFS over `trials` random permutations of the group order.
pub fn order_trials(data: &PreparedData, config: &ExperimentConfig, trials: usize) -> Result<OrderTrials> {
    let seeds: Vec<u64> = (0..trials as u64).map(|t| config.group_seed.wrapping_add(t)).collect();
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            let plan = data.plan.reordered(&data.plan.shuffled_order(seed))?;
            let result = ogfs_run(stream_groups(&data.dataset, &plan)?, &config.ogfs)?;
            let cv = cross_validate(&data.dataset, &result.selected, &config.cv_options())?;
            Ok((cv.mean, result.selected.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (accuracies, compactness): (Vec<f64>, Vec<usize>) = runs.into_iter().unzip();
    let (mean, std) = mean_std(&accuracies);
    Ok(OrderTrials {
        seeds,
        accuracies,
        compactness,
        mean,
        std,
    })
}

/// Runs every requested algorithm on the same prepared stream. Failures of
/// a single algorithm become error rows; only config and data problems
/// abort the whole run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let data = prepare_data(config)?;
    run_prepared(config, &data)
}

pub fn run_prepared(config: &ExperimentConfig, data: &PreparedData) -> Result<ExperimentReport> {
    let rows = config
        .algorithms
        .iter()
        .map(|name| {
            evaluate(name, data, config).unwrap_or_else(|e| {
                warn!("{name}: {e}");
                AlgorithmRow::failed(name, &e)
            })
        })
        .inspect(|r| {
            if let Some(a) = &r.accuracy {
                info!(
                    "{}: {} features, accuracy {:.4} ± {:.4}",
                    r.algorithm, r.compactness, a.mean, a.std
                );
            }
        })
        .collect();
    let order_trials = match config.order_trials {
        0 => None,
        t => Some(order_trials(data, config, t)?),
    };
    Ok(ExperimentReport {
        config: config.clone(),
        n_samples: data.dataset.n_samples(),
        n_features: data.dataset.n_features(),
        n_groups: data.plan.n_groups(),
        constant_features: data.constant_features.clone(),
        informative: data.informative.clone(),
        rows,
        order_trials,
    })
}
