//! The two-stage online group selection loop.
//!
//! For every arriving group the intra-group criterion picks a candidate
//! subset; the candidates are merged with the running selection and an L1
//! regression on the class targets keeps the features with nonzero
//! coefficients. Features selected earlier can be dropped by a later
//! regression.

use std::fmt;
use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureStream, Labels};
use crate::error::{Error, Result};
use crate::eval::{knn_predict, subset_rows, HoldoutSplit};
use crate::intra::{intra_group_select, CriterionMode, ScoreContext, SelectionState, DEFAULT_EPSILON};
use crate::lasso::{lasso_solve_with, RegressionProblem, SolverOptions, DEFAULT_LAMBDA, DEFAULT_TOL, DEFAULT_ZERO_TOL};
use crate::spectral::DEFAULT_DELTA;

/// Stop once a k-NN classifier on the selection reaches `target` accuracy on
/// a held-out split drawn at the start of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyStop {
    pub target: f64,
    pub holdout_fraction: f64,
    pub seed: u64,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OgfsConfig {
    pub epsilon: f64,
    pub lambda: f64,
    pub mode: CriterionMode,
    pub context: ScoreContext,
    pub stop_k: Option<usize>,
    pub stop_accuracy: Option<AccuracyStop>,
    pub zero_tol: f64,
    pub solver_tol: f64,
    pub delta: f64,
}

impl Default for OgfsConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            lambda: DEFAULT_LAMBDA,
            mode: CriterionMode::Absolute,
            context: ScoreContext::GroupLocal,
            stop_k: None,
            stop_accuracy: None,
            zero_tol: DEFAULT_ZERO_TOL,
            solver_tol: DEFAULT_TOL,
            delta: DEFAULT_DELTA,
        }
    }
}

impl OgfsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.lambda >= 0.0) {
            return bad(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if self.stop_k == Some(0) {
            return bad("stop_k must be at least 1".into());
        }
        if let Some(a) = &self.stop_accuracy {
            if !(a.target > 0.0 && a.target <= 1.0) {
                return bad(format!("stop accuracy must lie in (0, 1], got {}", a.target));
            }
            if !(a.holdout_fraction > 0.0 && a.holdout_fraction < 1.0) {
                return bad(format!(
                    "holdout fraction must lie in (0, 1), got {}",
                    a.holdout_fraction
                ));
            }
            if a.k == 0 {
                return bad("k-NN k must be at least 1".into());
            }
        }
        if !(self.zero_tol >= 0.0) || !(self.solver_tol > 0.0) || !(self.delta > 0.0) {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }

    fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver_tol,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Exhausted,
    KReached,
    AccuracyReached,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exhausted => "exhausted",
            Self::KReached => "k-reached",
            Self::AccuracyReached => "accuracy-reached",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupTrace {
    pub group: usize,
    pub arrived: Vec<usize>,
    pub intra: Vec<usize>,
    pub retained: Vec<usize>,
}

/// Wall-clock per stage, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub intra: f64,
    pub inter: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    pub stop_reason: StopReason,
    pub trace: Vec<GroupTrace>,
    pub timings_ms: Timings,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SelectionResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Equality ignoring wall-clock fields.
    pub fn same_selection(&self, other: &Self) -> bool {
        self.selected == other.selected
            && self.stop_reason == other.stop_reason
            && self.trace == other.trace
            && self.warnings == other.warnings
    }
}

/// Regression targets derived from class labels: ±1 for two classes, one
/// 0/1 indicator column per class otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum RegressionTargets {
    Binary(Vec<f64>),
    OneHot(Vec<Vec<f64>>),
}

impl RegressionTargets {
    pub fn from_labels(labels: &Labels) -> Self {
        if labels.is_binary() {
            Self::Binary(labels.signed_targets().expect("binary labels"))
        } else {
            Self::OneHot(
                (1..=labels.n_classes())
                    .map(|c| labels.ids().iter().map(|&id| f64::from(u8::from(id == c))).collect())
                    .collect(),
            )
        }
    }

    fn columns(&self) -> Vec<&[f64]> {
        match self {
            Self::Binary(y) => vec![y.as_slice()],
            Self::OneHot(cols) => cols.iter().map(Vec::as_slice).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterGroupOutcome {
    /// Surviving feature indices, in candidate order (previous selection first).
    pub retained: Vec<usize>,
    /// Largest |coefficient| of each retained feature across target columns.
    pub weights: Vec<f64>,
    pub certified: bool,
}

/// Solves the L1 regression over `current ∪ incoming` and keeps the support.
pub fn inter_group_select(
    current: &[usize],
    incoming: &[usize],
    ds: &Dataset,
    targets: &RegressionTargets,
    lambda: f64,
    solver: SolverOptions,
    zero_tol: f64,
) -> Result<InterGroupOutcome> {
    let candidates: Vec<usize> = current.iter().chain(incoming).copied().collect();
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no candidate features".into()));
    }
    for (k, j) in candidates.iter().enumerate() {
        if candidates[..k].contains(j) {
            return Err(Error::DuplicateIndex(*j));
        }
    }
    let columns = candidates.iter().map(|&j| ds.feature(j)).collect::<Result<Vec<_>>>()?;

    let mut weight = vec![0.0f64; candidates.len()];
    let mut certified = true;
    for y in targets.columns() {
        let problem = RegressionProblem::from_columns(&columns, y, lambda)?;
        let solution = lasso_solve_with(&problem, solver)?;
        certified &= solution.certified;
        for (w, b) in weight.iter_mut().zip(&solution.beta) {
            *w = w.max(b.abs());
        }
    }
    let (retained, weights) = candidates
        .iter()
        .zip(&weight)
        .filter(|(_, w)| **w > zero_tol)
        .map(|(&j, &w)| (j, w))
        .unzip();
    Ok(InterGroupOutcome {
        retained,
        weights,
        certified,
    })
}

pub struct StopContext<'a> {
    pub dataset: &'a Dataset,
    pub validation: Option<&'a HoldoutSplit>,
    pub stream_exhausted: bool,
}

/// Validation accuracy of a k-NN classifier on `selected`.
pub fn holdout_accuracy(ds: &Dataset, selected: &[usize], split: &HoldoutSplit, k: usize) -> Result<f64> {
    let ids = ds.labels().ids();
    let train_x = subset_rows(ds, selected, &split.train)?;
    let test_x = subset_rows(ds, selected, &split.validation)?;
    let train_y: Vec<usize> = split.train.iter().map(|&i| ids[i]).collect();
    let pred = knn_predict(&train_x, &train_y, &test_x, k.min(train_x.len()))?;
    let hits = pred
        .iter()
        .zip(&split.validation)
        .filter(|(p, &i)| **p == ids[i])
        .count();
    Ok(hits as f64 / split.validation.len() as f64)
}

/// Evaluates the stopping conditions in order: size, accuracy, exhaustion.
pub fn check_stop(selected: &[usize], config: &OgfsConfig, ctx: &StopContext<'_>) -> Result<Option<StopReason>> {
    if config.stop_k.is_some_and(|k| selected.len() >= k) {
        return Ok(Some(StopReason::KReached));
    }
    if let Some(acc) = &config.stop_accuracy {
        let split = ctx.validation.ok_or(Error::MissingValidation)?;
        if !selected.is_empty() && holdout_accuracy(ctx.dataset, selected, split, acc.k)? >= acc.target {
            return Ok(Some(StopReason::AccuracyReached));
        }
    }
    Ok(ctx.stream_exhausted.then_some(StopReason::Exhausted))
}

/// Runs the selector over the whole stream, or until a stop condition fires.
pub fn ogfs_run(mut stream: FeatureStream<'_>, config: &OgfsConfig) -> Result<SelectionResult> {
    config.validate()?;
    let started = Instant::now();
    let ds = stream.dataset();
    let labels = ds.labels();
    let targets = RegressionTargets::from_labels(labels);
    let validation = config
        .stop_accuracy
        .map(|a| HoldoutSplit::stratified(labels, a.holdout_fraction, a.seed))
        .transpose()?;

    let mut state = SelectionState::new(labels, config.epsilon, config.mode, config.context)?.with_delta(config.delta);
    let mut selected: Vec<usize> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut trace = Vec::new();
    let mut timings = Timings::default();
    let mut warnings = Vec::new();

    let stop_reason = loop {
        let Some(group) = stream.next() else {
            break StopReason::Exhausted;
        };

        let t = Instant::now();
        let intra = intra_group_select(&mut state, &group.features)?;
        timings.intra += t.elapsed().as_secs_f64() * 1e3;

        if !intra.is_empty() {
            let t = Instant::now();
            let outcome = inter_group_select(
                &selected,
                &intra,
                ds,
                &targets,
                config.lambda,
                config.solver_options(),
                config.zero_tol,
            )?;
            timings.inter += t.elapsed().as_secs_f64() * 1e3;
            if !outcome.certified {
                let msg = format!("group {}: L1 solve not certified", group.id);
                warn!("{msg}");
                warnings.push(msg);
            }
            selected = outcome.retained;
            weights = outcome.weights;
            if config.context == ScoreContext::Global {
                state.reset_to(&selected, |j| ds.feature(j))?;
            }
        }

        trace.push(GroupTrace {
            group: group.id,
            arrived: group.indices(),
            intra,
            retained: selected.clone(),
        });

        let ctx = StopContext {
            dataset: ds,
            validation: validation.as_ref(),
            stream_exhausted: stream.is_exhausted(),
        };
        if let Some(reason) = check_stop(&selected, config, &ctx)? {
            if let (StopReason::KReached, Some(k)) = (reason, config.stop_k) {
                truncate_by_weight(&mut selected, &weights, k);
                if let Some(last) = trace.last_mut() {
                    last.retained = selected.clone();
                }
            }
            break reason;
        }
    };

    timings.total = started.elapsed().as_secs_f64() * 1e3;
    Ok(SelectionResult {
        selected,
        stop_reason,
        trace,
        timings_ms: timings,
        warnings,
    })
}

/// Keeps the `k` features with the largest weights, preserving order.
fn truncate_by_weight(selected: &mut Vec<usize>, weights: &[f64], k: usize) {
    if selected.len() <= k {
        return;
    }
    let mut order: Vec<usize> = (0..selected.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut keep = order[..k].to_vec();
    keep.sort_unstable();
    *selected = keep.into_iter().map(|p| selected[p]).collect();
}
