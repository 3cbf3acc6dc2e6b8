//! Per-feature screening inside an arriving group.
//!
//! A feature is scored by how much it moves the trace-ratio score `F` of the
//! running selection. Absolute mode accepts when `|F' - F| > epsilon`,
//! signed mode only when `F' - F > epsilon`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Labels;
use crate::error::{Error, Result};
use crate::spectral::{scatter_pair, subset_score, ScatterPair, DEFAULT_DELTA};

pub const DEFAULT_EPSILON: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionMode {
    #[default]
    Absolute,
    Signed,
}

impl FromStr for CriterionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs" | "absolute" => Ok(Self::Absolute),
            "signed" => Ok(Self::Signed),
            other => Err(Error::InvalidParameter(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for CriterionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Absolute => "abs",
            Self::Signed => "signed",
        })
    }
}

/// What the running score is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreContext {
    /// Each group starts from an empty selection.
    #[default]
    GroupLocal,
    /// Features are scored against everything selected so far.
    Global,
}

impl FromStr for ScoreContext {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "group" | "group-local" => Ok(Self::GroupLocal),
            "global" => Ok(Self::Global),
            other => Err(Error::InvalidParameter(format!("unknown context `{other}`"))),
        }
    }
}

impl fmt::Display for ScoreContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GroupLocal => "group",
            Self::Global => "global",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub accepted: bool,
    pub old_score: f64,
    pub new_score: f64,
}

/// Running selection with cached scatter sums, so each evaluation is O(n).
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionState<'a> {
    labels: &'a Labels,
    selected: Vec<usize>,
    sum_b: f64,
    sum_w: f64,
    epsilon: f64,
    delta: f64,
    mode: CriterionMode,
    context: ScoreContext,
}

impl<'a> SelectionState<'a> {
    pub fn new(labels: &'a Labels, epsilon: f64, mode: CriterionMode, context: ScoreContext) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self {
            labels,
            selected: Vec::new(),
            sum_b: 0.0,
            sum_w: 0.0,
            epsilon,
            delta: DEFAULT_DELTA,
            mode,
            context,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn sums(&self) -> (f64, f64) {
        (self.sum_b, self.sum_w)
    }

    pub fn mode(&self) -> CriterionMode {
        self.mode
    }

    pub fn context(&self) -> ScoreContext {
        self.context
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn labels(&self) -> &'a Labels {
        self.labels
    }

    /// Current trace-ratio score `F`.
    pub fn score(&self) -> f64 {
        self.sum_b / (self.sum_w + self.delta)
    }

    pub fn clear(&mut self) {
        self.selected.clear();
        self.sum_b = 0.0;
        self.sum_w = 0.0;
    }

    /// Replaces the selection with `indices`, recomputing sums from scratch.
    pub fn reset_to<'f>(&mut self, indices: &[usize], feature: impl Fn(usize) -> Result<&'f [f64]>) -> Result<()> {
        self.clear();
        for &j in indices {
            if self.selected.contains(&j) {
                return Err(Error::DuplicateIndex(j));
            }
            let p = scatter_pair(feature(j)?, self.labels)?;
            self.push(j, p);
        }
        Ok(())
    }

    fn push(&mut self, idx: usize, p: ScatterPair) {
        self.selected.push(idx);
        self.sum_b += p.between;
        self.sum_w += p.within;
    }

    fn accepts(&self, old: f64, new: f64) -> bool {
        match self.mode {
            CriterionMode::Absolute => (new - old).abs() > self.epsilon,
            CriterionMode::Signed => new - old > self.epsilon,
        }
    }

    /// Scores `f` against the running selection and adds it on acceptance.
    /// A rejected feature leaves the state untouched.
    pub fn evaluate_feature(&mut self, f: &[f64], idx: usize) -> Result<Decision> {
        if self.selected.contains(&idx) {
            return Err(Error::DuplicateIndex(idx));
        }
        let p = scatter_pair(f, self.labels)?;
        let old_score = self.score();
        let new_score = subset_score(self.sum_b + p.between, self.sum_w + p.within, self.delta)?;
        let accepted = self.accepts(old_score, new_score);
        if accepted {
            self.push(idx, p);
        }
        Ok(Decision {
            accepted,
            old_score,
            new_score,
        })
    }
}

/// Screens one group in arrival order and returns the accepted features.
///
/// In group-local context the state is cleared first and ends up holding
/// exactly the group's survivors; in global context they are appended to
/// the existing selection.
pub fn intra_group_select(state: &mut SelectionState<'_>, group: &[(usize, &[f64])]) -> Result<Vec<usize>> {
    if state.context == ScoreContext::GroupLocal {
        state.clear();
    }
    let mut accepted = Vec::new();
    for &(idx, f) in group {
        if state.evaluate_feature(f, idx)?.accepted {
            accepted.push(idx);
        }
    }
    Ok(accepted)
}
