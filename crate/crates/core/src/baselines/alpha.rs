use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::p_value;
use crate::data::FeatureStream;
use crate::error::{Error, Result};
use crate::ogfs::{GroupTrace, SelectionResult, StopReason, Timings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaConfig {
    pub w0: f64,
    pub alpha_delta: f64,
}

impl Default for AlphaConfig {
    fn default() -> Self {
        Self {
            w0: 0.5,
            alpha_delta: 0.5,
        }
    }
}

/// Alpha-investing budget. `step` is the 1-based index of the next test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WealthState {
    pub wealth: f64,
    pub step: usize,
    pub alpha_delta: f64,
    pub selected: Vec<usize>,
}

impl WealthState {
    pub fn new(w0: f64, alpha_delta: f64) -> Result<Self> {
        if !(w0 > 0.0) || !w0.is_finite() {
            return Err(Error::InvalidParameter(format!("w0 must be positive, got {w0}")));
        }
        if !(alpha_delta >= 0.0) || !alpha_delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha_delta must be >= 0, got {alpha_delta}"
            )));
        }
        Ok(Self {
            wealth: w0,
            step: 1,
            alpha_delta,
            selected: Vec::new(),
        })
    }

    /// Threshold for the next test, `w_i / (2 i)`.
    pub fn alpha(&self) -> f64 {
        self.wealth / (2.0 * self.step as f64)
    }

    /// Charges the current test and advances. Returns the α that was used.
    pub fn record(&mut self, feature: usize, accepted: bool) -> Result<f64> {
        let alpha = self.alpha();
        let next = if accepted {
            self.selected.push(feature);
            self.wealth + self.alpha_delta - alpha
        } else {
            self.wealth - alpha
        };
        if next < 0.0 {
            return Err(Error::NegativeAccumulator(next));
        }
        self.wealth = next;
        self.step += 1;
        Ok(alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WealthStep {
    pub feature: usize,
    pub p_value: f64,
    pub alpha: f64,
    pub accepted: bool,
    /// Wealth after the update.
    pub wealth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaOutcome {
    pub result: SelectionResult,
    pub log: Vec<WealthStep>,
}

/// Replays the wealth trajectory from a sequence of decisions.
pub fn replay_wealth(w0: f64, alpha_delta: f64, decisions: &[bool]) -> Result<Vec<f64>> {
    let mut state = WealthState::new(w0, alpha_delta)?;
    decisions
        .iter()
        .enumerate()
        .map(|(i, &a)| state.record(i, a).map(|_| state.wealth))
        .collect()
}

/// Alpha-investing over the stream flattened to single features, with ±1
/// regression targets `y`. Group boundaries only shape the trace.
pub fn alpha_investing_run(stream: FeatureStream<'_>, y: &[f64], config: &AlphaConfig) -> Result<AlphaOutcome> {
    let started = Instant::now();
    let ds = stream.dataset();
    if y.len() != ds.n_samples() {
        return Err(Error::DimensionMismatch {
            expected: ds.n_samples(),
            found: y.len(),
        });
    }
    let mut state = WealthState::new(config.w0, config.alpha_delta)?;
    let mut log = Vec::new();
    let mut trace = Vec::new();

    for group in stream {
        let mut accepted_here = Vec::new();
        for &(idx, f) in &group.features {
            let alpha = state.alpha();
            // Too many regressors for the sample size: nothing left to test.
            let p = if state.selected.len() + 2 < y.len() && alpha > 0.0 {
                let u = state
                    .selected
                    .iter()
                    .map(|&j| ds.feature(j))
                    .collect::<Result<Vec<_>>>()?;
                p_value(f, &u, y)?
            } else {
                1.0
            };
            let accepted = p < alpha;
            state.record(idx, accepted)?;
            if accepted {
                accepted_here.push(idx);
            }
            log.push(WealthStep {
                feature: idx,
                p_value: p,
                alpha,
                accepted,
                wealth: state.wealth,
            });
        }
        trace.push(GroupTrace {
            group: group.id,
            arrived: group.indices(),
            intra: accepted_here,
            retained: state.selected.clone(),
        });
    }

    let total = started.elapsed().as_secs_f64() * 1e3;
    Ok(AlphaOutcome {
        result: SelectionResult {
            selected: state.selected,
            stop_reason: StopReason::Exhausted,
            trace,
            timings_ms: Timings {
                intra: total,
                inter: 0.0,
                total,
            },
            warnings: Vec::new(),
        },
        log,
    })
}
