use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::data::FeatureStream;
use crate::error::{Error, Result};
use crate::lasso::soft_threshold;
use crate::ogfs::{GroupTrace, SelectionResult, StopReason, Timings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraftingConfig {
    pub lambda: f64,
    /// Gradient tolerance of the inner optimizer.
    pub tol: f64,
    pub max_iterations: usize,
    /// Rescale every arriving column to unit root-mean-square before use.
    pub standardize: bool,
}

impl Default for GraftingConfig {
    fn default() -> Self {
        Self {
            lambda: 0.3,
            tol: 1e-5,
            max_iterations: 500,
            standardize: true,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn check_targets(y: &[f64]) -> Result<()> {
    if y.iter().all(|&v| v == 1.0 || v == -1.0) {
        Ok(())
    } else {
        Err(Error::InvalidParameter("targets must be ±1".into()))
    }
}

/// Logistic model `f(x) = bias + Σ w_j x_j` over the selected columns,
/// trained on the L1-penalized binomial negative log-likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraftingModel {
    pub selected: Vec<usize>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub tol: f64,
    columns: Vec<Vec<f64>>,
    y: Vec<f64>,
    margins: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub objective_history: Vec<f64>,
}

impl GraftingModel {
    pub fn new(y: Vec<f64>, lambda: f64, tol: f64) -> Result<Self> {
        check_targets(&y)?;
        if !(lambda >= 0.0) || !(tol > 0.0) {
            return Err(Error::InvalidParameter("lambda must be >= 0 and tol > 0".into()));
        }
        Ok(Self {
            selected: Vec::new(),
            weights: Vec::new(),
            bias: 0.0,
            lambda,
            tol,
            columns: Vec::new(),
            margins: vec![0.0; y.len()],
            y,
        })
    }

    /// A model with given columns and parameters, e.g. for checking gradients.
    pub fn with_parameters(
        y: Vec<f64>,
        columns: Vec<Vec<f64>>,
        weights: Vec<f64>,
        bias: f64,
        lambda: f64,
    ) -> Result<Self> {
        if columns.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                found: weights.len(),
            });
        }
        let mut model = Self::new(y, lambda, GraftingConfig::default().tol)?;
        for c in &columns {
            model.check_len(c)?;
        }
        model.selected = (0..columns.len()).collect();
        model.columns = columns;
        model.weights = weights;
        model.bias = bias;
        model.recompute_margins();
        Ok(model)
    }

    pub fn n_samples(&self) -> usize {
        self.y.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.y.len() {
            return Err(Error::DimensionMismatch {
                expected: self.y.len(),
                found: x.len(),
            });
        }
        Ok(())
    }

    fn recompute_margins(&mut self) {
        self.margins = (0..self.y.len())
            .map(|i| {
                self.bias
                    + self
                        .columns
                        .iter()
                        .zip(&self.weights)
                        .map(|(c, w)| w * c[i])
                        .sum::<f64>()
            })
            .collect();
    }

    /// Mean BNLL, without the penalty.
    pub fn loss(&self) -> f64 {
        let n = self.y.len() as f64;
        self.y
            .iter()
            .zip(&self.margins)
            .map(|(y, m)| softplus(-y * m))
            .sum::<f64>()
            / n
    }

    pub fn objective(&self) -> f64 {
        self.loss() + self.lambda * self.weights.iter().map(|w| w.abs()).sum::<f64>()
    }

    /// `∂loss/∂w` for a column `x` at the current model.
    fn gradient_unchecked(&self, x: &[f64]) -> f64 {
        let n = self.y.len() as f64;
        -self
            .y
            .iter()
            .zip(&self.margins)
            .zip(x)
            .map(|((y, m), xi)| y * xi * sigmoid(-y * m))
            .sum::<f64>()
            / n
    }

    fn bias_gradient(&self) -> f64 {
        let n = self.y.len() as f64;
        -self
            .y
            .iter()
            .zip(&self.margins)
            .map(|(y, m)| y * sigmoid(-y * m))
            .sum::<f64>()
            / n
    }

    /// Largest violation of the L1 optimality conditions.
    pub fn optimality_residual(&self) -> f64 {
        let mut r = self.bias_gradient().abs();
        for (c, &w) in self.columns.iter().zip(&self.weights) {
            let g = self.gradient_unchecked(c);
            let v = if w != 0.0 {
                (g + self.lambda * w.signum()).abs()
            } else {
                (g.abs() - self.lambda).max(0.0)
            };
            r = r.max(v);
        }
        r
    }

    fn add(&mut self, index: usize, x: Vec<f64>) {
        self.selected.push(index);
        self.columns.push(x);
        self.weights.push(0.0);
    }

    /// Cyclic proximal coordinate descent on the penalized objective. Each
    /// coordinate step minimizes a quadratic upper bound, so the objective
    /// never increases.
    pub fn optimize(&mut self, max_iterations: usize) -> FitReport {
        let n = self.y.len() as f64;
        let mut history = vec![self.objective()];
        let mut residual = self.optimality_residual();
        let mut iterations = 0;
        while residual > self.tol && iterations < max_iterations {
            iterations += 1;
            // logistic curvature is at most 1/4
            let g = self.bias_gradient();
            let step = -4.0 * g;
            self.bias += step;
            self.margins.iter_mut().for_each(|m| *m += step);
            for j in 0..self.columns.len() {
                let lip = self.columns[j].iter().map(|v| v * v).sum::<f64>() / (4.0 * n);
                if lip == 0.0 {
                    self.weights[j] = 0.0;
                    continue;
                }
                let g = self.gradient_unchecked(&self.columns[j]);
                let old = self.weights[j];
                let new = soft_threshold(old - g / lip, self.lambda / lip);
                if new != old {
                    let d = new - old;
                    for (m, v) in self.margins.iter_mut().zip(&self.columns[j]) {
                        *m += d * v;
                    }
                    self.weights[j] = new;
                }
            }
            history.push(self.objective());
            residual = self.optimality_residual();
        }
        FitReport {
            iterations,
            converged: residual <= self.tol,
            residual,
            objective_history: history,
        }
    }

    /// Drops selected features that fail the gradient test and carry zero
    /// weight. Returns the dropped indices.
    fn retest(&mut self) -> Vec<usize> {
        let keep: Vec<bool> = self
            .columns
            .iter()
            .zip(&self.weights)
            .map(|(c, &w)| w != 0.0 || self.gradient_unchecked(c).abs() > self.lambda)
            .collect();
        let dropped = self
            .selected
            .iter()
            .zip(&keep)
            .filter(|(_, k)| !**k)
            .map(|(&j, _)| j)
            .collect();
        let mut it = keep.iter();
        self.selected.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.columns.retain(|_| *it.next().unwrap());
        let mut it = keep.iter();
        self.weights.retain(|_| *it.next().unwrap());
        dropped
    }
}

/// `∂L̄/∂w_j = −(1/n) Σ_i y_i x_ij σ(−y_i f(x_i))` for a candidate or active
/// column `x` at the current model.
pub fn bnll_gradient(model: &GraftingModel, x: &[f64]) -> Result<f64> {
    model.check_len(x)?;
    Ok(model.gradient_unchecked(x))
}

fn unit_rms(x: &[f64]) -> Vec<f64> {
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    if rms > 0.0 {
        x.iter().map(|v| v / rms).collect()
    } else {
        x.to_vec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraftingOutcome {
    pub result: SelectionResult,
    pub model: GraftingModel,
}

/// Grafting over the stream flattened to single features, with ±1 targets.
pub fn grafting_run(stream: FeatureStream<'_>, y: &[f64], config: &GraftingConfig) -> Result<GraftingOutcome> {
    let started = Instant::now();
    let ds = stream.dataset();
    if y.len() != ds.n_samples() {
        return Err(Error::DimensionMismatch {
            expected: ds.n_samples(),
            found: y.len(),
        });
    }
    let mut model = GraftingModel::new(y.to_vec(), config.lambda, config.tol)?;
    let mut trace = Vec::new();
    let mut warnings = Vec::new();

    for group in stream {
        let mut accepted_here = Vec::new();
        for &(idx, f) in &group.features {
            let x = if config.standardize { unit_rms(f) } else { f.to_vec() };
            if model.gradient_unchecked(&x).abs() <= config.lambda {
                continue;
            }
            accepted_here.push(idx);
            model.add(idx, x);
            let fit = model.optimize(config.max_iterations);
            if !fit.converged {
                let msg = format!(
                    "feature {idx}: inner optimization stopped at residual {:.3e} after {} iterations",
                    fit.residual, fit.iterations
                );
                warn!("{msg}");
                warnings.push(msg);
            }
            model.retest();
        }
        trace.push(GroupTrace {
            group: group.id,
            arrived: group.indices(),
            intra: accepted_here,
            retained: model.selected.clone(),
        });
    }

    let total = started.elapsed().as_secs_f64() * 1e3;
    Ok(GraftingOutcome {
        result: SelectionResult {
            selected: model.selected.clone(),
            stop_reason: StopReason::Exhausted,
            trace,
            timings_ms: Timings {
                intra: total,
                inter: 0.0,
                total,
            },
            warnings,
        },
        model,
    })
}
