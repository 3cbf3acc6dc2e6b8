use serde::{Deserialize, Serialize};

use super::dataset::Dataset;

/// Features that had no variation and were replaced by zero vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub constant_features: Vec<usize>,
}

/// Centering offset and scale for one feature. A scale of zero marks a
/// constant feature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureScaling {
    pub mean: f64,
    pub norm: f64,
}

impl FeatureScaling {
    pub fn fit(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let norm = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt();
        let magnitude = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let floor = 64.0 * f64::EPSILON * magnitude * n.sqrt();
        Self {
            mean,
            norm: if norm > floor { norm } else { 0.0 },
        }
    }

    pub fn is_constant(&self) -> bool {
        self.norm == 0.0
    }

    pub fn apply(&self, v: f64) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            (v - self.mean) / self.norm
        }
    }
}

/// Centers every feature and scales it to unit L2 norm. Constant features
/// become all-zero vectors and are listed in the report.
pub fn normalize_features(ds: &Dataset) -> (Dataset, NormalizationReport) {
    let mut report = NormalizationReport::default();
    let features = ds
        .features()
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let scaling = FeatureScaling::fit(f);
            if scaling.is_constant() {
                report.constant_features.push(j);
            }
            let mut out: Vec<f64> = f.iter().map(|&v| scaling.apply(v)).collect();
            // second centering pass removes the rounding residue of the first
            let residual = out.iter().sum::<f64>() / out.len() as f64;
            if !scaling.is_constant() {
                out.iter_mut().for_each(|v| *v -= residual);
            }
            out
        })
        .collect();
    (ds.with_features(features), report)
}
