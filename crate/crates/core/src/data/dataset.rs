use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense class labels with ids in `1..=c`.
///
/// Construction guarantees `n >= 2`, `c >= 2` and that every class id in
/// `1..=c` occurs at least once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    ids: Vec<usize>,
    class_sizes: Vec<usize>,
}

impl Labels {
    /// Builds labels from ids that are already dense in `1..=c`.
    pub fn new(ids: Vec<usize>) -> Result<Self> {
        if ids.len() < 2 {
            return Err(Error::TooFewSamples(ids.len()));
        }
        let c = ids.iter().copied().max().unwrap_or(0);
        if ids.contains(&0) {
            return Err(Error::InvalidParameter("class ids must start at 1".to_string()));
        }
        let mut class_sizes = vec![0usize; c];
        for &id in &ids {
            class_sizes[id - 1] += 1;
        }
        if let Some(missing) = class_sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidParameter(format!(
                "class ids are not dense: class {} has no samples",
                missing + 1
            )));
        }
        if c < 2 {
            return Err(Error::SingleClass);
        }
        Ok(Self { ids, class_sizes })
    }

    /// Remaps arbitrary integer labels to `1..=c` in order of first appearance.
    pub fn from_raw(raw: &[i64]) -> Result<Self> {
        let mut seen: Vec<i64> = Vec::new();
        let ids = raw
            .iter()
            .map(|v| match seen.iter().position(|s| s == v) {
                Some(p) => p + 1,
                None => {
                    seen.push(*v);
                    seen.len()
                }
            })
            .collect();
        Self::new(ids)
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.class_sizes.len()
    }

    /// `class_sizes()[l - 1]` is the number of samples of class `l`.
    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn is_binary(&self) -> bool {
        self.n_classes() == 2
    }

    /// ±1 encoding of a binary problem: class 1 → +1, class 2 → −1.
    pub fn signed_targets(&self) -> Result<Vec<f64>> {
        if !self.is_binary() {
            return Err(Error::NotBinary(self.n_classes()));
        }
        Ok(self.ids.iter().map(|&id| if id == 1 { 1.0 } else { -1.0 }).collect())
    }

    /// One-vs-rest ±1 targets for class `class` (1-based).
    pub fn one_vs_rest(&self, class: usize) -> Vec<f64> {
        self.ids
            .iter()
            .map(|&id| if id == class { 1.0 } else { -1.0 })
            .collect()
    }

    /// Restriction to the given sample positions. The result keeps the
    /// original class ids, so it is not re-validated.
    pub fn subset_ids(&self, rows: &[usize]) -> Vec<usize> {
        rows.iter().map(|&r| self.ids[r]).collect()
    }

    /// Largest class share, the accuracy of always predicting the majority class.
    pub fn majority_rate(&self) -> f64 {
        let max = self.class_sizes.iter().copied().max().unwrap_or(0);
        max as f64 / self.len() as f64
    }
}

/// A fixed set of labeled samples over a (possibly growing) feature space.
///
/// Features are stored column-major: `features[j]` holds the `n` values of
/// feature `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Labels,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Labels, feature_names: Option<Vec<String>>) -> Result<Self> {
        let n = labels.len();
        for f in &features {
            if f.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: f.len(),
                });
            }
        }
        if let Some(names) = &feature_names {
            if names.len() != features.len() {
                return Err(Error::DimensionMismatch {
                    expected: features.len(),
                    found: names.len(),
                });
            }
        }
        Ok(Self {
            features,
            labels,
            feature_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.n_classes()
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn feature(&self, index: usize) -> Result<&[f64]> {
        self.features
            .get(index)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.features.len(),
            })
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub(crate) fn with_features(&self, features: Vec<Vec<f64>>) -> Self {
        Self {
            features,
            labels: self.labels.clone(),
            feature_names: self.feature_names.clone(),
        }
    }
}
