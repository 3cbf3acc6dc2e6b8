use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::knn::{knn_predict, subset_rows};
use crate::data::{Dataset, FeatureScaling, Labels};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub k: usize,
    pub seed: u64,
    /// Re-fit centering/scaling on each training fold instead of relying on
    /// the dataset-wide normalization.
    pub normalize_per_fold: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            k: 3,
            seed: 0,
            normalize_per_fold: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub mean: f64,
    /// Sample standard deviation across folds.
    pub std: f64,
    pub fold_accuracies: Vec<f64>,
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Seeded stratified fold ids. Each class is shuffled and dealt round-robin,
/// continuing the rotation across classes so fold sizes stay balanced.
pub fn stratified_folds(class_ids: &[usize], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_classes = class_ids.iter().copied().max().unwrap_or(0);
    let mut assignment = vec![0; class_ids.len()];
    let mut next = 0;
    for class in 1..=n_classes {
        let mut members: Vec<usize> = (0..class_ids.len()).filter(|&i| class_ids[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    assignment
}

/// A seeded stratified train/validation split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldoutSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

impl HoldoutSplit {
    /// Holds out `round(fraction * n_l)` members of every class, at least one
    /// and never the whole class.
    pub fn stratified(labels: &Labels, fraction: f64, seed: u64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "holdout fraction must lie in (0, 1), got {fraction}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ids = labels.ids();
        let (mut train, mut validation) = (Vec::new(), Vec::new());
        for class in 1..=labels.n_classes() {
            let mut members: Vec<usize> = (0..ids.len()).filter(|&i| ids[i] == class).collect();
            if members.len() < 2 {
                return Err(Error::TooFewSamples(members.len()));
            }
            members.shuffle(&mut rng);
            let held = ((fraction * members.len() as f64).round() as usize).clamp(1, members.len() - 1);
            validation.extend_from_slice(&members[..held]);
            train.extend_from_slice(&members[held..]);
        }
        train.sort_unstable();
        validation.sort_unstable();
        Ok(Self { train, validation })
    }
}

/// Largest usable fold count: every class needs at least one member per fold.
fn feasible_folds(ds: &Dataset, requested: usize) -> Result<usize> {
    if requested < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {requested}"
        )));
    }
    let smallest = ds.labels().class_sizes().iter().copied().min().unwrap_or(0);
    let folds = requested.min(ds.n_samples()).min(smallest.max(2));
    if folds < requested {
        warn!("lowering fold count from {requested} to {folds}: smallest class has {smallest} samples");
    }
    Ok(folds)
}

fn fold_accuracy(ds: &Dataset, subset: &[usize], train: &[usize], test: &[usize], opts: &CvOptions) -> Result<f64> {
    let ids = ds.labels().ids();
    let train_y: Vec<usize> = train.iter().map(|&i| ids[i]).collect();
    let test_y: Vec<usize> = test.iter().map(|&i| ids[i]).collect();

    let predictions = if subset.is_empty() {
        let mut counts = vec![0usize; ds.n_classes() + 1];
        train_y.iter().for_each(|&c| counts[c] += 1);
        let majority = (0..counts.len()).rev().max_by_key(|&c| counts[c]).unwrap_or(1);
        vec![majority; test.len()]
    } else {
        let mut train_x = subset_rows(ds, subset, train)?;
        let mut test_x = subset_rows(ds, subset, test)?;
        if opts.normalize_per_fold {
            for c in 0..subset.len() {
                let column: Vec<f64> = train_x.iter().map(|r| r[c]).collect();
                let s = FeatureScaling::fit(&column);
                for row in train_x.iter_mut().chain(test_x.iter_mut()) {
                    row[c] = s.apply(row[c]);
                }
            }
        }
        let k = opts.k.min(train_x.len());
        knn_predict(&train_x, &train_y, &test_x, k)?
    };
    let hits = predictions.iter().zip(&test_y).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / test.len() as f64)
}

/// Stratified k-fold accuracy of a k-NN classifier over `subset`. An empty
/// subset scores the majority-class baseline of each training fold.
pub fn cross_validate(ds: &Dataset, subset: &[usize], opts: &CvOptions) -> Result<CvScore> {
    if let Some(&index) = subset.iter().find(|&&j| j >= ds.n_features()) {
        return Err(Error::IndexOutOfRange {
            index,
            len: ds.n_features(),
        });
    }
    let folds = feasible_folds(ds, opts.folds)?;
    let assignment = stratified_folds(ds.labels().ids(), folds, opts.seed);

    let fold_accuracies = (0..folds)
        .into_par_iter()
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..ds.n_samples()).partition(|&i| assignment[i] == f);
            fold_accuracy(ds, subset, &train, &test, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, std) = mean_std(&fold_accuracies);
    Ok(CvScore {
        mean,
        std,
        fold_accuracies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_stratified_and_deterministic() {
        let ids: Vec<usize> = (0..30).map(|i| if i < 20 { 1 } else { 2 }).collect();
        let a = stratified_folds(&ids, 5, 3);
        assert_eq!(a, stratified_folds(&ids, 5, 3));
        for f in 0..5 {
            let c1 = (0..30).filter(|&i| a[i] == f && ids[i] == 1).count();
            let c2 = (0..30).filter(|&i| a[i] == f && ids[i] == 2).count();
            assert_eq!((c1, c2), (4, 2));
        }
    }

    #[test]
    fn empty_subset_is_majority_rate() {
        let ids: Vec<usize> = (0..20).map(|i| if i < 15 { 1 } else { 2 }).collect();
        let f: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ds = Dataset::new(vec![f], Labels::new(ids).unwrap(), None).unwrap();
        let s = cross_validate(
            &ds,
            &[],
            &CvOptions {
                folds: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((s.mean - 0.75).abs() < 1e-12);
        assert!(cross_validate(&ds, &[3], &CvOptions::default()).is_err());
    }

    #[test]
    fn holdout_is_stratified_partition() {
        let labels = Labels::new((0..30).map(|i| if i < 20 { 1 } else { 2 }).collect()).unwrap();
        let h = HoldoutSplit::stratified(&labels, 0.3, 9).unwrap();
        assert_eq!(h.validation.len(), 6 + 3);
        let mut all: Vec<usize> = h.train.iter().chain(&h.validation).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..30).collect::<Vec<_>>());
        assert_eq!(h, HoldoutSplit::stratified(&labels, 0.3, 9).unwrap());
        assert!(HoldoutSplit::stratified(&labels, 1.0, 9).is_err());
    }

    #[test]
    fn mean_std_sample() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
