use crate::data::Dataset;
use crate::error::{Error, Result};

/// Sample rows restricted to a feature subset.
pub fn subset_rows(ds: &Dataset, features: &[usize], samples: &[usize]) -> Result<Vec<Vec<f64>>> {
    let columns = features.iter().map(|&j| ds.feature(j)).collect::<Result<Vec<_>>>()?;
    Ok(samples
        .iter()
        .map(|&i| columns.iter().map(|c| c[i]).collect())
        .collect())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Majority vote among the `k` nearest training rows (Euclidean).
///
/// Distance ties go to the smaller training index, vote ties to the smaller
/// class id.
pub fn knn_predict(train_x: &[Vec<f64>], train_y: &[usize], test_x: &[Vec<f64>], k: usize) -> Result<Vec<usize>> {
    if train_x.len() != train_y.len() {
        return Err(Error::DimensionMismatch {
            expected: train_x.len(),
            found: train_y.len(),
        });
    }
    if k == 0 || k > train_x.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} with {} training samples",
            train_x.len()
        )));
    }
    let width = train_x[0].len();
    if width == 0 {
        return Err(Error::InvalidParameter("empty feature subset".into()));
    }
    if let Some(bad) = train_x.iter().chain(test_x).find(|r| r.len() != width) {
        return Err(Error::DimensionMismatch {
            expected: width,
            found: bad.len(),
        });
    }
    let n_classes = train_y.iter().copied().max().unwrap_or(0);

    let mut order: Vec<(f64, usize)> = Vec::with_capacity(train_x.len());
    let mut votes = vec![0usize; n_classes + 1];
    Ok(test_x
        .iter()
        .map(|row| {
            order.clear();
            order.extend(train_x.iter().enumerate().map(|(i, t)| (squared_distance(row, t), i)));
            order.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            votes.iter_mut().for_each(|v| *v = 0);
            for &(_, i) in &order[..k] {
                votes[train_y[i]] += 1;
            }
            // max_by_key keeps the last maximum, so scan classes from high to low
            (0..=n_classes).rev().max_by_key(|&c| votes[c]).unwrap_or(0)
        })
        .collect())
}
