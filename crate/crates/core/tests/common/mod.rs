//! Shared test oracles and random instance builders.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use streamsel::baselines::GraftingModel;
use streamsel::data::Labels;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

/// Random labels over `c` classes with every class present.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, c: usize) -> Labels {
    assert!(n >= c && c >= 2);
    let mut ids: Vec<usize> = (0..n)
        .map(|i| if i < c { i + 1 } else { rng.random_range(1..=c) })
        .collect();
    for i in (1..n).rev() {
        ids.swap(i, rng.random_range(0..=i));
    }
    Labels::from_raw(&ids.iter().map(|&v| v as i64).collect::<Vec<_>>()).unwrap()
}

pub fn lasso_objective(a: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, beta: &DVector<f64>) -> f64 {
    0.5 * (y - a * beta).norm_squared() + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Exact Lasso minimum by enumerating every sign pattern in {-1, 0, +1}^m:
/// for a fixed pattern the optimum solves `A_S' A_S b = A_S' y - lambda s`,
/// and it counts only when the solution carries the assumed signs.
pub fn lasso_oracle(a: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> f64 {
    let m = a.ncols();
    let mut best = 0.5 * y.norm_squared();
    let mut pattern = vec![0i8; m];
    loop {
        // advance base-3 counter over {0, 1, -1}
        let mut k = 0;
        while k < m {
            pattern[k] = match pattern[k] {
                0 => 1,
                1 => -1,
                _ => 0,
            };
            if pattern[k] != 0 {
                break;
            }
            k += 1;
        }
        if k == m {
            return best;
        }
        let active: Vec<usize> = (0..m).filter(|&j| pattern[j] != 0).collect();
        let sub = a.select_columns(&active);
        let gram = sub.transpose() * &sub;
        let s = DVector::from_iterator(active.len(), active.iter().map(|&j| f64::from(pattern[j])));
        let rhs = sub.transpose() * y - s * lambda;
        let Some(b) = gram.lu().solve(&rhs) else { continue };
        if active
            .iter()
            .zip(b.iter())
            .all(|(&j, v)| v * f64::from(pattern[j]) > 0.0)
        {
            let mut beta = DVector::zeros(m);
            for (&j, v) in active.iter().zip(b.iter()) {
                beta[j] = *v;
            }
            best = best.min(lasso_objective(a, y, lambda, &beta));
        }
    }
}

pub fn random_design(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (DMatrix<f64>, DVector<f64>) {
    let a = DMatrix::from_fn(n, m, |_, _| gaussian(rng));
    let y = DVector::from_fn(n, |_, _| gaussian(rng));
    (a, y)
}

/// Central finite difference of the mean BNLL with respect to weight `j`.
pub fn fd_weight_gradient(y: &[f64], columns: &[Vec<f64>], weights: &[f64], bias: f64, j: usize, h: f64) -> f64 {
    let loss = |wj: f64| {
        let mut w = weights.to_vec();
        w[j] = wj;
        GraftingModel::with_parameters(y.to_vec(), columns.to_vec(), w, bias, 0.0)
            .unwrap()
            .loss()
    };
    (loss(weights[j] + h) - loss(weights[j] - h)) / (2.0 * h)
}

/// Two-sample-free KS statistic of `samples` against Uniform(0, 1).
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}
