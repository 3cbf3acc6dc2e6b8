//! Supervised between/within-class affinity graphs and the scatter scores
//! derived from their Laplacians.
//!
//! For labels `y` with class sizes `n_l`:
//!
//! * within-class affinity `(S_w)ij = 1/n_l` when `y_i = y_j = l`, else `0`;
//! * between-class affinity `(S_b)ij = 1/n - 1/n_l` when `y_i = y_j = l`, else `1/n`;
//! * Laplacians `L = D - S` with `D = diag(S 1)`.
//!
//! For a feature vector `f`, `f' L_w f` is the within-class scatter
//! `sum_l sum_{i in l} (f_i - mu_l)^2` and `f' L_b f` the between-class scatter
//! `sum_l n_l (mu_l - mu)^2`. The pairwise form of the quadratic is
//! `1/2 sum_ij (f_i - f_j)^2 S_ij`; any constant factor cancels in the score
//! ratios below.
//!
//! The dense matrices are O(n^2) and only back the oracle path;
//! [`scatter_pair`] computes the same two numbers in O(n).

use nalgebra::{DMatrix, DVector, Scalar};
use num_traits::{FromPrimitive, Num};

use crate::data::Labels;
use crate::error::{Error, Result};

/// Guard added to within-class scatter in score denominators.
pub const DEFAULT_DELTA: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-10;
const NEGATIVE_TOL: f64 = 1e-9;

/// Between- and within-class affinity matrices over any numeric scalar;
/// exact rationals are useful for checking identities.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinities<T: Scalar> {
    pub s_b: DMatrix<T>,
    pub s_w: DMatrix<T>,
    pub class_sizes: Vec<usize>,
}

pub type AffinityPair = Affinities<f64>;

pub fn build_affinities(labels: &Labels) -> AffinityPair {
    build_affinities_in(labels)
}

pub fn build_affinities_in<T>(labels: &Labels) -> Affinities<T>
where
    T: Scalar + Num + FromPrimitive,
{
    let ids = labels.ids();
    let n = ids.len();
    let inv = |k: usize| T::one() / T::from_usize(k).expect("size representable");
    let inv_n = inv(n);
    let inv_class: Vec<T> = labels.class_sizes().iter().map(|&k| inv(k)).collect();

    let s_w = DMatrix::from_fn(n, n, |i, j| {
        if ids[i] == ids[j] {
            inv_class[ids[i] - 1].clone()
        } else {
            T::zero()
        }
    });
    let s_b = DMatrix::from_fn(n, n, |i, j| {
        if ids[i] == ids[j] {
            inv_n.clone() - inv_class[ids[i] - 1].clone()
        } else {
            inv_n.clone()
        }
    });
    Affinities {
        s_b,
        s_w,
        class_sizes: labels.class_sizes().to_vec(),
    }
}

fn check_square(s: &DMatrix<f64>) -> Result<()> {
    if s.nrows() != s.ncols() {
        return Err(Error::NonSquare {
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    Ok(())
}

/// Row sums of an affinity matrix, the diagonal of its degree matrix.
pub fn degree_matrix(s: &DMatrix<f64>) -> Result<DVector<f64>> {
    check_square(s)?;
    Ok(DVector::from_iterator(
        s.nrows(),
        s.row_iter().map(|r| r.iter().sum::<f64>()),
    ))
}

/// `L = diag(S 1) - S`.
pub fn laplacian(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(s)?;
    let asym = (s - s.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::Asymmetric(asym));
    }
    let degree = degree_matrix(s)?;
    Ok(DMatrix::from_diagonal(&degree) - s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPair {
    pub l_b: DMatrix<f64>,
    pub l_w: DMatrix<f64>,
    pub d_b: DVector<f64>,
    pub d_w: DVector<f64>,
}

impl LaplacianPair {
    pub fn from_affinities(pair: &AffinityPair) -> Result<Self> {
        Ok(Self {
            l_b: laplacian(&pair.s_b)?,
            l_w: laplacian(&pair.s_w)?,
            d_b: degree_matrix(&pair.s_b)?,
            d_w: degree_matrix(&pair.s_w)?,
        })
    }

    pub fn from_labels(labels: &Labels) -> Result<Self> {
        Self::from_affinities(&build_affinities(labels))
    }
}

/// Dense `f' L f`.
pub fn quadratic_form(f: &[f64], l: &DMatrix<f64>) -> Result<f64> {
    check_square(l)?;
    if f.len() != l.nrows() {
        return Err(Error::DimensionMismatch {
            expected: l.nrows(),
            found: f.len(),
        });
    }
    let v = DVector::from_column_slice(f);
    Ok(v.dot(&(l * &v)))
}

/// Between-class (`b`) and within-class (`w`) scatter of one feature.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScatterPair {
    pub between: f64,
    pub within: f64,
}

impl ScatterPair {
    /// `b / (w + delta)`.
    pub fn score(&self, delta: f64) -> f64 {
        self.between / (self.within + delta)
    }
}

/// Closed-form scatter pair in O(n); equals the Laplacian quadratic forms.
pub fn scatter_pair(f: &[f64], labels: &Labels) -> Result<ScatterPair> {
    let ids = labels.ids();
    if f.len() != ids.len() {
        return Err(Error::DimensionMismatch {
            expected: ids.len(),
            found: f.len(),
        });
    }
    let sizes = labels.class_sizes();
    let mut sums = vec![0.0; sizes.len()];
    for (&v, &id) in f.iter().zip(ids) {
        sums[id - 1] += v;
    }
    let n = f.len() as f64;
    let mean = sums.iter().sum::<f64>() / n;
    let class_means: Vec<f64> = sums.iter().zip(sizes).map(|(s, &k)| s / k as f64).collect();

    let within = f
        .iter()
        .zip(ids)
        .map(|(&v, &id)| (v - class_means[id - 1]).powi(2))
        .sum();
    let between = class_means
        .iter()
        .zip(sizes)
        .map(|(m, &k)| k as f64 * (m - mean).powi(2))
        .sum();
    Ok(ScatterPair { between, within })
}

/// Per-feature spectral score `b / (w + delta)` with the default guard.
pub fn feature_score(f: &[f64], labels: &Labels) -> Result<f64> {
    Ok(scatter_pair(f, labels)?.score(DEFAULT_DELTA))
}

/// Trace-ratio score of a subset from its accumulated scatters. For a 0/1
/// selector the trace ratio reduces to `sum b / sum w`; the empty subset
/// scores 0.
pub fn subset_score(sum_b: f64, sum_w: f64, delta: f64) -> Result<f64> {
    for v in [sum_b, sum_w] {
        if v < -NEGATIVE_TOL {
            return Err(Error::NegativeAccumulator(v));
        }
    }
    Ok(sum_b / (sum_w + delta))
}
