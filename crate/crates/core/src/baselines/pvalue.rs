use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;

/// Two-sided p-value of `f`'s coefficient in the least-squares fit of `y`
/// on `[u..., f, 1]`, from its t-statistic with `n - |u| - 2` degrees of
/// freedom. A rank-deficient design is uninformative and yields 1.
pub fn p_value(f: &[f64], u: &[&[f64]], y: &[f64]) -> Result<f64> {
    let n = y.len();
    if let Some(bad) = std::iter::once(f).chain(u.iter().copied()).find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let p = u.len() + 2;
    if n <= p {
        return Err(Error::TooFewSamples(n));
    }
    if f.iter()
        .chain(u.iter().flat_map(|c| c.iter()))
        .chain(y)
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite);
    }

    let f_col = u.len();
    let x = DMatrix::from_fn(n, p, |i, j| match j {
        j if j < f_col => u[j][i],
        j if j == f_col => f[i],
        _ => 1.0,
    });
    let svd = x.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    if !(s_max > 0.0) || svd.singular_values.min() <= RANK_TOL * s_max {
        return Ok(1.0);
    }
    let Some(vt) = &svd.v_t else {
        return Ok(1.0);
    };
    let y = DVector::from_column_slice(y);
    let beta = svd.solve(&y, 0.0).map_err(|_| Error::NonFinite)?;
    let beta_f = beta[f_col];
    // var(beta_f) = sigma^2 [(X^T X)^-1]_ff = sigma^2 sum_k (V_fk / s_k)^2
    let inv_diag: f64 = (0..p).map(|k| (vt[(k, f_col)] / svd.singular_values[k]).powi(2)).sum();
    let resid = y - &x * beta;
    let dof = (n - p) as f64;
    let se = (resid.norm_squared() / dof * inv_diag).sqrt();

    if se == 0.0 {
        return Ok(if beta_f == 0.0 { 1.0 } else { 0.0 });
    }
    let t = (beta_f / se).abs();
    let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok((2.0 * dist.sf(t)).clamp(0.0, 1.0))
}
