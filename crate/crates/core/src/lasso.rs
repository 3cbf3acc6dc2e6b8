//! L1-regularized least squares by feature-sign search.
//!
//! Minimizes `1/2 ||y - A b||^2 + lambda ||b||_1`. The solver keeps an active
//! set with a guessed sign per coefficient, solves the sign-restricted
//! quadratic in closed form and moves towards it with an exact line search
//! over the piecewise-quadratic true objective. The result is certified by
//! its KKT residual:
//!
//! * `b_j != 0`: `|A_j' r - lambda sign(b_j)| <= tol`
//! * `b_j == 0`: `|A_j' r| <= lambda + tol`
//!
//! with `r = y - A b`.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 0.3;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionProblem {
    /// `n x m`, one column per candidate feature.
    pub design: DMatrix<f64>,
    pub targets: DVector<f64>,
    pub lambda: f64,
}

impl RegressionProblem {
    pub fn new(design: DMatrix<f64>, targets: DVector<f64>, lambda: f64) -> Result<Self> {
        if design.nrows() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: design.nrows(),
                found: targets.len(),
            });
        }
        if !(lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(Self {
            design,
            targets,
            lambda,
        })
    }

    /// Builds the design from feature columns of equal length.
    pub fn from_columns(columns: &[&[f64]], targets: &[f64], lambda: f64) -> Result<Self> {
        let n = targets.len();
        for c in columns {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.len(),
                });
            }
        }
        let design = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
        Self::new(design, DVector::from_column_slice(targets), lambda)
    }

    pub fn n_coefficients(&self) -> usize {
        self.design.ncols()
    }

    fn residual(&self, beta: &DVector<f64>) -> DVector<f64> {
        &self.targets - &self.design * beta
    }

    pub fn objective(&self, beta: &[f64]) -> f64 {
        let b = DVector::from_column_slice(beta);
        0.5 * self.residual(&b).norm_squared() + self.lambda * b.lp_norm(1)
    }

    /// Largest KKT residual of `beta`.
    pub fn kkt_violation(&self, beta: &[f64]) -> f64 {
        let b = DVector::from_column_slice(beta);
        let corr = self.design.tr_mul(&self.residual(&b));
        beta.iter()
            .zip(corr.iter())
            .map(|(&bj, &cj)| {
                if bj != 0.0 {
                    (cj - self.lambda * bj.signum()).abs()
                } else {
                    (cj.abs() - self.lambda).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// `||A' y||_inf`, the smallest lambda with an all-zero solution.
    pub fn lambda_max(&self) -> f64 {
        self.design.tr_mul(&self.targets).amax()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    pub beta: Vec<f64>,
    pub objective: f64,
    pub kkt_violation: f64,
    pub iterations: usize,
    /// `kkt_violation <= tol`. An uncertified solution is the best iterate
    /// reached within the iteration budget.
    pub certified: bool,
    /// Objective after every solver step, starting at `beta = 0`.
    pub objective_history: Vec<f64>,
}

impl SparseSolution {
    pub fn support(&self, zero_tol: f64) -> Vec<usize> {
        support(&self.beta, zero_tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// Defaults to `10 m (1 + n)` steps.
    pub max_iterations: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iterations: None,
        }
    }
}

/// Indices with `|beta_j| > zero_tol`, in order.
pub fn support(beta: &[f64], zero_tol: f64) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| b.abs() > zero_tol)
        .map(|(j, _)| j)
        .collect()
}

pub fn lasso_solve(problem: &RegressionProblem, tol: f64) -> Result<SparseSolution> {
    lasso_solve_with(
        problem,
        SolverOptions {
            tol,
            ..Default::default()
        },
    )
}

pub fn lasso_solve_with(problem: &RegressionProblem, options: SolverOptions) -> Result<SparseSolution> {
    if !(options.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            options.tol
        )));
    }
    if problem
        .design
        .iter()
        .chain(problem.targets.iter())
        .any(|v| !v.is_finite())
        || !problem.lambda.is_finite()
    {
        return Err(Error::NonFinite);
    }
    let (n, m) = problem.design.shape();
    let max_iterations = options.max_iterations.unwrap_or(10 * m * (1 + n)).max(1);
    let mut solver = FeatureSign::new(problem, options.tol);
    solver.run(max_iterations);

    let beta: Vec<f64> = solver.beta.iter().copied().collect();
    let kkt_violation = problem.kkt_violation(&beta);
    Ok(SparseSolution {
        objective: problem.objective(&beta),
        certified: kkt_violation <= options.tol,
        kkt_violation,
        iterations: solver.iterations,
        objective_history: solver.history,
        beta,
    })
}

struct FeatureSign<'p> {
    p: &'p RegressionProblem,
    beta: DVector<f64>,
    signs: Vec<f64>,
    active: Vec<usize>,
    /// activation and nonzero-optimality slack, a fraction of the KKT tolerance
    slack: f64,
    iterations: usize,
    history: Vec<f64>,
}

impl<'p> FeatureSign<'p> {
    fn new(p: &'p RegressionProblem, tol: f64) -> Self {
        let m = p.design.ncols();
        Self {
            p,
            beta: DVector::zeros(m),
            signs: vec![0.0; m],
            active: Vec::new(),
            slack: 0.1 * tol,
            iterations: 0,
            history: vec![0.5 * p.targets.norm_squared()],
        }
    }

    fn objective(&self) -> f64 {
        0.5 * self.p.residual(&self.beta).norm_squared() + self.p.lambda * self.beta.lp_norm(1)
    }

    /// Gradient of the smooth part, `A'(A b - y)`.
    fn gradient(&self) -> DVector<f64> {
        -self.p.design.tr_mul(&self.p.residual(&self.beta))
    }

    fn nonzero_optimal(&self, g: &DVector<f64>) -> bool {
        self.active
            .iter()
            .all(|&j| (g[j] + self.p.lambda * self.signs[j]).abs() <= self.slack)
    }

    fn run(&mut self, max_iterations: usize) {
        'outer: loop {
            let g = self.gradient();
            let candidate = (0..self.beta.len())
                .filter(|&j| self.beta[j] == 0.0)
                .max_by(|&a, &b| g[a].abs().total_cmp(&g[b].abs()));
            match candidate {
                Some(i) if g[i].abs() > self.p.lambda + self.slack => {
                    self.signs[i] = -g[i].signum();
                    self.active.push(i);
                }
                _ => return,
            }
            loop {
                if self.iterations >= max_iterations {
                    return;
                }
                self.iterations += 1;
                if !self.feature_sign_step() && !self.coordinate_sweep() {
                    // fixed point of the coordinate map: nothing left to improve
                    return;
                }
                self.sync_active();
                self.history.push(self.objective());
                let g = self.gradient();
                if self.nonzero_optimal(&g) {
                    continue 'outer;
                }
            }
        }
    }

    /// Solves the sign-restricted quadratic on the active set and line
    /// searches towards it. Returns false when no progress was made.
    fn feature_sign_step(&mut self) -> bool {
        let a = &self.active;
        if a.is_empty() {
            return false;
        }
        let sub = self.p.design.select_columns(a.iter());
        let gram = sub.tr_mul(&sub);
        let rhs = sub.tr_mul(&self.p.targets)
            - DVector::from_iterator(a.len(), a.iter().map(|&j| self.p.lambda * self.signs[j]));
        let target = match gram.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => match SVD::new(gram, true, true).solve(&rhs, 1e-12) {
                Ok(x) => x,
                Err(_) => return false,
            },
        };
        let mut direction = DVector::zeros(self.beta.len());
        for (k, &j) in a.iter().enumerate() {
            direction[j] = target[k] - self.beta[j];
        }
        if direction.amax() == 0.0 {
            return false;
        }
        let t = self.line_search(&direction);
        if t <= 0.0 {
            return false;
        }
        let before = self.objective();
        let mut next = &self.beta + &direction * t;
        // coefficients whose sign flips exactly at t land on zero
        for &j in a.iter() {
            if direction[j] != 0.0 && ((-self.beta[j] / direction[j]) - t).abs() <= 1e-14 * t.max(1.0) {
                next[j] = 0.0;
            }
        }
        let prev = std::mem::replace(&mut self.beta, next);
        if self.objective() > before {
            self.beta = prev;
            return false;
        }
        true
    }

    /// Exact minimizer over `t in [0, 1]` of the objective along `beta + t d`.
    fn line_search(&self, d: &DVector<f64>) -> f64 {
        let r0 = self.p.residual(&self.beta);
        let q = &self.p.design * d;
        let rq = r0.dot(&q);
        let qq = q.norm_squared();
        let lambda = self.p.lambda;
        let phi = |t: f64| -> f64 {
            let l1: f64 = self.beta.iter().zip(d.iter()).map(|(b, dj)| (b + t * dj).abs()).sum();
            -t * rq + 0.5 * t * t * qq + lambda * l1
        };

        let mut knots: Vec<f64> = self
            .beta
            .iter()
            .zip(d.iter())
            .filter(|(_, dj)| **dj != 0.0)
            .map(|(b, dj)| -b / dj)
            .filter(|t| *t > 0.0 && *t < 1.0)
            .collect();
        knots.push(0.0);
        knots.push(1.0);
        knots.sort_by(f64::total_cmp);
        knots.dedup();

        let mut best_t = 0.0;
        let mut best = phi(0.0);
        for w in knots.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let slope: f64 = self
                .beta
                .iter()
                .zip(d.iter())
                .map(|(b, dj)| (b + mid * dj).signum() * dj)
                .sum::<f64>()
                * lambda;
            let mut cands = vec![lo, hi];
            if qq > 0.0 {
                cands.push(((rq - slope) / qq).clamp(lo, hi));
            }
            for t in cands {
                let v = phi(t);
                if v < best {
                    best = v;
                    best_t = t;
                }
            }
        }
        best_t
    }

    /// One cyclic coordinate-descent pass; never increases the objective.
    /// Returns whether any coefficient changed.
    fn coordinate_sweep(&mut self) -> bool {
        let mut changed = false;
        let mut r = self.p.residual(&self.beta);
        for j in 0..self.beta.len() {
            let col = self.p.design.column(j);
            let sq = col.norm_squared();
            if sq == 0.0 {
                continue;
            }
            let z = col.dot(&r) + sq * self.beta[j];
            let updated = soft_threshold(z, self.p.lambda) / sq;
            let delta = updated - self.beta[j];
            if delta != 0.0 {
                r.axpy(-delta, &col, 1.0);
                self.beta[j] = updated;
                changed = true;
            }
        }
        changed
    }

    fn sync_active(&mut self) {
        self.active.clear();
        for j in 0..self.beta.len() {
            if self.beta[j] != 0.0 {
                self.active.push(j);
                self.signs[j] = self.beta[j].signum();
            } else {
                self.signs[j] = 0.0;
            }
        }
    }
}

pub(crate) fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(rows: &[&[f64]], y: &[f64], lambda: f64) -> RegressionProblem {
        let n = rows.len();
        let m = rows[0].len();
        let a = DMatrix::from_fn(n, m, |i, j| rows[i][j]);
        RegressionProblem::new(a, DVector::from_column_slice(y), lambda).unwrap()
    }

    #[test]
    fn large_lambda_gives_zero() {
        let p = problem(&[&[1.0, 0.5], &[0.2, -1.0], &[0.3, 0.3]], &[1.0, -2.0, 0.5], 0.0);
        let lmax = p.lambda_max();
        let p = RegressionProblem { lambda: lmax, ..p };
        let s = lasso_solve(&p, 1e-6).unwrap();
        assert!(s.beta.iter().all(|&b| b == 0.0));
        assert!(s.certified);
    }

    #[test]
    fn single_column_soft_threshold() {
        let p = problem(&[&[1.0], &[0.0]], &[2.0, 0.0], 0.5);
        let s = lasso_solve(&p, 1e-6).unwrap();
        assert!((s.beta[0] - 1.5).abs() < 1e-12);
        assert!(s.certified);
    }

    #[test]
    fn identity_design() {
        let p = problem(&[&[1.0, 0.0], &[0.0, 1.0]], &[3.0, 1.0], 0.5);
        let s = lasso_solve(&p, 1e-6).unwrap();
        assert!((s.beta[0] - 2.5).abs() < 1e-12 && (s.beta[1] - 0.5).abs() < 1e-12);
        assert!(s.kkt_violation <= 1e-10);
    }

    #[test]
    fn duplicate_columns_certified() {
        let c = [0.6, -0.8, 0.0];
        let p = problem(&[&[c[0], c[0]], &[c[1], c[1]], &[c[2], c[2]]], &[1.0, -1.0, 0.3], 0.1);
        let s = lasso_solve(&p, 1e-6).unwrap();
        assert!(s.certified, "{s:?}");
        assert!((s.beta[0] + s.beta[1] - 1.3).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let p = problem(&[&[f64::NAN]], &[1.0], 0.1);
        assert!(matches!(lasso_solve(&p, 1e-6), Err(Error::NonFinite)));
        let p = problem(&[&[1.0]], &[1.0], 0.1);
        assert!(lasso_solve(&p, 0.0).is_err());
        assert!(RegressionProblem::new(DMatrix::zeros(2, 1), DVector::zeros(3), 0.1).is_err());
        assert!(RegressionProblem::new(DMatrix::zeros(2, 1), DVector::zeros(2), -0.1).is_err());
    }

    #[test]
    fn support_thresholding() {
        assert_eq!(support(&[0.0, 1.5, -0.2], 1e-8), vec![1, 2]);
        assert!(support(&[0.0, 0.0], 1e-8).is_empty());
        assert_eq!(support(&[1e-12, 2.0], 1e-8), vec![1]);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let p = problem(
            &[&[1.0, 0.9, 0.1], &[0.2, 0.3, 1.0], &[0.5, 0.4, -0.7], &[0.1, 0.9, 0.2]],
            &[1.0, 2.0, -1.0, 0.5],
            0.01,
        );
        let s = lasso_solve_with(
            &p,
            SolverOptions {
                tol: 1e-12,
                max_iterations: Some(1),
            },
        )
        .unwrap();
        assert_eq!(s.iterations, 1);
        assert!(!s.certified);
        assert!(s.objective.is_finite());
    }
}
