//! The weighted regularized-MLE objective, its analytic gradient, and a
//! convergent first-order solver.
//!
//! The objective over rewards `r` is
//!
//! ```text
//! f(r) = - sum_{x1 != x2} w(x1) w(x2) p(x1 > x2) log sigmoid(r(x1) - r(x2))
//!        + (lambda / 2) sum_x w(x) r(x)^2
//! ```
//!
//! summed over ordered pairs. Self-pairs are omitted: each would add the
//! constant `w(x)^2 (1/2) ln 2`, which does not move the argmin (see
//! [`crate::voronoi::self_pair_offset`]). Unit weights recover the plain
//! regularized MLE; Voronoi weights give the clone-robust variant.
//!
//! With any positive `lambda` and positive weights the objective is strongly
//! convex with parameter `lambda * min w`, so the minimizer is unique and a
//! gradient norm certifies an error radius around it.

use crate::btl::{log_sigmoid, sigmoid};
use crate::error::{Error, NonConvergence, Result};
use crate::voronoi::WeightVector;
use crate::winrate::WinRateMatrix;

/// A finite reward per alternative, aligned with an alternative-set order.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardVector {
    values: Vec<f64>,
}

impl RewardVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("reward vector must be nonempty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("reward values must be finite"));
        }
        Ok(Self { values })
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(vec![0.0; m])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the largest reward (first one on exact ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn max_abs_diff(&self, other: &RewardVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Starting point for the solver.
#[derive(Debug, Clone, Default)]
pub enum Initial {
    #[default]
    Zeros,
    Warm(RewardVector),
}

/// Solver configuration. `lambda` must be positive: the likelihood term
/// alone has no finite minimizer.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub lambda: f64,
    /// Stop once the gradient sup-norm falls below this.
    pub grad_tol: f64,
    pub max_iters: u64,
    pub initial: Initial,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            grad_tol: 1e-9,
            max_iters: 200_000,
            initial: Initial::Zeros,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }
}

/// Convergence certificate for a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: u64,
    pub objective: f64,
    pub grad_sup_norm: f64,
    /// `||grad||_2 / (lambda * min w)`: by strong convexity the minimizer
    /// lies within this Euclidean distance of the returned iterate.
    pub error_radius: f64,
}

fn check_shapes(m: usize, w: &WeightVector, lambda: f64) -> Result<()> {
    if w.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: w.len(),
        });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// The weighted objective at `r` (ordered pairs, self-pairs excluded).
pub fn objective(
    r: &RewardVector,
    p: &WinRateMatrix,
    w: &WeightVector,
    lambda: f64,
) -> Result<f64> {
    let m = p.len();
    check_shapes(m, w, lambda)?;
    if r.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: r.len(),
        });
    }
    let mut neg_log_lik = 0.0;
    for x1 in 0..m {
        for x2 in 0..m {
            if x1 == x2 {
                continue;
            }
            neg_log_lik -=
                w.get(x1) * w.get(x2) * p.get(x1, x2) * log_sigmoid(r.get(x1) - r.get(x2));
        }
    }
    let penalty: f64 = (0..m).map(|x| w.get(x) * r.get(x) * r.get(x)).sum();
    Ok(neg_log_lik + 0.5 * lambda * penalty)
}

/// Analytic gradient of [`objective`]: component `x` is
/// `lambda w(x) r(x) + sum_{y != x} w(x) w(y) (sigmoid(r(x) - r(y)) - p(x > y))`.
pub fn gradient(
    r: &RewardVector,
    p: &WinRateMatrix,
    w: &WeightVector,
    lambda: f64,
) -> Result<Vec<f64>> {
    let m = p.len();
    check_shapes(m, w, lambda)?;
    if r.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: r.len(),
        });
    }
    let mut g = vec![0.0; m];
    for (x, slot) in g.iter_mut().enumerate() {
        let mut acc = lambda * w.get(x) * r.get(x);
        for y in 0..m {
            if y == x {
                continue;
            }
            acc += w.get(x) * w.get(y) * (sigmoid(r.get(x) - r.get(y)) - p.get(x, y));
        }
        *slot = acc;
    }
    Ok(g)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// Armijo parameters: sufficient-decrease constant, step shrink factor,
// initial trial step.
const ARMIJO_C: f64 = 1e-4;
const ARMIJO_SHRINK: f64 = 0.5;
const ARMIJO_INITIAL_STEP: f64 = 1.0;
const ARMIJO_MAX_BACKTRACKS: u32 = 60;

/// Gershgorin bound on the largest Hessian eigenvalue:
/// `H_xx = lambda w(x) + sum_{y!=x} w(x) w(y) sigma'`, off-diagonal
/// `-w(x) w(y) sigma'`, and `sigma' <= 1/4`, so every row sums below
/// `w(x) (lambda + sum_y w(y) / 2)`.
fn smoothness_bound(w: &WeightVector, lambda: f64) -> f64 {
    let w_max = w.values().iter().copied().fold(0.0, f64::max);
    w_max * (lambda + 0.5 * w.sum())
}

/// Minimize the weighted objective by gradient descent with Armijo
/// backtracking. Returns once the gradient sup-norm is at most
/// `config.grad_tol`, or fails with a non-convergence error carrying the
/// best iterate.
pub fn solve(
    p: &WinRateMatrix,
    w: &WeightVector,
    config: &SolverConfig,
) -> Result<(RewardVector, SolveReport)> {
    let m = p.len();
    check_shapes(m, w, config.lambda)?;
    if !config.grad_tol.is_finite() || config.grad_tol <= 0.0 {
        return Err(Error::invalid("grad_tol must be positive"));
    }
    let mut r = match &config.initial {
        Initial::Zeros => RewardVector::zeros(m)?,
        Initial::Warm(r0) => {
            if r0.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: r0.len(),
                });
            }
            r0.clone()
        }
    };
    let strong_convexity = config.lambda * w.min();
    // At or below this step the Armijo condition holds analytically; near
    // the minimum the decrease c*t*||g||^2 underflows the objective's
    // floating-point resolution, so the numeric test alone would stall.
    let safe_step = 1.0 / smoothness_bound(w, config.lambda);

    let mut f_current = objective(&r, p, w, config.lambda)?;
    let mut iterations = 0;
    while iterations < config.max_iters {
        let g = gradient(&r, p, w, config.lambda)?;
        let g_sup = sup_norm(&g);
        if g_sup <= config.grad_tol {
            let report = SolveReport {
                iterations,
                objective: f_current,
                grad_sup_norm: g_sup,
                error_radius: l2_norm(&g) / strong_convexity,
            };
            return Ok((r, report));
        }

        let g_sq = g.iter().map(|x| x * x).sum::<f64>();
        let mut step = ARMIJO_INITIAL_STEP;
        for _ in 0..ARMIJO_MAX_BACKTRACKS {
            let candidate = RewardVector::new(
                r.values()
                    .iter()
                    .zip(&g)
                    .map(|(ri, gi)| ri - step * gi)
                    .collect(),
            )?;
            let f_candidate = objective(&candidate, p, w, config.lambda)?;
            if step <= safe_step || f_candidate <= f_current - ARMIJO_C * step * g_sq {
                r = candidate;
                f_current = f_candidate;
                break;
            }
            step *= ARMIJO_SHRINK;
        }
        iterations += 1;
    }

    let g = gradient(&r, p, w, config.lambda)?;
    let report = SolveReport {
        iterations,
        objective: f_current,
        grad_sup_norm: sup_norm(&g),
        error_radius: l2_norm(&g) / strong_convexity,
    };
    Err(Error::NonConvergence(Box::new(NonConvergence {
        rewards: r,
        report,
    })))
}

/// A-priori magnitude bound on the minimizer from the objective value at
/// zero: `(lambda/2) w(y) rhat(y)^2 <= f(rhat) <= f(0)` gives
/// `|rhat(y)| <= sqrt(2 f(0) / (lambda w(y)))` per alternative.
pub fn reward_bound(w: &WeightVector, lambda: f64, f_at_zero: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda must be positive"));
    }
    if f_at_zero < 0.0 || !f_at_zero.is_finite() {
        return Err(Error::invalid("objective at zero must be finite and nonnegative"));
    }
    w.values()
        .iter()
        .map(|&wy| {
            if wy <= 0.0 {
                return Err(Error::invalid("weights must be positive"));
            }
            Ok((2.0 * f_at_zero / (lambda * wy)).sqrt())
        })
        .collect()
}
