//! Win-rate scores and the M-estimator view of the solver output.
//!
//! A solved reward vector satisfies, per alternative, a moment condition
//! equating the empirical (weighted) average win rate to a regularization
//! term plus the model-implied (weighted) average win rate. The residuals of
//! that system certify a solve and tie the reward ranking to the win-rate
//! ranking.

use crate::btl::sigmoid;
use crate::error::{Error, Result};
use crate::solver::RewardVector;
use crate::voronoi::{WeightMode, WeightVector};
use crate::winrate::WinRateMatrix;

/// Tie tolerance for ranking comparisons.
pub const RANKING_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    AverageWinRate,
    WeightedAverageWinRate,
    Borda,
    ModelAverageWinRate,
    ModelWeightedAverageWinRate,
    Residual,
}

/// A per-alternative score column.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub kind: ScoreKind,
    values: Vec<f64>,
}

impl ScoreVector {
    fn new(kind: ScoreKind, values: Vec<f64>) -> Self {
        Self { kind, values }
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

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

/// `AWR(x) = (1/m) sum_y p(x > y)`, the diagonal 1/2 included.
pub fn average_win_rate(p: &WinRateMatrix) -> ScoreVector {
    let m = p.len();
    let values = (0..m)
        .map(|x| (0..m).map(|y| p.get(x, y)).sum::<f64>() / m as f64)
        .collect();
    ScoreVector::new(ScoreKind::AverageWinRate, values)
}

/// `Borda(x) = sum_y p(x > y)`, the diagonal 1/2 included.
pub fn borda_count(p: &WinRateMatrix) -> ScoreVector {
    let m = p.len();
    let values = (0..m)
        .map(|x| (0..m).map(|y| p.get(x, y)).sum::<f64>())
        .collect();
    ScoreVector::new(ScoreKind::Borda, values)
}

/// `wAWR(x) = sum_y w(y) p(x > y)` under the Voronoi measure. Unit-mode
/// weights are rejected: the definition averages against a probability
/// measure over alternatives.
pub fn weighted_average_win_rate(p: &WinRateMatrix, w: &WeightVector) -> Result<ScoreVector> {
    if w.mode() != WeightMode::Voronoi {
        return Err(Error::invalid(
            "weighted average win rate requires Voronoi-mode weights",
        ));
    }
    let m = p.len();
    if w.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: w.len(),
        });
    }
    let values = (0..m)
        .map(|x| (0..m).map(|y| w.get(y) * p.get(x, y)).sum::<f64>())
        .collect();
    Ok(ScoreVector::new(ScoreKind::WeightedAverageWinRate, values))
}

/// Model-implied win-rate score of a reward vector:
/// `sum_y omega(y) sigmoid(r(x) - r(y))`, where `omega` is `1/m` for unit
/// weights and the Voronoi measure otherwise. The diagonal contributes
/// `omega(x) / 2`.
pub fn model_win_rate(r: &RewardVector, w: &WeightVector) -> Result<ScoreVector> {
    let m = r.len();
    if w.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: w.len(),
        });
    }
    let (kind, omega): (ScoreKind, Box<dyn Fn(usize) -> f64>) = match w.mode() {
        WeightMode::Unit => (
            ScoreKind::ModelAverageWinRate,
            Box::new(move |_| 1.0 / m as f64),
        ),
        WeightMode::Voronoi => (
            ScoreKind::ModelWeightedAverageWinRate,
            Box::new(|y| w.get(y)),
        ),
    };
    let values = (0..m)
        .map(|x| {
            (0..m)
                .map(|y| omega(y) * sigmoid(r.get(x) - r.get(y)))
                .sum::<f64>()
        })
        .collect();
    Ok(ScoreVector::new(kind, values))
}

/// Residuals of the stationarity system, scaled to the win-rate form.
///
/// Voronoi mode: `wAWR(x) - lambda r(x) - model_wAWR(x)`; unit mode:
/// `AWR(x) - (lambda/m) r(x) - model_AWR(x)` (the per-coordinate gradient
/// divided by `w(x)` and, for unit weights, by the extra factor `m` that the
/// 1/m win-rate normalization introduces). Vanishes at the exact minimizer.
pub fn m_estimator_residual(
    r: &RewardVector,
    p: &WinRateMatrix,
    w: &WeightVector,
    lambda: f64,
) -> Result<ScoreVector> {
    let m = p.len();
    if r.len() != m || w.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: r.len().min(w.len()),
        });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda must be positive"));
    }
    let model = model_win_rate(r, w)?;
    let (empirical, reg_scale) = match w.mode() {
        WeightMode::Unit => (average_win_rate(p), lambda / m as f64),
        WeightMode::Voronoi => (weighted_average_win_rate(p, w)?, lambda),
    };
    let values = (0..m)
        .map(|x| empirical.get(x) - reg_scale * r.get(x) - model.get(x))
        .collect();
    Ok(ScoreVector::new(ScoreKind::Residual, values))
}

/// Checks that rewards and scores order the alternatives identically:
/// for all pairs, `r(x) >= r(y)` iff `score(x) >= score(y)`, ties compared
/// under [`RANKING_TIE_TOL`]. On failure returns the first violating pair.
pub fn ranking_consistency(
    r: &RewardVector,
    scores: &ScoreVector,
) -> Result<(bool, Option<(usize, usize)>)> {
    let m = r.len();
    if scores.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: scores.len(),
        });
    }
    for x in 0..m {
        for y in (x + 1)..m {
            let dr = r.get(x) - r.get(y);
            let ds = scores.get(x) - scores.get(y);
            let r_order = if dr.abs() <= RANKING_TIE_TOL {
                0
            } else if dr > 0.0 {
                1
            } else {
                -1
            };
            let s_order = if ds.abs() <= RANKING_TIE_TOL {
                0
            } else if ds > 0.0 {
                1
            } else {
                -1
            };
            if r_order * s_order == -1 {
                return Ok((false, Some((x, y))));
            }
        }
    }
    Ok((true, None))
}

/// Indices sorted by descending value, ties broken by index.
pub fn ranking(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}
