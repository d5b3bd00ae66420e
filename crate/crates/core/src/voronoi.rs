//! Voronoi weights over a box-shaped alternative space.
//!
//! The weight of an alternative is the fraction of the space that is closer
//! to it than to any other alternative (ties split evenly). Weights are
//! estimated by uniform Monte Carlo sampling; there is no closed form beyond
//! low-dimensional geometry.

use crate::alternatives::{AlternativeSet, ContextVector};
use crate::btl::log_sigmoid;
use crate::error::{Error, Result};
use crate::solver::RewardVector;
use crate::winrate::WinRateMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default relative tolerance for projection ties. The tie set has measure
/// zero for points in general position, but exact clones must be detected.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;

/// Default Monte Carlo sample count for weight estimation.
pub const DEFAULT_WEIGHT_SAMPLES: u64 = 100_000;

/// Monte Carlo loops consume the random stream in fixed-size chunks with one
/// substream per chunk, so totals do not depend on any parallel schedule.
const CHUNK: u64 = 8192;

/// An axis-aligned box in context space with positive volume.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceBox {
    lower: ContextVector,
    upper: ContextVector,
}

impl SpaceBox {
    pub fn new(lower: ContextVector, upper: ContextVector) -> Result<Self> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch {
                expected: lower.dim(),
                got: upper.dim(),
            });
        }
        for (lo, hi) in lower.coords().iter().zip(upper.coords()) {
            if lo >= hi {
                return Err(Error::invalid(format!(
                    "box requires lower < upper in every coordinate, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit cube `[0, 1]^dim`.
    pub fn unit_cube(dim: usize) -> Result<Self> {
        Self::new(
            ContextVector::new(vec![0.0; dim])?,
            ContextVector::new(vec![1.0; dim])?,
        )
    }

    /// The smallest box containing, per coordinate, every value within a
    /// factor of two of an observed coordinate: the k-th range is
    /// `[min_i min(c/2, 2c), max_i max(c/2, 2c)]` over observed values `c`.
    ///
    /// This is one reading of "within a factor of 2"; it is degenerate when
    /// a coordinate is identically zero across the set, which is rejected.
    pub fn factor2_enclosing(set: &AlternativeSet) -> Result<Self> {
        let dim = set.dim();
        let mut lower = vec![f64::INFINITY; dim];
        let mut upper = vec![f64::NEG_INFINITY; dim];
        for ctx in set.contexts() {
            for (k, &c) in ctx.coords().iter().enumerate() {
                let (lo, hi) = ((c / 2.0).min(2.0 * c), (c / 2.0).max(2.0 * c));
                lower[k] = lower[k].min(lo);
                upper[k] = upper[k].max(hi);
            }
        }
        Self::new(ContextVector::new(lower)?, ContextVector::new(upper)?)
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &ContextVector {
        &self.lower
    }

    pub fn upper(&self) -> &ContextVector {
        &self.upper
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .coords()
            .iter()
            .zip(self.upper.coords())
            .map(|(lo, hi)| hi - lo)
            .product()
    }

    fn sample_into<R: Rng>(&self, rng: &mut R, buf: &mut [f64]) {
        for ((slot, lo), hi) in buf
            .iter_mut()
            .zip(self.lower.coords())
            .zip(self.upper.coords())
        {
            let u: f64 = rng.random();
            *slot = lo + u * (hi - lo);
        }
    }
}

/// Whether a weight vector carries the Voronoi measure (positive, summing
/// to 1) or plain unit weights (all exactly 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Voronoi,
    Unit,
}

/// Per-alternative weights, aligned with an [`AlternativeSet`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
    mode: WeightMode,
}

impl WeightVector {
    /// Voronoi-mode weights: all positive, summing to 1 within 1e-9.
    pub fn voronoi(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("weight vector must be nonempty"));
        }
        if values.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("Voronoi weights must be positive and finite"));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "Voronoi weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self {
            values,
            mode: WeightMode::Voronoi,
        })
    }

    /// Unit-mode weights: every entry exactly 1 (plain-MLE mode).
    pub fn unit(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("weight vector must be nonempty"));
        }
        Ok(Self {
            values: vec![1.0; m],
            mode: WeightMode::Unit,
        })
    }

    pub fn mode(&self) -> WeightMode {
        self.mode
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

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Unit weights for every alternative in `set`.
pub fn unit_weights(set: &AlternativeSet) -> WeightVector {
    WeightVector::unit(set.len()).expect("alternative sets are nonempty")
}

/// The alternatives nearest to a query point, with the attained distance.
/// All indices within the tie tolerance of the minimum are included.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub indices: Vec<usize>,
    pub distance: f64,
}

impl ProjectionResult {
    pub fn ids<'a>(&self, set: &'a AlternativeSet) -> Vec<&'a str> {
        self.indices.iter().map(|&i| set.id(i)).collect()
    }
}

/// Nearest alternatives to `x` in Euclidean distance. Returns every index
/// whose distance is at most `d_min * (1 + tie_tol) + tie_tol`.
pub fn project(set: &AlternativeSet, x: &ContextVector, tie_tol: f64) -> Result<ProjectionResult> {
    if x.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: x.dim(),
        });
    }
    if tie_tol < 0.0 {
        return Err(Error::invalid("tie tolerance must be nonnegative"));
    }
    let mut distances = Vec::with_capacity(set.len());
    let mut d_min = f64::INFINITY;
    for ctx in set.contexts() {
        let d = ctx.distance(x)?;
        d_min = d_min.min(d);
        distances.push(d);
    }
    let cutoff = d_min * (1.0 + tie_tol) + tie_tol;
    let indices = (0..set.len()).filter(|&i| distances[i] <= cutoff).collect();
    Ok(ProjectionResult {
        indices,
        distance: d_min,
    })
}

// Shared chunked-MC projection tally: calls `visit(chunk_rng_draws...)` once
// per sample with the sample's projection.
fn squared_distances_into(set: &AlternativeSet, point: &[f64], out: &mut [f64]) {
    for (slot, ctx) in out.iter_mut().zip(set.contexts()) {
        *slot = ctx
            .coords()
            .iter()
            .zip(point)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
    }
}

fn tied_indices(d2: &[f64], tie_tol: f64, out: &mut Vec<usize>) {
    // compare on squared distances: d <= dmin*(1+t)+t  <=>  d2 <= cutoff^2
    let d2_min = d2.iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = d2_min.sqrt() * (1.0 + tie_tol) + tie_tol;
    let cutoff2 = cutoff * cutoff;
    out.clear();
    out.extend(d2.iter().enumerate().filter(|(_, &d)| d <= cutoff2).map(|(i, _)| i));
}

/// Monte Carlo estimate of the Voronoi weights of `set` within `space`:
/// draws `n_samples` uniform points, splits each point's unit of mass evenly
/// among its nearest alternatives, and normalizes by `n_samples`.
///
/// Returns the weights and a per-weight standard error `sqrt(w(1-w)/n)`.
/// Deterministic given `(seed, n_samples)`; the sample stream is chunked
/// with one substream per chunk index.
pub fn estimate_weights(
    set: &AlternativeSet,
    space: &SpaceBox,
    n_samples: u64,
    seed: u64,
) -> Result<(WeightVector, Vec<f64>)> {
    if n_samples == 0 {
        return Err(Error::invalid("weight estimation needs n_samples >= 1"));
    }
    if space.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: space.dim(),
        });
    }
    let m = set.len();
    let mut tallies = vec![0.0f64; m];
    let mut point = vec![0.0f64; set.dim()];
    let mut d2 = vec![0.0f64; m];
    let mut ties = Vec::with_capacity(4);

    let chunks = n_samples.div_ceil(CHUNK);
    for chunk in 0..chunks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let in_chunk = CHUNK.min(n_samples - chunk * CHUNK);
        let mut chunk_tallies = vec![0.0f64; m];
        for _ in 0..in_chunk {
            space.sample_into(&mut rng, &mut point);
            squared_distances_into(set, &point, &mut d2);
            tied_indices(&d2, DEFAULT_TIE_TOL, &mut ties);
            let share = 1.0 / ties.len() as f64;
            for &i in &ties {
                chunk_tallies[i] += share;
            }
        }
        for (total, part) in tallies.iter_mut().zip(&chunk_tallies) {
            *total += part;
        }
    }

    let n = n_samples as f64;
    let weights: Vec<f64> = tallies.iter().map(|t| t / n).collect();
    if let Some(i) = weights.iter().position(|&w| w <= 0.0) {
        return Err(Error::invalid(format!(
            "alternative {:?} received no Monte Carlo mass; increase n_samples or check the space",
            set.id(i)
        )));
    }
    let std_errors = weights.iter().map(|&w| (w * (1.0 - w) / n).sqrt()).collect();
    Ok((WeightVector::voronoi(weights)?, std_errors))
}

/// The constant by which the full ordered-pair double sum (self-pairs
/// included) exceeds [`crate::solver::objective`]: each diagonal term
/// contributes `w(x)^2 * (1/2) * ln 2`.
pub fn self_pair_offset(w: &WeightVector) -> f64 {
    0.5 * std::f64::consts::LN_2 * w.values().iter().map(|v| v * v).sum::<f64>()
}

/// Monte Carlo estimate of the space-integral form of the weighted
/// objective,
/// `-(1/|S|^2) * double-integral of Lbar + (lambda / (2|S|)) * integral of
/// squared-reward`, where both integrands are evaluated through the
/// projection onto `set` (ties averaged).
///
/// Each sample draws three independent uniform points: a pair for the
/// likelihood integral and one for the regularizer integral. Returns the
/// estimate and its standard error. The estimate converges to
/// [`crate::solver::objective`] plus [`self_pair_offset`] as `n_samples`
/// grows.
pub fn integral_objective_estimate(
    rewards: &RewardVector,
    p: &WinRateMatrix,
    set: &AlternativeSet,
    space: &SpaceBox,
    lambda: f64,
    n_samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_samples == 0 {
        return Err(Error::invalid("integral estimation needs n_samples >= 1"));
    }
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::invalid("lambda must be positive"));
    }
    if rewards.len() != set.len() || p.len() != set.len() {
        return Err(Error::DimensionMismatch {
            expected: set.len(),
            got: rewards.len().min(p.len()),
        });
    }
    if space.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: space.dim(),
        });
    }

    let m = set.len();
    let mut point = vec![0.0f64; set.dim()];
    let mut d2 = vec![0.0f64; m];
    let mut proj_a = Vec::with_capacity(4);
    let mut proj_b = Vec::with_capacity(4);

    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let chunks = n_samples.div_ceil(CHUNK);
    for chunk in 0..chunks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk);
        let in_chunk = CHUNK.min(n_samples - chunk * CHUNK);
        let mut chunk_sum = 0.0f64;
        let mut chunk_sum_sq = 0.0f64;
        for _ in 0..in_chunk {
            space.sample_into(&mut rng, &mut point);
            squared_distances_into(set, &point, &mut d2);
            tied_indices(&d2, DEFAULT_TIE_TOL, &mut proj_a);

            space.sample_into(&mut rng, &mut point);
            squared_distances_into(set, &point, &mut d2);
            tied_indices(&d2, DEFAULT_TIE_TOL, &mut proj_b);

            // Lbar: tie-averaged p(x1 > x2) * log sigmoid(r(x1) - r(x2))
            let mut log_lik = 0.0;
            for &x1 in &proj_a {
                for &x2 in &proj_b {
                    log_lik += p.get(x1, x2) * log_sigmoid(rewards.get(x1) - rewards.get(x2));
                }
            }
            log_lik /= (proj_a.len() * proj_b.len()) as f64;

            space.sample_into(&mut rng, &mut point);
            squared_distances_into(set, &point, &mut d2);
            tied_indices(&d2, DEFAULT_TIE_TOL, &mut proj_a);
            let mut r_sq = 0.0;
            for &x in &proj_a {
                r_sq += rewards.get(x) * rewards.get(x);
            }
            r_sq /= proj_a.len() as f64;

            let term = -log_lik + 0.5 * lambda * r_sq;
            chunk_sum += term;
            chunk_sum_sq += term * term;
        }
        sum += chunk_sum;
        sum_sq += chunk_sum_sq;
    }

    let n = n_samples as f64;
    let mean = sum / n;
    let std_error = if n_samples > 1 {
        let variance = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
        (variance / n).sqrt()
    } else {
        0.0
    };
    Ok((mean, std_error))
}
