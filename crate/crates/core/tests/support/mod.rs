//! Shared helpers and independent oracles for the integration suites.
//! Everything here recomputes expected values without touching the code
//! paths under test.

// each integration binary compiles this module separately and uses a
// different subset of it
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use voromle_core::voronoi::DEFAULT_TIE_TOL;
use voromle_core::{
    objective, project, AlternativeSet, ContextVector, RewardVector, SpaceBox, WeightVector,
    WinRateMatrix,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random valid win-rate matrix with entries away from the extremes.
pub fn random_matrix(m: usize, rng: &mut ChaCha8Rng) -> WinRateMatrix {
    let mut p = vec![0.5; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v: f64 = rng.random_range(0.05..0.95);
            p[i * m + j] = v;
            p[j * m + i] = 1.0 - v;
        }
    }
    WinRateMatrix::from_probabilities(m, p, None).unwrap()
}

/// Random Voronoi-mode weights bounded away from zero.
pub fn random_voronoi_weights(m: usize, rng: &mut ChaCha8Rng) -> WeightVector {
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    WeightVector::voronoi(raw.iter().map(|v| v / sum).collect()).unwrap()
}

pub fn random_rewards(m: usize, scale: f64, rng: &mut ChaCha8Rng) -> RewardVector {
    RewardVector::new((0..m).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

/// Central finite differences of the weighted objective (h = 1e-5).
pub fn finite_difference_gradient(
    r: &RewardVector,
    p: &WinRateMatrix,
    w: &WeightVector,
    lambda: f64,
) -> Vec<f64> {
    let h = 1e-5;
    let mut g = vec![0.0; r.len()];
    for i in 0..r.len() {
        let mut plus = r.values().to_vec();
        plus[i] += h;
        let mut minus = r.values().to_vec();
        minus[i] -= h;
        let f_plus = objective(&RewardVector::new(plus).unwrap(), p, w, lambda).unwrap();
        let f_minus = objective(&RewardVector::new(minus).unwrap(), p, w, lambda).unwrap();
        g[i] = (f_plus - f_minus) / (2.0 * h);
    }
    g
}

/// Deterministic grid quadrature of the Voronoi weights on a 2-D box:
/// classifies `n x n` cell centers through `project`, splitting ties evenly.
/// Bias is on the order of the total cell-boundary length times the cell
/// width, well under 1e-3 at n = 2000 for unit-scale instances.
pub fn grid_quadrature_weights(set: &AlternativeSet, space: &SpaceBox, n: usize) -> Vec<f64> {
    assert_eq!(set.dim(), 2, "grid oracle is 2-D only");
    let (lo, hi) = (space.lower().coords(), space.upper().coords());
    let mut tallies = vec![0.0f64; set.len()];
    for i in 0..n {
        for j in 0..n {
            let x = lo[0] + (i as f64 + 0.5) * (hi[0] - lo[0]) / n as f64;
            let y = lo[1] + (j as f64 + 0.5) * (hi[1] - lo[1]) / n as f64;
            let point = ContextVector::new(vec![x, y]).unwrap();
            let proj = project(set, &point, DEFAULT_TIE_TOL).unwrap();
            let share = 1.0 / proj.indices.len() as f64;
            for idx in proj.indices {
                tallies[idx] += share;
            }
        }
    }
    let total = (n * n) as f64;
    tallies.iter().map(|t| t / total).collect()
}

/// Random 2-D alternative set inside the unit square with a minimum
/// pairwise separation, so every Voronoi cell has solid area.
pub fn random_separated_set(m: usize, min_dist: f64, rng: &mut ChaCha8Rng) -> AlternativeSet {
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(m);
    while points.len() < m {
        let candidate = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        if points
            .iter()
            .all(|p| ((p.0 - candidate.0).powi(2) + (p.1 - candidate.1).powi(2)).sqrt() >= min_dist)
        {
            points.push(candidate);
        }
    }
    AlternativeSet::from_pairs(
        points
            .into_iter()
            .enumerate()
            .map(|(k, (x, y))| (format!("alt{k}"), vec![x, y])),
    )
    .unwrap()
}

/// Three-sigma binomial tolerance for a Monte Carlo weight estimate.
pub fn three_sigma(w_true: f64, n_samples: u64) -> f64 {
    3.0 * (w_true * (1.0 - w_true) / n_samples as f64).sqrt()
}
