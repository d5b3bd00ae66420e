//! Instance builders shared by the benchmark targets.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use voromle_core::experiments::fixtures;
use voromle_core::{
    representative_matrix, AlternativeSet, RewardVector, WeightVector, WinRateMatrix,
};

/// Exact matrix of the built-in three-type instance.
pub fn reference_matrix() -> WinRateMatrix {
    let (set, pop) = fixtures::three_type_population().unwrap();
    representative_matrix(&pop, &set).unwrap()
}

pub fn corner_set() -> AlternativeSet {
    fixtures::square_corner_set().unwrap()
}

/// Random dense instance of the given size, deterministic per seed.
pub fn random_instance(m: usize, seed: u64) -> (WinRateMatrix, WeightVector, RewardVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = vec![0.5; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v: f64 = rng.random_range(0.1..0.9);
            p[i * m + j] = v;
            p[j * m + i] = 1.0 - v;
        }
    }
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let w = WeightVector::voronoi(raw.iter().map(|v| v / total).collect()).unwrap();
    let r = RewardVector::new((0..m).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    (
        WinRateMatrix::from_probabilities(m, p, None).unwrap(),
        w,
        r,
    )
}
