//! Property tests and oracle cross-checks: randomized invariants for the
//! BTL primitives and matrices, geometry oracles for the Voronoi weights,
//! and convexity/scaling laws for the solver and estimators.

mod support;

use proptest::prelude::*;
use support::*;
use voromle_core::analysis::weighted_average_win_rate;
use voromle_core::experiments::fixtures;
use voromle_core::solver::Initial;
use voromle_core::voronoi::DEFAULT_TIE_TOL;
use voromle_core::{
    btl_win_prob, empirical_matrix, estimate_weights, integral_objective_estimate, log_sigmoid,
    objective, representative_matrix, sample_pair_dataset, solve, unit_weights, AlternativeSet,
    AnnotatorType, ContextVector, Population, RewardField, RewardVector, SolverConfig, SpaceBox,
    WeightVector, WinRateMatrix,
};

proptest! {
    #[test]
    fn btl_antisymmetry_and_shift_invariance(
        a in -30.0f64..30.0,
        b in -30.0f64..30.0,
        shift in -20.0f64..20.0,
    ) {
        let p = btl_win_prob(a, b).unwrap();
        let q = btl_win_prob(b, a).unwrap();
        prop_assert!((p + q - 1.0).abs() <= 1e-12);
        let shifted = btl_win_prob(a + shift, b + shift).unwrap();
        prop_assert!((p - shifted).abs() <= 1e-12);
    }

    #[test]
    fn linear_fields_satisfy_lipschitz_bound(
        theta in proptest::collection::vec(-3.0f64..3.0, 2),
        x1 in proptest::collection::vec(-5.0f64..5.0, 2),
        x2 in proptest::collection::vec(-5.0f64..5.0, 2),
        bias in -2.0f64..2.0,
    ) {
        let field = RewardField::linear(ContextVector::new(theta).unwrap(), bias).unwrap();
        let c1 = ContextVector::new(x1).unwrap();
        let c2 = ContextVector::new(x2).unwrap();
        let gap = (field.value_at(&c1).unwrap() - field.value_at(&c2).unwrap()).abs();
        let k = field.lipschitz_constant().unwrap();
        prop_assert!(gap <= k * c1.distance(&c2).unwrap() + 1e-9);
    }

    #[test]
    fn representative_matrices_from_random_populations_validate(
        raw in proptest::collection::vec(0.05f64..1.0, 3),
        rewards in proptest::collection::vec(-3.0f64..3.0, 9),
    ) {
        let set = AlternativeSet::from_pairs([
            ("a", vec![0.0]), ("b", vec![1.0]), ("c", vec![2.0]),
        ]).unwrap();
        let total: f64 = raw.iter().sum();
        let types = raw.iter().enumerate().map(|(t, v)| AnnotatorType {
            proportion: v / total,
            reward: RewardField::tabular([
                ("a", rewards[3 * t]),
                ("b", rewards[3 * t + 1]),
                ("c", rewards[3 * t + 2]),
            ]).unwrap(),
        }).collect();
        let pop = Population::new(types).unwrap();
        // construction re-validates every matrix invariant
        let matrix = representative_matrix(&pop, &set).unwrap();
        for i in 0..3 {
            prop_assert_eq!(matrix.get(i, i), 0.5);
        }
    }
}

#[test]
fn empirical_matrices_satisfy_invariants() {
    let (set, pop) = fixtures::three_type_population().unwrap();
    let records = sample_pair_dataset(&pop, &set, 200, 9).unwrap();
    let matrix = empirical_matrix(&records, &set).unwrap();
    for i in 0..set.len() {
        assert_eq!(matrix.get(i, i), 0.5);
        for j in 0..set.len() {
            assert!((matrix.get(i, j) + matrix.get(j, i) - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn weights_are_permutation_equivariant() {
    let space = SpaceBox::unit_cube(2).unwrap();
    let original = fixtures::square_corner_set().unwrap();
    let permuted = AlternativeSet::from_pairs([
        ("c", vec![1.0, 1.0]),
        ("a", vec![0.0, 0.0]),
        ("b", vec![1.0, 0.0]),
    ])
    .unwrap();
    let (w0, _) = estimate_weights(&original, &space, 50_000, 31).unwrap();
    let (w1, _) = estimate_weights(&permuted, &space, 50_000, 31).unwrap();
    // same points, same geometry: permuting the set permutes the weights
    assert_eq!(w1.get(0), w0.get(2));
    assert_eq!(w1.get(1), w0.get(0));
    assert_eq!(w1.get(2), w0.get(1));
}

#[test]
fn exact_clone_splits_weight_with_shared_seed() {
    let space = SpaceBox::unit_cube(2).unwrap();
    let set = fixtures::square_corner_set().unwrap();
    let cloned = set
        .with_added("c2".into(), set.context(2).clone())
        .unwrap();
    let (w0, _) = estimate_weights(&set, &space, 100_000, 5).unwrap();
    let (w1, _) = estimate_weights(&cloned, &space, 100_000, 5).unwrap();
    // identical sample points: the tied pair shares the old mass exactly
    assert_eq!(w1.get(2) + w1.get(3), w0.get(2));
    assert_eq!(w1.get(0), w0.get(0));
    assert_eq!(w1.get(1), w0.get(1));
    assert_eq!(w1.get(2), w1.get(3));
}

#[test]
fn exact_clone_splits_weight_across_seeds() {
    let space = SpaceBox::unit_cube(2).unwrap();
    let set = fixtures::square_corner_set().unwrap();
    let cloned = set
        .with_added("c2".into(), set.context(2).clone())
        .unwrap();
    let (w0, se0) = estimate_weights(&set, &space, 100_000, 5).unwrap();
    let (w1, se1) = estimate_weights(&cloned, &space, 100_000, 6).unwrap();
    let combined = w1.get(2) + w1.get(3);
    let tol = 3.0 * (se0[2] + se1[2] + se1[3]);
    assert!((combined - w0.get(2)).abs() <= tol);
    for i in 0..2 {
        assert!((w1.get(i) - w0.get(i)).abs() <= 3.0 * (se0[i] + se1[i]));
    }
}

#[test]
fn weights_match_grid_quadrature_oracle() {
    let space = SpaceBox::unit_cube(2).unwrap();
    let n = 100_000;

    let set = fixtures::square_corner_set().unwrap();
    let grid = grid_quadrature_weights(&set, &space, 2000);
    let (mc, _) = estimate_weights(&set, &space, n, 13).unwrap();
    for (i, cell) in grid.iter().enumerate() {
        let tol = three_sigma(*cell, n) + 5e-4;
        assert!(
            (mc.get(i) - cell).abs() <= tol,
            "weight {i}: mc {} vs grid {cell}",
            mc.get(i)
        );
    }

    let cloned = set
        .with_added("c2".into(), ContextVector::new(vec![0.9, 1.0]).unwrap())
        .unwrap();
    let grid = grid_quadrature_weights(&cloned, &space, 2000);
    let (mc, _) = estimate_weights(&cloned, &space, n, 14).unwrap();
    for (i, cell) in grid.iter().enumerate() {
        let tol = three_sigma(cell.max(1e-4), n) + 5e-4;
        assert!(
            (mc.get(i) - cell).abs() <= tol,
            "clone weight {i}: mc {} vs grid {cell}",
            mc.get(i)
        );
    }
}

#[test]
fn exact_clone_preserves_weighted_win_rates() {
    // with split weights and copied win-rate rows, every surviving
    // alternative keeps its weighted average win rate
    let set = fixtures::square_corner_set().unwrap();
    let pop = fixtures::square_corner_linear_population().unwrap();
    let space = SpaceBox::unit_cube(2).unwrap();
    let p = representative_matrix(&pop, &set).unwrap();
    let (w, _) = estimate_weights(&set, &space, 50_000, 12).unwrap();
    let before = weighted_average_win_rate(&p, &w).unwrap();

    let cloned = set
        .with_added("c2".into(), set.context(2).clone())
        .unwrap();
    let p2 = representative_matrix(&pop, &cloned).unwrap();
    let (w2, _) = estimate_weights(&cloned, &space, 50_000, 12).unwrap();
    let after = weighted_average_win_rate(&p2, &w2).unwrap();
    for i in 0..set.len() {
        assert!(
            (before.get(i) - after.get(i)).abs() <= 1e-12,
            "wAWR moved for alternative {i}"
        );
    }
}

#[test]
fn model_win_rate_matches_independent_double_loop() {
    let mut r = rng(23);
    for _ in 0..10 {
        let m = 2 + (r.random_range(0..6u32) as usize);
        let w = random_voronoi_weights(m, &mut r);
        let rewards = random_rewards(m, 2.0, &mut r);
        let got = voromle_core::analysis::model_win_rate(&rewards, &w).unwrap();
        for x in 0..m {
            let mut want = 0.0;
            for y in 0..m {
                let diff = rewards.get(x) - rewards.get(y);
                want += w.get(y) / (1.0 + (-diff).exp());
            }
            assert!((got.get(x) - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn impossibility_construction_is_exact_across_scales() {
    for c in [
        voromle_core::experiments::min_scale_param(),
        1.0,
        5.0,
        25.0,
    ] {
        let inst = voromle_core::experiments::impossibility_instance(c).unwrap();
        for p in inst.win_probs {
            assert!((p - 1.0 / 3.0).abs() <= 1e-12, "C = {c}: win prob {p}");
        }
    }
}

#[test]
fn integral_standard_error_scales_with_samples() {
    let mut r = rng(88);
    let set = random_separated_set(4, 0.25, &mut r);
    let p = random_matrix(4, &mut r);
    let rewards = random_rewards(4, 1.0, &mut r);
    let space = SpaceBox::unit_cube(2).unwrap();
    let (_, se_n) =
        integral_objective_estimate(&rewards, &p, &set, &space, 0.1, 40_000, 21).unwrap();
    let (_, se_2n) =
        integral_objective_estimate(&rewards, &p, &set, &space, 0.1, 80_000, 22).unwrap();
    let ratio = se_2n / se_n;
    let expected = 1.0 / 2.0f64.sqrt();
    assert!(
        (ratio - expected).abs() <= 0.2 * expected,
        "se ratio {ratio} vs {expected}"
    );
}

#[test]
fn objective_is_convex_along_segments() {
    let mut r = rng(55);
    for _ in 0..50 {
        let m = 2 + (r.random_range(0..5u32) as usize);
        let p = random_matrix(m, &mut r);
        let w = random_voronoi_weights(m, &mut r);
        let lambda = 0.05;
        let r1 = random_rewards(m, 3.0, &mut r);
        let r2 = random_rewards(m, 3.0, &mut r);
        let theta: f64 = r.random_range(0.01..0.99);
        let blend = RewardVector::new(
            r1.values()
                .iter()
                .zip(r2.values())
                .map(|(a, b)| theta * a + (1.0 - theta) * b)
                .collect(),
        )
        .unwrap();
        let f_blend = objective(&blend, &p, &w, lambda).unwrap();
        let f1 = objective(&r1, &p, &w, lambda).unwrap();
        let f2 = objective(&r2, &p, &w, lambda).unwrap();
        assert!(f_blend <= theta * f1 + (1.0 - theta) * f2 + 1e-10);
    }
}

#[test]
fn objective_grows_quadratically_away_from_minimum() {
    let mut r = rng(66);
    let m = 4;
    let p = random_matrix(m, &mut r);
    let w = random_voronoi_weights(m, &mut r);
    let lambda = 0.1;
    let cfg = SolverConfig {
        lambda,
        ..SolverConfig::default()
    };
    let (r_hat, report) = solve(&p, &w, &cfg).unwrap();
    let f_hat = report.objective;
    let strong_convexity = lambda * w.min();
    for _ in 0..20 {
        let offset = random_rewards(m, 0.5, &mut r);
        let candidate = RewardVector::new(
            r_hat
                .values()
                .iter()
                .zip(offset.values())
                .map(|(a, b)| a + b)
                .collect(),
        )
        .unwrap();
        let distance_sq: f64 = offset.values().iter().map(|v| v * v).sum();
        let f = objective(&candidate, &p, &w, lambda).unwrap();
        assert!(
            f - f_hat >= 0.5 * strong_convexity * distance_sq - 1e-9,
            "quadratic growth violated: {} < {}",
            f - f_hat,
            0.5 * strong_convexity * distance_sq
        );
    }
}

#[test]
fn uniform_voronoi_weights_match_unit_solve_after_lambda_rescale() {
    // weighted objective with w = 1/m equals the unit objective once
    // lambda is scaled by m
    let mut r = rng(99);
    let m = 4;
    let p = random_matrix(m, &mut r);
    let uniform = WeightVector::voronoi(vec![0.25; m]).unwrap();
    let unit = WeightVector::unit(m).unwrap();
    let lambda_w = 0.08;
    let (rw, rep_w) = solve(&p, &uniform, &SolverConfig::with_lambda(lambda_w)).unwrap();
    let (ru, rep_u) = solve(&p, &unit, &SolverConfig::with_lambda(lambda_w * m as f64)).unwrap();
    assert!(rw.max_abs_diff(&ru).unwrap() <= rep_w.error_radius + rep_u.error_radius);
}

#[test]
fn objective_is_invariant_to_summation_order() {
    let mut r = rng(44);
    let m = 6;
    let p = random_matrix(m, &mut r);
    let w = random_voronoi_weights(m, &mut r);
    let rewards = random_rewards(m, 2.0, &mut r);
    let lambda = 0.3;
    let forward = objective(&rewards, &p, &w, lambda).unwrap();

    // reversed-order reimplementation
    let mut neg_log_lik = 0.0;
    for x1 in (0..m).rev() {
        for x2 in (0..m).rev() {
            if x1 == x2 {
                continue;
            }
            neg_log_lik -= w.get(x1)
                * w.get(x2)
                * p.get(x1, x2)
                * log_sigmoid(rewards.get(x1) - rewards.get(x2));
        }
    }
    let mut penalty = 0.0;
    for x in (0..m).rev() {
        penalty += w.get(x) * rewards.get(x) * rewards.get(x);
    }
    let reversed = neg_log_lik + 0.5 * lambda * penalty;
    assert!((forward - reversed).abs() <= 1e-12);
}

#[test]
fn projection_distance_is_the_minimum() {
    let set = fixtures::square_corner_set().unwrap();
    let mut r = rng(17);
    for _ in 0..200 {
        let x = ContextVector::new(vec![
            r.random_range(-0.5..1.5),
            r.random_range(-0.5..1.5),
        ])
        .unwrap();
        let proj = voromle_core::project(&set, &x, DEFAULT_TIE_TOL).unwrap();
        let brute = set
            .contexts()
            .iter()
            .map(|c| c.distance(&x).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(proj.distance, brute);
        assert!(!proj.indices.is_empty());
    }
}

#[test]
fn solver_initialization_does_not_change_the_answer() {
    let (set, pop) = fixtures::three_type_population().unwrap();
    let p = representative_matrix(&pop, &set).unwrap();
    let w = unit_weights(&set);
    let cfg = SolverConfig::default();
    let (r1, rep1) = solve(&p, &w, &cfg).unwrap();
    let warm_cfg = SolverConfig {
        initial: Initial::Warm(RewardVector::new(vec![1.0, -2.0, 0.3]).unwrap()),
        ..cfg
    };
    let (r2, rep2) = solve(&p, &w, &warm_cfg).unwrap();
    assert!(r1.max_abs_diff(&r2).unwrap() <= rep1.error_radius + rep2.error_radius);
}

#[test]
fn matrix_construction_rejects_asymmetric_counts() {
    let counts = vec![0, 3, 2, 0];
    assert!(WinRateMatrix::from_probabilities(2, vec![0.5, 0.6, 0.4, 0.5], Some(counts)).is_err());
}
