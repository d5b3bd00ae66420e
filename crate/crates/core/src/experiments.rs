//! End-to-end experiments: clone insertion, robustness sweeps contrasting
//! the unit-weight and Voronoi-weight estimators, the built-in winner-flip
//! instance, and the two-population indistinguishability construction.

use crate::alternatives::{AlternativeSet, ContextVector};
use crate::analysis::{borda_count, ranking};
use crate::error::{Error, Result};
use crate::population::{annotator_reward, AnnotatorType, Population, RewardField};
use crate::solver::{solve, RewardVector, SolverConfig};
use crate::voronoi::{estimate_weights, unit_weights, SpaceBox, WeightVector};
use crate::winrate::{representative_matrix, WinRateMatrix};

/// Unit-direction tolerance for clone specifications.
const DIRECTION_NORM_TOL: f64 = 1e-12;

/// Where to place a clone: at distance `epsilon` from `target` along a unit
/// `direction`, under a fresh id.
#[derive(Debug, Clone)]
pub struct CloneSpec {
    pub target: String,
    pub epsilon: f64,
    pub direction: ContextVector,
    pub new_id: String,
}

impl CloneSpec {
    pub fn new(
        target: impl Into<String>,
        epsilon: f64,
        direction: ContextVector,
        new_id: impl Into<String>,
    ) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid("clone epsilon must be finite and >= 0"));
        }
        if (direction.norm() - 1.0).abs() > DIRECTION_NORM_TOL {
            return Err(Error::invalid(format!(
                "clone direction must be a unit vector, norm is {}",
                direction.norm()
            )));
        }
        Ok(Self {
            target: target.into(),
            epsilon,
            direction,
            new_id: new_id.into(),
        })
    }
}

/// Extend `set` and `pop` with the clone described by `spec`. The clone's
/// context is `c(target) + epsilon * direction`; every annotator type's
/// reward at the clone follows its field. Tabular fields cannot be evaluated
/// off their id set, so they require `epsilon = 0` (the target's value is
/// copied); linear fields accept any epsilon.
pub fn add_clone(
    set: &AlternativeSet,
    pop: &Population,
    spec: &CloneSpec,
) -> Result<(AlternativeSet, Population)> {
    let target_index = set.index_of(&spec.target)?;
    if set.contains(&spec.new_id) {
        return Err(Error::invalid(format!(
            "clone id {:?} already exists",
            spec.new_id
        )));
    }
    let context = set
        .context(target_index)
        .offset(&spec.direction, spec.epsilon)?;
    let new_set = set.with_added(spec.new_id.clone(), context)?;

    let mut types = Vec::with_capacity(pop.types().len());
    for t in pop.types() {
        let reward = match &t.reward {
            RewardField::Tabular(values) => {
                if spec.epsilon > 0.0 {
                    return Err(Error::Unsupported(
                        "tabular reward fields only support exact clones (epsilon = 0)".into(),
                    ));
                }
                let target_value = annotator_reward(&t.reward, set, &spec.target)?;
                let mut extended = values.clone();
                extended.insert(spec.new_id.clone(), target_value);
                RewardField::Tabular(extended)
            }
            RewardField::Linear { theta, bias } => RewardField::Linear {
                theta: theta.clone(),
                bias: *bias,
            },
        };
        types.push(AnnotatorType {
            proportion: t.proportion,
            reward,
        });
    }
    Ok((new_set, Population::new(types)?))
}

/// Which estimator a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAlgorithm {
    /// Unit weights (plain regularized MLE).
    Mle,
    /// Voronoi weights estimated over the sweep's space.
    Wmle,
}

impl SweepAlgorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAlgorithm::Mle => "mle",
            SweepAlgorithm::Wmle => "wmle",
        }
    }
}

/// Monte Carlo settings for weight estimation inside experiments. The same
/// seed is reused for the original and cloned sets so that sampling noise
/// cancels out of the reported deltas.
#[derive(Debug, Clone, Copy)]
pub struct WeightsConfig {
    pub n_samples: u64,
    pub seed: u64,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        Self {
            n_samples: crate::voronoi::DEFAULT_WEIGHT_SAMPLES,
            seed: 0,
        }
    }
}

/// One epsilon step of a robustness sweep.
#[derive(Debug, Clone)]
pub struct RobustnessRow {
    pub epsilon: f64,
    /// `max_{y in M} |rhat(y) - rhat'(y)|`.
    pub delta_existing: f64,
    /// `|rhat'(target) - rhat'(clone)|`.
    pub delta_pair: f64,
    pub winner_before: String,
    pub winner_after: String,
}

/// Sweep rows sorted by descending epsilon.
#[derive(Debug, Clone)]
pub struct RobustnessReport {
    pub algorithm: SweepAlgorithm,
    pub rows: Vec<RobustnessRow>,
}

impl RobustnessReport {
    /// True when the winner over the original alternatives changed in any
    /// row.
    pub fn any_winner_flip(&self) -> bool {
        self.rows.iter().any(|r| r.winner_before != r.winner_after)
    }
}

fn solve_with_weights(
    p: &WinRateMatrix,
    w: &WeightVector,
    config: &SolverConfig,
) -> Result<RewardVector> {
    Ok(solve(p, w, config)?.0)
}

/// For each epsilon: insert the clone, rebuild exact win-rate matrices,
/// solve with the chosen estimator on both alternative sets, and record the
/// reward deltas and argmax winners. Representative matrices are used
/// throughout, matching the robustness definition.
#[allow(clippy::too_many_arguments)]
pub fn clone_robustness_sweep(
    set: &AlternativeSet,
    pop: &Population,
    target: &str,
    direction: &ContextVector,
    new_id: &str,
    algorithm: SweepAlgorithm,
    eps_list: &[f64],
    space: &SpaceBox,
    weights_config: &WeightsConfig,
    solver_config: &SolverConfig,
) -> Result<RobustnessReport> {
    if eps_list.is_empty() {
        return Err(Error::invalid("sweep requires at least one epsilon"));
    }
    let base_matrix = representative_matrix(pop, set)?;
    let base_weights = match algorithm {
        SweepAlgorithm::Mle => unit_weights(set),
        SweepAlgorithm::Wmle => {
            estimate_weights(set, space, weights_config.n_samples, weights_config.seed)?.0
        }
    };
    let base_rewards = solve_with_weights(&base_matrix, &base_weights, solver_config)?;
    let winner_before = set.id(base_rewards.argmax()).to_string();

    let mut eps_sorted = eps_list.to_vec();
    eps_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));

    let mut rows = Vec::with_capacity(eps_sorted.len());
    for &epsilon in &eps_sorted {
        let spec = CloneSpec::new(target, epsilon, direction.clone(), new_id)?;
        let (cloned_set, cloned_pop) = add_clone(set, pop, &spec)?;
        let cloned_matrix = representative_matrix(&cloned_pop, &cloned_set)?;
        let cloned_weights = match algorithm {
            SweepAlgorithm::Mle => unit_weights(&cloned_set),
            SweepAlgorithm::Wmle => {
                estimate_weights(
                    &cloned_set,
                    space,
                    weights_config.n_samples,
                    weights_config.seed,
                )?
                .0
            }
        };
        let cloned_rewards = solve_with_weights(&cloned_matrix, &cloned_weights, solver_config)?;

        let delta_existing = (0..set.len())
            .map(|i| (base_rewards.get(i) - cloned_rewards.get(i)).abs())
            .fold(0.0, f64::max);
        let target_index = cloned_set.index_of(target)?;
        let clone_index = cloned_set.index_of(new_id)?;
        let delta_pair = (cloned_rewards.get(target_index) - cloned_rewards.get(clone_index)).abs();
        let winner_after = cloned_set.id(cloned_rewards.argmax()).to_string();

        rows.push(RobustnessRow {
            epsilon,
            delta_existing,
            delta_pair,
            winner_before: winner_before.clone(),
            winner_after,
        });
    }
    Ok(RobustnessReport { algorithm, rows })
}

/// Tables for one alternative set inside [`WinnerFlipReport`].
#[derive(Debug, Clone)]
pub struct InstanceTables {
    pub ids: Vec<String>,
    pub matrix: WinRateMatrix,
    pub borda: Vec<f64>,
    pub mle_rewards: Vec<f64>,
    /// Ids ordered best-first by solved reward.
    pub mle_ranking: Vec<String>,
    pub borda_winner: String,
    pub mle_winner: String,
}

fn instance_tables(
    set: &AlternativeSet,
    pop: &Population,
    solver_config: &SolverConfig,
) -> Result<InstanceTables> {
    let matrix = representative_matrix(pop, set)?;
    let borda = borda_count(&matrix);
    let (rewards, _) = solve(&matrix, &unit_weights(set), solver_config)?;
    let order = ranking(rewards.values());
    Ok(InstanceTables {
        ids: set.ids().to_vec(),
        borda_winner: set.id(borda.argmax()).to_string(),
        mle_winner: set.id(rewards.argmax()).to_string(),
        mle_ranking: order.iter().map(|&i| set.id(i).to_string()).collect(),
        borda: borda.values().to_vec(),
        mle_rewards: rewards.values().to_vec(),
        matrix,
    })
}

/// Output of [`winner_flip_report`].
#[derive(Debug, Clone)]
pub struct WinnerFlipReport {
    pub original: InstanceTables,
    pub cloned: InstanceTables,
    /// True when the Borda/MLE winner changed after the exact clone.
    pub winner_flipped: bool,
}

/// Runs the built-in three-type instance (see
/// [`fixtures::three_type_population`]) before and after an exact clone of
/// its weakest alternative, reporting win-rate tables, Borda counts, and
/// unit-weight MLE rankings. On this instance the winner flips.
pub fn winner_flip_report(solver_config: &SolverConfig) -> Result<WinnerFlipReport> {
    let (set, pop) = fixtures::three_type_population()?;
    let original = instance_tables(&set, &pop, solver_config)?;

    let direction = ContextVector::new(vec![1.0, 0.0])?;
    let spec = CloneSpec::new(
        fixtures::CLONE_TARGET,
        0.0,
        direction,
        fixtures::CLONE_ID,
    )?;
    let (cloned_set, cloned_pop) = add_clone(&set, &pop, &spec)?;
    let cloned = instance_tables(&cloned_set, &cloned_pop, solver_config)?;

    let winner_flipped =
        original.borda_winner != cloned.borda_winner || original.mle_winner != cloned.mle_winner;
    Ok(WinnerFlipReport {
        original,
        cloned,
        winner_flipped,
    })
}

/// Two two-type populations over the same pair of alternatives that induce
/// identical comparison data yet have mean rewards arbitrarily far apart.
#[derive(Debug, Clone)]
pub struct ImpossibilityInstance {
    pub c_param: f64,
    /// `exp(12 sqrt(C))`.
    pub kappa: f64,
    pub set: AlternativeSet,
    pub populations: [Population; 2],
    /// `p(a > b)` for each population; both equal 1/3.
    pub win_probs: [f64; 2],
    /// Mean reward of alternative `b` per population.
    pub mean_reward_b: [f64; 2],
    /// `|mean_2 - mean_1|`, growing without bound in `C`.
    pub mean_reward_gap: f64,
}

/// Smallest admissible scale parameter, `(ln 2)^2`.
pub fn min_scale_param() -> f64 {
    std::f64::consts::LN_2 * std::f64::consts::LN_2
}

/// Builds the two-population instance for scale parameter `C >= (ln 2)^2`.
///
/// Population 1 gives `b` reward `ln 2` under both types; population 2 gives
/// `b` rewards `ln kappa` and `ln(kappa + 4) - ln(2 kappa - 1)` with
/// `kappa = exp(12 sqrt(C))`. Both populations prefer `a` over `b` with
/// probability exactly 1/3, so no estimator can distinguish them, while
/// their mean rewards differ by roughly `12 sqrt(C) / 2`.
pub fn impossibility_instance(c_param: f64) -> Result<ImpossibilityInstance> {
    if !c_param.is_finite() || c_param < min_scale_param() {
        return Err(Error::invalid(format!(
            "scale parameter must be at least (ln 2)^2 = {:.6}, got {c_param}",
            min_scale_param()
        )));
    }
    // exp2 keeps kappa exact when 12 sqrt(C) is an integer multiple of ln 2
    // (in particular kappa = 4096 at the minimum C).
    let kappa = (12.0 * c_param.sqrt() / std::f64::consts::LN_2).exp2();

    let set = AlternativeSet::from_pairs([("a", vec![0.0]), ("b", vec![1.0])])?;
    let rb_1 = std::f64::consts::LN_2;
    let rb_2a = kappa.ln();
    let rb_2b = (kappa + 4.0).ln() - (2.0 * kappa - 1.0).ln();

    let tabular = |rb: f64| RewardField::tabular([("a", 0.0), ("b", rb)]);
    let population_1 = Population::new(vec![
        AnnotatorType {
            proportion: 0.5,
            reward: tabular(rb_1)?,
        },
        AnnotatorType {
            proportion: 0.5,
            reward: tabular(rb_1)?,
        },
    ])?;
    let population_2 = Population::new(vec![
        AnnotatorType {
            proportion: 0.5,
            reward: tabular(rb_2a)?,
        },
        AnnotatorType {
            proportion: 0.5,
            reward: tabular(rb_2b)?,
        },
    ])?;

    let mut win_probs = [0.0; 2];
    for (slot, pop) in win_probs.iter_mut().zip([&population_1, &population_2]) {
        *slot = crate::population::population_win_prob(pop, &set, "a", "b")?;
        if (*slot - 1.0 / 3.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "constructed win probability {} deviates from 1/3",
                *slot
            )));
        }
    }

    let mean_reward_b = [rb_1, 0.5 * (rb_2a + rb_2b)];
    Ok(ImpossibilityInstance {
        c_param,
        kappa,
        set,
        populations: [population_1, population_2],
        win_probs,
        mean_reward_b,
        mean_reward_gap: (mean_reward_b[1] - mean_reward_b[0]).abs(),
    })
}

/// Built-in instances shared by the experiments, the CLI, and the test
/// suites.
pub mod fixtures {
    use super::*;

    /// Target of the built-in clone experiments.
    pub const CLONE_TARGET: &str = "c";
    /// Id given to inserted clones.
    pub const CLONE_ID: &str = "c2";

    /// A three-type population with cyclic tabular rewards (proportions
    /// 40/30/30, reward levels ln 1 / ln 10 / ln 100 rotated across
    /// alternatives), embedded at the corners (0,0), (1,0), (0,1) of the
    /// unit square. Its Borda winner flips when the weakest alternative is
    /// cloned.
    pub fn three_type_population() -> Result<(AlternativeSet, Population)> {
        let set = AlternativeSet::from_pairs([
            ("a", vec![0.0, 0.0]),
            ("b", vec![1.0, 0.0]),
            ("c", vec![0.0, 1.0]),
        ])?;
        let ln = |v: f64| v.ln();
        let pop = Population::new(vec![
            AnnotatorType {
                proportion: 0.4,
                reward: RewardField::tabular([("a", ln(100.0)), ("b", ln(10.0)), ("c", ln(1.0))])?,
            },
            AnnotatorType {
                proportion: 0.3,
                reward: RewardField::tabular([("a", ln(10.0)), ("b", ln(1.0)), ("c", ln(100.0))])?,
            },
            AnnotatorType {
                proportion: 0.3,
                reward: RewardField::tabular([("a", ln(1.0)), ("b", ln(100.0)), ("c", ln(10.0))])?,
            },
        ])?;
        Ok((set, pop))
    }

    /// Three alternatives at corners (0,0), (1,0), (1,1) of the unit square;
    /// their Voronoi weights in the unit square are 0.375, 0.25, 0.375.
    pub fn square_corner_set() -> Result<AlternativeSet> {
        AlternativeSet::from_pairs([
            ("a", vec![0.0, 0.0]),
            ("b", vec![1.0, 0.0]),
            ("c", vec![1.0, 1.0]),
        ])
    }

    /// A smooth three-type linear population over 2-D contexts, used by the
    /// approximate-clone sweeps (linear fields extend to clone contexts and
    /// are Lipschitz by construction).
    pub fn square_corner_linear_population() -> Result<Population> {
        let linear = |theta: Vec<f64>, bias: f64| -> Result<RewardField> {
            RewardField::linear(ContextVector::new(theta)?, bias)
        };
        Population::new(vec![
            AnnotatorType {
                proportion: 0.4,
                reward: linear(vec![1.5, -0.5], 0.0)?,
            },
            AnnotatorType {
                proportion: 0.3,
                reward: linear(vec![-1.0, 1.2], 0.5)?,
            },
            AnnotatorType {
                proportion: 0.3,
                reward: linear(vec![0.3, 0.8], -0.2)?,
            },
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn clone_context_is_offset_along_direction() {
        let set = fixtures::square_corner_set().unwrap();
        let pop = fixtures::square_corner_linear_population().unwrap();
        let direction = ContextVector::new(vec![-1.0, 0.0]).unwrap();
        let spec = CloneSpec::new("c", 0.01f64.sqrt(), direction, "c2").unwrap();
        let (set2, _) = add_clone(&set, &pop, &spec).unwrap();
        let ctx = set2.context(set2.index_of("c2").unwrap());
        assert_abs_diff_eq!(ctx.coords()[0], 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(ctx.coords()[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_clone_copies_tabular_rewards() {
        let (set, pop) = fixtures::three_type_population().unwrap();
        let direction = ContextVector::new(vec![1.0, 0.0]).unwrap();
        let spec = CloneSpec::new("c", 0.0, direction, "c2").unwrap();
        let (set2, pop2) = add_clone(&set, &pop, &spec).unwrap();
        let expected = [1.0f64.ln(), 100.0f64.ln(), 10.0f64.ln()];
        for (t, want) in pop2.types().iter().zip(expected) {
            assert_eq!(
                annotator_reward(&t.reward, &set2, "c2").unwrap(),
                want,
                "clone reward should copy the target's"
            );
        }
    }

    #[test]
    fn tabular_rejects_positive_epsilon() {
        let (set, pop) = fixtures::three_type_population().unwrap();
        let direction = ContextVector::new(vec![1.0, 0.0]).unwrap();
        let spec = CloneSpec::new("c", 0.1, direction, "c2").unwrap();
        assert!(matches!(
            add_clone(&set, &pop, &spec),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn linear_clone_rewards_obey_lipschitz_bound() {
        let set = fixtures::square_corner_set().unwrap();
        let pop = fixtures::square_corner_linear_population().unwrap();
        let direction = ContextVector::new(vec![0.6, -0.8]).unwrap();
        let eps = 0.05;
        let spec = CloneSpec::new("b", eps, direction, "b2").unwrap();
        let (set2, pop2) = add_clone(&set, &pop, &spec).unwrap();
        for t in pop2.types() {
            let k = t.reward.lipschitz_constant().unwrap();
            let r_target = annotator_reward(&t.reward, &set2, "b").unwrap();
            let r_clone = annotator_reward(&t.reward, &set2, "b2").unwrap();
            assert!((r_target - r_clone).abs() <= k * eps + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let d_ok = ContextVector::new(vec![1.0, 0.0]).unwrap();
        let d_bad = ContextVector::new(vec![1.0, 1.0]).unwrap();
        assert!(CloneSpec::new("c", 0.1, d_bad, "c2").is_err());
        assert!(CloneSpec::new("c", -0.1, d_ok.clone(), "c2").is_err());

        let set = fixtures::square_corner_set().unwrap();
        let pop = fixtures::square_corner_linear_population().unwrap();
        let spec = CloneSpec::new("c", 0.0, d_ok.clone(), "a").unwrap();
        assert!(add_clone(&set, &pop, &spec).is_err());
        let spec = CloneSpec::new("zz", 0.0, d_ok, "c2").unwrap();
        assert!(matches!(add_clone(&set, &pop, &spec), Err(Error::UnknownId(_))));
    }

    #[test]
    fn winner_flip_reproduces_reference_tables() {
        let report = winner_flip_report(&SolverConfig::default()).unwrap();
        let expected3 = [1.59, 1.50, 1.41];
        for (got, want) in report.original.borda.iter().zip(expected3) {
            assert_abs_diff_eq!(got, &want, epsilon = 0.01);
        }
        let expected4 = [2.04, 2.14, 1.91, 1.91];
        for (got, want) in report.cloned.borda.iter().zip(expected4) {
            assert_abs_diff_eq!(got, &want, epsilon = 0.01);
        }
        assert_eq!(report.original.borda_winner, "a");
        assert_eq!(report.cloned.borda_winner, "b");
        assert_eq!(report.original.mle_winner, "a");
        assert_eq!(report.cloned.mle_winner, "b");
        assert!(report.winner_flipped);
    }

    #[test]
    fn mle_sweep_shows_large_delta_at_zero_epsilon() {
        let (set, pop) = fixtures::three_type_population().unwrap();
        let direction = ContextVector::new(vec![1.0, 0.0]).unwrap();
        let space = SpaceBox::unit_cube(2).unwrap();
        let report = clone_robustness_sweep(
            &set,
            &pop,
            "c",
            &direction,
            "c2",
            SweepAlgorithm::Mle,
            &[0.0],
            &space,
            &WeightsConfig::default(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.rows[0].delta_existing >= 0.05);
        assert!(report.any_winner_flip());
    }

    #[test]
    fn impossibility_instance_at_minimum_scale() {
        let inst = impossibility_instance(min_scale_param()).unwrap();
        assert_eq!(inst.kappa, 4096.0);
        for p in inst.win_probs {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-12);
        }
        // independent plug-in arithmetic for the population-2 mean
        let expected = (4096.0f64.ln() + 4100.0f64.ln() - 8191.0f64.ln()) / 2.0;
        assert_abs_diff_eq!(inst.mean_reward_b[1], expected, epsilon = 1e-12);
        assert_abs_diff_eq!(inst.mean_reward_b[0], std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn impossibility_gap_grows_with_scale() {
        let c0 = min_scale_param();
        let g1 = impossibility_instance(c0).unwrap().mean_reward_gap;
        let g2 = impossibility_instance(2.0 * c0).unwrap().mean_reward_gap;
        let g3 = impossibility_instance(4.0 * c0).unwrap().mean_reward_gap;
        assert!(g1 < g2 && g2 < g3);
    }

    #[test]
    fn impossibility_rejects_small_scale() {
        assert!(impossibility_instance(0.1).is_err());
    }
}
