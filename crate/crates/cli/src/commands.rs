use crate::{Algorithm, Cli, Command};
use std::collections::BTreeMap;
use std::path::Path;
use voromle_core::analysis::{
    average_win_rate, borda_count, m_estimator_residual, model_win_rate, ranking,
    weighted_average_win_rate,
};
use voromle_core::experiments::{
    clone_robustness_sweep, fixtures, impossibility_instance, winner_flip_report, SweepAlgorithm,
    WeightsConfig,
};
use voromle_core::files::{self, AnalysisFile, StoredWeights, FORMAT_VERSION};
use voromle_core::solver::Initial;
use voromle_core::{
    empirical_matrix, estimate_weights, integral_objective_estimate, objective,
    representative_matrix, sample_pair_dataset, self_pair_offset, solve, unit_weights,
    AlternativeSet, ContextVector, Error, Population, Result, RewardVector, SolverConfig,
    SpaceBox, WeightMode, WeightVector, WinRateMatrix,
};

pub fn run(cli: Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::GenDataset {
            alternatives,
            population,
            per_pair,
        } => gen_dataset(&cli, alternatives, population, *per_pair),
        Command::EstimateWeights {
            alternatives,
            space,
            n_samples,
        } => estimate_weights_cmd(&cli, alternatives, space, *n_samples),
        Command::Solve {
            alternatives,
            comparisons,
            matrix,
            algorithm,
            weights,
            space,
            n_samples,
            grad_tol,
            max_iters,
        } => solve_cmd(
            &cli,
            alternatives,
            comparisons.as_deref(),
            matrix.as_deref(),
            *algorithm,
            weights.as_deref(),
            space.as_deref(),
            *n_samples,
            *grad_tol,
            *max_iters,
        ),
        Command::Analyze {
            alternatives,
            comparisons,
            matrix,
            weights,
            rewards,
        } => analyze_cmd(
            &cli,
            alternatives,
            comparisons.as_deref(),
            matrix.as_deref(),
            weights.as_deref(),
            rewards.as_deref(),
        ),
        Command::Experiment { .. } => experiment_cmd(&cli),
    }
}

fn resolve_space(spec: &str, set: &AlternativeSet) -> Result<SpaceBox> {
    match spec {
        "unit-cube" => SpaceBox::unit_cube(set.dim()),
        "factor2" => SpaceBox::factor2_enclosing(set),
        path => files::load_space(Path::new(path)),
    }
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad {what} entry {part:?}: {e}")))
        })
        .collect()
}

fn load_matrix_source(
    set: &AlternativeSet,
    comparisons: Option<&Path>,
    matrix: Option<&Path>,
) -> Result<WinRateMatrix> {
    match (comparisons, matrix) {
        (Some(path), None) => {
            let records = files::load_comparisons(path)?;
            empirical_matrix(&records, set)
        }
        (None, Some(path)) => files::load_matrix(path, set),
        _ => Err(Error::InvalidArgument(
            "provide exactly one of --comparisons or --matrix".into(),
        )),
    }
}

fn gen_dataset(cli: &Cli, alternatives: &Path, population: &Path, per_pair: u64) -> Result<()> {
    let set = files::load_alternatives(alternatives)?;
    let pop = files::load_population(population)?;
    let records = sample_pair_dataset(&pop, &set, per_pair, cli.seed)?;
    files::save_comparisons(&records, &cli.out.join("comparisons.jsonl"))?;
    let exact = representative_matrix(&pop, &set)?;
    files::save_matrix(&exact, &set, &cli.out.join("exact_matrix.json"))?;
    let m = set.len() as u64;
    files::save_dataset_sidecar(
        &files::DatasetSidecar {
            format_version: FORMAT_VERSION,
            seed: cli.seed,
            per_pair,
            pair_count: m * (m - 1) / 2,
            record_count: records.len() as u64,
        },
        &cli.out.join("metadata.json"),
    )?;
    println!(
        "wrote {} comparisons and the exact matrix to {}",
        records.len(),
        cli.out.display()
    );
    Ok(())
}

fn estimate_weights_cmd(cli: &Cli, alternatives: &Path, space: &str, n_samples: u64) -> Result<()> {
    let set = files::load_alternatives(alternatives)?;
    let space = resolve_space(space, &set)?;
    let (weights, std_errors) = estimate_weights(&set, &space, n_samples, cli.seed)?;
    let stored = StoredWeights {
        weights,
        n_samples: Some(n_samples),
        seed: Some(cli.seed),
        std_errors: Some(std_errors),
    };
    let path = cli.out.join("weights.json");
    files::save_weights(&stored, &set, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn keyed(set: &AlternativeSet, values: &[f64]) -> BTreeMap<String, f64> {
    set.ids()
        .iter()
        .cloned()
        .zip(values.iter().copied())
        .collect()
}

/// Win-rate analysis for a matrix, optionally weighted and optionally
/// against a reward vector (which enables model scores and residuals).
fn build_analysis(
    set: &AlternativeSet,
    matrix: &WinRateMatrix,
    weights: Option<&WeightVector>,
    rewards: Option<(&RewardVector, f64)>,
) -> Result<AnalysisFile> {
    let awr = average_win_rate(matrix);
    let borda = borda_count(matrix);
    let wawr = match weights {
        Some(w) if w.mode() == WeightMode::Voronoi => {
            Some(weighted_average_win_rate(matrix, w)?)
        }
        _ => None,
    };

    let mut model_awr = None;
    let mut model_wawr = None;
    let mut residual = None;
    let mut residual_sup_norm = None;
    if let Some((r, lambda)) = rewards {
        let unit = unit_weights(set);
        let w = weights.unwrap_or(&unit);
        let model = model_win_rate(r, w)?;
        match w.mode() {
            WeightMode::Unit => model_awr = Some(model),
            WeightMode::Voronoi => model_wawr = Some(model),
        }
        let res = m_estimator_residual(r, matrix, w, lambda)?;
        residual_sup_norm = Some(res.sup_norm());
        residual = Some(res);
    }

    // rank by rewards when present, else by the best available score
    let rank_source: Vec<f64> = match (&rewards, &wawr) {
        (Some((r, _)), _) => r.values().to_vec(),
        (None, Some(s)) => s.values().to_vec(),
        (None, None) => borda.values().to_vec(),
    };
    let order = ranking(&rank_source);

    Ok(AnalysisFile {
        format_version: FORMAT_VERSION,
        average_win_rate: keyed(set, awr.values()),
        borda: keyed(set, borda.values()),
        weighted_average_win_rate: wawr.map(|s| keyed(set, s.values())),
        model_average_win_rate: model_awr.map(|s| keyed(set, s.values())),
        model_weighted_average_win_rate: model_wawr.map(|s| keyed(set, s.values())),
        residual: residual.map(|s| keyed(set, s.values())),
        residual_sup_norm,
        ranking: order.iter().map(|&i| set.id(i).to_string()).collect(),
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_cmd(
    cli: &Cli,
    alternatives: &Path,
    comparisons: Option<&Path>,
    matrix: Option<&Path>,
    algorithm: Algorithm,
    weights: Option<&Path>,
    space: Option<&str>,
    n_samples: u64,
    grad_tol: f64,
    max_iters: u64,
) -> Result<()> {
    let set = files::load_alternatives(alternatives)?;
    let p = load_matrix_source(&set, comparisons, matrix)?;

    let (w, weight_seed) = match algorithm {
        Algorithm::Mle => {
            if weights.is_some() || space.is_some() {
                return Err(Error::InvalidArgument(
                    "mle uses unit weights; --weights/--space apply to wmle only".into(),
                ));
            }
            (unit_weights(&set), None)
        }
        Algorithm::Wmle => match (weights, space) {
            (Some(path), None) => {
                let stored = files::load_weights(path, &set)?;
                if stored.weights.mode() != WeightMode::Voronoi {
                    return Err(Error::InvalidArgument(
                        "wmle requires Voronoi-mode weights".into(),
                    ));
                }
                (stored.weights, stored.seed)
            }
            (None, Some(spec)) => {
                let space = resolve_space(spec, &set)?;
                let (w, std_errors) = estimate_weights(&set, &space, n_samples, cli.seed)?;
                let stored = StoredWeights {
                    weights: w.clone(),
                    n_samples: Some(n_samples),
                    seed: Some(cli.seed),
                    std_errors: Some(std_errors),
                };
                files::save_weights(&stored, &set, &cli.out.join("weights.json"))?;
                (w, Some(cli.seed))
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "wmle needs exactly one of --weights or --space".into(),
                ))
            }
        },
    };

    let config = SolverConfig {
        lambda: cli.lambda,
        grad_tol,
        max_iters,
        initial: Initial::Zeros,
    };
    let (rewards, report) = solve(&p, &w, &config)?;

    let rewards_path = cli.out.join("rewards.json");
    files::save_rewards(
        &files::rewards_file(&rewards, &set, cli.lambda, w.mode(), weight_seed, &report),
        &rewards_path,
    )?;

    let analysis = build_analysis(&set, &p, Some(&w), Some((&rewards, cli.lambda)))?;
    files::save_analysis(&analysis, &cli.out.join("analysis.json"))?;
    println!(
        "solved in {} iterations (grad sup-norm {:.2e}); ranking: {}",
        report.iterations,
        report.grad_sup_norm,
        analysis.ranking.join(" > ")
    );
    Ok(())
}

fn analyze_cmd(
    cli: &Cli,
    alternatives: &Path,
    comparisons: Option<&Path>,
    matrix: Option<&Path>,
    weights: Option<&Path>,
    rewards: Option<&Path>,
) -> Result<()> {
    let set = files::load_alternatives(alternatives)?;
    let p = load_matrix_source(&set, comparisons, matrix)?;
    let stored_weights = weights
        .map(|path| files::load_weights(path, &set))
        .transpose()?;
    // the reward file's lambda governs the residuals
    let loaded_rewards = rewards
        .map(|path| files::load_rewards(path, &set))
        .transpose()?;

    let analysis = build_analysis(
        &set,
        &p,
        stored_weights.as_ref().map(|s| &s.weights),
        loaded_rewards.as_ref().map(|(r, f)| (r, f.lambda)),
    )?;
    let path = cli.out.join("analysis.json");
    files::save_analysis(&analysis, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn load_instance(
    alternatives: Option<&Path>,
    population: Option<&Path>,
) -> Result<(AlternativeSet, Population)> {
    match (alternatives, population) {
        (Some(a), Some(p)) => Ok((files::load_alternatives(a)?, files::load_population(p)?)),
        (None, None) => Ok((
            fixtures::square_corner_set()?,
            fixtures::square_corner_linear_population()?,
        )),
        _ => Err(Error::InvalidArgument(
            "provide both --alternatives and --population, or neither for the built-in instance"
                .into(),
        )),
    }
}

fn experiment_cmd(cli: &Cli) -> Result<()> {
    let Command::Experiment {
        name,
        alternatives,
        population,
        algorithm,
        target,
        direction,
        new_id,
        eps_list,
        space,
        n_samples,
        c_param,
    } = &cli.command
    else {
        unreachable!("dispatched from run");
    };

    let solver_config = SolverConfig {
        lambda: cli.lambda,
        ..SolverConfig::default()
    };

    match name.as_str() {
        "appendix-d" => {
            let report = winner_flip_report(&solver_config)?;
            let path = cli.out.join("appendix_d.json");
            files::save_winner_flip(&files::winner_flip_file(&report, cli.lambda), &path)?;
            println!(
                "winner {} -> {} (flipped: {}); wrote {}",
                report.original.borda_winner,
                report.cloned.borda_winner,
                report.winner_flipped,
                path.display()
            );
        }
        "impossibility" => {
            let inst = impossibility_instance(*c_param)?;
            let path = cli.out.join("impossibility.json");
            files::save_impossibility(
                &files::ImpossibilityFile {
                    format_version: FORMAT_VERSION,
                    c_param: inst.c_param,
                    kappa: inst.kappa,
                    win_prob_population_1: inst.win_probs[0],
                    win_prob_population_2: inst.win_probs[1],
                    mean_reward_b_population_1: inst.mean_reward_b[0],
                    mean_reward_b_population_2: inst.mean_reward_b[1],
                    mean_reward_gap: inst.mean_reward_gap,
                },
                &path,
            )?;
            println!(
                "kappa = {}, win probs = {:?}, mean-reward gap = {:.4}; wrote {}",
                inst.kappa,
                inst.win_probs,
                inst.mean_reward_gap,
                path.display()
            );
        }
        "clone-sweep" => {
            let (set, pop) = load_instance(alternatives.as_deref(), population.as_deref())?;
            let space = resolve_space(space, &set)?;
            let raw_direction = parse_f64_list(direction, "direction")?;
            let norm = raw_direction.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidArgument("direction must be nonzero".into()));
            }
            let unit_direction =
                ContextVector::new(raw_direction.iter().map(|v| v / norm).collect())?;
            let eps = parse_f64_list(eps_list, "eps-list")?;
            let sweep_algorithm = match algorithm {
                Algorithm::Mle => SweepAlgorithm::Mle,
                Algorithm::Wmle => SweepAlgorithm::Wmle,
            };
            let weights_config = WeightsConfig {
                n_samples: *n_samples,
                seed: cli.seed,
            };
            let report = clone_robustness_sweep(
                &set,
                &pop,
                target,
                &unit_direction,
                new_id,
                sweep_algorithm,
                &eps,
                &space,
                &weights_config,
                &solver_config,
            )?;
            let csv_path = cli.out.join("robustness.csv");
            files::save_robustness_csv(&report, &csv_path)?;
            files::save_sweep_sidecar(
                &files::SweepSidecar {
                    format_version: FORMAT_VERSION,
                    algorithm: sweep_algorithm.as_str().to_string(),
                    lambda: cli.lambda,
                    weight_seed: cli.seed,
                    weight_samples: *n_samples,
                    space_lower: space.lower().coords().to_vec(),
                    space_upper: space.upper().coords().to_vec(),
                    target: target.clone(),
                    clone_id: new_id.clone(),
                    direction: unit_direction.coords().to_vec(),
                    eps_list: eps.clone(),
                },
                &cli.out.join("robustness_meta.json"),
            )?;
            let max_delta = report
                .rows
                .iter()
                .map(|r| r.delta_existing)
                .fold(0.0, f64::max);
            println!(
                "{} sweep over {} epsilons: max delta_existing {:.4e}, winner flip: {}; wrote {}",
                sweep_algorithm.as_str(),
                report.rows.len(),
                max_delta,
                report.any_winner_flip(),
                csv_path.display()
            );
        }
        "integral-check" => {
            let (set, pop) = load_instance(alternatives.as_deref(), population.as_deref())?;
            let space = resolve_space(space, &set)?;
            let p = representative_matrix(&pop, &set)?;
            // weight error feeds the reference value, so drive it an order
            // below the integral estimate's own noise
            let (w, _) = estimate_weights(&set, &space, n_samples * 10, cli.seed)?;
            let (rewards, _) = solve(&p, &w, &solver_config)?;
            let (estimate, std_error) = integral_objective_estimate(
                &rewards,
                &p,
                &set,
                &space,
                cli.lambda,
                *n_samples,
                cli.seed.wrapping_add(1),
            )?;
            let direct = objective(&rewards, &p, &w, cli.lambda)?;
            let offset = self_pair_offset(&w);
            let reference = direct + offset;
            let abs_difference = (estimate - reference).abs();
            let path = cli.out.join("integral_check.json");
            files::save_integral_check(
                &files::IntegralCheckFile {
                    format_version: FORMAT_VERSION,
                    lambda: cli.lambda,
                    n_samples: *n_samples,
                    seed: cli.seed,
                    estimate,
                    std_error,
                    reference,
                    objective: direct,
                    self_pair_offset: offset,
                    abs_difference,
                    within_three_sigma: abs_difference <= 3.0 * std_error,
                },
                &path,
            )?;
            println!(
                "integral {:.6} vs direct {:.6} (|diff| = {:.2e}, 3 sigma = {:.2e}); wrote {}",
                estimate,
                reference,
                abs_difference,
                3.0 * std_error,
                path.display()
            );
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown experiment {other:?}; expected clone-sweep, appendix-d, impossibility, or integral-check"
            )))
        }
    }
    Ok(())
}
