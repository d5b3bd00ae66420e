//! File formats: loaders and writers for every artifact the toolkit reads
//! or emits.
//!
//! Alternatives travel as CSV (`id,c1,...,cd`), comparisons as JSON Lines,
//! everything else as JSON with a `format_version` field. Maps are kept as
//! `BTreeMap` so reruns serialize byte-identically.

use crate::alternatives::{AlternativeSet, ContextVector};
use crate::error::{Error, Result};
use crate::experiments::{RobustnessReport, WinnerFlipReport};
use crate::population::{AnnotatorType, Population, PreferenceRecord, RewardField};
use crate::solver::{RewardVector, SolveReport};
use crate::voronoi::{SpaceBox, WeightMode, WeightVector};
use crate::winrate::WinRateMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

/// Version stamped into every JSON artifact.
pub const FORMAT_VERSION: u32 = 1;

fn default_version() -> u32 {
    FORMAT_VERSION
}

fn parse_err(path: &Path, err: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{}: {err}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| parse_err(path, e))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// alternatives: CSV with header id,c1,...,cd

pub fn load_alternatives(path: &Path) -> Result<AlternativeSet> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers().map_err(|e| parse_err(path, e))?.clone();
    if headers.is_empty() || headers.get(0) != Some("id") {
        return Err(parse_err(path, "expected header starting with `id`"));
    }
    let dim = headers.len() - 1;
    if dim == 0 {
        return Err(parse_err(path, "expected at least one context column"));
    }
    let mut ids = Vec::new();
    let mut contexts = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| parse_err(path, e))?;
        if row.len() != dim + 1 {
            return Err(parse_err(
                path,
                format!("row has {} fields, expected {}", row.len(), dim + 1),
            ));
        }
        ids.push(row[0].to_string());
        let coords = (1..=dim)
            .map(|k| {
                row[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(path, format!("bad coordinate {:?}: {e}", &row[k])))
            })
            .collect::<Result<Vec<f64>>>()?;
        contexts.push(ContextVector::new(coords)?);
    }
    AlternativeSet::new(ids, contexts)
}

pub fn save_alternatives(set: &AlternativeSet, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["id".to_string()];
    header.extend((1..=set.dim()).map(|k| format!("c{k}")));
    writer.write_record(&header).map_err(|e| parse_err(path, e))?;
    for (id, ctx) in set.ids().iter().zip(set.contexts()) {
        let mut row = vec![id.clone()];
        row.extend(ctx.coords().iter().map(|c| c.to_string()));
        writer.write_record(&row).map_err(|e| parse_err(path, e))?;
    }
    writer.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// population JSON

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RewardDto {
    Tabular { values: BTreeMap<String, f64> },
    Linear { theta: Vec<f64>, bias: f64 },
}

#[derive(Debug, Serialize, Deserialize)]
struct TypeDto {
    proportion: f64,
    reward: RewardDto,
}

#[derive(Debug, Serialize, Deserialize)]
struct PopulationFile {
    #[serde(default = "default_version")]
    format_version: u32,
    types: Vec<TypeDto>,
}

pub fn load_population(path: &Path) -> Result<Population> {
    let file: PopulationFile = read_json(path)?;
    let types = file
        .types
        .into_iter()
        .map(|t| {
            let reward = match t.reward {
                RewardDto::Tabular { values } => RewardField::tabular(values)?,
                RewardDto::Linear { theta, bias } => {
                    RewardField::linear(ContextVector::new(theta)?, bias)?
                }
            };
            Ok(AnnotatorType {
                proportion: t.proportion,
                reward,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Population::new(types)
}

pub fn save_population(pop: &Population, path: &Path) -> Result<()> {
    let types = pop
        .types()
        .iter()
        .map(|t| TypeDto {
            proportion: t.proportion,
            reward: match &t.reward {
                RewardField::Tabular(values) => RewardDto::Tabular {
                    values: values.clone(),
                },
                RewardField::Linear { theta, bias } => RewardDto::Linear {
                    theta: theta.coords().to_vec(),
                    bias: *bias,
                },
            },
        })
        .collect();
    write_json(
        path,
        &PopulationFile {
            format_version: FORMAT_VERSION,
            types,
        },
    )
}

// ---------------------------------------------------------------------------
// comparisons: JSON Lines

#[derive(Debug, Serialize, Deserialize)]
struct RecordDto {
    a: String,
    b: String,
    winner: String,
}

pub fn load_comparisons(path: &Path) -> Result<Vec<PreferenceRecord>> {
    let file = fs::File::open(path)?;
    let mut records = Vec::new();
    for (line_no, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let dto: RecordDto = serde_json::from_str(&line)
            .map_err(|e| parse_err(path, format!("line {}: {e}", line_no + 1)))?;
        records.push(PreferenceRecord::new(dto.a, dto.b, dto.winner)?);
    }
    Ok(records)
}

pub fn save_comparisons(records: &[PreferenceRecord], path: &Path) -> Result<()> {
    let mut out = fs::File::create(path)?;
    for rec in records {
        let dto = RecordDto {
            a: rec.a.clone(),
            b: rec.b.clone(),
            winner: rec.winner.clone(),
        };
        let line = serde_json::to_string(&dto).map_err(|e| parse_err(path, e))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// space JSON

#[derive(Debug, Serialize, Deserialize)]
struct SpaceFile {
    #[serde(default = "default_version")]
    format_version: u32,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

pub fn load_space(path: &Path) -> Result<SpaceBox> {
    let file: SpaceFile = read_json(path)?;
    SpaceBox::new(ContextVector::new(file.lower)?, ContextVector::new(file.upper)?)
}

pub fn save_space(space: &SpaceBox, path: &Path) -> Result<()> {
    write_json(
        path,
        &SpaceFile {
            format_version: FORMAT_VERSION,
            lower: space.lower().coords().to_vec(),
            upper: space.upper().coords().to_vec(),
        },
    )
}

// ---------------------------------------------------------------------------
// weights JSON

#[derive(Debug, Serialize, Deserialize)]
struct WeightsFile {
    #[serde(default = "default_version")]
    format_version: u32,
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    weights: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_errors: Option<BTreeMap<String, f64>>,
}

/// Weights plus the estimation metadata that the weights file carries.
#[derive(Debug, Clone)]
pub struct StoredWeights {
    pub weights: WeightVector,
    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
    pub std_errors: Option<Vec<f64>>,
}

pub fn load_weights(path: &Path, set: &AlternativeSet) -> Result<StoredWeights> {
    let file: WeightsFile = read_json(path)?;
    let mut values = Vec::with_capacity(set.len());
    for id in set.ids() {
        let w = file
            .weights
            .get(id)
            .copied()
            .ok_or_else(|| parse_err(path, format!("missing weight for id {id:?}")))?;
        values.push(w);
    }
    if file.weights.len() != set.len() {
        return Err(parse_err(
            path,
            "weights file covers different ids than the alternative set",
        ));
    }
    let weights = match file.mode.as_str() {
        "voronoi" => WeightVector::voronoi(values)?,
        "unit" => {
            if values.iter().any(|&w| w != 1.0) {
                return Err(parse_err(path, "unit-mode weights must all equal 1"));
            }
            WeightVector::unit(set.len())?
        }
        other => return Err(parse_err(path, format!("unknown weight mode {other:?}"))),
    };
    let std_errors = match file.std_errors {
        None => None,
        Some(map) => {
            let mut out = Vec::with_capacity(set.len());
            for id in set.ids() {
                out.push(
                    map.get(id)
                        .copied()
                        .ok_or_else(|| parse_err(path, format!("missing std error for {id:?}")))?,
                );
            }
            Some(out)
        }
    };
    Ok(StoredWeights {
        weights,
        n_samples: file.n_samples,
        seed: file.seed,
        std_errors,
    })
}

pub fn save_weights(stored: &StoredWeights, set: &AlternativeSet, path: &Path) -> Result<()> {
    let mode = match stored.weights.mode() {
        WeightMode::Voronoi => "voronoi",
        WeightMode::Unit => "unit",
    };
    let keyed = |values: &[f64]| -> BTreeMap<String, f64> {
        set.ids()
            .iter()
            .cloned()
            .zip(values.iter().copied())
            .collect()
    };
    write_json(
        path,
        &WeightsFile {
            format_version: FORMAT_VERSION,
            mode: mode.to_string(),
            n_samples: stored.n_samples,
            seed: stored.seed,
            weights: keyed(stored.weights.values()),
            std_errors: stored.std_errors.as_deref().map(keyed),
        },
    )
}

// ---------------------------------------------------------------------------
// win-rate matrix JSON

#[derive(Debug, Serialize, Deserialize)]
struct MatrixFile {
    #[serde(default = "default_version")]
    format_version: u32,
    ids: Vec<String>,
    p: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<Vec<u64>>>,
}

pub fn load_matrix(path: &Path, set: &AlternativeSet) -> Result<WinRateMatrix> {
    let file: MatrixFile = read_json(path)?;
    if file.ids != set.ids() {
        return Err(parse_err(
            path,
            "matrix ids do not match the alternative set (order included)",
        ));
    }
    let m = file.ids.len();
    let mut p = Vec::with_capacity(m * m);
    for row in &file.p {
        if row.len() != m {
            return Err(parse_err(path, "matrix rows must have length m"));
        }
        p.extend_from_slice(row);
    }
    if file.p.len() != m {
        return Err(parse_err(path, "matrix must have m rows"));
    }
    let counts = match file.counts {
        None => None,
        Some(rows) => {
            let mut flat = Vec::with_capacity(m * m);
            if rows.len() != m {
                return Err(parse_err(path, "counts must have m rows"));
            }
            for row in rows {
                if row.len() != m {
                    return Err(parse_err(path, "counts rows must have length m"));
                }
                flat.extend_from_slice(&row);
            }
            Some(flat)
        }
    };
    WinRateMatrix::from_probabilities(m, p, counts)
}

pub fn save_matrix(matrix: &WinRateMatrix, set: &AlternativeSet, path: &Path) -> Result<()> {
    let m = matrix.len();
    let rows = |flat: &[f64]| -> Vec<Vec<f64>> {
        (0..m).map(|i| flat[i * m..(i + 1) * m].to_vec()).collect()
    };
    let counts = matrix
        .counts()
        .map(|flat| (0..m).map(|i| flat[i * m..(i + 1) * m].to_vec()).collect());
    write_json(
        path,
        &MatrixFile {
            format_version: FORMAT_VERSION,
            ids: set.ids().to_vec(),
            p: rows(matrix.entries()),
            counts,
        },
    )
}

// ---------------------------------------------------------------------------
// rewards JSON

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportDto {
    pub iterations: u64,
    pub objective: f64,
    pub grad_sup_norm: f64,
    pub error_radius: f64,
}

impl From<&SolveReport> for ReportDto {
    fn from(r: &SolveReport) -> Self {
        Self {
            iterations: r.iterations,
            objective: r.objective,
            grad_sup_norm: r.grad_sup_norm,
            error_radius: r.error_radius,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RewardsFile {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub lambda: f64,
    pub weights_mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub rewards: BTreeMap<String, f64>,
    pub report: ReportDto,
}

pub fn load_rewards(path: &Path, set: &AlternativeSet) -> Result<(RewardVector, RewardsFile)> {
    let file: RewardsFile = read_json(path)?;
    if file.rewards.len() != set.len() {
        return Err(parse_err(path, "rewards cover different ids than the set"));
    }
    let mut values = Vec::with_capacity(set.len());
    for id in set.ids() {
        values.push(
            file.rewards
                .get(id)
                .copied()
                .ok_or_else(|| parse_err(path, format!("missing reward for {id:?}")))?,
        );
    }
    Ok((RewardVector::new(values)?, file))
}

pub fn save_rewards(file: &RewardsFile, path: &Path) -> Result<()> {
    write_json(path, file)
}

pub fn rewards_file(
    rewards: &RewardVector,
    set: &AlternativeSet,
    lambda: f64,
    mode: WeightMode,
    seed: Option<u64>,
    report: &SolveReport,
) -> RewardsFile {
    RewardsFile {
        format_version: FORMAT_VERSION,
        lambda,
        weights_mode: match mode {
            WeightMode::Voronoi => "voronoi".to_string(),
            WeightMode::Unit => "unit".to_string(),
        },
        seed,
        rewards: set
            .ids()
            .iter()
            .cloned()
            .zip(rewards.values().iter().copied())
            .collect(),
        report: report.into(),
    }
}

// ---------------------------------------------------------------------------
// analysis JSON

#[derive(Debug, Serialize, Deserialize)]
pub struct AnalysisFile {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub average_win_rate: BTreeMap<String, f64>,
    pub borda: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighted_average_win_rate: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_average_win_rate: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_weighted_average_win_rate: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_sup_norm: Option<f64>,
    /// Ids ordered best-first (by reward when present, else by Borda).
    pub ranking: Vec<String>,
}

pub fn save_analysis(file: &AnalysisFile, path: &Path) -> Result<()> {
    write_json(path, file)
}

pub fn load_analysis(path: &Path) -> Result<AnalysisFile> {
    read_json(path)
}

// ---------------------------------------------------------------------------
// robustness sweep: CSV rows + JSON sidecar

pub fn save_robustness_csv(report: &RobustnessReport, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer
        .write_record([
            "epsilon",
            "delta_existing",
            "delta_pair",
            "winner_before",
            "winner_after",
        ])
        .map_err(|e| parse_err(path, e))?;
    for row in &report.rows {
        writer
            .write_record([
                row.epsilon.to_string(),
                row.delta_existing.to_string(),
                row.delta_pair.to_string(),
                row.winner_before.clone(),
                row.winner_after.clone(),
            ])
            .map_err(|e| parse_err(path, e))?;
    }
    writer.flush()?;
    Ok(())
}

/// Provenance sidecar written next to a robustness CSV.
#[derive(Debug, Serialize, Deserialize)]
pub struct SweepSidecar {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub algorithm: String,
    pub lambda: f64,
    pub weight_seed: u64,
    pub weight_samples: u64,
    pub space_lower: Vec<f64>,
    pub space_upper: Vec<f64>,
    pub target: String,
    pub clone_id: String,
    pub direction: Vec<f64>,
    pub eps_list: Vec<f64>,
}

pub fn save_sweep_sidecar(sidecar: &SweepSidecar, path: &Path) -> Result<()> {
    write_json(path, sidecar)
}

// ---------------------------------------------------------------------------
// winner-flip report JSON

#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceTablesDto {
    pub ids: Vec<String>,
    pub win_rates: Vec<Vec<f64>>,
    pub borda: BTreeMap<String, f64>,
    pub mle_rewards: BTreeMap<String, f64>,
    pub mle_ranking: Vec<String>,
    pub borda_winner: String,
    pub mle_winner: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WinnerFlipFile {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub lambda: f64,
    pub original: InstanceTablesDto,
    pub cloned: InstanceTablesDto,
    pub winner_flipped: bool,
}

fn instance_tables_dto(t: &crate::experiments::InstanceTables) -> InstanceTablesDto {
    let m = t.ids.len();
    InstanceTablesDto {
        ids: t.ids.clone(),
        win_rates: (0..m)
            .map(|i| (0..m).map(|j| t.matrix.get(i, j)).collect())
            .collect(),
        borda: t.ids.iter().cloned().zip(t.borda.iter().copied()).collect(),
        mle_rewards: t
            .ids
            .iter()
            .cloned()
            .zip(t.mle_rewards.iter().copied())
            .collect(),
        mle_ranking: t.mle_ranking.clone(),
        borda_winner: t.borda_winner.clone(),
        mle_winner: t.mle_winner.clone(),
    }
}

pub fn winner_flip_file(report: &WinnerFlipReport, lambda: f64) -> WinnerFlipFile {
    WinnerFlipFile {
        format_version: FORMAT_VERSION,
        lambda,
        original: instance_tables_dto(&report.original),
        cloned: instance_tables_dto(&report.cloned),
        winner_flipped: report.winner_flipped,
    }
}

pub fn save_winner_flip(file: &WinnerFlipFile, path: &Path) -> Result<()> {
    write_json(path, file)
}

// ---------------------------------------------------------------------------
// impossibility report JSON

#[derive(Debug, Serialize, Deserialize)]
pub struct ImpossibilityFile {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub c_param: f64,
    pub kappa: f64,
    pub win_prob_population_1: f64,
    pub win_prob_population_2: f64,
    pub mean_reward_b_population_1: f64,
    pub mean_reward_b_population_2: f64,
    pub mean_reward_gap: f64,
}

pub fn save_impossibility(file: &ImpossibilityFile, path: &Path) -> Result<()> {
    write_json(path, file)
}

// ---------------------------------------------------------------------------
// integral-check report JSON

#[derive(Debug, Serialize, Deserialize)]
pub struct IntegralCheckFile {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub lambda: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub estimate: f64,
    pub std_error: f64,
    /// Direct weighted objective plus the self-pair constant the integral
    /// form carries.
    pub reference: f64,
    pub objective: f64,
    pub self_pair_offset: f64,
    pub abs_difference: f64,
    pub within_three_sigma: bool,
}

pub fn save_integral_check(file: &IntegralCheckFile, path: &Path) -> Result<()> {
    write_json(path, file)
}

// ---------------------------------------------------------------------------
// gen-dataset sidecar

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetSidecar {
    #[serde(default = "default_version")]
    pub format_version: u32,
    pub seed: u64,
    pub per_pair: u64,
    pub pair_count: u64,
    pub record_count: u64,
}

pub fn save_dataset_sidecar(sidecar: &DatasetSidecar, path: &Path) -> Result<()> {
    write_json(path, sidecar)
}
