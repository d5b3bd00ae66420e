//! Annotator populations: mixtures of reward functions over an alternative
//! set, with BTL choice behavior.

use crate::alternatives::{AlternativeSet, ContextVector};
use crate::btl::btl_win_prob;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Proportions must sum to 1 within this tolerance.
pub const PROPORTION_TOL: f64 = 1e-12;

/// A reward function over context space.
///
/// `Tabular` pins a value per alternative id and is only defined on that id
/// set. `Linear` is `theta . x + bias`, defined everywhere, and Lipschitz
/// with constant `||theta||_2`.
#[derive(Debug, Clone)]
pub enum RewardField {
    Tabular(BTreeMap<String, f64>),
    Linear { theta: ContextVector, bias: f64 },
}

impl RewardField {
    pub fn tabular<I, S>(values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let map: BTreeMap<String, f64> = values.into_iter().map(|(k, v)| (k.into(), v)).collect();
        if map.is_empty() {
            return Err(Error::invalid("tabular reward field must be nonempty"));
        }
        if map.values().any(|v| !v.is_finite()) {
            return Err(Error::invalid("tabular reward values must be finite"));
        }
        Ok(RewardField::Tabular(map))
    }

    pub fn linear(theta: ContextVector, bias: f64) -> Result<Self> {
        if !bias.is_finite() {
            return Err(Error::invalid("linear reward bias must be finite"));
        }
        Ok(RewardField::Linear { theta, bias })
    }

    /// Lipschitz constant of the field (`||theta||` for linear fields; not
    /// defined for tabular fields, which have no off-set extension).
    pub fn lipschitz_constant(&self) -> Option<f64> {
        match self {
            RewardField::Tabular(_) => None,
            RewardField::Linear { theta, .. } => Some(theta.norm()),
        }
    }

    /// Evaluate the field at an arbitrary context (linear fields only).
    pub fn value_at(&self, context: &ContextVector) -> Result<f64> {
        match self {
            RewardField::Tabular(_) => Err(Error::Unsupported(
                "tabular reward fields are only defined on their alternative set".into(),
            )),
            RewardField::Linear { theta, bias } => Ok(theta.dot(context)? + bias),
        }
    }
}

/// Reward of one annotator type for an alternative in `set`.
pub fn annotator_reward(field: &RewardField, set: &AlternativeSet, id: &str) -> Result<f64> {
    let index = set.index_of(id)?;
    match field {
        RewardField::Tabular(values) => values
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownId(id.to_string())),
        RewardField::Linear { theta, bias } => {
            if theta.dim() != set.dim() {
                return Err(Error::DimensionMismatch {
                    expected: set.dim(),
                    got: theta.dim(),
                });
            }
            Ok(theta.dot(set.context(index))? + bias)
        }
    }
}

/// One annotator type: a mixture proportion and its reward field.
#[derive(Debug, Clone)]
pub struct AnnotatorType {
    pub proportion: f64,
    pub reward: RewardField,
}

/// A mixture of annotator types; proportions lie in (0, 1] and sum to 1.
#[derive(Debug, Clone)]
pub struct Population {
    types: Vec<AnnotatorType>,
}

impl Population {
    pub fn new(types: Vec<AnnotatorType>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::invalid("population must have at least one type"));
        }
        let mut sum = 0.0;
        for t in &types {
            if !(t.proportion > 0.0 && t.proportion <= 1.0) {
                return Err(Error::invalid(format!(
                    "type proportion {} outside (0, 1]",
                    t.proportion
                )));
            }
            sum += t.proportion;
        }
        if (sum - 1.0).abs() > PROPORTION_TOL {
            return Err(Error::invalid(format!(
                "type proportions sum to {sum}, expected 1"
            )));
        }
        Ok(Self { types })
    }

    pub fn types(&self) -> &[AnnotatorType] {
        &self.types
    }

    /// Rewards of every type for every alternative, as one row per type
    /// aligned with `set` order. Also validates tabular coverage and linear
    /// dimensions against `set`.
    pub fn reward_table(&self, set: &AlternativeSet) -> Result<Vec<Vec<f64>>> {
        self.types
            .iter()
            .map(|t| {
                set.ids()
                    .iter()
                    .map(|id| annotator_reward(&t.reward, set, id))
                    .collect()
            })
            .collect()
    }

    /// Mean reward across types for one alternative.
    pub fn mean_reward(&self, set: &AlternativeSet, id: &str) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.types {
            acc += t.proportion * annotator_reward(&t.reward, set, id)?;
        }
        Ok(acc)
    }
}

/// Expected probability that `a` beats `b` when an annotator type is drawn
/// from the mixture and answers by its BTL model.
pub fn population_win_prob(
    pop: &Population,
    set: &AlternativeSet,
    a: &str,
    b: &str,
) -> Result<f64> {
    let mut acc = 0.0;
    for t in pop.types() {
        let ra = annotator_reward(&t.reward, set, a)?;
        let rb = annotator_reward(&t.reward, set, b)?;
        acc += t.proportion * btl_win_prob(ra, rb)?;
    }
    Ok(acc)
}

/// One observed comparison: `winner` is either `a` or `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceRecord {
    pub a: String,
    pub b: String,
    pub winner: String,
}

impl PreferenceRecord {
    pub fn new(a: String, b: String, winner: String) -> Result<Self> {
        if a == b {
            return Err(Error::invalid("comparison requires two distinct alternatives"));
        }
        if winner != a && winner != b {
            return Err(Error::invalid(format!(
                "winner {winner:?} is neither {a:?} nor {b:?}"
            )));
        }
        Ok(Self { a, b, winner })
    }
}
