//! Alternatives and their context vectors.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// A point in context space (`R^d`, d >= 1, all coordinates finite).
#[derive(Debug, Clone, PartialEq)]
pub struct ContextVector {
    coords: Vec<f64>,
}

impl ContextVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("context vector must have dimension >= 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("context vector coordinates must be finite"));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &ContextVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &ContextVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// `self + scale * direction`.
    pub fn offset(&self, direction: &ContextVector, scale: f64) -> Result<ContextVector> {
        if self.dim() != direction.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: direction.dim(),
            });
        }
        ContextVector::new(
            self.coords
                .iter()
                .zip(&direction.coords)
                .map(|(a, d)| a + scale * d)
                .collect(),
        )
    }
}

/// A finite set of alternatives, each with a distinct id and a context
/// vector; all contexts share the same dimension.
#[derive(Debug, Clone)]
pub struct AlternativeSet {
    ids: Vec<String>,
    contexts: Vec<ContextVector>,
    index: HashMap<String, usize>,
}

impl AlternativeSet {
    pub fn new(ids: Vec<String>, contexts: Vec<ContextVector>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::invalid("alternative set must be nonempty"));
        }
        if ids.len() != contexts.len() {
            return Err(Error::invalid(format!(
                "{} ids but {} contexts",
                ids.len(),
                contexts.len()
            )));
        }
        let dim = contexts[0].dim();
        for c in &contexts {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.dim(),
                });
            }
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate alternative id: {id}")));
            }
        }
        Ok(Self {
            ids,
            contexts,
            index,
        })
    }

    /// Convenience constructor from `(id, coords)` pairs.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut ids = Vec::new();
        let mut contexts = Vec::new();
        for (id, coords) in pairs {
            ids.push(id.into());
            contexts.push(ContextVector::new(coords)?);
        }
        Self::new(ids, contexts)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.contexts[0].dim()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn context(&self, index: usize) -> &ContextVector {
        &self.contexts[index]
    }

    pub fn contexts(&self) -> &[ContextVector] {
        &self.contexts
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// A new set with one extra alternative appended.
    pub fn with_added(&self, id: String, context: ContextVector) -> Result<Self> {
        let mut ids = self.ids.clone();
        let mut contexts = self.contexts.clone();
        ids.push(id);
        contexts.push(context);
        Self::new(ids, contexts)
    }
}
