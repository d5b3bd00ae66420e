//! Pairwise win-rate matrices, exact (from a population) or empirical
//! (from sampled comparisons).

use crate::alternatives::AlternativeSet;
use crate::btl::btl_win_prob;
use crate::error::{Error, Result};
use crate::population::{Population, PreferenceRecord};

/// Antisymmetry tolerance for `p[i][j] + p[j][i] = 1`.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// An `m x m` matrix of pairwise win probabilities, aligned with the order
/// of an [`AlternativeSet`]. The diagonal is exactly 1/2. `counts`, when
/// present, holds the symmetric per-pair comparison tallies behind an
/// empirical matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WinRateMatrix {
    m: usize,
    p: Vec<f64>,
    counts: Option<Vec<u64>>,
}

impl WinRateMatrix {
    /// Validates all invariants: entries in [0, 1], `p + p^T = 1` within
    /// [`ANTISYMMETRY_TOL`], exact 1/2 diagonal, symmetric counts.
    pub fn from_probabilities(m: usize, p: Vec<f64>, counts: Option<Vec<u64>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("win-rate matrix must have m >= 1"));
        }
        if p.len() != m * m {
            return Err(Error::invalid(format!(
                "expected {} entries for an {m}x{m} matrix, got {}",
                m * m,
                p.len()
            )));
        }
        for i in 0..m {
            if p[i * m + i] != 0.5 {
                return Err(Error::invalid(format!(
                    "diagonal entry ({i},{i}) must be exactly 1/2, got {}",
                    p[i * m + i]
                )));
            }
            for j in 0..m {
                let v = p[i * m + j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(format!(
                        "win probability ({i},{j}) = {v} outside [0, 1]"
                    )));
                }
                if (v + p[j * m + i] - 1.0).abs() > ANTISYMMETRY_TOL {
                    return Err(Error::invalid(format!(
                        "entries ({i},{j}) and ({j},{i}) sum to {}, expected 1",
                        v + p[j * m + i]
                    )));
                }
            }
        }
        if let Some(c) = &counts {
            if c.len() != m * m {
                return Err(Error::invalid("counts shape must match the matrix"));
            }
            for i in 0..m {
                for j in 0..m {
                    if c[i * m + j] != c[j * m + i] {
                        return Err(Error::invalid(format!(
                            "counts ({i},{j}) and ({j},{i}) differ"
                        )));
                    }
                }
            }
        }
        Ok(Self { m, p, counts })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// `p(i beats j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.m + j]
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    pub fn count(&self, i: usize, j: usize) -> Option<u64> {
        self.counts.as_ref().map(|c| c[i * self.m + j])
    }

    /// Row-major copy of the probability entries.
    pub fn entries(&self) -> &[f64] {
        &self.p
    }

    /// Largest absolute entrywise difference to another matrix.
    pub fn max_abs_diff(&self, other: &WinRateMatrix) -> Result<f64> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: other.m,
            });
        }
        Ok(self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Exact win-rate matrix for a representative dataset: entry `(x, y)` is the
/// population-expected probability that `x` beats `y`; the diagonal is 1/2;
/// no counts.
pub fn representative_matrix(pop: &Population, set: &AlternativeSet) -> Result<WinRateMatrix> {
    let m = set.len();
    let rewards = pop.reward_table(set)?;
    let mut p = vec![0.5; m * m];
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let mut acc = 0.0;
            for (t, row) in pop.types().iter().zip(&rewards) {
                acc += t.proportion * btl_win_prob(row[i], row[j])?;
            }
            p[i * m + j] = acc;
        }
    }
    WinRateMatrix::from_probabilities(m, p, None)
}

/// Empirical win-rate matrix from observed comparisons. Every unordered
/// pair must appear at least once; otherwise an incomplete-coverage error
/// lists the missing pairs.
pub fn empirical_matrix(
    records: &[PreferenceRecord],
    set: &AlternativeSet,
) -> Result<WinRateMatrix> {
    let m = set.len();
    let mut wins = vec![0u64; m * m];
    for rec in records {
        let i = set.index_of(&rec.a)?;
        let j = set.index_of(&rec.b)?;
        if i == j {
            return Err(Error::invalid(format!(
                "record compares {:?} with itself",
                rec.a
            )));
        }
        let w = set.index_of(&rec.winner)?;
        if w == i {
            wins[i * m + j] += 1;
        } else if w == j {
            wins[j * m + i] += 1;
        } else {
            return Err(Error::invalid(format!(
                "winner {:?} is not part of the pair ({:?}, {:?})",
                rec.winner, rec.a, rec.b
            )));
        }
    }

    let mut missing = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            if wins[i * m + j] + wins[j * m + i] == 0 {
                missing.push((set.id(i).to_string(), set.id(j).to_string()));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteCoverage { missing });
    }

    let mut p = vec![0.5; m * m];
    let mut counts = vec![0u64; m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let total = wins[i * m + j] + wins[j * m + i];
            p[i * m + j] = wins[i * m + j] as f64 / total as f64;
            p[j * m + i] = wins[j * m + i] as f64 / total as f64;
            counts[i * m + j] = total;
            counts[j * m + i] = total;
        }
    }
    WinRateMatrix::from_probabilities(m, p, Some(counts))
}
