//! Seeded sampling of preference datasets.
//!
//! All randomness flows through `ChaCha8Rng`. Dataset-level sampling
//! partitions the generator into one substream per unordered pair, derived
//! from `(seed, pair index)`, so output is reproducible from a single 64-bit
//! seed and independent of any parallel scheduling.

use crate::alternatives::AlternativeSet;
use crate::btl::btl_win_prob;
use crate::error::{Error, Result};
use crate::population::{annotator_reward, Population, PreferenceRecord};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Draw one comparison between `a` and `b`: pick an annotator type by
/// mixture proportion, then the winner by that type's BTL probability.
pub fn sample_comparison<R: Rng>(
    pop: &Population,
    set: &AlternativeSet,
    a: &str,
    b: &str,
    rng: &mut R,
) -> Result<PreferenceRecord> {
    if a == b {
        return Err(Error::invalid("cannot compare an alternative with itself"));
    }
    // cumulative-proportion draw; the final type absorbs rounding slack
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = pop.types().len() - 1;
    for (k, t) in pop.types().iter().enumerate() {
        acc += t.proportion;
        if u < acc {
            chosen = k;
            break;
        }
    }
    let field = &pop.types()[chosen].reward;
    let ra = annotator_reward(field, set, a)?;
    let rb = annotator_reward(field, set, b)?;
    let p_a = btl_win_prob(ra, rb)?;
    let winner = if rng.random::<f64>() < p_a { a } else { b };
    PreferenceRecord::new(a.to_string(), b.to_string(), winner.to_string())
}

/// The substream used for the pair with the given index in the unordered
/// pair enumeration `(0,1), (0,2), ..., (1,2), ...`.
pub fn pair_stream(seed: u64, pair_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pair_index);
    rng
}

/// Sample `per_pair` comparisons for every unordered pair in `set`,
/// deterministically from `seed`. Records are grouped by pair in
/// enumeration order.
pub fn sample_pair_dataset(
    pop: &Population,
    set: &AlternativeSet,
    per_pair: u64,
    seed: u64,
) -> Result<Vec<PreferenceRecord>> {
    if per_pair == 0 {
        return Err(Error::invalid("per_pair must be at least 1"));
    }
    if set.len() < 2 {
        return Err(Error::invalid(
            "need at least two alternatives to form comparison pairs",
        ));
    }
    let m = set.len();
    let mut records = Vec::with_capacity(per_pair as usize * m * (m - 1) / 2);
    let mut pair_index = 0u64;
    for i in 0..m {
        for j in (i + 1)..m {
            let mut rng = pair_stream(seed, pair_index);
            for _ in 0..per_pair {
                records.push(sample_comparison(pop, set, set.id(i), set.id(j), &mut rng)?);
            }
            pair_index += 1;
        }
    }
    Ok(records)
}
