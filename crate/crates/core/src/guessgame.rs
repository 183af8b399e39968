//! The higher/lower guessing game.
//!
//! An opponent writes down two distinct numbers drawn from a
//! [`PairDistribution`]; one of them is revealed at random. A [`Strategy`]
//! guesses "the other number is lower" with probability `c_k` when `k` is
//! shown. The exact win probability is
//! `1/2 + 1/2 * sum p(m, n) * (c_m - c_n)` over pairs `m > n`, which
//! exceeds 1/2 for every strictly increasing `c`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::SelectionCurve;

/// Tolerance on `sum p = 1`.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// One support point: the pair `high > low` with its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub high: f64,
    pub low: f64,
    pub prob: f64,
}

/// Finite-support distribution over unordered pairs of distinct numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDistribution {
    entries: Vec<PairEntry>,
}

impl PairDistribution {
    /// Accepts `(m, n, p)` triples; `m` and `n` may come in either order.
    pub fn new(triples: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, (m, n, p)) in triples.into_iter().enumerate() {
            let bad = |why: String| Error::InvalidDistribution(format!("entry {i}: {why}"));
            if !(m.is_finite() && n.is_finite() && p.is_finite()) {
                return Err(bad(format!("non-finite value in ({m}, {n}, {p})")));
            }
            if m == n {
                return Err(bad(format!("numbers must be distinct, got {m} twice")));
            }
            if p < 0.0 {
                return Err(bad(format!("negative probability {p}")));
            }
            let (high, low) = if m > n { (m, n) } else { (n, m) };
            entries.push(PairEntry { high, low, prob: p });
        }
        if entries.is_empty() {
            return Err(Error::InvalidDistribution("no entries".into()));
        }
        let total: f64 = entries.iter().map(|e| e.prob).sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        if entries.iter().all(|e| e.prob == 0.0) {
            return Err(Error::InvalidDistribution("all probabilities are zero".into()));
        }
        Ok(PairDistribution { entries })
    }

    /// Parses `[[m, n, p], ...]`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let rows: Vec<[f64; 3]> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidDistribution(format!("expected [[m, n, p], ...]: {e}")))?;
        Self::new(rows.into_iter().map(|[m, n, p]| (m, n, p)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.entries
            .iter()
            .map(|e| serde_json::json!([e.high, e.low, e.prob]))
            .collect()
    }

    pub fn single(high: f64, low: f64) -> Result<Self> {
        Self::new([(high, low, 1.0)])
    }

    /// Random distribution with `len` entries over integers in `lo..=hi`.
    ///
    /// Probabilities are normalized uniform weights; the last entry absorbs
    /// the rounding residue.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize, lo: i64, hi: i64) -> Result<Self> {
        if len == 0 || lo >= hi {
            return Err(Error::InvalidDistribution(format!(
                "cannot draw {len} pairs from {lo}..={hi}"
            )));
        }
        let pairs: Vec<(f64, f64)> = (0..len)
            .map(|_| {
                let m = rng.random_range(lo..=hi);
                let mut n = rng.random_range(lo..hi);
                if n >= m {
                    n += 1;
                }
                (m as f64, n as f64)
            })
            .collect();
        let weights: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let head: f64 = probs[..len - 1].iter().sum();
        probs[len - 1] = 1.0 - head;
        Self::new(pairs.into_iter().zip(probs).map(|((m, n), p)| (m, n, p)))
    }

    pub fn entries(&self) -> &[PairEntry] {
        &self.entries
    }

    /// Distinct numbers appearing in the support, ascending.
    pub fn support_values(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.entries.iter().flat_map(|e| [e.high, e.low]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        values
    }
}

/// Guess "lower" with probability `c_k` on seeing `k`.
#[derive(Debug)]
pub struct Strategy {
    curve: Box<dyn SelectionCurve>,
}

impl Strategy {
    pub fn new(curve: Box<dyn SelectionCurve>) -> Self {
        Strategy { curve }
    }

    pub fn curve(&self) -> &dyn SelectionCurve {
        self.curve.as_ref()
    }

    pub fn guess_lower_probability(&self, shown: f64) -> Result<f64> {
        let c = self.curve.select_probability(shown)?;
        if (0.0..=1.0).contains(&c) {
            Ok(c)
        } else {
            Err(Error::InvalidConfig(format!(
                "curve `{}` returned {c} at {shown}",
                self.curve.name()
            )))
        }
    }
}

/// `1/2 + 1/2 * sum p(m, n) * (c_m - c_n)`.
pub fn analytic_win_probability(dist: &PairDistribution, strategy: &Strategy) -> Result<f64> {
    let mut margin = 0.0;
    for e in dist.entries() {
        let (cm, cn) = (
            strategy.guess_lower_probability(e.high)?,
            strategy.guess_lower_probability(e.low)?,
        );
        margin += e.prob * (cm - cn);
    }
    Ok(0.5 + 0.5 * margin)
}

/// Standard error of a win rate with true probability `q` over `rounds`.
pub fn win_rate_sigma(q: f64, rounds: u64) -> f64 {
    (q * (1.0 - q) / rounds as f64).sqrt()
}

/// Plays `rounds` rounds with `rng`; returns the number of wins.
pub fn play_rounds<R: Rng + ?Sized>(
    dist: &PairDistribution,
    strategy: &Strategy,
    rounds: u64,
    rng: &mut R,
) -> Result<u64> {
    if rounds == 0 {
        return Err(Error::InvalidConfig("rounds must be >= 1".into()));
    }
    let picker = WeightedIndex::new(dist.entries().iter().map(|e| e.prob))
        .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let table: Vec<(f64, f64)> = dist
        .entries()
        .iter()
        .map(|e| {
            Ok((
                strategy.guess_lower_probability(e.high)?,
                strategy.guess_lower_probability(e.low)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut wins = 0;
    for _ in 0..rounds {
        let (c_high, c_low) = table[picker.sample(rng)];
        let shown_high = rng.random_bool(0.5);
        let c = if shown_high { c_high } else { c_low };
        let guess_lower = rng.random::<f64>() < c;
        if guess_lower == shown_high {
            wins += 1;
        }
    }
    Ok(wins)
}

/// Monte-Carlo win rate, deterministic in `seed`.
pub fn simulate_game(
    dist: &PairDistribution,
    strategy: &Strategy,
    rounds: u64,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(play_rounds(dist, strategy, rounds, &mut rng)? as f64 / rounds as f64)
}
