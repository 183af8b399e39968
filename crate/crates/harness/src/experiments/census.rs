//! Exhaustive tally of crossover outcome orderings in small bit spaces.

use std::collections::BTreeMap;

use gaspace::crossover::{classify_outcome, crossover, CrossoverMask, OutcomeConfig};
use gaspace::{Chromosome, Gene, Metric, Schema};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{parse_u64, sum_u64};
use crate::error::{HarnessError, Result};
use crate::table::Table;
use crate::{Context, Experiment, RunOutput, Summary};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensusParams {
    pub min_bits: usize,
    pub max_bits: usize,
    pub metric: Metric,
}

impl Default for CensusParams {
    fn default() -> Self {
        CensusParams {
            min_bits: 2,
            max_bits: 6,
            metric: Metric::Hamming,
        }
    }
}

pub const COLUMNS: [&str; 4] = ["bits", "config", "row", "count"];

/// Counts over every unordered pair of distinct parents, every mask and
/// every reference in `{0,1}^n`.
pub fn census(n: usize, metric: Metric) -> Result<BTreeMap<OutcomeConfig, u64>> {
    let schema = Schema::bits(n)?;
    metric.validate_for(&schema)?;
    let all: Vec<Chromosome> = (0..1u64 << n)
        .map(|v| Chromosome::new(&schema, (0..n).map(|i| Gene::Bit(v >> i & 1 == 1)).collect()))
        .collect::<gaspace::Result<_>>()?;
    let masks: Vec<CrossoverMask> = CrossoverMask::all(n).collect();
    let partial = (0..all.len())
        .into_par_iter()
        .map(|a| {
            let mut counts = BTreeMap::new();
            for b in a + 1..all.len() {
                for mask in &masks {
                    let (oa, ob) = crossover(&all[a], &all[b], mask)?;
                    for r in &all {
                        let c = classify_outcome(&all[a], &all[b], &oa, &ob, r, metric)?;
                        *counts.entry(c).or_insert(0u64) += 1;
                    }
                }
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = BTreeMap::new();
    for counts in partial {
        for (c, k) in counts {
            *total.entry(c).or_insert(0) += k;
        }
    }
    Ok(total)
}

pub struct Table1Census;

impl Experiment for Table1Census {
    fn name(&self) -> &'static str {
        "table1-census"
    }

    fn description(&self) -> &'static str {
        "exhaustive count of offspring/parent distance orderings over small bit spaces"
    }

    fn run(&self, ctx: &Context) -> Result<RunOutput> {
        let p: CensusParams = ctx.params()?;
        if p.min_bits < 2 || p.max_bits < p.min_bits || p.max_bits > 12 {
            return Err(HarnessError::params(self.name(), "need 2 <= min_bits <= max_bits <= 12"));
        }
        let mut table = Table::new(&COLUMNS);
        for n in p.min_bits..=p.max_bits {
            let counts = census(n, p.metric)?;
            for c in OutcomeConfig::ALL {
                table.push(vec![
                    n.to_string(),
                    c.label().into(),
                    c.row().map(|r| r.to_string()).unwrap_or_default(),
                    counts.get(&c).copied().unwrap_or(0).to_string(),
                ]);
            }
        }
        Ok(table.into())
    }

    fn summarize(&self, table: &Table, _ctx: &Context) -> Result<Summary> {
        let mut totals = serde_json::Map::new();
        let mut impossible = 0;
        let mut interleaved = 0;
        let mut nested_nonzero = true;
        let mut rows_2_to_5_nonzero = true;
        for c in OutcomeConfig::ALL {
            let n = sum_u64(&table.filter("config", c.label())?, "count")?;
            totals.insert(c.label().into(), n.into());
            if c.is_impossible() {
                impossible += n;
            }
            if c.is_interleaved() {
                interleaved += n;
            }
            if matches!(c.row(), Some(2..=5)) && n == 0 {
                rows_2_to_5_nonzero = false;
            }
            if matches!(c, OutcomeConfig::Oppo | OutcomeConfig::Poop) && n == 0 {
                nested_nonzero = false;
            }
        }
        let total: u64 = table
            .strings("count")?
            .into_iter()
            .map(|s| parse_u64(s, "count"))
            .sum::<Result<_>>()?;
        Ok(Summary {
            violations: impossible,
            metrics: json!({
                "classified": total,
                "counts": totals,
                "impossible_rows_1_and_6": impossible,
                "interleaved_rows_2_and_5": interleaved,
                "nested_rows_3_and_4_nonzero": nested_nonzero,
                "rows_2_to_5_all_nonzero": rows_2_to_5_nonzero,
            }),
        })
    }
}
