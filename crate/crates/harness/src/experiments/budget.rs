//! Discrete OneMax runs under the default evaluation budget.

use gaspace::engine::{default_evaluation_budget, Engine, EngineConfig, UniformInitializer};
use gaspace::objective::{Objective, OneMax};
use gaspace::{distance, Chromosome, Metric};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{count, parse_u64, CurveParam};
use crate::error::{HarnessError, Result};
use crate::stats::{summarize, wilson, Z95};
use crate::table::{fmt_f64, Table};
use crate::{Context, Experiment, RunOutput, Summary};

pub const REFERENCE_CLAIM: &str =
    "more than 50% of runs end within Hamming distance 1 of the optimum at the default budget";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetParams {
    pub bits: usize,
    pub runs: usize,
    /// Defaults to `max(4, round(sqrt(budget)))`.
    pub population_size: Option<usize>,
    /// Defaults to `ceil(n^1.5 ln n)`.
    pub budget: Option<u64>,
    pub curve: CurveParam,
    pub mutation_rate: f64,
    pub elitism: bool,
}

impl Default for BudgetParams {
    fn default() -> Self {
        BudgetParams {
            bits: 10,
            runs: 200,
            population_size: None,
            budget: None,
            curve: CurveParam::Name("arctan".into()),
            mutation_rate: 0.0,
            elitism: false,
        }
    }
}

impl BudgetParams {
    pub fn resolved_budget(&self) -> u64 {
        self.budget.unwrap_or_else(|| default_evaluation_budget(self.bits))
    }

    pub fn resolved_population(&self) -> usize {
        self.population_size
            .unwrap_or_else(|| ((self.resolved_budget() as f64).sqrt().round() as usize).max(4))
    }
}

pub const COLUMNS: [&str; 7] = [
    "run",
    "budget",
    "evaluations",
    "stop_reason",
    "best_fitness",
    "hamming_to_optimum",
    "within_one",
];

pub struct DiscreteBudget;

impl Experiment for DiscreteBudget {
    fn name(&self) -> &'static str {
        "discrete-budget"
    }

    fn description(&self) -> &'static str {
        "OneMax with random targets under the default evaluation budget"
    }

    fn run(&self, ctx: &Context) -> Result<RunOutput> {
        let p: BudgetParams = ctx.params()?;
        if p.runs == 0 || p.bits < 2 {
            return Err(HarnessError::params(self.name(), "need runs >= 1 and bits >= 2"));
        }
        let budget = p.resolved_budget();
        let cfg = EngineConfig {
            population_size: p.resolved_population(),
            curve: p.curve.spec(),
            mutation_rate: p.mutation_rate,
            elitism: p.elitism,
            evaluation_budget: Some(budget),
            max_generations: budget.max(1),
            ..EngineConfig::default()
        };
        let rows = ctx.par_streams(p.runs, |run, rng| {
            let objective = OneMax::random(p.bits, rng.random())?;
            let out = Engine::new(EngineConfig { seed: rng.random(), ..cfg.clone() }, &objective)?
                .run(&mut UniformInitializer)?;
            let optimum = objective.optimum().expect("onemax has an optimum");
            let miss = hamming(&out.best.chromosome, &optimum)?;
            let last = out.history.last().expect("non-empty history");
            Ok(vec![
                run.to_string(),
                budget.to_string(),
                last.evaluations.to_string(),
                out.stop_reason.to_string(),
                fmt_f64(out.best.fitness),
                miss.to_string(),
                (miss <= 1).to_string(),
            ])
        })?;
        let mut table = Table::new(&COLUMNS);
        for row in rows {
            table.push(row);
        }
        Ok(table.into())
    }

    fn summarize(&self, table: &Table, ctx: &Context) -> Result<Summary> {
        let p: BudgetParams = ctx.params()?;
        let runs = table.len() as u64;
        let hits = count(table, "within_one", "true")?;
        let over = table
            .strings("evaluations")?
            .into_iter()
            .map(|s| parse_u64(s, "evaluations"))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .filter(|&e| e > p.resolved_budget())
            .count() as u64;
        let fraction = if runs > 0 { hits as f64 / runs as f64 } else { f64::NAN };
        Ok(Summary {
            violations: over,
            metrics: json!({
                "bits": p.bits,
                "search_space": 1u128 << p.bits.min(127),
                "budget": p.resolved_budget(),
                "population_size": p.resolved_population(),
                "runs": runs,
                "within_one": hits,
                "fraction_within_one": fraction,
                "wilson95": wilson(hits, runs, Z95),
                "hamming_to_optimum": summarize(&table.numbers("hamming_to_optimum")?),
                "reference_claim": REFERENCE_CLAIM,
                "reference_fraction": 0.5,
                "above_reference": fraction > 0.5,
            }),
        })
    }
}

fn hamming(a: &Chromosome, b: &Chromosome) -> Result<u64> {
    Ok(distance(a, b, Metric::Hamming)? as u64)
}
