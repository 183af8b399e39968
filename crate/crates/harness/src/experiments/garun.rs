//! Single-objective GA runs with per-generation history.

use gaspace::engine::{Engine, EngineConfig, RunOutcome, UniformInitializer};
use gaspace::objective::{ObjectiveRegistry, ObjectiveSpec};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::count;
use crate::error::Result;
use crate::stats::summarize;
use crate::table::{fmt_f64, fmt_opt, Table};
use crate::{Context, Experiment, RunOutput, Summary};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaRunParams {
    pub objective: ObjectiveSpec,
    /// `seed` is ignored; each replica derives its own.
    pub engine: EngineConfig,
}

impl Default for GaRunParams {
    fn default() -> Self {
        GaRunParams {
            objective: ObjectiveSpec {
                name: "sphere".into(),
                dimension: 4,
                seed: 0,
            },
            engine: EngineConfig::default(),
        }
    }
}

pub const COLUMNS: [&str; 11] = [
    "replica",
    "generation",
    "best_fitness",
    "median_fitness",
    "best_so_far_fitness",
    "better_half_volume",
    "evaluations",
    "parent_pool_size",
    "parent_pool_mean_fitness",
    "final",
    "stop_reason",
];

/// Engine seed for `replica`, shared by experiments that run the engine.
pub(crate) fn replica_seed(rng: &mut impl Rng) -> u64 {
    rng.random()
}

pub(crate) fn run_engine(
    objective: &ObjectiveSpec,
    engine: &EngineConfig,
    seed: u64,
) -> Result<RunOutcome> {
    let objective = ObjectiveRegistry::builtin().build(objective)?;
    let cfg = EngineConfig {
        seed,
        ..engine.clone()
    };
    Ok(Engine::new(cfg, objective.as_ref())?.run(&mut UniformInitializer)?)
}

pub struct GaRun;

impl Experiment for GaRun {
    fn name(&self) -> &'static str {
        "ga-run"
    }

    fn description(&self) -> &'static str {
        "independent engine runs on one objective, one row per generation"
    }

    fn run(&self, ctx: &Context) -> Result<RunOutput> {
        let p: GaRunParams = ctx.params()?;
        p.engine.validate()?;
        let runs = ctx.par_streams(ctx.replicas, |_, rng| {
            let seed = replica_seed(rng);
            Ok((seed, run_engine(&p.objective, &p.engine, seed)?))
        })?;

        let mut table = Table::new(&COLUMNS);
        let mut history = Vec::new();
        for (replica, (seed, out)) in runs.into_iter().enumerate() {
            let last = out.history.len() - 1;
            for (i, s) in out.history.iter().enumerate() {
                table.push(vec![
                    replica.to_string(),
                    s.generation.to_string(),
                    fmt_f64(s.best_fitness),
                    fmt_f64(s.median_fitness),
                    fmt_f64(s.best_so_far_fitness),
                    fmt_opt(s.better_half_volume),
                    s.evaluations.to_string(),
                    s.parent_pool_size.to_string(),
                    fmt_opt(s.parent_pool_mean_fitness),
                    (i == last).to_string(),
                    if i == last { out.stop_reason.to_string() } else { String::new() },
                ]);
            }
            let mut doc = out.to_json();
            doc["replica"] = json!(replica);
            doc["seed"] = json!(seed);
            history.push(doc);
        }
        let mut output = RunOutput::from(table);
        output.artifacts.insert("history".into(), Value::Array(history));
        Ok(output)
    }

    fn summarize(&self, table: &Table, _ctx: &Context) -> Result<Summary> {
        let finals = table.filter("final", "true")?;
        let initial = table.filter("generation", "0")?;
        let mut stops = serde_json::Map::new();
        for reason in ["stall", "evaluation-budget", "max-generations"] {
            stops.insert(reason.into(), count(&finals, "stop_reason", reason)?.into());
        }
        let v0 = initial.numbers("better_half_volume")?;
        let v1 = finals.numbers("better_half_volume")?;
        let ratios: Vec<f64> = v0
            .iter()
            .zip(&v1)
            .map(|(a, b)| if *a > 0.0 { b / a } else { 0.0 })
            .collect();
        Ok(Summary {
            violations: 0,
            metrics: json!({
                "runs": finals.len(),
                "stop_reasons": stops,
                "final_best_so_far": summarize(&finals.numbers("best_so_far_fitness")?),
                "generations": summarize(&finals.numbers("generation")?),
                "evaluations": summarize(&finals.numbers("evaluations")?),
                "volume_ratio": summarize(&ratios),
            }),
        })
    }
}
