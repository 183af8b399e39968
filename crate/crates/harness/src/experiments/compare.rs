//! The same objective under several selection curves.

use gaspace::engine::EngineConfig;
use gaspace::objective::ObjectiveSpec;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::garun::{replica_seed, run_engine};
use super::{count, CurveParam};
use crate::error::{HarnessError, Result};
use crate::stats::summarize;
use crate::table::{fmt_f64, fmt_opt, Table};
use crate::{Context, Experiment, RunOutput, Summary};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareParams {
    pub objective: ObjectiveSpec,
    pub curves: Vec<CurveParam>,
    /// `curve` and `seed` are overridden per row.
    pub engine: EngineConfig,
}

impl Default for CompareParams {
    fn default() -> Self {
        CompareParams {
            objective: ObjectiveSpec {
                name: "sphere".into(),
                dimension: 4,
                seed: 0,
            },
            curves: ["arctan", "tanh", "adaptive-hard"]
                .map(|c| CurveParam::Name(c.into()))
                .to_vec(),
            engine: EngineConfig::default(),
        }
    }
}

pub const COLUMNS: [&str; 8] = [
    "replica",
    "curve",
    "generations",
    "evaluations",
    "stop_reason",
    "best_fitness",
    "initial_volume",
    "final_volume",
];

pub struct SelectionCompare;

impl Experiment for SelectionCompare {
    fn name(&self) -> &'static str {
        "selection-compare"
    }

    fn description(&self) -> &'static str {
        "engine runs per selection curve with a shared seed per replica"
    }

    fn run(&self, ctx: &Context) -> Result<RunOutput> {
        let p: CompareParams = ctx.params()?;
        if p.curves.is_empty() {
            return Err(HarnessError::params(self.name(), "no curves"));
        }
        let rows = ctx.par_streams(ctx.replicas, |replica, rng| {
            let seed = replica_seed(rng);
            p.curves
                .iter()
                .map(|curve| {
                    let engine = EngineConfig {
                        curve: curve.spec(),
                        ..p.engine.clone()
                    };
                    let out = run_engine(&p.objective, &engine, seed)?;
                    let first = &out.history[0];
                    let last = out.history.last().expect("non-empty history");
                    Ok(vec![
                        replica.to_string(),
                        curve.label(),
                        last.generation.to_string(),
                        last.evaluations.to_string(),
                        out.stop_reason.to_string(),
                        fmt_f64(out.best.fitness),
                        fmt_opt(first.better_half_volume),
                        fmt_opt(last.better_half_volume),
                    ])
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let mut table = Table::new(&COLUMNS);
        for row in rows.into_iter().flatten() {
            table.push(row);
        }
        Ok(table.into())
    }

    fn summarize(&self, table: &Table, ctx: &Context) -> Result<Summary> {
        let p: CompareParams = ctx.params()?;
        let mut by_curve = serde_json::Map::new();
        for curve in &p.curves {
            let rows = table.filter("curve", &curve.label())?;
            by_curve.insert(
                curve.label(),
                json!({
                    "runs": rows.len(),
                    "best_fitness": summarize(&rows.numbers("best_fitness")?),
                    "generations": summarize(&rows.numbers("generations")?),
                    "evaluations": summarize(&rows.numbers("evaluations")?),
                    "stalled": count(&rows, "stop_reason", "stall")?,
                }),
            );
        }
        Ok(Summary {
            violations: 0,
            metrics: json!({ "by_curve": Value::Object(by_curve) }),
        })
    }
}
