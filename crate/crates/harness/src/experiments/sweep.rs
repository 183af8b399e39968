//! Random check of the crossover conservation identities.

use std::sync::Arc;

use gaspace::crossover::{
    conserves_pair_distance, conserves_power_sum, crossover, generalized_circumference,
    generalized_circumference_exact, linf_sum_preserved, CrossoverMask, REAL_REL_TOL,
};
use gaspace::{distance_pow, Chromosome, Metric, Schema};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{count, sum_u64};
use crate::error::{HarnessError, Result};
use crate::table::{fmt_f64, Table};
use crate::{Context, Experiment, RunOutput, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemaKind {
    Bit,
    Integer,
    Real,
}

impl SchemaKind {
    fn label(self) -> &'static str {
        match self {
            SchemaKind::Bit => "bit",
            SchemaKind::Integer => "integer",
            SchemaKind::Real => "real",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    /// Triples per schema kind, split across replicas.
    pub triples: u64,
    pub kinds: Vec<SchemaKind>,
    pub max_bits: usize,
    pub max_integers: usize,
    pub max_reals: usize,
    pub powers: Vec<u32>,
    pub integer_bound: i64,
    pub real_bound: f64,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            triples: 10_000,
            kinds: vec![SchemaKind::Bit, SchemaKind::Real],
            max_bits: 64,
            max_integers: 16,
            max_reals: 16,
            powers: vec![1, 2, 3],
            integer_bound: 1000,
            real_bound: 100.0,
        }
    }
}

pub const COLUMNS: [&str; 8] = [
    "replica",
    "kind",
    "check",
    "metric",
    "trials",
    "violations",
    "max_rel_error",
    "expected_to_hold",
];

struct Tally {
    check: &'static str,
    metric: String,
    holds: bool,
    trials: u64,
    violations: u64,
    max_rel_error: f64,
}

impl Tally {
    fn new(check: &'static str, metric: String, holds: bool) -> Self {
        Tally {
            check,
            metric,
            holds,
            trials: 0,
            violations: 0,
            max_rel_error: 0.0,
        }
    }

    fn record(&mut self, ok: bool, rel_error: f64) {
        self.trials += 1;
        self.violations += u64::from(!ok);
        self.max_rel_error = self.max_rel_error.max(rel_error);
    }
}

fn rel_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn metrics_for(kind: SchemaKind) -> Vec<Metric> {
    let mut m = Vec::new();
    if kind != SchemaKind::Real {
        m.push(Metric::Hamming);
    }
    m.extend([Metric::Lp(1), Metric::Lp(2), Metric::Lp(3), Metric::Linf]);
    m
}

fn random_schema(kind: SchemaKind, p: &SweepParams, rng: &mut ChaCha8Rng) -> Result<Arc<Schema>> {
    Ok(match kind {
        SchemaKind::Bit => Schema::bits(rng.random_range(2..=p.max_bits))?,
        SchemaKind::Integer => Schema::integers(
            rng.random_range(2..=p.max_integers),
            -p.integer_bound,
            p.integer_bound,
        )?,
        SchemaKind::Real => Schema::reals(rng.random_range(2..=p.max_reals), -p.real_bound, p.real_bound)?,
    })
}

fn sweep_kind(kind: SchemaKind, trials: u64, p: &SweepParams, rng: &mut ChaCha8Rng) -> Result<Vec<Tally>> {
    let metrics = metrics_for(kind);
    let mut pair: Vec<Tally> = metrics
        .iter()
        .map(|m| Tally::new("pair-distance", m.to_string(), true))
        .collect();
    let mut sums: Vec<Tally> = p
        .powers
        .iter()
        .map(|q| Tally::new("power-sum", format!("l{q}"), true))
        .collect();
    let mut circ: Vec<Tally> = p
        .powers
        .iter()
        .map(|q| Tally::new("circumference", format!("l{q}"), true))
        .collect();
    let mut linf = Tally::new("linf-sum", "linf".into(), false);

    for _ in 0..trials {
        let schema = random_schema(kind, p, rng)?;
        let [pa, pb, r] = [(); 3].map(|_| Chromosome::random(&schema, rng));
        let cuts = rng.random_range(1..schema.len());
        let mask = CrossoverMask::random(schema.len(), cuts, rng)?;
        let (oa, ob) = crossover(&pa, &pb, &mask)?;

        for (m, t) in metrics.iter().zip(&mut pair) {
            let ok = conserves_pair_distance((&pa, &pb), (&oa, &ob), *m)?;
            let before = gaspace::distance(&pa, &pb, *m)?;
            let after = gaspace::distance(&oa, &ob, *m)?;
            t.record(ok, rel_error(before, after));
        }
        for ((&q, s), c) in p.powers.iter().zip(&mut sums).zip(&mut circ) {
            let ok = conserves_power_sum((&pa, &pb), (&oa, &ob), &r, q)?;
            let before = distance_pow(&pa, &r, q)? + distance_pow(&pb, &r, q)?;
            let after = distance_pow(&oa, &r, q)? + distance_pow(&ob, &r, q)?;
            s.record(ok, rel_error(before, after));

            if schema.is_discrete() {
                let before = generalized_circumference_exact(&pa, &pb, &r, q)?;
                let after = generalized_circumference_exact(&oa, &ob, &r, q)?;
                c.record(before == after, 0.0);
            } else {
                let before = generalized_circumference(&pa, &pb, &r, q)?;
                let after = generalized_circumference(&oa, &ob, &r, q)?;
                let e = rel_error(before, after);
                c.record(e <= REAL_REL_TOL, e);
            }
        }
        linf.record(linf_sum_preserved((&pa, &pb), (&oa, &ob), &r)?, 0.0);
    }
    let mut out = pair;
    out.extend(sums);
    out.extend(circ);
    out.push(linf);
    Ok(out)
}

pub struct ConservationSweep;

impl Experiment for ConservationSweep {
    fn name(&self) -> &'static str {
        "conservation-sweep"
    }

    fn description(&self) -> &'static str {
        "random crossover triples checked for distance and power-sum conservation"
    }

    fn run(&self, ctx: &Context) -> Result<RunOutput> {
        let p: SweepParams = ctx.params()?;
        if p.triples == 0 || p.kinds.is_empty() || p.powers.is_empty() {
            return Err(HarnessError::params(self.name(), "need triples, kinds and powers"));
        }
        if p.powers.contains(&0) || p.max_bits < 2 || p.max_integers < 2 || p.max_reals < 2 {
            return Err(HarnessError::params(self.name(), "powers must be >= 1, lengths >= 2"));
        }
        let reps = ctx.replicas as u64;
        let per_replica = ctx.par_streams(ctx.replicas, |i, rng| {
            let trials = p.triples / reps + u64::from((i as u64) < p.triples % reps);
            p.kinds
                .iter()
                .map(|&k| Ok((k, sweep_kind(k, trials, &p, rng)?)))
                .collect::<Result<Vec<_>>>()
        })?;

        let mut table = Table::new(&COLUMNS);
        for (replica, kinds) in per_replica.into_iter().enumerate() {
            for (kind, tallies) in kinds {
                for t in tallies {
                    table.push(vec![
                        replica.to_string(),
                        kind.label().into(),
                        t.check.into(),
                        t.metric,
                        t.trials.to_string(),
                        t.violations.to_string(),
                        fmt_f64(t.max_rel_error),
                        t.holds.to_string(),
                    ]);
                }
            }
        }
        Ok(table.into())
    }

    fn summarize(&self, table: &Table, _ctx: &Context) -> Result<Summary> {
        let held = table.filter("expected_to_hold", "true")?;
        let violations = sum_u64(&held, "violations")?;
        let mut by_kind = serde_json::Map::new();
        for kind in ["bit", "integer", "real"] {
            let rows = table.filter("kind", kind)?;
            if rows.is_empty() {
                continue;
            }
            let linf = rows.filter("check", "linf-sum")?;
            let held = rows.filter("expected_to_hold", "true")?;
            let max_err = held.numbers("max_rel_error")?.into_iter().fold(0.0, f64::max);
            by_kind.insert(
                kind.into(),
                json!({
                    // One linf-sum row per replica, covering all of its triples.
                    "triples": sum_u64(&linf, "trials")?,
                    "violations": sum_u64(&held, "violations")?,
                    "max_rel_error": max_err,
                    "linf_sum_violations": sum_u64(&linf, "violations")?,
                }),
            );
        }
        Ok(Summary {
            violations,
            metrics: json!({
                "by_kind": Value::Object(by_kind),
                "rows_with_violations": held.numbers("violations")?.iter().filter(|v| **v > 0.0).count(),
                "informational_rows": count(table, "expected_to_hold", "false")?,
            }),
        })
    }
}
