//! Two-number guessing game: analytic win probability against simulation.

use gaspace::guessgame::{
    analytic_win_probability, simulate_game, win_rate_sigma, PairDistribution, Strategy,
};
use gaspace::selection::{CurveRegistry, Direction};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{count, CurveParam};
use crate::error::{HarnessError, Result};
use crate::stats::summarize;
use crate::table::{fmt_f64, Table};
use crate::{Context, Experiment, RunOutput, Summary};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameParams {
    /// Fixed `[[m, n, p], ...]` table; when absent, `cases` random ones.
    pub distribution: Option<Value>,
    pub cases: usize,
    /// Number of pairs in each random distribution.
    pub pairs: usize,
    pub lo: i64,
    pub hi: i64,
    pub curves: Vec<CurveParam>,
    pub rounds: u64,
    /// Agreement band in standard errors.
    pub sigmas: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            distribution: None,
            cases: 100,
            pairs: 4,
            lo: -10,
            hi: 10,
            curves: vec![CurveParam::Name("arctan".into()), CurveParam::Name("tanh".into())],
            rounds: 100_000,
            sigmas: 4.0,
        }
    }
}

pub const COLUMNS: [&str; 10] = [
    "case",
    "curve",
    "soft",
    "pairs",
    "analytic",
    "simulated",
    "sigma",
    "z",
    "within_band",
    "distribution",
];

pub struct GuessGame;

impl Experiment for GuessGame {
    fn name(&self) -> &'static str {
        "guessgame"
    }

    fn description(&self) -> &'static str {
        "win probability of curve-driven guessing, exact and simulated"
    }

    fn run(&self, ctx: &Context) -> Result<RunOutput> {
        let p: GameParams = ctx.params()?;
        if p.rounds == 0 || p.curves.is_empty() || p.sigmas.is_nan() || p.sigmas <= 0.0 {
            return Err(HarnessError::params(self.name(), "need rounds >= 1, curves and sigmas > 0"));
        }
        let fixed = match &p.distribution {
            Some(v) => Some(PairDistribution::from_json_str(&v.to_string())?),
            None => None,
        };
        let cases = if fixed.is_some() { 1 } else { p.cases };
        if cases == 0 || (fixed.is_none() && (p.pairs == 0 || p.hi - p.lo < 1)) {
            return Err(HarnessError::params(self.name(), "need cases, pairs and lo < hi"));
        }
        let registry = CurveRegistry::builtin();
        let factories = p
            .curves
            .iter()
            .map(|c| Ok((c.label(), registry.build(&c.spec())?)))
            .collect::<Result<Vec<_>>>()?;

        let per_case = ctx.par_streams(cases, |case, rng| {
            let dist = match &fixed {
                Some(d) => d.clone(),
                None => PairDistribution::random(rng, p.pairs, p.lo, p.hi)?,
            };
            let support = dist.support_values();
            let mut rows = Vec::new();
            for (label, factory) in &factories {
                let strategy = Strategy::new(factory.fit(&support, Direction::Maximize)?);
                let soft = strategy.curve().is_soft();
                let q = analytic_win_probability(&dist, &strategy)?;
                let rate = simulate_game(&dist, &strategy, p.rounds, rng.random())?;
                let sigma = win_rate_sigma(q, p.rounds);
                let z = if sigma > 0.0 { (rate - q) / sigma } else { 0.0 };
                rows.push(vec![
                    case.to_string(),
                    label.clone(),
                    soft.to_string(),
                    dist.entries().len().to_string(),
                    fmt_f64(q),
                    fmt_f64(rate),
                    fmt_f64(sigma),
                    fmt_f64(z),
                    (z.abs() <= p.sigmas).to_string(),
                    dist.to_json().to_string(),
                ]);
            }
            Ok(rows)
        })?;

        let mut table = Table::new(&COLUMNS);
        for row in per_case.into_iter().flatten() {
            table.push(row);
        }
        Ok(table.into())
    }

    fn summarize(&self, table: &Table, _ctx: &Context) -> Result<Summary> {
        let mut curves: Vec<&str> = table.strings("curve")?;
        curves.dedup();
        curves.sort_unstable();
        curves.dedup();
        let mut by_curve = serde_json::Map::new();
        let mut violations = 0;
        for curve in curves {
            let rows = table.filter("curve", curve)?;
            let analytic = rows.numbers("analytic")?;
            let soft = rows.strings("soft")?.first().is_some_and(|s| *s == "true");
            let above = analytic.iter().filter(|q| **q > 0.5).count() as u64;
            if soft {
                violations += rows.len() as u64 - above;
            }
            by_curve.insert(
                curve.into(),
                json!({
                    "soft": soft,
                    "cases": rows.len(),
                    "analytic_above_half": above,
                    "within_band": count(&rows, "within_band", "true")?,
                    "analytic": summarize(&analytic),
                    "simulated": summarize(&rows.numbers("simulated")?),
                }),
            );
        }
        Ok(Summary {
            violations,
            metrics: json!({
                "rows": table.len(),
                "within_band": count(table, "within_band", "true")?,
                "by_curve": Value::Object(by_curve),
            }),
        })
    }
}
