//! Built-in experiment kinds.

mod budget;
mod census;
mod compare;
mod game;
mod garun;
mod sweep;

pub use budget::{BudgetParams, DiscreteBudget};
pub use census::{CensusParams, Table1Census};
pub use compare::{CompareParams, SelectionCompare};
pub use game::{GameParams, GuessGame};
pub use garun::{GaRun, GaRunParams};
pub use sweep::{ConservationSweep, SweepParams};

use gaspace::selection::CurveSpec;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::table::Table;

/// A curve given either by bare name or as a full spec object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveParam {
    Name(String),
    Spec(CurveSpec),
}

impl CurveParam {
    pub fn spec(&self) -> CurveSpec {
        match self {
            CurveParam::Name(n) => CurveSpec::named(n.clone()),
            CurveParam::Spec(s) => s.clone(),
        }
    }

    /// Label used in table rows.
    pub fn label(&self) -> String {
        match self {
            CurveParam::Name(n) => n.clone(),
            CurveParam::Spec(s) => match (s.threshold, s.value) {
                (Some(t), _) => format!("{}@{t}", s.name),
                (None, Some(v)) => format!("{}={v}", s.name),
                _ => s.name.clone(),
            },
        }
    }
}

fn count(table: &Table, column: &str, value: &str) -> Result<u64> {
    Ok(table.strings(column)?.iter().filter(|s| **s == value).count() as u64)
}

fn parse_u64(s: &str, column: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| HarnessError::Table(format!("`{s}` in `{column}` is not an integer")))
}

fn sum_u64(table: &Table, column: &str) -> Result<u64> {
    table
        .strings(column)?
        .into_iter()
        .map(|s| parse_u64(s, column))
        .sum()
}
