//! Experiment runner for `gaspace`.
//!
//! Each experiment kind implements [`Experiment`] and is looked up by name in
//! an [`ExperimentRegistry`]. Running one writes `<kind>.csv` (raw rows) and
//! `<kind>.summary.json` into the output directory, plus any extra JSON
//! artifacts the experiment produces.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub mod error;
pub mod experiments;
pub mod stats;
pub mod table;

pub use error::{HarnessError, Result};
pub use table::Table;

/// Version of the summary JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GASPACE_OUT_DIR";

pub const DEFAULT_OUT_DIR: &str = "gaspace-out";

/// On-disk experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicas: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default = "empty_object")]
    pub params: Value,
}

fn one() -> usize {
    1
}

fn empty_object() -> Value {
    json!({})
}

impl ExperimentConfig {
    pub fn new(kind: &str) -> Self {
        ExperimentConfig {
            kind: kind.to_owned(),
            seed: 0,
            replicas: 1,
            out: None,
            params: empty_object(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(HarnessError::params(&self.kind, "replicas must be >= 1"));
        }
        if !self.params.is_object() {
            return Err(HarnessError::params(&self.kind, "params must be a JSON object"));
        }
        Ok(())
    }
}

/// What an experiment sees while running.
#[derive(Debug, Clone)]
pub struct Context {
    pub kind: String,
    pub seed: u64,
    pub replicas: usize,
    pub params: Value,
}

impl Context {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Context {
            kind: cfg.kind.clone(),
            seed: cfg.seed,
            replicas: cfg.replicas,
            params: cfg.params.clone(),
        }
    }

    /// Deserializes `params` into an experiment's own parameter type.
    pub fn params<P: DeserializeOwned>(&self) -> Result<P> {
        serde_json::from_value(self.params.clone())
            .map_err(|e| HarnessError::params(&self.kind, e.to_string()))
    }

    /// Independent generator for stream `stream` under the run seed.
    pub fn stream_rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Runs `f` for streams `0..n` in parallel; results keep stream order.
    pub fn par_streams<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &mut ChaCha8Rng) -> Result<T> + Sync,
    {
        (0..n)
            .into_par_iter()
            .map(|i| f(i, &mut self.stream_rng(i as u64)))
            .collect()
    }
}

/// Rows plus named JSON side outputs.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: Table,
    pub artifacts: BTreeMap<String, Value>,
}

impl From<Table> for RunOutput {
    fn from(table: Table) -> Self {
        RunOutput {
            table,
            artifacts: BTreeMap::new(),
        }
    }
}

/// Derived from a [`Table`] alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    /// Rows that break an invariant the experiment checks.
    pub violations: u64,
    pub metrics: Value,
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn run(&self, ctx: &Context) -> Result<RunOutput>;

    fn summarize(&self, table: &Table, ctx: &Context) -> Result<Summary>;
}

pub struct ExperimentRegistry {
    entries: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl ExperimentRegistry {
    pub fn empty() -> Self {
        ExperimentRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(experiments::ConservationSweep));
        r.register(Box::new(experiments::Table1Census));
        r.register(Box::new(experiments::GuessGame));
        r.register(Box::new(experiments::SelectionCompare));
        r.register(Box::new(experiments::GaRun));
        r.register(Box::new(experiments::DiscreteBudget));
        r
    }

    pub fn register(&mut self, experiment: Box<dyn Experiment>) {
        self.entries.insert(experiment.name(), experiment);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Experiment> {
        self.entries.values().map(|e| e.as_ref())
    }

    pub fn get(&self, name: &str) -> Result<&dyn Experiment> {
        self.entries
            .get(name)
            .map(|e| e.as_ref())
            .ok_or_else(|| HarnessError::UnknownExperiment {
                name: name.to_owned(),
                known: self.names().join(", "),
            })
    }
}

impl Default for ExperimentRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Results of [`execute`] plus what was written.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub summary: Value,
    pub violations: u64,
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Picks the output directory: explicit flag, then the config, then
/// [`OUT_DIR_ENV`], then [`DEFAULT_OUT_DIR`].
pub fn resolve_out_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_owned)
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Summary document for `table`, identical whether `table` came from memory
/// or from the CSV on disk.
pub fn summary_json(experiment: &dyn Experiment, ctx: &Context, table: &Table) -> Result<(Value, u64)> {
    let summary = experiment.summarize(table, ctx)?;
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "kind": experiment.name(),
        "seed": ctx.seed,
        "replicas": ctx.replicas,
        "params": ctx.params,
        "columns": table.columns,
        "rows": table.len(),
        "violations": summary.violations,
        "passed": summary.violations == 0,
        "metrics": summary.metrics,
    });
    Ok((doc, summary.violations))
}

/// Runs `cfg` and writes its outputs under `out_dir`.
pub fn execute(registry: &ExperimentRegistry, cfg: &ExperimentConfig, out_dir: &Path) -> Result<Report> {
    cfg.validate()?;
    let experiment = registry.get(&cfg.kind)?;
    let ctx = Context::from_config(cfg);
    let output = experiment.run(&ctx)?;
    let (summary, violations) = summary_json(experiment, &ctx, &output.table)?;

    std::fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let mut files = Vec::new();
    let csv_path = out_dir.join(format!("{}.csv", cfg.kind));
    output.table.write_csv(&csv_path)?;
    files.push(csv_path);
    let summary_path = out_dir.join(format!("{}.summary.json", cfg.kind));
    write_json(&summary_path, &summary)?;
    files.push(summary_path);
    for (name, value) in &output.artifacts {
        let path = out_dir.join(format!("{}.{name}.json", cfg.kind));
        write_json(&path, value)?;
        files.push(path);
    }
    Ok(Report {
        table: output.table,
        summary,
        violations,
        files,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}
