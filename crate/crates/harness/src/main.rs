use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use gaspace_harness::{execute, resolve_out_dir, ExperimentConfig, ExperimentRegistry};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "gaspace", version, about = "Run gaspace experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    /// Output directory [default: $GASPACE_OUT_DIR, then ./gaspace-out]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Random crossover conservation sweep
    Sweep {
        /// Triples per schema kind
        #[arg(long, default_value_t = 100_000)]
        triples: u64,
        #[arg(long, default_value_t = 64)]
        max_bits: usize,
        #[arg(long, default_value_t = 16)]
        max_reals: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive outcome census over small bit spaces
    Census {
        #[arg(long, default_value_t = 6)]
        max_bits: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Guessing game, analytic against simulated
    Game {
        /// JSON file holding [[m, n, p], ...]
        #[arg(long)]
        distribution: Option<PathBuf>,
        /// Curve name; repeat for several
        #[arg(long = "curve")]
        curves: Vec<String>,
        #[arg(long, default_value_t = 100_000)]
        rounds: u64,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[command(flatten)]
        common: Common,
    },
    /// OneMax under the default evaluation budget
    Budget {
        #[arg(long, default_value_t = 10)]
        bits: usize,
        #[arg(long, default_value_t = 200)]
        runs: usize,
        #[arg(long)]
        population_size: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// List experiment kinds
    List,
}

fn build(kind: &str, params: Value, common: &Common) -> ExperimentConfig {
    let cfg = ExperimentConfig {
        params,
        ..ExperimentConfig::new(kind)
    };
    with_overrides(cfg, common)
}

fn with_overrides(mut cfg: ExperimentConfig, common: &Common) -> ExperimentConfig {
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(replicas) = common.replicas {
        cfg.replicas = replicas;
    }
    cfg
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let registry = ExperimentRegistry::builtin();
    let (cfg, common) = match cli.command {
        Command::List => {
            for e in registry.iter() {
                println!("{:<20} {}", e.name(), e.description());
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Run { config, common } => {
            let cfg = with_overrides(ExperimentConfig::load(&config)?, &common);
            (cfg, common)
        }
        Command::Sweep { triples, max_bits, max_reals, common } => {
            let params = json!({ "triples": triples, "max_bits": max_bits, "max_reals": max_reals });
            (build("conservation-sweep", params, &common), common)
        }
        Command::Census { max_bits, common } => {
            (build("table1-census", json!({ "max_bits": max_bits }), &common), common)
        }
        Command::Game { distribution, curves, rounds, cases, common } => {
            let mut params = json!({ "rounds": rounds, "cases": cases });
            if let Some(path) = distribution {
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let table: Value = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))?;
                params["distribution"] = table;
            }
            if !curves.is_empty() {
                params["curves"] = json!(curves);
            }
            (build("guessgame", params, &common), common)
        }
        Command::Budget { bits, runs, population_size, common } => {
            let mut params = json!({ "bits": bits, "runs": runs });
            if let Some(n) = population_size {
                params["population_size"] = json!(n);
            }
            (build("discrete-budget", params, &common), common)
        }
    };

    let out_dir = resolve_out_dir(common.out.as_deref(), &cfg);
    let report = execute(&registry, &cfg, &out_dir)?;
    println!("{}", serde_json::to_string_pretty(&report.summary)?);
    for f in &report.files {
        eprintln!("wrote {}", f.display());
    }
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} invariant violation(s)", report.violations);
        Ok(ExitCode::from(1))
    }
}
