use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use hypwalk::cli::{self, acceptance, config::ExperimentKind, ExperimentConfig};
use hypwalk::hypspace::{Model, ModelParams, PLANE_DELTA};

#[derive(Parser)]
#[command(name = "hypwalk", version, about = "Random walks on hyperbolic spaces: simulation and explicit bounds")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Output directory; defaults to the config's `out` or `./out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a canned acceptance suite.
    Acceptance {
        /// Suite name, or `all`.
        suite: String,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// List the available models and experiment kinds.
    ListModels,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    let args = Args::parse();
    match args.command {
        Command::Run { config, seed, threads, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if seed.is_some() {
                cfg.seed = seed;
            }
            let out_dir = out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let written = cli::execute(&cfg, threads, &out_dir).context("experiment failed")?;
            for c in &written.output.invariants {
                println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            println!("wrote {} and {}", written.csv.display(), written.json.display());
            Ok(written.output.passed())
        }
        Command::Acceptance { suite, threads } => {
            let results = cli::with_threads(threads, || acceptance::run_suite(&suite))??;
            for r in &results {
                println!("{r}");
            }
            Ok(results.iter().all(|r| r.passed))
        }
        Command::ListModels => {
            let tree = ModelParams::tree(2)?;
            let plane = ModelParams::plane(PLANE_DELTA)?;
            println!("models:");
            println!("  {}", serde_json::to_string(&Model::Tree { rank: 2 })?);
            println!("    Cayley tree of the free group; delta = {}, D0 = {}, D1 = {}", tree.delta, tree.d0, tree.d1);
            println!("  {}", serde_json::to_string(&Model::Plane)?);
            println!("    upper half-plane; default delta = {}, D0 = {}, D1 = {}", plane.delta, plane.d0, plane.d1);
            println!("  matrices: d x d real matrices (measure type \"matrices\" or \"standard-matrix\")");
            println!("experiment kinds:");
            for k in ExperimentKind::ALL {
                println!("  {}", k.name());
            }
            Ok(true)
        }
    }
}
