use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scp_bicm::harness::{builtin_recipes, compare, run_to_dir, ExperimentConfig, ExperimentKind, HarnessError};

#[derive(Parser)]
#[command(
    name = "scp-bicm",
    version,
    about = "Coupled protograph LDPC codes for BICM-ID experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Config file, or `builtin:NAME` for a shipped recipe.
    #[arg(long)]
    config: String,
    /// Overrides the experiment seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// CM and BICM capacity curves.
    Capacity(RunArgs),
    /// Monte-Carlo BER of the full BICM-ID chain.
    Ber(RunArgs),
    /// Hierarchical EXIT run at fixed Eb/N0 values.
    Exit(RunArgs),
    /// Decoding-threshold search.
    Threshold(RunArgs),
    /// Decoding-wave matrix just above the threshold.
    Wave(RunArgs),
    /// LBPM design and protection profiles of the configured mappers.
    DesignMapper(RunArgs),
    /// Aligns threshold or BER result files and reports deltas in dB.
    Compare {
        /// `thresholds.csv` or `ber.csv` files; the first is the reference.
        files: Vec<PathBuf>,
        /// BER at which curves are compared.
        #[arg(long, default_value_t = 1e-5)]
        at_ber: f64,
    },
    /// Lists the builtin recipes.
    Recipes,
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let (kind, args) = match cli.command {
        Command::Capacity(a) => (ExperimentKind::Capacity, a),
        Command::Ber(a) => (ExperimentKind::Ber, a),
        Command::Exit(a) => (ExperimentKind::Exit, a),
        Command::Threshold(a) => (ExperimentKind::Threshold, a),
        Command::Wave(a) => (ExperimentKind::Wave, a),
        Command::DesignMapper(a) => (ExperimentKind::DesignMapper, a),
        Command::Compare { files, at_ber } => {
            let paths: Vec<&std::path::Path> = files.iter().map(PathBuf::as_path).collect();
            let (kind, rows) = compare(&paths, at_ber)?;
            let what = match kind {
                scp_bicm::harness::ResultKind::Threshold => "threshold_db".to_string(),
                scp_bicm::harness::ResultKind::Ber => format!("ebn0_db_at_ber_{at_ber}"),
            };
            println!("series,{what},delta_db");
            let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x}"));
            for r in rows {
                println!("{},{},{}", r.label, show(r.value_db), show(r.delta_db));
            }
            return Ok(());
        }
        Command::Recipes => {
            for name in builtin_recipes() {
                let target = ExperimentConfig::builtin(name)?.target.unwrap_or_default();
                println!("{name}\t{target}");
            }
            return Ok(());
        }
    };
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let written = run_to_dir(&cfg, kind, args.workers, &args.out)?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ HarnessError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
