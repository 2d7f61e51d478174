use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use symlearn::harness::{
    cmd_decompose, cmd_recover, cmd_table, cmd_verify_all, render_instance, OutputFormat, RunConfig, TableId,
    DEFAULT_SEED, DEFAULT_SITES, DEFAULT_TRIALS,
};
use symlearn::recovery::CensusModel;

/// Symmetry-based Hamiltonian learning for XXX and XXZ spin chains.
#[derive(Parser, Debug)]
#[command(name = "symlearn", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose the Hilbert space into irreps of the model's symmetry group.
    Decompose(Common),
    /// Run the recovery pipeline on one eigenstate of one sampled instance.
    Recover {
        #[command(flatten)]
        common: Common,
        /// Eigenstate index in ascending energy order.
        #[arg(long, env = "SYMLEARN_INDEX", default_value_t = 0)]
        index: usize,
    },
    /// Regenerate one table.
    Table {
        /// xxx-decomp, xxz-decomp, xxx-recovery, xxz-recovery,
        /// accidental-predict, accidental-ranks or accidental-verdicts.
        id: TableId,
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate every table, compare with the reference values and run the
    /// invariant suites. Exits 1 on any mismatch.
    VerifyAll(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// xxx, xxz or xxz-accidental.
    #[arg(long, env = "SYMLEARN_MODEL")]
    model: Option<CensusModel>,
    /// Chain length, or the first of a range ending at --L-max.
    #[arg(long = "L", env = "SYMLEARN_L")]
    sites: Option<usize>,
    /// Last chain length of the range.
    #[arg(long = "L-max", env = "SYMLEARN_L_MAX")]
    max_sites: Option<usize>,
    #[arg(long, env = "SYMLEARN_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, env = "SYMLEARN_TRIALS", default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Singular values above tol-rank · σ_max count towards the rank.
    #[arg(long, env = "SYMLEARN_TOL_RANK")]
    tol_rank: Option<f64>,
    /// Relative gap below which joint eigenvalues are merged.
    #[arg(long, env = "SYMLEARN_TOL_CLUSTER")]
    tol_cluster: Option<f64>,
    /// Projection weight above which an irrep counts as present in a state.
    #[arg(long, env = "SYMLEARN_TOL_PROJ")]
    tol_proj: Option<f64>,
    /// json, csv or md.
    #[arg(long, env = "SYMLEARN_FORMAT", default_value = "json")]
    format: OutputFormat,
    /// Write the output here instead of stdout.
    #[arg(long, env = "SYMLEARN_OUT")]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> RunConfig {
        let (min, max) = match (self.sites, self.max_sites) {
            (Some(l), Some(m)) => (l, m),
            (Some(l), None) => (l, l),
            (None, Some(m)) => (*DEFAULT_SITES.start(), m),
            (None, None) => (*DEFAULT_SITES.start(), *DEFAULT_SITES.end()),
        };
        let mut config = RunConfig {
            model: self.model,
            min_sites: min,
            max_sites: max,
            seed: self.seed,
            trials: self.trials,
            format: self.format,
            out: self.out.clone(),
            ..RunConfig::default()
        };
        config.override_tolerances(self.tol_rank, self.tol_cluster, self.tol_proj);
        config
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<()> {
    match &config.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Decompose(common) => {
            let config = common.config();
            let t = cmd_decompose(&config)?;
            emit(&config, &t.render(config.format)?)?;
        }
        Command::Recover { common, index } => {
            let config = common.config();
            let r = cmd_recover(&config, index)?;
            emit(&config, &render_instance(&r, config.format)?)?;
        }
        Command::Table { id, common } => {
            let config = common.config();
            let t = cmd_table(&config, id)?;
            emit(&config, &t.render(config.format)?)?;
        }
        Command::VerifyAll(common) => {
            let config = common.config();
            let report = cmd_verify_all(&config)?;
            emit(&config, &report.render(config.format)?)?;
            eprint!("{}", report.summary());
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
