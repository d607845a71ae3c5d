use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use modreyn::config::load_config_with_notes;
use modreyn::output::REPORT_JSON;
use modreyn::ModelVariant;
use modreyn_cli::{
    cmd_compare, cmd_solve, cmd_sweep, exit_code, resolve_workers, with_workers,
    write_error_report, SweepGrid, COMPARISON_JSON, EXIT_OK,
};

#[derive(Parser)]
#[command(name = "modreyn", version, about = "Piezoviscous line-contact solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one model variant.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        variant: ModelVariant,
        /// Output directory; defaults to the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (env MODREYN_WORKERS).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Solve every configured variant and compare them.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Solve over a grid of alpha and h0/R values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// JSON file `{"alpha": [...], "h0_over_R": [...]}`.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn run(command: Command) -> modreyn::Result<i32> {
    let (config_path, out, workers) = match &command {
        Command::Solve {
            config,
            out,
            workers,
            ..
        }
        | Command::Compare {
            config,
            out,
            workers,
        }
        | Command::Sweep {
            config,
            out,
            workers,
            ..
        } => (config, out.clone(), *workers),
    };
    let report_path = |out: &Path| match &command {
        Command::Solve { variant, .. } => out.join(variant.name()).join(REPORT_JSON),
        Command::Compare { .. } => out.join(COMPARISON_JSON),
        Command::Sweep { .. } => out.join(REPORT_JSON),
    };
    let (config, notes) = match load_config_with_notes(config_path) {
        Ok(loaded) => loaded,
        Err(e) => {
            error!("{e}");
            if let Some(out) = &out {
                write_error_report(&report_path(out), &e)?;
            }
            return Ok(exit_code(&e));
        }
    };
    let out = out.unwrap_or_else(|| config.output_dir.clone());
    let workers = match resolve_workers(workers) {
        Ok(w) => w,
        Err(e) => {
            error!("{e}");
            write_error_report(&report_path(&out), &e)?;
            return Ok(exit_code(&e));
        }
    };
    with_workers(workers, || match &command {
        Command::Solve { variant, .. } => cmd_solve(&config, &notes, *variant, &out),
        Command::Compare { .. } => cmd_compare(&config, &notes, &out),
        Command::Sweep { grid, .. } => {
            let grid = match SweepGrid::load(grid) {
                Ok(g) => g,
                Err(e) => {
                    error!("{e}");
                    return Ok(exit_code(&e));
                }
            };
            cmd_sweep(&config, &notes, &grid, &out).map(|_| EXIT_OK)
        }
    })?
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            error!("{e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
