use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use pend3d_cli::{parse_config, run, Task};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TaskArg {
    Simulate,
    Equilibria,
    Linearize,
    Poincare,
    Reconstruct,
    Phase,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Simulate => Task::Simulate,
            TaskArg::Equilibria => Task::Equilibria,
            TaskArg::Linearize => Task::Linearize,
            TaskArg::Poincare => Task::Poincare,
            TaskArg::Reconstruct => Task::Reconstruct,
            TaskArg::Phase => Task::Phase,
        }
    }
}

/// Simulate and analyze the rigid 3D pendulum.
///
/// Exit codes: 0 success, 1 numerical failure, 2 configuration or I/O error.
/// PEND3D_THREADS caps the worker threads (ignored in sequential builds).
#[derive(Debug, Parser)]
#[command(name = "pend3d", version)]
struct Cli {
    task: TaskArg,
    /// Scenario file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Seed for randomly drawn initial states; overrides `seed` in the file.
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("PEND3D_THREADS") else { return Ok(()) };
    let n: usize = value.parse().map_err(|_| format!("PEND3D_THREADS: `{value}` is not a thread count"))?;
    if n == 0 {
        return Err("PEND3D_THREADS must be at least 1".into());
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut scenario = match parse_config(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    scenario.task = cli.task.into();
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    for w in scenario.warnings() {
        eprintln!("warning: {w}");
    }
    match run(&scenario, &cli.out_dir) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
