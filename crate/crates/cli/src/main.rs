use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use resoshift_cli::{run, RunError, RunOptions, ScenarioConfig, Task};

#[derive(Parser)]
#[command(name = "resoshift", version, about = "Resonance shifts of open cavities perturbed by small particles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unperturbed cavity resonances in a search box
    Modes(Common),
    /// First-order shifts and splitting eigenvalues
    Shift(Common),
    /// Reference resonances of cavity plus particle
    Oracle(Common),
    /// Asymptotic (and optionally reference) shifts over a parameter sweep
    Sweep(Common),
    /// Polarization tensor of a shape
    Pt(Common),
    /// Particle size from measured resonances
    InvertSize(Common),
    /// Particle count from measured resonances
    InvertCount(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// CSV output; defaults to the config's `output`, else stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on worker threads for sweeps
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
}

fn execute(task: Task, args: &Common) -> Result<(), RunError> {
    let (cfg, raw) = ScenarioConfig::load(&args.config)?;
    let opts = RunOptions { threads: args.threads.map(usize::from) };
    let table = run(&cfg, task, &raw, &opts)?;
    match args.out.as_ref().or(cfg.output.as_ref()) {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| RunError::Output { path: path.display().to_string(), message: e.to_string() })?;
            table
                .write_csv(std::io::BufWriter::new(file))
                .map_err(|e| RunError::Output { path: path.display().to_string(), message: e.to_string() })
        }
        None => table.write_csv(std::io::stdout().lock()).map_err(|e| RunError::Output { path: "<stdout>".into(), message: e.to_string() }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (task, args) = match &cli.command {
        Command::Modes(a) => (Task::Modes, a),
        Command::Shift(a) => (Task::Shift, a),
        Command::Oracle(a) => (Task::Oracle, a),
        Command::Sweep(a) => (Task::Sweep, a),
        Command::Pt(a) => (Task::Pt, a),
        Command::InvertSize(a) => (Task::InvertSize, a),
        Command::InvertCount(a) => (Task::InvertCount, a),
    };
    match execute(task, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.variant());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
