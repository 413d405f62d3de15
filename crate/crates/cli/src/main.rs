use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod commands;
mod config;

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "stackchan", version, about = "Frequency-stacking planner and two-stage polyphase channeliser")]
struct Cli {
    /// INI run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overrides io.output_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed, overrides sim.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Allow GMR-size fine banks (1280 or 2048 channels).
    #[arg(long, global = true)]
    full_scale: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Choose LO multiples and report the prototype band edges.
    Plan,
    /// Design coarse and fine prototypes and verify them.
    Design,
    /// Operation-count sweep of both coarse candidates.
    Estimate,
    /// Generate the frequency-stacked stimulus.
    Stack,
    /// Run the stimulus through the full channeliser.
    Run,
    /// End-to-end error versus SNR for both coarse candidates.
    Sweep,
}

#[derive(Debug)]
pub enum CliError {
    Config(Vec<String>),
    Design(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Design(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Config(v) => ("config", v.join("; ")),
            CliError::Design(m) => ("design", m.clone()),
            CliError::Runtime(m) => ("runtime", m.clone()),
        };
        format!("error[{kind}]: {}", msg.replace(['\n', '\r'], " "))
    }
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p, cli.full_scale).map_err(CliError::Config)?,
        None => {
            let c = RunConfig::default();
            c.validate(cli.full_scale).map_err(CliError::Config)?;
            c
        }
    };
    if let Some(s) = cli.seed {
        cfg.sim.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| {
        std::fs::create_dir_all(&cfg.output_dir).map_err(|e| {
            CliError::Runtime(format!("cannot create {}: {e}", cfg.output_dir.display()))
        })?;
        match cli.command {
            Command::Plan => commands::plan(&cfg),
            Command::Design => commands::design(&cfg),
            Command::Estimate => commands::estimate(&cfg),
            Command::Stack => commands::stack(&cfg),
            Command::Run => commands::run(&cfg),
            Command::Sweep => commands::sweep(&cfg),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.code())
        }
    }
}
