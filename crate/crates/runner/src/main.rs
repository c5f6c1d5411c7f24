use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use qsmodels::config::{EnemyKind, MatchConfig, SolverChoice, TimeMode};
use qsmodels::report::rebuild_report;
use qsmodels::run::run_match;
use qsmodels::serve::DuelServer;

#[derive(Parser)]
#[command(
    name = "qsmodels",
    version,
    about = "Planning bot duels on a grid arena"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Play a match (or, with --serve, host matches for a human player).
    Run(RunArgs),
    /// Recompute a match report from an event log.
    Report {
        #[arg(long)]
        log: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = SolverChoice::Oracle)]
    solver: SolverChoice,
    /// Artificial delay added to every solver call, in milliseconds.
    #[arg(long, default_value_t = 0)]
    solver_delay_ms: u64,
    #[arg(long, value_enum, default_value_t = EnemyKind::Patrol)]
    enemy: EnemyKind,
    #[arg(long, default_value_t = qsmodels_core::encoder::DEFAULT_MAX_HORIZON)]
    horizon_max: usize,
    #[arg(long, default_value_t = 100)]
    tick_ms: u64,
    /// Run ticks back to back on simulated time (the default).
    #[arg(long, conflicts_with = "realtime")]
    fast: bool,
    /// Pace ticks by the wall clock.
    #[arg(long)]
    realtime: bool,
    #[arg(long, default_value_t = 1200)]
    ticks: u64,
    /// Host a live duel at HOST:PORT.
    #[arg(long)]
    serve: Option<String>,
    /// Write the event log (one JSON object per line) here.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Write the match report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> MatchConfig {
        let mut c = MatchConfig::new(&self.map);
        c.seed = self.seed;
        c.solver = self.solver;
        c.solver_delay_ms = self.solver_delay_ms;
        c.enemy = self.enemy;
        c.horizon_max = self.horizon_max;
        c.tick_ms = self.tick_ms;
        c.time_mode = if self.realtime || self.serve.is_some() {
            TimeMode::Realtime
        } else {
            TimeMode::Fast
        };
        c.ticks = self.ticks;
        c.serve = self.serve.clone();
        c.log = self.log.clone();
        c
    }
}

fn emit(json: String, path: Option<&PathBuf>) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, json + "\n").with_context(|| format!("writing {}", p.display()))
        }
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Run(args) => {
            let config = args.config();
            config.validate()?;
            if let Some(addr) = &config.serve {
                let server = DuelServer::bind(addr)?;
                eprintln!("serving duels on ws://{}", server.local_addr());
                server.run(&config, None)?;
                return Ok(());
            }
            let run = run_match(&config)?;
            emit(
                serde_json::to_string_pretty(&run.report)?,
                args.report.as_ref(),
            )
        }
        Cmd::Report { log } => {
            let text = std::fs::read_to_string(&log)
                .with_context(|| format!("reading {}", log.display()))?;
            let report = rebuild_report(&text)?;
            emit(serde_json::to_string_pretty(&report)?, None)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
