use std::fs::File;
use std::io::{BufWriter, Write};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use qsmodels_core::arena::{load_map, step, ArenaRules, Command, MapSpec, WorldState};
use qsmodels_core::executive::{
    transition_counts, DeferredPlanner, Event, Executive, ExecutiveConfig, Outcome, PlanService,
    ThreadedPlanner,
};
use qsmodels_core::solver::Backend;

use crate::config::{ConfigError, MatchConfig, TimeMode};
use crate::enemy::{scripted, EnemyController};
use crate::report::{MatchReport, ReportBuilder};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("event log: {0}")]
    Log(#[from] std::io::Error),
}

/// Everything that happened in one tick, handed to a [`TickObserver`]
/// before the world advances.
pub struct TickFrame<'a> {
    pub world: &'a WorldState,
    pub executive: &'a Executive,
    pub bot_cmd: Command,
    pub enemy_cmd: Command,
    /// When the bot's command was produced.
    pub issued_at: Instant,
}

pub trait TickObserver {
    fn on_tick(&mut self, _frame: &TickFrame<'_>) {}
    fn on_end(&mut self, _outcome: Outcome, _tick: u64) {}
}

/// Observer that ignores everything.
pub struct NoObserver;

impl TickObserver for NoObserver {}

#[derive(Debug, Clone)]
pub struct MatchRun {
    pub report: MatchReport,
    pub events: Vec<Event>,
}

impl MatchRun {
    /// The event log as newline-delimited JSON.
    pub fn log_text(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("events serialize") + "\n")
            .collect()
    }
}

pub fn load_spec(config: &MatchConfig) -> Result<MapSpec, ConfigError> {
    let text = std::fs::read_to_string(&config.map).map_err(|source| ConfigError::MapRead {
        path: config.map.clone(),
        source,
    })?;
    load_map(&text).map_err(|source| ConfigError::Map {
        path: config.map.clone(),
        source,
    })
}

pub fn make_planner(config: &MatchConfig, backend: Arc<dyn Backend>) -> Box<dyn PlanService> {
    match config.time_mode {
        TimeMode::Fast => Box::new(DeferredPlanner::new(backend, config.tick_ms)),
        TimeMode::Realtime => Box::new(ThreadedPlanner::new(backend)),
    }
}

pub fn executive_config(config: &MatchConfig) -> ExecutiveConfig {
    ExecutiveConfig {
        horizon_max: config.horizon_max,
        ..ExecutiveConfig::default()
    }
}

/// Runs a match against a scripted enemy, entirely from `config`.
pub fn run_match(config: &MatchConfig) -> Result<MatchRun, RunError> {
    config.validate()?;
    let spec = load_spec(config)?;
    let world = WorldState::new(&spec, ArenaRules::default(), config.seed);
    let enemy = scripted(config.enemy, &world)
        .ok_or_else(|| ConfigError::Invalid(format!("enemy `{}` is not scripted", config.enemy)))?;
    let backend = config.backend()?;
    let executive = Executive::new(
        executive_config(config),
        world.arena.clone(),
        make_planner(config, backend),
    );
    run_match_with(config, world, executive, enemy, &mut NoObserver)
}

fn outcome_of(world: &WorldState) -> Outcome {
    match (world.bot.is_alive(), world.enemy.is_alive()) {
        (true, true) => Outcome::Timeout,
        (true, false) => Outcome::BotWin,
        (false, true) => Outcome::EnemyWin,
        (false, false) => Outcome::Draw,
    }
}

/// The tick loop. In real-time mode each tick starts on a fixed wall-clock
/// schedule; in fast mode ticks run back to back.
pub fn run_match_with(
    config: &MatchConfig,
    mut world: WorldState,
    mut executive: Executive,
    mut enemy: Box<dyn EnemyController>,
    observer: &mut dyn TickObserver,
) -> Result<MatchRun, RunError> {
    let mut log = match &config.log {
        Some(path) => Some(BufWriter::new(File::create(path)?)),
        None => None,
    };
    let mut events = Vec::new();
    let mut builder = ReportBuilder::default();
    let mut record = |e: Event, log: &mut Option<BufWriter<File>>| -> std::io::Result<()> {
        if let Some(w) = log.as_mut() {
            serde_json::to_writer(&mut *w, &e)?;
            w.write_all(b"\n")?;
        }
        builder.observe(&e);
        events.push(e);
        Ok(())
    };

    let period = config.tick_period();
    let start = Instant::now();
    for k in 0..config.ticks {
        if world.is_over() {
            break;
        }
        if config.time_mode == TimeMode::Realtime {
            let deadline = start + period * u32::try_from(k).unwrap_or(u32::MAX);
            let now = Instant::now();
            if deadline > now {
                thread::sleep(deadline - now);
            }
        }
        let bot_cmd = executive.tick(&world);
        let issued_at = Instant::now();
        let mut rng = world.rng.clone();
        let enemy_cmd = enemy.command(&world, &mut rng);
        world.rng = rng;
        for e in executive.drain_events() {
            record(e, &mut log)?;
        }
        observer.on_tick(&TickFrame {
            world: &world,
            executive: &executive,
            bot_cmd,
            enemy_cmd,
            issued_at,
        });
        world = step(&world, bot_cmd, enemy_cmd);
    }

    let outcome = outcome_of(&world);
    let tick = world.tick;
    record(
        Event::OpponentCounts {
            tick,
            counts: transition_counts(executive.opponent().counts()),
        },
        &mut log,
    )?;
    record(Event::MatchEnd { tick, outcome }, &mut log)?;
    if let Some(mut w) = log {
        w.flush()?;
    }
    observer.on_end(outcome, tick);
    Ok(MatchRun {
        report: builder.finish(outcome, tick),
        events,
    })
}

/// Longest gap between consecutive command times minus `period`, i.e. the
/// worst lateness of any tick. Zero for fewer than two samples.
pub fn max_jitter(times: &[Instant], period: Duration) -> Duration {
    times
        .windows(2)
        .map(|w| {
            let gap = w[1] - w[0];
            gap.abs_diff(period)
        })
        .max()
        .unwrap_or_default()
}
