use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use qsmodels_core::arena::MapError;
use qsmodels_core::encoder::DEFAULT_MAX_HORIZON;
use qsmodels_core::solver::external::{PipelineError, SOLVER_ENV};
use qsmodels_core::solver::{
    Backend, DelayedBackend, ExternalBackend, ExternalConfig, OracleBackend,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read map {path}: {source}")]
    MapRead {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("map {path}: {source}")]
    Map { path: PathBuf, source: MapError },
    #[error("solver pipeline: {0}")]
    Pipeline(#[from] PipelineError),
}

macro_rules! choice {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $(#[value(name = $text)] $variant),+
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $text),+ })
            }
        }

        impl FromStr for $name {
            type Err = ConfigError;
            fn from_str(s: &str) -> Result<Self, ConfigError> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(ConfigError::Invalid(format!(
                        concat!("unknown ", stringify!($name), " `{}`"), other
                    ))),
                }
            }
        }
    };
}

choice!(SolverChoice { Oracle => "oracle", External => "external" });
choice!(EnemyKind {
    Patrol => "patrol",
    Aggressive => "aggressive",
    Random => "random",
    Stationary => "stationary",
    Human => "human",
});
choice!(TimeMode { Realtime => "realtime", Fast => "fast" });

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub map: PathBuf,
    pub seed: u64,
    pub tick_ms: u64,
    pub horizon_max: usize,
    pub solver: SolverChoice,
    /// Extra sleep before every solve, to imitate a slow solver.
    pub solver_delay_ms: u64,
    pub enemy: EnemyKind,
    pub time_mode: TimeMode,
    pub ticks: u64,
    pub serve: Option<String>,
    pub log: Option<PathBuf>,
}

impl MatchConfig {
    pub fn new(map: impl Into<PathBuf>) -> Self {
        MatchConfig {
            map: map.into(),
            seed: 0,
            tick_ms: 100,
            horizon_max: DEFAULT_MAX_HORIZON,
            solver: SolverChoice::Oracle,
            solver_delay_ms: 0,
            enemy: EnemyKind::Patrol,
            time_mode: TimeMode::Fast,
            ticks: 1200,
            serve: None,
            log: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_owned()));
        if self.tick_ms == 0 {
            return bad("tick period must be positive");
        }
        if self.horizon_max == 0 {
            return bad("maximum horizon must be at least 1");
        }
        if self.enemy == EnemyKind::Human
            && (self.serve.is_none() || self.time_mode != TimeMode::Realtime)
        {
            return bad("a human enemy needs --serve and --realtime");
        }
        Ok(())
    }

    pub fn tick_period(&self) -> Duration {
        Duration::from_millis(self.tick_ms)
    }

    /// The configured backend. A non-empty `QSM_SOLVER` overrides it:
    /// `oracle` selects the internal planner, anything else is an external
    /// pipeline.
    pub fn backend(&self) -> Result<Arc<dyn Backend>, ConfigError> {
        let env = std::env::var(SOLVER_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty());
        let base: Arc<dyn Backend> = match (env.as_deref().map(str::trim), self.solver) {
            (Some("oracle"), _) | (None, SolverChoice::Oracle) => Arc::new(OracleBackend),
            (Some(spec), _) => Arc::new(ExternalBackend {
                config: ExternalConfig::parse(spec)?,
            }),
            (None, SolverChoice::External) => Arc::new(ExternalBackend {
                config: ExternalConfig::default(),
            }),
        };
        Ok(if self.solver_delay_ms > 0 {
            Arc::new(DelayedBackend {
                inner: base,
                delay: Duration::from_millis(self.solver_delay_ms),
            })
        } else {
            base
        })
    }
}
