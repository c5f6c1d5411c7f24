//! Match runner for the planning bot: configuration, scripted opponents,
//! headless batch matches, reports and the live duel server.

pub mod config;
pub mod enemy;
pub mod protocol;
pub mod report;
pub mod run;
pub mod serve;

pub use config::{ConfigError, EnemyKind, MatchConfig, SolverChoice, TimeMode};
pub use report::{rebuild_report, report_discrepancies, MatchReport};
pub use run::{run_match, run_match_with, MatchRun, RunError};
pub use serve::{DuelServer, ServeError};
