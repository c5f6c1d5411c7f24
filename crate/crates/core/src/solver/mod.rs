//! Answer-set backends: an external grounder/solver pipeline and an
//! internal brute-force oracle that speaks the same atom vocabulary.

mod deepening;
pub mod external;
pub mod oracle;
pub mod output;
pub mod term;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::encoder::{encode, PlanningProblem};

pub use deepening::{plan_with_deepening, HorizonAttempt, NoPlan, PlanFound, Verdict};
pub use external::{solve_external, ExternalConfig};
pub use oracle::solve_oracle;
pub use output::{parse_answer_set, SolverOutput};
pub use term::{AnswerSet, GroundAtom, ParseError, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveResult {
    Sat(AnswerSet),
    Unsat,
    SolverFailure(String),
}

/// Something that answers planning problems. Implementations must be
/// callable from a worker thread.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, problem: &PlanningProblem) -> SolveResult;
}

/// The internal depth-first planner.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleBackend;

impl Backend for OracleBackend {
    fn name(&self) -> &str {
        "oracle"
    }

    fn solve(&self, problem: &PlanningProblem) -> SolveResult {
        solve_oracle(problem)
    }
}

/// Encodes the problem and hands it to an external pipeline.
#[derive(Debug, Clone)]
pub struct ExternalBackend {
    pub config: ExternalConfig,
}

impl Backend for ExternalBackend {
    fn name(&self) -> &str {
        "external"
    }

    fn solve(&self, problem: &PlanningProblem) -> SolveResult {
        match encode(problem) {
            Ok(program) => solve_external(&program, &self.config),
            Err(e) => SolveResult::SolverFailure(format!("encoding failed: {e}")),
        }
    }
}

/// Wraps a backend and sleeps before every call; a stand-in for a slow
/// solver when exercising the executive.
pub struct DelayedBackend {
    pub inner: Arc<dyn Backend>,
    pub delay: Duration,
}

impl Backend for DelayedBackend {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn solve(&self, problem: &PlanningProblem) -> SolveResult {
        std::thread::sleep(self.delay);
        self.inner.solve(problem)
    }
}
