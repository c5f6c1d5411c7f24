use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{Backend, SolveResult};
use crate::encoder::{decode_plan, decode_preemption, Plan, PlanningProblem, PreemptionTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Sat,
    Unsat,
    Failure,
}

/// One backend call during deepening.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonAttempt {
    pub horizon: usize,
    pub verdict: Verdict,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanFound {
    pub plan: Plan,
    pub preemption: PreemptionTable,
    pub horizon: usize,
    pub attempts: Vec<HorizonAttempt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoPlan {
    /// Set when a backend failed or returned a malformed model; `None`
    /// when every horizon was simply unsatisfiable.
    pub diagnostic: Option<String>,
    pub attempts: Vec<HorizonAttempt>,
}

/// Tries horizons `1..=n_max` in order and decodes the first model found.
/// A backend failure or malformed model stops the search.
pub fn plan_with_deepening(
    template: &PlanningProblem,
    n_max: usize,
    backend: &dyn Backend,
) -> Result<PlanFound, NoPlan> {
    let mut attempts = Vec::new();
    let template = match template
        .clone()
        .with_max_horizon(n_max.max(template.max_horizon))
    {
        Ok(t) => t,
        Err(e) => {
            return Err(NoPlan {
                diagnostic: Some(e.to_string()),
                attempts,
            })
        }
    };
    for horizon in 1..=n_max {
        let fail = |attempts, msg: String| {
            log::warn!("{} backend, horizon {horizon}: {msg}", backend.name());
            Err(NoPlan {
                diagnostic: Some(msg),
                attempts,
            })
        };
        let problem = match template.with_horizon(horizon) {
            Ok(p) => p,
            Err(e) => return fail(attempts, e.to_string()),
        };
        let started = Instant::now();
        let result = backend.solve(&problem);
        let elapsed = started.elapsed();
        let verdict = match &result {
            SolveResult::Sat(_) => Verdict::Sat,
            SolveResult::Unsat => Verdict::Unsat,
            SolveResult::SolverFailure(_) => Verdict::Failure,
        };
        attempts.push(HorizonAttempt {
            horizon,
            verdict,
            elapsed,
        });
        log::debug!(
            "{} backend, horizon {horizon}: {verdict:?} in {elapsed:?}",
            backend.name()
        );
        match result {
            SolveResult::Unsat => continue,
            SolveResult::SolverFailure(d) => return fail(attempts, d),
            SolveResult::Sat(model) => {
                let decoded = decode_plan(&model).and_then(|plan| {
                    decode_preemption(&model, horizon, &problem.emergencies).map(|t| (plan, t))
                });
                return match decoded {
                    Ok((plan, preemption)) if plan.len() == horizon => Ok(PlanFound {
                        plan,
                        preemption,
                        horizon,
                        attempts,
                    }),
                    Ok((plan, _)) => fail(
                        attempts,
                        format!(
                            "malformed answer set: plan of length {} at horizon {horizon}",
                            plan.len()
                        ),
                    ),
                    Err(e) => fail(attempts, format!("malformed answer set: {e}")),
                };
            }
        }
    }
    Err(NoPlan {
        diagnostic: None,
        attempts,
    })
}
