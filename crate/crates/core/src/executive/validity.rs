use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arena::Arena;
use crate::encoder::{Plan, PlannedAction, PlanningProblem};
use crate::perception::{Fluent, HealthLevel, HealthThresholds, Percept};

/// A fact the plan relies on at a given step.
///
/// `HealthLevel(l)` means "at least `l`"; `At(w)` is checked when the step
/// begins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assumption {
    pub fluent: Fluent,
    pub step: usize,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.fluent, self.step)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid(Assumption),
}

/// Preconditions of `plan` that the world can take away: items it picks,
/// the health needed to attack, and the waypoint each step after the
/// first starts from.
pub fn derive_assumptions(problem: &PlanningProblem, plan: &Plan) -> Vec<Assumption> {
    let mut out = Vec::new();
    let mut at = problem.snapshot.at().cloned();
    for (t, a) in plan.steps() {
        if t > 0 {
            if let Some(w) = &at {
                out.push(Assumption {
                    fluent: Fluent::At(w.clone()),
                    step: t,
                });
            }
        }
        match a {
            PlannedAction::MoveTowards(w) | PlannedAction::Elude(w) => at = Some(w.clone()),
            PlannedAction::PickAmmo(i) | PlannedAction::PickHealth(i) => {
                if let Some(item) = problem.item(i) {
                    out.push(Assumption {
                        fluent: Fluent::ItemAvailable(i.clone(), item.waypoint.clone(), item.kind),
                        step: t,
                    });
                }
            }
            PlannedAction::Attack => out.push(Assumption {
                fluent: Fluent::HealthLevel(HealthLevel::Medium),
                step: t,
            }),
        }
    }
    out
}

/// Checks the assumptions still ahead of the bot.
///
/// `started` tells whether the action at `current_step` is already under
/// way; its `At` assumption only applies before it starts. Health is
/// projected forward through the plan's remaining health pickups.
pub fn check_plan_valid(
    plan: &Plan,
    assumptions: &[Assumption],
    current_step: usize,
    started: bool,
    p: &Percept,
    arena: &Arena,
    thresholds: &HealthThresholds,
) -> Validity {
    for a in assumptions.iter().filter(|a| a.step >= current_step) {
        let holds = match &a.fluent {
            Fluent::ItemAvailable(i, _, _) => p.item(i).is_none_or(|m| m.available),
            Fluent::HealthLevel(min) => {
                let pickups = (current_step..a.step)
                    .filter(|t| matches!(plan.get(*t), Some(PlannedAction::PickHealth(_))))
                    .count();
                let mut level = thresholds.level(p.me.health);
                for _ in 0..pickups {
                    level = level.raised();
                }
                level >= *min
            }
            Fluent::At(w) if a.step == current_step && !started => {
                arena.nearest_waypoint(p.me.cell) == Some(w)
            }
            _ => true,
        };
        if !holds {
            return Validity::Invalid(a.clone());
        }
    }
    Validity::Valid
}
