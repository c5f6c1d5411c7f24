use std::collections::BTreeMap;

use thiserror::Error;

use super::{Emergency, Plan, PlannedAction, PreemptionTable};
use crate::solver::term::{AnswerSet, GroundAtom, Term};

/// The answer set does not describe a well-formed plan. This points at an
/// encoder/solver mismatch and is never repaired.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MalformedAnswerSet {
    #[error("no occurs/2 atoms")]
    Empty,
    #[error("no action at step {0}")]
    Gap(usize),
    #[error("two actions at step {0}: {1} and {2}")]
    DuplicateStep(usize, PlannedAction, PlannedAction),
    #[error("final action is {0}, not attack")]
    NotAttackLast(PlannedAction),
    #[error("unrecognised atom `{0}`")]
    BadAtom(String),
    #[error("no reaction for step {0}, {1}")]
    MissingReaction(usize, Emergency),
    #[error("conflicting reactions for step {0}, {1}: {2} and {3}")]
    ConflictingReaction(usize, Emergency, PlannedAction, PlannedAction),
    #[error("reaction outside the plan grid: step {0}, {1}")]
    StrayReaction(usize, Emergency),
}

fn step_of(atom: &GroundAtom, t: &Term) -> Result<usize, MalformedAnswerSet> {
    t.as_int()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| MalformedAnswerSet::BadAtom(atom.to_string()))
}

fn action_of(atom: &GroundAtom, t: &Term) -> Result<PlannedAction, MalformedAnswerSet> {
    PlannedAction::from_term(t).ok_or_else(|| MalformedAnswerSet::BadAtom(atom.to_string()))
}

/// Extracts the plan from the `occurs/2` atoms of a model.
pub fn decode_plan(answer: &AnswerSet) -> Result<Plan, MalformedAnswerSet> {
    let mut by_step: BTreeMap<usize, PlannedAction> = BTreeMap::new();
    for atom in answer.with_predicate("occurs", 2) {
        let action = action_of(atom, &atom.args[0])?;
        let t = step_of(atom, &atom.args[1])?;
        if let Some(prev) = by_step.insert(t, action.clone()) {
            let (a, b) = if prev <= action {
                (prev, action)
            } else {
                (action, prev)
            };
            return Err(MalformedAnswerSet::DuplicateStep(t, a, b));
        }
    }
    let mut steps = Vec::with_capacity(by_step.len());
    for (expected, (t, action)) in by_step.into_iter().enumerate() {
        if t != expected {
            return Err(MalformedAnswerSet::Gap(expected));
        }
        steps.push(action);
    }
    Plan::new(steps)
}

/// Builds the reaction table from the `react/3` atoms of a model. The table
/// must cover exactly `0..horizon × emergencies`.
pub fn decode_preemption(
    answer: &AnswerSet,
    horizon: usize,
    emergencies: &[Emergency],
) -> Result<PreemptionTable, MalformedAnswerSet> {
    let mut entries: BTreeMap<(usize, Emergency), PlannedAction> = BTreeMap::new();
    for atom in answer.with_predicate("react", 3) {
        let t = step_of(atom, &atom.args[0])?;
        let e = atom.args[1]
            .as_const()
            .and_then(Emergency::from_name)
            .ok_or_else(|| MalformedAnswerSet::BadAtom(atom.to_string()))?;
        let action = action_of(atom, &atom.args[2])?;
        match entries.get(&(t, e)) {
            Some(prev) if *prev != action => {
                return Err(MalformedAnswerSet::ConflictingReaction(
                    t,
                    e,
                    prev.clone(),
                    action,
                ));
            }
            Some(_) => {}
            None => {
                entries.insert((t, e), action);
            }
        }
    }
    PreemptionTable::new(horizon, emergencies, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{ItemId, WaypointId};
    use crate::solver::term::parse_atoms;

    fn answer(text: &str) -> AnswerSet {
        parse_atoms(text, 1).unwrap().into_iter().collect()
    }

    #[test]
    fn three_step_plan() {
        let a = answer(
            "occurs(move_towards(w1),0) occurs(pick_health(h1),1) occurs(attack,2) holds(at(w0),0)",
        );
        let plan = decode_plan(&a).unwrap();
        assert_eq!(
            plan.actions(),
            &[
                PlannedAction::MoveTowards(WaypointId::new("w1").unwrap()),
                PlannedAction::PickHealth(ItemId::new("h1").unwrap()),
                PlannedAction::Attack
            ]
        );
    }

    #[test]
    fn minimal_plan() {
        assert_eq!(decode_plan(&answer("occurs(attack,0)")).unwrap().len(), 1);
    }

    #[test]
    fn gaps_duplicates_and_tails_are_rejected() {
        assert_eq!(
            decode_plan(&answer("occurs(attack,0) occurs(attack,2)")),
            Err(MalformedAnswerSet::Gap(1))
        );
        assert!(matches!(
            decode_plan(&answer("occurs(attack,0) occurs(elude(w1),0)")),
            Err(MalformedAnswerSet::DuplicateStep(0, _, _))
        ));
        assert!(matches!(
            decode_plan(&answer("occurs(attack,0) occurs(elude(w1),1)")),
            Err(MalformedAnswerSet::NotAttackLast(_))
        ));
        assert_eq!(
            decode_plan(&answer("holds(at(w0),0)")),
            Err(MalformedAnswerSet::Empty)
        );
        assert!(matches!(
            decode_plan(&answer("occurs(jump,0)")),
            Err(MalformedAnswerSet::BadAtom(_))
        ));
        assert!(matches!(
            decode_plan(&answer("occurs(attack,-1)")),
            Err(MalformedAnswerSet::BadAtom(_))
        ));
    }

    #[test]
    fn total_table() {
        let a = answer(
            "react(0,under_attack,attack) react(0,facing_enemy,attack) react(0,behind_enemy,attack) \
             react(1,under_attack,elude(w2)) react(1,facing_enemy,attack) react(1,behind_enemy,attack)",
        );
        let table = decode_preemption(&a, 2, &Emergency::ALL).unwrap();
        assert_eq!(table.len(), 6);
        assert_eq!(
            table.get(1, Emergency::UnderAttack),
            Some(&PlannedAction::Elude(WaypointId::new("w2").unwrap()))
        );
    }

    #[test]
    fn missing_conflicting_and_stray_cells() {
        let full = "react(0,under_attack,attack) react(0,facing_enemy,attack) react(0,behind_enemy,attack) \
                    react(1,under_attack,attack) react(1,facing_enemy,attack)";
        assert_eq!(
            decode_preemption(&answer(full), 2, &Emergency::ALL),
            Err(MalformedAnswerSet::MissingReaction(
                1,
                Emergency::BehindEnemy
            ))
        );
        let conflict =
            format!("{full} react(1,behind_enemy,attack) react(1,behind_enemy,elude(w0))");
        assert!(matches!(
            decode_preemption(&answer(&conflict), 2, &Emergency::ALL),
            Err(MalformedAnswerSet::ConflictingReaction(
                1,
                Emergency::BehindEnemy,
                _,
                _
            ))
        ));
        let stray = format!("{full} react(1,behind_enemy,attack) react(2,behind_enemy,attack)");
        assert_eq!(
            decode_preemption(&answer(&stray), 2, &Emergency::ALL),
            Err(MalformedAnswerSet::StrayReaction(2, Emergency::BehindEnemy))
        );
    }
}
