//! Brute-force forward planner over the action semantics documented in
//! [`crate::encoder`]. It bypasses grounding entirely and is the reference
//! the logic program is checked against.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use super::term::{AnswerSet, GroundAtom, Term};
use super::SolveResult;
use crate::arena::{ItemId, ItemKind, WaypointId};
use crate::encoder::{Emergency, Plan, PlannedAction, PlanningProblem};
use crate::perception::{Fluent, HealthLevel};

/// The planner's view of one time point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicState {
    pub at: WaypointId,
    pub health: HealthLevel,
    pub armed: u8,
    pub ammo_ok: bool,
    pub available: BTreeSet<ItemId>,
    pub enemy_expected: Option<WaypointId>,
    pub enemy_last_seen: Option<WaypointId>,
}

/// Transition system for one planning problem.
pub struct Semantics<'a> {
    problem: &'a PlanningProblem,
    dist: BTreeMap<(WaypointId, WaypointId), u32>,
}

impl<'a> Semantics<'a> {
    pub fn new(problem: &'a PlanningProblem) -> Self {
        let graph = &problem.graph;
        let mut dist = BTreeMap::new();
        for a in graph.ids() {
            for (b, d) in graph.hop_distances(a) {
                dist.insert((a.clone(), b), d);
            }
        }
        Semantics { problem, dist }
    }

    fn dist(&self, a: &WaypointId, b: &WaypointId) -> u32 {
        // The graph is connected, so every pair has an entry.
        self.dist
            .get(&(a.clone(), b.clone()))
            .copied()
            .unwrap_or(u32::MAX)
    }

    /// State at time 0. `None` if the snapshot lacks a position, health
    /// level or tier (the problem would not validate).
    pub fn initial(&self) -> Option<SymbolicState> {
        let s = &self.problem.snapshot;
        Some(SymbolicState {
            at: s.at()?.clone(),
            health: s.health_level()?,
            armed: s.armed()?,
            ammo_ok: s.ammo_ok(),
            available: s.available_items().map(|(i, _, _)| i.clone()).collect(),
            enemy_expected: s.enemy_expected().cloned(),
            enemy_last_seen: s.enemy_last_seen().cloned(),
        })
    }

    pub fn fluents(&self, s: &SymbolicState) -> BTreeSet<Fluent> {
        let mut out = BTreeSet::new();
        out.insert(Fluent::At(s.at.clone()));
        out.insert(Fluent::HealthLevel(s.health));
        out.insert(Fluent::Armed(s.armed));
        if s.ammo_ok {
            out.insert(Fluent::AmmoOk);
        }
        for id in &s.available {
            if let Some(item) = self.problem.item(id) {
                out.insert(Fluent::ItemAvailable(
                    id.clone(),
                    item.waypoint.clone(),
                    item.kind,
                ));
            }
        }
        if let Some(w) = &s.enemy_expected {
            out.insert(Fluent::EnemyExpected(w.clone()));
        }
        if let Some(w) = &s.enemy_last_seen {
            out.insert(Fluent::EnemyLastSeen(w.clone()));
        }
        out
    }

    fn item_here(&self, s: &SymbolicState, id: &ItemId) -> Option<ItemKind> {
        let item = self.problem.item(id)?;
        (item.waypoint == s.at && s.available.contains(id)).then_some(item.kind)
    }

    pub fn executable(&self, s: &SymbolicState, a: &PlannedAction) -> bool {
        let graph = &self.problem.graph;
        match a {
            PlannedAction::Attack => {
                let Some(e) = &s.enemy_expected else {
                    return false;
                };
                s.health >= HealthLevel::Medium
                    && s.armed >= self.problem.attack_tier()
                    && s.ammo_ok
                    && (s.at == *e || graph.has_edge(&s.at, e))
            }
            PlannedAction::MoveTowards(w) => graph.has_edge(&s.at, w),
            PlannedAction::Elude(w) => match &s.enemy_expected {
                Some(e) => graph.has_edge(&s.at, w) && self.dist(w, e) > self.dist(&s.at, e),
                None => false,
            },
            PlannedAction::PickHealth(i) => self.item_here(s, i) == Some(ItemKind::Health),
            PlannedAction::PickAmmo(i) => {
                matches!(
                    self.item_here(s, i),
                    Some(ItemKind::Ammo | ItemKind::Weapon(_))
                )
            }
        }
    }

    /// Successor state, or `None` if `a` is not executable in `s`.
    pub fn apply(&self, s: &SymbolicState, a: &PlannedAction) -> Option<SymbolicState> {
        if !self.executable(s, a) {
            return None;
        }
        let mut next = s.clone();
        match a {
            PlannedAction::Attack => {}
            PlannedAction::MoveTowards(w) | PlannedAction::Elude(w) => next.at = w.clone(),
            PlannedAction::PickHealth(i) => {
                next.health = s.health.raised();
                next.available.remove(i);
            }
            PlannedAction::PickAmmo(i) => {
                if let Some(ItemKind::Weapon(t)) = self.item_here(s, i) {
                    next.armed = next.armed.max(t);
                }
                next.ammo_ok = true;
                next.available.remove(i);
            }
        }
        Some(next)
    }

    /// Every action in expansion order (attack, elude, move_towards,
    /// pick_ammo, pick_health; arguments ascending) that is executable in `s`.
    pub fn candidates(&self, s: &SymbolicState) -> Vec<PlannedAction> {
        let graph = &self.problem.graph;
        let mut out = vec![PlannedAction::Attack];
        out.extend(graph.neighbors(&s.at).cloned().map(PlannedAction::Elude));
        out.extend(
            graph
                .neighbors(&s.at)
                .cloned()
                .map(PlannedAction::MoveTowards),
        );
        out.extend(
            self.problem
                .items
                .iter()
                .map(|i| PlannedAction::PickAmmo(i.id.clone())),
        );
        out.extend(
            self.problem
                .items
                .iter()
                .map(|i| PlannedAction::PickHealth(i.id.clone())),
        );
        out.retain(|a| self.executable(s, a));
        out
    }

    /// Where to flee: the neighbour farthest in hops from the expected enemy
    /// (or from here when the enemy is unknown), smallest id on ties; the
    /// current waypoint when there is no neighbour.
    pub fn escape_target(&self, s: &SymbolicState) -> WaypointId {
        let threat = s.enemy_expected.as_ref().unwrap_or(&s.at);
        let mut best: Option<(u32, &WaypointId)> = None;
        for w in self.problem.graph.neighbors(&s.at) {
            let d = self.dist(w, threat);
            if best.is_none_or(|(bd, _)| d > bd) {
                best = Some((d, w));
            }
        }
        best.map_or_else(|| s.at.clone(), |(_, w)| w.clone())
    }

    pub fn reaction(&self, s: &SymbolicState, e: Emergency) -> PlannedAction {
        match e {
            Emergency::UnderAttack if s.health == HealthLevel::Low => {
                PlannedAction::Elude(self.escape_target(s))
            }
            Emergency::UnderAttack => PlannedAction::Attack,
            Emergency::FacingEnemy => {
                let strong =
                    s.health >= HealthLevel::Medium && s.armed >= self.problem.enemy_tier_estimate;
                if strong {
                    PlannedAction::Attack
                } else {
                    PlannedAction::Elude(self.escape_target(s))
                }
            }
            Emergency::BehindEnemy => PlannedAction::Attack,
        }
    }
}

/// A plan that does not replay under the action semantics.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("plan length {0} differs from horizon {1}")]
    Length(usize, usize),
    #[error("step {0}: {1} is not executable")]
    NotExecutable(usize, PlannedAction),
    #[error("problem has no complete initial state")]
    NoInitialState,
}

/// Replays `plan` from the problem's initial state and returns the induced
/// trajectory (horizon + 1 states).
pub fn replay(problem: &PlanningProblem, plan: &Plan) -> Result<Vec<SymbolicState>, ReplayError> {
    if plan.len() != problem.horizon {
        return Err(ReplayError::Length(plan.len(), problem.horizon));
    }
    let sem = Semantics::new(problem);
    let mut states = vec![sem.initial().ok_or(ReplayError::NoInitialState)?];
    for (t, a) in plan.steps() {
        let next = sem
            .apply(&states[t], a)
            .ok_or_else(|| ReplayError::NotExecutable(t, a.clone()))?;
        states.push(next);
    }
    Ok(states)
}

struct Search<'s, 'a> {
    sem: &'s Semantics<'a>,
    horizon: usize,
    failed: HashSet<(SymbolicState, usize)>,
}

impl Search<'_, '_> {
    /// First action sequence from `s` of exactly `remaining` steps ending in attack.
    fn dfs(&mut self, s: &SymbolicState, remaining: usize, path: &mut Vec<PlannedAction>) -> bool {
        if self.failed.contains(&(s.clone(), remaining)) {
            return false;
        }
        if remaining == 1 {
            if self.sem.executable(s, &PlannedAction::Attack) {
                path.push(PlannedAction::Attack);
                return true;
            }
        } else {
            for a in self.sem.candidates(s) {
                let next = self.sem.apply(s, &a).expect("candidates are executable");
                path.push(a);
                if self.dfs(&next, remaining - 1, path) {
                    return true;
                }
                path.pop();
            }
        }
        self.failed.insert((s.clone(), remaining));
        false
    }
}

fn int(n: usize) -> Term {
    Term::Int(n as i64)
}

/// Renders a plan and its trajectory the way a solver would report the model.
fn render(
    problem: &PlanningProblem,
    sem: &Semantics<'_>,
    plan: &[PlannedAction],
    states: &[SymbolicState],
) -> AnswerSet {
    let mut atoms = BTreeSet::new();
    for (t, a) in plan.iter().enumerate() {
        atoms.insert(GroundAtom::new("occurs", vec![a.to_term(), int(t)]));
    }
    for (t, s) in states.iter().enumerate() {
        for f in sem.fluents(s) {
            atoms.insert(GroundAtom::new("holds", vec![Term::from(&f), int(t)]));
        }
    }
    for (t, s) in states.iter().take(problem.horizon).enumerate() {
        for &e in &problem.emergencies {
            let r = sem.reaction(s, e);
            atoms.insert(GroundAtom::new(
                "react",
                vec![int(t), Term::constant(e.as_str()), r.to_term()],
            ));
        }
    }
    AnswerSet { atoms }
}

/// Deterministic depth-first plan search. Never fails: an invalid problem
/// has no plans and yields `Unsat`.
pub fn solve_oracle(problem: &PlanningProblem) -> SolveResult {
    if problem.validate().is_err() {
        return SolveResult::Unsat;
    }
    let sem = Semantics::new(problem);
    let Some(s0) = sem.initial() else {
        return SolveResult::Unsat;
    };
    let mut search = Search {
        sem: &sem,
        horizon: problem.horizon,
        failed: HashSet::new(),
    };
    let mut path = Vec::with_capacity(search.horizon);
    if !search.dfs(&s0, problem.horizon, &mut path) {
        return SolveResult::Unsat;
    }
    let mut states = vec![s0];
    for a in &path {
        let next = sem
            .apply(states.last().expect("nonempty"), a)
            .expect("search path is executable");
        states.push(next);
    }
    SolveResult::Sat(render(problem, &sem, &path, &states))
}
