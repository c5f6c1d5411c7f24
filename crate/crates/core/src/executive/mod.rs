//! The reactive layer: one [`Executive::tick`] per world tick.
//!
//! Each tick runs the same cycle: sense, update the opponent model, collect
//! a finished plan if one arrived, check for emergencies (and dispatch a
//! reaction), then either validate and advance the current plan or, with
//! no plan, ask for one and hide until it arrives. Planning happens behind
//! a [`PlanService`]; the tick never waits for it.

mod action;
mod emergency;
mod events;
mod planner;
mod validity;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::arena::{
    distance_field, line_of_sight, shortest_path, Arena, Cell, Command, Direction, WaypointId,
    WorldState,
};
use crate::encoder::{
    Emergency, EncodeError, KnownItem, Plan, PlannedAction, PlanningProblem, PreemptionTable,
    DEFAULT_MAX_HORIZON,
};
use crate::opponent::{OpponentModel, DEFAULT_STALENESS_WINDOW};
use crate::perception::{sense, to_fluents, HealthThresholds, Percept};
use crate::solver::oracle::Semantics;

pub use action::{ActionContext, ActionStatus, ActiveAction};
pub use emergency::{detect_emergencies, most_urgent};
pub use events::{transition_counts, Event, Outcome, TransitionCount};
pub use planner::{DeferredPlanner, PlanRequest, PlanResponse, PlanService, ThreadedPlanner};
pub use validity::{check_plan_valid, derive_assumptions, Assumption, Validity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutiveConfig {
    pub horizon_max: usize,
    pub thresholds: HealthThresholds,
    /// Start with the map's item layout in memory (as a player who knows
    /// the level would) instead of discovering items by sight.
    pub prior_item_knowledge: bool,
    /// Ticks to wait before asking again after a failed request.
    pub replan_backoff_ticks: u64,
    /// An action is stuck after this many movement ticks per path cell.
    pub stuck_factor: u32,
    pub staleness_window: u64,
    pub opponent_learning: bool,
}

impl Default for ExecutiveConfig {
    fn default() -> Self {
        ExecutiveConfig {
            horizon_max: DEFAULT_MAX_HORIZON,
            thresholds: HealthThresholds::default(),
            prior_item_knowledge: true,
            replan_backoff_ticks: 10,
            stuck_factor: 3,
            staleness_window: DEFAULT_STALENESS_WINDOW,
            opponent_learning: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    PlanningHiding,
    Executing,
    Reacting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreemptionRecord {
    pub tick: u64,
    pub step: Option<usize>,
    pub emergency: Emergency,
    pub action: PlannedAction,
}

#[derive(Debug, Clone)]
struct ActivePlan {
    plan: Plan,
    table: PreemptionTable,
    assumptions: Vec<Assumption>,
    step: usize,
    enemy_expected: Option<Cell>,
}

pub struct Executive {
    config: ExecutiveConfig,
    arena: Arc<Arena>,
    planner: Box<dyn PlanService>,
    opponent: OpponentModel,
    memory: Option<Percept>,
    mode: Mode,
    plan: Option<ActivePlan>,
    active: Option<ActiveAction>,
    next_request_id: u64,
    /// Request sent and not yet answered (possibly superseded).
    outstanding: Option<(u64, PlanningProblem)>,
    /// Request whose answer will be used; `None` once superseded.
    accepted: Option<u64>,
    backoff_until: u64,
    events: Vec<Event>,
    last_preemption: Option<PreemptionRecord>,
    /// Tick at which the bot last stood on each waypoint, for scouting.
    visited: BTreeMap<WaypointId, u64>,
}

/// Upper bound on action hand-overs within one tick.
const MAX_STEPS_PER_TICK: usize = 64;

impl Executive {
    pub fn new(config: ExecutiveConfig, arena: Arc<Arena>, planner: Box<dyn PlanService>) -> Self {
        let mut opponent = OpponentModel::new(config.staleness_window);
        if !config.opponent_learning {
            opponent = opponent.without_learning();
        }
        Executive {
            config,
            arena,
            planner,
            opponent,
            memory: None,
            mode: Mode::PlanningHiding,
            plan: None,
            active: None,
            next_request_id: 1,
            outstanding: None,
            accepted: None,
            backoff_until: 0,
            events: Vec::new(),
            last_preemption: None,
            visited: BTreeMap::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn plan(&self) -> Option<&Plan> {
        self.plan.as_ref().map(|p| &p.plan)
    }

    pub fn preemption_table(&self) -> Option<&PreemptionTable> {
        self.plan.as_ref().map(|p| &p.table)
    }

    pub fn current_step(&self) -> Option<usize> {
        self.plan.as_ref().map(|p| p.step)
    }

    pub fn active_action(&self) -> Option<&ActiveAction> {
        self.active.as_ref()
    }

    pub fn last_preemption(&self) -> Option<&PreemptionRecord> {
        self.last_preemption.as_ref()
    }

    pub fn opponent(&self) -> &OpponentModel {
        &self.opponent
    }

    pub fn outstanding_request(&self) -> Option<u64> {
        self.outstanding.as_ref().map(|(id, _)| *id)
    }

    pub fn percept(&self) -> Option<&Percept> {
        self.memory.as_ref()
    }

    /// Events emitted since the last call, oldest first.
    pub fn drain_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }

    /// Structural invariants; `Err` names the first one broken.
    pub fn check_invariants(&self) -> Result<(), String> {
        match (self.mode, &self.plan) {
            (Mode::Executing, None) => return Err("executing without a plan".into()),
            (Mode::Executing, Some(p)) if p.step >= p.plan.len() => {
                return Err(format!(
                    "step {} past plan of length {}",
                    p.step,
                    p.plan.len()
                ))
            }
            (Mode::Reacting | Mode::PlanningHiding, Some(_)) => {
                return Err(format!("{:?} while holding a plan", self.mode))
            }
            _ => {}
        }
        if self.mode == Mode::Reacting && self.active.as_ref().is_none_or(|a| a.step.is_some()) {
            return Err("reacting without a reaction".into());
        }
        if let (Some(acc), Some((out, _))) = (self.accepted, &self.outstanding) {
            if acc != *out {
                return Err(format!("accepting {acc} while {out} is outstanding"));
            }
        }
        Ok(())
    }

    /// Runs one cycle and returns the bot's command for this tick.
    pub fn tick(&mut self, world: &WorldState) -> Command {
        let tick = world.tick;
        if self.memory.is_none() && self.config.prior_item_knowledge {
            self.memory = Some(Percept::prior_knowledge(world));
        }
        let percept = sense(world, self.memory.as_ref());
        if let Some(seen) = &percept.enemy_visible {
            if let Some(w) = self.arena.nearest_waypoint(seen.cell) {
                self.opponent.observe(w, tick);
            }
        }
        self.memory = Some(percept.clone());
        if let Some((w, _)) = self
            .arena
            .graph
            .waypoints()
            .find(|(_, c)| *c == percept.me.cell)
        {
            self.visited.insert(w.clone(), tick);
        }
        if !percept.me.is_alive() {
            return Command::Idle;
        }

        self.poll_planner(tick);

        let emergencies = detect_emergencies(&percept, &self.arena.rules);
        if self.mode != Mode::Reacting {
            if let Some(e) = most_urgent(&emergencies) {
                self.dispatch_preemption(tick, e, &percept);
            }
        }

        for _ in 0..MAX_STEPS_PER_TICK {
            match self.mode {
                Mode::PlanningHiding => {
                    // Attack needs an enemy position, so until the enemy has
                    // been seen every request would come back empty.
                    if self.expected_enemy(&percept).is_some() {
                        self.request_plan(tick, &percept);
                    }
                    return self.hide(&percept);
                }
                Mode::Reacting => {
                    let status = self.run_active(&percept, None);
                    match status {
                        ActionStatus::Command(c) => return c,
                        ActionStatus::Done | ActionStatus::Stuck => {
                            self.finish_active(tick);
                            self.mode = Mode::PlanningHiding;
                        }
                    }
                }
                Mode::Executing => {
                    if let Some(c) = self.execute_plan(tick, &percept) {
                        return c;
                    }
                }
            }
        }
        Command::Idle
    }

    /// One pass over the executing plan: validate, then advance. `None`
    /// means the caller should loop (an action finished without a command,
    /// or the plan was dropped).
    fn execute_plan(&mut self, tick: u64, percept: &Percept) -> Option<Command> {
        let plan = self.plan.as_ref().expect("executing with a plan");
        let validity = check_plan_valid(
            &plan.plan,
            &plan.assumptions,
            plan.step,
            self.active.is_some(),
            percept,
            &self.arena,
            &self.config.thresholds,
        );
        if let Validity::Invalid(a) = validity {
            self.events.push(Event::PlanInvalidated {
                tick,
                assumption: a.to_string(),
            });
            self.drop_plan();
            return None;
        }
        if self.active.is_none() {
            let action = plan.plan.get(plan.step).expect("step in range").clone();
            self.events.push(Event::ActionStarted {
                tick,
                action: action.to_string(),
            });
            self.active = Some(ActiveAction::new(action, Some(plan.step)));
        }
        let (expected, step) = (plan.enemy_expected, plan.step);
        match self.run_active(percept, expected) {
            ActionStatus::Command(c) => Some(c),
            ActionStatus::Done => {
                self.finish_active(tick);
                let plan = self.plan.as_mut().expect("executing with a plan");
                plan.step += 1;
                if plan.step == plan.plan.len() {
                    self.drop_plan();
                }
                None
            }
            ActionStatus::Stuck => {
                let action = self
                    .active
                    .as_ref()
                    .map(|a| a.action.to_string())
                    .unwrap_or_default();
                self.events.push(Event::PlanInvalidated {
                    tick,
                    assumption: format!("progress({action})@{step}"),
                });
                self.drop_plan();
                None
            }
        }
    }

    fn run_active(&mut self, percept: &Percept, enemy_expected: Option<Cell>) -> ActionStatus {
        let ctx = ActionContext {
            arena: &self.arena,
            percept,
            enemy_expected,
            stuck_factor: self.config.stuck_factor,
        };
        match self.active.as_mut() {
            Some(a) => a.tick(&ctx),
            None => ActionStatus::Done,
        }
    }

    fn finish_active(&mut self, tick: u64) {
        if let Some(a) = self.active.take() {
            self.events.push(Event::ActionDone {
                tick,
                action: a.action.to_string(),
            });
        }
    }

    fn drop_plan(&mut self) {
        self.plan = None;
        self.active = None;
        self.mode = Mode::PlanningHiding;
    }

    /// Reacts to `e`. With a plan, the reaction comes from its table at the
    /// current step and the rest of the plan is discarded. Without one, the
    /// same reaction policy is applied to the current fluents, and any
    /// request in flight is superseded since it was built from
    /// pre-emergency fluents.
    fn dispatch_preemption(&mut self, tick: u64, e: Emergency, percept: &Percept) {
        let (step, action) = match &self.plan {
            Some(p) => match p.table.get(p.step, e) {
                Some(a) => (Some(p.step), a.clone()),
                // No rule applies: the cycle resumes unchanged.
                None => return,
            },
            None => {
                let Some(action) = self.fallback_reaction(percept, e) else {
                    return;
                };
                self.accepted = None;
                (None, action)
            }
        };
        self.events.push(Event::PreemptionFired {
            tick,
            step,
            emergency: e,
            action: action.to_string(),
        });
        self.last_preemption = Some(PreemptionRecord {
            tick,
            step,
            emergency: e,
            action: action.clone(),
        });
        self.plan = None;
        self.active = None;
        self.mode = Mode::Reacting;
        self.events.push(Event::ActionStarted {
            tick,
            action: action.to_string(),
        });
        self.active = Some(ActiveAction::new(action, None));
    }

    /// The reaction policy evaluated on the current fluents; when those
    /// hold no enemy position, a plain escape. `None` when the policy asks
    /// to elude but there is nowhere farther from the enemy to go.
    fn fallback_reaction(&self, percept: &Percept, e: Emergency) -> Option<PlannedAction> {
        let policy = self.current_problem(percept).ok().and_then(|problem| {
            let semantics = Semantics::new(&problem);
            let state = semantics.initial()?;
            state.enemy_expected.as_ref()?;
            Some(semantics.reaction(&state, e))
        });
        match policy {
            Some(PlannedAction::Elude(_)) | None => {
                self.fallback_escape(percept).map(PlannedAction::Elude)
            }
            Some(action) => Some(action),
        }
    }

    /// Waypoint (this one or a graph neighbour) farthest from the enemy by
    /// walking distance, smallest id on ties. Only targets that put more
    /// ground between bot and enemy, and that the bot reaches before the
    /// enemy could, qualify; `None` when there is no such target.
    fn fallback_escape(&self, percept: &Percept) -> Option<WaypointId> {
        let map = &self.arena.map;
        let threat = percept
            .enemy_visible
            .as_ref()
            .or(percept.last_enemy_sighting.as_ref())?
            .cell;
        let from_enemy = distance_field(map, threat);
        let from_bot = distance_field(map, percept.me.cell);
        let at = |field: &[Option<u32>], c: Cell| field[map.index(c)];
        let floor = at(&from_enemy, percept.me.cell)?;
        let here = self.arena.nearest_waypoint(percept.me.cell)?;
        let mut best: Option<(u32, &WaypointId)> = None;
        for w in std::iter::once(here).chain(self.arena.graph.neighbors(here)) {
            let Some(cell) = self.arena.waypoint_cell(w) else {
                continue;
            };
            let (Some(de), Some(db)) = (at(&from_enemy, cell), at(&from_bot, cell)) else {
                continue;
            };
            let better = best.is_none_or(|(bd, bw)| de > bd || (de == bd && w < bw));
            if de > floor && de > db && better {
                best = Some((de, w));
            }
        }
        best.map(|(_, w)| w.clone())
    }

    fn poll_planner(&mut self, tick: u64) {
        while let Some(resp) = self.planner.poll(tick) {
            let Some((id, problem)) = self.outstanding.take_if(|(id, _)| *id == resp.id) else {
                log::warn!(
                    "response {} does not match the outstanding request",
                    resp.id
                );
                continue;
            };
            if self.accepted != Some(id) {
                log::debug!("discarding superseded plan {id}");
                continue;
            }
            self.accepted = None;
            match resp.result {
                Ok(found) => {
                    self.events.push(Event::PlanReady {
                        tick,
                        latency_ms: resp.latency_ms,
                        horizon: found.horizon,
                        plan: found.plan.actions().iter().map(|a| a.to_string()).collect(),
                    });
                    if self.mode != Mode::PlanningHiding {
                        continue;
                    }
                    let assumptions = derive_assumptions(&problem, &found.plan);
                    let enemy_expected = problem
                        .snapshot
                        .enemy_expected()
                        .and_then(|w| self.arena.waypoint_cell(w));
                    self.plan = Some(ActivePlan {
                        plan: found.plan,
                        table: found.preemption,
                        assumptions,
                        step: 0,
                        enemy_expected,
                    });
                    self.active = None;
                    self.mode = Mode::Executing;
                }
                Err(no) => {
                    let reason = no
                        .diagnostic
                        .unwrap_or_else(|| format!("no plan up to horizon {}", no.attempts.len()));
                    self.events.push(Event::PlanFailed {
                        tick,
                        latency_ms: resp.latency_ms,
                        reason,
                    });
                    self.backoff_until = tick + self.config.replan_backoff_ticks;
                }
            }
        }
    }

    /// A horizon-1 problem built from the current fluents.
    fn current_problem(&self, percept: &Percept) -> Result<PlanningProblem, EncodeError> {
        let snapshot = to_fluents(
            percept,
            &self.opponent,
            &self.arena,
            &self.config.thresholds,
        );
        let items = percept
            .items_seen
            .iter()
            .map(|i| KnownItem {
                id: i.id.clone(),
                waypoint: i.waypoint.clone(),
                kind: i.kind,
            })
            .collect();
        PlanningProblem::new(
            snapshot,
            self.arena.graph.clone(),
            items,
            1,
            percept.enemy_tier_estimate(),
        )
    }

    fn request_plan(&mut self, tick: u64, percept: &Percept) {
        if self.outstanding.is_some() || tick < self.backoff_until {
            return;
        }
        let problem = self.current_problem(percept);
        let problem = match problem {
            Ok(p) => p,
            Err(e) => {
                self.events.push(Event::PlanFailed {
                    tick,
                    latency_ms: 0.0,
                    reason: e.to_string(),
                });
                self.backoff_until = tick + self.config.replan_backoff_ticks;
                return;
            }
        };
        let id = self.next_request_id;
        self.next_request_id += 1;
        self.events.push(Event::PlanRequested {
            tick,
            horizon: self.config.horizon_max,
        });
        self.outstanding = Some((id, problem.clone()));
        self.accepted = Some(id);
        self.planner.submit(PlanRequest {
            id,
            tick,
            problem,
            n_max: self.config.horizon_max,
        });
    }

    /// Where the enemy is expected: the predicted next waypoint after its
    /// last sighting.
    fn expected_enemy(&self, percept: &Percept) -> Option<&WaypointId> {
        let seen = percept.last_enemy_sighting.as_ref()?;
        let w = self.arena.nearest_waypoint(seen.cell)?;
        let predicted = self.opponent.predict_next(w);
        self.arena.graph.ids().find(|id| **id == predicted)
    }

    /// The waypoint to hide at: out of sight of the expected enemy position
    /// and as many hops from it as possible, smallest id on ties. If every
    /// waypoint is in sight, the farthest one.
    pub fn hide_target(&self, percept: &Percept) -> Option<WaypointId> {
        let threat = self.expected_enemy(percept)?;
        let threat_cell = self.arena.waypoint_cell(threat)?;
        let dist = self.arena.graph.hop_distances(threat);
        let pick = |hidden_only: bool| {
            let mut best: Option<(u32, &WaypointId)> = None;
            for (w, cell) in self.arena.graph.waypoints() {
                if hidden_only && line_of_sight(&self.arena.map, cell, threat_cell) {
                    continue;
                }
                let d = dist.get(w).copied().unwrap_or(0);
                if best.is_none_or(|(bd, _)| d > bd) {
                    best = Some((d, w));
                }
            }
            best.map(|(_, w)| w.clone())
        };
        pick(true).or_else(|| pick(false))
    }

    /// With no idea where the enemy is, tour the waypoints: head for the
    /// one visited longest ago (never-visited first), smallest id on ties.
    pub fn scout_target(&self) -> Option<WaypointId> {
        self.arena
            .graph
            .ids()
            .min_by_key(|w| (self.visited.get(*w).map_or(0, |t| t + 1), *w))
            .cloned()
    }

    /// Hides from the expected enemy; scouts when there is none, since no
    /// plan can be found until the enemy has been seen.
    fn hide(&self, percept: &Percept) -> Command {
        let target = match self.expected_enemy(percept) {
            Some(_) => self.hide_target(percept),
            None => self.scout_target(),
        };
        let Some(target) = target.and_then(|w| self.arena.waypoint_cell(&w)) else {
            return Command::Idle;
        };
        match shortest_path(&self.arena.map, percept.me.cell, target) {
            Ok(path) if path.len() > 1 => {
                Direction::towards(path[0], path[1]).map_or(Command::Idle, Command::MoveStep)
            }
            _ => Command::Idle,
        }
    }

    /// Emergencies in the current percept, for display.
    pub fn emergencies(&self) -> BTreeSet<Emergency> {
        self.memory
            .as_ref()
            .map(|p| detect_emergencies(p, &self.arena.rules))
            .unwrap_or_default()
    }
}
