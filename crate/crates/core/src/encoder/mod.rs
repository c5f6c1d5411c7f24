//! Codec between the symbolic world view and an answer-set solver.
//!
//! [`encode`] emits a bounded-horizon planning program whose answer sets
//! are exactly the plans of the given length ending in `attack`, together
//! with one reaction rule per (step, emergency) pair. [`decode_plan`] and
//! [`decode_preemption`] read a model back.
//!
//! Action semantics (one planner step each):
//!
//! | action            | precondition                                                        | effect                         |
//! |-------------------|---------------------------------------------------------------------|--------------------------------|
//! | `move_towards(w)` | edge(at, w)                                                         | at(w)                          |
//! | `pick_health(i)`  | at(w), item_available(i, w, health)                                 | health level +1 band, i gone   |
//! | `pick_ammo(i)`    | at(w), item_available(i, w, k), k ∈ {ammo, weapon(t)}                | ammo_ok, armed := max(armed, t), i gone |
//! | `elude(w)`        | edge(at, w), enemy_expected(e), dist(w, e) > dist(at, e)            | at(w)                          |
//! | `attack`          | enemy_expected(e), at = e or edge(at, e), health ≥ medium, armed ≥ max(1, enemy tier), ammo_ok | none |
//!
//! Reaction policy, evaluated on the planned state at each step:
//! `under_attack` eludes when health is low and attacks otherwise;
//! `facing_enemy` attacks when health ≥ medium and armed ≥ enemy tier,
//! otherwise eludes; `behind_enemy` always attacks. The elude target is the
//! neighbour farthest (in hops) from the expected enemy position, smallest
//! id on ties.

mod decode;
mod program;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arena::{ItemId, ItemKind, WaypointGraph, WaypointId};
use crate::perception::{Fluent, FluentSnapshot};
use crate::solver::term::Term;

pub use decode::{decode_plan, decode_preemption, MalformedAnswerSet};
pub use program::{encode, LogicProgramText};

/// Default upper bound on the planning horizon.
pub const DEFAULT_MAX_HORIZON: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Emergency {
    UnderAttack,
    FacingEnemy,
    BehindEnemy,
}

impl Emergency {
    /// Emission order of the reaction grid.
    pub const ALL: [Emergency; 3] = [
        Emergency::UnderAttack,
        Emergency::FacingEnemy,
        Emergency::BehindEnemy,
    ];

    /// Dispatch priority; lower is more urgent.
    pub fn priority(self) -> u8 {
        match self {
            Emergency::UnderAttack => 0,
            Emergency::BehindEnemy => 1,
            Emergency::FacingEnemy => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Emergency::UnderAttack => "under_attack",
            Emergency::FacingEnemy => "facing_enemy",
            Emergency::BehindEnemy => "behind_enemy",
        }
    }

    pub fn from_name(s: &str) -> Option<Emergency> {
        Emergency::ALL.into_iter().find(|e| e.as_str() == s)
    }
}

impl fmt::Display for Emergency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// High-level action. Variant order matches the oracle's expansion order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannedAction {
    Attack,
    Elude(WaypointId),
    MoveTowards(WaypointId),
    PickAmmo(ItemId),
    PickHealth(ItemId),
}

impl PlannedAction {
    pub fn to_term(&self) -> Term {
        let unary = |name: &str, arg: &str| Term::func(name, vec![Term::constant(arg)]);
        match self {
            PlannedAction::Attack => Term::constant("attack"),
            PlannedAction::Elude(w) => unary("elude", w.as_str()),
            PlannedAction::MoveTowards(w) => unary("move_towards", w.as_str()),
            PlannedAction::PickAmmo(i) => unary("pick_ammo", i.as_str()),
            PlannedAction::PickHealth(i) => unary("pick_health", i.as_str()),
        }
    }

    pub fn from_term(t: &Term) -> Option<PlannedAction> {
        let (name, args) = t.as_func()?;
        let arg = || args.first().and_then(Term::as_const);
        match (name, args.len()) {
            ("attack", 0) => Some(PlannedAction::Attack),
            ("elude", 1) => WaypointId::new(arg()?).map(PlannedAction::Elude),
            ("move_towards", 1) => WaypointId::new(arg()?).map(PlannedAction::MoveTowards),
            ("pick_ammo", 1) => ItemId::new(arg()?).map(PlannedAction::PickAmmo),
            ("pick_health", 1) => ItemId::new(arg()?).map(PlannedAction::PickHealth),
            _ => None,
        }
    }

    pub fn is_attack(&self) -> bool {
        matches!(self, PlannedAction::Attack)
    }
}

impl fmt::Display for PlannedAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// An item the bot knows about, available or not.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KnownItem {
    pub id: ItemId,
    pub waypoint: WaypointId,
    pub kind: ItemKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("horizon {0} outside 1..={1}")]
    Horizon(usize, usize),
    #[error("invalid snapshot: {0}")]
    Snapshot(String),
    #[error("unknown waypoint `{0}`")]
    UnknownWaypoint(WaypointId),
    #[error("unknown item `{0}`")]
    UnknownItem(ItemId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanningProblem {
    pub snapshot: FluentSnapshot,
    pub graph: WaypointGraph,
    /// Sorted by id.
    pub items: Vec<KnownItem>,
    /// Number of action steps; actions at 0..horizon, states at 0..=horizon.
    pub horizon: usize,
    pub max_horizon: usize,
    pub enemy_tier_estimate: u8,
    pub emergencies: Vec<Emergency>,
}

impl PlanningProblem {
    pub fn new(
        snapshot: FluentSnapshot,
        graph: WaypointGraph,
        mut items: Vec<KnownItem>,
        horizon: usize,
        enemy_tier_estimate: u8,
    ) -> Result<Self, EncodeError> {
        items.sort();
        items.dedup();
        let p = PlanningProblem {
            snapshot,
            graph,
            items,
            horizon,
            max_horizon: DEFAULT_MAX_HORIZON,
            enemy_tier_estimate: enemy_tier_estimate.min(3),
            emergencies: Emergency::ALL.to_vec(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_horizon(&self, horizon: usize) -> Result<Self, EncodeError> {
        let p = PlanningProblem {
            horizon,
            ..self.clone()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_max_horizon(mut self, max: usize) -> Result<Self, EncodeError> {
        self.max_horizon = max;
        self.validate()?;
        Ok(self)
    }

    /// Minimum tier needed to attack.
    pub fn attack_tier(&self) -> u8 {
        self.enemy_tier_estimate.max(1)
    }

    pub fn item(&self, id: &ItemId) -> Option<&KnownItem> {
        self.items.iter().find(|i| &i.id == id)
    }

    pub fn validate(&self) -> Result<(), EncodeError> {
        if self.horizon == 0 || self.horizon > self.max_horizon {
            return Err(EncodeError::Horizon(self.horizon, self.max_horizon));
        }
        self.snapshot.check().map_err(EncodeError::Snapshot)?;
        let known_wp = |w: &WaypointId| {
            if self.graph.contains(w) {
                Ok(())
            } else {
                Err(EncodeError::UnknownWaypoint(w.clone()))
            }
        };
        for item in &self.items {
            known_wp(&item.waypoint)?;
        }
        for f in &self.snapshot.fluents {
            match f {
                Fluent::At(w) | Fluent::EnemyExpected(w) | Fluent::EnemyLastSeen(w) => known_wp(w)?,
                Fluent::ItemAvailable(i, w, k) => {
                    known_wp(w)?;
                    match self.item(i) {
                        Some(it) if it.waypoint == *w && it.kind == *k => {}
                        _ => return Err(EncodeError::UnknownItem(i.clone())),
                    }
                }
                Fluent::HealthLevel(_) | Fluent::Armed(_) | Fluent::AmmoOk => {}
            }
        }
        Ok(())
    }
}

/// Timed action sequence; `steps[t]` is the action at step `t` and the
/// last one is always `attack`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    steps: Vec<PlannedAction>,
}

impl Plan {
    pub fn new(steps: Vec<PlannedAction>) -> Result<Self, MalformedAnswerSet> {
        match steps.last() {
            None => Err(MalformedAnswerSet::Empty),
            Some(a) if !a.is_attack() => Err(MalformedAnswerSet::NotAttackLast(a.clone())),
            Some(_) => Ok(Plan { steps }),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn get(&self, t: usize) -> Option<&PlannedAction> {
        self.steps.get(t)
    }

    pub fn actions(&self) -> &[PlannedAction] {
        &self.steps
    }

    pub fn steps(&self) -> impl Iterator<Item = (usize, &PlannedAction)> {
        self.steps.iter().enumerate()
    }
}

/// Reaction for every (step, emergency) pair of a plan's horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreemptionTable {
    horizon: usize,
    entries: BTreeMap<(usize, Emergency), PlannedAction>,
}

impl PreemptionTable {
    /// Fails unless `entries` covers exactly `0..horizon × emergencies`.
    pub fn new(
        horizon: usize,
        emergencies: &[Emergency],
        entries: BTreeMap<(usize, Emergency), PlannedAction>,
    ) -> Result<Self, MalformedAnswerSet> {
        for t in 0..horizon {
            for &e in emergencies {
                if !entries.contains_key(&(t, e)) {
                    return Err(MalformedAnswerSet::MissingReaction(t, e));
                }
            }
        }
        if let Some(&(t, e)) = entries
            .keys()
            .find(|(t, e)| *t >= horizon || !emergencies.contains(e))
        {
            return Err(MalformedAnswerSet::StrayReaction(t, e));
        }
        Ok(PreemptionTable { horizon, entries })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, step: usize, e: Emergency) -> Option<&PlannedAction> {
        self.entries.get(&(step, e))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, Emergency), &PlannedAction)> {
        self.entries.iter()
    }
}
