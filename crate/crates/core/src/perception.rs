//! Sensing from the bot's viewpoint and translation into planner fluents.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arena::{AgentState, Arena, Cell, Direction, ItemId, ItemKind, WaypointId, WorldState};
use crate::opponent::OpponentModel;

/// Enemy observation with the tick it was made.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnemySighting {
    pub cell: Cell,
    pub facing: Direction,
    pub tier: u8,
    pub tick: u64,
}

/// A remembered item. `seen_at` is the last tick it was in line of sight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemMemory {
    pub id: ItemId,
    pub kind: ItemKind,
    pub waypoint: WaypointId,
    pub available: bool,
    pub seen_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Percept {
    pub tick: u64,
    /// The bot's own state, always exact.
    pub me: AgentState,
    /// Present iff the enemy is in line of sight this tick.
    pub enemy_visible: Option<EnemySighting>,
    /// Most recent sighting, possibly from an earlier tick.
    pub last_enemy_sighting: Option<EnemySighting>,
    /// Sorted by item id.
    pub items_seen: Vec<ItemMemory>,
    pub damage_taken_this_tick: u32,
}

impl Percept {
    /// Memory holding map knowledge only: every item at its declared
    /// waypoint, as the world currently has it.
    pub fn prior_knowledge(world: &WorldState) -> Percept {
        let mut items_seen: Vec<ItemMemory> = world
            .items
            .iter()
            .map(|i| ItemMemory {
                id: i.id.clone(),
                kind: i.kind,
                waypoint: i.waypoint.clone(),
                available: i.available,
                seen_at: world.tick,
            })
            .collect();
        items_seen.sort_by(|a, b| a.id.cmp(&b.id));
        Percept {
            tick: world.tick,
            me: world.bot.clone(),
            enemy_visible: None,
            last_enemy_sighting: None,
            items_seen,
            damage_taken_this_tick: 0,
        }
    }

    pub fn item(&self, id: &ItemId) -> Option<&ItemMemory> {
        self.items_seen.iter().find(|i| &i.id == id)
    }

    pub fn staleness(&self, item: &ItemMemory) -> u64 {
        self.tick.saturating_sub(item.seen_at)
    }

    /// Tier of the enemy's weapon at the last sighting; 1 (spawn weapon) if never seen.
    pub fn enemy_tier_estimate(&self) -> u8 {
        self.last_enemy_sighting.as_ref().map_or(1, |s| s.tier)
    }
}

/// Reads the world from the bot's viewpoint. Never mutates the world.
pub fn sense(world: &WorldState, memory: Option<&Percept>) -> Percept {
    let me = world.bot.clone();
    let damage = memory.map_or(0, |m| m.me.health.saturating_sub(me.health));

    let enemy_visible =
        (world.enemy.is_alive() && world.los(me.cell, world.enemy.cell)).then_some(EnemySighting {
            cell: world.enemy.cell,
            facing: world.enemy.facing,
            tier: world.enemy.armed_tier,
            tick: world.tick,
        });
    let last_enemy_sighting = enemy_visible
        .clone()
        .or_else(|| memory.and_then(|m| m.last_enemy_sighting.clone()));

    let mut items_seen: Vec<ItemMemory> = Vec::new();
    for item in &world.items {
        let Some(cell) = world.arena.waypoint_cell(&item.waypoint) else {
            continue;
        };
        if world.los(me.cell, cell) {
            items_seen.push(ItemMemory {
                id: item.id.clone(),
                kind: item.kind,
                waypoint: item.waypoint.clone(),
                available: item.available,
                seen_at: world.tick,
            });
        } else if let Some(old) = memory.and_then(|m| m.item(&item.id)) {
            items_seen.push(old.clone());
        }
    }
    items_seen.sort_by(|a, b| a.id.cmp(&b.id));

    Percept {
        tick: world.tick,
        me,
        enemy_visible,
        last_enemy_sighting,
        items_seen,
        damage_taken_this_tick: damage,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HealthLevel {
    Low,
    Medium,
    High,
}

impl HealthLevel {
    /// One band up; `High` stays `High`.
    pub fn raised(self) -> HealthLevel {
        match self {
            HealthLevel::Low => HealthLevel::Medium,
            HealthLevel::Medium | HealthLevel::High => HealthLevel::High,
        }
    }

    pub const ALL: [HealthLevel; 3] = [HealthLevel::Low, HealthLevel::Medium, HealthLevel::High];
}

impl fmt::Display for HealthLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HealthLevel::Low => "low",
            HealthLevel::Medium => "medium",
            HealthLevel::High => "high",
        })
    }
}

/// Upper bounds (inclusive) of the low and medium health bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HealthThresholds {
    pub low_max: u32,
    pub medium_max: u32,
}

impl Default for HealthThresholds {
    fn default() -> Self {
        HealthThresholds {
            low_max: 30,
            medium_max: 70,
        }
    }
}

impl HealthThresholds {
    pub fn level(&self, health: u32) -> HealthLevel {
        if health <= self.low_max {
            HealthLevel::Low
        } else if health <= self.medium_max {
            HealthLevel::Medium
        } else {
            HealthLevel::High
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fluent {
    At(WaypointId),
    HealthLevel(HealthLevel),
    Armed(u8),
    AmmoOk,
    ItemAvailable(ItemId, WaypointId, ItemKind),
    EnemyLastSeen(WaypointId),
    EnemyExpected(WaypointId),
}

/// Renders as a logic-program term, e.g. `item_available(h1,w1,health)`.
impl fmt::Display for Fluent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fluent::At(w) => write!(f, "at({w})"),
            Fluent::HealthLevel(l) => write!(f, "health_level({l})"),
            Fluent::Armed(t) => write!(f, "armed({t})"),
            Fluent::AmmoOk => f.write_str("ammo_ok"),
            Fluent::ItemAvailable(i, w, k) => write!(f, "item_available({i},{w},{k})"),
            Fluent::EnemyLastSeen(w) => write!(f, "enemy_last_seen({w})"),
            Fluent::EnemyExpected(w) => write!(f, "enemy_expected({w})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluentSnapshot {
    pub tick: u64,
    pub fluents: BTreeSet<Fluent>,
}

impl FluentSnapshot {
    pub fn at(&self) -> Option<&WaypointId> {
        self.fluents.iter().find_map(|f| match f {
            Fluent::At(w) => Some(w),
            _ => None,
        })
    }

    pub fn health_level(&self) -> Option<HealthLevel> {
        self.fluents.iter().find_map(|f| match f {
            Fluent::HealthLevel(l) => Some(*l),
            _ => None,
        })
    }

    pub fn armed(&self) -> Option<u8> {
        self.fluents.iter().find_map(|f| match f {
            Fluent::Armed(t) => Some(*t),
            _ => None,
        })
    }

    pub fn ammo_ok(&self) -> bool {
        self.fluents.contains(&Fluent::AmmoOk)
    }

    pub fn enemy_expected(&self) -> Option<&WaypointId> {
        self.fluents.iter().find_map(|f| match f {
            Fluent::EnemyExpected(w) => Some(w),
            _ => None,
        })
    }

    pub fn enemy_last_seen(&self) -> Option<&WaypointId> {
        self.fluents.iter().find_map(|f| match f {
            Fluent::EnemyLastSeen(w) => Some(w),
            _ => None,
        })
    }

    pub fn available_items(&self) -> impl Iterator<Item = (&ItemId, &WaypointId, ItemKind)> {
        self.fluents.iter().filter_map(|f| match f {
            Fluent::ItemAvailable(i, w, k) => Some((i, w, *k)),
            _ => None,
        })
    }

    /// Checks the cardinality constraints: exactly one position, health level
    /// and weapon tier; at most one last-seen and one expected enemy position.
    pub fn check(&self) -> Result<(), String> {
        let count = |p: fn(&Fluent) -> bool| self.fluents.iter().filter(|f| p(f)).count();
        let checks = [
            ("at", count(|f| matches!(f, Fluent::At(_))), 1..=1),
            (
                "health_level",
                count(|f| matches!(f, Fluent::HealthLevel(_))),
                1..=1,
            ),
            ("armed", count(|f| matches!(f, Fluent::Armed(_))), 1..=1),
            (
                "enemy_last_seen",
                count(|f| matches!(f, Fluent::EnemyLastSeen(_))),
                0..=1,
            ),
            (
                "enemy_expected",
                count(|f| matches!(f, Fluent::EnemyExpected(_))),
                0..=1,
            ),
        ];
        for (name, n, range) in checks {
            if !range.contains(&n) {
                return Err(format!("{n} `{name}` fluents"));
            }
        }
        if self.armed().is_some_and(|t| t > 3) {
            return Err("armed tier above 3".into());
        }
        Ok(())
    }
}

/// Translates a percept into the planner's fluent vocabulary.
pub fn to_fluents(
    p: &Percept,
    opp: &OpponentModel,
    arena: &Arena,
    thresholds: &HealthThresholds,
) -> FluentSnapshot {
    let mut fluents = BTreeSet::new();
    if let Some(w) = arena.nearest_waypoint(p.me.cell) {
        fluents.insert(Fluent::At(w.clone()));
    }
    fluents.insert(Fluent::HealthLevel(thresholds.level(p.me.health)));
    fluents.insert(Fluent::Armed(p.me.armed_tier));
    if p.me.ammo_ok {
        fluents.insert(Fluent::AmmoOk);
    }
    for item in p.items_seen.iter().filter(|i| i.available) {
        fluents.insert(Fluent::ItemAvailable(
            item.id.clone(),
            item.waypoint.clone(),
            item.kind,
        ));
    }
    if let Some(sighting) = &p.last_enemy_sighting {
        if let Some(w) = arena.nearest_waypoint(sighting.cell) {
            fluents.insert(Fluent::EnemyExpected(opp.predict_next(w)));
            fluents.insert(Fluent::EnemyLastSeen(w.clone()));
        }
    }
    FluentSnapshot {
        tick: p.tick,
        fluents,
    }
}
