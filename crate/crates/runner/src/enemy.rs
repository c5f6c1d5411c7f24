//! Enemy controllers: scripted policies and the human input slot.

use std::collections::BTreeSet;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use qsmodels_core::arena::{
    shortest_path, Arena, Cell, Command, Direction, WaypointId, WorldState,
};

use crate::config::EnemyKind;

/// Chooses the enemy's command each tick. `rng` is the world's generator.
pub trait EnemyController: Send {
    fn command(&mut self, world: &WorldState, rng: &mut ChaCha8Rng) -> Command;
}

impl<F> EnemyController for F
where
    F: FnMut(&WorldState, &mut ChaCha8Rng) -> Command + Send,
{
    fn command(&mut self, world: &WorldState, rng: &mut ChaCha8Rng) -> Command {
        self(world, rng)
    }
}

fn step_towards(arena: &Arena, from: Cell, to: Cell) -> Command {
    match shortest_path(&arena.map, from, to) {
        Ok(path) if path.len() > 1 => {
            Direction::towards(path[0], path[1]).map_or(Command::Idle, Command::MoveStep)
        }
        _ => Command::Idle,
    }
}

/// Depth-first tour of the waypoint graph from `start` (neighbours in id
/// order), listing a waypoint each time the walk passes through it. The
/// closing return to `start` is left implicit, so the route is a cycle.
pub fn default_patrol_route(arena: &Arena, start: &WaypointId) -> Vec<WaypointId> {
    fn walk(
        arena: &Arena,
        w: &WaypointId,
        seen: &mut BTreeSet<WaypointId>,
        out: &mut Vec<WaypointId>,
    ) {
        seen.insert(w.clone());
        out.push(w.clone());
        for n in arena.graph.neighbors(w) {
            if !seen.contains(n) {
                walk(arena, n, seen, out);
                out.push(w.clone());
            }
        }
    }
    let mut out = Vec::new();
    walk(arena, start, &mut BTreeSet::new(), &mut out);
    if out.len() > 1 {
        out.pop();
    }
    out
}

/// Walks a fixed waypoint loop forever, never shooting.
pub struct Patrol {
    route: Vec<WaypointId>,
    next: usize,
}

impl Patrol {
    pub fn new(route: Vec<WaypointId>) -> Self {
        Patrol { route, next: 0 }
    }

    pub fn route(&self) -> &[WaypointId] {
        &self.route
    }
}

impl EnemyController for Patrol {
    fn command(&mut self, world: &WorldState, _: &mut ChaCha8Rng) -> Command {
        let here = world.enemy.cell;
        for _ in 0..self.route.len() {
            let Some(target) = world.arena.waypoint_cell(&self.route[self.next]) else {
                return Command::Idle;
            };
            if target != here {
                return step_towards(&world.arena, here, target);
            }
            self.next = (self.next + 1) % self.route.len();
        }
        Command::Idle
    }
}

/// Hunts the bot: fires whenever a shot would land, otherwise closes in.
pub struct Aggressive;

impl EnemyController for Aggressive {
    fn command(&mut self, world: &WorldState, _: &mut ChaCha8Rng) -> Command {
        let (me, bot) = (&world.enemy, &world.bot);
        if me.ammo_ok
            && me.cell.manhattan(bot.cell) <= world.arena.rules.combat_range
            && world.los(me.cell, bot.cell)
        {
            Command::Fire
        } else {
            step_towards(&world.arena, me.cell, bot.cell)
        }
    }
}

/// Uniformly random legal move (into floor not held by the bot); idles
/// when boxed in.
pub struct RandomWalk;

impl EnemyController for RandomWalk {
    fn command(&mut self, world: &WorldState, rng: &mut ChaCha8Rng) -> Command {
        let moves: Vec<Direction> = world
            .arena
            .map
            .neighbors(world.enemy.cell)
            .filter(|(_, c)| *c != world.bot.cell)
            .map(|(d, _)| d)
            .collect();
        if moves.is_empty() {
            Command::Idle
        } else {
            Command::MoveStep(moves[rng.random_range(0..moves.len())])
        }
    }
}

/// Stands still.
pub struct Stationary;

impl EnemyController for Stationary {
    fn command(&mut self, _: &WorldState, _: &mut ChaCha8Rng) -> Command {
        Command::Idle
    }
}

/// Latest key set from the human player, shared with the network session.
#[derive(Debug, Default)]
pub struct HumanInput {
    pub keys: Option<Vec<String>>,
    pub connected: bool,
}

/// Maps held keys to a command. Fire wins over movement, movement over
/// turning; among arrows the first listed wins. Unknown keys are ignored.
pub fn keys_to_command(keys: &[String], facing: Direction) -> Command {
    let has = |names: &[&str]| keys.iter().any(|k| names.contains(&k.as_str()));
    if has(&[" ", "Space", "Spacebar"]) {
        return Command::Fire;
    }
    let arrow = keys.iter().find_map(|k| match k.as_str() {
        "ArrowUp" => Some(Direction::N),
        "ArrowRight" => Some(Direction::E),
        "ArrowDown" => Some(Direction::S),
        "ArrowLeft" => Some(Direction::W),
        _ => None,
    });
    if let Some(d) = arrow {
        return Command::MoveStep(d);
    }
    if has(&["q", "Q"]) {
        return Command::Turn(facing.turn_left());
    }
    if has(&["e", "E"]) {
        return Command::Turn(facing.turn_right());
    }
    Command::Idle
}

/// Applies the most recent input once, on the next tick; idles when no
/// input arrived or the player is gone.
pub struct Human {
    input: Arc<Mutex<HumanInput>>,
}

impl Human {
    pub fn new(input: Arc<Mutex<HumanInput>>) -> Self {
        Human { input }
    }
}

impl EnemyController for Human {
    fn command(&mut self, world: &WorldState, _: &mut ChaCha8Rng) -> Command {
        let mut input = self.input.lock().unwrap_or_else(|e| e.into_inner());
        match input.keys.take() {
            Some(keys) if input.connected => keys_to_command(&keys, world.enemy.facing),
            _ => Command::Idle,
        }
    }
}

/// Builds the scripted controller for `kind`, or `None` for a human.
pub fn scripted(kind: EnemyKind, world: &WorldState) -> Option<Box<dyn EnemyController>> {
    Some(match kind {
        EnemyKind::Patrol => {
            let start = world.arena.nearest_waypoint(world.enemy.cell)?.clone();
            Box::new(Patrol::new(default_patrol_route(&world.arena, &start)))
        }
        EnemyKind::Aggressive => Box::new(Aggressive),
        EnemyKind::Random => Box::new(RandomWalk),
        EnemyKind::Stationary => Box::new(Stationary),
        EnemyKind::Human => return None,
    })
}
