use serde::{Deserialize, Serialize};

use crate::arena::{shortest_path, Arena, Cell, Command, Direction};
use crate::encoder::PlannedAction;
use crate::perception::Percept;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionStatus {
    /// Still running; issue this command.
    Command(Command),
    /// The action's goal holds. No command was issued for this tick.
    Done,
    /// The movement budget ran out or the goal is unreachable.
    Stuck,
}

/// A planned or reactive action being carried out over several ticks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveAction {
    pub action: PlannedAction,
    /// Plan step, or `None` for a reaction.
    pub step: Option<usize>,
    goal: Option<Cell>,
    /// Cells still to enter, in order.
    path: Vec<Cell>,
    moves: u32,
    budget: u32,
}

/// What an action may look at besides its own state.
pub struct ActionContext<'a> {
    pub arena: &'a Arena,
    pub percept: &'a Percept,
    /// Where the planner expected the enemy, if anywhere.
    pub enemy_expected: Option<Cell>,
    /// Ticks of movement allowed per cell of the initial path.
    pub stuck_factor: u32,
}

impl ActiveAction {
    pub fn new(action: PlannedAction, step: Option<usize>) -> Self {
        ActiveAction {
            action,
            step,
            goal: None,
            path: Vec::new(),
            moves: 0,
            budget: 0,
        }
    }

    /// Cells still to enter on the current route.
    pub fn path(&self) -> &[Cell] {
        &self.path
    }

    fn target(&self, ctx: &ActionContext<'_>) -> Option<Cell> {
        match &self.action {
            PlannedAction::MoveTowards(w) | PlannedAction::Elude(w) => ctx.arena.waypoint_cell(w),
            PlannedAction::PickAmmo(i) | PlannedAction::PickHealth(i) => {
                let item = ctx.percept.item(i)?;
                ctx.arena.waypoint_cell(&item.waypoint)
            }
            PlannedAction::Attack => None,
        }
    }

    /// One move along the stored route to `goal`, re-routing when the goal
    /// changed or the bot is off the route (e.g. the last move was blocked).
    fn step_towards(&mut self, goal: Cell, ctx: &ActionContext<'_>) -> ActionStatus {
        let here = ctx.percept.me.cell;
        let on_route = self
            .path
            .first()
            .is_some_and(|next| here.manhattan(*next) == 1);
        if self.goal != Some(goal) || !on_route {
            let Ok(route) = shortest_path(&ctx.arena.map, here, goal) else {
                return ActionStatus::Stuck;
            };
            if self.goal != Some(goal) {
                let len = u32::try_from(route.len() - 1).unwrap_or(u32::MAX).max(1);
                self.budget = self
                    .moves
                    .saturating_add(ctx.stuck_factor.saturating_mul(len));
                self.goal = Some(goal);
            }
            self.path = route[1..].to_vec();
        }
        if self.moves >= self.budget {
            return ActionStatus::Stuck;
        }
        let Some(next) = (!self.path.is_empty()).then(|| self.path.remove(0)) else {
            return ActionStatus::Done;
        };
        match Direction::towards(here, next) {
            Some(d) => {
                self.moves += 1;
                ActionStatus::Command(Command::MoveStep(d))
            }
            None => ActionStatus::Stuck,
        }
    }

    /// Built-in combat: fire while the enemy is visible and in range,
    /// close in when it is visible but far, otherwise search its last
    /// known (or expected) position. Done once that position is reached
    /// without contact.
    fn attack_tick(&mut self, ctx: &ActionContext<'_>) -> ActionStatus {
        let me = &ctx.percept.me;
        if let Some(enemy) = &ctx.percept.enemy_visible {
            if me.cell.manhattan(enemy.cell) <= ctx.arena.rules.combat_range {
                return ActionStatus::Command(Command::Fire);
            }
            return self.step_towards(enemy.cell, ctx);
        }
        let search = self
            .goal
            .or(ctx.enemy_expected)
            .or_else(|| ctx.percept.last_enemy_sighting.as_ref().map(|s| s.cell));
        match search {
            Some(cell) if cell != me.cell => self.step_towards(cell, ctx),
            _ => ActionStatus::Done,
        }
    }

    /// Advances the action by one tick.
    pub fn tick(&mut self, ctx: &ActionContext<'_>) -> ActionStatus {
        if self.action.is_attack() {
            return self.attack_tick(ctx);
        }
        let Some(goal) = self.target(ctx) else {
            return ActionStatus::Stuck;
        };
        if ctx.percept.me.cell == goal {
            return ActionStatus::Done;
        }
        self.step_towards(goal, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{load_map, step, ArenaRules, ItemId, WaypointId, WorldState};
    use crate::perception::sense;

    const T1: &str = "\
#####
#...#
#.#.#
#...#
#####
waypoints: w0 1 1 ; w1 3 1 ; w2 3 3
edges: w0 w1 ; w1 w2
items: h1 health w1
spawn: bot w0 ; enemy w2
";

    fn world() -> WorldState {
        WorldState::new(&load_map(T1).unwrap(), ArenaRules::default(), 0)
    }

    /// Runs `action` against an idle enemy until it finishes.
    fn run(
        mut world: WorldState,
        action: PlannedAction,
        limit: usize,
    ) -> (Vec<Command>, ActionStatus, WorldState) {
        let mut a = ActiveAction::new(action, Some(0));
        let mut cmds = Vec::new();
        let mut memory = Percept::prior_knowledge(&world);
        for _ in 0..limit {
            let p = sense(&world, Some(&memory));
            let ctx = ActionContext {
                arena: &world.arena,
                percept: &p,
                enemy_expected: None,
                stuck_factor: 3,
            };
            match a.tick(&ctx) {
                ActionStatus::Command(c) => {
                    cmds.push(c);
                    world = step(&world, c, Command::Idle);
                }
                other => return (cmds, other, world),
            }
            memory = p;
        }
        (cmds, ActionStatus::Stuck, world)
    }

    #[test]
    fn move_takes_one_tick_per_cell() {
        let mut w = world();
        w.enemy.cell = Cell::new(1, 3);
        // w0 (1,1) to w2 (3,3) is four cells.
        let (cmds, status, end) = run(
            w,
            PlannedAction::MoveTowards(WaypointId::new("w2").unwrap()),
            20,
        );
        assert_eq!(status, ActionStatus::Done);
        assert_eq!(cmds.len(), 4);
        assert!(cmds.iter().all(|c| matches!(c, Command::MoveStep(_))));
        assert_eq!(end.bot.cell, Cell::new(3, 3));
    }

    #[test]
    fn pick_at_current_waypoint_is_immediate() {
        let mut w = world();
        w.bot.cell = Cell::new(3, 1);
        let (cmds, status, _) = run(w, PlannedAction::PickHealth(ItemId::new("h1").unwrap()), 5);
        assert!(cmds.is_empty());
        assert_eq!(status, ActionStatus::Done);
    }

    #[test]
    fn attack_fires_every_tick_in_range() {
        let mut w = world();
        w.bot.cell = Cell::new(3, 1);
        w.enemy.cell = Cell::new(3, 3);
        let (cmds, _, end) = run(w, PlannedAction::Attack, 5);
        assert_eq!(cmds, vec![Command::Fire; 5]);
        assert_eq!(end.enemy.health, 50);
    }

    #[test]
    fn blocked_route_gets_stuck() {
        let mut w = world();
        // The idle enemy sits on the shortest route and never moves away.
        w.bot.cell = Cell::new(1, 1);
        w.enemy.cell = Cell::new(2, 1);
        let (cmds, status, _) = run(
            w,
            PlannedAction::MoveTowards(WaypointId::new("w1").unwrap()),
            50,
        );
        assert_eq!(status, ActionStatus::Stuck);
        assert!(cmds.len() <= 6, "{cmds:?}");
    }
}
