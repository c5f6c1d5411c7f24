use rand::Rng;

use super::{AgentState, Command, ItemKind, WorldState, MAX_HEALTH};

/// Advances the world by one tick.
///
/// Resolution order: respawn countdowns, turns, shots (resolved
/// simultaneously from pre-move positions), moves, pickups. A move is
/// dropped if the target is a wall or the other agent's cell. Moving also
/// turns the agent to face the move direction. If both agents target the
/// same free cell, a coin flip from the world's generator picks who gets
/// it, so neither can block the other forever. Dead agents do nothing.
pub fn step(world: &WorldState, bot_cmd: Command, enemy_cmd: Command) -> WorldState {
    let mut next = world.clone();
    next.tick += 1;
    let arena = world.arena.clone();
    let rules = &arena.rules;

    for item in next.items.iter_mut().filter(|i| !i.available) {
        item.respawn_remaining = item.respawn_remaining.saturating_sub(1);
        if item.respawn_remaining == 0 {
            item.available = true;
        }
    }

    let alive = (world.bot.is_alive(), world.enemy.is_alive());
    let bot_cmd = if alive.0 { bot_cmd } else { Command::Idle };
    let enemy_cmd = if alive.1 { enemy_cmd } else { Command::Idle };

    if let Command::Turn(d) = bot_cmd {
        next.bot.facing = d;
    }
    if let Command::Turn(d) = enemy_cmd {
        next.enemy.facing = d;
    }

    let shot = |shooter: &AgentState, target: &AgentState| -> u32 {
        let lands = shooter.ammo_ok
            && shooter.cell.manhattan(target.cell) <= rules.combat_range
            && world.los(shooter.cell, target.cell);
        if lands {
            rules.damage_per_tier * u32::from(shooter.armed_tier)
        } else {
            0
        }
    };
    let to_enemy = if bot_cmd == Command::Fire {
        shot(&world.bot, &world.enemy)
    } else {
        0
    };
    let to_bot = if enemy_cmd == Command::Fire {
        shot(&world.enemy, &world.bot)
    } else {
        0
    };
    next.enemy.health = next.enemy.health.saturating_sub(to_enemy);
    next.bot.health = next.bot.health.saturating_sub(to_bot);

    let target = |agent: &AgentState, cmd: Command| match cmd {
        Command::MoveStep(d) => {
            let t = agent.cell.offset(d);
            arena.map.is_floor(t).then_some((d, t))
        }
        _ => None,
    };
    let mut bot_move = target(&world.bot, bot_cmd).filter(|(_, t)| *t != world.enemy.cell);
    let mut enemy_move = target(&world.enemy, enemy_cmd).filter(|(_, t)| *t != world.bot.cell);
    if let (Some((_, a)), Some((_, b))) = (bot_move, enemy_move) {
        if a == b {
            if next.rng.random_bool(0.5) {
                enemy_move = None;
            } else {
                bot_move = None;
            }
        }
    }
    if let Some((d, t)) = bot_move {
        next.bot.cell = t;
        next.bot.facing = d;
    }
    if let Some((d, t)) = enemy_move {
        next.enemy.cell = t;
        next.enemy.facing = d;
    }

    for agent in [&mut next.bot, &mut next.enemy] {
        if !agent.is_alive() {
            continue;
        }
        for item in next.items.iter_mut().filter(|i| i.available) {
            if arena.graph.cell(&item.waypoint) != Some(agent.cell) {
                continue;
            }
            match item.kind {
                ItemKind::Health => {
                    agent.health = (agent.health + rules.health_pack).min(MAX_HEALTH)
                }
                ItemKind::Ammo => agent.ammo_ok = true,
                ItemKind::Weapon(t) => {
                    agent.armed_tier = agent.armed_tier.max(t);
                    agent.ammo_ok = true;
                }
            }
            item.available = false;
            item.respawn_remaining = rules.respawn_ticks;
        }
    }
    next.bot.health = next.bot.health.min(MAX_HEALTH);
    next.enemy.health = next.enemy.health.min(MAX_HEALTH);
    next
}
