use std::collections::BTreeSet;

use crate::arena::ArenaRules;
use crate::encoder::Emergency;
use crate::perception::Percept;

/// Emergencies present in `p`. Several can hold at once.
///
/// The enemy's facing cone is the closed 90° quadrant around its facing
/// direction; "behind" is the opposite quadrant. A bot exactly to the
/// enemy's side is in neither.
pub fn detect_emergencies(p: &Percept, rules: &ArenaRules) -> BTreeSet<Emergency> {
    let mut out = BTreeSet::new();
    if p.damage_taken_this_tick > 0 {
        out.insert(Emergency::UnderAttack);
    }
    if let Some(enemy) = &p.enemy_visible {
        if enemy.cell.manhattan(p.me.cell) <= rules.combat_range {
            if enemy.facing.cone_contains(enemy.cell, p.me.cell) {
                out.insert(Emergency::FacingEnemy);
            }
            if enemy.facing.opposite().cone_contains(enemy.cell, p.me.cell) {
                out.insert(Emergency::BehindEnemy);
            }
        }
    }
    out
}

/// The emergency to react to, by dispatch priority.
pub fn most_urgent(es: &BTreeSet<Emergency>) -> Option<Emergency> {
    es.iter().copied().min_by_key(|e| e.priority())
}
