use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use super::{Emergency, EncodeError, PlanningProblem};
use crate::arena::ItemKind;
use crate::perception::HealthLevel;

/// Grounder-ready program text (gringo syntax, one statement per line).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicProgramText(pub String);

impl LogicProgramText {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LogicProgramText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

const DOMAIN_RULES: &str = "\
fluent(at(W)) :- waypoint(W).
fluent(health_level(L)) :- level(L).
fluent(armed(K)) :- tier(K).
fluent(ammo_ok).
fluent(item_available(I,W,K)) :- item(I,W,K).
fluent(enemy_last_seen(W)) :- waypoint(W).
fluent(enemy_expected(W)) :- waypoint(W).
action(attack).
action(elude(W)) :- waypoint(W).
action(move_towards(W)) :- waypoint(W).
action(pick_ammo(I)) :- item(I,W,K), refill(K).
action(pick_health(I)) :- item(I,W,health).
";

const ACTION_RULES: &str = "\
1 { occurs(A,T) : action(A) } 1 :- step(T).
poss(move_towards(W),T) :- step(T), edge(V,W), holds(at(V),T).
poss(elude(W),T) :- step(T), edge(V,W), holds(at(V),T), waypoint(E), holds(enemy_expected(E),T), dist(W,E,D1), dist(V,E,D0), D1 > D0.
poss(pick_health(I),T) :- step(T), item(I,W,health), holds(at(W),T), holds(item_available(I,W,health),T).
poss(pick_ammo(I),T) :- step(T), item(I,W,K), refill(K), holds(at(W),T), holds(item_available(I,W,K),T).
ready(T) :- step(T), fit(L), holds(health_level(L),T), tier(K), holds(armed(K),T), attack_tier(M), K >= M, holds(ammo_ok,T).
poss(attack,T) :- ready(T), waypoint(E), holds(enemy_expected(E),T), holds(at(E),T).
poss(attack,T) :- ready(T), waypoint(E), holds(enemy_expected(E),T), edge(V,E), holds(at(V),T).
:- step(T), action(A), occurs(A,T), not poss(A,T).
holds(at(W),T+1) :- step(T), waypoint(W), occurs(move_towards(W),T).
holds(at(W),T+1) :- step(T), waypoint(W), occurs(elude(W),T).
holds(health_level(L2),T+1) :- step(T), raise(L1,L2), item(I,W,health), occurs(pick_health(I),T), holds(health_level(L1),T).
holds(ammo_ok,T+1) :- step(T), item(I,W,K), refill(K), occurs(pick_ammo(I),T).
holds(armed(K),T+1) :- step(T), tier(A), item(I,W,weapon(K)), occurs(pick_ammo(I),T), holds(armed(A),T), K > A.
ab(at(V),T) :- step(T), waypoint(V), waypoint(W), holds(at(V),T), occurs(move_towards(W),T).
ab(at(V),T) :- step(T), waypoint(V), waypoint(W), holds(at(V),T), occurs(elude(W),T).
ab(health_level(L1),T) :- step(T), raise(L1,L2), L1 != L2, item(I,W,health), occurs(pick_health(I),T), holds(health_level(L1),T).
ab(item_available(I,W,K),T) :- step(T), item(I,W,K), occurs(pick_health(I),T).
ab(item_available(I,W,K),T) :- step(T), item(I,W,K), occurs(pick_ammo(I),T).
ab(armed(A),T) :- step(T), tier(A), item(I,W,weapon(K)), occurs(pick_ammo(I),T), holds(armed(A),T), K > A.
holds(F,T+1) :- step(T), fluent(F), holds(F,T), not ab(F,T).
";

const ESCAPE_RULES: &str = "\
has_expected(T) :- step(T), waypoint(E), holds(enemy_expected(E),T).
threat(E,T) :- step(T), waypoint(E), holds(enemy_expected(E),T).
threat(V,T) :- step(T), waypoint(V), holds(at(V),T), not has_expected(T).
cand(W,D,T) :- step(T), edge(V,W), holds(at(V),T), waypoint(E), threat(E,T), dist(W,E,D).
beaten(W,T) :- cand(W,D,T), cand(X,DX,T), DX > D.
beaten(W,T) :- cand(W,D,T), cand(X,D,T), rank(X,RX), rank(W,RW), RX < RW.
escape(W,T) :- cand(W,D,T), not beaten(W,T).
has_cand(T) :- cand(W,D,T).
escape(V,T) :- step(T), waypoint(V), holds(at(V),T), not has_cand(T).
low(T) :- step(T), holds(health_level(low),T).
strong(T) :- step(T), fit(L), holds(health_level(L),T), tier(K), holds(armed(K),T), enemy_tier(M), K >= M.
";

fn reaction_rules(e: Emergency) -> &'static str {
    match e {
        Emergency::UnderAttack => {
            "react(T,under_attack,elude(W)) :- low(T), escape(W,T).\n\
             react(T,under_attack,attack) :- step(T), not low(T).\n"
        }
        Emergency::FacingEnemy => {
            "react(T,facing_enemy,attack) :- strong(T).\n\
             react(T,facing_enemy,elude(W)) :- step(T), not strong(T), escape(W,T).\n"
        }
        Emergency::BehindEnemy => "react(T,behind_enemy,attack) :- step(T).\n",
    }
}

fn kind_term(k: ItemKind) -> String {
    k.to_string()
}

/// Emits the planning program for `problem`. The text is a pure function
/// of the problem.
pub fn encode(problem: &PlanningProblem) -> Result<LogicProgramText, EncodeError> {
    problem.validate()?;
    let n = problem.horizon;
    let graph = &problem.graph;
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };

    line(format!("% duel planning program, horizon {n}"));
    for t in 0..=n {
        line(format!("time({t})."));
    }
    for t in 0..n {
        line(format!("step({t})."));
    }
    for (rank, w) in graph.ids().enumerate() {
        line(format!("waypoint({w})."));
        line(format!("rank({w},{rank})."));
    }
    for (a, b) in graph.edges() {
        line(format!("edge({a},{b})."));
        line(format!("edge({b},{a})."));
    }
    for a in graph.ids() {
        for (b, d) in graph.hop_distances(a) {
            line(format!("dist({a},{b},{d})."));
        }
    }
    for item in &problem.items {
        line(format!(
            "item({},{},{}).",
            item.id,
            item.waypoint,
            kind_term(item.kind)
        ));
    }
    for l in HealthLevel::ALL {
        line(format!("level({l})."));
        line(format!("raise({l},{}).", l.raised()));
        if l >= HealthLevel::Medium {
            line(format!("fit({l})."));
        }
    }
    for k in 0..=3 {
        line(format!("tier({k})."));
    }
    line(format!("refill({}).", kind_term(ItemKind::Ammo)));
    for k in 1..=3 {
        line(format!("refill({}).", kind_term(ItemKind::Weapon(k))));
    }
    line(format!("enemy_tier({}).", problem.enemy_tier_estimate));
    line(format!("attack_tier({}).", problem.attack_tier()));
    for e in &problem.emergencies {
        line(format!("emergency({e})."));
    }
    for f in &problem.snapshot.fluents {
        line(format!("holds({f},0)."));
    }

    // Writing into a String cannot fail.
    let _ = write!(out, "{DOMAIN_RULES}{ACTION_RULES}");
    let _ = writeln!(out, ":- not occurs(attack,{}).", n - 1);
    out.push_str(ESCAPE_RULES);
    for e in &problem.emergencies {
        out.push_str(reaction_rules(*e));
    }
    Ok(LogicProgramText(out))
}
