//! Shared by the integration tests: a deterministic family of small
//! planning problems and an independent brute-force planner written
//! straight from the action table, sharing no code with the crate's search.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use qsmodels_core::arena::{Cell, ItemId, ItemKind, WaypointGraph, WaypointId};
use qsmodels_core::encoder::{Emergency, KnownItem, PlannedAction, PlanningProblem};
use qsmodels_core::perception::{Fluent, FluentSnapshot, HealthLevel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn wp(i: usize) -> WaypointId {
    WaypointId::new(format!("w{i}")).unwrap()
}

/// Graph shapes with `n` waypoints: path, cycle, star, ladder.
pub fn shapes(n: usize) -> Vec<(String, Vec<(usize, usize)>)> {
    let mut out = vec![(format!("path{n}"), (1..n).map(|i| (i - 1, i)).collect())];
    if n >= 3 {
        let mut e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        e.push((n - 1, 0));
        out.push((format!("cycle{n}"), e));
        out.push((format!("star{n}"), (1..n).map(|i| (0, i)).collect()));
    }
    if n >= 4 && n.is_multiple_of(2) {
        let h = n / 2;
        let mut e: Vec<_> = (1..h)
            .flat_map(|i| [(i - 1, i), (h + i - 1, h + i)])
            .collect();
        e.extend((0..h).map(|i| (i, h + i)));
        out.push((format!("ladder{n}"), e));
    }
    out
}

pub fn graph(n: usize, edges: &[(usize, usize)]) -> WaypointGraph {
    WaypointGraph::new(
        (0..n).map(|i| (wp(i), Cell::new(i as i32 + 1, 1))),
        edges.iter().map(|&(a, b)| (wp(a), wp(b))),
    )
    .unwrap()
}

const KINDS: [ItemKind; 4] = [
    ItemKind::Health,
    ItemKind::Ammo,
    ItemKind::Weapon(2),
    ItemKind::Weapon(3),
];

/// A random problem over `g` (horizon 1; callers pick the horizon).
pub fn random_problem(g: &WaypointGraph, rng: &mut ChaCha8Rng) -> PlanningProblem {
    let n = g.len();
    let mut fluents = BTreeSet::new();
    fluents.insert(Fluent::At(wp(rng.random_range(0..n))));
    fluents.insert(Fluent::HealthLevel(
        HealthLevel::ALL[rng.random_range(0..3)],
    ));
    fluents.insert(Fluent::Armed(rng.random_range(0..=2)));
    if rng.random_bool(0.7) {
        fluents.insert(Fluent::AmmoOk);
    }
    if rng.random_bool(0.85) {
        let e = wp(rng.random_range(0..n));
        fluents.insert(Fluent::EnemyExpected(e.clone()));
        fluents.insert(Fluent::EnemyLastSeen(e));
    }
    let mut items = Vec::new();
    for k in 0..rng.random_range(0..=4) {
        let kind = KINDS[rng.random_range(0..KINDS.len())];
        let prefix = match kind {
            ItemKind::Health => "h",
            ItemKind::Ammo => "a",
            ItemKind::Weapon(_) => "g",
        };
        let id = ItemId::new(format!("{prefix}{k}")).unwrap();
        let waypoint = wp(rng.random_range(0..n));
        if rng.random_bool(0.85) {
            fluents.insert(Fluent::ItemAvailable(id.clone(), waypoint.clone(), kind));
        }
        items.push(KnownItem { id, waypoint, kind });
    }
    let snapshot = FluentSnapshot { tick: 0, fluents };
    PlanningProblem::new(snapshot, g.clone(), items, 1, rng.random_range(0..=2)).unwrap()
}

/// The fixed instance family: every shape with 2–8 waypoints, `per_graph`
/// seeded variations each. Horizons are applied by the caller.
pub fn family(per_graph: usize) -> Vec<(String, PlanningProblem)> {
    let mut out = Vec::new();
    for n in 2..=8 {
        for (name, edges) in shapes(n) {
            let g = graph(n, &edges);
            for v in 0..per_graph {
                let mut rng =
                    ChaCha8Rng::seed_from_u64((n * 1000 + v) as u64 ^ (name.len() as u64 * 7919));
                out.push((format!("{name}/{v}"), random_problem(&g, &mut rng)));
            }
        }
    }
    out
}

/// Compact planning state for the brute-force search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct S {
    at: usize,
    health: u8,
    armed: u8,
    ammo: bool,
    avail: u32,
}

/// Independent reading of the problem: plain indices and BFS distances.
pub struct Brute {
    ids: Vec<WaypointId>,
    adj: Vec<Vec<usize>>,
    dist: Vec<Vec<u32>>,
    items: Vec<(ItemId, usize, ItemKind)>,
    enemy: Option<usize>,
    tier: u8,
    start: S,
}

fn level(l: HealthLevel) -> u8 {
    match l {
        HealthLevel::Low => 0,
        HealthLevel::Medium => 1,
        HealthLevel::High => 2,
    }
}

impl Brute {
    pub fn new(p: &PlanningProblem) -> Brute {
        let ids: Vec<WaypointId> = p.graph.ids().cloned().collect();
        let index: BTreeMap<&WaypointId, usize> =
            ids.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for (a, b) in p.graph.edges() {
            adj[index[a]].push(index[b]);
            adj[index[b]].push(index[a]);
        }
        for l in &mut adj {
            l.sort();
            l.dedup();
        }
        let dist = (0..ids.len())
            .map(|s| {
                let mut d = vec![u32::MAX; ids.len()];
                d[s] = 0;
                let mut q = VecDeque::from([s]);
                while let Some(u) = q.pop_front() {
                    for &v in &adj[u] {
                        if d[v] == u32::MAX {
                            d[v] = d[u] + 1;
                            q.push_back(v);
                        }
                    }
                }
                d
            })
            .collect();
        let mut items = Vec::new();
        let mut start = S {
            at: 0,
            health: 0,
            armed: 0,
            ammo: false,
            avail: 0,
        };
        let mut enemy = None;
        for f in &p.snapshot.fluents {
            match f {
                Fluent::At(w) => start.at = index[w],
                Fluent::HealthLevel(l) => start.health = level(*l),
                Fluent::Armed(t) => start.armed = *t,
                Fluent::AmmoOk => start.ammo = true,
                Fluent::EnemyExpected(w) => enemy = Some(index[w]),
                Fluent::ItemAvailable(i, w, k) => items.push((i.clone(), index[w], *k)),
                Fluent::EnemyLastSeen(_) => {}
            }
        }
        items.sort_by(|a, b| a.0.cmp(&b.0));
        start.avail = (1u32 << items.len()) - 1;
        Brute {
            ids,
            adj,
            dist,
            items,
            enemy,
            tier: p.enemy_tier_estimate,
            start,
        }
    }

    /// All ground actions in the fixed expansion order: attack, elude,
    /// move_towards, pick_ammo, pick_health; then by argument id.
    fn actions(&self) -> Vec<PlannedAction> {
        let mut out = vec![PlannedAction::Attack];
        out.extend(self.ids.iter().cloned().map(PlannedAction::Elude));
        out.extend(self.ids.iter().cloned().map(PlannedAction::MoveTowards));
        out.extend(
            self.items
                .iter()
                .map(|i| PlannedAction::PickAmmo(i.0.clone())),
        );
        out.extend(
            self.items
                .iter()
                .map(|i| PlannedAction::PickHealth(i.0.clone())),
        );
        out
    }

    fn idx(&self, w: &WaypointId) -> usize {
        self.ids.iter().position(|x| x == w).unwrap()
    }

    fn step(&self, s: S, a: &PlannedAction) -> Option<S> {
        let item = |id: &ItemId| self.items.iter().position(|i| &i.0 == id);
        match a {
            PlannedAction::Attack => {
                let e = self.enemy?;
                let near = s.at == e || self.adj[s.at].contains(&e);
                (near && s.health >= 1 && s.armed >= self.tier.max(1) && s.ammo).then_some(s)
            }
            PlannedAction::MoveTowards(w) => {
                let w = self.idx(w);
                self.adj[s.at].contains(&w).then_some(S { at: w, ..s })
            }
            PlannedAction::Elude(w) => {
                let (w, e) = (self.idx(w), self.enemy?);
                (self.adj[s.at].contains(&w) && self.dist[w][e] > self.dist[s.at][e])
                    .then_some(S { at: w, ..s })
            }
            PlannedAction::PickHealth(i) => {
                let k = item(i)?;
                let (_, w, kind) = &self.items[k];
                let ok = s.avail & (1 << k) != 0 && *w == s.at && *kind == ItemKind::Health;
                ok.then_some(S {
                    health: (s.health + 1).min(2),
                    avail: s.avail & !(1 << k),
                    ..s
                })
            }
            PlannedAction::PickAmmo(i) => {
                let k = item(i)?;
                let (_, w, kind) = &self.items[k];
                if s.avail & (1 << k) == 0 || *w != s.at {
                    return None;
                }
                let armed = match kind {
                    ItemKind::Ammo => s.armed,
                    ItemKind::Weapon(t) => s.armed.max(*t),
                    ItemKind::Health => return None,
                };
                Some(S {
                    ammo: true,
                    armed,
                    avail: s.avail & !(1 << k),
                    ..s
                })
            }
        }
    }

    /// The first plan of exactly `n` steps ending in attack, in
    /// lexicographic expansion order, found by exhaustive enumeration.
    pub fn first_plan(&self, n: usize) -> Option<Vec<PlannedAction>> {
        let actions = self.actions();
        let mut plan = Vec::new();
        self.dfs(self.start, n, &actions, &mut plan).then_some(plan)
    }

    fn dfs(
        &self,
        s: S,
        left: usize,
        actions: &[PlannedAction],
        plan: &mut Vec<PlannedAction>,
    ) -> bool {
        for a in actions {
            if left == 1 && *a != PlannedAction::Attack {
                continue;
            }
            let Some(next) = self.step(s, a) else {
                continue;
            };
            plan.push(a.clone());
            if left == 1 || self.dfs(next, left - 1, actions, plan) {
                return true;
            }
            plan.pop();
        }
        false
    }

    /// Whether `plan` replays from the start state and ends in attack.
    pub fn valid(&self, plan: &[PlannedAction]) -> bool {
        let mut s = self.start;
        for a in plan {
            match self.step(s, a) {
                Some(n) => s = n,
                None => return false,
            }
        }
        plan.last() == Some(&PlannedAction::Attack)
    }

    /// States before each action of `plan`.
    fn trajectory(&self, plan: &[PlannedAction]) -> Vec<S> {
        let mut s = self.start;
        let mut out = vec![s];
        for a in plan {
            s = self.step(s, a).expect("valid plan");
            out.push(s);
        }
        out
    }

    fn escape(&self, s: S) -> usize {
        let e = self.enemy.unwrap_or(s.at);
        let mut best: Option<usize> = None;
        for &w in &self.adj[s.at] {
            if best.is_none_or(|b| self.dist[w][e] > self.dist[b][e]) {
                best = Some(w);
            }
        }
        best.unwrap_or(s.at)
    }

    /// Expected reaction table entries for a valid plan, per the reaction
    /// policy: under attack, elude when health is low; facing the enemy,
    /// attack only with medium health and a weapon at least as good;
    /// behind the enemy, attack.
    pub fn reactions(&self, plan: &[PlannedAction]) -> BTreeMap<(usize, Emergency), PlannedAction> {
        let mut out = BTreeMap::new();
        for (t, s) in self
            .trajectory(plan)
            .into_iter()
            .take(plan.len())
            .enumerate()
        {
            let elude = PlannedAction::Elude(self.ids[self.escape(s)].clone());
            let ua = if s.health == 0 {
                elude.clone()
            } else {
                PlannedAction::Attack
            };
            let fe = if s.health >= 1 && s.armed >= self.tier {
                PlannedAction::Attack
            } else {
                elude
            };
            out.insert((t, Emergency::UnderAttack), ua);
            out.insert((t, Emergency::FacingEnemy), fe);
            out.insert((t, Emergency::BehindEnemy), PlannedAction::Attack);
        }
        out
    }
}

use qsmodels_core::encoder::{decode_plan, decode_preemption, encode, Plan, PreemptionTable};
use qsmodels_core::solver::external::ExternalConfig;
use qsmodels_core::solver::oracle::replay;
use qsmodels_core::solver::{solve_external, solve_oracle, SolveResult};

/// Decodes a model into plan and table, checking replay soundness, the
/// table's size and the attack-last shape.
pub fn decode_checked(
    p: &PlanningProblem,
    result: &SolveResult,
) -> Result<Option<(Plan, PreemptionTable)>, String> {
    let model = match result {
        SolveResult::Sat(m) => m,
        SolveResult::Unsat => return Ok(None),
        SolveResult::SolverFailure(d) => return Err(format!("solver failure: {d}")),
    };
    let plan = decode_plan(model).map_err(|e| format!("plan: {e}"))?;
    let table =
        decode_preemption(model, p.horizon, &p.emergencies).map_err(|e| format!("table: {e}"))?;
    if plan.len() != p.horizon {
        return Err(format!(
            "plan length {} at horizon {}",
            plan.len(),
            p.horizon
        ));
    }
    if plan.actions().last() != Some(&PlannedAction::Attack) {
        return Err("plan does not end in attack".into());
    }
    replay(p, &plan).map_err(|e| format!("replay: {e}"))?;
    if table.len() != p.horizon * 3 {
        return Err(format!(
            "table has {} entries, want {}",
            table.len(),
            p.horizon * 3
        ));
    }
    Ok(Some((plan, table)))
}

/// Oracle against the brute-force planner: same verdict, same (first) plan,
/// a replay-sound decode and the reaction policy in every table entry.
pub fn check_oracle(p: &PlanningProblem) -> Result<Option<Plan>, String> {
    let brute = Brute::new(p);
    let expected = brute.first_plan(p.horizon);
    let decoded = decode_checked(p, &solve_oracle(p))?;
    match (decoded, expected) {
        (None, None) => Ok(None),
        (Some((plan, _)), None) => Err(format!(
            "oracle found {:?}, brute force found nothing",
            plan.actions()
        )),
        (None, Some(b)) => Err(format!("oracle unsat, brute force found {b:?}")),
        (Some((plan, table)), Some(b)) => {
            if plan.actions() != b.as_slice() {
                return Err(format!(
                    "oracle plan {:?} is not the first plan {b:?}",
                    plan.actions()
                ));
            }
            if !brute.valid(plan.actions()) {
                return Err("plan invalid under the brute-force semantics".into());
            }
            let want = brute.reactions(plan.actions());
            let got: BTreeMap<_, _> = table.iter().map(|(k, v)| (*k, v.clone())).collect();
            if got != want {
                return Err(format!("reaction table {got:?}, want {want:?}"));
            }
            Ok(Some(plan))
        }
    }
}

/// External solver on the encoded program: verdict must match the oracle,
/// and any model must decode to a replay-sound plan.
pub fn check_external(p: &PlanningProblem, config: &ExternalConfig) -> Result<bool, String> {
    let program = encode(p).map_err(|e| format!("encode: {e}"))?;
    let ext = decode_checked(p, &solve_external(&program, config))?;
    let oracle = matches!(solve_oracle(p), SolveResult::Sat(_));
    if ext.is_some() != oracle {
        return Err(format!(
            "external sat={} but oracle sat={oracle}",
            ext.is_some()
        ));
    }
    Ok(oracle)
}
