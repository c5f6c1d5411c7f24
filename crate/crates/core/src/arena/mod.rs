//! Deterministic two-agent grid arena.
//!
//! The arena is a 4-connected grid of wall and floor cells with an explicit
//! waypoint graph laid over it. Items sit on waypoints. A [`WorldState`] is an
//! immutable value; [`step`] produces the next one from one command per agent.

mod geometry;
mod map_file;
mod sim;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use geometry::{distance_field, line_of_sight, los_cells, shortest_path, NoPath};
pub use map_file::{load_map, MapSpec};
pub use sim::step;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("map parse error at line {line}, column {column}: {reason}")]
    Parse {
        line: usize,
        column: usize,
        reason: String,
    },
    #[error("invalid map: {0}")]
    Invalid(String),
}

/// Grid coordinate; `x` is the column and `y` the row, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub fn offset(self, dir: Direction) -> Cell {
        let (dx, dy) = dir.delta();
        Cell::new(self.x + dx, self.y + dy)
    }

    pub fn manhattan(self, other: Cell) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Compass direction. Declaration order (N < E < S < W) is the path tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    N,
    E,
    S,
    W,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::N, Direction::E, Direction::S, Direction::W];

    /// Unit step; north is towards row 0.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::N => (0, -1),
            Direction::E => (1, 0),
            Direction::S => (0, 1),
            Direction::W => (-1, 0),
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::N => Direction::S,
            Direction::E => Direction::W,
            Direction::S => Direction::N,
            Direction::W => Direction::E,
        }
    }

    pub fn turn_left(self) -> Direction {
        match self {
            Direction::N => Direction::W,
            Direction::W => Direction::S,
            Direction::S => Direction::E,
            Direction::E => Direction::N,
        }
    }

    pub fn turn_right(self) -> Direction {
        self.turn_left().opposite()
    }

    /// True when `to` lies inside the closed 90° cone centred on this
    /// direction as seen from `from`. Diagonals belong to both adjacent cones.
    pub fn cone_contains(self, from: Cell, to: Cell) -> bool {
        let dx = to.x - from.x;
        let dy = to.y - from.y;
        if dx == 0 && dy == 0 {
            return false;
        }
        match self {
            Direction::N => -dy >= dx.abs(),
            Direction::S => dy >= dx.abs(),
            Direction::E => dx >= dy.abs(),
            Direction::W => -dx >= dy.abs(),
        }
    }

    /// The direction whose cone contains `to`, preferring N, E, S, W on diagonals.
    pub fn towards(from: Cell, to: Cell) -> Option<Direction> {
        Direction::ALL
            .into_iter()
            .find(|d| d.cone_contains(from, to))
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Direction::N => "N",
            Direction::E => "E",
            Direction::S => "S",
            Direction::W => "W",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Terrain {
    Wall,
    Floor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<Terrain>,
}

impl GridMap {
    /// Builds a map from row-major terrain, checking the size, border and
    /// floor-connectivity invariants.
    pub fn new(width: usize, height: usize, cells: Vec<Terrain>) -> Result<Self, MapError> {
        if width < 3 || height < 3 {
            return Err(MapError::Invalid(format!(
                "map is {width}x{height}, need at least 3x3"
            )));
        }
        if cells.len() != width * height {
            return Err(MapError::Invalid(format!(
                "expected {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        let map = GridMap {
            width,
            height,
            cells,
        };
        for y in 0..height as i32 {
            for x in 0..width as i32 {
                let border = x == 0 || y == 0 || x == width as i32 - 1 || y == height as i32 - 1;
                if border && map.is_floor(Cell::new(x, y)) {
                    return Err(MapError::Invalid(format!(
                        "border cell ({x},{y}) is not a wall"
                    )));
                }
            }
        }
        let floors: Vec<Cell> = map.floor_cells().collect();
        let Some(&start) = floors.first() else {
            return Err(MapError::Invalid("map has no floor cells".into()));
        };
        let field = distance_field(&map, start);
        if let Some(c) = floors.iter().find(|c| field[map.index(**c)].is_none()) {
            return Err(MapError::Invalid(format!(
                "floor cell {c} is unreachable from {start}"
            )));
        }
        Ok(map)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    pub(crate) fn index(&self, c: Cell) -> usize {
        c.y as usize * self.width + c.x as usize
    }

    pub fn terrain(&self, c: Cell) -> Terrain {
        if self.contains(c) {
            self.cells[self.index(c)]
        } else {
            Terrain::Wall
        }
    }

    pub fn is_floor(&self, c: Cell) -> bool {
        self.terrain(c) == Terrain::Floor
    }

    pub fn floor_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height as i32)
            .flat_map(move |y| (0..self.width as i32).map(move |x| Cell::new(x, y)))
            .filter(|c| self.is_floor(*c))
    }

    /// Floor neighbours in N, E, S, W order.
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = (Direction, Cell)> + '_ {
        Direction::ALL
            .into_iter()
            .map(move |d| (d, c.offset(d)))
            .filter(|(_, n)| self.is_floor(*n))
    }

    /// One string per row, `#` for wall and `.` for floor.
    pub fn rows(&self) -> Vec<String> {
        (0..self.height as i32)
            .map(|y| {
                (0..self.width as i32)
                    .map(|x| {
                        if self.is_floor(Cell::new(x, y)) {
                            '.'
                        } else {
                            '#'
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Lower-case identifier usable verbatim as a logic-program constant.
fn is_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

macro_rules! symbol_newtype {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            /// Accepts lower-case identifiers (`[a-z][a-z0-9_]*`).
            pub fn new(s: impl Into<String>) -> Option<Self> {
                let s = s.into();
                is_symbol(&s).then_some($name(s))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

symbol_newtype!(WaypointId);
symbol_newtype!(ItemId);

/// Undirected waypoint graph. Ids order lexicographically; every
/// "smallest id" tie-break in the crate uses that order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaypointGraph {
    cells: BTreeMap<WaypointId, Cell>,
    adjacency: BTreeMap<WaypointId, BTreeSet<WaypointId>>,
}

impl WaypointGraph {
    pub fn new(
        waypoints: impl IntoIterator<Item = (WaypointId, Cell)>,
        edges: impl IntoIterator<Item = (WaypointId, WaypointId)>,
    ) -> Result<Self, MapError> {
        let mut cells = BTreeMap::new();
        for (id, cell) in waypoints {
            if cells.insert(id.clone(), cell).is_some() {
                return Err(MapError::Invalid(format!("duplicate waypoint {id}")));
            }
        }
        let mut adjacency: BTreeMap<WaypointId, BTreeSet<WaypointId>> =
            cells.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
        for (a, b) in edges {
            if a == b {
                return Err(MapError::Invalid(format!("self-loop edge on {a}")));
            }
            for end in [&a, &b] {
                if !cells.contains_key(end) {
                    return Err(MapError::Invalid(format!(
                        "edge references unknown waypoint {end}"
                    )));
                }
            }
            adjacency.get_mut(&a).unwrap().insert(b.clone());
            adjacency.get_mut(&b).unwrap().insert(a);
        }
        let graph = WaypointGraph { cells, adjacency };
        if let Some(first) = graph.ids().next() {
            let reached = graph.hop_distances(first);
            if let Some(lost) = graph.ids().find(|w| !reached.contains_key(*w)) {
                return Err(MapError::Invalid(format!(
                    "waypoint graph is disconnected: {lost} unreachable from {first}"
                )));
            }
        } else {
            return Err(MapError::Invalid("no waypoints declared".into()));
        }
        Ok(graph)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, id: &WaypointId) -> bool {
        self.cells.contains_key(id)
    }

    pub fn cell(&self, id: &WaypointId) -> Option<Cell> {
        self.cells.get(id).copied()
    }

    /// Ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = &WaypointId> {
        self.cells.keys()
    }

    pub fn waypoints(&self) -> impl Iterator<Item = (&WaypointId, Cell)> {
        self.cells.iter().map(|(k, c)| (k, *c))
    }

    /// Neighbours in ascending id order.
    pub fn neighbors(&self, id: &WaypointId) -> impl Iterator<Item = &WaypointId> {
        self.adjacency.get(id).into_iter().flatten()
    }

    pub fn has_edge(&self, a: &WaypointId, b: &WaypointId) -> bool {
        self.adjacency.get(a).is_some_and(|n| n.contains(b))
    }

    /// Each undirected edge once, as `(smaller, larger)`.
    pub fn edges(&self) -> impl Iterator<Item = (&WaypointId, &WaypointId)> {
        self.adjacency
            .iter()
            .flat_map(|(a, ns)| ns.iter().filter(move |b| a < *b).map(move |b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Breadth-first hop counts from `from` to every reachable waypoint.
    pub fn hop_distances(&self, from: &WaypointId) -> BTreeMap<WaypointId, u32> {
        let mut dist = BTreeMap::new();
        if !self.contains(from) {
            return dist;
        }
        dist.insert(from.clone(), 0);
        let mut queue = VecDeque::from([from.clone()]);
        while let Some(w) = queue.pop_front() {
            let d = dist[&w];
            for n in self.neighbors(&w) {
                if !dist.contains_key(n) {
                    dist.insert(n.clone(), d + 1);
                    queue.push_back(n.clone());
                }
            }
        }
        dist
    }

    pub fn hop_distance(&self, a: &WaypointId, b: &WaypointId) -> Option<u32> {
        self.hop_distances(a).get(b).copied()
    }

    /// Waypoint closest to `cell` by grid path length; ties go to the smallest id.
    pub fn nearest(&self, map: &GridMap, cell: Cell) -> Option<&WaypointId> {
        let field = distance_field(map, cell);
        self.cells
            .iter()
            .filter_map(|(id, c)| field.get(map.index(*c)).copied().flatten().map(|d| (d, id)))
            .min()
            .map(|(_, id)| id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Health,
    Ammo,
    /// Weapon of tier 1..=3.
    Weapon(u8),
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ItemKind::Health => f.write_str("health"),
            ItemKind::Ammo => f.write_str("ammo"),
            ItemKind::Weapon(t) => write!(f, "weapon({t})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub kind: ItemKind,
    pub waypoint: WaypointId,
    pub available: bool,
    pub respawn_remaining: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Bot,
    Enemy,
}

pub const MAX_HEALTH: u32 = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentState {
    pub role: Role,
    pub cell: Cell,
    pub facing: Direction,
    pub health: u32,
    pub armed_tier: u8,
    pub ammo_ok: bool,
}

impl AgentState {
    /// Fresh spawn: full health, tier-1 weapon, ammunition available.
    pub fn spawn(role: Role, cell: Cell) -> Self {
        AgentState {
            role,
            cell,
            facing: Direction::N,
            health: MAX_HEALTH,
            armed_tier: 1,
            ammo_ok: true,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.health > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "dir", rename_all = "snake_case")]
pub enum Command {
    MoveStep(Direction),
    Fire,
    Turn(Direction),
    Idle,
}

/// Combat and item constants. The arena model is a stand-in, so all of them
/// are tunable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArenaRules {
    /// Damage per shot is `damage_per_tier * shooter tier`.
    pub damage_per_tier: u32,
    /// Maximum Manhattan distance at which a shot lands.
    pub combat_range: u32,
    pub respawn_ticks: u32,
    /// Health restored by a health item; 40 lifts any level by exactly one band.
    pub health_pack: u32,
}

impl Default for ArenaRules {
    fn default() -> Self {
        ArenaRules {
            damage_per_tier: 10,
            combat_range: 6,
            respawn_ticks: 300,
            health_pack: 40,
        }
    }
}

/// The static part of a world: terrain, waypoints and rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arena {
    pub map: GridMap,
    pub graph: WaypointGraph,
    pub rules: ArenaRules,
}

impl Arena {
    pub fn waypoint_cell(&self, id: &WaypointId) -> Option<Cell> {
        self.graph.cell(id)
    }

    pub fn nearest_waypoint(&self, cell: Cell) -> Option<&WaypointId> {
        self.graph.nearest(&self.map, cell)
    }
}

/// Complete simulator truth at one tick.
#[derive(Debug, Clone, Serialize)]
pub struct WorldState {
    pub tick: u64,
    #[serde(skip)]
    pub arena: Arc<Arena>,
    pub items: Vec<Item>,
    pub bot: AgentState,
    pub enemy: AgentState,
    pub rng: ChaCha8Rng,
}

impl WorldState {
    pub fn new(spec: &MapSpec, rules: ArenaRules, seed: u64) -> Self {
        let arena = Arc::new(Arena {
            map: spec.map.clone(),
            graph: spec.graph.clone(),
            rules,
        });
        WorldState {
            tick: 0,
            arena,
            items: spec.items.clone(),
            bot: AgentState::spawn(Role::Bot, spec.bot_spawn),
            enemy: AgentState::spawn(Role::Enemy, spec.enemy_spawn),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn agent(&self, role: Role) -> &AgentState {
        match role {
            Role::Bot => &self.bot,
            Role::Enemy => &self.enemy,
        }
    }

    pub fn item(&self, id: &ItemId) -> Option<&Item> {
        self.items.iter().find(|i| &i.id == id)
    }

    pub fn is_over(&self) -> bool {
        !self.bot.is_alive() || !self.enemy.is_alive()
    }

    pub fn los(&self, a: Cell, b: Cell) -> bool {
        line_of_sight(&self.arena.map, a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wp(s: &str) -> WaypointId {
        WaypointId::new(s).unwrap()
    }

    #[test]
    fn symbols_reject_uppercase_and_leading_digit() {
        assert!(WaypointId::new("w0").is_some());
        assert!(WaypointId::new("spawn_a").is_some());
        assert!(WaypointId::new("W0").is_none());
        assert!(WaypointId::new("0w").is_none());
        assert!(WaypointId::new("").is_none());
    }

    #[test]
    fn graph_rejects_disconnected_and_self_loops() {
        let pts = [
            (wp("a"), Cell::new(1, 1)),
            (wp("b"), Cell::new(2, 1)),
            (wp("c"), Cell::new(3, 1)),
        ];
        assert!(WaypointGraph::new(pts.clone(), [(wp("a"), wp("b"))]).is_err());
        assert!(WaypointGraph::new(pts.clone(), [(wp("a"), wp("a"))]).is_err());
        assert!(WaypointGraph::new(pts.clone(), [(wp("a"), wp("z"))]).is_err());
        let g = WaypointGraph::new(pts, [(wp("a"), wp("b")), (wp("c"), wp("b"))]).unwrap();
        assert!(g.has_edge(&wp("b"), &wp("c")));
        assert!(g.has_edge(&wp("c"), &wp("b")));
        assert_eq!(g.hop_distance(&wp("a"), &wp("c")), Some(2));
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn cones_split_the_plane() {
        let o = Cell::new(3, 3);
        assert!(Direction::N.cone_contains(o, Cell::new(3, 0)));
        assert!(Direction::N.cone_contains(o, Cell::new(5, 1)));
        assert!(Direction::E.cone_contains(o, Cell::new(5, 1)));
        assert!(!Direction::S.cone_contains(o, Cell::new(5, 1)));
        assert!(!Direction::N.cone_contains(o, o));
        assert_eq!(Direction::towards(o, Cell::new(0, 3)), Some(Direction::W));
    }

    #[test]
    fn turns_are_inverse() {
        for d in Direction::ALL {
            assert_eq!(d.turn_left().turn_right(), d);
            assert_eq!(d.opposite().opposite(), d);
        }
    }
}
