//! Text map format.
//!
//! ```text
//! #####
//! #...#
//! #####
//! waypoints: w0 1 1 ; w1 3 1
//! edges: w0 w1
//! items: h1 health w1
//! spawn: bot w0 ; enemy w1
//! ```
//!
//! Grid rows come first, then the four keyed sections in this order. Entries
//! are `;`-separated and blank lines are ignored. Positions in errors are
//! 1-based.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{Cell, GridMap, Item, ItemId, ItemKind, MapError, Terrain, WaypointGraph, WaypointId};

/// Everything a map file declares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapSpec {
    pub map: GridMap,
    pub graph: WaypointGraph,
    pub items: Vec<Item>,
    pub bot_spawn_waypoint: WaypointId,
    pub enemy_spawn_waypoint: WaypointId,
    pub bot_spawn: Cell,
    pub enemy_spawn: Cell,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn err(line: usize, column: usize, reason: impl Into<String>) -> MapError {
    MapError::Parse {
        line,
        column,
        reason: reason.into(),
    }
}

/// Splits a section body into `;`-separated entries of whitespace tokens,
/// keeping 1-based columns relative to the whole line.
fn entries(body: &str, body_offset: usize) -> Vec<Vec<Token<'_>>> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in body.split(';') {
        let mut toks = Vec::new();
        let mut rest = part;
        let mut pos = start;
        while let Some(i) = rest.find(|c: char| !c.is_whitespace()) {
            let tail = &rest[i..];
            let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
            toks.push(Token {
                text: &tail[..len],
                column: body_offset + pos + i + 1,
            });
            pos += i + len;
            rest = &tail[len..];
        }
        if !toks.is_empty() {
            out.push(toks);
        }
        start += part.len() + 1;
    }
    out
}

fn expect_arity(line: usize, entry: &[Token<'_>], n: usize, what: &str) -> Result<(), MapError> {
    if entry.len() != n {
        return Err(err(
            line,
            entry[0].column,
            format!("{what} entry needs {n} fields, found {}", entry.len()),
        ));
    }
    Ok(())
}

fn waypoint_ref(
    line: usize,
    tok: &Token<'_>,
    declared: &[(WaypointId, Cell)],
) -> Result<WaypointId, MapError> {
    let id = WaypointId::new(tok.text)
        .ok_or_else(|| err(line, tok.column, format!("bad waypoint id `{}`", tok.text)))?;
    if !declared.iter().any(|(w, _)| *w == id) {
        return Err(err(line, tok.column, format!("unknown waypoint `{id}`")));
    }
    Ok(id)
}

fn parse_kind(tok: &Token<'_>, line: usize) -> Result<ItemKind, MapError> {
    match tok.text {
        "health" => Ok(ItemKind::Health),
        "ammo" => Ok(ItemKind::Ammo),
        "weapon1" => Ok(ItemKind::Weapon(1)),
        "weapon2" => Ok(ItemKind::Weapon(2)),
        "weapon3" => Ok(ItemKind::Weapon(3)),
        other => Err(err(
            line,
            tok.column,
            format!("unknown item kind `{other}`"),
        )),
    }
}

const SECTIONS: [&str; 4] = ["waypoints", "edges", "items", "spawn"];

/// Parses a map file and checks every structural invariant.
pub fn load_map(text: &str) -> Result<MapSpec, MapError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();

    // Grid.
    let mut rows: Vec<(usize, &str)> = Vec::new();
    while let Some(&(n, l)) = lines.peek() {
        if l.contains(':') {
            break;
        }
        rows.push((n, l));
        lines.next();
    }
    let Some(&(first_line, first_row)) = rows.first() else {
        let (n, _) = lines.peek().copied().unwrap_or((1, ""));
        return Err(err(n, 1, "missing grid section"));
    };
    let width = first_row.chars().count();
    let mut cells = Vec::with_capacity(width * rows.len());
    for &(n, row) in &rows {
        if row.chars().count() != width {
            return Err(err(
                n,
                row.chars().count().min(width) + 1,
                format!(
                    "row width {} differs from first row width {width} (line {first_line})",
                    row.chars().count()
                ),
            ));
        }
        for (col, ch) in row.chars().enumerate() {
            cells.push(match ch {
                '#' => Terrain::Wall,
                '.' => Terrain::Floor,
                other => {
                    return Err(err(
                        n,
                        col + 1,
                        format!("unexpected grid character `{other}`"),
                    ))
                }
            });
        }
    }
    let map = GridMap::new(width, rows.len(), cells)?;

    // Keyed sections, in fixed order.
    let mut bodies: Vec<(usize, Vec<Vec<Token<'_>>>)> = Vec::new();
    for name in SECTIONS {
        let Some((n, l)) = lines.next() else {
            return Err(err(
                rows.last().unwrap().0 + 1,
                1,
                format!("missing `{name}:` section"),
            ));
        };
        let (key, body) = l.split_once(':').unwrap_or((l, ""));
        if key.trim() != name {
            return Err(err(
                n,
                1,
                format!("expected `{name}:` section, found `{}`", key.trim()),
            ));
        }
        bodies.push((n, entries(body, key.len() + 1)));
    }
    if let Some((n, _)) = lines.next() {
        return Err(err(n, 1, "unexpected content after `spawn:` section"));
    }

    let (wline, wentries) = &bodies[0];
    let mut waypoints: Vec<(WaypointId, Cell)> = Vec::new();
    for e in wentries {
        expect_arity(*wline, e, 3, "waypoint")?;
        let id = WaypointId::new(e[0].text).ok_or_else(|| {
            err(
                *wline,
                e[0].column,
                format!("bad waypoint id `{}`", e[0].text),
            )
        })?;
        if waypoints.iter().any(|(w, _)| *w == id) {
            return Err(err(
                *wline,
                e[0].column,
                format!("duplicate waypoint `{id}`"),
            ));
        }
        let coord = |t: &Token<'_>| {
            t.text
                .parse::<i32>()
                .map_err(|_| err(*wline, t.column, format!("bad coordinate `{}`", t.text)))
        };
        let cell = Cell::new(coord(&e[1])?, coord(&e[2])?);
        if !map.contains(cell) {
            return Err(err(
                *wline,
                e[1].column,
                format!("waypoint `{id}` at {cell} is outside the grid"),
            ));
        }
        if !map.is_floor(cell) {
            return Err(err(
                *wline,
                e[1].column,
                format!("waypoint `{id}` at {cell} is on a wall"),
            ));
        }
        waypoints.push((id, cell));
    }

    let (eline, eentries) = &bodies[1];
    let mut edges = Vec::new();
    for e in eentries {
        expect_arity(*eline, e, 2, "edge")?;
        let a = waypoint_ref(*eline, &e[0], &waypoints)?;
        let b = waypoint_ref(*eline, &e[1], &waypoints)?;
        if a == b {
            return Err(err(*eline, e[1].column, format!("self-loop edge on `{a}`")));
        }
        edges.push((a, b));
    }
    let graph = WaypointGraph::new(waypoints.clone(), edges)?;

    let (iline, ientries) = &bodies[2];
    let mut items = Vec::new();
    let mut item_ids = BTreeSet::new();
    for e in ientries {
        expect_arity(*iline, e, 3, "item")?;
        let id = ItemId::new(e[0].text)
            .ok_or_else(|| err(*iline, e[0].column, format!("bad item id `{}`", e[0].text)))?;
        if !item_ids.insert(id.clone()) {
            return Err(err(*iline, e[0].column, format!("duplicate item `{id}`")));
        }
        let kind = parse_kind(&e[1], *iline)?;
        let waypoint = waypoint_ref(*iline, &e[2], &waypoints)?;
        items.push(Item {
            id,
            kind,
            waypoint,
            available: true,
            respawn_remaining: 0,
        });
    }

    let (sline, sentries) = &bodies[3];
    let mut bot = None;
    let mut enemy = None;
    for e in sentries {
        expect_arity(*sline, e, 2, "spawn")?;
        let w = waypoint_ref(*sline, &e[1], &waypoints)?;
        let slot = match e[0].text {
            "bot" => &mut bot,
            "enemy" => &mut enemy,
            other => {
                return Err(err(
                    *sline,
                    e[0].column,
                    format!("unknown spawn role `{other}`"),
                ))
            }
        };
        if slot.replace(w).is_some() {
            return Err(err(
                *sline,
                e[0].column,
                format!("duplicate spawn for `{}`", e[0].text),
            ));
        }
    }
    let bot = bot.ok_or_else(|| err(*sline, 1, "missing bot spawn"))?;
    let enemy = enemy.ok_or_else(|| err(*sline, 1, "missing enemy spawn"))?;
    if bot == enemy {
        return Err(MapError::Invalid(
            "bot and enemy spawn on the same waypoint".into(),
        ));
    }

    Ok(MapSpec {
        bot_spawn: graph.cell(&bot).unwrap(),
        enemy_spawn: graph.cell(&enemy).unwrap(),
        bot_spawn_waypoint: bot,
        enemy_spawn_waypoint: enemy,
        map,
        graph,
        items,
    })
}

impl MapSpec {
    /// Renders back into the text format accepted by [`load_map`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.map.rows() {
            out.push_str(&row);
            out.push('\n');
        }
        let join = |parts: Vec<String>| parts.join(" ; ");
        let wps = self
            .graph
            .waypoints()
            .map(|(id, c)| format!("{id} {} {}", c.x, c.y))
            .collect();
        let edges = self
            .graph
            .edges()
            .map(|(a, b)| format!("{a} {b}"))
            .collect();
        let items = self
            .items
            .iter()
            .map(|i| {
                let kind = match i.kind {
                    ItemKind::Weapon(t) => format!("weapon{t}"),
                    k => k.to_string(),
                };
                format!("{} {kind} {}", i.id, i.waypoint)
            })
            .collect();
        let _ = writeln!(out, "waypoints: {}", join(wps));
        let _ = writeln!(out, "edges: {}", join(edges));
        let _ = writeln!(out, "items: {}", join(items));
        let _ = writeln!(
            out,
            "spawn: bot {} ; enemy {}",
            self.bot_spawn_waypoint, self.enemy_spawn_waypoint
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const T1: &str = "\
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

    #[test]
    fn parses_t1() {
        let spec = load_map(T1).unwrap();
        assert_eq!(spec.graph.len(), 3);
        assert_eq!(spec.graph.edge_count(), 2);
        assert_eq!(spec.items.len(), 1);
        assert_eq!(spec.items[0].waypoint.as_str(), "w1");
        assert_eq!(spec.bot_spawn, Cell::new(1, 1));
        assert_eq!(spec.enemy_spawn, Cell::new(3, 3));
    }

    #[test]
    fn render_round_trips() {
        let spec = load_map(T1).unwrap();
        assert_eq!(load_map(&spec.to_text()).unwrap(), spec);
    }

    #[test]
    fn unreachable_floor_is_invalid() {
        let text = "\
#####
#.#.#
#####
waypoints: w0 1 1 ; w1 3 1
edges: w0 w1
items:
spawn: bot w0 ; enemy w1
";
        assert!(matches!(load_map(text), Err(MapError::Invalid(_))));
    }

    #[test]
    fn item_on_wall_waypoint_is_a_parse_error() {
        let text = "\
#####
#...#
#####
waypoints: w0 1 1 ; w1 2 0
edges: w0 w1
items: h1 health w1
spawn: bot w0 ; enemy w1
";
        match load_map(text) {
            Err(MapError::Parse { line, column, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(column, 24);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_grid_char_reports_position() {
        let text =
            "#####\n#.x.#\n#####\nwaypoints: w0 1 1\nedges:\nitems:\nspawn: bot w0 ; enemy w0\n";
        assert_eq!(
            load_map(text),
            Err(MapError::Parse {
                line: 2,
                column: 3,
                reason: "unexpected grid character `x`".into()
            })
        );
    }

    #[test]
    fn sections_must_be_in_order() {
        let text = "#####\n#...#\n#####\nedges: w0 w1\nwaypoints: w0 1 1 ; w1 3 1\nitems:\nspawn: bot w0 ; enemy w1\n";
        assert!(matches!(
            load_map(text),
            Err(MapError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn open_border_is_invalid() {
        let text = "#####\n....#\n#####\nwaypoints: w0 1 1 ; w1 3 1\nedges: w0 w1\nitems:\nspawn: bot w0 ; enemy w1\n";
        assert!(matches!(load_map(text), Err(MapError::Invalid(_))));
    }

    #[test]
    fn unknown_item_kind_and_waypoint() {
        let base = "#####\n#...#\n#####\nwaypoints: w0 1 1 ; w1 3 1\nedges: w0 w1\n";
        let bad_kind = format!("{base}items: x1 laser w1\nspawn: bot w0 ; enemy w1\n");
        assert!(matches!(
            load_map(&bad_kind),
            Err(MapError::Parse {
                line: 6,
                column: 11,
                ..
            })
        ));
        let bad_wp = format!("{base}items: x1 ammo w9\nspawn: bot w0 ; enemy w1\n");
        assert!(matches!(
            load_map(&bad_wp),
            Err(MapError::Parse {
                line: 6,
                column: 16,
                ..
            })
        ));
    }

    #[test]
    fn blank_lines_are_ignored() {
        let spaced = T1.replace("#####\nwaypoints", "#####\n\n\nwaypoints");
        assert!(load_map(&spaced).is_ok());
    }
}
