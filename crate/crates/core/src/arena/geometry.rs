use std::collections::VecDeque;

use thiserror::Error;

use super::{Cell, GridMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no path from {from} to {to}")]
pub struct NoPath {
    pub from: Cell,
    pub to: Cell,
}

/// Breadth-first step counts from `from` over floor cells, indexed row-major.
/// Unreachable cells (and walls) are `None`.
pub fn distance_field(map: &GridMap, from: Cell) -> Vec<Option<u32>> {
    let mut dist = vec![None; map.width() * map.height()];
    if !map.is_floor(from) {
        return dist;
    }
    dist[map.index(from)] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(c) = queue.pop_front() {
        let d = dist[map.index(c)].unwrap();
        for (_, n) in map.neighbors(c) {
            let slot = &mut dist[map.index(n)];
            if slot.is_none() {
                *slot = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Minimal-length 4-connected path, both endpoints included. Among equal
/// length paths the one whose move sequence is lexicographically smallest
/// under N < E < S < W is returned.
pub fn shortest_path(map: &GridMap, from: Cell, to: Cell) -> Result<Vec<Cell>, NoPath> {
    let field = distance_field(map, to);
    let remaining = |c: Cell| field.get(map.index(c)).copied().flatten();
    let no_path = NoPath { from, to };
    if !map.is_floor(from) {
        return Err(no_path);
    }
    let mut left = remaining(from).ok_or(no_path)?;
    let mut path = Vec::with_capacity(left as usize + 1);
    let mut cur = from;
    path.push(cur);
    while left > 0 {
        // Greedy descent in direction order yields the lexicographic minimum.
        let (_, next) = map
            .neighbors(cur)
            .find(|(_, n)| remaining(*n) == Some(left - 1))
            .expect("distance field has a descending neighbour");
        cur = next;
        left -= 1;
        path.push(cur);
    }
    Ok(path)
}

/// Cells touched by the segment joining the centres of `a` and `b`
/// (supercover traversal). When the segment passes exactly through a cell
/// corner both side cells are included, which makes the set symmetric in
/// `a` and `b`.
pub fn los_cells(a: Cell, b: Cell) -> Vec<Cell> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let nx = dx.unsigned_abs() as i64;
    let ny = dy.unsigned_abs() as i64;
    let sx = dx.signum();
    let sy = dy.signum();
    let mut cells = vec![a];
    let (mut x, mut y) = (a.x, a.y);
    let (mut ix, mut iy) = (0i64, 0i64);
    while ix < nx || iy < ny {
        // Compare where the segment crosses the next vertical vs horizontal
        // grid line, scaled to integers.
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        if decision == 0 {
            cells.push(Cell::new(x + sx, y));
            cells.push(Cell::new(x, y + sy));
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        cells.push(Cell::new(x, y));
    }
    cells
}

/// True iff no cell touched by the centre-to-centre segment is a wall.
pub fn line_of_sight(map: &GridMap, a: Cell, b: Cell) -> bool {
    los_cells(a, b).into_iter().all(|c| map.is_floor(c))
}
