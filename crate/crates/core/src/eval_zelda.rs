//! Dungeon metrics, the key- and raft-aware solver and the two Zelda schemes.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::assembly::{Direction, DoorType, Dungeon, RoomCoord, TilePos};
use crate::corpus::{TileRole, TileVocabulary};
use crate::eval::{count_bin, EvalError, Scheme, SchemeRanges};
use crate::grid::distinct_grids;
use crate::Game;

/// Expanded-state budget of [`solve`].
pub const STATE_BUDGET: usize = 100_000;
/// Rows and columns of the floor region used for wall/water percentages.
pub const INTERIOR_ROWS: std::ops::Range<usize> = 2..9;
pub const INTERIOR_COLS: std::ops::Range<usize> = 2..14;

/// One point of a solution path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SolveState {
    pub room: RoomCoord,
    pub tile: TilePos,
    pub keys_held: u32,
    /// Bit i set once key i of the dungeon has been picked up.
    pub keys_taken: u64,
    /// Bit i set once locked door i (in [`Dungeon::unique_doors`] order) is open.
    pub doors_opened: u64,
    pub raft_held: bool,
}

/// Rooms connected to the start through doors of any type.
pub fn reachable_rooms(d: &Dungeon) -> BTreeSet<RoomCoord> {
    let mut seen = BTreeSet::from([d.start]);
    let mut queue = VecDeque::from([d.start]);
    while let Some(room) = queue.pop_front() {
        for dir in Direction::ALL {
            if d.door(room, dir).is_some() {
                let nb = d.neighbor(room, dir).expect("door leads inside the grid");
                if seen.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
    }
    seen
}

/// Wall and water fractions pooled over the floor regions of `rooms`.
pub fn wall_water_pct(d: &Dungeon, rooms: &BTreeSet<RoomCoord>) -> (f64, f64) {
    let (wall, water, total) = wall_water_counts(d, rooms);
    if total == 0 {
        return (0.0, 0.0);
    }
    (wall as f64 / total as f64, water as f64 / total as f64)
}

fn wall_water_counts(d: &Dungeon, rooms: &BTreeSet<RoomCoord>) -> (usize, usize, usize) {
    let vocab = TileVocabulary::builtin(Game::Zelda);
    let wall_t = vocab.require_role(TileRole::Wall);
    let water_t = vocab.require_role(TileRole::Water);
    let (mut wall, mut water, mut total) = (0, 0, 0);
    for &room in rooms {
        let Some(g) = d.room(room) else { continue };
        for r in INTERIOR_ROWS {
            for c in INTERIOR_COLS {
                let t = g.get(r, c);
                wall += (t == wall_t) as usize;
                water += (t == water_t) as usize;
                total += 1;
            }
        }
    }
    (wall, water, total)
}

/// Decile of `count / total` computed exactly, clamped to 9.
fn decile(count: usize, total: usize) -> usize {
    (count * 10).checked_div(total).map_or(0, |d| d.min(9))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cell {
    Blocked,
    Floor,
    Water,
}

/// A precomputed move between two land tiles.
#[derive(Clone, Copy)]
struct Edge {
    to: u32,
    cost: u32,
    /// Locked-door index this move passes through.
    lock: Option<u8>,
    /// Water tile crossed with the raft.
    via: Option<u32>,
}

/// Global tile view of a dungeon with every legal move precomputed.
struct Map<'a> {
    d: &'a Dungeon,
    w: usize,
    edges: Vec<Vec<Edge>>,
    /// Key bits picked up on each tile.
    pickup: Vec<u64>,
    raft: Option<usize>,
}

impl<'a> Map<'a> {
    fn new(d: &'a Dungeon) -> Self {
        let vocab = TileVocabulary::builtin(Game::Zelda);
        let floor = vocab.require_role(TileRole::Floor);
        let water = vocab.require_role(TileRole::Water);
        let (h, w) = d.tile_dims();
        let mut cells = vec![Cell::Blocked; h * w];
        for room in d.present_rooms() {
            let g = d.room(room).expect("present");
            for r in 0..d.room_height {
                for c in 0..d.room_width {
                    let t = g.get(r, c);
                    let gi = (room.row * d.room_height + r) * w + room.col * d.room_width + c;
                    cells[gi] = if t == floor {
                        Cell::Floor
                    } else if t == water {
                        Cell::Water
                    } else {
                        Cell::Blocked
                    };
                }
            }
        }
        let mut locked = HashMap::new();
        for (i, door) in d.unique_doors().filter(|x| x.door_type == DoorType::Locked).enumerate() {
            let nb = d.neighbor(door.room, door.direction).expect("inside");
            locked.insert((door.room, door.direction), i as u8);
            locked.insert((nb, door.direction.opposite()), i as u8);
        }
        let mut map = Self {
            d,
            w,
            edges: vec![Vec::new(); h * w],
            pickup: vec![0; h * w],
            raft: None,
        };
        for (i, k) in d.keys.iter().enumerate() {
            let gi = map.global(k.room, k.tile);
            map.pickup[gi] |= 1 << i;
        }
        map.raft = d.raft.map(|r| map.global(r.room, r.tile));
        for from in 0..h * w {
            if cells[from] != Cell::Floor {
                continue;
            }
            for dir in Direction::ALL {
                let Some(next) = map.step(from, dir, h) else { continue };
                let Ok(door) = map.boundary(from, next, dir) else { continue };
                match cells[next] {
                    Cell::Blocked => {}
                    Cell::Floor => map.edges[from].push(Edge {
                        to: next as u32,
                        cost: 1,
                        lock: door.and_then(|k| locked.get(&k).copied()),
                        via: None,
                    }),
                    Cell::Water => {
                        if door.is_some() {
                            continue;
                        }
                        let Some(far) = map.step(next, dir, h) else { continue };
                        if map.boundary(next, far, dir) == Ok(None) && cells[far] == Cell::Floor {
                            map.edges[from].push(Edge {
                                to: far as u32,
                                cost: 2,
                                lock: None,
                                via: Some(next as u32),
                            });
                        }
                    }
                }
            }
        }
        map
    }

    fn global(&self, room: RoomCoord, tile: TilePos) -> usize {
        (room.row * self.d.room_height + tile.row) * self.w + room.col * self.d.room_width + tile.col
    }

    fn local(&self, gi: usize) -> (RoomCoord, TilePos) {
        let (gr, gc) = (gi / self.w, gi % self.w);
        (
            RoomCoord::new(gr / self.d.room_height, gc / self.d.room_width),
            TilePos::new(gr % self.d.room_height, gc % self.d.room_width),
        )
    }

    fn step(&self, gi: usize, dir: Direction, h: usize) -> Option<usize> {
        let (dr, dc) = dir.delta();
        let r = (gi / self.w).checked_add_signed(dr)?;
        let c = (gi % self.w).checked_add_signed(dc)?;
        (r < h && c < self.w).then_some(r * self.w + c)
    }

    /// Crossing between rooms is allowed only from one side of a door to the
    /// other side of the same door. Returns the door when one is crossed.
    fn boundary(&self, from: usize, to: usize, dir: Direction) -> Result<Option<(RoomCoord, Direction)>, ()> {
        let (ra, ta) = self.local(from);
        let (rb, tb) = self.local(to);
        if ra == rb {
            return Ok(None);
        }
        let ok = self.d.door(ra, dir).is_some()
            && self.d.door_tiles(dir).contains(&ta)
            && self.d.door_tiles(dir.opposite()).contains(&tb);
        if ok {
            Ok(Some((ra, dir)))
        } else {
            Err(())
        }
    }

    fn manhattan(&self, a: usize, b: usize) -> u32 {
        ((a / self.w).abs_diff(b / self.w) + (a % self.w).abs_diff(b % self.w)) as u32
    }

    /// Reachability with every lock open and the raft in hand whenever the
    /// dungeon has one. A goal unreachable here is unreachable for real.
    fn relaxed_reachable(&self, from: usize, goal: usize) -> bool {
        let mut seen = vec![false; self.edges.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(p) = stack.pop() {
            if p == goal {
                return true;
            }
            for e in &self.edges[p] {
                let to = e.to as usize;
                if (e.via.is_none() || self.raft.is_some()) && !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        false
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Node {
    pos: u32,
    raft: bool,
    taken: u64,
    opened: u64,
}

impl Node {
    fn held(&self) -> u32 {
        self.taken.count_ones() - self.opened.count_ones()
    }
}

impl Map<'_> {
    fn arrive(&self, mut n: Node) -> Node {
        n.taken |= self.pickup[n.pos as usize];
        if self.raft == Some(n.pos as usize) {
            n.raft = true;
        }
        n
    }

    /// Legal moves from `n` with their cost and crossed water tile.
    fn successors(&self, n: Node, out: &mut Vec<(Node, u32, Option<usize>)>) {
        out.clear();
        for e in &self.edges[n.pos as usize] {
            if e.via.is_some() && !n.raft {
                continue;
            }
            let mut m = Node { pos: e.to, ..n };
            if let Some(lock) = e.lock {
                if m.opened & (1 << lock) == 0 {
                    if n.held() == 0 {
                        continue;
                    }
                    m.opened |= 1 << lock;
                }
            }
            out.push((self.arrive(m), e.cost, e.via.map(|v| v as usize)));
        }
    }

    fn state(&self, n: Node) -> SolveState {
        let (room, tile) = self.local(n.pos as usize);
        SolveState {
            room,
            tile,
            keys_held: n.held(),
            keys_taken: n.taken,
            doors_opened: n.opened,
            raft_held: n.raft,
        }
    }
}

/// Shortest path from the start tile to the Triforce tile, or `None` when
/// there is none within [`STATE_BUDGET`] expansions.
pub fn solve(d: &Dungeon) -> Option<Vec<SolveState>> {
    solve_with_budget(d, STATE_BUDGET)
}

pub fn solve_with_budget(d: &Dungeon, budget: usize) -> Option<Vec<SolveState>> {
    let map = Map::new(d);
    let goal = map.global(d.goal, d.triforce);
    let start_pos = map.global(d.start, d.start_tile);
    if !map.relaxed_reachable(start_pos, goal) {
        return None;
    }
    let start = map.arrive(Node {
        pos: start_pos as u32,
        raft: false,
        taken: 0,
        opened: 0,
    });
    let mut best: FxHashMap<Node, (u32, Option<(Node, Option<usize>)>)> = FxHashMap::default();
    best.insert(start, (0, None));
    let mut heap = BinaryHeap::from([Reverse((map.manhattan(start_pos, goal), 0u32, start))]);
    let mut expanded = 0;
    let mut next = Vec::new();
    while let Some(Reverse((_, g, n))) = heap.pop() {
        if g > best[&n].0 {
            continue;
        }
        if n.pos as usize == goal {
            let mut path = vec![map.state(n)];
            let mut cur = n;
            while let Some((prev, via)) = best[&cur].1 {
                if let Some(w) = via {
                    path.push(map.state(Node { pos: w as u32, ..prev }));
                }
                path.push(map.state(prev));
                cur = prev;
            }
            path.reverse();
            return Some(path);
        }
        expanded += 1;
        if expanded > budget {
            return None;
        }
        map.successors(n, &mut next);
        for &(m, cost, via) in &next {
            let gm = g + cost;
            if best.get(&m).is_none_or(|&(old, _)| gm < old) {
                best.insert(m, (gm, Some((n, via))));
                heap.push(Reverse((gm + map.manhattan(m.pos as usize, goal), gm, m)));
            }
        }
    }
    None
}

/// Room-by-room validity of a solution path: adjacent tiles, door, key and
/// raft rules at every step. Returns the index of the first bad step.
pub fn validate_path(d: &Dungeon, path: &[SolveState]) -> Result<(), usize> {
    let map = Map::new(d);
    let Some(first) = path.first() else { return Err(0) };
    if (first.room, first.tile) != (d.start, d.start_tile) {
        return Err(0);
    }
    let mut i = 1;
    let node = |s: &SolveState| Node {
        pos: map.global(s.room, s.tile) as u32,
        taken: s.keys_taken,
        opened: s.doors_opened,
        raft: s.raft_held,
    };
    let mut succ = Vec::new();
    while i < path.len() {
        let cur = node(&path[i - 1]);
        map.successors(cur, &mut succ);
        let target = node(&path[i]);
        let single = succ.iter().any(|&(m, c, _)| c == 1 && m == target);
        if single {
            i += 1;
            continue;
        }
        // Raft crossing: path[i] is the water tile, path[i + 1] the landing.
        let Some(landing) = path.get(i + 1).map(node) else { return Err(i) };
        let water = map.global(path[i].room, path[i].tile);
        if succ.iter().any(|&(m, c, via)| c == 2 && m == landing && via == Some(water)) {
            i += 2;
        } else {
            return Err(i);
        }
    }
    let last = path.last().expect("non-empty");
    if (last.room, last.tile) != (d.goal, d.triforce) {
        return Err(path.len() - 1);
    }
    Ok(())
}

/// Room sequence of a path with consecutive repeats collapsed.
pub fn room_sequence(path: &[SolveState]) -> Vec<RoomCoord> {
    let mut rooms: Vec<RoomCoord> = path.iter().map(|s| s.room).collect();
    rooms.dedup();
    rooms
}

/// Entries into rooms that had already been exited.
pub fn backtrack_count(rooms: &[RoomCoord]) -> usize {
    let mut exited = BTreeSet::new();
    let mut count = 0;
    for w in rooms.windows(2) {
        exited.insert(w[0]);
        if exited.contains(&w[1]) {
            count += 1;
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DungeonStats {
    pub reachable_rooms: usize,
    pub wall_pct: f64,
    pub water_pct: f64,
    pub wall_decile: usize,
    pub water_decile: usize,
    pub distinct_rooms: usize,
    pub backtracked: usize,
    pub rooms_visited: usize,
    /// Moves in the solution, if any.
    pub path_length: Option<usize>,
    pub fitness: f64,
}

pub fn dungeon_stats(d: &Dungeon) -> DungeonStats {
    let reachable = reachable_rooms(d);
    let (wall, water, total) = wall_water_counts(d, &reachable);
    let (wall_pct, water_pct) = wall_water_pct(d, &reachable);
    let path = solve(d);
    let rooms = path.as_deref().map(room_sequence).unwrap_or_default();
    let visited: BTreeSet<_> = rooms.iter().copied().collect();
    DungeonStats {
        reachable_rooms: reachable.len(),
        wall_pct,
        water_pct,
        wall_decile: decile(wall, total),
        water_decile: decile(water, total),
        distinct_rooms: distinct_grids(d.rooms.iter().flatten()),
        backtracked: backtrack_count(&rooms),
        rooms_visited: visited.len(),
        path_length: path.as_ref().map(|p| p.len() - 1),
        fitness: if path.is_some() {
            visited.len() as f64 / reachable.len() as f64
        } else {
            0.0
        },
    }
}

pub fn fitness(d: &Dungeon) -> f64 {
    dungeon_stats(d).fitness
}

pub fn bin(stats: &DungeonStats, scheme: Scheme, r: &SchemeRanges) -> Result<Vec<usize>, EvalError> {
    match scheme {
        Scheme::Wwr => Ok(vec![
            stats.wall_decile,
            stats.water_decile,
            count_bin(stats.reachable_rooms, r.rooms),
        ]),
        Scheme::DistinctBtr => Ok(vec![
            count_bin(stats.distinct_rooms, r.rooms),
            stats.backtracked.min(r.backtrack_bins - 1),
            count_bin(stats.reachable_rooms, r.rooms),
        ]),
        _ => Err(EvalError::SchemeMismatch {
            scheme,
            game: Game::Zelda,
        }),
    }
}
