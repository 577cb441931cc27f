//! Shared helpers: hand-built dungeons and brute-force reference
//! implementations written without the library's internals.

#![allow(dead_code)]

pub mod checks;

use std::collections::{BTreeSet, HashSet, VecDeque};

use levelgen_core::assembly::{Direction, DoorRecord, DoorType, Dungeon, Item, RoomCoord, TilePos};
use levelgen_core::TileGrid;

pub const H: usize = 11;
pub const W: usize = 16;
pub const FLOOR: u8 = 0;
pub const WALL: u8 = 1;
pub const WATER: u8 = 2;

/// Room with a two-tile wall ring and an open floor interior.
pub fn open_room() -> TileGrid {
    let mut g = TileGrid::filled(W, H, FLOOR);
    for r in 0..H {
        for c in 0..W {
            if r < 2 || r >= H - 2 || c < 2 || c >= W - 2 {
                g.set(r, c, WALL);
            }
        }
    }
    g
}

pub fn rc(row: usize, col: usize) -> RoomCoord {
    RoomCoord::new(row, col)
}

pub fn tp(row: usize, col: usize) -> TilePos {
    TilePos::new(row, col)
}

/// Builder for dungeons assembled by hand.
pub struct Hand {
    pub d: Dungeon,
}

impl Hand {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            d: Dungeon {
                rows,
                cols,
                room_height: H,
                room_width: W,
                rooms: vec![None; rows * cols],
                doors: Vec::new(),
                keys: Vec::new(),
                puzzle_blocks: Vec::new(),
                raft: None,
                start: rc(0, 0),
                start_tile: tp(5, 7),
                goal: rc(0, 0),
                triforce: tp(5, 7),
                enemies: Vec::new(),
            },
        }
    }

    pub fn room(mut self, r: usize, c: usize) -> Self {
        self.d.rooms[r * self.d.cols + c] = Some(open_room());
        self
    }

    pub fn tile(mut self, room: (usize, usize), r: usize, c: usize, t: u8) -> Self {
        let cols = self.d.cols;
        self.d.rooms[room.0 * cols + room.1].as_mut().unwrap().set(r, c, t);
        self
    }

    /// Door from `room` towards `dir`; carved and mirrored.
    pub fn door(mut self, room: (usize, usize), dir: Direction, kind: DoorType) -> Self {
        let a = rc(room.0, room.1);
        let b = self.d.neighbor(a, dir).expect("neighbour inside grid");
        for (x, side) in [(a, dir), (b, dir.opposite())] {
            let idx = x.row * self.d.cols + x.col;
            let g = self.d.rooms[idx].as_mut().expect("door between present rooms");
            for t in levelgen_core::assembly::door_tiles(H, W, side) {
                g.set(t.row, t.col, FLOOR);
            }
            self.d.doors.push(DoorRecord {
                room: x,
                direction: side,
                door_type: kind,
            });
        }
        self.d.doors.sort();
        self
    }

    pub fn key(mut self, room: (usize, usize), r: usize, c: usize) -> Self {
        self.d.keys.push(Item {
            room: rc(room.0, room.1),
            tile: tp(r, c),
        });
        self
    }

    pub fn raft(mut self, room: (usize, usize), r: usize, c: usize) -> Self {
        self.d.raft = Some(Item {
            room: rc(room.0, room.1),
            tile: tp(r, c),
        });
        self
    }

    pub fn start(mut self, room: (usize, usize), r: usize, c: usize) -> Self {
        self.d.start = rc(room.0, room.1);
        self.d.start_tile = tp(r, c);
        self
    }

    pub fn goal(mut self, room: (usize, usize), r: usize, c: usize) -> Self {
        self.d.goal = rc(room.0, room.1);
        self.d.triforce = tp(r, c);
        self
    }

    pub fn build(self) -> Dungeon {
        self.d
    }
}

/// Tile of the whole dungeon at global (row, col); absent rooms are wall.
fn global_tile(d: &Dungeon, r: usize, c: usize) -> u8 {
    let room = rc(r / H, c / W);
    match d.room(room) {
        Some(g) => g.get(r % H, c % W),
        None => WALL,
    }
}

/// Pairs of global tiles joined across a room boundary, with the lock flag.
fn crossings(d: &Dungeon) -> Vec<((usize, usize), (usize, usize), bool)> {
    let mut out = Vec::new();
    for door in &d.doors {
        let (r0, c0) = (door.room.row * H, door.room.col * W);
        let (from, to) = match door.direction {
            Direction::Right => ((r0 + 5, c0 + W - 1), (r0 + 5, c0 + W)),
            Direction::Left => ((r0 + 5, c0), (r0 + 5, c0 - 1)),
            Direction::Down => ((r0 + H - 1, c0 + 7), (r0 + H, c0 + 7)),
            Direction::Up => ((r0, c0 + 7), (r0 - 1, c0 + 7)),
        };
        out.push((from, to, door.door_type == DoorType::Locked));
    }
    out
}

/// Unit-step breadth-first search over (tile, keys taken, doors opened, raft,
/// crossing direction). A raft crossing is two explicit steps: onto the
/// water and straight off it onto floor in the same room.
pub fn oracle_solve_len(d: &Dungeon) -> Option<usize> {
    let gh = d.rows * H;
    let gw = d.cols * W;
    let cross = crossings(d);
    // Locked doors get an id per unordered pair.
    let mut lock_ids: Vec<((usize, usize), (usize, usize))> = Vec::new();
    for &(a, b, locked) in &cross {
        if locked && !lock_ids.contains(&(b, a)) && !lock_ids.contains(&(a, b)) {
            lock_ids.push((a, b));
        }
    }
    let lock_of = |a: (usize, usize), b: (usize, usize)| lock_ids.iter().position(|&p| p == (a, b) || p == (b, a));
    let key_tiles: Vec<(usize, usize)> = d
        .keys
        .iter()
        .map(|k| (k.room.row * H + k.tile.row, k.room.col * W + k.tile.col))
        .collect();
    let raft_tile = d.raft.map(|k| (k.room.row * H + k.tile.row, k.room.col * W + k.tile.col));
    let goal = (d.goal.row * H + d.triforce.row, d.goal.col * W + d.triforce.col);
    let start = (d.start.row * H + d.start_tile.row, d.start.col * W + d.start_tile.col);
    type State = ((usize, usize), u64, u64, bool, Option<(isize, isize)>);
    let pick = |pos: (usize, usize), mut keys: u64, mut raft: bool| {
        for (i, &k) in key_tiles.iter().enumerate() {
            if k == pos {
                keys |= 1 << i;
            }
        }
        if raft_tile == Some(pos) {
            raft = true;
        }
        (keys, raft)
    };
    let (k0, r0) = pick(start, 0, false);
    let s0: State = (start, k0, 0, r0, None);
    let mut seen: HashSet<State> = HashSet::from([s0]);
    let mut queue = VecDeque::from([(s0, 0usize)]);
    while let Some(((pos, keys, opened, raft, crossing), dist)) = queue.pop_front() {
        if pos == goal && crossing.is_none() {
            return Some(dist);
        }
        let dirs: Vec<(isize, isize)> = match crossing {
            Some(dir) => vec![dir],
            None => vec![(-1, 0), (1, 0), (0, -1), (0, 1)],
        };
        for (dr, dc) in dirs {
            let (Some(nr), Some(nc)) = (pos.0.checked_add_signed(dr), pos.1.checked_add_signed(dc)) else {
                continue;
            };
            if nr >= gh || nc >= gw {
                continue;
            }
            let next = (nr, nc);
            let same_room = (pos.0 / H, pos.1 / W) == (nr / H, nc / W);
            let mut opened2 = opened;
            if !same_room {
                let Some(&(_, _, locked)) = cross.iter().find(|&&(a, b, _)| a == pos && b == next) else {
                    continue;
                };
                if locked {
                    let id = lock_of(pos, next).unwrap();
                    if opened & (1 << id) == 0 {
                        if keys.count_ones() <= opened.count_ones() {
                            continue;
                        }
                        opened2 |= 1 << id;
                    }
                }
            }
            let t = global_tile(d, nr, nc);
            let crossing2 = match (t, crossing) {
                (FLOOR, _) => None,
                (WATER, None) if raft && same_room => Some((dr, dc)),
                _ => continue,
            };
            if crossing.is_some() && !same_room {
                continue;
            }
            let (keys2, raft2) = pick(next, keys, raft);
            let s: State = (next, keys2, opened2, raft2, crossing2);
            if seen.insert(s) {
                queue.push_back((s, dist + 1));
            }
        }
    }
    None
}

/// Rooms linked to the start by doors, by flood fill over the door list.
pub fn oracle_reachable(d: &Dungeon) -> BTreeSet<RoomCoord> {
    let mut seen = BTreeSet::from([d.start]);
    let mut changed = true;
    while changed {
        changed = false;
        for door in &d.doors {
            if seen.contains(&door.room) {
                let (r, c) = (door.room.row as isize, door.room.col as isize);
                let (dr, dc) = match door.direction {
                    Direction::Up => (-1, 0),
                    Direction::Down => (1, 0),
                    Direction::Left => (0, -1),
                    Direction::Right => (0, 1),
                };
                if seen.insert(rc((r + dr) as usize, (c + dc) as usize)) {
                    changed = true;
                }
            }
        }
    }
    seen
}

/// Pooled wall and water fractions over rows 2..=8, columns 2..=13.
pub fn oracle_wall_water(d: &Dungeon, rooms: &BTreeSet<RoomCoord>) -> (f64, f64) {
    let (mut wall, mut water, mut n) = (0.0, 0.0, 0.0);
    for room in rooms {
        let g = d.room(*room).unwrap();
        for r in 2..=8 {
            for c in 2..=13 {
                match g.get(r, c) {
                    WALL => wall += 1.0,
                    WATER => water += 1.0,
                    _ => {}
                }
                n += 1.0;
            }
        }
    }
    if n == 0.0 {
        (0.0, 0.0)
    } else {
        (wall / n, water / n)
    }
}

/// Loop form of the alternation sum.
pub fn oracle_alternation(s: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut i = 1;
    while i < s.len() {
        let d = s[i - 1] - s[i];
        total += if d < 0.0 { -d } else { d };
        i += 1;
    }
    total
}

/// Distinct grids by pairwise cell comparison.
pub fn oracle_distinct(grids: &[TileGrid]) -> usize {
    let mut reps: Vec<&TileGrid> = Vec::new();
    for g in grids {
        let dup = reps.iter().any(|r| {
            r.width() == g.width()
                && r.height() == g.height()
                && (0..g.height()).all(|y| (0..g.width()).all(|x| r.get(y, x) == g.get(y, x)))
        });
        if !dup {
            reps.push(g);
        }
    }
    reps.len()
}

/// Bin by counting the bin edges at or below `v`.
pub fn oracle_range_bin(v: f64, lo: f64, hi: f64, n: usize) -> usize {
    let mut k = 0;
    for e in 1..n {
        if v >= lo + (hi - lo) * e as f64 / n as f64 {
            k = e;
        }
    }
    k
}

/// A hand-built dungeon with the expected outcome.
pub struct Case {
    pub name: &'static str,
    pub dungeon: Dungeon,
    pub solvable: bool,
    /// Backtracks along the solution, where it is forced by the layout.
    pub backtracks: Option<usize>,
}

pub fn hand_suite() -> Vec<Case> {
    use Direction::*;
    use DoorType::*;
    let case = |name, dungeon, solvable, backtracks| Case {
        name,
        dungeon,
        solvable,
        backtracks,
    };
    let mut wall_detour = Hand::new(1, 1).room(0, 0).start((0, 0), 5, 7).goal((0, 0), 5, 12);
    for r in 2..8 {
        wall_detour = wall_detour.tile((0, 0), r, 10, WALL);
    }
    let water_column = |h: Hand, room: (usize, usize), cols: &[usize]| {
        let mut h = h;
        for r in 2..9 {
            for &c in cols {
                h = h.tile(room, r, c, WATER);
            }
        }
        h
    };
    let raft_room = |with_raft: bool, cols: &[usize]| {
        let h = Hand::new(1, 1).room(0, 0).start((0, 0), 5, 7).goal((0, 0), 5, 12);
        let h = water_column(h, (0, 0), cols);
        if with_raft {
            h.raft((0, 0), 3, 3)
        } else {
            h
        }
    };
    let mut walled = Hand::new(1, 2)
        .room(0, 0)
        .room(0, 1)
        .door((0, 0), Right, Plain)
        .start((0, 0), 5, 7)
        .goal((0, 1), 5, 7);
    for r in 2..9 {
        walled = walled.tile((0, 1), r, 2, WALL);
    }
    vec![
        case(
            "same room",
            Hand::new(1, 1).room(0, 0).start((0, 0), 5, 7).goal((0, 0), 5, 12).build(),
            true,
            Some(0),
        ),
        case("wall detour", wall_detour.build(), true, Some(0)),
        case(
            "plain door right",
            Hand::new(1, 2)
                .room(0, 0)
                .room(0, 1)
                .door((0, 0), Right, Plain)
                .start((0, 0), 5, 7)
                .goal((0, 1), 5, 7)
                .build(),
            true,
            Some(0),
        ),
        case(
            "plain door down",
            Hand::new(2, 1)
                .room(0, 0)
                .room(1, 0)
                .door((0, 0), Down, Plain)
                .start((0, 0), 3, 3)
                .goal((1, 0), 8, 12)
                .build(),
            true,
            Some(0),
        ),
        case(
            "locked door, key on the way",
            Hand::new(1, 2)
                .room(0, 0)
                .room(0, 1)
                .door((0, 0), Right, Locked)
                .key((0, 0), 3, 3)
                .start((0, 0), 5, 7)
                .goal((0, 1), 5, 7)
                .build(),
            true,
            Some(0),
        ),
        case(
            "key detour through side room",
            Hand::new(2, 2)
                .room(0, 0)
                .room(0, 1)
                .room(1, 0)
                .door((0, 0), Right, Locked)
                .door((0, 0), Down, Plain)
                .key((1, 0), 7, 7)
                .start((0, 0), 5, 7)
                .goal((0, 1), 5, 7)
                .build(),
            true,
            Some(1),
        ),
        case(
            "locked door without key",
            Hand::new(1, 2)
                .room(0, 0)
                .room(0, 1)
                .door((0, 0), Right, Locked)
                .start((0, 0), 5, 7)
                .goal((0, 1), 5, 7)
                .build(),
            false,
            None,
        ),
        case(
            "two locks, one key",
            Hand::new(1, 3)
                .room(0, 0)
                .room(0, 1)
                .room(0, 2)
                .door((0, 0), Right, Locked)
                .door((0, 1), Right, Locked)
                .key((0, 0), 3, 3)
                .start((0, 0), 5, 7)
                .goal((0, 2), 5, 7)
                .build(),
            false,
            None,
        ),
        case(
            "two locks, two keys",
            Hand::new(1, 3)
                .room(0, 0)
                .room(0, 1)
                .room(0, 2)
                .door((0, 0), Right, Locked)
                .door((0, 1), Right, Locked)
                .key((0, 0), 3, 3)
                .key((0, 1), 8, 12)
                .start((0, 0), 5, 7)
                .goal((0, 2), 5, 7)
                .build(),
            true,
            Some(0),
        ),
        case("raft over one water column", raft_room(true, &[10]).build(), true, Some(0)),
        case("water without raft", raft_room(false, &[10]).build(), false, None),
        case("water two tiles wide", raft_room(true, &[10, 11]).build(), false, None),
        case(
            "raft fetched from side room",
            water_column(
                Hand::new(2, 2)
                    .room(0, 0)
                    .room(0, 1)
                    .room(1, 0)
                    .door((0, 0), Right, Plain)
                    .door((0, 0), Down, Plain)
                    .raft((1, 0), 7, 7)
                    .start((0, 0), 5, 7)
                    .goal((0, 1), 5, 12),
                (0, 1),
                &[9],
            )
            .build(),
            true,
            Some(1),
        ),
        case(
            "no door to goal room",
            Hand::new(1, 2)
                .room(0, 0)
                .room(0, 1)
                .start((0, 0), 5, 7)
                .goal((0, 1), 5, 7)
                .build(),
            false,
            None,
        ),
        case(
            "soft, bombable and puzzle doors",
            Hand::new(1, 4)
                .room(0, 0)
                .room(0, 1)
                .room(0, 2)
                .room(0, 3)
                .door((0, 0), Right, SoftLocked)
                .door((0, 1), Right, Bombable)
                .door((0, 2), Right, PuzzleLocked)
                .start((0, 0), 5, 7)
                .goal((0, 3), 5, 7)
                .build(),
            true,
            Some(0),
        ),
        case(
            "around an absent room",
            Hand::new(2, 2)
                .room(0, 0)
                .room(1, 0)
                .room(1, 1)
                .door((0, 0), Down, Plain)
                .door((1, 0), Right, Plain)
                .start((0, 0), 5, 7)
                .goal((1, 1), 5, 7)
                .build(),
            true,
            Some(0),
        ),
        case("door blocked from inside", walled.build(), false, None),
    ]
}
