use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AssemblyError;
use crate::corpus::{TileRole, TileVocabulary};
use crate::decoder::SegmentDecoder;
use crate::direct::aux;
use crate::grid::TileGrid;
use crate::rng::{mix_seed, seeded};
use crate::Game;

/// Row of the left/right door openings.
pub const DOOR_ROW: usize = 5;
/// Column of the up/down door openings.
pub const DOOR_COL: usize = 7;

const TAG_KEY: u64 = 1;
const TAG_PUZZLE: u64 = 2;
const TAG_RAFT: u64 = 3;
const TAG_TRIFORCE: u64 = 4;
const TAG_ENEMY: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RoomCoord {
    pub row: usize,
    pub col: usize,
}

impl RoomCoord {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Tile position inside a room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TilePos {
    pub row: usize,
    pub col: usize,
}

impl TilePos {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Down, Direction::Left, Direction::Right];

    pub fn opposite(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    /// (row, col) step.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::Up => (-1, 0),
            Direction::Down => (1, 0),
            Direction::Left => (0, -1),
            Direction::Right => (0, 1),
        }
    }

    fn code(self) -> u64 {
        self as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DoorType {
    Plain,
    PuzzleLocked,
    SoftLocked,
    Bombable,
    Locked,
}

/// Door type for a value in [−1, 1]:
/// plain [−1, 0], puzzle-locked (0, 0.25], soft-locked (0.25, 0.5],
/// bomb-able (0.5, 0.75], locked (0.75, 1].
pub fn bucket_door(v: f64) -> Result<DoorType, AssemblyError> {
    if !(-1.0..=1.0).contains(&v) {
        return Err(AssemblyError::OutOfRange(v));
    }
    Ok(if v <= 0.0 {
        DoorType::Plain
    } else if v <= 0.25 {
        DoorType::PuzzleLocked
    } else if v <= 0.5 {
        DoorType::SoftLocked
    } else if v <= 0.75 {
        DoorType::Bombable
    } else {
        DoorType::Locked
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DoorRecord {
    pub room: RoomCoord,
    pub direction: Direction,
    pub door_type: DoorType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Item {
    pub room: RoomCoord,
    pub tile: TilePos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PuzzleBlock {
    pub room: RoomCoord,
    pub tile: TilePos,
    pub push: Direction,
}

/// A grid of optional rooms with doors and items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dungeon {
    pub rows: usize,
    pub cols: usize,
    pub room_height: usize,
    pub room_width: usize,
    /// Row-major; `None` for absent rooms.
    pub rooms: Vec<Option<TileGrid>>,
    /// Both sides of every door, sorted by room then direction.
    pub doors: Vec<DoorRecord>,
    pub keys: Vec<Item>,
    pub puzzle_blocks: Vec<PuzzleBlock>,
    pub raft: Option<Item>,
    pub start: RoomCoord,
    pub start_tile: TilePos,
    pub goal: RoomCoord,
    pub triforce: TilePos,
    /// Decorative; they do not affect solving.
    pub enemies: Vec<Item>,
}

/// This room's side of the door in `dir`: two tiles crossing the wall ring.
pub fn door_tiles(room_height: usize, room_width: usize, dir: Direction) -> [TilePos; 2] {
    match dir {
        Direction::Left => [TilePos::new(DOOR_ROW, 0), TilePos::new(DOOR_ROW, 1)],
        Direction::Right => [TilePos::new(DOOR_ROW, room_width - 2), TilePos::new(DOOR_ROW, room_width - 1)],
        Direction::Up => [TilePos::new(0, DOOR_COL), TilePos::new(1, DOOR_COL)],
        Direction::Down => [TilePos::new(room_height - 2, DOOR_COL), TilePos::new(room_height - 1, DOOR_COL)],
    }
}

impl Dungeon {
    pub fn index(&self, room: RoomCoord) -> usize {
        room.row * self.cols + room.col
    }

    pub fn room(&self, room: RoomCoord) -> Option<&TileGrid> {
        if room.row >= self.rows || room.col >= self.cols {
            return None;
        }
        self.rooms[self.index(room)].as_ref()
    }

    pub fn is_present(&self, room: RoomCoord) -> bool {
        self.room(room).is_some()
    }

    pub fn present_rooms(&self) -> impl Iterator<Item = RoomCoord> + '_ {
        (0..self.rows * self.cols)
            .filter(|&i| self.rooms[i].is_some())
            .map(|i| RoomCoord::new(i / self.cols, i % self.cols))
    }

    pub fn present_count(&self) -> usize {
        self.rooms.iter().filter(|r| r.is_some()).count()
    }

    pub fn neighbor(&self, room: RoomCoord, dir: Direction) -> Option<RoomCoord> {
        let (dr, dc) = dir.delta();
        let row = room.row.checked_add_signed(dr)?;
        let col = room.col.checked_add_signed(dc)?;
        (row < self.rows && col < self.cols).then_some(RoomCoord::new(row, col))
    }

    pub fn door(&self, room: RoomCoord, dir: Direction) -> Option<DoorType> {
        self.doors
            .binary_search_by(|d| (d.room, d.direction).cmp(&(room, dir)))
            .ok()
            .map(|i| self.doors[i].door_type)
    }

    /// Each door once, from its upper or left room.
    pub fn unique_doors(&self) -> impl Iterator<Item = &DoorRecord> {
        self.doors
            .iter()
            .filter(|d| matches!(d.direction, Direction::Right | Direction::Down))
    }

    pub fn locked_door_count(&self) -> usize {
        self.unique_doors().filter(|d| d.door_type == DoorType::Locked).count()
    }

    pub fn door_tiles(&self, dir: Direction) -> [TilePos; 2] {
        door_tiles(self.room_height, self.room_width, dir)
    }

    /// Whether `tile` of `room` belongs to one of the room's doors.
    pub fn is_door_tile(&self, room: RoomCoord, tile: TilePos) -> bool {
        Direction::ALL
            .into_iter()
            .any(|d| self.door(room, d).is_some() && self.door_tiles(d).contains(&tile))
    }

    /// Global tile height and width of the whole grid.
    pub fn tile_dims(&self) -> (usize, usize) {
        (self.rows * self.room_height, self.cols * self.room_width)
    }
}

fn floor_tiles(room: &TileGrid, floor: u8, excluded: &BTreeSet<TilePos>) -> Vec<TilePos> {
    (0..room.height())
        .flat_map(|r| (0..room.width()).map(move |c| TilePos::new(r, c)))
        .filter(|t| room.get(t.row, t.col) == floor && !excluded.contains(t))
        .collect()
}

/// Floor tile closest to the room centre (Manhattan), first in row-major on
/// ties. A room without floor gets its centre carved.
fn central_floor(room: &mut TileGrid, floor: u8) -> TilePos {
    let center = TilePos::new(room.height() / 2, room.width() / 2 - 1);
    let best = floor_tiles(room, floor, &BTreeSet::new())
        .into_iter()
        .min_by_key(|t| t.row.abs_diff(center.row) + t.col.abs_diff(center.col));
    best.unwrap_or_else(|| {
        room.set(center.row, center.col, floor);
        center
    })
}

/// Seed for an item placement: the IEEE bit pattern of the controlling
/// output mixed with the room and a purpose tag.
fn placement_seed(value: f64, room: RoomCoord, extra: u64, tag: u64) -> u64 {
    mix_seed(&[value.to_bits(), room.row as u64, room.col as u64, extra, tag])
}

pub fn assemble_zelda(
    outputs: &[Vec<f64>],
    decoder: &dyn SegmentDecoder,
    rows: usize,
    cols: usize,
    latent: usize,
) -> Result<Dungeon, AssemblyError> {
    let vocab = TileVocabulary::builtin(Game::Zelda);
    let floor = vocab.require_role(TileRole::Floor);
    let aux_of = |i: usize| &outputs[i][latent..];
    let present: Vec<bool> = (0..rows * cols).map(|i| aux_of(i)[aux::ROOM_PRESENCE] > 0.0).collect();
    if !present.iter().any(|&p| p) {
        return Err(AssemblyError::NoRoomsPresent);
    }
    let mut rooms: Vec<Option<TileGrid>> = Vec::with_capacity(rows * cols);
    for (i, &p) in present.iter().enumerate() {
        rooms.push(if p { Some(decoder.decode(&outputs[i][..latent])?) } else { None });
    }
    let (room_height, room_width) = decoder.segment_shape();
    let coord = |i: usize| RoomCoord::new(i / cols, i % cols);

    // Doors, decided by the upper/left room and mirrored into its neighbour.
    let mut doors = Vec::new();
    let mut owners: Vec<(DoorRecord, f64)> = Vec::new();
    for i in 0..rows * cols {
        if !present[i] {
            continue;
        }
        let a = aux_of(i);
        let (r, c) = (i / cols, i % cols);
        let candidates = [
            (c + 1 < cols, i + 1, Direction::Right, aux::RIGHT_DOOR, aux::RIGHT_DOOR_TYPE),
            (r + 1 < rows, i + cols, Direction::Down, aux::DOWN_DOOR, aux::DOWN_DOOR_TYPE),
        ];
        for (inside, j, dir, presence, kind) in candidates {
            if !inside || !present[j] || a[presence] <= 0.0 {
                continue;
            }
            let door_type = bucket_door(a[kind])?;
            let here = DoorRecord {
                room: coord(i),
                direction: dir,
                door_type,
            };
            doors.push(here);
            doors.push(DoorRecord {
                room: coord(j),
                direction: dir.opposite(),
                door_type,
            });
            owners.push((here, a[kind]));
            for (room_index, side) in [(i, dir), (j, dir.opposite())] {
                let grid = rooms[room_index].as_mut().expect("present");
                for t in door_tiles(room_height, room_width, side) {
                    grid.set(t.row, t.col, floor);
                }
            }
        }
    }
    doors.sort();

    let mut door_tile_sets: Vec<BTreeSet<TilePos>> = vec![BTreeSet::new(); rows * cols];
    for d in &doors {
        let i = d.room.row * cols + d.room.col;
        door_tile_sets[i].extend(door_tiles(room_height, room_width, d.direction));
    }

    // Start and goal: smallest and largest start/end preference, first in
    // row-major order on ties; the goal is chosen among the other rooms.
    let pref = |i: usize| aux_of(i)[aux::START_END_PREFERENCE];
    let present_idx: Vec<usize> = (0..rows * cols).filter(|&i| present[i]).collect();
    let mut start_i = present_idx[0];
    for &i in &present_idx {
        if pref(i) < pref(start_i) {
            start_i = i;
        }
    }
    let mut goal_i = start_i;
    for &i in present_idx.iter().filter(|&&i| i != start_i) {
        if goal_i == start_i || pref(i) > pref(goal_i) {
            goal_i = i;
        }
    }
    let start_tile = central_floor(rooms[start_i].as_mut().expect("present"), floor);

    let mut occupied: Vec<BTreeSet<TilePos>> = door_tile_sets.clone();
    occupied[start_i].insert(start_tile);
    let pick = |rng: &mut crate::rng::StreamRng, options: &[Item]| options[rng.random_range(0..options.len())];

    // Triforce.
    let triforce = {
        let grid = rooms[goal_i].as_mut().expect("present");
        let options = floor_tiles(grid, floor, &occupied[goal_i]);
        let tile = if options.is_empty() {
            central_floor(grid, floor)
        } else {
            let mut rng = seeded(placement_seed(pref(goal_i), coord(goal_i), 0, TAG_TRIFORCE));
            options[rng.random_range(0..options.len())]
        };
        occupied[goal_i].insert(tile);
        tile
    };

    let free_in = |i: usize, occupied: &[BTreeSet<TilePos>], rooms: &[Option<TileGrid>]| -> Vec<Item> {
        rooms[i]
            .as_ref()
            .map(|g| {
                floor_tiles(g, floor, &occupied[i])
                    .into_iter()
                    .map(|tile| Item { room: coord(i), tile })
                    .collect()
            })
            .unwrap_or_default()
    };

    // Keys anywhere in the dungeon, puzzle blocks in the door's own room.
    let mut keys = Vec::new();
    let mut puzzle_blocks = Vec::new();
    for (door, value) in &owners {
        let owner = door.room.row * cols + door.room.col;
        match door.door_type {
            DoorType::Locked => {
                let mut rng = seeded(placement_seed(*value, door.room, door.direction.code(), TAG_KEY));
                let mut options: Vec<Item> = present_idx.iter().flat_map(|&i| free_in(i, &occupied, &rooms)).collect();
                if options.is_empty() {
                    options = present_idx
                        .iter()
                        .flat_map(|&i| free_in(i, &door_tile_sets, &rooms))
                        .collect();
                }
                let item = pick(&mut rng, &options);
                occupied[item.room.row * cols + item.room.col].insert(item.tile);
                keys.push(item);
            }
            DoorType::PuzzleLocked => {
                let mut rng = seeded(placement_seed(*value, door.room, door.direction.code(), TAG_PUZZLE));
                let options = free_in(owner, &occupied, &rooms);
                let item = if options.is_empty() {
                    Item {
                        room: door.room,
                        tile: door_tiles(room_height, room_width, door.direction)[0],
                    }
                } else {
                    pick(&mut rng, &options)
                };
                let push = Direction::ALL[rng.random_range(0..4)];
                occupied[owner].insert(item.tile);
                puzzle_blocks.push(PuzzleBlock {
                    room: item.room,
                    tile: item.tile,
                    push,
                });
            }
            _ => {}
        }
    }

    // Raft in the room with the highest raft preference.
    let raft_pref = |i: usize| aux_of(i)[aux::RAFT_PREFERENCE];
    let mut raft_i = present_idx[0];
    for &i in &present_idx {
        if raft_pref(i) > raft_pref(raft_i) {
            raft_i = i;
        }
    }
    let raft = {
        let options = free_in(raft_i, &occupied, &rooms);
        (!options.is_empty()).then(|| {
            let mut rng = seeded(placement_seed(raft_pref(raft_i), coord(raft_i), 0, TAG_RAFT));
            let item = pick(&mut rng, &options);
            occupied[raft_i].insert(item.tile);
            item
        })
    };

    let mut enemies = Vec::new();
    for &i in &present_idx {
        let room = coord(i);
        let grid = rooms[i].as_ref().expect("present");
        let mut free = floor_tiles(grid, floor, &occupied[i]);
        let mut rng = seeded(mix_seed(&[room.row as u64, room.col as u64, TAG_ENEMY]));
        let count = rng.random_range(0..=2usize).min(free.len());
        for _ in 0..count {
            let tile = free.swap_remove(rng.random_range(0..free.len()));
            enemies.push(Item { room, tile });
        }
    }

    Ok(Dungeon {
        rows,
        cols,
        room_height,
        room_width,
        rooms,
        doors,
        keys,
        puzzle_blocks,
        raft,
        start: coord(start_i),
        start_tile,
        goal: coord(goal_i),
        triforce,
        enemies,
    })
}
