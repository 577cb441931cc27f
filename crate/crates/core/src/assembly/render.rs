use super::zelda::{DoorType, Dungeon};
use super::{MarioLevel, Phenotype};
use crate::corpus::TileVocabulary;
use crate::grid::TileGrid;
use crate::Game;

/// Letter drawn on a door's tiles.
pub fn door_symbol(t: DoorType) -> char {
    match t {
        DoorType::Plain => 'D',
        DoorType::Locked => 'L',
        DoorType::SoftLocked => 'S',
        DoorType::Bombable => 'B',
        DoorType::PuzzleLocked => 'P',
    }
}

fn grid_lines(tiles: &TileGrid, vocab: &TileVocabulary) -> Vec<Vec<char>> {
    (0..tiles.height())
        .map(|r| tiles.row(r).iter().map(|&t| vocab.symbol(t)).collect())
        .collect()
}

fn join(lines: Vec<Vec<char>>) -> String {
    let mut out = String::new();
    for l in lines {
        out.extend(l);
        out.push('\n');
    }
    out
}

/// One character per tile, using the vocabulary symbols.
pub fn render_mario(level: &MarioLevel) -> String {
    join(grid_lines(&level.tiles, TileVocabulary::builtin(Game::Mario)))
}

/// Character canvas of a dungeon, one char per tile; absent rooms are blank.
pub fn dungeon_canvas(d: &Dungeon) -> Vec<Vec<char>> {
    let vocab = TileVocabulary::builtin(Game::Zelda);
    let (h, w) = d.tile_dims();
    let mut canvas = vec![vec![' '; w]; h];
    let mut put = |room: super::RoomCoord, tile: super::TilePos, ch: char| {
        canvas[room.row * d.room_height + tile.row][room.col * d.room_width + tile.col] = ch;
    };
    for room in d.present_rooms() {
        let grid = d.room(room).expect("present");
        for r in 0..grid.height() {
            for c in 0..grid.width() {
                put(room, super::TilePos::new(r, c), vocab.symbol(grid.get(r, c)));
            }
        }
    }
    for door in &d.doors {
        for t in d.door_tiles(door.direction) {
            put(door.room, t, door_symbol(door.door_type));
        }
    }
    for e in &d.enemies {
        put(e.room, e.tile, 'e');
    }
    for b in &d.puzzle_blocks {
        put(b.room, b.tile, 'p');
    }
    for k in &d.keys {
        put(k.room, k.tile, 'K');
    }
    if let Some(raft) = d.raft {
        put(raft.room, raft.tile, 'R');
    }
    put(d.goal, d.triforce, 'T');
    put(d.start, d.start_tile, 'S');
    canvas
}

pub fn render_dungeon(d: &Dungeon) -> String {
    join(dungeon_canvas(d))
}

pub fn render_phenotype(p: &Phenotype) -> String {
    match p {
        Phenotype::Mario(m) => render_mario(m),
        Phenotype::Zelda(d) => render_dungeon(d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_zelda, Direction, RoomCoord};
    use crate::decoder::StubDecoder;

    #[test]
    fn locked_door_shows_as_l() {
        let mut outs = Vec::new();
        for i in 0..2 {
            let mut v: Vec<f64> = (0..10).map(|k| (k + i) as f64 * 0.1 - 0.4).collect();
            v.extend_from_slice(&[0.5, 0.5, -0.5, 1.0, 0.0, 0.0, i as f64]);
            outs.push(v);
        }
        let dec = StubDecoder::new(Game::Zelda, 10);
        let d = assemble_zelda(&outs, &dec, 1, 2, 10).unwrap();
        let canvas = dungeon_canvas(&d);
        for t in d.door_tiles(Direction::Right) {
            assert_eq!(canvas[t.row][t.col], 'L');
        }
        let left = d.door_tiles(Direction::Left)[0];
        assert_eq!(canvas[left.row][d.room_width + left.col], 'L');
        assert_eq!(d.start, RoomCoord::new(0, 0));
        let text = render_dungeon(&d);
        assert_eq!(text.lines().count(), 11);
        assert!(text.lines().all(|l| l.chars().count() == 32));
        for ch in ['K', 'T', 'S', 'R'] {
            assert!(text.contains(ch), "{ch}");
        }
    }
}
