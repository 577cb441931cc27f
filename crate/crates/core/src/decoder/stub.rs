//! Deterministic GAN-free decoder.
//!
//! A few leading latent coordinates set the composition of a segment (how
//! much wall, water, ground gap, platform...), and a hash of the whole latent
//! quantized to steps of 0.05 decides where things go. Equal latents give
//! equal segments; latents differing by 0.1 or more in any coordinate land in
//! different quantization cells and therefore get different layouts.
//!
//! Zelda rooms keep a floor cross through the room centre that joins the four
//! door positions, and any floor cut off from that cross is walled in, so the
//! floor of every room is one connected region.

use std::collections::VecDeque;

use rand::Rng;

use super::{DecoderError, SegmentDecoder};
use crate::corpus::{TileRole, TileVocabulary, MARIO_SAMPLE_HEIGHT, MARIO_SAMPLE_WIDTH, ZELDA_ROOM_HEIGHT, ZELDA_ROOM_WIDTH};
use crate::grid::SegmentGrid;
use crate::rng::{mix_seed, seeded, StreamRng};
use crate::Game;

const QUANTUM: f64 = 0.05;

/// Interior rows/columns of a Zelda room (inside the two-tile wall ring).
const INTERIOR_ROWS: std::ops::Range<usize> = 2..9;
const INTERIOR_COLS: std::ops::Range<usize> = 2..14;
const CENTER_ROW: usize = 5;
const CENTER_COLS: [usize; 2] = [7, 8];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StubDecoder {
    game: Game,
    latent_size: usize,
}

impl StubDecoder {
    pub fn new(game: Game, latent_size: usize) -> Self {
        assert!(latent_size >= 1, "stub decoder needs a non-empty latent");
        Self { game, latent_size }
    }

    /// Stub with the latent sizes of the trained generators (Mario 30, Zelda 10).
    pub fn standard(game: Game) -> Self {
        match game {
            Game::Mario => Self::new(game, 30),
            Game::Zelda => Self::new(game, 10),
        }
    }
}

impl SegmentDecoder for StubDecoder {
    fn game(&self) -> Game {
        self.game
    }

    fn latent_size(&self) -> usize {
        self.latent_size
    }

    fn channels(&self) -> usize {
        TileVocabulary::builtin(self.game).len()
    }

    fn segment_shape(&self) -> (usize, usize) {
        match self.game {
            Game::Mario => (MARIO_SAMPLE_HEIGHT, MARIO_SAMPLE_WIDTH),
            Game::Zelda => (ZELDA_ROOM_HEIGHT, ZELDA_ROOM_WIDTH),
        }
    }

    fn decode(&self, z: &[f64]) -> Result<SegmentGrid, DecoderError> {
        if z.len() != self.latent_size {
            return Err(DecoderError::LatentSizeMismatch {
                expected: self.latent_size,
                actual: z.len(),
            });
        }
        Ok(stub_decode(self.game, z))
    }
}

fn unit(z: &[f64], i: usize) -> f64 {
    z.get(i).map_or(0.5, |v| (v.clamp(-1.0, 1.0) + 1.0) / 2.0)
}

fn layout_rng(z: &[f64]) -> StreamRng {
    let cells: Vec<u64> = z
        .iter()
        .map(|v| ((v.clamp(-1.0, 1.0) + 1.0) / QUANTUM).floor() as i64 as u64)
        .collect();
    seeded(mix_seed(&cells))
}

/// Decode `z` into a segment of the game's standard size.
pub fn stub_decode(game: Game, z: &[f64]) -> SegmentGrid {
    assert!(!z.is_empty(), "stub decoder needs a non-empty latent");
    match game {
        Game::Zelda => zelda_room(z),
        Game::Mario => mario_segment(z),
    }
}

fn zelda_room(z: &[f64]) -> SegmentGrid {
    let v = TileVocabulary::builtin(Game::Zelda);
    let floor = v.require_role(TileRole::Floor);
    let wall = v.require_role(TileRole::Wall);
    let water = v.require_role(TileRole::Water);
    let mut rng = layout_rng(z);
    let wall_density = 0.05 + 0.55 * unit(z, 0);
    let water_density = 0.5 * unit(z, 1);
    let mut room = SegmentGrid::filled(ZELDA_ROOM_WIDTH, ZELDA_ROOM_HEIGHT, wall);
    for r in INTERIOR_ROWS {
        for c in INTERIOR_COLS {
            let u: f64 = rng.random();
            let on_cross = r == CENTER_ROW || CENTER_COLS.contains(&c);
            let tile = if on_cross {
                floor
            } else if u < wall_density {
                wall
            } else if u < wall_density + water_density {
                water
            } else {
                floor
            };
            room.set(r, c, tile);
        }
    }
    // Wall in floor pockets that the cross cannot reach.
    let mut reached = [false; ZELDA_ROOM_WIDTH * ZELDA_ROOM_HEIGHT];
    let mut queue = VecDeque::from([(CENTER_ROW, CENTER_COLS[0])]);
    reached[CENTER_ROW * ZELDA_ROOM_WIDTH + CENTER_COLS[0]] = true;
    while let Some((r, c)) = queue.pop_front() {
        let neighbours = [(r.wrapping_sub(1), c), (r + 1, c), (r, c.wrapping_sub(1)), (r, c + 1)];
        for (nr, nc) in neighbours {
            if INTERIOR_ROWS.contains(&nr)
                && INTERIOR_COLS.contains(&nc)
                && room.get(nr, nc) == floor
                && !reached[nr * ZELDA_ROOM_WIDTH + nc]
            {
                reached[nr * ZELDA_ROOM_WIDTH + nc] = true;
                queue.push_back((nr, nc));
            }
        }
    }
    for r in INTERIOR_ROWS {
        for c in INTERIOR_COLS {
            if room.get(r, c) == floor && !reached[r * ZELDA_ROOM_WIDTH + c] {
                room.set(r, c, wall);
            }
        }
    }
    room
}

fn mario_segment(z: &[f64]) -> SegmentGrid {
    let v = TileVocabulary::builtin(Game::Mario);
    let ch = |s: char| v.channel(s).expect("bundled Mario symbol");
    let (empty, ground) = (ch('-'), ch('X'));
    let (w, h) = (MARIO_SAMPLE_WIDTH, MARIO_SAMPLE_HEIGHT);
    let mut rng = layout_rng(z);
    let mut seg = SegmentGrid::filled(w, h, empty);
    for c in 0..w {
        seg.set(h - 1, c, ground);
        seg.set(h - 2, c, ground);
    }
    // Gaps in the ground, never in the two edge columns on either side.
    let gaps = (unit(z, 0) * 2.99) as usize;
    let max_gap = 1 + (unit(z, 1) * 3.99) as usize;
    for _ in 0..gaps {
        let width = rng.random_range(1..=max_gap);
        let start = rng.random_range(2..w - 2 - width);
        for c in start..start + width {
            seg.set(h - 1, c, empty);
            seg.set(h - 2, c, empty);
        }
    }
    // Floating platforms of breakable and question blocks.
    let platforms = 1 + (unit(z, 2) * 3.99) as usize;
    let question_share = unit(z, 3);
    for _ in 0..platforms {
        let len = rng.random_range(1..=5);
        let row = rng.random_range(4..=9);
        let start = rng.random_range(0..w - len);
        for c in start..start + len {
            let tile = if rng.random::<f64>() < question_share { ch('?') } else { ch('S') };
            seg.set(row, c, tile);
        }
    }
    // Pipe indicators; the level assembler extends them downward.
    let pipes = (unit(z, 4) * 2.99) as usize;
    for _ in 0..pipes {
        let top = rng.random_range(8..=10);
        let c = rng.random_range(2..w - 3);
        seg.set(top, c, ch('P'));
        seg.set(top, c + 1, ch('P'));
    }
    let enemies = (unit(z, 5) * 3.99) as usize;
    let kinds = [ch('E'), ch('k'), ch('r')];
    for _ in 0..enemies {
        let c = rng.random_range(3..w - 1);
        seg.set(h - 3, c, kinds[rng.random_range(0..kinds.len())]);
    }
    let coins = (unit(z, 6) * 5.99) as usize;
    for _ in 0..coins {
        let (r, c) = (rng.random_range(2..=7), rng.random_range(0..w));
        if seg.get(r, c) == empty {
            seg.set(r, c, ch('o'));
        }
    }
    if unit(z, 7) > 0.8 {
        let c = rng.random_range(3..w - 3);
        seg.set(h - 4, c, ch('B'));
        seg.set(h - 3, c, ch('b'));
    }
    seg
}
