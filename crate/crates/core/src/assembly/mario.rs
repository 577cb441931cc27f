use serde::{Deserialize, Serialize};

use super::AssemblyError;
use crate::corpus::{TileRole, TileVocabulary};
use crate::decoder::SegmentDecoder;
use crate::grid::TileGrid;
use crate::Game;

/// Segments concatenated left to right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarioLevel {
    pub tiles: TileGrid,
    pub segments: usize,
}

impl MarioLevel {
    pub fn segment_width(&self) -> usize {
        self.tiles.width() / self.segments
    }

    /// Tiles of segment `i` as they appear in the finished level.
    pub fn segment(&self, i: usize) -> TileGrid {
        let w = self.segment_width();
        self.tiles.sub_grid(0, i * w, self.tiles.height(), w)
    }

    pub fn segment_grids(&self) -> Vec<TileGrid> {
        (0..self.segments).map(|i| self.segment(i)).collect()
    }
}

/// Extend every pipe indicator downward with pipe body until a solid tile
/// or the bottom row. Works top to bottom, so written body tiles stop any
/// extension below them.
pub fn extend_pipes(tiles: &mut TileGrid, vocab: &TileVocabulary) {
    let indicator = vocab.require_role(TileRole::PipeIndicator);
    let body = vocab.require_role(TileRole::PipeBody);
    for c in 0..tiles.width() {
        for r in 0..tiles.height() {
            if tiles.get(r, c) != indicator {
                continue;
            }
            let mut below = r + 1;
            while below < tiles.height() && !vocab.flags(tiles.get(below, c)).solid {
                tiles.set(below, c, body);
                below += 1;
            }
        }
    }
}

pub fn assemble_mario(outputs: &[Vec<f64>], decoder: &dyn SegmentDecoder) -> Result<MarioLevel, AssemblyError> {
    let segments = outputs
        .iter()
        .map(|z| decoder.decode(z))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tiles = TileGrid::hconcat(&segments)
        .ok_or_else(|| AssemblyError::ArityMismatch("no segments or uneven segment heights".into()))?;
    extend_pipes(&mut tiles, TileVocabulary::builtin(Game::Mario));
    Ok(MarioLevel {
        tiles,
        segments: segments.len(),
    })
}
