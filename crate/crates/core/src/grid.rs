use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Row-major grid of tile channel indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileGrid {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

/// One decoded level segment (a Mario screen or a Zelda room).
pub type SegmentGrid = TileGrid;

impl TileGrid {
    pub fn filled(width: usize, height: usize, tile: u8) -> Self {
        Self {
            width,
            height,
            cells: vec![tile; width * height],
        }
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<u8>) -> Option<Self> {
        (cells.len() == width * height).then_some(Self {
            width,
            height,
            cells,
        })
    }

    /// Build from rows; returns `None` if the rows are ragged.
    pub fn from_rows(rows: &[Vec<u8>]) -> Option<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return None;
        }
        Some(Self {
            width,
            height,
            cells: rows.concat(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, tile: u8) {
        self.cells[row * self.width + col] = tile;
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.cells[row * self.width..(row + 1) * self.width]
    }

    /// Copy of the rectangle starting at (`row`, `col`).
    pub fn sub_grid(&self, row: usize, col: usize, height: usize, width: usize) -> TileGrid {
        let mut cells = Vec::with_capacity(width * height);
        for r in row..row + height {
            cells.extend_from_slice(&self.cells[r * self.width + col..r * self.width + col + width]);
        }
        TileGrid {
            width,
            height,
            cells,
        }
    }

    /// Concatenate grids of equal height left to right.
    pub fn hconcat(parts: &[TileGrid]) -> Option<TileGrid> {
        let height = parts.first()?.height;
        if parts.iter().any(|p| p.height != height) {
            return None;
        }
        let width = parts.iter().map(|p| p.width).sum();
        let mut cells = Vec::with_capacity(width * height);
        for r in 0..height {
            for p in parts {
                cells.extend_from_slice(p.row(r));
            }
        }
        Some(TileGrid {
            width,
            height,
            cells,
        })
    }

    pub fn count(&self, tile: u8) -> usize {
        self.cells.iter().filter(|&&t| t == tile).count()
    }

    /// Canonical digest of the tile contents and shape.
    ///
    /// Shared by every distinctness measure so Mario segments and Zelda rooms
    /// are compared the same way.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.width as u64).to_le_bytes());
        h.update((self.height as u64).to_le_bytes());
        h.update(&self.cells);
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Number of distinct grids, comparing cell for cell.
pub fn distinct_grids<'a>(grids: impl IntoIterator<Item = &'a TileGrid>) -> usize {
    grids
        .into_iter()
        .map(TileGrid::digest)
        .collect::<std::collections::BTreeSet<_>>()
        .len()
}
