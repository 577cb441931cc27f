//! Level corpus ingestion: ASCII level files to training samples.

mod tensor;
mod vocab;

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::grid::TileGrid;
pub use tensor::{decode_f32, encode_f32, read_tensor, write_tensor, TensorHeader};
pub use vocab::{
    ReducedTile, TileEntry, TileFlags, TileRole, TileVocabulary, ZeldaReduction, MARIO_CHANNELS,
    ZELDA_CHANNELS,
};

pub const MARIO_SAMPLE_WIDTH: usize = 28;
pub const MARIO_SAMPLE_HEIGHT: usize = 14;
pub const ZELDA_ROOM_WIDTH: usize = 16;
pub const ZELDA_ROOM_HEIGHT: usize = 11;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown symbol {0:?} at row {1}, column {2}")]
    UnknownSymbol(char, usize, usize),
    #[error("row {0} has a different length than the first row")]
    RaggedFile(usize),
    #[error("level is {width}x{height}; windows need at least {MARIO_SAMPLE_WIDTH}x{MARIO_SAMPLE_HEIGHT}")]
    LevelTooSmall { width: usize, height: usize },
    #[error("dungeon of {width}x{height} tiles is not a whole number of {ZELDA_ROOM_WIDTH}x{ZELDA_ROOM_HEIGHT} rooms")]
    MisalignedDungeon { width: usize, height: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid vocabulary: {0}")]
    BadVocabulary(String),
    #[error("invalid tensor file: {0}")]
    BadTensor(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One fixed-size training example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingSample {
    pub grid: TileGrid,
}

impl TrainingSample {
    pub fn width(&self) -> usize {
        self.grid.width()
    }

    pub fn height(&self) -> usize {
        self.grid.height()
    }
}

/// Raw characters of a level file.
pub type CharGrid = Vec<Vec<char>>;

pub fn parse_char_grid(text: &str) -> Result<CharGrid, CorpusError> {
    let mut rows: CharGrid = text
        .lines()
        .map(|l| l.trim_end_matches('\r').chars().collect())
        .collect();
    while rows.last().is_some_and(Vec::is_empty) {
        rows.pop();
    }
    if let Some(first) = rows.first() {
        let width = first.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != width) {
            return Err(CorpusError::RaggedFile(bad));
        }
    }
    Ok(rows)
}

pub fn read_char_grid(path: &Path) -> Result<CharGrid, CorpusError> {
    parse_char_grid(&std::fs::read_to_string(path)?)
}

pub fn parse_level_str(text: &str, vocab: &TileVocabulary) -> Result<TileGrid, CorpusError> {
    map_chars(&parse_char_grid(text)?, vocab)
}

pub fn parse_level_file(path: &Path, vocab: &TileVocabulary) -> Result<TileGrid, CorpusError> {
    map_chars(&read_char_grid(path)?, vocab)
}

fn map_chars(chars: &CharGrid, vocab: &TileVocabulary) -> Result<TileGrid, CorpusError> {
    let rows = chars
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, &s)| vocab.channel(s).ok_or(CorpusError::UnknownSymbol(s, r, c)))
                .collect::<Result<Vec<u8>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    TileGrid::from_rows(&rows).ok_or(CorpusError::RaggedFile(0))
}

/// Slide a 28×14 window across the bottom 14 rows, one column at a time.
pub fn mario_windows(level: &TileGrid) -> Result<Vec<TrainingSample>, CorpusError> {
    let (w, h) = (level.width(), level.height());
    if w < MARIO_SAMPLE_WIDTH || h < MARIO_SAMPLE_HEIGHT {
        return Err(CorpusError::LevelTooSmall {
            width: w,
            height: h,
        });
    }
    let top = h - MARIO_SAMPLE_HEIGHT;
    Ok((0..=w - MARIO_SAMPLE_WIDTH)
        .map(|c| TrainingSample {
            grid: level.sub_grid(top, c, MARIO_SAMPLE_HEIGHT, MARIO_SAMPLE_WIDTH),
        })
        .collect())
}

/// Split raw dungeons into rooms, reduce tiles to floor/wall/water and keep
/// the first copy of each distinct room. Rooms made only of void are skipped.
pub fn zelda_unique_rooms(
    dungeons: &[CharGrid],
    reduction: &ZeldaReduction,
    vocab: &TileVocabulary,
) -> Result<Vec<TrainingSample>, CorpusError> {
    let floor = vocab.require_role(TileRole::Floor);
    let wall = vocab.require_role(TileRole::Wall);
    let water = vocab.require_role(TileRole::Water);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for dungeon in dungeons {
        let height = dungeon.len();
        let width = dungeon.first().map_or(0, Vec::len);
        if height % ZELDA_ROOM_HEIGHT != 0
            || width % ZELDA_ROOM_WIDTH != 0
            || dungeon.iter().any(|r| r.len() != width)
        {
            return Err(CorpusError::MisalignedDungeon { width, height });
        }
        for room_row in 0..height / ZELDA_ROOM_HEIGHT {
            for room_col in 0..width / ZELDA_ROOM_WIDTH {
                let mut cells = Vec::with_capacity(ZELDA_ROOM_WIDTH * ZELDA_ROOM_HEIGHT);
                let mut all_void = true;
                for r in 0..ZELDA_ROOM_HEIGHT {
                    for c in 0..ZELDA_ROOM_WIDTH {
                        let (gr, gc) = (room_row * ZELDA_ROOM_HEIGHT + r, room_col * ZELDA_ROOM_WIDTH + c);
                        let s = dungeon[gr][gc];
                        let tile = match reduction.reduce(s) {
                            Some(ReducedTile::Floor) => floor,
                            Some(ReducedTile::Water) => water,
                            Some(ReducedTile::Wall) => wall,
                            Some(ReducedTile::Void) => wall,
                            None => return Err(CorpusError::UnknownSymbol(s, gr, gc)),
                        };
                        all_void &= reduction.reduce(s) == Some(ReducedTile::Void);
                        cells.push(tile);
                    }
                }
                if all_void {
                    continue;
                }
                let grid = TileGrid::from_cells(ZELDA_ROOM_WIDTH, ZELDA_ROOM_HEIGHT, cells)
                    .expect("room dimensions");
                if seen.insert(grid.clone()) {
                    out.push(TrainingSample { grid });
                }
            }
        }
    }
    Ok(out)
}

/// Deduplicate already-reduced samples, keeping first occurrences.
pub fn dedup_samples(samples: &[TrainingSample]) -> Vec<TrainingSample> {
    let mut seen = std::collections::BTreeSet::new();
    samples
        .iter()
        .filter(|s| seen.insert(s.grid.clone()))
        .cloned()
        .collect()
}

/// One-hot values in (N, K, H, W) order.
pub fn one_hot(samples: &[TrainingSample], channels: usize) -> Result<(Vec<usize>, Vec<f32>), CorpusError> {
    let first = samples
        .first()
        .ok_or_else(|| CorpusError::ShapeMismatch("no samples".into()))?;
    let (h, w) = (first.height(), first.width());
    let mut values = vec![0.0f32; samples.len() * channels * h * w];
    for (n, s) in samples.iter().enumerate() {
        if s.height() != h || s.width() != w {
            return Err(CorpusError::ShapeMismatch(format!(
                "sample {n} is {}x{}, expected {w}x{h}",
                s.width(),
                s.height()
            )));
        }
        for r in 0..h {
            for c in 0..w {
                let k = usize::from(s.grid.get(r, c));
                if k >= channels {
                    return Err(CorpusError::ShapeMismatch(format!(
                        "channel {k} out of range for {channels} channels"
                    )));
                }
                values[((n * channels + k) * h + r) * w + c] = 1.0;
            }
        }
    }
    Ok((vec![samples.len(), channels, h, w], values))
}

/// Per-cell argmax of (N, K, H, W) scores, ties to the lowest channel.
pub fn argmax_decode(shape: &[usize], values: &[f32]) -> Vec<TileGrid> {
    let (n, k, h, w) = (shape[0], shape[1], shape[2], shape[3]);
    (0..n)
        .map(|i| {
            let mut cells = Vec::with_capacity(h * w);
            for r in 0..h {
                for c in 0..w {
                    let mut best = 0usize;
                    for ch in 1..k {
                        if values[((i * k + ch) * h + r) * w + c] > values[((i * k + best) * h + r) * w + c] {
                            best = ch;
                        }
                    }
                    cells.push(best as u8);
                }
            }
            TileGrid::from_cells(w, h, cells).expect("shape")
        })
        .collect()
}

/// Write samples as a one-hot (N, K, H, W) tensor at `stem`.
pub fn export_one_hot(samples: &[TrainingSample], channels: usize, stem: &Path) -> Result<TensorHeader, CorpusError> {
    let (shape, values) = one_hot(samples, channels)?;
    write_tensor(stem, &shape, &values)
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusManifest {
    pub game: crate::Game,
    pub samples: usize,
    pub shape: Vec<usize>,
    pub tensor: String,
    pub source_files: Vec<String>,
}

pub fn write_manifest(path: &Path, manifest: &CorpusManifest) -> Result<(), CorpusError> {
    std::fs::write(path, serde_json::to_string_pretty(manifest).expect("manifest serializes"))?;
    Ok(())
}
