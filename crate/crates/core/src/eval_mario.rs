//! Mario segment metrics, the tile-level solver and the two Mario schemes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::assembly::MarioLevel;
use crate::corpus::TileVocabulary;
use crate::eval::{count_bin, range_bin, EvalError, Scheme, SchemeRanges};
use crate::grid::{distinct_grids, SegmentGrid, TileGrid};
use crate::Game;

/// Highest jump in tiles.
pub const JUMP_HEIGHT: u8 = 4;
/// Expanded-state budget of [`solve`].
pub const NODE_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentStats {
    pub decoration: f64,
    pub space_coverage: f64,
    pub leniency: f64,
    pub hash: String,
}

/// Metrics of one segment. Leniency adds −0.5 for every column whose bottom
/// tile is not solid and divides by the tile count.
pub fn segment_stats(seg: &SegmentGrid, vocab: &TileVocabulary) -> Result<SegmentStats, EvalError> {
    if let Some(&bad) = seg.cells().iter().find(|&&t| t as usize >= vocab.len()) {
        return Err(EvalError::VocabMismatch(bad));
    }
    let n = seg.cells().len() as f64;
    let (mut deco, mut cover, mut len) = (0usize, 0usize, 0.0);
    for &t in seg.cells() {
        let f = vocab.flags(t);
        deco += f.decoration as usize;
        cover += f.standable as usize;
        len += f.leniency;
    }
    if seg.height() > 0 {
        let bottom = seg.row(seg.height() - 1);
        len -= 0.5 * bottom.iter().filter(|&&t| !vocab.flags(t).solid).count() as f64;
    }
    Ok(SegmentStats {
        decoration: deco as f64 / n,
        space_coverage: cover as f64 / n,
        leniency: len / n,
        hash: seg.digest(),
    })
}

/// Sum of absolute differences between consecutive scores.
pub fn alternation(scores: &[f64]) -> f64 {
    scores.windows(2).map(|w| (w[0] - w[1]).abs()).sum()
}

pub fn distinct_count(segments: &[SegmentGrid]) -> usize {
    distinct_grids(segments)
}

/// Position and remaining rise. `rise > 0` only while jumping upward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MarioState {
    pub x: usize,
    pub y: usize,
    pub rise: u8,
}

struct Terrain<'a> {
    tiles: &'a TileGrid,
    vocab: &'a TileVocabulary,
}

impl Terrain<'_> {
    fn open(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.tiles.width()
            && (y as usize) < self.tiles.height()
            && !self.vocab.flags(self.tiles.get(y as usize, x as usize)).solid
    }

    fn supported(&self, x: usize, y: usize) -> bool {
        y + 1 < self.tiles.height() && self.vocab.flags(self.tiles.get(y + 1, x)).standable
    }

    /// Moving by (dx, dy): target open, and diagonals need one open corner.
    fn can_move(&self, x: usize, y: usize, dx: isize, dy: isize) -> bool {
        let (x, y) = (x as isize, y as isize);
        if !self.open(x + dx, y + dy) {
            return false;
        }
        dx == 0 || dy == 0 || self.open(x + dx, y) || self.open(x, y + dy)
    }

    fn successors(&self, s: MarioState, out: &mut Vec<MarioState>) {
        out.clear();
        let standing = s.rise == 0 && self.supported(s.x, s.y);
        let mut push = |dx: isize, dy: isize, rise: u8| {
            if self.can_move(s.x, s.y, dx, dy) {
                out.push(MarioState {
                    x: (s.x as isize + dx) as usize,
                    y: (s.y as isize + dy) as usize,
                    rise,
                });
            }
        };
        if standing {
            push(-1, 0, 0);
            push(1, 0, 0);
            for dx in [-1, 0, 1] {
                push(dx, -1, JUMP_HEIGHT - 1);
            }
        } else {
            if s.rise > 0 {
                for dx in [-1, 0, 1] {
                    push(dx, -1, s.rise - 1);
                }
            }
            for dx in [-1, 0, 1] {
                push(dx, 1, 0);
            }
        }
    }
}

/// Whether `b` is a legal move from `a` in `level`.
pub fn valid_move(level: &MarioLevel, a: MarioState, b: MarioState) -> bool {
    let t = Terrain {
        tiles: &level.tiles,
        vocab: TileVocabulary::builtin(Game::Mario),
    };
    let mut next = Vec::new();
    t.successors(a, &mut next);
    next.contains(&b)
}

/// Leftmost column's topmost open cell with support below.
pub fn start_state(level: &MarioLevel) -> Option<MarioState> {
    let t = Terrain {
        tiles: &level.tiles,
        vocab: TileVocabulary::builtin(Game::Mario),
    };
    (0..level.tiles.height())
        .find(|&y| t.open(0, y as isize) && t.supported(0, y))
        .map(|y| MarioState { x: 0, y, rise: 0 })
}

/// Shortest move sequence from the start to any cell in the rightmost
/// column, as the list of visited states. `None` when unreachable within
/// [`NODE_BUDGET`] expansions.
pub fn solve(level: &MarioLevel) -> Option<Vec<MarioState>> {
    solve_with_budget(level, NODE_BUDGET)
}

pub fn solve_with_budget(level: &MarioLevel, budget: usize) -> Option<Vec<MarioState>> {
    let t = Terrain {
        tiles: &level.tiles,
        vocab: TileVocabulary::builtin(Game::Mario),
    };
    let (w, h) = (level.tiles.width(), level.tiles.height());
    let start = start_state(level)?;
    let layers = JUMP_HEIGHT as usize;
    let key = |s: &MarioState| (s.x * h + s.y) * layers + s.rise as usize;
    let mut g = vec![u32::MAX; w * h * layers];
    let mut parent = vec![usize::MAX; w * h * layers];
    let mut heap = BinaryHeap::new();
    let hcost = |s: &MarioState| (w - 1 - s.x) as u32;
    g[key(&start)] = 0;
    heap.push(Reverse((hcost(&start), 0u32, start)));
    let mut expanded = 0;
    let mut next = Vec::new();
    while let Some(Reverse((_, gs, s))) = heap.pop() {
        let ks = key(&s);
        if gs > g[ks] {
            continue;
        }
        if s.x == w - 1 {
            let mut path = vec![s];
            let mut k = ks;
            while parent[k] != usize::MAX {
                k = parent[k];
                let rise = (k % layers) as u8;
                let cell = k / layers;
                path.push(MarioState {
                    x: cell / h,
                    y: cell % h,
                    rise,
                });
            }
            path.reverse();
            return Some(path);
        }
        expanded += 1;
        if expanded > budget {
            return None;
        }
        t.successors(s, &mut next);
        for n in &next {
            let kn = key(n);
            if gs + 1 < g[kn] {
                g[kn] = gs + 1;
                parent[kn] = ks;
                heap.push(Reverse((gs + 1 + hcost(n), gs + 1, *n)));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarioStats {
    pub segments: Vec<SegmentStats>,
    pub decoration_sum: f64,
    pub coverage_sum: f64,
    pub leniency_sum: f64,
    pub alternating_decoration: f64,
    pub alternating_coverage: f64,
    pub distinct_segments: usize,
    /// Moves in the shortest solution, if any.
    pub path_length: Option<usize>,
}

impl MarioStats {
    /// Solution length, or 0 when unsolvable.
    pub fn fitness(&self) -> f64 {
        self.path_length.unwrap_or(0) as f64
    }
}

pub fn level_stats(level: &MarioLevel) -> Result<MarioStats, EvalError> {
    let vocab = TileVocabulary::builtin(Game::Mario);
    let grids = level.segment_grids();
    let segments = grids
        .iter()
        .map(|s| segment_stats(s, vocab))
        .collect::<Result<Vec<_>, _>>()?;
    let col = |f: fn(&SegmentStats) -> f64| segments.iter().map(f).collect::<Vec<f64>>();
    let deco = col(|s| s.decoration);
    let cover = col(|s| s.space_coverage);
    let len = col(|s| s.leniency);
    Ok(MarioStats {
        decoration_sum: deco.iter().sum(),
        coverage_sum: cover.iter().sum(),
        leniency_sum: len.iter().sum(),
        alternating_decoration: alternation(&deco),
        alternating_coverage: alternation(&cover),
        distinct_segments: distinct_count(&grids),
        path_length: solve(level).map(|p| p.len() - 1),
        segments,
    })
}

pub fn fitness(level: &MarioLevel) -> f64 {
    solve(level).map_or(0.0, |p| (p.len() - 1) as f64)
}

pub fn bin(stats: &MarioStats, scheme: Scheme, r: &SchemeRanges) -> Result<Vec<usize>, EvalError> {
    match scheme {
        Scheme::SumDsl => Ok(vec![
            range_bin(stats.decoration_sum, r.decoration_sum, r.bins),
            range_bin(stats.coverage_sum, r.coverage_sum, r.bins),
            range_bin(stats.leniency_sum, r.leniency_sum, r.bins),
        ]),
        Scheme::DistinctAsad => Ok(vec![
            range_bin(stats.alternating_coverage, r.alternating_coverage, r.bins),
            range_bin(stats.alternating_decoration, r.alternating_decoration, r.bins),
            count_bin(stats.distinct_segments, r.segments),
        ]),
        _ => Err(EvalError::SchemeMismatch {
            scheme,
            game: Game::Mario,
        }),
    }
}
