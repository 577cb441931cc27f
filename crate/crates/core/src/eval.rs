//! Binning schemes and the evaluation entry point shared by both games.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::Phenotype;
use crate::eval_mario::{self, MarioStats};
use crate::eval_zelda::{self, DungeonStats};
use crate::Game;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("tile channel {0} is not in the vocabulary")]
    VocabMismatch(u8),
    #[error("scheme {scheme} cannot bin a {game} level")]
    SchemeMismatch { scheme: Scheme, game: Game },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "sum-dsl")]
    SumDsl,
    #[serde(rename = "distinct-asad")]
    DistinctAsad,
    #[serde(rename = "wwr")]
    Wwr,
    #[serde(rename = "distinct-btr")]
    DistinctBtr,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::SumDsl, Scheme::DistinctAsad, Scheme::Wwr, Scheme::DistinctBtr];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::SumDsl => "sum-dsl",
            Scheme::DistinctAsad => "distinct-asad",
            Scheme::Wwr => "wwr",
            Scheme::DistinctBtr => "distinct-btr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn game(self) -> Game {
        match self {
            Scheme::SumDsl | Scheme::DistinctAsad => Game::Mario,
            Scheme::Wwr | Scheme::DistinctBtr => Game::Zelda,
        }
    }

    pub fn descriptor(self, ranges: &SchemeRanges) -> Descriptor {
        let dims: Vec<(&str, usize)> = match self {
            Scheme::SumDsl => vec![
                ("decoration_sum", ranges.bins),
                ("coverage_sum", ranges.bins),
                ("leniency_sum", ranges.bins),
            ],
            Scheme::DistinctAsad => vec![
                ("alternating_coverage", ranges.bins),
                ("alternating_decoration", ranges.bins),
                ("distinct_segments", ranges.segments),
            ],
            Scheme::Wwr => vec![("wall", 10), ("water", 10), ("reachable_rooms", ranges.rooms)],
            Scheme::DistinctBtr => vec![
                ("distinct_rooms", ranges.rooms),
                ("backtracked", ranges.backtrack_bins),
                ("reachable_rooms", ranges.rooms),
            ],
        };
        Descriptor {
            scheme: self,
            names: dims.iter().map(|d| d.0.to_string()).collect(),
            cardinalities: dims.iter().map(|d| d.1).collect(),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Value ranges and bin counts of the behaviour dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemeRanges {
    pub bins: usize,
    pub decoration_sum: (f64, f64),
    pub coverage_sum: (f64, f64),
    /// Symmetric, so half the bins are negative.
    pub leniency_sum: (f64, f64),
    pub alternating_coverage: (f64, f64),
    pub alternating_decoration: (f64, f64),
    /// Segments per Mario level, one bin per distinct count.
    pub segments: usize,
    /// Rooms in the Zelda grid, one bin per count.
    pub rooms: usize,
    pub backtrack_bins: usize,
}

impl Default for SchemeRanges {
    fn default() -> Self {
        Self {
            bins: 10,
            decoration_sum: (0.0, 4.0),
            coverage_sum: (0.0, 8.0),
            leniency_sum: (-5.0, 5.0),
            alternating_coverage: (0.0, 3.0),
            alternating_decoration: (0.0, 3.0),
            segments: 10,
            rooms: 25,
            backtrack_bins: 25,
        }
    }
}

/// Dimension names and sizes of an archive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor {
    pub scheme: Scheme,
    pub names: Vec<String>,
    pub cardinalities: Vec<usize>,
}

impl Descriptor {
    pub fn cell_count(&self) -> usize {
        self.cardinalities.iter().product()
    }

    pub fn contains(&self, bin: &[usize]) -> bool {
        bin.len() == self.cardinalities.len() && bin.iter().zip(&self.cardinalities).all(|(b, c)| b < c)
    }
}

/// Equal-width bin of `v` over `[lo, hi)`, clamped to the edge bins.
/// Bin `k` starts at `lo + (hi - lo) * k / bins`; the estimate from division
/// is corrected against those edges so values just below an edge stay below.
pub fn range_bin(v: f64, (lo, hi): (f64, f64), bins: usize) -> usize {
    let t = (v - lo) / (hi - lo) * bins as f64;
    if t.is_nan() || t < 0.0 {
        return 0;
    }
    let edge = |k: usize| lo + (hi - lo) * k as f64 / bins as f64;
    let mut k = (t.floor() as usize).min(bins - 1);
    while k > 0 && v < edge(k) {
        k -= 1;
    }
    while k + 1 < bins && v >= edge(k + 1) {
        k += 1;
    }
    k
}

/// One-based count mapped to a zero-based bin, clamped.
pub fn count_bin(count: usize, bins: usize) -> usize {
    count.saturating_sub(1).min(bins - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "lowercase")]
pub enum LevelStats {
    Mario(MarioStats),
    Zelda(DungeonStats),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub fitness: f64,
    pub bin: Vec<usize>,
    pub stats: LevelStats,
}

pub fn evaluate(phenotype: &Phenotype, scheme: Scheme, ranges: &SchemeRanges) -> Result<Evaluation, EvalError> {
    match phenotype {
        Phenotype::Mario(level) => {
            let stats = eval_mario::level_stats(level)?;
            let bin = eval_mario::bin(&stats, scheme, ranges)?;
            Ok(Evaluation {
                fitness: stats.fitness(),
                bin,
                stats: LevelStats::Mario(stats),
            })
        }
        Phenotype::Zelda(d) => {
            let stats = eval_zelda::dungeon_stats(d);
            let bin = eval_zelda::bin(&stats, scheme, ranges)?;
            Ok(Evaluation {
                fitness: stats.fitness,
                bin,
                stats: LevelStats::Zelda(stats),
            })
        }
    }
}
