//! Directly encoded genomes: every segment's generator input stored in one
//! flat vector, with single-point crossover and polynomial mutation.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Game;

/// Number of structural values following each Zelda room latent.
pub const AUX_COUNT: usize = 7;

/// Positions of the structural values within a Zelda room's auxiliary slice.
pub mod aux {
    pub const ROOM_PRESENCE: usize = 0;
    pub const RIGHT_DOOR: usize = 1;
    pub const DOWN_DOOR: usize = 2;
    pub const RIGHT_DOOR_TYPE: usize = 3;
    pub const DOWN_DOOR_TYPE: usize = 4;
    pub const RAFT_PREFERENCE: usize = 5;
    pub const START_END_PREFERENCE: usize = 6;
}

pub const GENE_MIN: f64 = -1.0;
pub const GENE_MAX: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum DirectError {
    #[error("segment {index} out of range for {segments} segments")]
    IndexOutOfRange { index: usize, segments: usize },
    #[error("layouts differ: {0:?} vs {1:?}")]
    LayoutMismatch(Layout, Layout),
    #[error("genome has {actual} values, layout needs {expected}")]
    LengthMismatch { expected: usize, actual: usize },
}

/// How a genome is cut into per-segment generator inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "lowercase")]
pub enum Layout {
    /// `segments` screens left to right, `latent` values each.
    Mario { segments: usize, latent: usize },
    /// `rows` × `cols` rooms in row-major order, `latent + 7` values each.
    Zelda { rows: usize, cols: usize, latent: usize },
}

impl Layout {
    pub fn game(&self) -> Game {
        match self {
            Layout::Mario { .. } => Game::Mario,
            Layout::Zelda { .. } => Game::Zelda,
        }
    }

    pub fn latent_size(&self) -> usize {
        match *self {
            Layout::Mario { latent, .. } | Layout::Zelda { latent, .. } => latent,
        }
    }

    pub fn segment_count(&self) -> usize {
        match *self {
            Layout::Mario { segments, .. } => segments,
            Layout::Zelda { rows, cols, .. } => rows * cols,
        }
    }

    /// Values per segment: the latent, plus the auxiliary values for Zelda.
    pub fn segment_width(&self) -> usize {
        match *self {
            Layout::Mario { latent, .. } => latent,
            Layout::Zelda { latent, .. } => latent + AUX_COUNT,
        }
    }

    pub fn aux_count(&self) -> usize {
        self.segment_width() - self.latent_size()
    }

    pub fn genome_len(&self) -> usize {
        self.segment_count() * self.segment_width()
    }

    /// Number of coordinate inputs a CPPN for this layout takes.
    pub fn cppn_inputs(&self) -> usize {
        match self {
            Layout::Mario { .. } => 1,
            Layout::Zelda { .. } => 3,
        }
    }
}

/// One segment's share of a direct genome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSlice<'a> {
    pub latent: &'a [f64],
    pub aux: &'a [f64],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectGenome {
    layout: Layout,
    values: Vec<f64>,
}

/// Polynomial mutation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialMutation {
    pub per_gene: f64,
    pub distribution_index: f64,
}

impl Default for PolynomialMutation {
    fn default() -> Self {
        Self {
            per_gene: 0.3,
            distribution_index: 20.0,
        }
    }
}

impl PolynomialMutation {
    /// Deb's bounded polynomial perturbation of one value.
    pub fn perturb<R: Rng + ?Sized>(&self, y: f64, rng: &mut R) -> f64 {
        let (lo, hi) = (GENE_MIN, GENE_MAX);
        let span = hi - lo;
        let delta1 = (y - lo) / span;
        let delta2 = (hi - y) / span;
        let eta = self.distribution_index;
        let power = 1.0 / (eta + 1.0);
        let r: f64 = rng.random();
        let deltaq = if r < 0.5 {
            let v = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - delta1).powf(eta + 1.0);
            v.powf(power) - 1.0
        } else {
            let v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - delta2).powf(eta + 1.0);
            1.0 - v.powf(power)
        };
        (y + deltaq * span).clamp(lo, hi)
    }
}

impl DirectGenome {
    pub fn new(layout: Layout, values: Vec<f64>) -> Result<Self, DirectError> {
        if values.len() != layout.genome_len() {
            return Err(DirectError::LengthMismatch {
                expected: layout.genome_len(),
                actual: values.len(),
            });
        }
        Ok(Self {
            layout,
            values: values.into_iter().map(|v| v.clamp(GENE_MIN, GENE_MAX)).collect(),
        })
    }

    /// Values i.i.d. uniform in [−1, 1].
    pub fn random<R: Rng + ?Sized>(layout: Layout, rng: &mut R) -> Self {
        let values = (0..layout.genome_len())
            .map(|_| rng.random_range(GENE_MIN..=GENE_MAX))
            .collect();
        Self { layout, values }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Segment `index` in left-to-right (Mario) or row-major (Zelda) order.
    pub fn slice(&self, index: usize) -> Result<SegmentSlice<'_>, DirectError> {
        let segments = self.layout.segment_count();
        if index >= segments {
            return Err(DirectError::IndexOutOfRange { index, segments });
        }
        let w = self.layout.segment_width();
        let z = self.layout.latent_size();
        let part = &self.values[index * w..(index + 1) * w];
        Ok(SegmentSlice {
            latent: &part[..z],
            aux: &part[z..],
        })
    }

    pub fn slice_at(&self, row: usize, col: usize) -> Result<SegmentSlice<'_>, DirectError> {
        match self.layout {
            Layout::Zelda { rows, cols, .. } if row < rows && col < cols => self.slice(row * cols + col),
            _ => Err(DirectError::IndexOutOfRange {
                index: row * self.layout.segment_count() + col,
                segments: self.layout.segment_count(),
            }),
        }
    }

    /// Mutate each gene independently; returns the child and how many genes were touched.
    pub fn mutate<R: Rng + ?Sized>(&self, op: &PolynomialMutation, rng: &mut R) -> (Self, usize) {
        let mut child = self.clone();
        let mut touched = 0;
        for v in &mut child.values {
            if rng.random::<f64>() < op.per_gene {
                *v = op.perturb(*v, rng);
                touched += 1;
            }
        }
        (child, touched)
    }

    /// Single-point crossover: `self[..k] ++ other[k..]` with `k` uniform in `1..=n-1`.
    pub fn crossover<R: Rng + ?Sized>(&self, other: &Self, rng: &mut R) -> Result<Self, DirectError> {
        if self.layout != other.layout {
            return Err(DirectError::LayoutMismatch(self.layout, other.layout));
        }
        let n = self.values.len();
        if n < 2 {
            return Ok(self.clone());
        }
        let cut = rng.random_range(1..n);
        Ok(self.crossover_at(other, cut))
    }

    pub fn crossover_at(&self, other: &Self, cut: usize) -> Self {
        let mut values = self.values[..cut].to_vec();
        values.extend_from_slice(&other.values[cut..]);
        Self {
            layout: self.layout,
            values,
        }
    }
}
