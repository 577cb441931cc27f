//! Latent vector → tile segment.
//!
//! [`GeneratorModel`] runs an exported generator network; [`StubDecoder`] is a
//! deterministic stand-in with the same interface for runs and tests that
//! have no trained weights.

mod model;
mod stub;

use thiserror::Error;

use crate::grid::SegmentGrid;
use crate::Game;
pub use model::{
    conv_transpose2d, dcgan_manifest, dense, read_fixtures, ForwardFixture, GeneratorModel, LayerSpec, ModelManifest,
    Tensor3, MANIFEST_FORMAT,
};
pub use stub::{stub_decode, StubDecoder};

/// Side of the square generator output.
pub const OUTPUT_SIDE: usize = 32;

#[derive(Debug, Error)]
pub enum DecoderError {
    #[error("bad model file: {0}")]
    BadFormat(String),
    #[error("layer {layer}: {message}")]
    ShapeChainBroken { layer: usize, message: String },
    #[error("latent has {actual} values, model expects {expected}")]
    LatentSizeMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that turns one latent vector into one tile segment.
pub trait SegmentDecoder: Send + Sync {
    fn game(&self) -> Game;
    fn latent_size(&self) -> usize;
    fn channels(&self) -> usize;
    /// (height, width) of decoded segments.
    fn segment_shape(&self) -> (usize, usize);
    fn decode(&self, z: &[f64]) -> Result<SegmentGrid, DecoderError>;
}

/// Crop the upper-left `height`×`width` of (K, 32, 32) scores and take the
/// per-cell argmax; ties go to the lowest channel.
pub fn crop_argmax(scores: &Tensor3, height: usize, width: usize) -> SegmentGrid {
    let (k, h, w) = scores.shape();
    assert!(height <= h && width <= w, "crop {height}x{width} exceeds output {h}x{w}");
    let mut cells = Vec::with_capacity(height * width);
    for r in 0..height {
        for c in 0..width {
            let mut best = 0;
            let mut best_score = scores.get(0, r, c);
            for ch in 1..k {
                let s = scores.get(ch, r, c);
                if s > best_score {
                    best = ch;
                    best_score = s;
                }
            }
            cells.push(best as u8);
        }
    }
    SegmentGrid::from_cells(width, height, cells).expect("crop shape")
}
