//! Genome → complete level.
//!
//! Both encodings go through [`segment_outputs`], which yields one output
//! vector per segment (latent, plus the seven structural values for Zelda).
//! CPPNs are queried at [`segment_inputs`]; direct genomes are sliced.

mod mario;
mod render;
mod zelda;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cppn::CppnError;
use crate::decoder::{DecoderError, SegmentDecoder};
use crate::direct::{DirectError, Layout};
use crate::hybrid::Genotype;
pub use mario::{assemble_mario, extend_pipes, MarioLevel};
pub use render::{door_symbol, dungeon_canvas, render_dungeon, render_mario, render_phenotype};
pub use zelda::{
    assemble_zelda, bucket_door, door_tiles, Direction, DoorRecord, DoorType, Dungeon, Item, PuzzleBlock, RoomCoord,
    TilePos, DOOR_COL, DOOR_ROW,
};

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error(transparent)]
    Cppn(#[from] CppnError),
    #[error(transparent)]
    Direct(#[from] DirectError),
    #[error("no room has a positive presence value")]
    NoRoomsPresent,
    #[error("segment index {index} out of range for {segments} segments")]
    IndexOutOfRange { index: usize, segments: usize },
    #[error("door type value {0} outside [-1, 1]")]
    OutOfRange(f64),
    #[error("genome does not fit layout: {0}")]
    ArityMismatch(String),
}

/// A generated level of either game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "lowercase")]
pub enum Phenotype {
    Mario(MarioLevel),
    Zelda(Dungeon),
}

/// CPPN inputs for segment `index`.
///
/// Mario: the segment's x position mapped linearly from `0..S−1` onto [−1, 1].
/// Zelda: (x, y, r) with x, y the column and row mapped onto [−1, 1] and
/// r = sqrt(x² + y²) / sqrt(2), so grid corners have r = 1.
pub fn segment_inputs(layout: &Layout, index: usize) -> Result<Vec<f64>, AssemblyError> {
    let segments = layout.segment_count();
    if index >= segments {
        return Err(AssemblyError::IndexOutOfRange { index, segments });
    }
    let scale = |i: usize, n: usize| if n <= 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (n - 1) as f64 };
    Ok(match *layout {
        Layout::Mario { segments, .. } => vec![scale(index, segments)],
        Layout::Zelda { rows, cols, .. } => {
            let x = scale(index % cols, cols);
            let y = scale(index / cols, rows);
            vec![x, y, (x * x + y * y).sqrt() / std::f64::consts::SQRT_2]
        }
    })
}

/// Per-segment output vectors, in segment order.
pub fn segment_outputs(genotype: &Genotype, layout: &Layout) -> Result<Vec<Vec<f64>>, AssemblyError> {
    let width = layout.segment_width();
    match genotype {
        Genotype::Cppn(g) => {
            if g.input_arity() != layout.cppn_inputs() || g.output_arity() != width {
                return Err(AssemblyError::ArityMismatch(format!(
                    "CPPN is {}→{}, layout needs {}→{width}",
                    g.input_arity(),
                    g.output_arity(),
                    layout.cppn_inputs()
                )));
            }
            let net = g.compile();
            (0..layout.segment_count())
                .map(|i| Ok(net.query(&segment_inputs(layout, i)?)?))
                .collect()
        }
        Genotype::Direct(d) => {
            if d.layout() != *layout {
                return Err(AssemblyError::ArityMismatch(format!(
                    "direct genome layout {:?} differs from {layout:?}",
                    d.layout()
                )));
            }
            (0..layout.segment_count())
                .map(|i| {
                    let s = d.slice(i)?;
                    Ok([s.latent, s.aux].concat())
                })
                .collect()
        }
    }
}

/// Build the level a genome encodes.
pub fn assemble(genotype: &Genotype, decoder: &dyn SegmentDecoder, layout: &Layout) -> Result<Phenotype, AssemblyError> {
    if decoder.latent_size() != layout.latent_size() {
        return Err(AssemblyError::ArityMismatch(format!(
            "decoder takes {} latent values, layout has {}",
            decoder.latent_size(),
            layout.latent_size()
        )));
    }
    let outputs = segment_outputs(genotype, layout)?;
    Ok(match *layout {
        Layout::Mario { .. } => Phenotype::Mario(assemble_mario(&outputs, decoder)?),
        Layout::Zelda { rows, cols, latent } => Phenotype::Zelda(assemble_zelda(&outputs, decoder, rows, cols, latent)?),
    })
}
