//! Quality-diversity generation of complete game levels.
//!
//! Levels are produced by feeding latent vectors through a segment decoder
//! (a trained generator network or a deterministic stub). The latent vectors
//! come from one of three genome encodings:
//!
//! * a CPPN queried at each segment's coordinates ([`cppn`]),
//! * a flat vector holding every segment's latent directly ([`direct`]),
//! * a hybrid population where CPPNs may irreversibly turn into direct
//!   vectors ([`hybrid`]).
//!
//! Levels are assembled ([`assembly`]), scored ([`eval_mario`],
//! [`eval_zelda`]) and kept in a MAP-Elites archive ([`mapelites`]).

pub mod assembly;
pub mod corpus;
pub mod cppn;
pub mod decoder;
pub mod direct;
pub mod eval;
pub mod eval_mario;
pub mod eval_zelda;
pub mod grid;
pub mod hybrid;
pub mod mapelites;
pub mod rng;

pub use assembly::{Dungeon, DoorType, MarioLevel, Phenotype};
pub use cppn::{ActivationKind, CppnGenome};
pub use decoder::{GeneratorModel, SegmentDecoder, StubDecoder};
pub use direct::{DirectGenome, Layout};
pub use grid::{SegmentGrid, TileGrid};
pub use hybrid::{EncodingMode, Genome, Genotype, Provenance};
pub use mapelites::{Archive, RunConfig};

/// The two game domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Game {
    Mario,
    Zelda,
}

impl std::fmt::Display for Game {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Game::Mario => f.write_str("mario"),
            Game::Zelda => f.write_str("zelda"),
        }
    }
}
