use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::Game;

/// Functional role of a tile, for the few rules that need one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TileRole {
    Empty,
    Ground,
    PipeIndicator,
    PipeBody,
    Floor,
    Wall,
    Water,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TileFlags {
    #[serde(default)]
    pub solid: bool,
    #[serde(default)]
    pub decoration: bool,
    #[serde(default)]
    pub standable: bool,
    #[serde(default)]
    pub leniency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileEntry {
    pub symbol: char,
    #[serde(default)]
    pub name: String,
    pub channel: u8,
    #[serde(flatten)]
    pub flags: TileFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<TileRole>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VocabularyFile {
    game: Game,
    #[serde(default)]
    note: String,
    entries: Vec<TileEntry>,
    #[serde(default)]
    aliases: BTreeMap<char, char>,
}

/// Mapping between level-file symbols and generator channels.
#[derive(Debug, Clone, PartialEq)]
pub struct TileVocabulary {
    game: Game,
    /// Indexed by channel.
    entries: Vec<TileEntry>,
    lookup: BTreeMap<char, u8>,
}

pub const MARIO_CHANNELS: usize = 13;
pub const ZELDA_CHANNELS: usize = 3;

const MARIO_JSON: &str = include_str!("../../data/mario_vocabulary.json");
const ZELDA_JSON: &str = include_str!("../../data/zelda_vocabulary.json");

impl TileVocabulary {
    pub fn mario() -> Self {
        Self::from_json(MARIO_JSON).expect("bundled Mario vocabulary is valid")
    }

    pub fn zelda() -> Self {
        Self::from_json(ZELDA_JSON).expect("bundled Zelda vocabulary is valid")
    }

    pub fn for_game(game: Game) -> Self {
        Self::builtin(game).clone()
    }

    /// Shared bundled vocabulary for `game`.
    pub fn builtin(game: Game) -> &'static Self {
        static MARIO: OnceLock<TileVocabulary> = OnceLock::new();
        static ZELDA: OnceLock<TileVocabulary> = OnceLock::new();
        match game {
            Game::Mario => MARIO.get_or_init(Self::mario),
            Game::Zelda => ZELDA.get_or_init(Self::zelda),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        let file: VocabularyFile =
            serde_json::from_str(text).map_err(|e| CorpusError::BadVocabulary(e.to_string()))?;
        Self::new(file.game, file.entries, &file.aliases)
    }

    /// Validate and build. `aliases` maps extra symbols onto the symbol of an entry.
    pub fn new(
        game: Game,
        mut entries: Vec<TileEntry>,
        aliases: &BTreeMap<char, char>,
    ) -> Result<Self, CorpusError> {
        let expected = match game {
            Game::Mario => MARIO_CHANNELS,
            Game::Zelda => ZELDA_CHANNELS,
        };
        if entries.len() != expected {
            return Err(CorpusError::BadVocabulary(format!(
                "{game} vocabulary needs {expected} channels, found {}",
                entries.len()
            )));
        }
        entries.sort_by_key(|e| e.channel);
        for (i, e) in entries.iter().enumerate() {
            if usize::from(e.channel) != i {
                return Err(CorpusError::BadVocabulary(format!(
                    "channels must be 0..{} without gaps; missing {i}",
                    expected - 1
                )));
            }
        }
        let mut lookup = BTreeMap::new();
        for e in &entries {
            if lookup.insert(e.symbol, e.channel).is_some() {
                return Err(CorpusError::BadVocabulary(format!("duplicate symbol {:?}", e.symbol)));
            }
        }
        for (&alias, &target) in aliases {
            let channel = *lookup.get(&target).ok_or_else(|| {
                CorpusError::BadVocabulary(format!("alias {alias:?} targets unknown symbol {target:?}"))
            })?;
            if lookup.insert(alias, channel).is_some() {
                return Err(CorpusError::BadVocabulary(format!("duplicate symbol {alias:?}")));
            }
        }
        let roles: Vec<_> = entries.iter().filter_map(|e| e.role).collect();
        if roles.len() != roles.iter().collect::<BTreeSet<_>>().len() {
            return Err(CorpusError::BadVocabulary("a role is assigned twice".into()));
        }
        Ok(Self {
            game,
            entries,
            lookup,
        })
    }

    pub fn game(&self) -> Game {
        self.game
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TileEntry] {
        &self.entries
    }

    pub fn channel(&self, symbol: char) -> Option<u8> {
        self.lookup.get(&symbol).copied()
    }

    pub fn symbol(&self, channel: u8) -> char {
        self.entries[usize::from(channel)].symbol
    }

    pub fn flags(&self, channel: u8) -> &TileFlags {
        &self.entries[usize::from(channel)].flags
    }

    pub fn role_channel(&self, role: TileRole) -> Option<u8> {
        self.entries.iter().find(|e| e.role == Some(role)).map(|e| e.channel)
    }

    /// Channel for `role`; panics if the vocabulary lacks it.
    pub fn require_role(&self, role: TileRole) -> u8 {
        self.role_channel(role)
            .unwrap_or_else(|| panic!("{} vocabulary has no {role:?} tile", self.game))
    }
}

/// Functional class of a raw VGLC Zelda symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReducedTile {
    Floor,
    Wall,
    Water,
    Void,
}

#[derive(Debug, Clone, Deserialize)]
struct ReductionFile {
    floor: Vec<char>,
    wall: Vec<char>,
    water: Vec<char>,
    void: Vec<char>,
}

/// VGLC Zelda symbol → reduced tile class.
#[derive(Debug, Clone)]
pub struct ZeldaReduction {
    table: BTreeMap<char, ReducedTile>,
}

const REDUCTION_JSON: &str = include_str!("../../data/zelda_reduction.json");

impl Default for ZeldaReduction {
    fn default() -> Self {
        Self::from_json(REDUCTION_JSON).expect("bundled Zelda reduction is valid")
    }
}

impl ZeldaReduction {
    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        let file: ReductionFile =
            serde_json::from_str(text).map_err(|e| CorpusError::BadVocabulary(e.to_string()))?;
        let mut table = BTreeMap::new();
        let groups = [
            (file.floor, ReducedTile::Floor),
            (file.wall, ReducedTile::Wall),
            (file.water, ReducedTile::Water),
            (file.void, ReducedTile::Void),
        ];
        for (symbols, class) in groups {
            for s in symbols {
                if table.insert(s, class).is_some() {
                    return Err(CorpusError::BadVocabulary(format!("symbol {s:?} reduced twice")));
                }
            }
        }
        Ok(Self { table })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn reduce(&self, symbol: char) -> Option<ReducedTile> {
        self.table.get(&symbol).copied()
    }
}
