//! JSON run configs and the command-line flags that override them.

use std::path::{Path, PathBuf};

use clap::Args;
use levelgen_core::eval::Scheme;
use levelgen_core::mapelites::DecoderKind;
use levelgen_core::{EncodingMode, Game, RunConfig};

use crate::{CliError, Result};

/// Flags shared by `run` and `batch`. Every flag overrides the config key of
/// the same name.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file; defaults apply to missing keys.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub game: Option<String>,
    #[arg(long)]
    pub scheme: Option<String>,
    /// cppn2gan, direct2gan or cppn-then-direct2gan.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub evaluations: Option<usize>,
    #[arg(long)]
    pub initial_population: Option<usize>,
    /// stub or loaded.
    #[arg(long)]
    pub decoder: Option<String>,
    /// Generator manifest; implies `--decoder loaded`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub log_every: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Parse a config file. Errors carry the file name, line and column.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}:{m}", path.display())),
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("{}:{}: {e}", e.line(), e.column())))
}

fn bad_value(flag: &str, v: &str) -> CliError {
    CliError::Config(format!("--{flag}: unknown value {v:?}"))
}

impl Overrides {
    /// Config file (or defaults) with the flags applied, validated.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(g) = &self.game {
            cfg.game = match g.as_str() {
                "mario" => Game::Mario,
                "zelda" => Game::Zelda,
                _ => return Err(bad_value("game", g)),
            };
        }
        if let Some(s) = &self.scheme {
            cfg.scheme = Scheme::parse(s).ok_or_else(|| bad_value("scheme", s))?;
            if self.game.is_none() {
                cfg.game = cfg.scheme.game();
            }
        }
        if let Some(m) = &self.mode {
            cfg.mode = EncodingMode::parse(m).ok_or_else(|| bad_value("mode", m))?;
        }
        if let Some(d) = &self.decoder {
            cfg.decoder = match d.as_str() {
                "stub" => DecoderKind::Stub,
                "loaded" => DecoderKind::Loaded,
                _ => return Err(bad_value("decoder", d)),
            };
        }
        if let Some(m) = &self.model {
            cfg.model = Some(m.clone());
            if self.decoder.is_none() {
                cfg.decoder = DecoderKind::Loaded;
            }
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            )*};
        }
        set!(seed, evaluations, initial_population, batch_size, log_every);
        if let Some(o) = &self.output {
            cfg.output_dir = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Output directory of a run: the configured one, or a name built from the
/// run's settings.
pub fn run_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| {
        PathBuf::from("runs").join(format!("{}-{}-seed{}", cfg.scheme, cfg.mode, cfg.seed))
    })
}

pub fn write_config(cfg: &RunConfig, path: &Path) -> std::io::Result<()> {
    let mut s = serde_json::to_string_pretty(cfg).expect("config serializes");
    s.push('\n');
    std::fs::write(path, s)
}
