//! MAP-Elites: archive, run configuration and the main loop.

mod archive;
mod snapshot;

use std::path::PathBuf;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{assemble, AssemblyError, Phenotype};
use crate::decoder::{DecoderError, GeneratorModel, SegmentDecoder, StubDecoder};
use crate::direct::Layout;
use crate::eval::{evaluate, EvalError, Evaluation, Scheme, SchemeRanges};
use crate::hybrid::{reproduce, EncodingMode, Genome, ReproductionParams, ReproductionReport};
use crate::rng::{stream, Phase};
use crate::Game;
pub use archive::{Archive, Counters, Elite, Insertion};
pub use snapshot::{load_snapshot, write_snapshot, write_stats_log, SnapshotError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
}

/// Why an offspring could not be placed.
#[derive(Debug, Error)]
pub enum OffspringError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Which segment decoder a run uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    #[default]
    Stub,
    /// The generator at `model`.
    Loaded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub game: Game,
    pub scheme: Scheme,
    pub mode: EncodingMode,
    pub initial_population: usize,
    /// Individuals generated in total, the initial population included.
    pub evaluations: usize,
    pub seed: u64,
    pub decoder: DecoderKind,
    /// Exported generator manifest, required by the loaded decoder.
    pub model: Option<PathBuf>,
    pub ranges: SchemeRanges,
    pub mario_segments: usize,
    pub zelda_rows: usize,
    pub zelda_cols: usize,
    /// Overrides the mode's default reproduction settings.
    pub reproduction: Option<ReproductionParams>,
    /// Offspring produced from one archive state before inserting them.
    pub batch_size: usize,
    /// Evaluations between rows of the stats log.
    pub log_every: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            game: Game::Zelda,
            scheme: Scheme::Wwr,
            mode: EncodingMode::CppnThenDirect2Gan,
            initial_population: 100,
            evaluations: 100_000,
            seed: 0,
            decoder: DecoderKind::Stub,
            model: None,
            ranges: SchemeRanges::default(),
            mario_segments: 10,
            zelda_rows: 5,
            zelda_cols: 5,
            reproduction: None,
            batch_size: 1,
            log_every: 1000,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: &str| Err(RunError::Config(m.into()));
        if self.scheme.game() != self.game {
            return Err(RunError::Config(format!("scheme {} is for {}, not {}", self.scheme, self.scheme.game(), self.game)));
        }
        match (self.decoder, &self.model) {
            (DecoderKind::Loaded, None) => return bad("decoder \"loaded\" needs a model path"),
            (DecoderKind::Stub, Some(_)) => return bad("a model path is set but the decoder is \"stub\""),
            _ => {}
        }
        if self.initial_population == 0 {
            return bad("initial population must be at least 1");
        }
        if self.batch_size == 0 || self.log_every == 0 {
            return bad("batch size and log interval must be positive");
        }
        if self.mario_segments == 0 || self.zelda_rows == 0 || self.zelda_cols == 0 {
            return bad("level dimensions must be positive");
        }
        if self.zelda_rows * self.zelda_cols > 64 {
            return bad("at most 64 rooms are supported");
        }
        let r = &self.ranges;
        if r.bins == 0 || r.segments == 0 || r.rooms == 0 || r.backtrack_bins == 0 {
            return bad("bin counts must be positive");
        }
        for (lo, hi) in [r.decoration_sum, r.coverage_sum, r.leniency_sum, r.alternating_coverage, r.alternating_decoration] {
            if !(lo < hi) {
                return bad("every range needs lower < upper");
            }
        }
        if let Some(p) = &self.reproduction {
            for v in [p.conversion, p.crossover, p.direct.per_gene] {
                if !(0.0..=1.0).contains(&v) {
                    return bad("probabilities must lie in [0, 1]");
                }
            }
        }
        Ok(())
    }

    pub fn layout(&self, latent: usize) -> Layout {
        match self.game {
            Game::Mario => Layout::Mario {
                segments: self.mario_segments,
                latent,
            },
            Game::Zelda => Layout::Zelda {
                rows: self.zelda_rows,
                cols: self.zelda_cols,
                latent,
            },
        }
    }

    pub fn params(&self) -> ReproductionParams {
        self.reproduction.unwrap_or_else(|| self.mode.default_params())
    }
}

/// One row of the progress log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub evaluations: u64,
    pub filled: usize,
    pub qd_score: f64,
    pub cppn_elites: usize,
    pub direct_elites: usize,
    pub failures: u64,
}

impl StatsRow {
    pub fn of(archive: &Archive) -> Self {
        let cppn = archive.cppn_elites();
        Self {
            evaluations: archive.counters.evaluations,
            filled: archive.filled(),
            qd_score: archive.qd_score(),
            cppn_elites: cppn,
            direct_elites: archive.filled() - cppn,
            failures: archive.counters.failures,
        }
    }
}

pub struct Offspring {
    pub genome: Genome,
    pub report: ReproductionReport,
    pub result: Result<Evaluation, OffspringError>,
}

/// A configured run: decoder, layout and operators.
pub struct Engine {
    cfg: RunConfig,
    layout: Layout,
    decoder: Arc<dyn SegmentDecoder>,
    params: ReproductionParams,
}

impl Engine {
    pub fn new(cfg: RunConfig, decoder: Arc<dyn SegmentDecoder>) -> Result<Self, RunError> {
        cfg.validate()?;
        if decoder.game() != cfg.game {
            return Err(RunError::Config(format!("decoder is for {}, run is {}", decoder.game(), cfg.game)));
        }
        let layout = cfg.layout(decoder.latent_size());
        let params = cfg.params();
        Ok(Self {
            cfg,
            layout,
            decoder,
            params,
        })
    }

    /// Engine with the configured decoder.
    pub fn from_config(cfg: RunConfig) -> Result<Self, RunError> {
        cfg.validate()?;
        let decoder: Arc<dyn SegmentDecoder> = match (&cfg.model, cfg.decoder) {
            (Some(path), DecoderKind::Loaded) => Arc::new(GeneratorModel::load(path)?),
            _ => Arc::new(StubDecoder::standard(cfg.game)),
        };
        Self::new(cfg, decoder)
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn decoder(&self) -> &dyn SegmentDecoder {
        self.decoder.as_ref()
    }

    pub fn phenotype(&self, genome: &Genome) -> Result<Phenotype, AssemblyError> {
        assemble(&genome.genotype, self.decoder.as_ref(), &self.layout)
    }

    pub fn evaluate(&self, genome: &Genome) -> Result<Evaluation, OffspringError> {
        let p = self.phenotype(genome)?;
        Ok(evaluate(&p, self.cfg.scheme, &self.cfg.ranges)?)
    }

    pub fn empty_archive(&self) -> Archive {
        Archive::new(self.cfg.scheme.descriptor(&self.cfg.ranges))
    }

    fn place(&self, archive: &mut Archive, genome: Genome, result: Result<Evaluation, OffspringError>, birth: u64) {
        archive.counters.evaluations += 1;
        match result {
            Ok(e) => {
                archive.insert(Elite {
                    genome,
                    fitness: e.fitness,
                    bin: e.bin,
                    stats: e.stats,
                    birth,
                });
            }
            Err(_) => archive.counters.failures += 1,
        }
    }

    /// Evaluate and insert the random initial population.
    pub fn initialize(&self) -> Archive {
        let mut archive = self.empty_archive();
        let n = self.cfg.initial_population.min(self.cfg.evaluations.max(1));
        let batch: Vec<(Genome, Result<Evaluation, OffspringError>)> = (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(self.cfg.seed, Phase::Initial, i);
                let g = self.cfg.mode.random_genome(&self.layout, &mut rng);
                let r = self.evaluate(&g);
                (g, r)
            })
            .collect();
        for (g, r) in batch {
            self.place(&mut archive, g, r, 0);
        }
        archive
    }

    /// Offspring number `iteration` bred from `archive`. Depends only on the
    /// archive, the master seed and the iteration index. An empty archive
    /// yields a random individual.
    pub fn offspring(&self, archive: &Archive, iteration: u64) -> Offspring {
        let mut rng = stream(self.cfg.seed, Phase::Step, iteration);
        let Some(parent) = archive.sample(&mut rng).map(|e| e.genome.clone()) else {
            // Nothing to breed from yet: draw a fresh random individual.
            let genome = self.cfg.mode.random_genome(&self.layout, &mut rng);
            let result = self.evaluate(&genome);
            return Offspring {
                genome,
                report: ReproductionReport::default(),
                result,
            };
        };
        let bred = reproduce(
            &parent,
            |r: &mut _| archive.sample(r).map(|e| &e.genome),
            &self.layout,
            &self.params,
            &mut rng,
        );
        match bred {
            Ok((genome, report)) => {
                let result = self.evaluate(&genome);
                Offspring { genome, report, result }
            }
            Err(e) => Offspring {
                genome: parent,
                report: ReproductionReport::default(),
                result: Err(e.into()),
            },
        }
    }

    /// One sequential MAP-Elites iteration.
    pub fn step(&self, archive: &mut Archive, iteration: u64) {
        let o = self.offspring(archive, iteration);
        self.absorb(archive, o, iteration);
    }

    fn absorb(&self, archive: &mut Archive, o: Offspring, iteration: u64) {
        archive.counters.conversions += o.report.converted as u64;
        self.place(archive, o.genome, o.result, iteration + 1);
    }

    /// `count` offspring bred in parallel from the current archive, inserted
    /// in iteration order.
    pub fn step_batch(&self, archive: &mut Archive, first: u64, count: usize) {
        let snapshot: &Archive = archive;
        let batch: Vec<Offspring> = (first..first + count as u64)
            .into_par_iter()
            .map(|i| self.offspring(snapshot, i))
            .collect();
        for (k, o) in batch.into_iter().enumerate() {
            self.absorb(archive, o, first + k as u64);
        }
    }

    /// Whole run; `progress` sees the archive after every log interval.
    pub fn run_with(&self, mut progress: impl FnMut(&Archive, &StatsRow)) -> (Archive, Vec<StatsRow>) {
        let mut archive = self.initialize();
        let mut log = vec![StatsRow::of(&archive)];
        progress(&archive, &log[0]);
        let total = self.cfg.evaluations as u64;
        let mut iteration = 0u64;
        let mut next_log = self.cfg.log_every as u64;
        while archive.counters.evaluations < total {
            let remaining = (total - archive.counters.evaluations) as usize;
            let count = self.cfg.batch_size.min(remaining);
            if count == 1 {
                self.step(&mut archive, iteration);
            } else {
                self.step_batch(&mut archive, iteration, count);
            }
            iteration += count as u64;
            if archive.counters.evaluations >= next_log || archive.counters.evaluations == total {
                let row = StatsRow::of(&archive);
                progress(&archive, &row);
                log.push(row);
                while next_log <= archive.counters.evaluations {
                    next_log += self.cfg.log_every as u64;
                }
            }
        }
        (archive, log)
    }

    pub fn run(&self) -> (Archive, Vec<StatsRow>) {
        self.run_with(|_, _| {})
    }

    /// Re-evaluate up to `limit` elites and compare with the stored values.
    pub fn recheck(&self, archive: &Archive, limit: usize) -> bool {
        archive.elites().take(limit).all(|e| match self.evaluate(&e.genome) {
            Ok(ev) => ev.fitness == e.fitness && ev.bin == e.bin,
            Err(_) => false,
        })
    }
}

/// Uniformly random index below `n`.
pub(crate) fn uniform_index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.random_range(0..n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: EncodingMode, scheme: Scheme) -> RunConfig {
        RunConfig {
            game: scheme.game(),
            scheme,
            mode,
            initial_population: 10,
            evaluations: 60,
            seed: 4,
            log_every: 20,
            ..RunConfig::default()
        }
    }

    #[test]
    fn config_checks() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.scheme = Scheme::SumDsl;
        assert!(c.validate().is_err());
        c = RunConfig {
            initial_population: 0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        c = RunConfig {
            decoder: DecoderKind::Loaded,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        c.model = Some("generator.json".into());
        assert!(c.validate().is_ok());
        c.decoder = DecoderKind::Stub;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"game":"mario","scheme":"sum-dsl","mode":"direct2gan"}"#).unwrap();
        assert_eq!(c.initial_population, 100);
        assert_eq!(c.mode, EncodingMode::Direct2Gan);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn run_counts_and_logs() {
        let e = Engine::from_config(small(EncodingMode::CppnThenDirect2Gan, Scheme::Wwr)).unwrap();
        let (a, log) = e.run();
        assert_eq!(a.counters.evaluations, 60);
        assert_eq!(log.first().unwrap().evaluations, 10);
        assert_eq!(log.last().unwrap().evaluations, 60);
        assert!(a.filled() > 0);
        assert!(e.recheck(&a, usize::MAX));
    }

    #[test]
    fn hybrid_initial_population_is_cppn() {
        let e = Engine::from_config(small(EncodingMode::CppnThenDirect2Gan, Scheme::DistinctBtr)).unwrap();
        let a = e.initialize();
        assert_eq!(a.cppn_elites(), a.filled());
    }

    #[test]
    fn batched_runs_are_reproducible() {
        let mut c = small(EncodingMode::Direct2Gan, Scheme::SumDsl);
        c.batch_size = 8;
        let e = Engine::from_config(c).unwrap();
        let (a, _) = e.run();
        let (b, _) = e.run();
        assert_eq!(a, b);
    }
}
