//! A single run and the files it leaves behind.
//!
//! ```text
//! <dir>/config.json        resolved config
//! <dir>/stats.csv          progress log
//! <dir>/snapshot/          final archive
//! <dir>/renders/           best elite of every slice of the last dimension
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use levelgen_core::assembly::render_phenotype;
use levelgen_core::mapelites::{load_snapshot, write_snapshot, write_stats_log, Elite, Engine, StatsRow};
use levelgen_core::{Archive, RunConfig};

use crate::config::{load_config, write_config};
use crate::summary::beatable_fraction;
use crate::{CliError, Result};

pub struct RunOutcome {
    pub archive: Archive,
    pub log: Vec<StatsRow>,
}

/// Run `cfg` and write its directory. `progress` sees every log row.
pub fn execute(cfg: &RunConfig, dir: &Path, mut progress: impl FnMut(&StatsRow)) -> Result<RunOutcome> {
    let engine = Engine::from_config(cfg.clone())?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_config(cfg, &dir.join("config.json")).context("writing config.json")?;
    let (archive, log) = engine.run_with(|_, row| progress(row));
    write_stats_log(&log, &dir.join("stats.csv")).context("writing stats.csv")?;
    write_snapshot(&archive, &dir.join("snapshot")).context("writing snapshot")?;
    write_renders(&engine, &archive, &dir.join("renders"))?;
    Ok(RunOutcome { archive, log })
}

/// Fittest elite for each value of the last descriptor dimension; the first
/// in bin order wins ties.
pub fn slice_tops(archive: &Archive) -> BTreeMap<usize, &Elite> {
    let mut tops: BTreeMap<usize, &Elite> = BTreeMap::new();
    for e in archive.elites() {
        let k = *e.bin.last().expect("bins have at least one dimension");
        match tops.get(&k) {
            Some(t) if t.fitness >= e.fitness => {}
            _ => {
                tops.insert(k, e);
            }
        }
    }
    tops
}

fn render_elite(engine: &Engine, e: &Elite) -> Result<String> {
    let p = engine
        .phenotype(&e.genome)
        .with_context(|| format!("re-assembling elite {:?}", e.bin))?;
    Ok(render_phenotype(&p))
}

fn write_renders(engine: &Engine, archive: &Archive, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let dim = archive.descriptor.names.last().cloned().unwrap_or_default();
    let mut index = String::from("slice,bin,fitness,file\n");
    for (k, e) in slice_tops(archive) {
        let file = format!("{dim}_{k}.txt");
        std::fs::write(dir.join(&file), render_elite(engine, e)?).context("writing render")?;
        let bin: Vec<String> = e.bin.iter().map(usize::to_string).collect();
        let _ = writeln!(index, "{k},{},{},{file}", bin.join(" "), e.fitness);
    }
    std::fs::write(dir.join("index.csv"), index).context("writing render index")?;
    Ok(())
}

fn open_run(dir: &Path) -> Result<(Engine, Archive)> {
    let cfg = load_config(&dir.join("config.json"))?;
    let engine = Engine::from_config(cfg)?;
    let archive = load_snapshot(&dir.join("snapshot")).with_context(|| format!("loading snapshot of {}", dir.display()))?;
    Ok((engine, archive))
}

pub fn parse_bin(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Config(format!("bin {text:?} is not a comma-separated list of indices")))
}

/// Text render of the elite in `bin` of the run at `dir`, re-assembled from
/// its genome.
pub fn render_bin(dir: &Path, bin: &[usize]) -> Result<String> {
    let (engine, archive) = open_run(dir)?;
    let e = archive.get(bin).ok_or_else(|| CliError::EmptyBin {
        run: dir.to_path_buf(),
        bin: format!("{bin:?}"),
    })?;
    render_elite(&engine, e)
}

/// Human-readable summary of a finished run.
pub fn describe(dir: &Path) -> Result<String> {
    let (engine, archive) = open_run(dir)?;
    let cfg = engine.config();
    let mut out = String::new();
    let _ = writeln!(out, "run          {}", dir.display());
    let _ = writeln!(out, "scheme       {} ({})", cfg.scheme, archive.descriptor.names.join(" × "));
    let _ = writeln!(out, "mode         {}", cfg.mode);
    let _ = writeln!(out, "seed         {}", cfg.seed);
    let _ = writeln!(out, "evaluations  {}", archive.counters.evaluations);
    let _ = writeln!(out, "filled bins  {} of {}", archive.filled(), archive.descriptor.cell_count());
    let _ = writeln!(out, "QD score     {}", archive.qd_score());
    let _ = writeln!(out, "beatable     {:.4}", beatable_fraction(&archive));
    let _ = writeln!(
        out,
        "elites       {} cppn, {} direct",
        archive.cppn_elites(),
        archive.filled() - archive.cppn_elites()
    );
    let _ = writeln!(out, "conversions  {}", archive.counters.conversions);
    let _ = writeln!(out, "failures     {}", archive.counters.failures);
    if let Some(b) = archive.best() {
        let _ = writeln!(out, "best         {:?} fitness {}", b.bin, b.fitness);
    }
    Ok(out)
}
