//! Several seeds of one or more encoding modes, and the aggregate report.
//!
//! Runs go to `<dir>/<mode>/seed-<seed>/`; the report goes to `<dir>/report/`:
//!
//! * `runs.csv`: one row per run
//! * `summary.csv`: mean and 95% CI of QD score, filled bins and beatable fraction per mode
//! * `curves.csv`: mean and CI of QD score and filled bins at every logged evaluation count
//! * `occupancy/`: per slice, which modes filled each bin in any run
//! * `best_method/`: per slice, the mode with the highest mean elite fitness per bin
//! * `failures.txt`: seeds whose run failed, if any

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use levelgen_core::eval::Descriptor;
use levelgen_core::mapelites::StatsRow;
use levelgen_core::{Archive, EncodingMode, RunConfig};
use rayon::prelude::*;

use crate::run::execute;
use crate::summary::{beatable_fraction, mean_ci, Ci};
use crate::{CliError, Result};

pub struct BatchSpec {
    pub base: RunConfig,
    pub modes: Vec<EncodingMode>,
    pub seeds: Vec<u64>,
    pub dir: PathBuf,
}

pub struct RunRecord {
    pub mode: EncodingMode,
    pub seed: u64,
    pub archive: Archive,
    pub log: Vec<StatsRow>,
}

pub struct Failure {
    pub mode: EncodingMode,
    pub seed: u64,
    pub reason: String,
}

pub struct BatchReport {
    pub descriptor: Descriptor,
    pub modes: Vec<EncodingMode>,
    /// Ordered by mode, then seed.
    pub runs: Vec<RunRecord>,
    pub failures: Vec<Failure>,
}

/// Tie tolerance for comparing mean fitness between modes.
const TIE_EPS: f64 = 1e-12;

pub fn run_dir(dir: &Path, mode: EncodingMode, seed: u64) -> PathBuf {
    dir.join(mode.name()).join(format!("seed-{seed}"))
}

/// Execute every (mode, seed) pair on the current rayon pool.
pub fn run_batch(spec: &BatchSpec) -> Result<BatchReport> {
    if spec.seeds.is_empty() || spec.modes.is_empty() {
        return Err(CliError::Config("a batch needs at least one run and one mode".into()));
    }
    let jobs: Vec<(EncodingMode, u64, RunConfig)> = spec
        .modes
        .iter()
        .flat_map(|&mode| {
            spec.seeds.iter().map(move |&seed| {
                let cfg = RunConfig {
                    mode,
                    seed,
                    // Reproduction overrides belong to the configured mode only.
                    reproduction: spec.base.reproduction.filter(|_| mode == spec.base.mode),
                    output_dir: Some(run_dir(&spec.dir, mode, seed)),
                    ..spec.base.clone()
                };
                (mode, seed, cfg)
            })
        })
        .collect();
    for (_, _, cfg) in &jobs {
        cfg.validate()?;
    }
    type Outcome = (EncodingMode, u64, Result<(Archive, Vec<StatsRow>)>);
    let results: Vec<Outcome> = jobs
        .into_par_iter()
        .map(|(mode, seed, cfg)| {
            let dir = cfg.output_dir.clone().expect("set above");
            let r = execute(&cfg, &dir, |_| {}).map(|o| (o.archive, o.log));
            (mode, seed, r)
        })
        .collect();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (mode, seed, r) in results {
        match r {
            Ok((archive, log)) => runs.push(RunRecord { mode, seed, archive, log }),
            Err(e) => failures.push(Failure {
                mode,
                seed,
                reason: format!("{e:#}"),
            }),
        }
    }
    Ok(BatchReport {
        descriptor: spec.base.scheme.descriptor(&spec.base.ranges),
        modes: spec.modes.clone(),
        runs,
        failures,
    })
}

impl BatchReport {
    fn runs_of(&self, mode: EncodingMode) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(move |r| r.mode == mode)
    }

    /// (mode, metric name, interval) for QD score, filled bins and beatable fraction.
    pub fn metrics(&self) -> Vec<(EncodingMode, &'static str, Ci)> {
        let mut out = Vec::new();
        for &mode in &self.modes {
            let col = |f: &dyn Fn(&RunRecord) -> f64| mean_ci(&self.runs_of(mode).map(f).collect::<Vec<_>>());
            out.push((mode, "qd_score", col(&|r| r.archive.qd_score())));
            out.push((mode, "filled_bins", col(&|r| r.archive.filled() as f64)));
            out.push((mode, "beatable_fraction", col(&|r| beatable_fraction(&r.archive))));
        }
        out
    }

    /// Modes that filled `bin` in at least one run.
    pub fn occupants(&self, bin: &[usize]) -> Vec<EncodingMode> {
        self.modes
            .iter()
            .copied()
            .filter(|&m| self.runs_of(m).any(|r| r.archive.get(bin).is_some()))
            .collect()
    }

    /// Mean fitness of `bin`'s elite over the runs of `mode` that filled it.
    pub fn mean_fitness(&self, mode: EncodingMode, bin: &[usize]) -> Option<f64> {
        let v: Vec<f64> = self
            .runs_of(mode)
            .filter_map(|r| r.archive.get(bin).map(|e| e.fitness))
            .collect();
        (!v.is_empty()).then(|| mean_ci(&v).mean)
    }

    /// Modes with the highest mean fitness in `bin`; several on a tie.
    pub fn best_modes(&self, bin: &[usize]) -> Vec<EncodingMode> {
        let scored: Vec<(EncodingMode, f64)> = self
            .modes
            .iter()
            .filter_map(|&m| self.mean_fitness(m, bin).map(|f| (m, f)))
            .collect();
        let Some(top) = scored.iter().map(|s| s.1).reduce(f64::max) else {
            return Vec::new();
        };
        scored.into_iter().filter(|s| top - s.1 <= TIE_EPS).map(|s| s.0).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |p: &Path| format!("writing {}", p.display());
        std::fs::create_dir_all(dir).with_context(|| io(dir))?;

        let mut runs = String::from("mode,seed,status,qd_score,filled_bins,beatable_fraction,cppn_elites,direct_elites\n");
        for r in &self.runs {
            let a = &r.archive;
            let _ = writeln!(
                runs,
                "{},{},ok,{},{},{},{},{}",
                r.mode,
                r.seed,
                a.qd_score(),
                a.filled(),
                beatable_fraction(a),
                a.cppn_elites(),
                a.filled() - a.cppn_elites()
            );
        }
        for f in &self.failures {
            let _ = writeln!(runs, "{},{},failed,,,,,", f.mode, f.seed);
        }
        std::fs::write(dir.join("runs.csv"), runs).with_context(|| io(dir))?;

        let mut summary = String::from("mode,metric,n,mean,ci_low,ci_high\n");
        for (mode, metric, ci) in self.metrics() {
            let _ = writeln!(summary, "{mode},{metric},{},{},{}", ci.n, ci.mean, ci.csv_bounds());
        }
        std::fs::write(dir.join("summary.csv"), summary).with_context(|| io(dir))?;

        let mut curves =
            String::from("mode,evaluations,n,qd_mean,qd_ci_low,qd_ci_high,filled_mean,filled_ci_low,filled_ci_high\n");
        for &mode in &self.modes {
            let mut points: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
            for r in self.runs_of(mode) {
                for row in &r.log {
                    let p = points.entry(row.evaluations).or_default();
                    p.0.push(row.qd_score);
                    p.1.push(row.filled as f64);
                }
            }
            for (evals, (qd, filled)) in points {
                let (q, f) = (mean_ci(&qd), mean_ci(&filled));
                let _ = writeln!(
                    curves,
                    "{mode},{evals},{},{},{},{},{}",
                    q.n,
                    q.mean,
                    q.csv_bounds(),
                    f.mean,
                    f.csv_bounds()
                );
            }
        }
        std::fs::write(dir.join("curves.csv"), curves).with_context(|| io(dir))?;

        self.write_slices(&dir.join("occupancy"), |bin| label(&self.occupants(bin)))?;
        self.write_slices(&dir.join("best_method"), |bin| {
            let best = self.best_modes(bin);
            match best.len() {
                0 | 1 => label(&best),
                _ => format!("tie:{}", label(&best)),
            }
        })?;

        if !self.failures.is_empty() {
            let mut text = String::new();
            for f in &self.failures {
                let _ = writeln!(text, "{} seed {}: {}", f.mode, f.seed, f.reason);
            }
            std::fs::write(dir.join("failures.txt"), text).with_context(|| io(dir))?;
        }
        Ok(())
    }

    /// One CSV matrix per value of the last dimension: rows are the first
    /// dimension, columns the second.
    fn write_slices(&self, dir: &Path, cell: impl Fn(&[usize]) -> String) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let d = &self.descriptor;
        let (rows, cols, slices) = match d.cardinalities[..] {
            [a, b, c] => (a, b, c),
            _ => return Err(anyhow::anyhow!("expected three descriptor dimensions").into()),
        };
        for k in 0..slices {
            let mut out = format!("{}\\{}", d.names[0], d.names[1]);
            for c in 0..cols {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
            for r in 0..rows {
                let _ = write!(out, "{r}");
                for c in 0..cols {
                    let _ = write!(out, ",{}", cell(&[r, c, k]));
                }
                out.push('\n');
            }
            let path = dir.join(format!("{}_{k}.csv", d.names[2]));
            std::fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// Modes joined with `+`; `-` for none.
fn label(modes: &[EncodingMode]) -> String {
    if modes.is_empty() {
        "-".into()
    } else {
        modes.iter().map(|m| m.name()).collect::<Vec<_>>().join("+")
    }
}
