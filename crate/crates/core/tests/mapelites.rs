use std::collections::BTreeSet;

use levelgen_core::eval::Scheme;
use levelgen_core::mapelites::{load_snapshot, write_snapshot, Elite, Engine, Insertion};
use levelgen_core::rng::seeded;
use levelgen_core::{EncodingMode, RunConfig};
use proptest::prelude::*;

fn cfg(scheme: Scheme, mode: EncodingMode, seed: u64, evaluations: usize) -> RunConfig {
    RunConfig {
        game: scheme.game(),
        scheme,
        mode,
        seed,
        evaluations,
        ..RunConfig::default()
    }
}

fn some_elite(engine: &Engine) -> Elite {
    let g = engine.config().mode.random_genome(engine.layout(), &mut seeded(3));
    let e = engine.evaluate(&g).unwrap();
    Elite {
        genome: g,
        fitness: e.fitness,
        bin: e.bin,
        stats: e.stats,
        birth: 0,
    }
}

#[test]
fn fitter_elite_replaces_and_ties_keep_the_incumbent() {
    let engine = Engine::from_config(cfg(Scheme::Wwr, EncodingMode::Direct2Gan, 1, 10)).unwrap();
    let mut a = engine.empty_archive();
    assert_eq!(a.qd_score(), 0.0);
    let base = some_elite(&engine);
    let with = |f: f64, birth: u64| Elite {
        fitness: f,
        birth,
        ..base.clone()
    };
    assert_eq!(a.insert(with(3.0, 1)), Insertion::NewBin);
    assert_eq!(a.insert(with(5.0, 2)), Insertion::Replaced);
    assert_eq!(a.get(&base.bin).unwrap().fitness, 5.0);
    assert_eq!(a.insert(with(5.0, 3)), Insertion::Rejected);
    assert_eq!(a.get(&base.bin).unwrap().birth, 2);
    assert_eq!(a.insert(with(4.0, 4)), Insertion::Rejected);
    assert_eq!(a.filled(), 1);
    let mut other = with(2.0, 5);
    other.bin = other.bin.iter().map(|b| if *b == 0 { 1 } else { b - 1 }).collect();
    assert_eq!(a.insert(other), Insertion::NewBin);
    assert_eq!(a.filled(), 2);
    assert_eq!(a.qd_score(), 7.0);
}

#[test]
fn hybrid_initial_population_is_all_cppn() {
    let engine = Engine::from_config(cfg(Scheme::DistinctBtr, EncodingMode::CppnThenDirect2Gan, 2, 100)).unwrap();
    let a = engine.initialize();
    assert!(a.filled() > 0);
    assert_eq!(a.cppn_elites(), a.filled());
    let engine = Engine::from_config(cfg(Scheme::Wwr, EncodingMode::Direct2Gan, 2, 100)).unwrap();
    assert_eq!(engine.initialize().cppn_elites(), 0);
}

#[test]
fn distinct_initial_bins_all_fill() {
    let engine = Engine::from_config(cfg(Scheme::SumDsl, EncodingMode::Direct2Gan, 5, 100)).unwrap();
    let a = engine.initialize();
    let bins: BTreeSet<Vec<usize>> = (0..100u64)
        .map(|i| {
            let mut rng = levelgen_core::rng::stream(5, levelgen_core::rng::Phase::Initial, i);
            let g = EncodingMode::Direct2Gan.random_genome(engine.layout(), &mut rng);
            engine.evaluate(&g).unwrap().bin
        })
        .collect();
    assert_eq!(a.filled(), bins.len());
    assert_eq!(a.counters.evaluations, 100);
}

#[test]
fn thousand_steps_are_reproducible() {
    let run = || {
        let e = Engine::from_config(cfg(Scheme::Wwr, EncodingMode::CppnThenDirect2Gan, 9, 1100)).unwrap();
        e.run()
    };
    let (a, la) = run();
    let (b, lb) = run();
    assert_eq!(a, b);
    assert_eq!(la, lb);
    assert_eq!(a.counters.evaluations, 1100);
}

#[test]
fn snapshot_round_trip_is_byte_identical() {
    let e = Engine::from_config(cfg(Scheme::DistinctAsad, EncodingMode::CppnThenDirect2Gan, 6, 400)).unwrap();
    let (a, _) = e.run();
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    write_snapshot(&a, d1.path()).unwrap();
    let back = load_snapshot(d1.path()).unwrap();
    assert_eq!(back, a);
    write_snapshot(&back, d2.path()).unwrap();
    let files = |d: &std::path::Path| {
        let mut v: Vec<_> = walk(d).into_iter().map(|p| p.strip_prefix(d).unwrap().to_path_buf()).collect();
        v.sort();
        v
    };
    assert_eq!(files(d1.path()), files(d2.path()));
    for f in files(d1.path()) {
        assert_eq!(
            std::fs::read(d1.path().join(&f)).unwrap(),
            std::fs::read(d2.path().join(&f)).unwrap(),
            "{}",
            f.display()
        );
    }
    let csv = std::fs::read_to_string(d1.path().join("archive.csv")).unwrap();
    assert_eq!(csv.lines().count() - 1, a.filled());
    let header = csv.lines().next().unwrap();
    assert!(header.ends_with("fitness,kind,provenance,birth"));
    let cppn_rows = csv.lines().skip(1).filter(|l| l.contains(",cppn,")).count();
    assert_eq!(cppn_rows, a.cppn_elites());
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

#[test]
fn stored_fitness_matches_reevaluation() {
    for scheme in [Scheme::SumDsl, Scheme::Wwr] {
        let e = Engine::from_config(cfg(scheme, EncodingMode::CppnThenDirect2Gan, 8, 600)).unwrap();
        let (a, _) = e.run();
        assert!(e.recheck(&a, usize::MAX));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn every_logged_curve_is_monotone(seed in 0u64..1000, mode in 0usize..3) {
        let mode = [EncodingMode::Cppn2Gan, EncodingMode::Direct2Gan, EncodingMode::CppnThenDirect2Gan][mode];
        let mut c = cfg(Scheme::DistinctBtr, mode, seed, 250);
        c.log_every = 25;
        let (a, log) = Engine::from_config(c).unwrap().run();
        for w in log.windows(2) {
            prop_assert!(w[1].filled >= w[0].filled);
            prop_assert!(w[1].qd_score >= w[0].qd_score);
            prop_assert!(w[1].evaluations > w[0].evaluations);
        }
        prop_assert_eq!(log.last().unwrap().evaluations, 250);
        prop_assert!(a.filled() <= a.descriptor.cell_count());
    }
}
