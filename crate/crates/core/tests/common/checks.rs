//! Each check returns a one-line summary on success and a reason on failure.

use std::collections::BTreeMap;

use levelgen_core::assembly::{assemble, bucket_door, DoorType, Phenotype};
use levelgen_core::cppn::CppnMutationRates;
use levelgen_core::direct::PolynomialMutation;
use levelgen_core::eval::{Scheme, SchemeRanges};
use levelgen_core::eval_mario::{self, alternation, distinct_count};
use levelgen_core::eval_zelda::{self, backtrack_count, reachable_rooms, room_sequence, wall_water_pct};
use levelgen_core::hybrid::{convert, reproduce, ReproductionParams};
use levelgen_core::mapelites::{Engine, StatsRow};
use levelgen_core::rng::seeded;
use levelgen_core::*;
use rand::Rng;

use super::*;

pub type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn zelda_layout() -> Layout {
    Layout::Zelda { rows: 5, cols: 5, latent: 10 }
}

pub fn mario_layout() -> Layout {
    Layout::Mario { segments: 10, latent: 30 }
}

pub fn random_dungeon(rng: &mut impl Rng) -> Option<Dungeon> {
    let dec = StubDecoder::standard(Game::Zelda);
    let g = DirectGenome::random(zelda_layout(), rng);
    match assemble(&Genotype::Direct(g), &dec, &zelda_layout()) {
        Ok(Phenotype::Zelda(d)) => Some(d),
        _ => None,
    }
}

/// Mario level from a random direct genome, with some segments repeated.
pub fn random_mario(rng: &mut impl Rng) -> MarioLevel {
    let dec = StubDecoder::standard(Game::Mario);
    let layout = mario_layout();
    let mut values = DirectGenome::random(layout, rng).values().to_vec();
    for s in 1..10 {
        if rng.random::<f64>() < 0.3 {
            let (a, b) = values.split_at_mut(s * 30);
            b[..30].copy_from_slice(&a[(s - 1) * 30..s * 30]);
        }
    }
    let g = DirectGenome::new(layout, values).unwrap();
    match assemble(&Genotype::Direct(g), &dec, &layout) {
        Ok(Phenotype::Mario(m)) => m,
        _ => unreachable!(),
    }
}

/// Per-segment (decoration, coverage, leniency) from tile symbols.
fn oracle_segment_scores(level: &MarioLevel) -> Vec<(f64, f64, f64)> {
    let text = levelgen_core::assembly::render_mario(level);
    let rows: Vec<Vec<char>> = text.lines().map(|l| l.chars().collect()).collect();
    let (h, w) = (rows.len(), rows[0].len());
    let sw = w / level.segments;
    (0..level.segments)
        .map(|s| {
            let (mut deco, mut cover, mut len) = (0.0, 0.0, 0.0);
            for row in &rows {
                for &ch in &row[s * sw..(s + 1) * sw] {
                    if "S?QPpEkr".contains(ch) {
                        deco += 1.0;
                    }
                    if "XS?QPpBb".contains(ch) {
                        cover += 1.0;
                    }
                    len += match ch {
                        '?' | 'Q' => 1.0,
                        'P' | 'p' | 'B' | 'b' => -0.5,
                        'E' | 'k' | 'r' => -1.0,
                        _ => 0.0,
                    };
                }
            }
            for c in s * sw..(s + 1) * sw {
                if !"XS?QPpBb".contains(rows[h - 1][c]) {
                    len -= 0.5;
                }
            }
            let n = (h * sw) as f64;
            (deco / n, cover / n, len / n)
        })
        .collect()
}

pub fn oracle_equivalence() -> Check {
    let mut rng = seeded(2024);
    let r = SchemeRanges::default();
    // Alternation.
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=12);
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        worst = worst.max((alternation(&s) - oracle_alternation(&s)).abs());
    }
    ensure(worst <= 1e-12, || format!("alternation differs by {worst}"))?;
    // Distinct counts.
    for _ in 0..1000 {
        let n = rng.random_range(1..=10);
        let mut grids: Vec<TileGrid> = Vec::new();
        for _ in 0..n {
            if !grids.is_empty() && rng.random::<f64>() < 0.4 {
                let mut g = grids[rng.random_range(0..grids.len())].clone();
                if rng.random::<bool>() {
                    let (y, x) = (rng.random_range(0..4), rng.random_range(0..5));
                    g.set(y, x, (g.get(y, x) + 1) % 3);
                }
                grids.push(g);
            } else {
                let cells = (0..20).map(|_| rng.random_range(0..3u8)).collect();
                grids.push(TileGrid::from_cells(5, 4, cells).unwrap());
            }
        }
        ensure(distinct_count(&grids) == oracle_distinct(&grids), || "distinct count differs".into())?;
    }
    // WWR percentages and both Zelda bin mappings.
    let mut zelda = 0;
    let mut worst_pct: f64 = 0.0;
    while zelda < 1000 {
        let Some(d) = random_dungeon(&mut rng) else { continue };
        zelda += 1;
        let reach = oracle_reachable(&d);
        ensure(reachable_rooms(&d) == reach, || "reachable rooms differ".into())?;
        let (w, wa) = wall_water_pct(&d, &reach);
        let (ow, owa) = oracle_wall_water(&d, &reach);
        worst_pct = worst_pct.max((w - ow).abs()).max((wa - owa).abs());
        let stats = eval_zelda::dungeon_stats(&d);
        let cells = (84 * reach.len()) as f64;
        let decile = |p: f64| (((p * cells).round() * 10.0 / cells).floor() as usize).min(9);
        let expect_wwr = vec![decile(ow), decile(owa), reach.len() - 1];
        let got = eval_zelda::bin(&stats, Scheme::Wwr, &r).unwrap();
        ensure(got == expect_wwr, || format!("WWR bin {got:?} vs {expect_wwr:?}"))?;
        let present: Vec<TileGrid> = d.rooms.iter().flatten().cloned().collect();
        let back = match eval_zelda::solve(&d) {
            Some(p) => {
                let mut rooms: Vec<_> = p.iter().map(|s| s.room).collect();
                rooms.dedup();
                (1..rooms.len()).filter(|&i| rooms[..i].contains(&rooms[i])).count()
            }
            None => 0,
        };
        let expect_btr = vec![oracle_distinct(&present) - 1, back.min(24), reach.len() - 1];
        let got = eval_zelda::bin(&stats, Scheme::DistinctBtr, &r).unwrap();
        ensure(got == expect_btr, || format!("DistinctBTR bin {got:?} vs {expect_btr:?}"))?;
    }
    ensure(worst_pct <= 1e-12, || format!("wall/water differs by {worst_pct}"))?;
    // Both Mario bin mappings. Scores are compared at 1e-12 and the oracle
    // bins are taken from the same values so a score sitting on a bin edge
    // cannot flip on summation order.
    for _ in 0..1000 {
        let level = random_mario(&mut rng);
        let stats = eval_mario::level_stats(&level).map_err(|e| e.to_string())?;
        let scores = oracle_segment_scores(&level);
        let col = |k: usize| scores.iter().map(|s| [s.0, s.1, s.2][k]).collect::<Vec<f64>>();
        let sums: Vec<f64> = (0..3).map(|k| col(k).iter().sum()).collect();
        for (a, b) in [stats.decoration_sum, stats.coverage_sum, stats.leniency_sum].iter().zip(&sums) {
            ensure((a - b).abs() <= 1e-12, || format!("segment score sum {a} vs {b}"))?;
        }
        let expect = vec![
            oracle_range_bin(stats.decoration_sum, 0.0, 4.0, 10),
            oracle_range_bin(stats.coverage_sum, 0.0, 8.0, 10),
            oracle_range_bin(stats.leniency_sum, -5.0, 5.0, 10),
        ];
        let got = eval_mario::bin(&stats, Scheme::SumDsl, &r).unwrap();
        ensure(got == expect, || format!("SumDSL bin {got:?} vs {expect:?}"))?;
        for (a, k) in [(stats.alternating_decoration, 0), (stats.alternating_coverage, 1)] {
            let b = oracle_alternation(&col(k));
            ensure((a - b).abs() <= 1e-12, || format!("alternation {a} vs {b}"))?;
        }
        let grids = level.segment_grids();
        let expect = vec![
            oracle_range_bin(stats.alternating_coverage, 0.0, 3.0, 10),
            oracle_range_bin(stats.alternating_decoration, 0.0, 3.0, 10),
            oracle_distinct(&grids) - 1,
        ];
        let got = eval_mario::bin(&stats, Scheme::DistinctAsad, &r).unwrap();
        ensure(got == expect, || format!("DistinctASAD bin {got:?} vs {expect:?}"))?;
    }
    Ok(format!(
        "1000 inputs each: alternation max diff {worst:.1e}, wall/water max diff {worst_pct:.1e}, distinct counts and 4 bin mappings identical"
    ))
}

/// Some mutation history so genomes have hidden structure.
pub fn evolved_cppn(layout: &Layout, rng: &mut impl Rng) -> CppnGenome {
    let mut g = CppnGenome::random(layout.cppn_inputs(), layout.segment_width(), rng);
    for _ in 0..rng.random_range(0..25) {
        g = g.mutate(&CppnMutationRates::default(), rng).0;
    }
    g
}

pub fn conversion_fidelity() -> Check {
    let mut rng = seeded(77);
    let mut compared = 0;
    let mut zelda_failures = 0;
    for (game, layout) in [(Game::Mario, mario_layout()), (Game::Zelda, zelda_layout())] {
        let dec = StubDecoder::standard(game);
        for i in 0..50 {
            let g = evolved_cppn(&layout, &mut rng);
            let d = convert(&g, &layout).map_err(|e| e.to_string())?;
            let a = assemble(&Genotype::Cppn(g), &dec, &layout);
            let b = assemble(&Genotype::Direct(d), &dec, &layout);
            match (a, b) {
                (Ok(x), Ok(y)) => ensure(x == y, || format!("{game} genome {i}: phenotypes differ"))?,
                (Err(x), Err(y)) => {
                    ensure(x.to_string() == y.to_string(), || format!("{game} genome {i}: errors differ"))?;
                    zelda_failures += 1;
                }
                _ => return Err(format!("{game} genome {i}: only one encoding assembled")),
            }
            compared += 1;
        }
    }
    Ok(format!(
        "{compared} genomes, phenotypes identical incl. doors/keys/raft/start/goal ({zelda_failures} with no room present on both sides)"
    ))
}

pub fn solver_correctness() -> Check {
    let suite = hand_suite();
    ensure(suite.len() >= 12, || "suite too small".into())?;
    let mut solvable = 0;
    for case in &suite {
        let path = eval_zelda::solve(&case.dungeon);
        let got = path.as_ref().map(|p| p.len() - 1);
        let expect = oracle_solve_len(&case.dungeon);
        ensure(got == expect, || format!("{}: A* {got:?}, oracle {expect:?}", case.name))?;
        ensure(got.is_some() == case.solvable, || format!("{}: solvability", case.name))?;
        if let Some(p) = &path {
            solvable += 1;
            ensure(eval_zelda::validate_path(&case.dungeon, p).is_ok(), || format!("{}: invalid path", case.name))?;
            if let Some(b) = case.backtracks {
                let got = backtrack_count(&room_sequence(p));
                ensure(got == b, || format!("{}: backtracks {got}, expected {b}", case.name))?;
            }
        }
    }
    let (a, b) = (rc(0, 0), rc(0, 1));
    ensure(backtrack_count(&[a, b, a]) == 1, || "A→B→A".into())?;
    ensure(backtrack_count(&[a, b, a, b, a]) == 3, || "A→B→A→B→A".into())?;
    Ok(format!(
        "{} dungeons ({solvable} solvable) match the uniform-cost oracle; A→B→A = 1, A→B→A→B→A = 3",
        suite.len()
    ))
}

pub fn archive_laws() -> Check {
    let cfg = RunConfig {
        game: Game::Zelda,
        scheme: Scheme::Wwr,
        mode: EncodingMode::CppnThenDirect2Gan,
        seed: 11,
        ..RunConfig::default()
    };
    let run = || -> Result<(Archive, usize), String> {
        let e = Engine::from_config(cfg.clone()).map_err(|e| e.to_string())?;
        let mut a = e.initialize();
        let mut best: BTreeMap<Vec<usize>, f64> = a.elites().map(|x| (x.bin.clone(), x.fitness)).collect();
        let mut last = StatsRow::of(&a);
        let mut checks = 0;
        for t in 0..10_000u64 {
            e.step(&mut a, t);
            let row = StatsRow::of(&a);
            ensure(row.qd_score >= last.qd_score, || format!("QD score fell at step {t}"))?;
            ensure(row.filled >= last.filled, || format!("filled bins fell at step {t}"))?;
            for x in a.elites() {
                let old = best.entry(x.bin.clone()).or_insert(x.fitness);
                ensure(x.fitness >= *old, || format!("bin {:?} fitness fell at step {t}", x.bin))?;
                *old = x.fitness;
                checks += 1;
            }
            last = row;
        }
        ensure(e.recheck(&a, 200), || "stored fitness differs from re-evaluation".into())?;
        Ok((a, checks))
    };
    let (a, checks) = run()?;
    let (b, _) = run()?;
    ensure(a == b, || "reruns differ".into())?;
    let dir_a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir_b = tempfile::tempdir().map_err(|e| e.to_string())?;
    levelgen_core::mapelites::write_snapshot(&a, dir_a.path()).map_err(|e| e.to_string())?;
    levelgen_core::mapelites::write_snapshot(&b, dir_b.path()).map_err(|e| e.to_string())?;
    for f in ["archive.csv", "archive.json"] {
        let x = std::fs::read(dir_a.path().join(f)).unwrap();
        let y = std::fs::read(dir_b.path().join(f)).unwrap();
        ensure(x == y, || format!("{f} differs between reruns"))?;
    }
    Ok(format!(
        "10000 steps: QD {:.3}, {} bins, {checks} per-bin checks monotone; rerun bit-identical",
        a.qd_score(),
        a.filled()
    ))
}

pub fn mode_consistency() -> Check {
    let mut total = 0;
    for (scheme, seed) in [(Scheme::Wwr, 3), (Scheme::DistinctBtr, 4), (Scheme::SumDsl, 5)] {
        let base = RunConfig {
            game: scheme.game(),
            scheme,
            seed,
            evaluations: 2000,
            ..RunConfig::default()
        };
        let cppn = RunConfig {
            mode: EncodingMode::Cppn2Gan,
            ..base.clone()
        };
        let hybrid = RunConfig {
            mode: EncodingMode::CppnThenDirect2Gan,
            reproduction: Some(ReproductionParams {
                conversion: 0.0,
                ..ReproductionParams::default()
            }),
            ..base
        };
        let (a, la) = Engine::from_config(cppn).map_err(|e| e.to_string())?.run();
        let (b, lb) = Engine::from_config(hybrid).map_err(|e| e.to_string())?.run();
        ensure(a == b && la == lb, || format!("{scheme}: archives differ"))?;
        total += a.filled();
    }
    Ok(format!("3 schemes × 2000 evaluations identical ({total} elites compared)"))
}

#[derive(Debug, Clone, Copy)]
pub struct Summary {
    pub filled: f64,
    pub qd: f64,
}

pub fn mode_summary(scheme: Scheme, mode: EncodingMode, seeds: u64, evaluations: usize) -> Result<Summary, String> {
    let mut filled = 0.0;
    let mut qd = 0.0;
    for seed in 0..seeds {
        let cfg = RunConfig {
            game: scheme.game(),
            scheme,
            mode,
            seed,
            evaluations,
            ..RunConfig::default()
        };
        let (a, _) = Engine::from_config(cfg).map_err(|e| e.to_string())?.run();
        filled += a.filled() as f64;
        qd += a.qd_score();
    }
    Ok(Summary {
        filled: filled / seeds as f64,
        qd: qd / seeds as f64,
    })
}

pub fn directional(evaluations: usize) -> Check {
    use EncodingMode::*;
    let wwr: Vec<Summary> = [Cppn2Gan, Direct2Gan, CppnThenDirect2Gan]
        .into_iter()
        .map(|m| mode_summary(Scheme::Wwr, m, 5, evaluations))
        .collect::<Result<_, _>>()?;
    let btr: Vec<Summary> = [Cppn2Gan, Direct2Gan, CppnThenDirect2Gan]
        .into_iter()
        .map(|m| mode_summary(Scheme::DistinctBtr, m, 5, evaluations))
        .collect::<Result<_, _>>()?;
    let detail = format!(
        "WWR filled cppn {:.1} / direct {:.1} / hybrid {:.1}; DistinctBTR QD cppn {:.2} / direct {:.2} / hybrid {:.2}",
        wwr[0].filled, wwr[1].filled, wwr[2].filled, btr[0].qd, btr[1].qd, btr[2].qd
    );
    let ok = wwr[0].filled >= 1.25 * wwr[1].filled
        && wwr[2].filled >= 1.25 * wwr[1].filled
        && btr[2].qd >= btr[0].qd
        && btr[2].qd >= btr[1].qd;
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(name: &str, rate: f64, target: f64, tol: f64) -> Result<String, String> {
    let line = format!("{name} {rate:.4}");
    if (rate - target).abs() <= tol {
        Ok(line)
    } else {
        Err(format!("{line} outside {target} ± {tol}"))
    }
}

pub fn rate_checks() -> Check {
    let mut rng = seeded(5150);
    let layout = zelda_layout();
    let trials = 20_000;
    let rates = CppnMutationRates::default();
    let (mut splice, mut link, mut act) = (0, 0, 0);
    let mut g = CppnGenome::random(3, layout.segment_width(), &mut rng);
    for i in 0..trials {
        if i % 50 == 0 {
            g = CppnGenome::random(3, layout.segment_width(), &mut rng);
        }
        let (child, r) = g.mutate(&rates, &mut rng);
        splice += r.splice_attempted as usize;
        link += r.add_link_attempted as usize;
        act += r.activation_replaced as usize;
        g = child;
    }
    let n = trials as f64;
    let mut parts = vec![
        within("splice", splice as f64 / n, 0.20, 0.02)?,
        within("link-add", link as f64 / n, 0.40, 0.02)?,
        within("activation", act as f64 / n, 0.30, 0.02)?,
    ];
    let op = PolynomialMutation::default();
    let (mut touched, mut genes) = (0, 0);
    while genes < 20_000 {
        let d = DirectGenome::random(layout, &mut rng);
        touched += d.mutate(&op, &mut rng).1;
        genes += d.len();
    }
    parts.push(within("per-gene", touched as f64 / genes as f64, 0.30, 0.01)?);
    let params = EncodingMode::CppnThenDirect2Gan.default_params();
    let mut converted = 0;
    for _ in 0..trials {
        let p = EncodingMode::CppnThenDirect2Gan.random_genome(&layout, &mut rng);
        let (_, r) = reproduce(&p, |_| None, &layout, &params, &mut rng).map_err(|e| e.to_string())?;
        converted += r.converted as usize;
    }
    parts.push(within("conversion", converted as f64 / n, 0.30, 0.02)?);
    Ok(format!("{} trials each: {}", trials, parts.join(", ")))
}

pub fn door_bucketing() -> Check {
    let expect = [
        (-1.0, DoorType::Plain),
        (0.0, DoorType::Plain),
        (0.25, DoorType::PuzzleLocked),
        (0.5, DoorType::SoftLocked),
        (0.75, DoorType::Bombable),
        (1.0, DoorType::Locked),
    ];
    for (v, t) in expect {
        let got = bucket_door(v).map_err(|e| e.to_string())?;
        ensure(got == t, || format!("{v} → {got:?}, expected {t:?}"))?;
    }
    Ok("−1→plain, 0→plain, 0.25→puzzle, 0.5→soft, 0.75→bombable, 1→locked".into())
}
