//! Checks shared by the property tests and the acceptance suite. Each check
//! returns a one-line summary on success and an explanation on failure.

#![allow(dead_code)]

use std::collections::HashSet;
use std::path::Path;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crowdsim_core::behavior::death_probability_from;
use crowdsim_core::domain::{clamp_emotion, EMOTION_LIMIT};
use crowdsim_core::emotion::{mental_increment, pairwise_external_delta, update_emotion, EmotionDelta};
use crowdsim_core::engine::World;
use crowdsim_core::game::deterrent_force;
use crowdsim_core::{Role, ScenarioConfig};

pub type Check = Result<String, String>;

pub const PROPERTY_CASES: u32 = 10_000;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    )
}

fn run_property<S: Strategy>(
    name: &str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Check {
    runner(cases)
        .run(&strategy, test)
        .map(|_| format!("{name}: {cases} cases"))
        .map_err(|e| format!("{name}: {e}"))
}

fn nonzero_emotion() -> impl Strategy<Value = f64> {
    (-EMOTION_LIMIT..=EMOTION_LIMIT).prop_filter("nonzero", |e| *e != 0.0)
}

pub fn emotion_stays_bounded(cases: u32) -> Check {
    let deltas = prop_oneof![-3.0..3.0f64, Just(0.0)];
    run_property(
        "emotion bounds",
        cases,
        (nonzero_emotion(), deltas.clone(), deltas),
        |(prev, ext, mental)| {
            // pick a delta that lands exactly on 0 every so often
            let delta = if ext == 0.0 { EmotionDelta::new(-prev, 0.0) } else { EmotionDelta::new(ext, mental) };
            let e = update_emotion(prev, &delta);
            prop_assert!(e.abs() <= EMOTION_LIMIT && e != 0.0, "{prev} + {delta:?} -> {e}");
            prop_assert_eq!(clamp_emotion(e, prev), e);
            Ok(())
        },
    )
}

pub fn force_in_unit_interval(cases: u32) -> Check {
    let e = prop_oneof![nonzero_emotion(), Just(EMOTION_LIMIT), Just(-EMOTION_LIMIT)];
    run_property("deterrent force range", cases, (e.clone(), e), |(a, b)| {
        let (fa, fb) = (deterrent_force(a), deterrent_force(b));
        prop_assert!((0.0..1.0).contains(&fa), "force({a}) = {fa}");
        prop_assert_eq!(fa, deterrent_force(-a));
        if a.abs() < b.abs() {
            prop_assert!(fa <= fb, "not monotone: force({a}) = {fa} > force({b}) = {fb}");
        }
        Ok(())
    })
}

pub fn death_probability_bounded_and_monotone(cases: u32) -> Check {
    let force = 1e-6..50.0f64;
    run_property(
        "death probability",
        cases,
        (force.clone(), 0.0..200.0f64, 0.0..200.0f64),
        |(own, opp1, opp2)| {
            let (lo, hi) = if opp1 <= opp2 { (opp1, opp2) } else { (opp2, opp1) };
            let (p_lo, p_hi) = (death_probability_from(own, lo), death_probability_from(own, hi));
            prop_assert!((0.0..1.0).contains(&p_lo) && (0.0..1.0).contains(&p_hi), "{p_lo} {p_hi}");
            prop_assert!(p_lo <= p_hi, "ratio {lo}/{own} -> {p_lo}, {hi}/{own} -> {p_hi}");
            Ok(())
        },
    )
}

/// Small random scenario: grid size, role counts, emotions, parameters, seed.
pub fn small_world() -> impl Strategy<Value = (ScenarioConfig, u64)> {
    (
        (3usize..12, 3usize..12),
        (0usize..20, 0usize..20, 0usize..20),
        (-0.99..-0.01f64, 0.01..0.99f64, -0.4..0.09f64),
        (1.0..12.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.05..5.0f64),
        any::<bool>(),
        any::<u64>(),
    )
        .prop_map(|((rows, cols), (civ, act, cop), (ea, ec, eciv), (pr, a, b, delta), moore, seed)| {
            let cells = rows * cols;
            let scale = |n: usize| n * cells / (civ + act + cop).max(cells);
            let eciv = if eciv == 0.0 { 0.05 } else { eciv };
            let json = format!(
                r#"{{
                    "counts": {{"civilians": {}, "activists": {}, "cops": {}}},
                    "grid": {{"rows": {rows}, "cols": {cols}}},
                    "emotions": {{"civilian": {eciv}, "activist": {ea}, "cop": {ec}}},
                    "thresholds": {{"t_a2c": 0.1, "t_c2a": -0.5, "delta": {delta}}},
                    "contagion": {{"pr": {pr}, "a": {a}, "b": {b}}},
                    "run": {{"max_ticks": 10, "seed": 0}},
                    "model": {{"death_radius": "{}"}}
                }}"#,
                scale(civ),
                scale(act),
                scale(cop),
                if moore { "moore1" } else { "pr" },
            );
            (ScenarioConfig::from_json(&json).expect("generated scenario is valid"), seed)
        })
}

fn check_world(world: &World, total: usize) -> Result<(), TestCaseError> {
    let agents = world.agents();
    prop_assert_eq!(agents.len(), total, "agent count changed");
    let live: HashSet<u32> = agents.iter().filter(|a| a.alive).map(|a| a.id).collect();
    let mut on_grid = HashSet::new();
    for (cell, id) in world.grid().occupied() {
        prop_assert!(on_grid.insert(id), "agent {} on two cells", id);
        let a = &agents[id as usize];
        prop_assert!(a.alive, "dead agent {} still on the grid", id);
        prop_assert_eq!(a.position, cell, "agent {} position disagrees with grid", id);
    }
    prop_assert_eq!(&on_grid, &live, "grid occupants differ from live agents");
    let dead = agents.iter().filter(|a| !a.alive).count();
    prop_assert_eq!(live.len() + dead, total);
    for a in agents.iter().filter(|a| a.alive) {
        prop_assert!(a.emotion.abs() <= EMOTION_LIMIT && a.emotion != 0.0, "emotion {}", a.emotion);
        prop_assert!((0.0..1.0).contains(&deterrent_force(a.emotion)));
    }
    Ok(())
}

pub fn world_invariants(cases: u32, ticks: u32) -> Check {
    run_property("occupancy and conservation", cases, small_world(), |(config, seed)| {
        let mut world = World::with_seed(&config, seed).expect("fits on the grid");
        let total = config.counts.total();
        check_world(&world, total)?;
        for _ in 0..ticks {
            world.step();
            check_world(&world, total)?;
        }
        Ok(())
    })
}

#[derive(Deserialize)]
struct Oracles {
    pairwise_external_delta: Vec<PairwiseCase>,
    mental_increment: Vec<MentalCase>,
    deterrent_force: Vec<ForceCase>,
}

#[derive(Deserialize)]
struct PairwiseCase {
    sender_emotion: f64,
    distance: f64,
    a: f64,
    b: f64,
    expected: String,
}

#[derive(Deserialize)]
struct MentalCase {
    role: Role,
    dbene: f64,
    delta: f64,
    expected: String,
}

#[derive(Deserialize)]
struct ForceCase {
    emotion: f64,
    expected: String,
}

pub const ORACLE_TOLERANCE: f64 = 1e-9;

fn load_oracles() -> Oracles {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/formula_oracles.json");
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).expect("oracle file parses")
}

fn compare(name: &str, cases: impl Iterator<Item = (f64, String)>) -> Check {
    let mut n = 0;
    let mut worst = 0.0f64;
    for (got, expected) in cases {
        let want: f64 = expected.parse().expect("oracle value parses");
        let rel = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
        worst = worst.max(rel);
        n += 1;
    }
    let line = format!("{name}: {n} cases, max rel err {worst:.2e}");
    if n >= 1000 && worst <= ORACLE_TOLERANCE {
        Ok(line)
    } else {
        Err(line)
    }
}

pub fn formula_oracles() -> Vec<Check> {
    let o = load_oracles();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    vec![
        compare(
            "pairwise_external_delta",
            o.pairwise_external_delta
                .into_iter()
                .map(|c| (pairwise_external_delta(c.sender_emotion, c.distance, c.a, c.b), c.expected)),
        ),
        compare(
            "mental_increment",
            o.mental_increment.into_iter().map(|c| {
                let got = mental_increment(c.role, c.dbene, c.delta, &mut rng).expect("delta > 0");
                (got, c.expected)
            }),
        ),
        compare(
            "deterrent_force",
            o.deterrent_force
                .into_iter()
                .map(|c| (deterrent_force(c.emotion), c.expected)),
        ),
    ]
}
