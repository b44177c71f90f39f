//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary (no libtest harness) so the lines always reach stdout.

mod common;

use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use common::{Check, PROPERTY_CASES};
use crowdsim_core::behavior::death_probability_from;
use crowdsim_core::engine::{batch_run, run_seeded, sweep, SweepParam, SweepPoint, Termination};
use crowdsim_core::game::{deterrent_force, payoff};
use crowdsim_core::metrics::{self, Matching, PathParams};
use crowdsim_core::report;
use crowdsim_core::{Role, ScenarioConfig, SituationClass, Strategy};

/// Seeds for the statistical criteria; disjoint from the seeds used when
/// choosing the default contagion and mental-emotion constants.
const BASE_SEED: u64 = 70_000;
const RUNS: usize = 50;

fn setup(cops: usize) -> ScenarioConfig {
    ScenarioConfig::from_json(&format!(
        r#"{{
            "counts": {{"civilians": 80, "activists": 50, "cops": {cops}}},
            "grid": {{"rows": 20, "cols": 20}},
            "emotions": {{"civilian": 0.1, "activist": -0.5, "cop": 0.5}},
            "thresholds": {{"t_a2c": 0.1, "t_c2a": -0.5}}
        }}"#
    ))
    .expect("valid setup")
}

fn means(points: &[SweepPoint]) -> Vec<f64> {
    points.iter().map(|p| p.batch.final_active_ratio().0).collect()
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn verdict(ok: bool, line: String) -> Check {
    if ok {
        Ok(line)
    } else {
        Err(line)
    }
}

fn death_calibration() -> Check {
    let worst = [1e-6, 0.1, 0.5, std::f64::consts::FRAC_1_SQRT_2, 1.0, 3.3, 17.0, 250.0]
        .iter()
        .map(|&f| (death_probability_from(f, f) - 0.9).abs())
        .fold(0.0, f64::max);
    verdict(worst <= 1e-12, format!("P_die at equal forces = 0.9, max abs err {worst:.1e}"))
}

fn benefit_matrix() -> Check {
    use SituationClass::*;
    use Strategy::{Cooperation as C, Defection as D};
    let table = [
        (CopsStronger, [((C, C), (1.0, 4.0)), ((C, D), (2.0, 2.0)), ((D, C), (3.0, 3.0)), ((D, D), (4.0, 1.0))]),
        (ActivistsStronger, [((C, C), (4.0, 1.0)), ((C, D), (3.0, 3.0)), ((D, C), (2.0, 2.0)), ((D, D), (1.0, 4.0))]),
        (Balanced, [((C, C), (3.0, 3.0)), ((C, D), (0.0, 5.0)), ((D, C), (5.0, 0.0)), ((D, D), (1.0, 1.0))]),
    ];
    let mut checked = 0;
    let mut wrong = Vec::new();
    for (class, cells) in table {
        for ((cop, act), want) in cells {
            let got = payoff(class, cop, act);
            checked += 2;
            if got != want {
                wrong.push(format!("{class:?} {cop:?}/{act:?}: {got:?} != {want:?}"));
            }
        }
    }
    verdict(wrong.is_empty(), format!("{checked} payoff numbers exact {wrong:?}"))
}

fn oracles() -> Check {
    let results = common::formula_oracles();
    let ok = results.iter().all(Result::is_ok);
    let lines: Vec<String> = results.into_iter().map(|r| r.unwrap_or_else(|e| e)).collect();
    verdict(ok, lines.join("; "))
}

fn invariants() -> Check {
    let results = [
        common::emotion_stays_bounded(PROPERTY_CASES),
        common::force_in_unit_interval(PROPERTY_CASES),
        common::world_invariants(PROPERTY_CASES, 4),
        common::death_probability_bounded_and_monotone(PROPERTY_CASES),
    ];
    let ok = results.iter().all(Result::is_ok);
    let lines: Vec<String> = results.into_iter().map(|r| r.unwrap_or_else(|e| e)).collect();
    verdict(ok, lines.join("; "))
}

fn batch_bytes(config: &ScenarioConfig, jobs: usize) -> Vec<u8> {
    let b = batch_run(config, 20, BASE_SEED, Some(jobs)).expect("batch runs");
    let mut out = Vec::new();
    report::write_batch_series_csv(&mut out, &b).unwrap();
    report::write_runs_csv(&mut out, &b.runs).unwrap();
    out
}

fn determinism() -> Check {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/no1.json");
    let config = ScenarioConfig::load(path).expect("scenario No.1 loads");
    let start = Instant::now();
    let one = batch_bytes(&config, 1);
    let four = batch_bytes(&config, 4);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        one == four && secs < 60.0,
        format!("No.1, 20 runs, jobs 1 vs 4: {} identical bytes = {}, {secs:.1}s", one.len(), one == four),
    )
}

/// Spearman rank correlation with average ranks for ties.
fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn cop_ratio_trend() -> Check {
    let counts = [0.0, 30.0, 40.0, 60.0, 80.0];
    let points = sweep(&setup(0), SweepParam::NCops, &counts, RUNS, BASE_SEED, None).expect("sweep runs");
    let m = means(&points);
    let rho = spearman(&counts, &m);
    let elim: Vec<f64> = points
        .iter()
        .filter(|p| p.value >= 60.0)
        .map(|p| p.batch.elimination_rate(Termination::ActivistsEliminated))
        .collect();
    let ok = non_increasing(&m) && rho <= -0.8 && elim.iter().all(|&e| e >= 0.7);
    verdict(
        ok,
        format!(
            "n_cops {counts:?}: active ratio {}, rho {rho:.3}, elimination at >=60 cops {}",
            fmt(&m),
            fmt(&elim)
        ),
    )
}

fn trend(param: SweepParam, values: &[f64]) -> (bool, String) {
    let points = sweep(&setup(70), param, values, RUNS, BASE_SEED, None).expect("sweep runs");
    let m = means(&points);
    let n = m.len();
    let ok = non_increasing(&m[..n - 1]) && (m[n - 2] - m[n - 1]).abs() < 0.05;
    (ok, format!("{} {values:?}: {}", param.name(), fmt(&m)))
}

fn pr_and_a_trends() -> Check {
    let (pr_ok, pr) = trend(SweepParam::Pr, &[2.0, 6.0, 10.0, 12.0]);
    let (a_ok, a) = trend(SweepParam::A, &[0.2, 0.5, 0.8, 1.0]);
    verdict(pr_ok && a_ok, format!("{pr}; {a}"))
}

/// One-sided sign test: P(X >= wins) for X ~ Binomial(n, 1/2).
fn sign_test(wins: usize, n: usize) -> f64 {
    let mut p = 0.0;
    let mut coef = 1.0f64; // C(n, 0)
    for k in 0..=n {
        if k >= wins {
            p += coef;
        }
        coef = coef * (n - k) as f64 / (k + 1) as f64;
    }
    p / 2f64.powi(n as i32)
}

fn deterrence_coupling() -> Check {
    let config = setup(70);
    let force = |role: Role| config.counts.of(role) as f64 * deterrent_force(config.emotions.of(role));
    let (cop_force, act_force) = (force(Role::Cop), force(Role::Activist));
    let b = batch_run(&config, RUNS, BASE_SEED, None).expect("batch runs");
    let pairs: Vec<(f64, f64)> = b
        .runs
        .iter()
        .filter_map(|r| Some((r.mean_coop_activists?, r.mean_coop_cops?)))
        .collect();
    let wins = pairs.iter().filter(|(a, c)| a > c).count();
    let decided = pairs.iter().filter(|(a, c)| a != c).count();
    let p = sign_test(wins, decided);
    let n = pairs.len() as f64;
    let mean_act = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_cop = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    verdict(
        cop_force > act_force && mean_act > mean_cop && p < 0.05,
        format!(
            "initial force cops {cop_force:.2} > activists {act_force:.2}; coop activists {mean_act:.3} vs cops {mean_cop:.3}, {wins}/{decided} runs, sign test p = {p:.1e}"
        ),
    )
}

fn variance(values: &[f64]) -> f64 {
    if values.windows(2).all(|w| w[0] == w[1]) {
        return 0.0;
    }
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n
}

fn role_forces(snap: &crowdsim_core::domain::Snapshot, role: Role) -> Vec<f64> {
    snap.agents.iter().filter(|a| a.alive && a.role == role).map(|a| a.force).collect()
}

fn emotion_ablation() -> Check {
    let mut off = setup(40);
    off.model.contagion = false;
    off.model.mental_emotion = false;
    let on = setup(40);

    let mut max_var_off = 0.0f64;
    let mut positive = 0;
    for i in 0..RUNS as u64 {
        let seed = BASE_SEED + i;
        let trace = run_seeded(&off, seed, true).unwrap().trace.unwrap();
        for snap in &trace.snapshots {
            for role in Role::ALL {
                max_var_off = max_var_off.max(variance(&role_forces(snap, role)));
            }
        }
        let trace = run_seeded(&on, seed, true).unwrap().trace.unwrap();
        let snap = &trace.snapshots[10.min(trace.snapshots.len() - 1)];
        let all_spread = Role::ALL.iter().all(|&role| {
            let f = role_forces(snap, role);
            f.len() < 2 || variance(&f) > 0.0
        });
        positive += usize::from(all_spread);
    }
    let share = positive as f64 / RUNS as f64;
    verdict(
        max_var_off == 0.0 && share >= 0.9,
        format!("ablated max variance {max_var_off:e}; enabled: variance > 0 in every role at tick 10 in {positive}/{RUNS} runs"),
    )
}

fn metric_sanity() -> Check {
    let ae = [
        metrics::angular_error((1.0, 0.0), (1.0, 0.0)),
        metrics::angular_error((1.0, 1.0), (1.0, 0.0)),
        metrics::angular_error((1.0, 0.0), (0.0, 1.0)),
    ]
    .map(|r| r.expect("nonzero vectors"));
    let ae_ok = ae == [0.0, FRAC_PI_4, FRAC_PI_2];

    let trace = run_seeded(&setup(40), BASE_SEED, true).unwrap().trace.unwrap();
    let cmp = report::compare_traces(&trace, &trace, &PathParams::default(), Matching::Greedy);
    let floor = metrics::gaussian_entropy(&[(0.0, 0.0)]);
    let self_ok = cmp.paths_a > 0 && cmp.entropy == Some(floor) && cmp.idm == Some(0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let errors: Vec<(f64, f64)> = (0..10_000)
        .map(|_| (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let h = metrics::gaussian_entropy(&errors);
    let target = 0.5 * ((2.0 * PI * E).powi(2)).ln();
    let gauss_ok = (h - target).abs() < 0.1;

    verdict(
        ae_ok && self_ok && gauss_ok,
        format!(
            "angular errors {ae:?}; self-comparison of {} paths: entropy {:?} (floor {floor:.4}), idm {:?}; Gaussian entropy {h:.4} vs {target:.4}",
            cmp.paths_a, cmp.entropy, cmp.idm
        ),
    )
}

type Criterion = (&'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("death probability calibration", death_calibration),
        ("benefit matrix", benefit_matrix),
        ("formula oracles", oracles),
        ("invariants", invariants),
        ("determinism", determinism),
        ("cop ratio trend", cop_ratio_trend),
        ("perception radius and receive strength trends", pr_and_a_trends),
        ("deterrence and strategy", deterrence_coupling),
        ("emotion ablation", emotion_ablation),
        ("metric sanity", metric_sanity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} {:>2} {name} ({secs:.1}s): {detail}", i + 1);
        failed += usize::from(result.is_err());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
