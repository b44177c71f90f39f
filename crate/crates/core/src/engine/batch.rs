use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_seeded, EngineError, RunResult, Termination, TickStats};
use crate::domain::ScenarioConfig;

/// Per-run line of a batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub final_tick: u32,
    pub termination: Termination,
    pub final_active_ratio: f64,
    /// Cooperation ratio averaged over the ticks after tick 0 at which the
    /// side had live members; `None` if it never had any.
    pub mean_coop_cops: Option<f64>,
    pub mean_coop_activists: Option<f64>,
}

impl RunSummary {
    pub fn of(run: &RunResult) -> Self {
        let last = run.series.last().expect("a run has at least one tick");
        let avg = |pick: fn(&TickStats) -> Option<f64>| {
            let vals: Vec<f64> = run.series.iter().skip(1).filter_map(pick).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        RunSummary {
            seed: run.seed,
            final_tick: run.final_tick,
            termination: run.termination,
            final_active_ratio: last.active_ratio,
            mean_coop_cops: avg(|s| (s.live_cops > 0).then_some(s.coop_ratio_cops)),
            mean_coop_activists: avg(|s| (s.live_activists > 0).then_some(s.coop_ratio_activists)),
        }
    }
}

/// Per-tick mean and population standard deviation of every series column
/// across runs. Runs that stop early hold their last values until the
/// longest run ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub n_runs: usize,
    pub base_seed: u64,
    /// `mean[tick][column]`, columns as in [`TickStats::COLUMNS`].
    pub mean: Vec<[f64; 10]>,
    pub std: Vec<[f64; 10]>,
    pub runs: Vec<RunSummary>,
}

impl BatchResult {
    fn from_runs(base_seed: u64, runs: &[RunResult]) -> Self {
        let len = runs.iter().map(|r| r.series.len()).max().unwrap_or(0);
        let n = runs.len() as f64;
        let mut mean = vec![[0.0; 10]; len];
        let mut std = vec![[0.0; 10]; len];
        for t in 0..len {
            let rows: Vec<[f64; 10]> = runs
                .iter()
                .map(|r| r.series[t.min(r.series.len() - 1)].values())
                .collect();
            for c in 0..10 {
                let m = rows.iter().map(|v| v[c]).sum::<f64>() / n;
                let var = rows.iter().map(|v| (v[c] - m).powi(2)).sum::<f64>() / n;
                mean[t][c] = m;
                std[t][c] = var.sqrt();
            }
        }
        BatchResult {
            n_runs: runs.len(),
            base_seed,
            mean,
            std,
            runs: runs.iter().map(RunSummary::of).collect(),
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.runs.iter().map(|r| r.seed).collect()
    }

    pub fn column_index(name: &str) -> Option<usize> {
        TickStats::COLUMNS.iter().position(|c| *c == name)
    }

    /// Mean series of one column.
    pub fn mean_of(&self, column: &str) -> Option<Vec<f64>> {
        let c = Self::column_index(column)?;
        Some(self.mean.iter().map(|row| row[c]).collect())
    }

    /// Mean and standard deviation of the per-run final active ratios.
    pub fn final_active_ratio(&self) -> (f64, f64) {
        mean_std(self.runs.iter().map(|r| r.final_active_ratio))
    }

    /// Share of runs that ended with a side eliminated.
    pub fn elimination_rate(&self, reason: Termination) -> f64 {
        let hits = self.runs.iter().filter(|r| r.termination == reason).count();
        hits as f64 / self.n_runs as f64
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let m = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, EngineError> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs seeds `base_seed, base_seed + 1, ...` in parallel. `jobs` caps the
/// number of worker threads; the result does not depend on it.
pub fn batch_run(
    config: &ScenarioConfig,
    n_runs: usize,
    base_seed: u64,
    jobs: Option<usize>,
) -> Result<BatchResult, EngineError> {
    if n_runs == 0 {
        return Err(EngineError::NoRuns);
    }
    let runs = in_pool(jobs, || {
        (0..n_runs as u64)
            .into_par_iter()
            .map(|i| run_seeded(config, base_seed.wrapping_add(i), false))
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok(BatchResult::from_runs(base_seed, &runs))
}

/// Scenario parameters that can be swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    NCops,
    Pr,
    A,
    B,
}

impl SweepParam {
    pub const ALL: [SweepParam; 4] = [SweepParam::NCops, SweepParam::Pr, SweepParam::A, SweepParam::B];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::NCops => "n_cops",
            SweepParam::Pr => "pr",
            SweepParam::A => "a",
            SweepParam::B => "b",
        }
    }

    /// Copy of `config` with this parameter set to `value`, validated.
    pub fn apply(self, config: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, EngineError> {
        let invalid = |reason: String| EngineError::InvalidValue { param: self.name(), value, reason };
        let mut c = config.clone();
        match self {
            SweepParam::NCops => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(invalid("must be a nonnegative integer".into()));
                }
                c.counts.cops = value as usize;
            }
            SweepParam::Pr => c.contagion.pr = value,
            SweepParam::A => c.contagion.a = value,
            SweepParam::B => c.contagion.b = value,
        }
        c.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(c)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "n_cops" => Ok(SweepParam::NCops),
            "pr" => Ok(SweepParam::Pr),
            "a" | "a_global" => Ok(SweepParam::A),
            "b" | "b_global" => Ok(SweepParam::B),
            _ => Err(EngineError::UnknownParameter {
                name: s.to_string(),
                valid: SweepParam::ALL.map(|p| p.name()).join(", "),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub batch: BatchResult,
}

/// One batch per value, each with the same base seed.
pub fn sweep(
    config: &ScenarioConfig,
    param: SweepParam,
    values: &[f64],
    n_runs: usize,
    base_seed: u64,
    jobs: Option<usize>,
) -> Result<Vec<SweepPoint>, EngineError> {
    let configs: Vec<ScenarioConfig> =
        values.iter().map(|&v| param.apply(config, v)).collect::<Result<_, _>>()?;
    values
        .iter()
        .zip(&configs)
        .map(|(&value, c)| {
            Ok(SweepPoint {
                value,
                batch: batch_run(c, n_runs, base_seed, jobs)?,
            })
        })
        .collect()
}
