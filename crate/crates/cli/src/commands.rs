use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;

use crowdsim_core::domain::{ConfigError, SimulationTrace};
use crowdsim_core::engine::{self, BatchResult, EngineError, RunResult, RunSummary, SweepParam, Termination, TickStats};
use crowdsim_core::metrics::{self, Matching, PathParams, DEFAULT_HEAT_SIGMA};
use crowdsim_core::report::{self, Manifest, SweepManifest};
use crowdsim_core::{Role, ScenarioConfig};

const METRICS_SCHEMA: &str = "crowdsim.metrics/1";

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

type Outcome = Result<(), Failure>;

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, error: error.into() }
}

fn runtime(error: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 1, error: error.into() }
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::ThreadPool(_) => runtime(e),
        _ => usage(e),
    }
}

fn load_scenario(path: &Path, max_ticks: Option<u32>) -> Result<ScenarioConfig, Failure> {
    let mut config = ScenarioConfig::load(path).map_err(|e| match e {
        ConfigError::Io { .. } => usage(e),
        _ => usage(anyhow!(e).context(format!("scenario {}", path.display()))),
    })?;
    if let Some(t) = max_ticks {
        config.run.max_ticks = t;
        config.validate().map_err(usage)?;
    }
    Ok(config)
}

fn check_parallel(runs: usize, jobs: Option<usize>) -> Outcome {
    if runs == 0 {
        return Err(usage(anyhow!("--runs must be at least 1")));
    }
    if jobs == Some(0) {
        return Err(usage(anyhow!("--jobs must be at least 1")));
    }
    Ok(())
}

/// Collects output files under one directory and remembers their names for
/// the manifest.
struct Bundle {
    dir: PathBuf,
    files: Vec<String>,
}

impl Bundle {
    fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))
            .map_err(runtime)?;
        Ok(Bundle { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write<F>(&mut self, name: &str, body: F) -> Outcome
    where
        F: FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>,
    {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create {}", parent.display()))
                .map_err(runtime)?;
        }
        let file = File::create(&path)
            .with_context(|| format!("cannot create {}", path.display()))
            .map_err(runtime)?;
        let mut w = BufWriter::new(file);
        body(&mut w)
            .and_then(|_| w.flush().map_err(Into::into))
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(runtime)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Outcome {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }

    fn finish(mut self, mut manifest: Manifest) -> Outcome {
        manifest.files = std::mem::take(&mut self.files);
        manifest.files.push("manifest.json".into());
        self.write_json("manifest.json", &manifest)
    }
}

#[derive(Serialize)]
struct RunMetrics<'a> {
    schema: &'static str,
    #[serde(flatten)]
    summary: RunSummary,
    #[serde(rename = "final")]
    last: &'a TickStats,
    dominant_paths_cops: usize,
    dominant_paths_activists: usize,
}

#[derive(Serialize)]
struct BatchMetrics {
    schema: &'static str,
    n_runs: usize,
    base_seed: u64,
    final_active_ratio_mean: f64,
    final_active_ratio_std: f64,
    activists_eliminated_rate: f64,
    cops_eliminated_rate: f64,
    max_ticks_rate: f64,
}

impl BatchMetrics {
    fn of(b: &BatchResult) -> Self {
        let (mean, std) = b.final_active_ratio();
        BatchMetrics {
            schema: METRICS_SCHEMA,
            n_runs: b.n_runs,
            base_seed: b.base_seed,
            final_active_ratio_mean: mean,
            final_active_ratio_std: std,
            activists_eliminated_rate: b.elimination_rate(Termination::ActivistsEliminated),
            cops_eliminated_rate: b.elimination_rate(Termination::CopsEliminated),
            max_ticks_rate: b.elimination_rate(Termination::MaxTicks),
        }
    }
}

fn write_run_bundle(out: &Path, config: &ScenarioConfig, heatmap_every: u32) -> Outcome {
    let result: RunResult = engine::run(config).map_err(engine_failure)?;
    let trace = result.trace.as_ref().expect("single runs record a trace");
    let mut bundle = Bundle::create(out)?;

    bundle.write("series.csv", |w| Ok(report::write_series_csv(w, &result.series)?))?;
    bundle.write("trace.jsonl", |w| Ok(report::write_trace_jsonl(w, trace)?))?;
    if heatmap_every > 0 {
        for snap in trace.snapshots.iter().filter(|s| s.tick % heatmap_every == 0) {
            let field = metrics::emotion_heatmap(&snap.agents, trace.rows, trace.cols, DEFAULT_HEAT_SIGMA)
                .map_err(runtime)?;
            bundle.write(&format!("heatmaps/tick_{:05}.csv", snap.tick), |w| {
                Ok(report::write_heatmap_csv(w, snap.tick, DEFAULT_HEAT_SIGMA, &field)?)
            })?;
        }
    }
    let paths = metrics::extract_dominant_paths(trace, &PathParams::default());
    let count = |role: Role| paths.iter().filter(|p| p.role == role).count();
    bundle.write_json(
        "metrics.json",
        &RunMetrics {
            schema: METRICS_SCHEMA,
            summary: RunSummary::of(&result),
            last: result.series.last().expect("non-empty series"),
            dominant_paths_cops: count(Role::Cop),
            dominant_paths_activists: count(Role::Activist),
        },
    )?;

    let mut manifest = Manifest::new("run", config, vec![result.seed]);
    manifest.heatmap_every = Some(heatmap_every);
    log::info!("run finished: {} at tick {}", result.termination.as_str(), result.final_tick);
    bundle.finish(manifest)
}

pub fn run(scenario: &Path, out: &Path, max_ticks: Option<u32>, seed: Option<u64>, heatmap_every: u32) -> Outcome {
    let mut config = load_scenario(scenario, max_ticks)?;
    if let Some(s) = seed {
        config.run.seed = s;
    }
    write_run_bundle(out, &config, heatmap_every)
}

fn write_batch_files(bundle: &mut Bundle, prefix: &str, batch: &BatchResult) -> Outcome {
    bundle.write(&format!("{prefix}series.csv"), |w| Ok(report::write_batch_series_csv(w, batch)?))?;
    bundle.write(&format!("{prefix}runs.csv"), |w| Ok(report::write_runs_csv(w, &batch.runs)?))?;
    bundle.write_json(&format!("{prefix}metrics.json"), &BatchMetrics::of(batch))
}

fn write_batch_bundle(out: &Path, config: &ScenarioConfig, runs: usize, base_seed: u64, jobs: Option<usize>) -> Outcome {
    let batch = engine::batch_run(config, runs, base_seed, jobs).map_err(engine_failure)?;
    let mut bundle = Bundle::create(out)?;
    write_batch_files(&mut bundle, "", &batch)?;
    bundle.finish(Manifest::new("batch", config, batch.seeds()))
}

pub fn batch(
    scenario: &Path,
    out: &Path,
    max_ticks: Option<u32>,
    runs: usize,
    base_seed: Option<u64>,
    jobs: Option<usize>,
) -> Outcome {
    check_parallel(runs, jobs)?;
    let config = load_scenario(scenario, max_ticks)?;
    write_batch_bundle(out, &config, runs, base_seed.unwrap_or(config.run.seed), jobs)
}

fn write_sweep_bundle(
    out: &Path,
    config: &ScenarioConfig,
    param: SweepParam,
    values: &[f64],
    runs: usize,
    base_seed: u64,
    jobs: Option<usize>,
) -> Outcome {
    let points = engine::sweep(config, param, values, runs, base_seed, jobs).map_err(engine_failure)?;
    let mut bundle = Bundle::create(out)?;
    bundle.write("summary.csv", |w| Ok(report::write_sweep_csv(w, param, &points)?))?;
    for (i, p) in points.iter().enumerate() {
        write_batch_files(&mut bundle, &format!("{:02}_{}={}/", i, param.name(), p.value), &p.batch)?;
    }
    let seeds = points.first().map(|p| p.batch.seeds()).unwrap_or_default();
    let mut manifest = Manifest::new("sweep", config, seeds);
    manifest.sweep = Some(SweepManifest { param, values: values.to_vec() });
    bundle.finish(manifest)
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    scenario: &Path,
    out: &Path,
    max_ticks: Option<u32>,
    param: &str,
    values: &[f64],
    runs: usize,
    base_seed: Option<u64>,
    jobs: Option<usize>,
) -> Outcome {
    let param: SweepParam = param.parse().map_err(usage)?;
    check_parallel(runs, jobs)?;
    let config = load_scenario(scenario, max_ticks)?;
    write_sweep_bundle(out, &config, param, values, runs, base_seed.unwrap_or(config.run.seed), jobs)
}

fn load_trace(path: &Path) -> Result<SimulationTrace, Failure> {
    let file = File::open(path)
        .with_context(|| format!("cannot read trace {}", path.display()))
        .map_err(usage)?;
    report::read_trace_jsonl(BufReader::new(file))
        .with_context(|| format!("cannot parse trace {}", path.display()))
        .map_err(usage)
}

pub fn compare(
    trace_a: &Path,
    trace_b: &Path,
    out: Option<&Path>,
    matching: Matching,
    link_radius: f64,
    min_group: usize,
) -> Outcome {
    if !(link_radius > 0.0) {
        return Err(usage(anyhow!("--link-radius must be positive")));
    }
    let a = load_trace(trace_a)?;
    let b = load_trace(trace_b)?;
    let rep = report::compare_traces(&a, &b, &PathParams { link_radius, min_group }, matching);
    for w in &rep.warnings {
        log::warn!("{w}");
    }
    let mut text = serde_json::to_string_pretty(&rep).map_err(runtime)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(runtime),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn replay(manifest: &Path, out: &Path) -> Outcome {
    let text = fs::read_to_string(manifest)
        .with_context(|| format!("cannot read manifest {}", manifest.display()))
        .map_err(usage)?;
    let m: Manifest = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse manifest {}", manifest.display()))
        .map_err(usage)?;
    if m.schema != report::MANIFEST_SCHEMA {
        return Err(usage(anyhow!("unsupported manifest schema `{}`", m.schema)));
    }
    m.scenario.validate().map_err(usage)?;
    let base_seed = *m.seeds.first().ok_or_else(|| usage(anyhow!("manifest lists no seeds")))?;
    let contiguous = m.seeds.iter().enumerate().all(|(i, &s)| s == base_seed.wrapping_add(i as u64));
    if !contiguous {
        return Err(usage(anyhow!("manifest seeds are not consecutive")));
    }
    match (m.command.as_str(), &m.sweep) {
        ("run", _) => {
            let mut config = m.scenario.clone();
            config.run.seed = base_seed;
            write_run_bundle(out, &config, m.heatmap_every.unwrap_or(5))
        }
        ("batch", _) => write_batch_bundle(out, &m.scenario, m.seeds.len(), base_seed, None),
        ("sweep", Some(s)) => write_sweep_bundle(out, &m.scenario, s.param, &s.values, m.seeds.len(), base_seed, None),
        (other, _) => Err(usage(anyhow!("manifest command `{other}` cannot be replayed"))),
    }
}
