//! Tick loop, single-run driver and the seeded parallel batch runner.

mod batch;

pub use batch::{batch_run, sweep, BatchResult, RunSummary, SweepParam, SweepPoint};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{self, LifeStatus};
use crate::domain::{
    init_state, Agent, DeathRadius, Grid, InitError, Role, ScenarioConfig, SimulationTrace,
    Snapshot,
};
use crate::emotion::{self, EmotionDelta};
use crate::game::{self, GameParams, Neighborhood};
use crate::metrics;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Init(#[from] InitError),
    #[error("a batch needs at least one run")]
    NoRuns,
    #[error("cannot build a thread pool: {0}")]
    ThreadPool(String),
    #[error("unknown sweep parameter `{name}`; valid names: {valid}")]
    UnknownParameter { name: String, valid: String },
    #[error("invalid value {value} for sweep parameter {param}: {reason}")]
    InvalidValue {
        param: &'static str,
        value: f64,
        reason: String,
    },
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ActivistsEliminated,
    CopsEliminated,
    MaxTicks,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ActivistsEliminated => "activists_eliminated",
            Termination::CopsEliminated => "cops_eliminated",
            Termination::MaxTicks => "max_ticks",
        }
    }

    pub fn side_eliminated(self) -> bool {
        self != Termination::MaxTicks
    }
}

/// Aggregate observables at one tick.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TickStats {
    pub tick: u32,
    pub live_civilians: usize,
    pub live_activists: usize,
    pub live_cops: usize,
    pub dead_total: usize,
    pub active_ratio: f64,
    pub coop_ratio_cops: f64,
    pub coop_ratio_activists: f64,
    pub mean_e_civ: f64,
    pub mean_e_act: f64,
    pub mean_e_cop: f64,
}

impl TickStats {
    /// Names of the value columns, in [`TickStats::values`] order.
    pub const COLUMNS: [&'static str; 10] = [
        "live_civilians",
        "live_activists",
        "live_cops",
        "dead_total",
        "active_ratio",
        "coop_ratio_cops",
        "coop_ratio_activists",
        "mean_e_civ",
        "mean_e_act",
        "mean_e_cop",
    ];

    pub fn observe(tick: u32, agents: &[Agent]) -> Self {
        TickStats {
            tick,
            live_civilians: metrics::live_count(agents, Role::Civilian),
            live_activists: metrics::live_count(agents, Role::Activist),
            live_cops: metrics::live_count(agents, Role::Cop),
            dead_total: agents.iter().filter(|a| !a.alive).count(),
            active_ratio: metrics::active_ratio(agents),
            coop_ratio_cops: metrics::cooperation_ratio(agents, Role::Cop),
            coop_ratio_activists: metrics::cooperation_ratio(agents, Role::Activist),
            mean_e_civ: metrics::mean_emotion(agents, Role::Civilian),
            mean_e_act: metrics::mean_emotion(agents, Role::Activist),
            mean_e_cop: metrics::mean_emotion(agents, Role::Cop),
        }
    }

    pub fn values(&self) -> [f64; 10] {
        [
            self.live_civilians as f64,
            self.live_activists as f64,
            self.live_cops as f64,
            self.dead_total as f64,
            self.active_ratio,
            self.coop_ratio_cops,
            self.coop_ratio_activists,
            self.mean_e_civ,
            self.mean_e_act,
            self.mean_e_cop,
        ]
    }
}

/// Counts of what happened during one tick.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    pub transitions: usize,
    pub moved: usize,
    pub deaths: usize,
}

/// Full mutable state of one simulation.
#[derive(Clone, Debug)]
pub struct World {
    config: ScenarioConfig,
    params: GameParams,
    grid: Grid,
    agents: Vec<Agent>,
    tick: u32,
    initial_cops: usize,
    rng: ChaCha8Rng,
}

impl World {
    /// Seeds from the scenario's own seed.
    pub fn new(config: &ScenarioConfig) -> Result<World, InitError> {
        World::with_seed(config, config.run.seed)
    }

    pub fn with_seed(config: &ScenarioConfig, seed: u64) -> Result<World, InitError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (grid, mut agents) = init_state(config, &mut rng)?;
        let params = game_params(config);
        // Classify initial situations so tick 0 reports active strategies.
        let frozen = agents.clone();
        for a in agents.iter_mut().filter(|a| a.is_live_combatant()) {
            a.situation = Some(game::round_benefit(a, &frozen, &params).0);
        }
        let initial_cops = metrics::live_count(&agents, Role::Cop);
        Ok(World {
            config: config.clone(),
            params,
            grid,
            agents,
            tick: 0,
            initial_cops,
            rng,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn stats(&self) -> TickStats {
        TickStats::observe(self.tick, &self.agents)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot::capture(self.tick, &self.agents)
    }

    /// Stops once live activists are gone, once live cops are gone (when
    /// the run started with any), or at the tick limit. A run that starts
    /// without cops keeps going so unopposed contagion can play out.
    pub fn termination(&self) -> Option<Termination> {
        if self.tick == 0 {
            return None;
        }
        if metrics::live_count(&self.agents, Role::Activist) == 0 {
            Some(Termination::ActivistsEliminated)
        } else if self.initial_cops > 0 && metrics::live_count(&self.agents, Role::Cop) == 0 {
            Some(Termination::CopsEliminated)
        } else if self.tick >= self.config.run.max_ticks {
            Some(Termination::MaxTicks)
        } else {
            None
        }
    }

    /// Advances one tick: emotion, game, evolution, movement, death.
    pub fn step(&mut self) -> StepReport {
        let mut report = StepReport::default();
        let pr = self.config.contagion.pr;
        let model = self.config.model;

        // emotion
        let frozen = self.agents.clone();
        for a in self.agents.iter_mut().filter(|a| a.alive) {
            let external = if model.contagion {
                emotion::external_increment(a, &frozen, pr)
            } else {
                0.0
            };
            let mental = if model.mental_emotion && a.role.is_combatant() {
                emotion::mental_increment(
                    a.role,
                    a.benefit_cur - a.benefit_prev,
                    self.config.thresholds.delta,
                    &mut self.rng,
                )
                .expect("validated config has delta > 0")
            } else {
                0.0
            };
            let delta = EmotionDelta::new(external, mental);
            a.external_emotion += external;
            a.mental_emotion += mental;
            a.emotion = emotion::update_emotion(a.emotion, &delta);
            if emotion::apply_transition(a, &self.config.thresholds) {
                report.transitions += 1;
            }
        }

        // game
        let frozen = self.agents.clone();
        for a in self.agents.iter_mut().filter(|a| a.alive) {
            if a.role.is_combatant() {
                let (sit, benefit) = game::round_benefit(a, &frozen, &self.params);
                a.situation = Some(sit);
                a.benefit_prev = a.benefit_cur;
                a.benefit_cur = benefit;
            } else {
                a.situation = None;
            }
        }

        // evolution
        for side in [Role::Cop, Role::Activist] {
            let next =
                game::evolve_strategies(side, &self.agents, pr, model.mutation_rate, &mut self.rng);
            for (a, c) in self.agents.iter_mut().zip(next) {
                a.chromosome = c;
            }
        }

        // movement
        let frozen = self.agents.clone();
        let decisions: Vec<_> = frozen
            .iter()
            .filter(|a| a.alive)
            .map(|a| {
                let d = behavior::choose_move(a, &frozen, &self.grid, &self.params, &mut self.rng);
                (a.id, d)
            })
            .collect();
        report.moved =
            behavior::commit_moves(&decisions, &mut self.agents, &mut self.grid, &mut self.rng);

        // death
        let hood = match model.death_radius {
            DeathRadius::Pr => Neighborhood::Radius(pr),
            DeathRadius::Moore1 => Neighborhood::Moore,
        };
        let p_die: Vec<Option<f64>> = self
            .agents
            .iter()
            .map(|a| {
                a.is_live_combatant()
                    .then(|| behavior::death_probability(a, &self.agents, hood))
            })
            .collect();
        for (a, p) in self.agents.iter_mut().zip(p_die) {
            let Some(p) = p else { continue };
            if behavior::update_warning(a, p) == LifeStatus::Died {
                self.grid.vacate(a.position);
                report.deaths += 1;
            }
        }

        self.tick += 1;
        report
    }
}

pub fn game_params(config: &ScenarioConfig) -> GameParams {
    GameParams {
        perception_radius: config.contagion.pr,
        balance_tolerance: config.model.balance_tolerance,
        aggregation: config.model.benefit_aggregation,
        matrix: game::BenefitMatrix::standard(),
    }
}

/// Outcome of one simulation. `series[k]` describes tick `k`; the trace,
/// when recorded, has one snapshot per series entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub series: Vec<TickStats>,
    pub trace: Option<SimulationTrace>,
    pub final_tick: u32,
    pub termination: Termination,
}

/// Runs `config` with its own seed, recording the full trace.
pub fn run(config: &ScenarioConfig) -> Result<RunResult, EngineError> {
    run_seeded(config, config.run.seed, true)
}

pub fn run_seeded(config: &ScenarioConfig, seed: u64, record_trace: bool) -> Result<RunResult, EngineError> {
    let mut world = World::with_seed(config, seed)?;
    let mut series = vec![world.stats()];
    let mut trace = record_trace.then(|| {
        let mut t = SimulationTrace::new(config.grid.rows, config.grid.cols);
        t.snapshots.push(world.snapshot());
        t
    });
    let termination = loop {
        world.step();
        series.push(world.stats());
        if let Some(t) = trace.as_mut() {
            t.snapshots.push(world.snapshot());
        }
        if let Some(reason) = world.termination() {
            break reason;
        }
    };
    log::debug!("seed {seed}: {} after {} ticks", termination.as_str(), world.tick());
    Ok(RunResult {
        seed,
        series,
        trace,
        final_tick: world.tick(),
        termination,
    })
}
