use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Role, EMOTION_LIMIT};

pub const DEFAULT_PERCEPTION_RADIUS: f64 = 10.0;
pub const DEFAULT_RECEIVE_STRENGTH: f64 = 0.8;
/// Calibrated so that, in the 80/50 civilian/activist setup, cops lose at a
/// 1:1 cop-to-activist ratio and prevail from 1.2:1 upwards.
pub const DEFAULT_SEND_STRENGTH: f64 = 0.1;
/// Benefit-difference threshold for mental emotion, on the scale of a single
/// game's payoff spread.
pub const DEFAULT_DELTA: f64 = 3.0;
pub const DEFAULT_MAX_TICKS: u32 = 500;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read scenario {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario field `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("invalid scenario:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counts {
    pub civilians: usize,
    pub activists: usize,
    pub cops: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.civilians + self.activists + self.cops
    }

    pub fn of(&self, role: Role) -> usize {
        match role {
            Role::Civilian => self.civilians,
            Role::Activist => self.activists,
            Role::Cop => self.cops,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSize {
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleEmotions {
    pub civilian: f64,
    pub activist: f64,
    pub cop: f64,
}

impl RoleEmotions {
    pub fn of(&self, role: Role) -> f64 {
        match role {
            Role::Civilian => self.civilian,
            Role::Activist => self.activist,
            Role::Cop => self.cop,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Activist -> civilian when emotion exceeds this.
    pub t_a2c: f64,
    /// Civilian -> activist when emotion falls below this.
    pub t_c2a: f64,
    /// Benefit-difference threshold for mental emotion.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContagionParams {
    /// Perception radius in cell widths.
    #[serde(default = "default_pr")]
    pub pr: f64,
    /// Global receive strength.
    #[serde(default = "default_a")]
    pub a: f64,
    /// Global send strength.
    #[serde(default = "default_b")]
    pub b: f64,
}

impl Default for ContagionParams {
    fn default() -> Self {
        ContagionParams {
            pr: DEFAULT_PERCEPTION_RADIUS,
            a: DEFAULT_RECEIVE_STRENGTH,
            b: DEFAULT_SEND_STRENGTH,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    #[serde(default = "default_max_ticks")]
    pub max_ticks: u32,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            max_ticks: DEFAULT_MAX_TICKS,
            seed: 0,
        }
    }
}

/// Pins one agent of `role` to a cell, optionally overriding its emotion.
/// Pinned agents count towards `counts`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub role: Role,
    pub row: usize,
    pub col: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenefitAggregation {
    #[default]
    Sum,
    Mean,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeathRadius {
    #[default]
    Pr,
    Moore1,
}

/// Knobs the model leaves open. All have defaults; scenario files only
/// need a `model` section to override them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    /// |dF| at or below this counts as a balanced situation.
    pub balance_tolerance: f64,
    /// Per-bit, per-tick strategy mutation probability.
    pub mutation_rate: f64,
    pub benefit_aggregation: BenefitAggregation,
    pub death_radius: DeathRadius,
    /// Disable to zero every external (contagion) increment.
    pub contagion: bool,
    /// Disable to zero every mental (game-driven) increment.
    pub mental_emotion: bool,
    /// Uniform range for each agent's early-warning threshold.
    pub warn_threshold: [f64; 2],
    /// Integer range (inclusive) for each agent's tolerated warning count.
    pub warn_time: [u32; 2],
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            balance_tolerance: 0.05,
            mutation_rate: 0.05,
            benefit_aggregation: BenefitAggregation::Sum,
            death_radius: DeathRadius::Pr,
            contagion: true,
            mental_emotion: true,
            warn_threshold: [0.7, 0.9],
            warn_time: [8, 20],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub counts: Counts,
    pub grid: GridSize,
    pub emotions: RoleEmotions,
    pub thresholds: Thresholds,
    #[serde(default)]
    pub contagion: ContagionParams,
    #[serde(default)]
    pub run: RunSettings,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub placements: Vec<Placement>,
    #[serde(default)]
    pub model: ModelParams,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_pr() -> f64 {
    DEFAULT_PERCEPTION_RADIUS
}
fn default_a() -> f64 {
    DEFAULT_RECEIVE_STRENGTH
}
fn default_b() -> f64 {
    DEFAULT_SEND_STRENGTH
}
fn default_max_ticks() -> u32 {
    DEFAULT_MAX_TICKS
}

impl ScenarioConfig {
    /// Reads and validates a JSON scenario file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ScenarioConfig =
            serde_path_to_error::deserialize(de).map_err(|err| {
                let field = err.path().to_string();
                ConfigError::Parse {
                    field,
                    message: err.into_inner().to_string(),
                }
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario config serializes")
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let t = &self.thresholds;
        if !(t.t_a2c > 0.0) {
            errs.push("T_a2c must be > 0".to_string());
        }
        if !(t.t_c2a < 0.0) {
            errs.push("T_c2a must be < 0".to_string());
        }
        if !(t.delta > 0.0) {
            errs.push("delta must be > 0".to_string());
        }
        let c = &self.contagion;
        if !(c.pr > 0.0) {
            errs.push("PR must be > 0".to_string());
        }
        if !(0.0..=1.0).contains(&c.a) {
            errs.push("A must lie in [0, 1]".to_string());
        }
        if !(0.0..=1.0).contains(&c.b) {
            errs.push("B must lie in [0, 1]".to_string());
        }
        if self.grid.rows == 0 || self.grid.cols == 0 {
            errs.push("grid rows and cols must be positive".to_string());
        }
        if self.run.max_ticks == 0 {
            errs.push("max_ticks must be positive".to_string());
        }
        for role in Role::ALL {
            let e = self.emotions.of(role);
            if self.counts.of(role) > 0 {
                check_emotion(role, e, &mut errs, "initial emotion");
            } else if !(e.abs() < 1.0) {
                errs.push(format!("{} initial emotion must lie in (-1, 1)", role.as_str()));
            }
        }
        let m = &self.model;
        if !(m.balance_tolerance >= 0.0) {
            errs.push("balance_tolerance must be >= 0".to_string());
        }
        if !(0.0..=1.0).contains(&m.mutation_rate) {
            errs.push("mutation_rate must lie in [0, 1]".to_string());
        }
        let [lo, hi] = m.warn_threshold;
        if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
            errs.push("warn_threshold must be an ordered range inside [0, 1]".to_string());
        }
        if m.warn_time[0] > m.warn_time[1] {
            errs.push("warn_time must be an ordered range".to_string());
        }

        let mut pinned = [0usize; 3];
        let mut seen = std::collections::HashSet::new();
        for (i, p) in self.placements.iter().enumerate() {
            pinned[p.role as usize] += 1;
            if p.row >= self.grid.rows || p.col >= self.grid.cols {
                errs.push(format!(
                    "placements[{i}]: cell ({}, {}) lies outside the grid",
                    p.row, p.col
                ));
            }
            if !seen.insert((p.row, p.col)) {
                errs.push(format!(
                    "placements[{i}]: cell ({}, {}) pinned twice",
                    p.row, p.col
                ));
            }
            if let Some(e) = p.emotion {
                check_emotion(p.role, e, &mut errs, &format!("placements[{i}] emotion"));
            }
        }
        for role in Role::ALL {
            let n = pinned[role as usize];
            if n > self.counts.of(role) {
                errs.push(format!(
                    "{n} {} placements exceed the {} count of {}",
                    role.as_str(),
                    role.as_str(),
                    self.counts.of(role)
                ));
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }
}

fn check_emotion(role: Role, e: f64, errs: &mut Vec<String>, what: &str) {
    let name = role.as_str();
    if !(e.abs() <= EMOTION_LIMIT) || e == 0.0 {
        errs.push(format!(
            "{name} {what} must be nonzero and inside [-{EMOTION_LIMIT}, {EMOTION_LIMIT}]"
        ));
    }
    match role {
        Role::Cop if e <= 0.0 => errs.push(format!("cop {what} must be > 0")),
        Role::Activist if e >= 0.0 => errs.push(format!("activist {what} must be < 0")),
        _ => {}
    }
}

impl fmt::Display for BenefitAggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenefitAggregation::Sum => "sum",
            BenefitAggregation::Mean => "mean",
        })
    }
}
