//! Shared data types: roles, strategies, agents, the cellular grid, scenario
//! configuration and initial-state construction.

mod config;
mod grid;
mod init;
mod trace;

pub use config::{
    BenefitAggregation, ConfigError, Counts, DeathRadius, GridSize, ModelParams, Placement,
    ContagionParams, RoleEmotions, RunSettings, ScenarioConfig, Thresholds,
};
pub use grid::{Cell, Grid, GridError};
pub use init::{init_state, InitError};
pub use trace::{AgentSnapshot, SimulationTrace, Snapshot};

use serde::{Deserialize, Serialize};

pub type AgentId = u32;

/// Emotions are kept strictly inside (-1, 1) and away from zero.
pub const EMOTION_LIMIT: f64 = 0.999;
pub const EMOTION_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Civilian,
    Activist,
    Cop,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Civilian, Role::Activist, Role::Cop];

    /// Cops and activists fight; civilians do not.
    pub fn is_combatant(self) -> bool {
        !matches!(self, Role::Civilian)
    }

    pub fn opponent(self) -> Option<Role> {
        match self {
            Role::Civilian => None,
            Role::Activist => Some(Role::Cop),
            Role::Cop => Some(Role::Activist),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Civilian => "civilian",
            Role::Activist => "activist",
            Role::Cop => "cop",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Cooperation,
    Defection,
}

/// Which side holds the larger total deterrent force, always expressed
/// from the cops' point of view (cops minus activists).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SituationClass {
    CopsStronger,
    Balanced,
    ActivistsStronger,
}

impl SituationClass {
    /// Bit position inside a [`StrategyChromosome`].
    pub fn index(self) -> usize {
        match self {
            SituationClass::CopsStronger => 0,
            SituationClass::Balanced => 1,
            SituationClass::ActivistsStronger => 2,
        }
    }
}

/// A classified situation together with the raw force difference
/// (cops minus activists) it was derived from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Situation {
    pub class: SituationClass,
    pub delta_f: f64,
}

/// One strategy bit per situation class, ordered
/// (cops stronger, balanced, activists stronger). A set bit means defection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyChromosome(pub [bool; 3]);

impl StrategyChromosome {
    pub fn bit(&self, class: SituationClass) -> bool {
        self.0[class.index()]
    }

    pub fn set_bit(&mut self, class: SituationClass, value: bool) {
        self.0[class.index()] = value;
    }

    pub fn strategy(&self, class: SituationClass) -> Strategy {
        if self.bit(class) {
            Strategy::Defection
        } else {
            Strategy::Cooperation
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub role: Role,
    pub position: Cell,
    /// Total emotion; the only emotional state that drives dynamics.
    pub emotion: f64,
    /// Accumulated contagion increments (starts at the initial emotion).
    pub external_emotion: f64,
    /// Accumulated game-driven increments.
    pub mental_emotion: f64,
    pub chromosome: StrategyChromosome,
    /// Most recent perceived situation; `None` for civilians.
    pub situation: Option<Situation>,
    pub benefit_prev: f64,
    pub benefit_cur: f64,
    /// Susceptibility to received emotion.
    pub receive_strength: f64,
    /// Expressiveness of emitted emotion.
    pub send_strength: f64,
    pub warn_count: u32,
    pub warn_threshold: f64,
    pub warn_time_threshold: u32,
    pub alive: bool,
}

impl Agent {
    pub fn is_live(&self, role: Role) -> bool {
        self.alive && self.role == role
    }

    pub fn is_live_combatant(&self) -> bool {
        self.alive && self.role.is_combatant()
    }

    /// Strategy decoded against the most recently perceived situation.
    pub fn active_strategy(&self) -> Option<Strategy> {
        if !self.role.is_combatant() {
            return None;
        }
        self.situation.map(|s| self.chromosome.strategy(s.class))
    }
}

/// Clamp into `[-EMOTION_LIMIT, EMOTION_LIMIT]` keeping the value nonzero;
/// an exact zero takes the sign of `previous`.
pub fn clamp_emotion(value: f64, previous: f64) -> f64 {
    let clamped = value.clamp(-EMOTION_LIMIT, EMOTION_LIMIT);
    if clamped == 0.0 {
        EMOTION_FLOOR.copysign(previous)
    } else {
        clamped
    }
}
