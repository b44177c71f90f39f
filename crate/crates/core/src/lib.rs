//! Antagonistic crowd simulation: civilians, activists and cops on a walled
//! grid, coupling emotional contagion with an evolutionary game.
//!
//! Each tick runs five phases on the tick-start snapshot: emotion, game,
//! strategy evolution, movement and death.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod behavior;
pub mod domain;
pub mod emotion;
pub mod engine;
pub mod game;
pub mod metrics;
pub mod report;

#[cfg(test)]
mod testutil;

pub use domain::{
    Agent, AgentId, Cell, Grid, Role, ScenarioConfig, Situation, SituationClass, Strategy,
    StrategyChromosome,
};
