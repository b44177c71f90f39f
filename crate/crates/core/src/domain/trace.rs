use serde::{Deserialize, Serialize};

use super::{Agent, AgentId, Role, Strategy};

/// Observable state of one agent at one tick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSnapshot {
    pub id: AgentId,
    pub role: Role,
    pub row: usize,
    pub col: usize,
    pub emotion: f64,
    pub force: f64,
    /// Strategy decoded against the latest situation; absent for civilians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    pub alive: bool,
}

impl AgentSnapshot {
    pub fn of(agent: &Agent) -> Self {
        AgentSnapshot {
            id: agent.id,
            role: agent.role,
            row: agent.position.row,
            col: agent.position.col,
            emotion: agent.emotion,
            force: crate::game::deterrent_force(agent.emotion),
            strategy: agent.active_strategy(),
            alive: agent.alive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tick: u32,
    pub agents: Vec<AgentSnapshot>,
}

impl Snapshot {
    pub fn capture(tick: u32, agents: &[Agent]) -> Self {
        Snapshot {
            tick,
            agents: agents.iter().map(AgentSnapshot::of).collect(),
        }
    }
}

/// Per-tick snapshots of a run; snapshot 0 is the initial state and tick
/// indices are consecutive.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub rows: usize,
    pub cols: usize,
    pub snapshots: Vec<Snapshot>,
}

impl SimulationTrace {
    pub fn new(rows: usize, cols: usize) -> Self {
        SimulationTrace { rows, cols, snapshots: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}
