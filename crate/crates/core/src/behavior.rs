//! Per-tick movement on the grid, death probability and the warning-counter
//! life cycle.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Agent, AgentId, Cell, Grid, Role, Strategy};
use crate::game::{self, deterrent_force, side_forces, GameParams, Neighborhood};

/// Why an agent picked its move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rationale {
    /// Outgunned next door; moves to the best-paying free neighbour cell.
    Forced,
    /// Defector closing in on the nearest opponent.
    Attack,
    /// Cooperating cop heading for the nearest civilian.
    Protect,
    /// Cooperating activist heading for the nearest civilian.
    Harass,
    /// No cop or activist adjacent; same targeting as attack/protect/harass.
    Drift,
    /// Civilian moving towards stronger cop presence.
    SeekSafety,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveDecision {
    /// `None` means stay.
    pub target: Option<Cell>,
    pub rationale: Rationale,
}

impl MoveDecision {
    fn stay(rationale: Rationale) -> Self {
        MoveDecision { target: None, rationale }
    }
}

/// Opposing force in the adjacent cells strictly exceeds the same-side
/// force there (the agent's own force included).
pub fn must_move(agent: &Agent, agents: &[Agent]) -> bool {
    let (own, opposing) = side_forces(
        agent.role,
        agent.id,
        deterrent_force(agent.emotion),
        agent.position,
        agents,
        Neighborhood::Moore,
    );
    opposing > own
}

/// Benefit the agent would earn this tick if it stood on `cell`.
pub fn expected_cell_benefit(agent: &Agent, cell: Cell, agents: &[Agent], params: &GameParams) -> f64 {
    game::benefit_at(agent, cell, agents, params).1
}

fn empty_neighbors(agent: &Agent, grid: &Grid) -> Vec<Cell> {
    agent
        .position
        .moore_neighbors(grid.rows(), grid.cols())
        .filter(|&c| grid.is_empty(c))
        .collect()
}

/// Uniform pick among the candidates whose score equals the best one.
/// `better(a, b)` says whether score `a` beats `b`.
fn pick_best<R: Rng + ?Sized, S: Copy + PartialEq>(
    scored: &[(Cell, S)],
    better: impl Fn(S, S) -> bool,
    rng: &mut R,
) -> Option<(Cell, S)> {
    let mut best: Option<S> = None;
    for &(_, s) in scored {
        if best.is_none_or(|b| better(s, b)) {
            best = Some(s);
        }
    }
    let best = best?;
    let ties: Vec<_> = scored.iter().filter(|(_, s)| *s == best).copied().collect();
    Some(if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..ties.len())]
    })
}

/// Step towards the nearest agent matching `is_target`; stay unless some
/// free neighbour cell is strictly closer to a target than the current one.
fn approach<R: Rng + ?Sized>(
    agent: &Agent,
    agents: &[Agent],
    grid: &Grid,
    is_target: impl Fn(&Agent) -> bool,
    rationale: Rationale,
    rng: &mut R,
) -> MoveDecision {
    let targets: Vec<Cell> = agents
        .iter()
        .filter(|a| a.id != agent.id && a.alive && is_target(a))
        .map(|a| a.position)
        .collect();
    let nearest = |c: Cell| targets.iter().map(|&t| c.dist2(t)).min();
    let Some(here) = nearest(agent.position) else {
        return MoveDecision::stay(rationale);
    };
    let scored: Vec<(Cell, usize)> = empty_neighbors(agent, grid)
        .into_iter()
        .filter_map(|c| nearest(c).map(|d| (c, d)))
        .collect();
    match pick_best(&scored, |a, b| a < b, rng) {
        Some((cell, d)) if d < here => MoveDecision {
            target: Some(cell),
            rationale,
        },
        _ => MoveDecision::stay(rationale),
    }
}

fn cop_presence(center: Cell, agents: &[Agent], perception_radius: f64) -> f64 {
    agents
        .iter()
        .filter(|a| a.is_live(Role::Cop) && a.position.within(center, perception_radius))
        .map(|a| deterrent_force(a.emotion))
        .sum()
}

/// Movement decision for one live agent against the tick-start snapshot.
///
/// Cops and activists: forced retreat when outgunned next door; otherwise a
/// defector attacks the nearest opponent and a cooperator heads for the
/// nearest civilian (protect for cops, harass for activists). Civilians move
/// towards the cell with the most cop force in range. Ties are broken
/// uniformly at random.
pub fn choose_move<R: Rng + ?Sized>(
    agent: &Agent,
    agents: &[Agent],
    grid: &Grid,
    params: &GameParams,
    rng: &mut R,
) -> MoveDecision {
    let Some(opponent) = agent.role.opponent() else {
        let here = cop_presence(agent.position, agents, params.perception_radius);
        let scored: Vec<(Cell, f64)> = empty_neighbors(agent, grid)
            .into_iter()
            .map(|c| (c, cop_presence(c, agents, params.perception_radius)))
            .collect();
        return match pick_best(&scored, |a, b| a > b, rng) {
            Some((cell, s)) if s > 0.0 && s > here => MoveDecision {
                target: Some(cell),
                rationale: Rationale::SeekSafety,
            },
            _ => MoveDecision::stay(Rationale::SeekSafety),
        };
    };

    if must_move(agent, agents) {
        let scored: Vec<(Cell, f64)> = empty_neighbors(agent, grid)
            .into_iter()
            .map(|c| (c, expected_cell_benefit(agent, c, agents, params)))
            .collect();
        return MoveDecision {
            target: pick_best(&scored, |a, b| a > b, rng).map(|(c, _)| c),
            rationale: Rationale::Forced,
        };
    }

    let strategy = match agent.active_strategy() {
        Some(s) => s,
        None => {
            let sit = game::round_benefit(agent, agents, params).0;
            agent.chromosome.strategy(sit.class)
        }
    };
    let crowded = agents.iter().any(|a| {
        a.id != agent.id && a.is_live_combatant() && agent.position.is_moore_neighbor(a.position)
    });
    let rationale = |r| if crowded { r } else { Rationale::Drift };
    match strategy {
        Strategy::Defection => approach(
            agent,
            agents,
            grid,
            |a| a.role == opponent,
            rationale(Rationale::Attack),
            rng,
        ),
        Strategy::Cooperation => {
            let r = if agent.role == Role::Cop {
                Rationale::Protect
            } else {
                Rationale::Harass
            };
            approach(agent, agents, grid, |a| a.role == Role::Civilian, rationale(r), rng)
        }
    }
}

/// Applies decisions in a uniformly shuffled order. A move whose target has
/// been taken by an earlier mover degrades to staying put. Returns the
/// number of agents that actually moved.
pub fn commit_moves<R: Rng + ?Sized>(
    decisions: &[(AgentId, MoveDecision)],
    agents: &mut [Agent],
    grid: &mut Grid,
    rng: &mut R,
) -> usize {
    let mut order: Vec<usize> = (0..decisions.len()).collect();
    order.shuffle(rng);
    let mut moved = 0;
    for i in order {
        let (id, decision) = decisions[i];
        let Some(target) = decision.target else {
            continue;
        };
        let agent = &mut agents[id as usize];
        if grid.is_empty(target) && grid.relocate(agent.position, target).is_ok() {
            agent.position = target;
            moved += 1;
        }
    }
    moved
}

const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// `1 - exp(ln 0.1 * opposing / own)`: 0.9 when the two forces are equal,
/// 0 with no opposition, approaching (never reaching) 1 as the ratio grows.
pub fn death_probability_from(own: f64, opposing: f64) -> f64 {
    if opposing <= 0.0 {
        return 0.0;
    }
    let p = -(0.1f64.ln() * opposing / own).exp_m1();
    p.min(BELOW_ONE)
}

/// Death probability of a live cop or activist from the forces around it.
pub fn death_probability(agent: &Agent, agents: &[Agent], hood: Neighborhood) -> f64 {
    let (own, opposing) = side_forces(
        agent.role,
        agent.id,
        deterrent_force(agent.emotion),
        agent.position,
        agents,
        hood,
    );
    death_probability_from(own, opposing)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LifeStatus {
    Alive,
    /// Died on this update.
    Died,
}

/// Counts a warning when `p_die` exceeds the agent's threshold; the agent
/// dies once its warnings exceed its tolerance. Warnings never decay.
pub fn update_warning(agent: &mut Agent, p_die: f64) -> LifeStatus {
    if p_die > agent.warn_threshold {
        agent.warn_count += 1;
    }
    if agent.warn_count > agent.warn_time_threshold {
        agent.alive = false;
        LifeStatus::Died
    } else {
        LifeStatus::Alive
    }
}
