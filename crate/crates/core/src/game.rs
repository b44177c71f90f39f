//! Deterrent forces, situation estimation, the benefit matrix and
//! evolutionary strategy updating.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::domain::{
    Agent, AgentId, BenefitAggregation, Cell, Role, Situation, SituationClass, Strategy,
    StrategyChromosome,
};

/// Fighting strength conferred by an emotion: `sin(|e| * pi/2)`.
pub fn deterrent_force(emotion: f64) -> f64 {
    (emotion.abs() * FRAC_PI_2).sin()
}

/// Which cells count as "around" an agent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Neighborhood {
    /// Circular perceived range of the given radius.
    Radius(f64),
    /// The eight adjacent cells.
    Moore,
}

impl Neighborhood {
    pub fn contains(self, center: Cell, other: Cell) -> bool {
        match self {
            Neighborhood::Radius(r) => center.within(other, r),
            Neighborhood::Moore => center.is_moore_neighbor(other),
        }
    }
}

/// Total deterrent force of `side` and of its opponents around `center`,
/// as perceived by agent `self_id` (whose own force `self_force` is counted
/// on its side). Civilians and the dead belong to neither sum.
pub fn side_forces(
    side: Role,
    self_id: AgentId,
    self_force: f64,
    center: Cell,
    agents: &[Agent],
    hood: Neighborhood,
) -> (f64, f64) {
    let opponent = side.opponent();
    let mut own = self_force;
    let mut opposing = 0.0;
    for other in agents {
        if other.id == self_id || !other.alive || !hood.contains(center, other.position) {
            continue;
        }
        if other.role == side {
            own += deterrent_force(other.emotion);
        } else if Some(other.role) == opponent {
            opposing += deterrent_force(other.emotion);
        }
    }
    (own, opposing)
}

/// `(F, F_hat)` for an agent at its own position within `perception_radius`.
pub fn total_forces(agent: &Agent, agents: &[Agent], perception_radius: f64) -> (f64, f64) {
    side_forces(
        agent.role,
        agent.id,
        deterrent_force(agent.emotion),
        agent.position,
        agents,
        Neighborhood::Radius(perception_radius),
    )
}

/// Classifies the force balance seen by a member of `side`. The result is
/// expressed cops-minus-activists regardless of who perceives it.
pub fn situation(side: Role, own: f64, opposing: f64, balance_tolerance: f64) -> Situation {
    let diff = own - opposing;
    let delta_f = if side == Role::Activist { -diff } else { diff };
    let class = if diff.abs() <= balance_tolerance {
        SituationClass::Balanced
    } else if delta_f > 0.0 {
        SituationClass::CopsStronger
    } else {
        SituationClass::ActivistsStronger
    };
    Situation { class, delta_f }
}

/// Strategy an agent plays in the given situation.
pub fn active_strategy(chromosome: &StrategyChromosome, class: SituationClass) -> Strategy {
    chromosome.strategy(class)
}

/// Payoffs `(cop, activist)` for every situation and strategy pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenefitMatrix {
    /// Indexed `[situation][cop strategy][activist strategy]`,
    /// cooperation = 0, defection = 1.
    blocks: [[[(f64, f64); 2]; 2]; 3],
}

impl BenefitMatrix {
    pub const fn new(blocks: [[[(f64, f64); 2]; 2]; 3]) -> Self {
        BenefitMatrix { blocks }
    }

    /// The standard cops-versus-activists payoffs.
    pub const fn standard() -> Self {
        BenefitMatrix::new([
            // cops stronger
            [[(1.0, 4.0), (2.0, 2.0)], [(3.0, 3.0), (4.0, 1.0)]],
            // balanced
            [[(3.0, 3.0), (0.0, 5.0)], [(5.0, 0.0), (1.0, 1.0)]],
            // activists stronger
            [[(4.0, 1.0), (3.0, 3.0)], [(2.0, 2.0), (1.0, 4.0)]],
        ])
    }

    pub fn payoff(&self, class: SituationClass, cop: Strategy, activist: Strategy) -> (f64, f64) {
        self.blocks[class.index()][strategy_index(cop)][strategy_index(activist)]
    }
}

impl Default for BenefitMatrix {
    fn default() -> Self {
        BenefitMatrix::standard()
    }
}

fn strategy_index(s: Strategy) -> usize {
    match s {
        Strategy::Cooperation => 0,
        Strategy::Defection => 1,
    }
}

/// Lookup in the standard matrix.
pub fn payoff(class: SituationClass, cop: Strategy, activist: Strategy) -> (f64, f64) {
    BenefitMatrix::standard().payoff(class, cop, activist)
}

/// Parameters of one round of games.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameParams {
    pub perception_radius: f64,
    pub balance_tolerance: f64,
    pub aggregation: BenefitAggregation,
    pub matrix: BenefitMatrix,
}

/// Situation perceived and benefit earned by `agent` if it stood at `center`.
///
/// The agent plays every live opponent within range once. Both players use
/// the strategy their chromosome assigns to the perceiver's situation; the
/// agent keeps its own side of each payoff.
pub fn benefit_at(agent: &Agent, center: Cell, agents: &[Agent], params: &GameParams) -> (Situation, f64) {
    let hood = Neighborhood::Radius(params.perception_radius);
    let (own, opposing) = side_forces(
        agent.role,
        agent.id,
        deterrent_force(agent.emotion),
        center,
        agents,
        hood,
    );
    let sit = situation(agent.role, own, opposing, params.balance_tolerance);
    let Some(opponent) = agent.role.opponent() else {
        return (sit, 0.0);
    };
    let mine = agent.chromosome.strategy(sit.class);
    let mut total = 0.0;
    let mut games = 0usize;
    for other in agents {
        if other.id == agent.id || !other.is_live(opponent) || !hood.contains(center, other.position) {
            continue;
        }
        let theirs = other.chromosome.strategy(sit.class);
        let (cop, act) = match agent.role {
            Role::Cop => params.matrix.payoff(sit.class, mine, theirs),
            _ => params.matrix.payoff(sit.class, theirs, mine),
        };
        total += if agent.role == Role::Cop { cop } else { act };
        games += 1;
    }
    let benefit = match params.aggregation {
        BenefitAggregation::Sum => total,
        BenefitAggregation::Mean if games > 0 => total / games as f64,
        BenefitAggregation::Mean => 0.0,
    };
    (sit, benefit)
}

/// This tick's benefit for a live cop or activist at its current cell.
pub fn round_benefit(agent: &Agent, agents: &[Agent], params: &GameParams) -> (Situation, f64) {
    benefit_at(agent, agent.position, agents, params)
}

/// Local imitate-the-best with per-bit mutation for one side.
///
/// Every live agent of `side` looks at live same-side agents within range.
/// If the richest of them strictly out-earned it this tick, it copies that
/// agent's bit for its own current situation class. Then each of its three
/// bits flips with probability `mutation_rate`. Reads only the frozen input;
/// returns the new chromosome for every agent (others unchanged).
pub fn evolve_strategies<R: Rng + ?Sized>(
    side: Role,
    agents: &[Agent],
    perception_radius: f64,
    mutation_rate: f64,
    rng: &mut R,
) -> Vec<StrategyChromosome> {
    let mut next: Vec<_> = agents.iter().map(|a| a.chromosome).collect();
    let mut best: Vec<&Agent> = Vec::new();
    for (slot, agent) in next.iter_mut().zip(agents) {
        if !agent.is_live(side) {
            continue;
        }
        let Some(sit) = agent.situation else {
            continue;
        };
        best.clear();
        let mut best_benefit = agent.benefit_cur;
        for other in agents {
            if other.id == agent.id
                || !other.is_live(side)
                || !other.position.within(agent.position, perception_radius)
            {
                continue;
            }
            if other.benefit_cur > best_benefit {
                best_benefit = other.benefit_cur;
                best.clear();
                best.push(other);
            } else if other.benefit_cur == best_benefit && !best.is_empty() {
                best.push(other);
            }
        }
        if !best.is_empty() {
            let model = if best.len() == 1 {
                best[0]
            } else {
                best[rng.random_range(0..best.len())]
            };
            slot.set_bit(sit.class, model.chromosome.bit(sit.class));
        }
        for bit in slot.0.iter_mut() {
            if mutation_rate > 0.0 && rng.random_bool(mutation_rate) {
                *bit = !*bit;
            }
        }
    }
    next
}
