use crate::domain::{Agent, Cell, Role, StrategyChromosome};

/// A live agent with unit contagion strengths and an all-cooperation chromosome.
pub(crate) fn agent(id: u32, role: Role, row: usize, col: usize, e: f64) -> Agent {
    Agent {
        id,
        role,
        position: Cell::new(row, col),
        emotion: e,
        external_emotion: e,
        mental_emotion: 0.0,
        chromosome: StrategyChromosome::default(),
        situation: None,
        benefit_prev: 0.0,
        benefit_cur: 0.0,
        receive_strength: 1.0,
        send_strength: 1.0,
        warn_count: 0,
        warn_threshold: 0.8,
        warn_time_threshold: 10,
        alive: true,
    }
}
