use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use super::{Agent, AgentId, Cell, Grid, Role, ScenarioConfig, StrategyChromosome};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InitError {
    #[error("{agents} agents do not fit on a grid of {cells} cells")]
    Capacity { agents: usize, cells: usize },
}

/// Builds the initial grid and agent list.
///
/// Agent ids are assigned role by role (civilians, activists, cops), pinned
/// placements first within each role. Unpinned agents go to distinct empty
/// cells sampled uniformly. Per-agent draws follow in id order.
pub fn init_state<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<(Grid, Vec<Agent>), InitError> {
    let mut grid = Grid::new(config.grid.rows, config.grid.cols);
    let total = config.counts.total();
    if total > grid.capacity() {
        return Err(InitError::Capacity {
            agents: total,
            cells: grid.capacity(),
        });
    }

    // (role, pinned cell, emotion)
    let mut specs: Vec<(Role, Option<Cell>, f64)> = Vec::with_capacity(total);
    for role in Role::ALL {
        let default_emotion = config.emotions.of(role);
        let pinned: Vec<_> = config.placements.iter().filter(|p| p.role == role).collect();
        for p in &pinned {
            specs.push((
                role,
                Some(Cell::new(p.row, p.col)),
                p.emotion.unwrap_or(default_emotion),
            ));
        }
        for _ in pinned.len()..config.counts.of(role) {
            specs.push((role, None, default_emotion));
        }
    }

    for (id, (_, cell, _)) in specs.iter().enumerate() {
        if let Some(cell) = cell {
            grid.place(id as AgentId, *cell)
                .expect("validated placements are in bounds and distinct");
        }
    }
    let free = grid.empty_cells();
    let unpinned = specs.iter().filter(|s| s.1.is_none()).count();
    let picks = index::sample(rng, free.len(), unpinned);
    let mut picks = picks.iter();

    let [warn_lo, warn_hi] = config.model.warn_threshold;
    let [time_lo, time_hi] = config.model.warn_time;
    let mut agents = Vec::with_capacity(total);
    for (id, (role, pinned, emotion)) in specs.into_iter().enumerate() {
        let id = id as AgentId;
        let position = match pinned {
            Some(cell) => cell,
            None => {
                let cell = free[picks.next().expect("enough free cells")];
                grid.place(id, cell).expect("sampled cell is free");
                cell
            }
        };
        let warn_threshold = rng.random_range(warn_lo..=warn_hi);
        let warn_time_threshold = rng.random_range(time_lo..=time_hi);
        let chromosome = StrategyChromosome([rng.random(), rng.random(), rng.random()]);
        agents.push(Agent {
            id,
            role,
            position,
            emotion,
            external_emotion: emotion,
            mental_emotion: 0.0,
            chromosome,
            situation: None,
            benefit_prev: 0.0,
            benefit_cur: 0.0,
            receive_strength: config.contagion.a,
            send_strength: config.contagion.b,
            warn_count: 0,
            warn_threshold,
            warn_time_threshold,
            alive: true,
        });
    }
    Ok((grid, agents))
}
