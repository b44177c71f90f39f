//! Antagonistic emotional contagion.
//!
//! Each tick an agent's emotion moves by an external increment (contagion
//! from nearby cops and activists, decaying logistically with distance) and
//! a mental increment (driven by the change in its own game benefit).
//! Civilians only receive; they never emit and have no mental increment.

use rand::Rng;
use thiserror::Error;

use crate::domain::{clamp_emotion, Agent, Role, Thresholds};

#[derive(Debug, Error, PartialEq)]
pub enum EmotionError {
    #[error("emotional fluctuation threshold must be > 0, got {0}")]
    NonPositiveDelta(f64),
}

/// Per-tick emotion change of one agent.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EmotionDelta {
    pub external: f64,
    pub mental: f64,
    pub total: f64,
}

impl EmotionDelta {
    pub fn new(external: f64, mental: f64) -> Self {
        EmotionDelta {
            external,
            mental,
            total: external + mental,
        }
    }
}

/// Emotion received from one sender at distance `distance`.
///
/// The distance weight `1 - 1/(1 + e^-L)` is evaluated as `1/(1 + e^L)`,
/// which is the same quantity without cancellation at large `L`.
pub fn pairwise_external_delta(
    sender_emotion: f64,
    distance: f64,
    receive_strength: f64,
    send_strength: f64,
) -> f64 {
    let weight = 1.0 / (1.0 + distance.exp());
    weight * sender_emotion * receive_strength * send_strength
}

/// Sum of contagion received by `receiver` from every live cop and activist
/// (other than itself) within `perception_radius`.
pub fn external_increment(receiver: &Agent, agents: &[Agent], perception_radius: f64) -> f64 {
    agents
        .iter()
        .filter(|s| s.id != receiver.id && s.is_live_combatant())
        .filter(|s| s.position.within(receiver.position, perception_radius))
        .map(|s| {
            pairwise_external_delta(
                s.emotion,
                s.position.distance(receiver.position),
                receiver.receive_strength,
                s.send_strength,
            )
        })
        .sum()
}

/// Mental increment from the benefit difference `dbene` between the last two
/// games. Benefit gains push cops up and activists down; civilians get 0.
pub fn mental_increment<R: Rng + ?Sized>(
    role: Role,
    dbene: f64,
    delta: f64,
    rng: &mut R,
) -> Result<f64, EmotionError> {
    if !(delta > 0.0) {
        return Err(EmotionError::NonPositiveDelta(delta));
    }
    let base = if dbene.abs() < delta {
        if role == Role::Civilian {
            return Ok(0.0);
        }
        // open interval (-0.01, 0.01)
        loop {
            let v = rng.random_range(-0.01..0.01);
            if v != -0.01 {
                break v;
            }
        }
    } else if dbene >= delta {
        0.1 / (delta + (delta / dbene).exp())
    } else {
        -0.1 / (delta + (dbene / delta).exp())
    };
    Ok(match role {
        Role::Cop => base,
        Role::Activist => -base,
        Role::Civilian => 0.0,
    })
}

/// Additive update followed by the clamp / zero-avoidance rule.
pub fn update_emotion(previous: f64, delta: &EmotionDelta) -> f64 {
    clamp_emotion(previous + delta.total, previous)
}

/// Role after applying the transition thresholds to the agent's current
/// emotion. Cops never change role.
pub fn maybe_transition_role(agent: &Agent, thresholds: &Thresholds) -> Role {
    match agent.role {
        Role::Activist if agent.emotion > thresholds.t_a2c => Role::Civilian,
        Role::Civilian if agent.emotion < thresholds.t_c2a => Role::Activist,
        role => role,
    }
}

/// Applies [`maybe_transition_role`]; returns whether the role changed.
/// Emotion and chromosome carry over, benefit accumulators are cleared.
pub fn apply_transition(agent: &mut Agent, thresholds: &Thresholds) -> bool {
    let next = maybe_transition_role(agent, thresholds);
    if next == agent.role {
        return false;
    }
    agent.role = next;
    agent.benefit_prev = 0.0;
    agent.benefit_cur = 0.0;
    agent.situation = None;
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::StrategyChromosome;
    use crate::testutil::agent;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn thresholds() -> Thresholds {
        Thresholds { t_a2c: 0.1, t_c2a: -0.5, delta: 0.1 }
    }

    #[test]
    fn pairwise_at_zero_distance_is_half() {
        assert_eq!(pairwise_external_delta(1.0, 0.0, 1.0, 1.0), 0.5);
    }

    #[test]
    fn pairwise_vanishes_far_away() {
        assert!(pairwise_external_delta(-0.5, 800.0, 1.0, 1.0).abs() < 1e-300);
    }

    #[test]
    fn pairwise_at_ten_cells() {
        // (1 - 1/(1+e^-10)) * -0.5 * 0.8, evaluated at 50 digits
        let expected = -1.815_914_748_097_375_8e-5;
        let got = pairwise_external_delta(-0.5, 10.0, 0.8, 1.0);
        assert!((got - expected).abs() < 1e-12, "{got}");
    }

    #[test]
    fn empty_neighbourhood_gives_zero() {
        let me = agent(0, Role::Civilian, 5, 5, 0.1);
        let far = agent(1, Role::Cop, 19, 19, 0.9);
        let civ = agent(2, Role::Civilian, 5, 6, -0.9);
        assert_eq!(external_increment(&me, &[me.clone(), far, civ], 3.0), 0.0);
    }

    #[test]
    fn single_cop_at_zero_distance() {
        let me = agent(0, Role::Civilian, 5, 5, 0.1);
        let mut cop = agent(1, Role::Cop, 5, 5, 1.0);
        cop.send_strength = 1.0;
        assert_eq!(external_increment(&me, &[me.clone(), cop], 10.0), 0.5);
    }

    #[test]
    fn opposite_emotions_at_equal_distance_cancel() {
        let me = agent(0, Role::Civilian, 5, 5, 0.1);
        let cop = agent(1, Role::Cop, 5, 6, 0.5);
        let act = agent(2, Role::Activist, 4, 5, -0.5);
        let direct = pairwise_external_delta(0.5, 1.0, 1.0, 1.0)
            + pairwise_external_delta(-0.5, 1.0, 1.0, 1.0);
        let got = external_increment(&me, &[me.clone(), cop, act], 10.0);
        assert_eq!(got, direct);
        assert_eq!(got, 0.0);
    }

    #[test]
    fn dead_senders_are_silent() {
        let me = agent(0, Role::Cop, 5, 5, 0.5);
        let mut act = agent(1, Role::Activist, 5, 6, -0.9);
        act.alive = false;
        assert_eq!(external_increment(&me, &[me.clone(), act], 10.0), 0.0);
    }

    #[test]
    fn mental_small_difference_is_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let v = mental_increment(Role::Cop, 0.0, 0.1, &mut rng).unwrap();
            assert!(v > -0.01 && v < 0.01);
        }
    }

    #[test]
    fn mental_saturating_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // 50-digit evaluations of 0.1/(0.1+e) and -0.1/(0.1+e^-1)
        let gain = 0.035_482_611_777_927_51;
        let loss = -0.213_730_271_519_576_3;
        let cop_gain = mental_increment(Role::Cop, 0.1, 0.1, &mut rng).unwrap();
        let act_gain = mental_increment(Role::Activist, 0.1, 0.1, &mut rng).unwrap();
        let cop_loss = mental_increment(Role::Cop, -0.1, 0.1, &mut rng).unwrap();
        assert!((cop_gain - gain).abs() < 1e-12);
        assert_eq!(act_gain, -cop_gain);
        assert!((cop_loss - loss).abs() < 1e-12);
    }

    #[test]
    fn mental_rejects_bad_delta() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(
            mental_increment(Role::Cop, 1.0, 0.0, &mut rng),
            Err(EmotionError::NonPositiveDelta(0.0))
        );
    }

    #[test]
    fn civilians_have_no_mental_increment() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [-5.0, 0.0, 0.05, 5.0] {
            assert_eq!(mental_increment(Role::Civilian, d, 0.1, &mut rng).unwrap(), 0.0);
        }
    }

    #[test]
    fn update_examples() {
        assert!((update_emotion(0.5, &EmotionDelta::new(0.1, 0.0)) - 0.6).abs() < 1e-15);
        assert_eq!(update_emotion(0.95, &EmotionDelta::new(0.2, 0.0)), 0.999);
        assert_eq!(update_emotion(0.3, &EmotionDelta::new(-0.3, 0.0)), 1e-6);
        let d = EmotionDelta::new(0.25, -0.5);
        assert_eq!(d.total, d.external + d.mental);
    }

    #[test]
    fn transitions() {
        let t = thresholds();
        assert_eq!(maybe_transition_role(&agent(0, Role::Activist, 0, 0, 0.2), &t), Role::Civilian);
        assert_eq!(maybe_transition_role(&agent(0, Role::Civilian, 0, 0, -0.6), &t), Role::Activist);
        assert_eq!(maybe_transition_role(&agent(0, Role::Cop, 0, 0, -0.99), &t), Role::Cop);
        assert_eq!(maybe_transition_role(&agent(0, Role::Activist, 0, 0, 0.1), &t), Role::Activist);
        assert_eq!(maybe_transition_role(&agent(0, Role::Civilian, 0, 0, -0.5), &t), Role::Civilian);
    }

    #[test]
    fn transition_resets_benefits_only() {
        let t = thresholds();
        let mut a = agent(0, Role::Activist, 0, 0, 0.4);
        a.chromosome = StrategyChromosome([true, false, true]);
        a.benefit_cur = 12.0;
        a.benefit_prev = 9.0;
        assert!(apply_transition(&mut a, &t));
        assert_eq!(a.role, Role::Civilian);
        assert_eq!(a.emotion, 0.4);
        assert_eq!(a.chromosome, StrategyChromosome([true, false, true]));
        assert_eq!((a.benefit_cur, a.benefit_prev), (0.0, 0.0));
        assert!(!apply_transition(&mut a, &t));
    }
}
