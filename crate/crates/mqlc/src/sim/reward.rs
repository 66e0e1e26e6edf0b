//! Per-agent step reward and its global aggregate.

use super::config::{RoadConfig, ScenarioConfig};
use super::vehicle::VehicleState;

/// Weights of the three reward terms. The safety term is written as
/// `crash * (-1 on crash)` so a crash always contributes -1 to the total;
/// keeping the magnitude here rather than a sign lets the penalty stay a
/// penalty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardWeights {
    pub crash: f64,
    pub right_lane: f64,
    pub high_speed: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            crash: 1.0,
            right_lane: 0.1,
            high_speed: 0.4,
        }
    }
}

/// `w1*R1 + w2*R2 + w3*R3` with R1 = -1 on crash else 0, R2 the current
/// lane number over the rightmost lane number, and R3 the speed mapped
/// linearly from [v_min, v_max] onto [0, 1] (clamped).
pub fn reward(
    agent: &VehicleState,
    crashed: bool,
    road: &RoadConfig,
    config: &ScenarioConfig,
    weights: &RewardWeights,
) -> f64 {
    let r1 = if crashed { -1.0 } else { 0.0 };
    let r2 = f64::from(agent.lane) / f64::from(road.lane_count);
    let v = agent.vx.clamp(config.v_min, config.v_max);
    let r3 = (v - config.v_min) / (config.v_max - config.v_min);
    weights.crash * r1 + weights.right_lane * r2 + weights.high_speed * r3
}

/// Mean of the agents' individual rewards.
pub fn global_reward(agent_rewards: &[f64]) -> f64 {
    if agent_rewards.is_empty() {
        return 0.0;
    }
    agent_rewards.iter().sum::<f64>() / agent_rewards.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{DensityMode, VehicleKind};
    use approx::assert_abs_diff_eq;

    fn agent(lane: u32, vx: f64) -> VehicleState {
        VehicleState {
            id: 0,
            kind: VehicleKind::Agent,
            lane,
            x: 0.0,
            y: 0.0,
            vx,
            vy: 0.0,
            target_lane: lane,
            target_speed: vx,
            crashed: false,
        }
    }

    #[test]
    fn worked_examples() {
        let road = RoadConfig::default();
        let cfg = ScenarioConfig::for_mode(DensityMode::Normal, 0);
        let w = RewardWeights::default();
        // Crashed in the rightmost lane at minimum speed.
        assert_abs_diff_eq!(reward(&agent(6, 20.0), true, &road, &cfg, &w), -0.9, epsilon = 1e-12);
        // Clean, rightmost lane, maximum speed.
        assert_abs_diff_eq!(reward(&agent(6, 30.0), false, &road, &cfg, &w), 0.5, epsilon = 1e-12);
        // Clean, leftmost lane, minimum speed.
        assert_abs_diff_eq!(
            reward(&agent(1, 20.0), false, &road, &cfg, &w),
            0.1 / 6.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn speed_term_clamps_out_of_range_speeds() {
        let road = RoadConfig::default();
        let cfg = ScenarioConfig::for_mode(DensityMode::Normal, 0);
        let w = RewardWeights::default();
        let below = reward(&agent(1, 5.0), false, &road, &cfg, &w);
        let at_min = reward(&agent(1, 20.0), false, &road, &cfg, &w);
        assert_abs_diff_eq!(below, at_min, epsilon = 1e-12);
        let above = reward(&agent(1, 99.0), false, &road, &cfg, &w);
        let at_max = reward(&agent(1, 30.0), false, &road, &cfg, &w);
        assert_abs_diff_eq!(above, at_max, epsilon = 1e-12);
    }

    #[test]
    fn global_reward_is_mean() {
        assert_abs_diff_eq!(global_reward(&[0.5, 0.5]), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(global_reward(&[-0.9, 0.5, 0.4]), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(global_reward(&[0.37]), 0.37, epsilon = 1e-15);
    }
}
