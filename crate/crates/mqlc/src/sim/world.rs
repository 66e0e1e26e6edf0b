//! World state, scenario initialization and the decision-tick step loop.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::decision::action::MetaAction;
use crate::seeds;

use super::behavior::{idm_acceleration, BehaviorPreset, LaneChangeTerms};
use super::config::{RoadConfig, ScenarioConfig};
use super::reward::{global_reward, reward, RewardWeights};
use super::vehicle::{VehicleKind, VehicleState};
use super::{SimError, SIMULATION_SUBSTEPS, SUBSTEP_DT, VEHICLE_LENGTH, VEHICLE_WIDTH};

/// Longitudinal spacing between consecutive spawn slots, meters.
const SPAWN_SPACING: f64 = 25.0;
/// Uniform jitter applied to each spawn slot, meters.
const SPAWN_JITTER: f64 = 5.0;
/// First spawn slot offset from the road start.
const SPAWN_MARGIN: f64 = 10.0;
/// Proportional gain of the lateral controller, 1/s.
const LATERAL_GAIN: f64 = 0.3;
/// Lateral speed clamp, m/s.
const LATERAL_SPEED_LIMIT: f64 = 2.0;
/// A lane change counts as settled below this lateral error, meters.
const LANE_SETTLE_TOLERANCE: f64 = 0.1;
/// Proportional gain of the longitudinal controller toward target speed, 1/s.
const LONGITUDINAL_GAIN: f64 = 0.5;
/// Speed adjustment applied by the faster/slower meta-actions, m/s.
const SPEED_STEP: f64 = 5.0;

/// Result of one decision tick.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    /// Per-agent reward, agent-index order.
    pub rewards: Vec<f64>,
    /// Per-agent crash flags after this tick.
    pub crashed: Vec<bool>,
    /// Mean of the per-agent rewards.
    pub global_reward: f64,
    pub terminated: bool,
    pub elapsed_ticks: u32,
}

pub struct World {
    road: RoadConfig,
    scenario: ScenarioConfig,
    vehicles: Vec<VehicleState>,
    n_agents: usize,
    tick: u32,
    terminated: bool,
    reward_weights: RewardWeights,
}

/// Apply one meta-action to a vehicle's control targets. Lane actions move
/// the target lane one step (clamped to the road); speed actions move the
/// target speed by 5 m/s (clamped to the scenario range); idle leaves both.
pub fn apply_meta_action(
    vehicle: &VehicleState,
    action: MetaAction,
    road: &RoadConfig,
    scenario: &ScenarioConfig,
) -> VehicleState {
    debug_assert!(!vehicle.crashed, "meta-action on a crashed vehicle");
    let mut out = vehicle.clone();
    match action {
        MetaAction::Idle => {}
        MetaAction::LaneLeft => out.target_lane = out.target_lane.saturating_sub(1).max(1),
        MetaAction::LaneRight => out.target_lane = (out.target_lane + 1).min(road.lane_count),
        MetaAction::Faster => {
            out.target_speed = (out.target_speed + SPEED_STEP).clamp(scenario.v_min, scenario.v_max)
        }
        MetaAction::Slower => {
            out.target_speed = (out.target_speed - SPEED_STEP).clamp(scenario.v_min, scenario.v_max)
        }
    }
    out
}

/// Place agents and HDVs on random lanes at fixed longitudinal spacing with
/// seeded jitter and uniform initial speeds. Same config and seed reproduce
/// the same world bit for bit.
pub fn init_scenario(road: RoadConfig, scenario: ScenarioConfig) -> Result<World, SimError> {
    road.validate()?;
    scenario.validate()?;
    let n_total = scenario.n_agents + scenario.n_hdv;
    let last_slot = SPAWN_MARGIN + (n_total as f64 - 1.0) * SPAWN_SPACING + SPAWN_JITTER;
    if last_slot > road.road_length {
        return Err(SimError::InvalidScenario(format!(
            "{n_total} vehicles at {SPAWN_SPACING} m spacing need {last_slot:.0} m, road is {:.0} m",
            road.road_length
        )));
    }

    let mut rng = seeds::rng(scenario.seed, "world");

    // Agents occupy ids 0..n_agents but are scattered over spawn slots.
    let mut slots: Vec<usize> = (0..n_total).collect();
    slots.shuffle(&mut rng);

    let n_aggressive = (scenario.aggressive_fraction * scenario.n_hdv as f64).round() as usize;
    let mut hdv_kinds = vec![VehicleKind::HdvConservative; scenario.n_hdv];
    for kind in hdv_kinds.iter_mut().take(n_aggressive) {
        *kind = VehicleKind::HdvAggressive;
    }
    hdv_kinds.shuffle(&mut rng);

    let mut vehicles = Vec::with_capacity(n_total);
    for i in 0..n_total {
        let kind = if i < scenario.n_agents {
            VehicleKind::Agent
        } else {
            hdv_kinds[i - scenario.n_agents]
        };
        let jitter = rng.gen_range(-SPAWN_JITTER..=SPAWN_JITTER);
        let x = SPAWN_MARGIN + slots[i] as f64 * SPAWN_SPACING + jitter;
        let lane = rng.gen_range(1..=road.lane_count);
        let speed = rng.gen_range(scenario.v_min..=scenario.v_max);
        vehicles.push(VehicleState {
            id: i as u32,
            kind,
            lane,
            x,
            y: road.lane_center(lane),
            vx: speed,
            vy: 0.0,
            target_lane: lane,
            target_speed: speed,
            crashed: false,
        });
    }

    Ok(World {
        road,
        scenario,
        vehicles,
        n_agents: scenario.n_agents,
        tick: 0,
        terminated: false,
        reward_weights: RewardWeights::default(),
    })
}

impl World {
    pub fn road(&self) -> &RoadConfig {
        &self.road
    }

    pub fn scenario(&self) -> &ScenarioConfig {
        &self.scenario
    }

    pub fn vehicles(&self) -> &[VehicleState] {
        &self.vehicles
    }

    pub fn vehicle(&self, id: u32) -> Option<&VehicleState> {
        self.vehicles.get(id as usize)
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn agents(&self) -> &[VehicleState] {
        &self.vehicles[..self.n_agents]
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    fn preset_of(kind: VehicleKind) -> BehaviorPreset {
        match kind {
            VehicleKind::HdvAggressive => BehaviorPreset::aggressive(),
            _ => BehaviorPreset::conservative(),
        }
    }

    /// Nearest live vehicle ahead of `i` in `lane`, by current lane band.
    fn leader_in_lane(&self, i: usize, lane: u32) -> Option<usize> {
        let x = self.vehicles[i].x;
        self.vehicles
            .iter()
            .enumerate()
            .filter(|(j, v)| *j != i && !v.crashed && v.lane == lane && v.x > x)
            .min_by(|(_, a), (_, b)| a.x.partial_cmp(&b.x).expect("finite positions"))
            .map(|(j, _)| j)
    }

    fn follower_in_lane(&self, i: usize, lane: u32) -> Option<usize> {
        let x = self.vehicles[i].x;
        self.vehicles
            .iter()
            .enumerate()
            .filter(|(j, v)| *j != i && !v.crashed && v.lane == lane && v.x < x)
            .max_by(|(_, a), (_, b)| a.x.partial_cmp(&b.x).expect("finite positions"))
            .map(|(j, _)| j)
    }

    fn idm_toward(&self, i: usize, leader: Option<usize>, preset: &BehaviorPreset) -> f64 {
        idm_acceleration(&self.vehicles[i], leader.map(|j| &self.vehicles[j]), preset)
    }

    /// Incentive-based lane-change decision for one HDV, evaluated once per
    /// decision tick and only when the previous change has settled.
    fn hdv_consider_lane_change(&mut self, i: usize) {
        let v = &self.vehicles[i];
        let preset = Self::preset_of(v.kind);
        let settled = (v.y - self.road.lane_center(v.target_lane)).abs() < LANE_SETTLE_TOLERANCE
            && v.lane == v.target_lane;
        if !settled {
            return;
        }
        let current_lane = v.lane;
        let current_leader = self.leader_in_lane(i, current_lane);
        let a_current = self.idm_toward(i, current_leader, &preset);

        let mut best: Option<(u32, f64)> = None;
        for target in [current_lane.wrapping_sub(1), current_lane + 1] {
            if target < 1 || target > self.road.lane_count || target == current_lane {
                continue;
            }
            let new_leader = self.leader_in_lane(i, target);
            // Reject a change straight into an occupied slot.
            if let Some(j) = new_leader {
                if self.vehicles[j].x - self.vehicles[i].x <= VEHICLE_LENGTH {
                    continue;
                }
            }
            let new_follower = self.follower_in_lane(i, target);
            if let Some(j) = new_follower {
                if self.vehicles[i].x - self.vehicles[j].x <= VEHICLE_LENGTH {
                    continue;
                }
            }

            let mut hypothetical = self.vehicles[i].clone();
            hypothetical.lane = target;
            let ego_new_accel =
                idm_acceleration(&hypothetical, new_leader.map(|j| &self.vehicles[j]), &preset);

            let mut follower_terms = 0.0;
            let mut new_follower_accel = f64::INFINITY;
            if let Some(f) = new_follower {
                let f_preset = Self::preset_of(self.vehicles[f].kind);
                let before = self.idm_toward(f, self.leader_in_lane(f, target), &f_preset);
                let after = idm_acceleration(&self.vehicles[f], Some(&self.vehicles[i]), &f_preset);
                new_follower_accel = after;
                follower_terms += after - before;
            }
            if let Some(f) = self.follower_in_lane(i, current_lane) {
                let f_preset = Self::preset_of(self.vehicles[f].kind);
                let before = after_with(self, f, Some(i), &f_preset);
                let after = self.idm_toward(f, current_leader, &f_preset);
                follower_terms += after - before;
            }

            let terms = LaneChangeTerms {
                ego_gain: ego_new_accel - a_current,
                follower_terms,
                new_follower_accel,
                ego_new_accel,
            };
            if terms.accepts(&preset) {
                let incentive = terms.incentive(&preset);
                if best.map_or(true, |(_, b)| incentive > b) {
                    best = Some((target, incentive));
                }
            }
        }
        if let Some((target, _)) = best {
            self.vehicles[i].target_lane = target;
        }

        fn after_with(world: &World, follower: usize, leader: Option<usize>, preset: &BehaviorPreset) -> f64 {
            idm_acceleration(
                &world.vehicles[follower],
                leader.map(|j| &world.vehicles[j]),
                preset,
            )
        }
    }

    /// Advance one decision tick under the given joint action. Meta-actions
    /// update agent targets once, HDV lane decisions run once, then the
    /// substep loop integrates controllers and checks collisions.
    pub fn step(&mut self, actions: &[MetaAction]) -> Result<StepOutcome, SimError> {
        if self.terminated {
            return Err(SimError::Terminated);
        }
        if actions.len() != self.n_agents {
            return Err(SimError::ActionCount {
                expected: self.n_agents,
                got: actions.len(),
            });
        }

        for (i, action) in actions.iter().enumerate() {
            if !self.vehicles[i].crashed {
                self.vehicles[i] =
                    apply_meta_action(&self.vehicles[i], *action, &self.road, &self.scenario);
            }
        }
        for i in self.n_agents..self.vehicles.len() {
            if !self.vehicles[i].crashed {
                self.hdv_consider_lane_change(i);
            }
        }

        for _ in 0..SIMULATION_SUBSTEPS {
            self.substep();
        }

        self.tick += 1;
        let crashed: Vec<bool> = self.agents().iter().map(|a| a.crashed).collect();
        let rewards: Vec<f64> = self
            .agents()
            .iter()
            .map(|a| reward(a, a.crashed, &self.road, &self.scenario, &self.reward_weights))
            .collect();
        let any_agent_crash = crashed.iter().any(|c| *c);
        self.terminated = any_agent_crash || self.tick >= self.scenario.duration_ticks();

        Ok(StepOutcome {
            global_reward: global_reward(&rewards),
            rewards,
            crashed,
            terminated: self.terminated,
            elapsed_ticks: self.tick,
        })
    }

    fn substep(&mut self) {
        let half_width = VEHICLE_WIDTH / 2.0;
        let y_max = self.road.width() - half_width;
        // Acceleration pass reads the whole fleet before anything moves.
        let accels: Vec<f64> = (0..self.vehicles.len())
            .map(|i| {
                let v = &self.vehicles[i];
                if v.crashed {
                    return 0.0;
                }
                if v.kind.is_agent() {
                    LONGITUDINAL_GAIN * (v.target_speed - v.vx)
                } else {
                    let preset = Self::preset_of(v.kind);
                    self.idm_toward(i, self.leader_in_lane(i, v.lane), &preset)
                }
            })
            .collect();

        for (i, accel) in accels.into_iter().enumerate() {
            let road = self.road;
            let v = &mut self.vehicles[i];
            if v.crashed {
                continue;
            }
            let lateral_error = road.lane_center(v.target_lane) - v.y;
            v.vy = (LATERAL_GAIN * lateral_error).clamp(-LATERAL_SPEED_LIMIT, LATERAL_SPEED_LIMIT);
            v.vx = (v.vx + accel * SUBSTEP_DT).max(0.0);
            v.x += v.vx * SUBSTEP_DT;
            v.y = (v.y + v.vy * SUBSTEP_DT).clamp(half_width, y_max);
            v.lane = road.lane_at(v.y);
        }

        // Pairwise footprint overlap; both parties crash on the same substep.
        let n = self.vehicles.len();
        for i in 0..n {
            if self.vehicles[i].crashed {
                continue;
            }
            for j in (i + 1)..n {
                if self.vehicles[j].crashed {
                    continue;
                }
                let dx = (self.vehicles[i].x - self.vehicles[j].x).abs();
                let dy = (self.vehicles[i].y - self.vehicles[j].y).abs();
                if dx < VEHICLE_LENGTH && dy < VEHICLE_WIDTH {
                    self.vehicles[i].crashed = true;
                    self.vehicles[j].crashed = true;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::DensityMode;

    fn sparse_world(seed: u64) -> World {
        init_scenario(RoadConfig::default(), ScenarioConfig::for_mode(DensityMode::Sparse, seed))
            .unwrap()
    }

    #[test]
    fn normal_mode_spawns_eighteen_vehicles() {
        let w = init_scenario(
            RoadConfig::default(),
            ScenarioConfig::for_mode(DensityMode::Normal, 7),
        )
        .unwrap();
        assert_eq!(w.vehicles().len(), 18);
        assert_eq!(w.n_agents(), 3);
        assert_eq!(
            w.vehicles().iter().filter(|v| v.kind.is_agent()).count(),
            3
        );
    }

    #[test]
    fn sparse_mode_counts() {
        let w = sparse_world(3);
        assert_eq!(w.n_agents(), 2);
        assert_eq!(w.vehicles().len(), 10);
    }

    #[test]
    fn same_seed_same_world() {
        let a = sparse_world(42);
        let b = sparse_world(42);
        assert_eq!(a.vehicles(), b.vehicles());
        let c = sparse_world(43);
        assert_ne!(a.vehicles(), c.vehicles());
    }

    #[test]
    fn no_initial_overlaps() {
        for seed in 0..20 {
            let w = init_scenario(
                RoadConfig::default(),
                ScenarioConfig::for_mode(DensityMode::Dense, seed),
            )
            .unwrap();
            for (i, a) in w.vehicles().iter().enumerate() {
                for b in &w.vehicles()[i + 1..] {
                    let overlap =
                        (a.x - b.x).abs() < VEHICLE_LENGTH && (a.y - b.y).abs() < VEHICLE_WIDTH;
                    assert!(!overlap, "seed {seed}: vehicles {} and {} overlap", a.id, b.id);
                }
            }
        }
    }

    #[test]
    fn infeasible_spacing_is_a_config_error() {
        let road = RoadConfig {
            road_length: 100.0,
            ..RoadConfig::default()
        };
        let err = init_scenario(road, ScenarioConfig::for_mode(DensityMode::Dense, 0));
        assert!(matches!(err, Err(SimError::InvalidScenario(_))));
    }

    #[test]
    fn meta_action_clamps() {
        let road = RoadConfig::default();
        let cfg = ScenarioConfig::for_mode(DensityMode::Sparse, 0);
        let mut v = VehicleState {
            id: 0,
            kind: VehicleKind::Agent,
            lane: 1,
            x: 0.0,
            y: road.lane_center(1),
            vx: 25.0,
            vy: 0.0,
            target_lane: 1,
            target_speed: 30.0,
            crashed: false,
        };
        assert_eq!(apply_meta_action(&v, MetaAction::LaneLeft, &road, &cfg).target_lane, 1);
        assert_eq!(apply_meta_action(&v, MetaAction::Faster, &road, &cfg).target_speed, 30.0);
        v.lane = 3;
        v.target_lane = 3;
        assert_eq!(apply_meta_action(&v, MetaAction::LaneRight, &road, &cfg).target_lane, 4);
        assert_eq!(apply_meta_action(&v, MetaAction::Slower, &road, &cfg).target_speed, 25.0);
        assert_eq!(apply_meta_action(&v, MetaAction::Idle, &road, &cfg), v);
    }

    #[test]
    fn free_flow_advances_positions_without_crashes() {
        let mut w = sparse_world(5);
        // Clear traffic interactions: push everyone onto distinct x far apart.
        for (i, v) in w.vehicles.iter_mut().enumerate() {
            v.x = i as f64 * 60.0;
            v.lane = 1 + (i as u32 % 6);
            v.y = w.road.lane_center(v.lane);
            v.target_lane = v.lane;
            v.vx = 25.0;
            v.target_speed = 25.0;
        }
        let before: Vec<f64> = w.vehicles().iter().map(|v| v.x).collect();
        let out = w
            .step(&[MetaAction::Idle, MetaAction::Idle])
            .unwrap();
        assert!(!out.terminated);
        assert!(out.crashed.iter().all(|c| !c));
        for (v, x0) in w.vehicles().iter().zip(before) {
            // One decision tick at steady 25 m/s.
            assert!((v.x - x0 - 25.0).abs() < 1e-9, "moved {}", v.x - x0);
        }
    }

    #[test]
    fn forced_overlap_crashes_both_and_terminates() {
        let mut w = sparse_world(5);
        w.vehicles[0].x = 100.0;
        w.vehicles[0].lane = 2;
        w.vehicles[0].y = w.road.lane_center(2);
        w.vehicles[0].target_lane = 2;
        w.vehicles[0].vx = 30.0;
        w.vehicles[0].target_speed = 30.0;
        w.vehicles[1].x = 104.0;
        w.vehicles[1].lane = 2;
        w.vehicles[1].y = w.road.lane_center(2);
        w.vehicles[1].target_lane = 2;
        w.vehicles[1].vx = 0.0;
        w.vehicles[1].target_speed = 20.0;
        // Keep everyone else far away.
        for v in w.vehicles.iter_mut().skip(2) {
            v.x += 5000.0;
        }
        let out = w.step(&[MetaAction::Idle, MetaAction::Idle]).unwrap();
        assert!(out.crashed[0] && out.crashed[1]);
        assert!(out.terminated);
        assert!(w.step(&[MetaAction::Idle, MetaAction::Idle]).is_err());
    }

    #[test]
    fn hdv_only_crash_does_not_terminate() {
        let mut w = sparse_world(5);
        // Agents isolated.
        w.vehicles[0].x = 5000.0;
        w.vehicles[1].x = 6000.0;
        // Two HDVs forced together in lane 4.
        for (k, idx) in [2usize, 3].iter().enumerate() {
            let v = &mut w.vehicles[*idx];
            v.lane = 4;
            v.y = w.road.lane_center(4);
            v.target_lane = 4;
            v.x = 200.0 + k as f64 * 4.0;
            v.vx = if k == 0 { 30.0 } else { 0.0 };
            v.target_speed = v.vx.max(20.0);
        }
        for v in w.vehicles.iter_mut().skip(4) {
            v.x += 9000.0;
        }
        let out = w.step(&[MetaAction::Idle, MetaAction::Idle]).unwrap();
        assert!(!out.terminated);
        assert!(w.vehicles[2].crashed && w.vehicles[3].crashed);
        assert!(!out.crashed[0] && !out.crashed[1]);
    }

    #[test]
    fn deterministic_step_stream() {
        let run = || {
            let mut w = sparse_world(11);
            let mut outcomes = Vec::new();
            let actions = [
                MetaAction::Faster,
                MetaAction::LaneRight,
                MetaAction::Idle,
                MetaAction::Slower,
                MetaAction::LaneLeft,
            ];
            for k in 0..20 {
                if w.terminated() {
                    break;
                }
                let a = actions[k % actions.len()];
                let b = actions[(k + 2) % actions.len()];
                outcomes.push(w.step(&[a, b]).unwrap());
            }
            (outcomes, w.vehicles().to_vec())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn idle_converges_to_target_speed() {
        let mut w = sparse_world(9);
        for (i, v) in w.vehicles.iter_mut().enumerate() {
            v.x = i as f64 * 500.0;
            v.vx = 20.0;
            v.target_speed = 28.0;
        }
        let mut prev_err = (28.0f64 - 20.0).abs();
        for _ in 0..8 {
            if w.terminated() {
                break;
            }
            w.step(&[MetaAction::Idle, MetaAction::Idle]).unwrap();
            let err = (28.0 - w.agents()[0].vx).abs();
            assert!(err <= prev_err + 1e-12);
            prev_err = err;
        }
        assert!(prev_err < 0.5);
    }

    #[test]
    fn lateral_positions_stay_on_road() {
        let mut w = sparse_world(13);
        for _ in 0..25 {
            if w.terminated() {
                break;
            }
            let _ = w.step(&[MetaAction::LaneLeft, MetaAction::LaneRight]).unwrap();
            for v in w.vehicles() {
                assert!(v.y >= 0.0 && v.y <= w.road.width(), "y = {}", v.y);
                assert!(v.lane >= 1 && v.lane <= w.road.lane_count);
            }
        }
    }
}
