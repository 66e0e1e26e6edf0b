//! Scripted human-driver behavior: intelligent-driver car following plus
//! incentive-based lane changes, with conservative and aggressive presets.

use super::vehicle::VehicleState;
use super::VEHICLE_LENGTH;

/// Braking applied when the bumper gap has collapsed below the minimum.
pub const EMERGENCY_BRAKE: f64 = 9.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BehaviorPreset {
    /// Desired time headway, seconds.
    pub desired_headway: f64,
    /// Multiplier on the vehicle's own target speed.
    pub desired_speed_factor: f64,
    /// Maximum acceleration, m/s^2.
    pub max_accel: f64,
    /// Comfortable deceleration, m/s^2.
    pub comfortable_decel: f64,
    /// Standstill minimum bumper gap, meters.
    pub min_gap: f64,
    /// Lane-change politeness toward followers.
    pub politeness: f64,
    /// Incentive threshold for changing lanes, m/s^2.
    pub change_threshold: f64,
    /// Maximum braking a lane change may impose, m/s^2.
    pub safe_braking: f64,
}

impl BehaviorPreset {
    pub fn conservative() -> Self {
        BehaviorPreset {
            desired_headway: 1.5,
            desired_speed_factor: 1.0,
            max_accel: 3.0,
            comfortable_decel: 2.0,
            min_gap: 2.0,
            politeness: 0.3,
            change_threshold: 0.2,
            safe_braking: 4.0,
        }
    }

    pub fn aggressive() -> Self {
        BehaviorPreset {
            desired_headway: 1.0,
            desired_speed_factor: 1.1,
            max_accel: 4.0,
            ..Self::conservative()
        }
    }
}

/// Intelligent-driver acceleration toward the preset's desired speed,
/// braking for the leader when one is ahead in the same lane.
pub fn idm_acceleration(
    ego: &VehicleState,
    leader: Option<&VehicleState>,
    preset: &BehaviorPreset,
) -> f64 {
    let desired_speed = (ego.target_speed * preset.desired_speed_factor).max(0.1);
    let free = 1.0 - (ego.vx / desired_speed).powi(4);
    let interaction = match leader {
        None => 0.0,
        Some(lead) => {
            let gap = lead.x - ego.x - VEHICLE_LENGTH;
            if gap <= preset.min_gap {
                return -EMERGENCY_BRAKE;
            }
            let closing = ego.vx - lead.vx;
            let dynamic = ego.vx * preset.desired_headway
                + ego.vx * closing / (2.0 * (preset.max_accel * preset.comfortable_decel).sqrt());
            let desired_gap = preset.min_gap + dynamic.max(0.0);
            (desired_gap / gap).powi(2)
        }
    };
    (preset.max_accel * (free - interaction)).clamp(-EMERGENCY_BRAKE, preset.max_accel)
}

/// Net gain (own acceleration improvement plus politeness-weighted follower
/// terms) required for the incentive criterion, evaluated by the caller.
pub struct LaneChangeTerms {
    pub ego_gain: f64,
    pub follower_terms: f64,
    pub new_follower_accel: f64,
    pub ego_new_accel: f64,
}

impl LaneChangeTerms {
    pub fn accepts(&self, preset: &BehaviorPreset) -> bool {
        self.new_follower_accel >= -preset.safe_braking
            && self.ego_new_accel >= -preset.safe_braking
            && self.ego_gain + preset.politeness * self.follower_terms > preset.change_threshold
    }

    pub fn incentive(&self, preset: &BehaviorPreset) -> f64 {
        self.ego_gain + preset.politeness * self.follower_terms
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::VehicleKind;
    use approx::assert_abs_diff_eq;

    fn vehicle(x: f64, vx: f64, target_speed: f64) -> VehicleState {
        VehicleState {
            id: 0,
            kind: VehicleKind::HdvConservative,
            lane: 3,
            x,
            y: 10.0,
            vx,
            vy: 0.0,
            target_lane: 3,
            target_speed,
            crashed: false,
        }
    }

    #[test]
    fn equilibrium_without_leader() {
        let ego = vehicle(0.0, 25.0, 25.0);
        let a = idm_acceleration(&ego, None, &BehaviorPreset::conservative());
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn free_acceleration_below_desired_speed() {
        let ego = vehicle(0.0, 20.0, 30.0);
        let a = idm_acceleration(&ego, None, &BehaviorPreset::conservative());
        assert!(a > 0.0);
        // Closed form: a_max * (1 - (v/v0)^4)
        assert_abs_diff_eq!(a, 3.0 * (1.0 - (20.0f64 / 30.0).powi(4)), epsilon = 1e-12);
    }

    #[test]
    fn stationary_leader_at_small_gap_forces_strong_braking() {
        let preset = BehaviorPreset::conservative();
        let ego = vehicle(0.0, 25.0, 25.0);
        let lead = vehicle(20.0, 0.0, 25.0);
        let a = idm_acceleration(&ego, Some(&lead), &preset);
        assert!(a <= -preset.comfortable_decel, "got {a}");

        // Closed form at gap = 15 m: a_max * (1 - (v/v0)^4 - (s*/s)^2).
        let gap = 20.0 - VEHICLE_LENGTH;
        let dynamic = 25.0 * 1.5 + 25.0 * 25.0 / (2.0 * (3.0f64 * 2.0).sqrt());
        let s_star = 2.0 + dynamic;
        let expect = (3.0 * (1.0 - 1.0 - (s_star / gap).powi(2))).max(-EMERGENCY_BRAKE);
        assert_abs_diff_eq!(a, expect, epsilon = 1e-12);
    }

    #[test]
    fn aggressive_accelerates_at_least_as_hard() {
        // Typical following situations: moderate gaps, speeds in range.
        let cases = [
            (30.0, 22.0, 25.0, 24.0),
            (50.0, 25.0, 25.0, 20.0),
            (80.0, 20.0, 28.0, 28.0),
            (15.0, 24.0, 26.0, 26.0),
        ];
        for (lead_x, v_ego, v0, v_lead) in cases {
            let ego = vehicle(0.0, v_ego, v0);
            let lead = vehicle(lead_x, v_lead, v_lead);
            let a_con = idm_acceleration(&ego, Some(&lead), &BehaviorPreset::conservative());
            let a_agg = idm_acceleration(&ego, Some(&lead), &BehaviorPreset::aggressive());
            assert!(a_agg >= a_con - 1e-12, "lead_x={lead_x}: {a_agg} < {a_con}");
        }
    }

    #[test]
    fn overlap_gap_emergency_brakes() {
        let ego = vehicle(0.0, 25.0, 25.0);
        let lead = vehicle(6.0, 25.0, 25.0);
        let a = idm_acceleration(&ego, Some(&lead), &BehaviorPreset::conservative());
        assert_eq!(a, -EMERGENCY_BRAKE);
    }
}
