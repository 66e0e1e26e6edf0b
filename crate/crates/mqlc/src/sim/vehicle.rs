#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VehicleKind {
    Agent,
    HdvConservative,
    HdvAggressive,
}

impl VehicleKind {
    pub fn is_agent(self) -> bool {
        matches!(self, VehicleKind::Agent)
    }

    pub fn name(self) -> &'static str {
        match self {
            VehicleKind::Agent => "agent",
            VehicleKind::HdvConservative => "hdv_conservative",
            VehicleKind::HdvAggressive => "hdv_aggressive",
        }
    }
}

/// Pose, speed, control targets and crash flag of one vehicle. `crashed`
/// is absorbing within an episode.
#[derive(Clone, Debug, PartialEq)]
pub struct VehicleState {
    pub id: u32,
    pub kind: VehicleKind,
    /// Current lane, derived from the lateral position each substep.
    pub lane: u32,
    /// Longitudinal position, meters.
    pub x: f64,
    /// Lateral position from the left road edge, meters.
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub target_lane: u32,
    pub target_speed: f64,
    pub crashed: bool,
}

impl VehicleState {
    /// Euclidean distance between vehicle centers.
    pub fn distance_to(&self, other: &VehicleState) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}
