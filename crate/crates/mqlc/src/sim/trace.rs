//! Per-tick vehicle trace rows for CSV logs.

use super::vehicle::VehicleState;
use super::world::World;

/// One `(tick, vehicle)` log entry.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub tick: u32,
    pub id: u32,
    pub kind: &'static str,
    pub lane: u32,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub crashed: bool,
}

pub fn trace_header() -> &'static str {
    "tick,id,kind,lane,x,y,vx,crashed"
}

impl TraceRow {
    pub fn from_vehicle(tick: u32, v: &VehicleState) -> Self {
        TraceRow {
            tick,
            id: v.id,
            kind: v.kind.name(),
            lane: v.lane,
            x: v.x,
            y: v.y,
            vx: v.vx,
            crashed: v.crashed,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.tick, self.id, self.kind, self.lane, self.x, self.y, self.vx, self.crashed
        )
    }
}

/// Rows for every vehicle in the world at its current tick.
pub fn snapshot_rows(world: &World) -> Vec<TraceRow> {
    world
        .vehicles()
        .iter()
        .map(|v| TraceRow::from_vehicle(world.tick(), v))
        .collect()
}
