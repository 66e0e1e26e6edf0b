//! Road geometry and scenario configuration, plus the key-value scenario
//! file format.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::SimError;

/// Straight multi-lane road. Lanes are numbered 1 (leftmost) to
/// `lane_count` (rightmost); lateral position 0 is the left road edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoadConfig {
    pub lane_count: u32,
    pub road_length: f64,
    pub lane_width: f64,
}

impl Default for RoadConfig {
    fn default() -> Self {
        RoadConfig {
            lane_count: 6,
            road_length: 1000.0,
            lane_width: 4.0,
        }
    }
}

impl RoadConfig {
    pub fn width(&self) -> f64 {
        f64::from(self.lane_count) * self.lane_width
    }

    /// Lateral center of a lane.
    pub fn lane_center(&self, lane: u32) -> f64 {
        (f64::from(lane) - 0.5) * self.lane_width
    }

    /// Lane whose band contains lateral position `y`.
    pub fn lane_at(&self, y: f64) -> u32 {
        let lane = (y / self.lane_width).floor() as i64 + 1;
        lane.clamp(1, i64::from(self.lane_count)) as u32
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.lane_count < 2 {
            return Err(SimError::InvalidScenario(format!(
                "lane_count must be at least 2, got {}",
                self.lane_count
            )));
        }
        if self.road_length <= 0.0 || self.lane_width <= 0.0 {
            return Err(SimError::InvalidScenario(
                "road_length and lane_width must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityMode {
    Sparse,
    Normal,
    Dense,
}

impl DensityMode {
    /// (agents, human-driven vehicles) for the named density modes.
    pub fn counts(self) -> (usize, usize) {
        match self {
            DensityMode::Sparse => (2, 8),
            DensityMode::Normal => (3, 15),
            DensityMode::Dense => (5, 30),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DensityMode::Sparse => "sparse",
            DensityMode::Normal => "normal",
            DensityMode::Dense => "dense",
        }
    }
}

impl FromStr for DensityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sparse" => Ok(DensityMode::Sparse),
            "normal" => Ok(DensityMode::Normal),
            "dense" => Ok(DensityMode::Dense),
            other => Err(format!("unknown density mode {other:?}")),
        }
    }
}

impl fmt::Display for DensityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One episode setup: traffic density, behavior mix, duration, speed range
/// and the seed that fixes spawn randomness.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub density_mode: DensityMode,
    pub n_agents: usize,
    pub n_hdv: usize,
    pub aggressive_fraction: f64,
    /// Episode duration in seconds (= decision ticks at 1 Hz).
    pub duration: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn for_mode(mode: DensityMode, seed: u64) -> Self {
        let (n_agents, n_hdv) = mode.counts();
        ScenarioConfig {
            density_mode: mode,
            n_agents,
            n_hdv,
            aggressive_fraction: 0.2,
            duration: 40.0,
            v_min: 20.0,
            v_max: 30.0,
            seed,
        }
    }

    pub fn duration_ticks(&self) -> u32 {
        self.duration.round().max(1.0) as u32
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let expected = self.density_mode.counts();
        if (self.n_agents, self.n_hdv) != expected {
            return Err(SimError::InvalidScenario(format!(
                "{} mode requires {} agents and {} HDVs, got ({}, {})",
                self.density_mode, expected.0, expected.1, self.n_agents, self.n_hdv
            )));
        }
        if self.duration <= 0.0 {
            return Err(SimError::InvalidScenario("duration must be positive".into()));
        }
        if self.v_min >= self.v_max {
            return Err(SimError::InvalidScenario(format!(
                "v_min {} must be below v_max {}",
                self.v_min, self.v_max
            )));
        }
        if !(0.0..=1.0).contains(&self.aggressive_fraction) {
            return Err(SimError::InvalidScenario(
                "aggressive_fraction must be in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Key-value serialization mirroring the field names.
    pub fn to_key_values(&self) -> String {
        format!(
            "density_mode = {}\n\
             n_agents = {}\n\
             n_hdv = {}\n\
             aggressive_fraction = {}\n\
             duration = {}\n\
             v_min = {}\n\
             v_max = {}\n\
             seed = {}\n",
            self.density_mode,
            self.n_agents,
            self.n_hdv,
            self.aggressive_fraction,
            self.duration,
            self.v_min,
            self.v_max,
            self.seed
        )
    }

    pub fn from_key_values(text: &str) -> Result<Self, SimError> {
        // Defaults come from the density mode, so parse it first.
        let mut mode = None;
        for (lineno, key, value) in key_value_lines(text)? {
            if key == "density_mode" {
                mode = Some(DensityMode::from_str(&value).map_err(|message| {
                    SimError::ScenarioFile { line: lineno, message }
                })?);
            }
        }
        let mode = mode.ok_or_else(|| SimError::ScenarioFile {
            line: 0,
            message: "missing density_mode".into(),
        })?;
        let mut cfg = ScenarioConfig::for_mode(mode, 0);
        for (lineno, key, value) in key_value_lines(text)? {
            let bad = |message: String| SimError::ScenarioFile { line: lineno, message };
            match key.as_str() {
                "density_mode" => {}
                "n_agents" => cfg.n_agents = value.parse().map_err(|_| bad(format!("bad n_agents {value:?}")))?,
                "n_hdv" => cfg.n_hdv = value.parse().map_err(|_| bad(format!("bad n_hdv {value:?}")))?,
                "aggressive_fraction" => {
                    cfg.aggressive_fraction =
                        value.parse().map_err(|_| bad(format!("bad aggressive_fraction {value:?}")))?
                }
                "duration" => cfg.duration = value.parse().map_err(|_| bad(format!("bad duration {value:?}")))?,
                "v_min" => cfg.v_min = value.parse().map_err(|_| bad(format!("bad v_min {value:?}")))?,
                "v_max" => cfg.v_max = value.parse().map_err(|_| bad(format!("bad v_max {value:?}")))?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad(format!("bad seed {value:?}")))?,
                other => return Err(bad(format!("unknown scenario key {other:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        Self::from_key_values(&std::fs::read_to_string(path)?)
    }
}

/// `key = value` lines; blank lines and `#` comments are skipped.
pub(crate) fn key_value_lines(text: &str) -> Result<Vec<(usize, String, String)>, SimError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(SimError::ScenarioFile {
                line: i + 1,
                message: format!("expected `key = value`, got {raw:?}"),
            });
        };
        out.push((i + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}
