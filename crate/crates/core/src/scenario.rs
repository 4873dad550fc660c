//! Worlds the planner runs in: a square map, a time horizon, and disc
//! obstacles that move in a straight line from a start position at t = 0 to an
//! end position at t = horizon, linearly interpolated in between.
//!
//! Scenarios serialize to a small TOML document so generated worlds are
//! diffable and replayable independent of the generator seed. The exact schema
//! is documented in the repository README.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

/// Default obstacle disc radius in map units.
pub const DEFAULT_OBSTACLE_RADIUS: f64 = 3.0;
/// Default arrival tolerance around the goal, in map units.
pub const DEFAULT_GOAL_RADIUS: f64 = 2.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("scenario encode error: {0}")]
    Encode(#[from] toml::ser::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A position in the search space: map coordinates plus a continuous time
/// coordinate measured in timesteps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: f64, y: f64, t: f64) -> Self {
        SpaceTimePoint { x, y, t }
    }

    /// Euclidean distance ignoring the time coordinate.
    pub fn dist2d(&self, other: &SpaceTimePoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// One moving disc: endpoints of its straight-line sweep plus its radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleTrack {
    pub start_pos: [f64; 2],
    pub end_pos: [f64; 2],
    pub radius: f64,
}

impl ObstacleTrack {
    /// Center position at time `t`, linearly interpolated over `[0, horizon]`.
    pub fn position_at(&self, t: f64, horizon: f64) -> Result<(f64, f64), ScenarioError> {
        if !(0.0..=horizon).contains(&t) {
            return Err(ScenarioError::TimeOutOfRange { t, horizon });
        }
        Ok(self.lerp_at(t, horizon))
    }

    pub(crate) fn lerp_at(&self, t: f64, horizon: f64) -> (f64, f64) {
        let f = t / horizon;
        (
            self.start_pos[0] + f * (self.end_pos[0] - self.start_pos[0]),
            self.start_pos[1] + f * (self.end_pos[1] - self.start_pos[1]),
        )
    }
}

/// A complete planning problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Side length of the square map, in map units.
    pub edge_length: f64,
    /// Number of timesteps; time runs continuously over `[0, timesteps]`.
    pub timesteps: u32,
    pub start: [f64; 2],
    pub goal: [f64; 2],
    pub goal_radius: f64,
    #[serde(default)]
    pub obstacles: Vec<ObstacleTrack>,
}

impl Scenario {
    pub fn horizon(&self) -> f64 {
        self.timesteps as f64
    }

    pub fn contains(&self, p: SpaceTimePoint) -> bool {
        (0.0..=self.edge_length).contains(&p.x)
            && (0.0..=self.edge_length).contains(&p.y)
            && (0.0..=self.horizon()).contains(&p.t)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let l = self.edge_length;
        if !(l.is_finite() && l > 0.0) {
            return Err(ScenarioError::Invalid(format!(
                "edge_length must be positive, got {l}"
            )));
        }
        if self.timesteps < 1 {
            return Err(ScenarioError::Invalid(
                "timesteps must be at least 1".into(),
            ));
        }
        if !(self.goal_radius.is_finite() && self.goal_radius > 0.0) {
            return Err(ScenarioError::Invalid(format!(
                "goal_radius must be positive, got {}",
                self.goal_radius
            )));
        }
        let in_square = |p: [f64; 2]| (0.0..=l).contains(&p[0]) && (0.0..=l).contains(&p[1]);
        if !in_square(self.start) {
            return Err(ScenarioError::Invalid(format!(
                "start {:?} outside the map",
                self.start
            )));
        }
        if !in_square(self.goal) {
            return Err(ScenarioError::Invalid(format!(
                "goal {:?} outside the map",
                self.goal
            )));
        }
        for (i, ob) in self.obstacles.iter().enumerate() {
            if !(ob.radius.is_finite() && ob.radius > 0.0) {
                return Err(ScenarioError::Invalid(format!(
                    "obstacle {i}: radius must be positive, got {}",
                    ob.radius
                )));
            }
            if !in_square(ob.start_pos) || !in_square(ob.end_pos) {
                return Err(ScenarioError::Invalid(format!(
                    "obstacle {i}: track endpoints must lie inside the map"
                )));
            }
        }
        Ok(())
    }
}

/// Generates a synthetic problem: start at the origin, goal at the far
/// corner, obstacle track endpoints drawn uniformly over the map. The same
/// arguments always produce the same scenario.
pub fn generate_synthetic(
    edge_length: f64,
    timesteps: u32,
    n_obstacles: u32,
    seed: u64,
) -> Result<Scenario, ScenarioError> {
    generate_synthetic_with(
        edge_length,
        timesteps,
        n_obstacles,
        seed,
        DEFAULT_OBSTACLE_RADIUS,
        DEFAULT_GOAL_RADIUS,
    )
}

/// [`generate_synthetic`] with explicit obstacle and goal radii.
pub fn generate_synthetic_with(
    edge_length: f64,
    timesteps: u32,
    n_obstacles: u32,
    seed: u64,
    obstacle_radius: f64,
    goal_radius: f64,
) -> Result<Scenario, ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obstacles = Vec::with_capacity(n_obstacles as usize);
    for _ in 0..n_obstacles {
        let start_pos = [
            rng.gen_range(0.0..=edge_length),
            rng.gen_range(0.0..=edge_length),
        ];
        let end_pos = [
            rng.gen_range(0.0..=edge_length),
            rng.gen_range(0.0..=edge_length),
        ];
        obstacles.push(ObstacleTrack {
            start_pos,
            end_pos,
            radius: obstacle_radius,
        });
    }
    let scenario = Scenario {
        edge_length,
        timesteps,
        start: [0.0, 0.0],
        goal: [edge_length, edge_length],
        goal_radius,
        obstacles,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Writes a scenario as TOML. Loading the output restores it field for field.
pub fn save_scenario<W: Write>(s: &Scenario, mut sink: W) -> Result<(), ScenarioError> {
    s.validate()?;
    let text = toml::to_string(s)?;
    sink.write_all(text.as_bytes())?;
    Ok(())
}

/// Parses and validates a scenario written by [`save_scenario`].
pub fn load_scenario<R: Read>(mut source: R) -> Result<Scenario, ScenarioError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let s: Scenario = toml::from_str(&text)?;
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn track(sx: f64, sy: f64, ex: f64, ey: f64) -> ObstacleTrack {
        ObstacleTrack {
            start_pos: [sx, sy],
            end_pos: [ex, ey],
            radius: 1.0,
        }
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let tr = track(0.0, 0.0, 10.0, 10.0);
        assert_eq!(tr.position_at(10.0, 20.0).unwrap(), (5.0, 5.0));
        assert_eq!(tr.position_at(0.0, 20.0).unwrap(), (0.0, 0.0));
        assert_eq!(tr.position_at(20.0, 20.0).unwrap(), (10.0, 10.0));
    }

    #[test]
    fn interpolation_rejects_out_of_range_time() {
        let tr = track(0.0, 0.0, 10.0, 10.0);
        assert!(matches!(
            tr.position_at(-0.5, 20.0),
            Err(ScenarioError::TimeOutOfRange { .. })
        ));
        assert!(tr.position_at(20.5, 20.0).is_err());
    }

    #[test]
    fn generate_places_endpoints_inside_map() {
        let s = generate_synthetic(100.0, 20, 5, 7).unwrap();
        assert_eq!(s.obstacles.len(), 5);
        assert_eq!(s.start, [0.0, 0.0]);
        assert_eq!(s.goal, [100.0, 100.0]);
        for ob in &s.obstacles {
            for p in [ob.start_pos, ob.end_pos] {
                assert!(p[0] >= 0.0 && p[0] <= 100.0);
                assert!(p[1] >= 0.0 && p[1] <= 100.0);
            }
        }
    }

    #[test]
    fn generate_is_deterministic() {
        let a = generate_synthetic(100.0, 20, 5, 7).unwrap();
        let b = generate_synthetic(100.0, 20, 5, 7).unwrap();
        assert_eq!(a, b);
        let ta = toml::to_string(&a).unwrap();
        let tb = toml::to_string(&b).unwrap();
        assert_eq!(ta, tb);
        let c = generate_synthetic(100.0, 20, 5, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generate_supports_empty_maps() {
        let s = generate_synthetic(100.0, 20, 0, 42).unwrap();
        assert!(s.obstacles.is_empty());
        assert!(s.validate().is_ok());
    }

    #[test]
    fn save_load_roundtrip() {
        let s = generate_synthetic(37.5, 12, 4, 99).unwrap();
        let mut buf = Vec::new();
        save_scenario(&s, &mut buf).unwrap();
        let back = load_scenario(buf.as_slice()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn load_reports_missing_field() {
        let text =
            "edge_length = 10.0\nstart = [0.0, 0.0]\ngoal = [10.0, 10.0]\ngoal_radius = 1.0\n";
        let err = load_scenario(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("timesteps"), "got: {err}");
    }

    #[test]
    fn load_rejects_negative_radius() {
        let text = "edge_length = 10.0\ntimesteps = 5\nstart = [0.0, 0.0]\ngoal = [10.0, 10.0]\ngoal_radius = 1.0\n\n[[obstacles]]\nstart_pos = [1.0, 1.0]\nend_pos = [2.0, 2.0]\nradius = -3.0\n";
        let err = load_scenario(text.as_bytes()).unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid(_)), "got: {err}");
    }

    proptest! {
        #[test]
        fn interpolated_positions_stay_in_the_endpoint_box(
            sx in 0.0..50.0, sy in 0.0..50.0,
            ex in 0.0..50.0, ey in 0.0..50.0,
            frac in 0.0..=1.0,
        ) {
            let horizon = 20.0;
            let tr = track(sx, sy, ex, ey);
            let (px, py) = tr.position_at(frac * horizon, horizon).unwrap();
            prop_assert!(px >= sx.min(ex) - 1e-9 && px <= sx.max(ex) + 1e-9);
            prop_assert!(py >= sy.min(ey) - 1e-9 && py <= sy.max(ey) + 1e-9);
        }
    }
}
