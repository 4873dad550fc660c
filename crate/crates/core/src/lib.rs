//! Space-time RRT planning on square 2D maps with moving disc obstacles.
//!
//! The planner treats time as a third search dimension, so a 2D problem with
//! dynamic obstacles becomes a 3D problem with one extra rule: time only moves
//! forward along any branch of the tree. Three planner variants share the same
//! loop:
//!
//! * `baseline` — exact kd-tree nearest neighbor and exact segment collision
//!   checks on every iteration.
//! * `sw-morton` — a bounded associative memo store keyed by masked Morton
//!   codes answers nearest-neighbor and collision queries first; exact search
//!   runs only on a miss. Store operations are charged software costs.
//! * `hw-morton` — identical store behavior, but each store operation is
//!   charged as a single instruction with a fixed lookup latency, modeling a
//!   content-addressable memory next to the core.
//!
//! [`bench`] runs the paired cross-configuration suite and emits CSV; the
//! `mortonrrt` binary exposes everything as `gen` / `plan` / `bench` /
//! `profile` subcommands.

pub mod bench;
pub mod collision;
pub mod cost;
pub mod memostore;
pub mod morton;
pub mod planner;
pub mod scenario;
pub mod spatial;

pub use collision::{path_length, validate_path, CollisionState};
pub use cost::{CostModel, OpCounters};
pub use memostore::{MortonStore, StoreBackend, StoreConfig, StoreEntry};
pub use morton::{MortonKey, QuantConfig};
pub use planner::{plan, PlanResult, PlanStats, PlannerConfig, Variant};
pub use scenario::{
    generate_synthetic, generate_synthetic_with, load_scenario, save_scenario, ObstacleTrack,
    Scenario, SpaceTimePoint,
};
pub use spatial::{DistMetric, KdIndex, NodeRef};
