//! Space-time RRT with optional Morton-store memoization.
//!
//! Each iteration draws a random point, finds a tree node strictly earlier in
//! time to extend from, steers one step toward the sample, resolves the new
//! edge's collision state, and grows the tree when the edge is clear. The
//! memoized variants consult the Morton store before each exact
//! nearest-neighbor search and before each exact collision check, and record
//! every steered node back into the store.
//!
//! Memoized collision answers are approximate (a whole cell shares one
//! verdict), so a finished candidate path is re-checked edge by edge with
//! exact segment tests before it is accepted; a failing edge disqualifies all
//! paths through it and the search continues. Edges that were already
//! resolved by an exact check are not re-checked.

use crate::collision::{
    point_collides_counting, segment_collides_counting, CollisionError, CollisionState,
};
use crate::cost::{CostModel, OpCounters};
use crate::memostore::{MortonStore, StoreBackend, StoreConfig, StoreCounters, StoreError};
use crate::morton::MortonError;
use crate::scenario::{Scenario, ScenarioError, SpaceTimePoint};
use crate::spatial::{DistMetric, KdIndex, NodeRef};
use std::collections::HashSet;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("invalid planner config: {0}")]
    InvalidConfig(String),
    #[error("steer target must advance time")]
    NonMonotonicSteer,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Morton(#[from] MortonError),
    #[error(transparent)]
    Collision(#[from] CollisionError),
}

/// Which planner runs: the exact baseline or one of the memoized variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Baseline,
    SwMorton,
    HwMorton,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Baseline, Variant::SwMorton, Variant::HwMorton];

    pub fn uses_store(self) -> bool {
        !matches!(self, Variant::Baseline)
    }

    pub fn backend(self) -> Option<StoreBackend> {
        match self {
            Variant::Baseline => None,
            Variant::SwMorton => Some(StoreBackend::Software),
            Variant::HwMorton => Some(StoreBackend::Hardware),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::SwMorton => "sw-morton",
            Variant::HwMorton => "hw-morton",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Variant::Baseline),
            "sw-morton" => Ok(Variant::SwMorton),
            "hw-morton" => Ok(Variant::HwMorton),
            other => Err(format!(
                "unknown variant '{other}' (expected baseline, sw-morton, or hw-morton)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerConfig {
    pub variant: Variant,
    /// Maximum weighted 3D length of one tree edge, map units.
    pub step: f64,
    /// Weight of the time axis in the distance metric.
    pub time_weight: f64,
    /// Sample spacing for exact segment collision checks.
    pub collision_spacing: f64,
    pub max_iters: u64,
    pub seed: u64,
    pub store: StoreConfig,
    /// Probability of sampling the goal column instead of a uniform point.
    pub goal_bias: f64,
}

impl PlannerConfig {
    pub fn new(variant: Variant, seed: u64) -> Self {
        let mut store = StoreConfig::default();
        if let Some(backend) = variant.backend() {
            store.backend = backend;
        }
        PlannerConfig {
            variant,
            step: 1.0,
            time_weight: 1.0,
            collision_spacing: crate::collision::DEFAULT_COLLISION_SPACING,
            max_iters: 1_000_000,
            seed,
            store,
            goal_bias: 0.05,
        }
    }

    pub fn validate(&self, s: &Scenario) -> Result<(), PlanError> {
        s.validate()?;
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(PlanError::InvalidConfig(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(0.0..1.0).contains(&self.goal_bias) {
            return Err(PlanError::InvalidConfig(format!(
                "goal_bias must be in [0, 1), got {}",
                self.goal_bias
            )));
        }
        if !(self.time_weight.is_finite() && self.time_weight >= 0.0) {
            return Err(PlanError::InvalidConfig(format!(
                "time_weight must be non-negative, got {}",
                self.time_weight
            )));
        }
        if !(self.collision_spacing.is_finite() && self.collision_spacing > 0.0) {
            return Err(PlanError::InvalidConfig(format!(
                "collision_spacing must be positive, got {}",
                self.collision_spacing
            )));
        }
        if self.variant.uses_store() {
            self.store.validate()?;
            if Some(self.store.backend) != self.variant.backend() {
                return Err(PlanError::InvalidConfig(format!(
                    "variant {} does not match store backend {:?}",
                    self.variant, self.store.backend
                )));
            }
            self.store
                .quant
                .check_extent(s.edge_length.max(s.horizon()))?;
        }
        Ok(())
    }
}

/// Arena of steered nodes with parent links. Every steered point gets a slot
/// whether or not its edge was clear; only clear nodes also enter the
/// kd-index, so parent chains always resolve.
#[derive(Default)]
pub struct Tree {
    points: Vec<SpaceTimePoint>,
    parents: Vec<Option<NodeRef>>,
}

impl Tree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, point: SpaceTimePoint, parent: Option<NodeRef>) -> NodeRef {
        let r = NodeRef::new(self.points.len() as u32);
        self.points.push(point);
        self.parents.push(parent);
        r
    }

    pub fn point(&self, r: NodeRef) -> SpaceTimePoint {
        self.points[r.index()]
    }

    pub fn parent(&self, r: NodeRef) -> Option<NodeRef> {
        self.parents[r.index()]
    }

    /// Re-parents `r`. The new parent must be strictly earlier in time,
    /// which also rules out cycles (descendants of `r` are strictly later).
    pub fn set_parent(&mut self, r: NodeRef, parent: NodeRef) {
        debug_assert!(self.point(parent).t < self.point(r).t);
        self.parents[r.index()] = Some(parent);
    }

    /// Handles from the root down to `goal`, inclusive.
    pub fn chain(&self, goal: NodeRef) -> Vec<NodeRef> {
        let mut refs = vec![goal];
        let mut cur = goal;
        while let Some(p) = self.parent(cur) {
            refs.push(p);
            cur = p;
        }
        refs.reverse();
        refs
    }

    /// Root-to-goal point sequence; t is strictly increasing by construction.
    pub fn extract_path(&self, goal: NodeRef) -> Vec<SpaceTimePoint> {
        self.chain(goal)
            .into_iter()
            .map(|r| self.point(r))
            .collect()
    }
}

/// Everything measured about one planner run.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanStats {
    pub iterations: u64,
    /// Iterations that produced a steered node (and hence reached the
    /// collision stage).
    pub extensions: u64,
    /// Tree node count, root included.
    pub nodes: u64,
    pub obstacle_count: usize,
    /// Fraction of extensions that fell through to an exact collision check.
    pub alpha: f64,
    /// Fraction of iterations that fell through to an exact NN query.
    pub beta: f64,
    pub nn_store_hits: u64,
    pub col_store_hits: u64,
    pub col_store_no_collision_hits: u64,
    pub counters: OpCounters,
    /// Raw store-side instrumentation, including miss causes.
    pub store_counters: StoreCounters,
    pub modeled_ops: u64,
    pub modeled_store_ops: u64,
    pub modeled_cycles: f64,
    pub wall_time_s: f64,
    pub path_len: Option<f64>,
}

/// Outcome of [`plan`]: the validated path when the goal was reached, plus
/// statistics either way.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanResult {
    pub path: Option<Vec<SpaceTimePoint>>,
    pub stats: PlanStats,
}

impl PlanResult {
    pub fn reached(&self) -> bool {
        self.path.is_some()
    }
}

/// Draws the next sample: with probability `goal_bias` the goal position at a
/// uniform time, otherwise a uniform point in the map volume.
pub fn sample<R: rand::Rng>(rng: &mut R, s: &Scenario, goal_bias: f64) -> SpaceTimePoint {
    let horizon = s.horizon();
    let coin: f64 = rng.gen();
    if coin < goal_bias {
        SpaceTimePoint::new(s.goal[0], s.goal[1], rng.gen_range(0.0..=horizon))
    } else {
        SpaceTimePoint::new(
            rng.gen_range(0.0..=s.edge_length),
            rng.gen_range(0.0..=s.edge_length),
            rng.gen_range(0.0..=horizon),
        )
    }
}

/// Moves from `from` toward `toward` by at most `step` in the weighted
/// metric. Returns `toward` itself when it is within reach. The result stays
/// on the segment, so it stays inside any bounds both endpoints satisfy.
pub fn steer(
    from: SpaceTimePoint,
    toward: SpaceTimePoint,
    step: f64,
    time_weight: f64,
) -> Result<SpaceTimePoint, PlanError> {
    if toward.t <= from.t {
        return Err(PlanError::NonMonotonicSteer);
    }
    let metric = DistMetric::new(time_weight);
    let dist = metric.dist(from, toward);
    if dist <= step {
        return Ok(toward);
    }
    let f = step / dist;
    Ok(SpaceTimePoint::new(
        from.x + f * (toward.x - from.x),
        from.y + f * (toward.y - from.y),
        from.t + f * (toward.t - from.t),
    ))
}

/// Runs the planner. Errors only on invalid input; exhausting `max_iters`
/// yields a result with no path and full statistics.
pub fn plan(s: &Scenario, cfg: &PlannerConfig, cost: &CostModel) -> Result<PlanResult, PlanError> {
    cfg.validate(s)?;
    let started = Instant::now();

    let mut rng: rand_chacha::ChaCha8Rng = rand::SeedableRng::seed_from_u64(cfg.seed);
    let metric = DistMetric::new(cfg.time_weight);
    let mut counters = OpCounters::default();
    let mut tree = Tree::new();
    let mut kd = KdIndex::new();
    let mut store = match cfg.variant.uses_store() {
        true => Some(MortonStore::new(cfg.store)?),
        false => None,
    };

    let start_point = SpaceTimePoint::new(s.start[0], s.start[1], 0.0);
    let goal_radius2 = s.goal_radius * s.goal_radius;
    let in_goal = |p: SpaceTimePoint| {
        let dx = p.x - s.goal[0];
        let dy = p.y - s.goal[1];
        dx * dx + dy * dy <= goal_radius2
    };

    let mut iterations = 0u64;
    let mut extensions = 0u64;
    let mut nn_memo_hits = 0u64;
    let mut goal_node: Option<NodeRef> = None;
    // Children of edges an exact check has already resolved.
    let mut verified: HashSet<NodeRef> = HashSet::new();
    // Nodes below an edge the final re-check rejected: excluded from both
    // nearest-neighbor and goal candidacy, since no valid path runs through
    // a rejected edge.
    let mut severed: Vec<bool> = Vec::new();

    let start_blocked = point_collides_counting(start_point, s, &mut counters.collision_samples)?
        == CollisionState::Collision;

    if let Some(st) = store.as_mut() {
        seed_obstacle_cells(st, s);
    }

    if !start_blocked {
        let root = tree.push(start_point, None);
        severed.push(false);
        kd.insert(start_point, root);
        if in_goal(start_point) {
            goal_node = Some(root);
        }

        while goal_node.is_none() && iterations < cfg.max_iters {
            iterations += 1;
            counters.samples += 1;
            let x_rand = sample(&mut rng, s, cfg.goal_bias);

            let memo_nearest = match store.as_mut() {
                Some(st) => st.nn_lookup(x_rand).filter(|r| !severed[r.index()]),
                None => None,
            };
            let nearest = match memo_nearest {
                Some(r) => {
                    nn_memo_hits += 1;
                    Some(r)
                }
                None => {
                    counters.nn_queries += 1;
                    kd.nearest_before_filtered(x_rand, &metric, &mut counters.nn_visits, |r| {
                        !severed[r.index()]
                    })
                }
            };
            let Some(near_ref) = nearest else {
                continue;
            };
            let x_near = tree.point(near_ref);

            counters.steers += 1;
            let x_new = steer(x_near, x_rand, cfg.step, cfg.time_weight)
                .expect("time filter guarantees a forward target");
            if x_new.t <= x_near.t {
                // Floating-point underflow collapsed the time advance.
                continue;
            }
            extensions += 1;

            let memo_state = match store.as_mut() {
                Some(st) => st.collision_lookup(x_new),
                None => CollisionState::Miss,
            };
            let (state, exact_checked) = if memo_state == CollisionState::NoCollision {
                (CollisionState::NoCollision, false)
            } else {
                let resolved = segment_collides_counting(
                    x_near,
                    x_new,
                    s,
                    cfg.collision_spacing,
                    &mut counters.collision_samples,
                )
                .expect("steered edges stay in bounds and advance time");
                (resolved, true)
            };

            let new_ref = tree.push(x_new, Some(near_ref));
            severed.push(false);
            if exact_checked {
                verified.insert(new_ref);
            }
            if let Some(st) = store.as_mut() {
                st.update(x_new, state, new_ref);
            }
            if state != CollisionState::NoCollision {
                continue;
            }
            kd.insert(x_new, new_ref);

            if in_goal(x_new) {
                if let Some(g) = try_accept_candidate(
                    s,
                    cfg,
                    &mut tree,
                    &kd,
                    &metric,
                    new_ref,
                    &mut verified,
                    &mut severed,
                    store.as_mut(),
                    &mut counters,
                ) {
                    goal_node = Some(g);
                }
            }
        }
    }

    let store_counters = store.as_ref().map(|st| st.counters()).unwrap_or_default();
    counters.store_nn_lookups = store_counters.nn_lookups;
    counters.store_col_lookups = store_counters.col_lookups;
    counters.store_updates = store_counters.updates;

    let modeled = cost.modeled(&counters, cfg.variant.backend());
    let path = goal_node.map(|g| tree.extract_path(g));
    let path_len = path.as_ref().map(|p| crate::collision::path_length(p));

    let alpha = if extensions > 0 {
        1.0 - store_counters.col_no_collision_hits as f64 / extensions as f64
    } else {
        1.0
    };
    let beta = if iterations > 0 {
        1.0 - nn_memo_hits as f64 / iterations as f64
    } else {
        1.0
    };

    let stats = PlanStats {
        iterations,
        extensions,
        nodes: kd.len() as u64,
        obstacle_count: s.obstacles.len(),
        alpha,
        beta,
        nn_store_hits: nn_memo_hits,
        col_store_hits: store_counters.col_hits,
        col_store_no_collision_hits: store_counters.col_no_collision_hits,
        counters,
        store_counters,
        modeled_ops: modeled.total_ops,
        modeled_store_ops: modeled.store_ops,
        modeled_cycles: modeled.cycles,
        wall_time_s: started.elapsed().as_secs_f64(),
        path_len,
    };
    Ok(PlanResult { path, stats })
}

/// Exact re-check of a candidate path. Edges already resolved by an exact
/// check are trusted; each other edge is checked once and remembered. A
/// failing edge is removed: the planner first tries to re-parent its child
/// onto a different earlier node over a collision-free edge, and severs the
/// whole subtree from candidacy only when no such edge exists. Either way
/// the collision is written back into the store and the candidate rejected.
#[allow(clippy::too_many_arguments)]
fn try_accept_candidate(
    s: &Scenario,
    cfg: &PlannerConfig,
    tree: &mut Tree,
    kd: &KdIndex,
    metric: &DistMetric,
    candidate: NodeRef,
    verified: &mut HashSet<NodeRef>,
    severed: &mut [bool],
    mut store: Option<&mut MortonStore>,
    counters: &mut OpCounters,
) -> Option<NodeRef> {
    'revalidate: loop {
        let chain = tree.chain(candidate);
        if chain.iter().any(|r| severed[r.index()]) {
            return None;
        }
        for pair in chain.windows(2) {
            let (parent, child) = (pair[0], pair[1]);
            if verified.contains(&child) {
                continue;
            }
            let state = segment_collides_counting(
                tree.point(parent),
                tree.point(child),
                s,
                cfg.collision_spacing,
                &mut counters.collision_samples,
            )
            .expect("tree edges stay in bounds and advance time");
            if state == CollisionState::Collision {
                if let Some(st) = store.as_deref_mut() {
                    // Overwrite the stale memo so the cell stops admitting
                    // edges through this cell.
                    st.update(tree.point(child), CollisionState::Collision, child);
                }
                if repair_edge(s, cfg, tree, kd, metric, parent, child, severed, counters) {
                    // The chain above `child` changed; validate it afresh.
                    // Each round verifies at least one more edge, so this
                    // terminates.
                    verified.insert(child);
                    continue 'revalidate;
                }
                sever_subtree(tree, child, severed);
                return None;
            }
            verified.insert(child);
        }
        return Some(candidate);
    }
}

/// Handle stored with obstacle-seeded collision marks; never returned by a
/// neighbor lookup because collision entries are not neighbor candidates.
const OBSTACLE_MARK: NodeRef = NodeRef::new(u32::MAX);

/// Writes the obstacle sweeps into the store as collision marks: each track's
/// disc is sampled over space and time at half-cell granularity, so cells an
/// obstacle passes through answer `Collision` and force the exact check
/// there. Cells the sweeps never touch keep trustworthy no-collision memos.
fn seed_obstacle_cells(store: &mut MortonStore, s: &Scenario) {
    let side = store.config().quant.cell_side();
    let stride = (side / 2.0).max(1e-6);
    let horizon = s.horizon();
    let edge = s.edge_length;
    for ob in &s.obstacles {
        let r = ob.radius;
        // Cover the disc even when it is smaller than a half-cell.
        let xy_stride = stride.min(r);
        let xy_steps = (2.0 * r / xy_stride).ceil() as i64;
        // Fast obstacles sweep more than a half-cell per timestep; sample
        // time finely enough that no cell on the sweep is skipped.
        let (dx, dy) = (
            ob.end_pos[0] - ob.start_pos[0],
            ob.end_pos[1] - ob.start_pos[1],
        );
        let speed = (dx * dx + dy * dy).sqrt() / horizon;
        let t_stride = stride / speed.max(1.0);
        let t_steps = (horizon / t_stride).ceil() as u64;
        for ti in 0..=t_steps {
            let t = (ti as f64 * t_stride).min(horizon);
            let (cx, cy) = ob.lerp_at(t, horizon);
            for xi in 0..=xy_steps {
                let x = cx - r + xi as f64 * xy_stride;
                if !(0.0..=edge).contains(&x) {
                    continue;
                }
                for yi in 0..=xy_steps {
                    let y = cy - r + yi as f64 * xy_stride;
                    if !(0.0..=edge).contains(&y) {
                        continue;
                    }
                    // Bounding-square corners outside the disc stay unmarked.
                    let (ox, oy) = (x - cx, y - cy);
                    if ox * ox + oy * oy > r * r {
                        continue;
                    }
                    store.update(
                        SpaceTimePoint::new(x, y, t),
                        CollisionState::Collision,
                        OBSTACLE_MARK,
                    );
                }
            }
        }
    }
}

/// Tries to replace a rejected edge by re-parenting `child` onto its exact
/// nearest earlier neighbor (excluding the old parent) over a collision-free
/// edge. The new parent is strictly earlier in time, and so is every node it
/// descends from, so re-parenting cannot form a cycle.
#[allow(clippy::too_many_arguments)]
fn repair_edge(
    s: &Scenario,
    cfg: &PlannerConfig,
    tree: &mut Tree,
    kd: &KdIndex,
    metric: &DistMetric,
    old_parent: NodeRef,
    child: NodeRef,
    severed: &[bool],
    counters: &mut OpCounters,
) -> bool {
    counters.nn_queries += 1;
    let found =
        kd.nearest_before_filtered(tree.point(child), metric, &mut counters.nn_visits, |r| {
            r != old_parent && r != child && !severed[r.index()]
        });
    let Some(new_parent) = found else {
        return false;
    };
    let state = segment_collides_counting(
        tree.point(new_parent),
        tree.point(child),
        s,
        cfg.collision_spacing,
        &mut counters.collision_samples,
    )
    .expect("tree edges stay in bounds and advance time");
    if state != CollisionState::NoCollision {
        return false;
    }
    tree.set_parent(child, new_parent);
    true
}

/// Marks `node` and every descendant. Children always have larger arena ids
/// than their parents, so one forward pass suffices.
fn sever_subtree(tree: &Tree, node: NodeRef, severed: &mut [bool]) {
    severed[node.index()] = true;
    for i in (node.index() + 1)..tree.len() {
        if let Some(p) = tree.parent(NodeRef::new(i as u32)) {
            if severed[p.index()] {
                severed[i] = true;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::validate_path;
    use crate::scenario::generate_synthetic;
    use rand::SeedableRng;

    fn pt(x: f64, y: f64, t: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(x, y, t)
    }

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn sample_respects_bounds_and_bias() {
        let s = generate_synthetic(50.0, 10, 0, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let p = sample(&mut rng, &s, 0.0);
            assert!(s.contains(p));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = sample(&mut rng, &s, 0.999_999);
            assert_eq!((p.x, p.y), (50.0, 50.0));
            assert!(p.t >= 0.0 && p.t <= 10.0);
        }
    }

    #[test]
    fn sample_is_deterministic() {
        let s = generate_synthetic(50.0, 10, 0, 1).unwrap();
        let draw = |seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| sample(&mut rng, &s, 0.05))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
        assert_ne!(draw(9), draw(10));
    }

    #[test]
    fn steer_scales_the_direction_vector() {
        let got = steer(pt(0.0, 0.0, 0.0), pt(3.0, 4.0, 0.0001), 1.0, 1.0).unwrap();
        assert!(approx(got.x, 0.6), "{got:?}");
        assert!(approx(got.y, 0.8), "{got:?}");
        assert!(approx(got.t, 0.00002), "{got:?}");
    }

    #[test]
    fn steer_returns_near_targets_unchanged() {
        let toward = pt(0.3, 0.4, 0.5);
        let got = steer(pt(0.0, 0.0, 0.0), toward, 1.0, 1.0).unwrap();
        assert_eq!(got, toward);
    }

    #[test]
    fn steer_handles_pure_time_direction() {
        let got = steer(pt(0.0, 0.0, 0.0), pt(0.0, 0.0, 5.0), 1.0, 1.0).unwrap();
        assert_eq!(got, pt(0.0, 0.0, 1.0));
    }

    #[test]
    fn steer_rejects_backward_targets() {
        assert!(steer(pt(0.0, 0.0, 1.0), pt(1.0, 1.0, 1.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn plan_finds_a_path_in_free_space() {
        let s = generate_synthetic(20.0, 10, 0, 5).unwrap();
        for variant in Variant::ALL {
            let cfg = PlannerConfig::new(variant, 42);
            let result = plan(&s, &cfg, &CostModel::default()).unwrap();
            let path = result.path.as_ref().expect("free space is connected");
            assert!(
                validate_path(path, &s),
                "{variant} produced an invalid path"
            );
            assert!(result.stats.path_len.unwrap() > 0.0);
        }
    }

    #[test]
    fn plan_reports_unreachable_when_iterations_run_out() {
        // Crossing a 100-unit map within a 5-step horizon takes a chain of
        // ~140 nearly time-flat edges; 500 iterations cannot build one.
        let s = generate_synthetic(100.0, 5, 0, 5).unwrap();
        let mut cfg = PlannerConfig::new(Variant::Baseline, 42);
        cfg.max_iters = 500;
        let result = plan(&s, &cfg, &CostModel::default()).unwrap();
        assert!(result.path.is_none());
        assert_eq!(result.stats.iterations, 500);
        assert!(result.stats.nodes > 0);
    }

    #[test]
    fn plan_is_deterministic() {
        let s = generate_synthetic(40.0, 20, 6, 11).unwrap();
        for variant in Variant::ALL {
            let cfg = PlannerConfig::new(variant, 1234);
            let a = plan(&s, &cfg, &CostModel::default()).unwrap();
            let b = plan(&s, &cfg, &CostModel::default()).unwrap();
            assert_eq!(a.path, b.path);
            // Wall time differs between runs; everything else must not.
            let mut sa = a.stats.clone();
            let mut sb = b.stats.clone();
            sa.wall_time_s = 0.0;
            sb.wall_time_s = 0.0;
            assert_eq!(sa, sb);
        }
    }

    #[test]
    fn baseline_keeps_alpha_and_beta_at_one() {
        let s = generate_synthetic(30.0, 10, 4, 2).unwrap();
        let cfg = PlannerConfig::new(Variant::Baseline, 7);
        let result = plan(&s, &cfg, &CostModel::default()).unwrap();
        assert_eq!(result.stats.alpha, 1.0);
        assert_eq!(result.stats.beta, 1.0);
        assert_eq!(result.stats.counters.store_ops(), 0);
        assert_eq!(result.stats.modeled_store_ops, 0);
    }

    #[test]
    fn memoized_variants_report_hits_in_range() {
        let s = generate_synthetic(30.0, 10, 4, 2).unwrap();
        let cfg = PlannerConfig::new(Variant::SwMorton, 7);
        let result = plan(&s, &cfg, &CostModel::default()).unwrap();
        let stats = &result.stats;
        assert!(stats.alpha >= 0.0 && stats.alpha <= 1.0);
        assert!(stats.beta >= 0.0 && stats.beta <= 1.0);
        assert_eq!(stats.counters.store_nn_lookups, stats.iterations);
        assert_eq!(stats.counters.store_col_lookups, stats.extensions);
        // One update per extension, plus the occasional overwrite when the
        // final re-check rejects an edge.
        assert!(stats.counters.store_updates >= stats.extensions);
    }

    #[test]
    fn zero_capacity_store_reproduces_the_baseline_path() {
        let s = generate_synthetic(30.0, 15, 5, 3).unwrap();
        let baseline = PlannerConfig::new(Variant::Baseline, 99);
        let mut disabled = PlannerConfig::new(Variant::SwMorton, 99);
        disabled.store.capacity_bytes = 0;
        let a = plan(&s, &baseline, &CostModel::default()).unwrap();
        let b = plan(&s, &disabled, &CostModel::default()).unwrap();
        assert_eq!(a.path, b.path);
        assert_eq!(a.stats.nodes, b.stats.nodes);
        assert_eq!(a.stats.iterations, b.stats.iterations);
    }

    #[test]
    fn blocked_start_is_unreachable_immediately() {
        let mut s = generate_synthetic(20.0, 10, 0, 5).unwrap();
        s.obstacles.push(crate::scenario::ObstacleTrack {
            start_pos: [0.5, 0.5],
            end_pos: [10.0, 10.0],
            radius: 2.0,
        });
        let cfg = PlannerConfig::new(Variant::Baseline, 42);
        let result = plan(&s, &cfg, &CostModel::default()).unwrap();
        assert!(result.path.is_none());
        assert_eq!(result.stats.iterations, 0);
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let s = generate_synthetic(20.0, 10, 0, 5).unwrap();
        let mut cfg = PlannerConfig::new(Variant::Baseline, 1);
        cfg.step = 0.0;
        assert!(plan(&s, &cfg, &CostModel::default()).is_err());
        let mut cfg = PlannerConfig::new(Variant::SwMorton, 1);
        cfg.store.backend = StoreBackend::Hardware;
        assert!(plan(&s, &cfg, &CostModel::default()).is_err());
        let mut cfg = PlannerConfig::new(Variant::Baseline, 1);
        cfg.goal_bias = 1.0;
        assert!(plan(&s, &cfg, &CostModel::default()).is_err());
    }

    #[test]
    fn extract_path_walks_parent_links_in_order() {
        let mut tree = Tree::new();
        let a = tree.push(pt(0.0, 0.0, 0.0), None);
        assert_eq!(tree.extract_path(a), vec![pt(0.0, 0.0, 0.0)]);
        let b = tree.push(pt(1.0, 0.0, 1.0), Some(a));
        let c = tree.push(pt(2.0, 0.0, 2.0), Some(b));
        let path = tree.extract_path(c);
        assert_eq!(
            path,
            vec![pt(0.0, 0.0, 0.0), pt(1.0, 0.0, 1.0), pt(2.0, 0.0, 2.0)]
        );
        assert!(path.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn returned_paths_always_validate() {
        for seed in 0..8 {
            let s = generate_synthetic(30.0, 15, 6, seed).unwrap();
            for variant in Variant::ALL {
                let mut cfg = PlannerConfig::new(variant, seed.wrapping_mul(977));
                cfg.max_iters = 60_000;
                let result = plan(&s, &cfg, &CostModel::default()).unwrap();
                if let Some(path) = &result.path {
                    assert!(validate_path(path, &s), "seed {seed} variant {variant}");
                }
            }
        }
    }
}
