//! Exact collision tests against linearly interpolated disc obstacles, final
//! path validation, and the 2D path-length metric.
//!
//! Segments are checked by sampling: the sample count is rounded up to a
//! power of two, so tightening the spacing always produces a superset of the
//! previous sample set and a collision verdict can never be lost by refining.

use crate::scenario::{Scenario, ScenarioError, SpaceTimePoint};
use thiserror::Error;

/// Default sample spacing for segment checks and path validation, map units.
pub const DEFAULT_COLLISION_SPACING: f64 = 0.25;

#[derive(Debug, Error)]
pub enum CollisionError {
    #[error("point ({x}, {y}, {t}) outside scenario bounds")]
    OutOfBounds { x: f64, y: f64, t: f64 },
    #[error("segment must advance in time: {from_t} -> {to_t}")]
    NonMonotonicSegment { from_t: f64, to_t: f64 },
    #[error("sample spacing must be positive, got {0}")]
    BadSpacing(f64),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Verdict of a collision query. `Miss` is only ever produced by memo-store
/// lookups; exact checks answer one of the other two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CollisionState {
    NoCollision,
    Collision,
    Miss,
}

fn check_bounds(p: SpaceTimePoint, s: &Scenario) -> Result<(), CollisionError> {
    if s.contains(p) {
        Ok(())
    } else {
        Err(CollisionError::OutOfBounds {
            x: p.x,
            y: p.y,
            t: p.t,
        })
    }
}

/// Does any obstacle cover `p` at time `p.t`?
pub fn point_collides(p: SpaceTimePoint, s: &Scenario) -> Result<CollisionState, CollisionError> {
    let mut samples = 0;
    point_collides_counting(p, s, &mut samples)
}

/// [`point_collides`] that also counts obstacle distance evaluations, the
/// unit the cost model charges exact collision detection by. Scans obstacles
/// with early exit, so the count reflects work actually done.
pub fn point_collides_counting(
    p: SpaceTimePoint,
    s: &Scenario,
    samples: &mut u64,
) -> Result<CollisionState, CollisionError> {
    check_bounds(p, s)?;
    let horizon = s.horizon();
    for ob in &s.obstacles {
        *samples += 1;
        let (ox, oy) = ob.lerp_at(p.t, horizon);
        let dx = p.x - ox;
        let dy = p.y - oy;
        if dx * dx + dy * dy <= ob.radius * ob.radius {
            return Ok(CollisionState::Collision);
        }
    }
    Ok(CollisionState::NoCollision)
}

fn segment_samples(a: SpaceTimePoint, b: SpaceTimePoint, h: f64) -> u64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let dt = b.t - a.t;
    let len = (dx * dx + dy * dy + dt * dt).sqrt();
    // Power-of-two counts nest: samples at spacing h/2 contain those at h.
    ((len / h).ceil().max(1.0) as u64).next_power_of_two()
}

/// Checks the straight segment from `a` to `b`, sampling both endpoints and
/// enough interior points that consecutive samples are at most `h` apart in
/// the unweighted 3D metric.
pub fn segment_collides(
    a: SpaceTimePoint,
    b: SpaceTimePoint,
    s: &Scenario,
    h: f64,
) -> Result<CollisionState, CollisionError> {
    let mut samples = 0;
    segment_collides_counting(a, b, s, h, &mut samples)
}

/// Counting flavor of [`segment_collides`]; see [`point_collides_counting`].
pub fn segment_collides_counting(
    a: SpaceTimePoint,
    b: SpaceTimePoint,
    s: &Scenario,
    h: f64,
    samples: &mut u64,
) -> Result<CollisionState, CollisionError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(CollisionError::BadSpacing(h));
    }
    if a.t >= b.t {
        return Err(CollisionError::NonMonotonicSegment {
            from_t: a.t,
            to_t: b.t,
        });
    }
    let n = segment_samples(a, b, h);
    for i in 0..=n {
        let f = i as f64 / n as f64;
        let p = SpaceTimePoint::new(
            a.x + f * (b.x - a.x),
            a.y + f * (b.y - a.y),
            a.t + f * (b.t - a.t),
        );
        if point_collides_counting(p, s, samples)? == CollisionState::Collision {
            return Ok(CollisionState::Collision);
        }
    }
    Ok(CollisionState::NoCollision)
}

/// Full safety check of a finished path: starts at the scenario start,
/// advances strictly in time, every segment is collision-free at the default
/// spacing, and the final point lies inside the goal disc.
pub fn validate_path(path: &[SpaceTimePoint], s: &Scenario) -> bool {
    validate_path_with_spacing(path, s, DEFAULT_COLLISION_SPACING)
}

/// [`validate_path`] with an explicit segment sample spacing.
pub fn validate_path_with_spacing(path: &[SpaceTimePoint], s: &Scenario, h: f64) -> bool {
    let Some(first) = path.first() else {
        return false;
    };
    if first.x != s.start[0] || first.y != s.start[1] {
        return false;
    }
    if path.len() == 1 && point_collides(*first, s).map_or(true, |c| c == CollisionState::Collision)
    {
        return false;
    }
    for pair in path.windows(2) {
        if pair[0].t >= pair[1].t {
            return false;
        }
        match segment_collides(pair[0], pair[1], s, h) {
            Ok(CollisionState::NoCollision) => {}
            _ => return false,
        }
    }
    let last = path.last().unwrap();
    let dx = last.x - s.goal[0];
    let dy = last.y - s.goal[1];
    dx * dx + dy * dy <= s.goal_radius * s.goal_radius
}

/// Path length in the (x, y) projection only; the time coordinate does not
/// contribute.
pub fn path_length(path: &[SpaceTimePoint]) -> f64 {
    path.windows(2).map(|pair| pair[0].dist2d(&pair[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ObstacleTrack;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64, t: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(x, y, t)
    }

    /// Map 10x10, horizon 20, one disc sweeping (0,0) -> (10,10).
    fn one_obstacle(radius: f64) -> Scenario {
        Scenario {
            edge_length: 10.0,
            timesteps: 20,
            start: [0.0, 0.0],
            goal: [10.0, 10.0],
            goal_radius: 1.0,
            obstacles: vec![ObstacleTrack {
                start_pos: [0.0, 0.0],
                end_pos: [10.0, 10.0],
                radius,
            }],
        }
    }

    fn empty_scenario(edge: f64, timesteps: u32) -> Scenario {
        Scenario {
            edge_length: edge,
            timesteps,
            start: [0.0, 0.0],
            goal: [edge, edge],
            goal_radius: 2.0,
            obstacles: Vec::new(),
        }
    }

    fn len3(a: SpaceTimePoint, b: SpaceTimePoint) -> f64 {
        let (dx, dy, dt) = (b.x - a.x, b.y - a.y, b.t - a.t);
        (dx * dx + dy * dy + dt * dt).sqrt()
    }

    /// Dense reference: same contract as segment_collides at spacing h/100.
    fn segment_collides_dense(
        a: SpaceTimePoint,
        b: SpaceTimePoint,
        s: &Scenario,
        h: f64,
    ) -> CollisionState {
        let n = 100 * ((len3(a, b) / h).ceil().max(1.0) as u64);
        for i in 0..=n {
            let f = i as f64 / n as f64;
            let p = pt(
                a.x + f * (b.x - a.x),
                a.y + f * (b.y - a.y),
                a.t + f * (b.t - a.t),
            );
            if point_collides(p, s).unwrap() == CollisionState::Collision {
                return CollisionState::Collision;
            }
        }
        CollisionState::NoCollision
    }

    #[test]
    fn point_checks_against_interpolated_center() {
        // At t=10 the obstacle sits at (5,5) with radius 2.
        let s = one_obstacle(2.0);
        assert_eq!(
            point_collides(pt(5.0, 6.0, 10.0), &s).unwrap(),
            CollisionState::Collision
        );
        assert_eq!(
            point_collides(pt(5.0, 8.0, 10.0), &s).unwrap(),
            CollisionState::NoCollision
        );
    }

    #[test]
    fn empty_scenario_never_collides() {
        let s = empty_scenario(10.0, 20);
        assert_eq!(
            point_collides(pt(3.0, 4.0, 5.0), &s).unwrap(),
            CollisionState::NoCollision
        );
    }

    #[test]
    fn point_rejects_out_of_bounds() {
        let s = empty_scenario(10.0, 20);
        assert!(point_collides(pt(11.0, 0.0, 0.0), &s).is_err());
        assert!(point_collides(pt(0.0, 0.0, 21.0), &s).is_err());
    }

    #[test]
    fn clear_segment_is_no_collision() {
        let s = one_obstacle(2.0);
        // Far corner region while the obstacle is still near the origin.
        let got = segment_collides(pt(8.0, 1.0, 1.0), pt(9.0, 2.0, 2.0), &s, 0.25).unwrap();
        assert_eq!(got, CollisionState::NoCollision);
    }

    #[test]
    fn segment_endpoint_inside_obstacle_collides() {
        let s = one_obstacle(2.0);
        let got = segment_collides(pt(5.0, 6.0, 10.0), pt(8.0, 9.0, 12.0), &s, 0.25).unwrap();
        assert_eq!(got, CollisionState::Collision);
    }

    #[test]
    fn segment_crossing_center_collides_and_matches_dense_reference() {
        let s = one_obstacle(2.0);
        // Crosses (5,5) exactly when the obstacle is there (t=10).
        let a = pt(3.0, 7.0, 9.5);
        let b = pt(7.0, 3.0, 10.5);
        assert_eq!(
            segment_collides(a, b, &s, 0.25).unwrap(),
            CollisionState::Collision
        );
        assert_eq!(
            segment_collides_dense(a, b, &s, 0.25),
            CollisionState::Collision
        );
    }

    #[test]
    fn clear_segment_matches_dense_reference() {
        let s = one_obstacle(2.0);
        let a = pt(9.0, 1.0, 1.0);
        let b = pt(9.5, 1.5, 2.0);
        assert_eq!(
            segment_collides(a, b, &s, 0.25).unwrap(),
            CollisionState::NoCollision
        );
        assert_eq!(
            segment_collides_dense(a, b, &s, 0.25),
            CollisionState::NoCollision
        );
    }

    #[test]
    fn segment_rejects_non_monotonic_time() {
        let s = empty_scenario(10.0, 20);
        assert!(segment_collides(pt(0.0, 0.0, 5.0), pt(1.0, 1.0, 5.0), &s, 0.25).is_err());
        assert!(segment_collides(pt(0.0, 0.0, 6.0), pt(1.0, 1.0, 5.0), &s, 0.25).is_err());
    }

    #[test]
    fn straight_path_validates_on_empty_map() {
        let s = empty_scenario(10.0, 20);
        let path = [pt(0.0, 0.0, 0.0), pt(10.0, 10.0, 20.0)];
        assert!(validate_path(&path, &s));
    }

    #[test]
    fn path_with_decreasing_time_fails() {
        let s = empty_scenario(10.0, 20);
        let path = [pt(0.0, 0.0, 0.0), pt(5.0, 5.0, 10.0), pt(10.0, 10.0, 9.0)];
        assert!(!validate_path(&path, &s));
    }

    #[test]
    fn path_through_obstacle_fails() {
        let s = one_obstacle(2.0);
        // Passes through (5,5) around t=10, where the dense reference also
        // reports a collision.
        let path = [pt(0.0, 0.0, 0.0), pt(5.0, 5.0, 10.0), pt(10.0, 10.0, 20.0)];
        assert_eq!(
            segment_collides_dense(path[0], path[1], &s, 0.25),
            CollisionState::Collision
        );
        assert!(!validate_path(&path, &s));
    }

    #[test]
    fn path_length_examples() {
        assert_eq!(path_length(&[pt(0.0, 0.0, 0.0), pt(3.0, 4.0, 1.0)]), 5.0);
        assert_eq!(path_length(&[pt(1.0, 1.0, 0.0)]), 0.0);
        assert_eq!(
            path_length(&[pt(0.0, 0.0, 0.0), pt(3.0, 4.0, 1.0), pt(6.0, 8.0, 2.0)]),
            10.0
        );
    }

    #[test]
    fn obstacle_order_does_not_matter() {
        let mut s = one_obstacle(2.0);
        s.obstacles.push(ObstacleTrack {
            start_pos: [10.0, 0.0],
            end_pos: [0.0, 10.0],
            radius: 1.5,
        });
        let mut reversed = s.clone();
        reversed.obstacles.reverse();
        for &p in &[pt(5.0, 6.0, 10.0), pt(2.0, 2.0, 3.0), pt(9.0, 9.0, 19.0)] {
            assert_eq!(
                point_collides(p, &s).unwrap(),
                point_collides(p, &reversed).unwrap()
            );
        }
    }

    proptest! {
        /// Halving the spacing keeps every coarser sample, so a collision
        /// verdict can only be found, never lost.
        #[test]
        fn refining_spacing_never_clears_a_collision(
            ax in 0.5..9.5f64, ay in 0.5..9.5f64, at in 0.0..9.0f64,
            bx in 0.5..9.5f64, by in 0.5..9.5f64, dt in 0.1..9.0f64,
            halvings in 1u32..4,
        ) {
            let s = one_obstacle(2.0);
            let a = pt(ax, ay, at);
            let b = pt(bx, by, (at + dt).min(20.0));
            let coarse = segment_collides(a, b, &s, 0.5).unwrap();
            let fine = segment_collides(a, b, &s, 0.5 / 2f64.powi(halvings as i32)).unwrap();
            if coarse == CollisionState::Collision {
                prop_assert_eq!(fine, CollisionState::Collision);
            }
        }

        /// A validated path is at least as long as the straight line to its
        /// final point.
        #[test]
        fn valid_paths_are_no_shorter_than_the_straight_line(
            mid_x in 0.0..10.0f64, mid_y in 0.0..10.0f64,
        ) {
            let s = empty_scenario(10.0, 20);
            let path = [pt(0.0, 0.0, 0.0), pt(mid_x, mid_y, 10.0), pt(10.0, 10.0, 20.0)];
            prop_assume!(validate_path(&path, &s));
            let straight = path[0].dist2d(path.last().unwrap());
            prop_assert!(path_length(&path) >= straight - 1e-9);
        }
    }
}
