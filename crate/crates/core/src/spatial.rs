//! Exact nearest-neighbor search over (x, y, t) with the time-monotone
//! filter: a query at time t only ever sees stored points with a strictly
//! smaller t, so tree edges always advance in time.
//!
//! The index is an append-only kd-tree cycling through the three axes. Each
//! internal node tracks the minimum t in its subtree, letting the query prune
//! whole subtrees that cannot pass the time filter instead of post-filtering.
//! [`nearest_before_linear`] is the exhaustive reference the index is tested
//! against.

use crate::scenario::SpaceTimePoint;

/// Dense handle into the planner's node arena.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeRef(u32);

impl NodeRef {
    pub const fn new(id: u32) -> Self {
        NodeRef(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Weighted Euclidean metric: sqrt(dx^2 + dy^2 + w_t * dt^2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistMetric {
    pub time_weight: f64,
}

impl Default for DistMetric {
    fn default() -> Self {
        DistMetric { time_weight: 1.0 }
    }
}

impl DistMetric {
    pub fn new(time_weight: f64) -> Self {
        DistMetric { time_weight }
    }

    /// Squared distance; cheap to compare without the square root.
    pub fn dist2(&self, a: SpaceTimePoint, b: SpaceTimePoint) -> f64 {
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let dt = a.t - b.t;
        dx * dx + dy * dy + self.time_weight * dt * dt
    }

    pub fn dist(&self, a: SpaceTimePoint, b: SpaceTimePoint) -> f64 {
        self.dist2(a, b).sqrt()
    }

    fn axis_diff2(&self, axis: u8, diff: f64) -> f64 {
        let d2 = diff * diff;
        if axis == 2 {
            self.time_weight * d2
        } else {
            d2
        }
    }
}

fn coord(p: SpaceTimePoint, axis: u8) -> f64 {
    match axis {
        0 => p.x,
        1 => p.y,
        _ => p.t,
    }
}

const NONE: u32 = u32::MAX;

struct KdNode {
    point: SpaceTimePoint,
    node: NodeRef,
    left: u32,
    right: u32,
    /// Axis-aligned bounds of every point in this subtree. `lo[2]` doubles
    /// as the time-filter prune: a subtree whose earliest t is at or past
    /// the query's t holds no admissible node.
    lo: [f64; 3],
    hi: [f64; 3],
    axis: u8,
}

/// Append-only kd-tree over (point, handle) pairs. Duplicates are allowed.
#[derive(Default)]
pub struct KdIndex {
    nodes: Vec<KdNode>,
    items: Vec<(SpaceTimePoint, NodeRef)>,
}

struct Best {
    d2: f64,
    node: Option<NodeRef>,
}

impl KdIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Every inserted pair, in insertion order. Doubles as the input to the
    /// linear-scan reference.
    pub fn points(&self) -> &[(SpaceTimePoint, NodeRef)] {
        &self.items
    }

    pub fn insert(&mut self, p: SpaceTimePoint, r: NodeRef) {
        self.items.push((p, r));
        let new_index = self.nodes.len() as u32;
        let coords = [p.x, p.y, p.t];
        if self.nodes.is_empty() {
            self.nodes.push(KdNode {
                point: p,
                node: r,
                left: NONE,
                right: NONE,
                lo: coords,
                hi: coords,
                axis: 0,
            });
            return;
        }
        let mut cur = 0u32;
        loop {
            let node = &mut self.nodes[cur as usize];
            for (a, &c) in coords.iter().enumerate() {
                node.lo[a] = node.lo[a].min(c);
                node.hi[a] = node.hi[a].max(c);
            }
            let axis = node.axis;
            let go_left = coord(p, axis) < coord(node.point, axis);
            let slot = if go_left {
                &mut node.left
            } else {
                &mut node.right
            };
            if *slot == NONE {
                *slot = new_index;
                let child_axis = (axis + 1) % 3;
                self.nodes.push(KdNode {
                    point: p,
                    node: r,
                    left: NONE,
                    right: NONE,
                    lo: coords,
                    hi: coords,
                    axis: child_axis,
                });
                return;
            }
            cur = *slot;
        }
    }

    /// Closest stored point with t strictly below `q.t`, ties broken by the
    /// smallest handle. `None` when nothing passes the time filter.
    pub fn nearest_before(&self, q: SpaceTimePoint, metric: &DistMetric) -> Option<NodeRef> {
        let mut visited = 0;
        self.nearest_before_counting(q, metric, &mut visited)
    }

    /// Same as [`Self::nearest_before`], also accumulating the number of tree
    /// nodes examined (the unit the cost model charges exact search by).
    pub fn nearest_before_counting(
        &self,
        q: SpaceTimePoint,
        metric: &DistMetric,
        visited: &mut u64,
    ) -> Option<NodeRef> {
        self.nearest_before_filtered(q, metric, visited, |_| true)
    }

    /// Nearest with an acceptance predicate on the handle; rejected nodes
    /// still route the descent but never become the answer.
    pub fn nearest_before_filtered(
        &self,
        q: SpaceTimePoint,
        metric: &DistMetric,
        visited: &mut u64,
        accept: impl Fn(NodeRef) -> bool,
    ) -> Option<NodeRef> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = Best {
            d2: f64::INFINITY,
            node: None,
        };
        self.search(0, q, metric, &mut best, visited, &accept);
        best.node
    }

    /// Weighted squared distance from `q` to the subtree's bounding box.
    fn box_dist2(&self, idx: u32, q: SpaceTimePoint, metric: &DistMetric) -> f64 {
        let node = &self.nodes[idx as usize];
        let mut d2 = 0.0;
        for a in 0..3u8 {
            let v = coord(q, a);
            let gap = if v < node.lo[a as usize] {
                node.lo[a as usize] - v
            } else if v > node.hi[a as usize] {
                v - node.hi[a as usize]
            } else {
                0.0
            };
            d2 += metric.axis_diff2(a, gap);
        }
        d2
    }

    fn search(
        &self,
        idx: u32,
        q: SpaceTimePoint,
        metric: &DistMetric,
        best: &mut Best,
        visited: &mut u64,
        accept: &impl Fn(NodeRef) -> bool,
    ) {
        let node = &self.nodes[idx as usize];
        if node.lo[2] >= q.t {
            // No point in this subtree can satisfy t < q.t.
            return;
        }
        *visited += 1;
        if node.point.t < q.t && accept(node.node) {
            let d2 = metric.dist2(node.point, q);
            if d2 < best.d2 || (d2 == best.d2 && best.node.is_none_or(|b| node.node < b)) {
                best.d2 = d2;
                best.node = Some(node.node);
            }
        }
        let axis = node.axis;
        let diff = coord(q, axis) - coord(node.point, axis);
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        // Equal box distances must still be visited: a subtree at exactly the
        // best distance may hold a smaller handle that wins the tie-break.
        if near != NONE && self.box_dist2(near, q, metric) <= best.d2 {
            self.search(near, q, metric, best, visited, accept);
        }
        if far != NONE && self.box_dist2(far, q, metric) <= best.d2 {
            self.search(far, q, metric, best, visited, accept);
        }
    }
}

/// Exhaustive scan with the same contract as [`KdIndex::nearest_before`].
pub fn nearest_before_linear(
    points: &[(SpaceTimePoint, NodeRef)],
    q: SpaceTimePoint,
    metric: &DistMetric,
) -> Option<NodeRef> {
    let mut best: Option<(f64, NodeRef)> = None;
    for &(p, r) in points {
        if p.t >= q.t {
            continue;
        }
        let d2 = metric.dist2(p, q);
        let better = match best {
            None => true,
            Some((bd2, br)) => d2 < bd2 || (d2 == bd2 && r < br),
        };
        if better {
            best = Some((d2, r));
        }
    }
    best.map(|(_, r)| r)
}
