//! The Morton store: one bounded associative memo structure answering both
//! approximate nearest-neighbor and collision queries, keyed by masked Morton
//! codes.
//!
//! The geometry models a fully-associative content-addressable memory: a
//! fixed number of lines (capacity / line size, 512 by default), each holding
//! a small ring of entries (eight 8-byte slots per 64-byte line). Lookups
//! match on the line tag. A write miss allocates a line, evicting the least
//! recently referenced one when the store is full; a read miss changes
//! nothing. Within a line, collision states aggregate sticky: if any entry
//! recorded a collision, a collision lookup on that line answers `Collision`.
//!
//! Both cost backends share this exact behavior; they differ only in what the
//! cost model charges per operation, so any difference in benchmark results
//! comes from modeled cost rather than from divergent search behavior.

use crate::collision::CollisionState;
use crate::morton::{MortonError, MortonKey, QuantConfig};
use crate::scenario::SpaceTimePoint;
use crate::spatial::NodeRef;
use std::collections::HashMap;
use thiserror::Error;

/// Bytes each entry occupies in the modeled hardware line.
pub const ENTRY_BYTES: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum StoreError {
    #[error("line size must divide capacity: {capacity} / {line_bytes}")]
    CapacityNotAligned { capacity: usize, line_bytes: usize },
    #[error("{entries} entries of {ENTRY_BYTES} bytes do not fill a {line_bytes}-byte line")]
    BadLineGeometry { entries: usize, line_bytes: usize },
    #[error(transparent)]
    Morton(#[from] MortonError),
}

/// How store operations are charged by the cost model. Query behavior is
/// identical for both.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StoreBackend {
    Software,
    Hardware,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoreConfig {
    pub capacity_bytes: usize,
    pub line_bytes: usize,
    pub entries_per_line: usize,
    pub quant: QuantConfig,
    pub backend: StoreBackend,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            capacity_bytes: 32 * 1024,
            line_bytes: 64,
            entries_per_line: 8,
            quant: QuantConfig::default(),
            backend: StoreBackend::Software,
        }
    }
}

impl StoreConfig {
    /// Number of lines the geometry yields (512 for the defaults). Zero
    /// capacity is allowed and disables the store.
    pub fn lines(&self) -> usize {
        self.capacity_bytes / self.line_bytes
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        if self.entries_per_line == 0 || self.entries_per_line * ENTRY_BYTES != self.line_bytes {
            return Err(StoreError::BadLineGeometry {
                entries: self.entries_per_line,
                line_bytes: self.line_bytes,
            });
        }
        if !self.capacity_bytes.is_multiple_of(self.line_bytes) {
            return Err(StoreError::CapacityNotAligned {
                capacity: self.capacity_bytes,
                line_bytes: self.line_bytes,
            });
        }
        Ok(())
    }
}

/// One memoized node: its resolved collision state, its handle, and its
/// coordinates. The time coordinate drives the forward-in-time filter; the
/// full point lets a lookup pick the closest of a line's entries. The state
/// is never `Miss`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoreEntry {
    pub state: CollisionState,
    pub node: NodeRef,
    pub point: SpaceTimePoint,
}

impl StoreEntry {
    pub fn node_t(&self) -> f64 {
        self.point.t
    }
}

struct StoreLine {
    tag: MortonKey,
    entries: Vec<StoreEntry>,
    /// Where the next insert lands once the ring is full.
    next: usize,
    /// Set once any collision is recorded for this cell. A cell's collision
    /// truth is a static fact about the scenario (time is a coordinate), so
    /// the mark survives ring overwrites; only eviction clears it.
    saw_collision: bool,
    last_ref: u64,
}

impl StoreLine {
    fn push(&mut self, entry: StoreEntry, cap: usize) {
        if entry.state == CollisionState::Collision {
            self.saw_collision = true;
            return;
        }
        if self.entries.len() < cap {
            self.entries.push(entry);
        } else {
            self.entries[self.next] = entry;
        }
        self.next = (self.next + 1) % cap;
    }

    /// Entries from most recently inserted to oldest.
    fn iter_recent(&self, cap: usize) -> impl Iterator<Item = &StoreEntry> {
        let len = self.entries.len();
        (0..len).map(move |j| &self.entries[(self.next + cap - 1 - j) % cap])
    }
}

/// Raw operation and hit counts; the cost model turns these into modeled
/// instructions and cycles.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StoreCounters {
    pub nn_lookups: u64,
    pub col_lookups: u64,
    pub updates: u64,
    /// Nearest-neighbor lookups that returned a node.
    pub nn_hits: u64,
    /// Nearest-neighbor lookups with no matching line.
    pub nn_miss_no_line: u64,
    /// Nearest-neighbor lookups that matched a line holding no eligible
    /// entry (all too late in time, or none recorded).
    pub nn_miss_no_entry: u64,
    /// Collision lookups that matched a line (either verdict).
    pub col_hits: u64,
    /// Collision lookups that answered `NoCollision`, skipping exact work.
    pub col_no_collision_hits: u64,
}

pub struct MortonStore {
    config: StoreConfig,
    max_lines: usize,
    lines: Vec<StoreLine>,
    by_tag: HashMap<u64, usize>,
    stamp: u64,
    counters: StoreCounters,
}

impl MortonStore {
    pub fn new(config: StoreConfig) -> Result<Self, StoreError> {
        config.validate()?;
        let max_lines = config.lines();
        Ok(MortonStore {
            config,
            max_lines,
            lines: Vec::with_capacity(max_lines.min(4096)),
            by_tag: HashMap::with_capacity(max_lines.min(4096)),
            stamp: 0,
            counters: StoreCounters::default(),
        })
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    pub fn counters(&self) -> StoreCounters {
        self.counters
    }

    pub fn occupied_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn entry_count(&self) -> usize {
        self.lines.iter().map(|l| l.entries.len()).sum()
    }

    /// Resident line tags in ascending order; diagnostic surface used by the
    /// eviction tests.
    pub fn resident_tags(&self) -> Vec<MortonKey> {
        let mut tags: Vec<MortonKey> = self.lines.iter().map(|l| l.tag).collect();
        tags.sort();
        tags
    }

    /// Line contents (entries oldest first); diagnostic surface.
    pub fn snapshot(&self) -> Vec<(MortonKey, Vec<StoreEntry>)> {
        let cap = self.config.entries_per_line;
        let mut out: Vec<(MortonKey, Vec<StoreEntry>)> = self
            .lines
            .iter()
            .map(|l| {
                let mut recent: Vec<StoreEntry> = l.iter_recent(cap).copied().collect();
                recent.reverse();
                (l.tag, recent)
            })
            .collect();
        out.sort_by_key(|(tag, _)| *tag);
        out
    }

    fn key(&self, p: SpaceTimePoint) -> Option<MortonKey> {
        // A point outside the representable grid cannot match any tag.
        self.config.quant.key_of(p).ok()
    }

    fn touch(&mut self, line: usize) {
        self.stamp += 1;
        self.lines[line].last_ref = self.stamp;
    }

    /// Approximate nearest neighbor: on a tag match, the closest no-collision
    /// entry of the line with `node_t < p.t` (unweighted 3D distance, ties
    /// won by the more recently inserted entry). Collision entries never name
    /// tree nodes, so they are not neighbor candidates. Misses and lines with
    /// no eligible entry answer `None`. Any tag match refreshes the line.
    pub fn nn_lookup(&mut self, p: SpaceTimePoint) -> Option<NodeRef> {
        self.counters.nn_lookups += 1;
        let line = match self.key(p).and_then(|key| self.by_tag.get(&key.raw())) {
            Some(&line) => line,
            None => {
                self.counters.nn_miss_no_line += 1;
                return None;
            }
        };
        self.touch(line);
        let cap = self.config.entries_per_line;
        let mut best: Option<(f64, NodeRef)> = None;
        for e in self.lines[line].iter_recent(cap) {
            if e.point.t >= p.t || e.state != CollisionState::NoCollision {
                continue;
            }
            let (dx, dy, dt) = (e.point.x - p.x, e.point.y - p.y, e.point.t - p.t);
            let d2 = dx * dx + dy * dy + dt * dt;
            if best.is_none_or(|(bd2, _)| d2 < bd2) {
                best = Some((d2, e.node));
            }
        }
        match best {
            Some((_, node)) => {
                self.counters.nn_hits += 1;
                Some(node)
            }
            None => {
                self.counters.nn_miss_no_entry += 1;
                None
            }
        }
    }

    /// Memoized collision check: `Miss` when no line matches, `Collision` if
    /// any collision was ever recorded for the cell, else `NoCollision`.
    pub fn collision_lookup(&mut self, p: SpaceTimePoint) -> CollisionState {
        self.counters.col_lookups += 1;
        let Some(key) = self.key(p) else {
            return CollisionState::Miss;
        };
        let Some(&line) = self.by_tag.get(&key.raw()) else {
            return CollisionState::Miss;
        };
        self.touch(line);
        self.counters.col_hits += 1;
        if self.lines[line].saw_collision {
            CollisionState::Collision
        } else {
            self.counters.col_no_collision_hits += 1;
            CollisionState::NoCollision
        }
    }

    /// Records a resolved state for `p`. A no-collision update appends into
    /// the matching line's ring, overwriting the oldest entry when full; a
    /// collision update marks the line instead of taking a slot. A tag miss
    /// allocates a line, evicting the least recently referenced one if the
    /// store is full.
    pub fn update(&mut self, p: SpaceTimePoint, state: CollisionState, node: NodeRef) {
        assert!(
            state != CollisionState::Miss,
            "only resolved states can be stored"
        );
        self.counters.updates += 1;
        if self.max_lines == 0 {
            return;
        }
        let Some(key) = self.key(p) else {
            return;
        };
        let entry = StoreEntry {
            state,
            node,
            point: p,
        };
        let cap = self.config.entries_per_line;
        if let Some(&line) = self.by_tag.get(&key.raw()) {
            self.touch(line);
            self.lines[line].push(entry, cap);
            return;
        }
        let line = if self.lines.len() < self.max_lines {
            self.lines.push(StoreLine {
                tag: key,
                entries: Vec::with_capacity(cap),
                next: 0,
                saw_collision: false,
                last_ref: 0,
            });
            self.lines.len() - 1
        } else {
            let victim = self
                .lines
                .iter()
                .enumerate()
                .min_by_key(|(_, l)| l.last_ref)
                .map(|(i, _)| i)
                .expect("store has lines");
            let old_tag = self.lines[victim].tag.raw();
            self.by_tag.remove(&old_tag);
            let slot = &mut self.lines[victim];
            slot.tag = key;
            slot.entries.clear();
            slot.next = 0;
            slot.saw_collision = false;
            victim
        };
        self.by_tag.insert(key.raw(), line);
        self.touch(line);
        self.lines[line].push(entry, cap);
    }
}
