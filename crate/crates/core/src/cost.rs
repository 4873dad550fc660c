//! Operation counting and the modeled instruction/cycle accounting.
//!
//! Planner runs accumulate raw per-category counts; the cost model maps them
//! to modeled dynamic operations and cycles. Software store operations cost a
//! configurable number of operations each (they scan and compare codes in
//! software); hardware store operations cost a single operation plus a fixed
//! lookup latency in cycles. Everything else is charged per unit of work at
//! one cycle per operation times the configured CPI.

use crate::memostore::StoreBackend;
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CostError {
    #[error("cost model parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid cost model: {0}")]
    Invalid(String),
}

/// Raw work counts for one planner run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounters {
    /// Random samples drawn.
    pub samples: u64,
    /// Steer operations performed.
    pub steers: u64,
    /// Exact nearest-neighbor queries issued.
    pub nn_queries: u64,
    /// kd-tree nodes examined across all exact queries.
    pub nn_visits: u64,
    /// (obstacle, sample point) distance evaluations in exact collision
    /// checks, early exits included.
    pub collision_samples: u64,
    pub store_nn_lookups: u64,
    pub store_col_lookups: u64,
    pub store_updates: u64,
}

impl OpCounters {
    /// Total store operations of all three kinds.
    pub fn store_ops(&self) -> u64 {
        self.store_nn_lookups + self.store_col_lookups + self.store_updates
    }
}

/// Per-category operation costs. Deserializable so a benchmark run can swap
/// in a different model from a TOML file.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    /// Ops per random sample drawn.
    pub sample_ops: u64,
    /// Ops per steer.
    pub steer_ops: u64,
    /// Ops per kd-tree node visited during exact nearest-neighbor search.
    pub nn_visit_ops: u64,
    /// Ops per obstacle distance evaluation during exact collision checks.
    pub collision_sample_ops: u64,
    /// Ops per software store lookup or update.
    pub store_sw_op_ops: u64,
    /// Ops per hardware store lookup or update.
    pub store_hw_op_ops: u64,
    /// Cycles per hardware store lookup or update.
    pub store_hw_latency_cycles: u64,
    /// Cycles per op for everything that is not a hardware store operation.
    pub cpi: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            sample_ops: 4,
            steer_ops: 8,
            nn_visit_ops: 12,
            collision_sample_ops: 10,
            store_sw_op_ops: 40,
            store_hw_op_ops: 1,
            store_hw_latency_cycles: 2,
            cpi: 1.0,
        }
    }
}

/// Modeled totals for one run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ModeledCost {
    pub total_ops: u64,
    pub store_ops: u64,
    pub cycles: f64,
}

impl CostModel {
    pub fn from_toml_str(text: &str) -> Result<Self, CostError> {
        let model: CostModel = toml::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn from_file<P: AsRef<Path>>(path: P) -> Result<Self, CostError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), CostError> {
        if !(self.cpi.is_finite() && self.cpi > 0.0) {
            return Err(CostError::Invalid(format!(
                "cpi must be positive, got {}",
                self.cpi
            )));
        }
        Ok(())
    }

    /// Ops charged for one store operation under the given backend.
    pub fn store_op_ops(&self, backend: StoreBackend) -> u64 {
        match backend {
            StoreBackend::Software => self.store_sw_op_ops,
            StoreBackend::Hardware => self.store_hw_op_ops,
        }
    }

    /// Maps raw counts to modeled ops and cycles. `backend` is `None` for
    /// runs without a store; such runs must carry zero store counts.
    pub fn modeled(&self, c: &OpCounters, backend: Option<StoreBackend>) -> ModeledCost {
        let base_ops = c.samples * self.sample_ops
            + c.steers * self.steer_ops
            + c.nn_visits * self.nn_visit_ops
            + c.collision_samples * self.collision_sample_ops;
        let store_count = c.store_ops();
        let (store_ops, store_cycles) = match backend {
            Some(StoreBackend::Software) => {
                let ops = store_count * self.store_sw_op_ops;
                (ops, ops as f64 * self.cpi)
            }
            Some(StoreBackend::Hardware) => (
                store_count * self.store_hw_op_ops,
                (store_count * self.store_hw_latency_cycles) as f64,
            ),
            None => {
                debug_assert_eq!(store_count, 0);
                (0, 0.0)
            }
        };
        ModeledCost {
            total_ops: base_ops + store_ops,
            store_ops,
            cycles: base_ops as f64 * self.cpi + store_cycles,
        }
    }
}
