//! Cell-size analysis and duty-cycle simulation for geographic sensor-network
//! protocols.
//!
//! Sensor networks that divide the field into cells and keep one node awake
//! per cell trade cell size against connectivity: active nodes of adjacent
//! cells must stay within radio range of each other (requirement I) and of
//! every node in their own cell (requirement II). This crate computes the
//! largest cell that satisfies both requirements for several protocol
//! variants and cell shapes, bounds what any variant could achieve, and
//! simulates the duty-cycling protocol on constructible lattices so the
//! computed sizes can be checked against observed network lifetime.
//!
//! Modules:
//! - [`geometry`]: cell shapes, exact metrics, Monte Carlo distance/volume oracles
//! - [`bounds`]: per-protocol maximum cell sizes and theoretical ceilings
//! - [`partition`]: concrete cell lattices over a bounded field, with audits
//! - [`protocol`]: the per-node duty-cycle state machine and election rules
//! - [`sim`]: field-level simulation connecting cell size to lifetime
//! - [`config`] and [`cli`]: run configuration files and the command-line front end
//!
//! The `examples/` directory is the guided tour; each example exercises one
//! capability end to end.

pub mod bounds;
pub mod cli;
pub mod config;
pub mod geometry;
pub mod partition;
pub mod point;
pub mod protocol;
pub mod sim;


pub use bounds::{
    lemma1_field_size, lemma2_check, lemma2_decrement_bound, lifetime_table, max_cell, table1,
    theoretical_upper_bound, ConstraintReport, Protocol, SubcellRegime, TheoremBound,
};

pub use geometry::{
    lens_measure, max_distance_oracle, shape_metrics, sphere_chain_union_volume, CellShape,
    Dimension, ShapeKind, ShapeMetrics,
};

pub use partition::{
    build_partition, hgaf_worst_case_grid_search, rotation_position, sliding_offset_for,
    CellIndex, Field, Located, Partition, PartitionScheme, SubcellPos,
};
pub use cli::{run_from, CliOutcome};
pub use config::{ConfigError, KeyDoc, RunConfig, KEY_DOCS};
pub use point::Point;
pub use protocol::{
    elect, rank, step, step_gated, DiscoveryMessage, NodeRuntime, NodeState, ProtocolParams,
};
pub use sim::{
    compare_lifetimes, deploy, run, series_csv, ComparisonReport, SimConfig, SimReport,
};


/// Version tag stamped into every JSON report this crate emits.
pub const SCHEMA_VERSION: u32 = 1;
