//! Deterministic workbench for optical-flow divergence landing control.
//!
//! The crate simulates a vertical-axis vehicle that regulates its descent
//! using the divergence of the optical flow field, evolves neural
//! controllers for it with a mutation-only NSGA-II loop, and provides the
//! analysis tools (Pareto metrics, robustness validation, steady-state
//! response maps) used to compare the evolved policies with hand-tuned
//! proportional baselines.
//!
//! Everything is seedable: a run is fully determined by its master seed
//! and configuration, independent of worker-thread count.

pub mod archive;
pub mod controller;
pub mod episode;
pub mod error;
pub mod evolution;
pub mod flow_geometry;
pub mod genome;
pub mod network;
pub mod nsga;
pub mod pareto;
pub mod plant;
pub mod rng;
pub mod sensor;
pub mod sim_params;
pub mod ssmap;
pub mod validation;

pub use error::{Error, Result};
