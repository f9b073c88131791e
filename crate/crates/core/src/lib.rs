//! Web proxy cache laboratory.
//!
//! The crate is split along the lines of a measurement campaign:
//!
//! - [`trace`] turns Squid access logs or synthetic Zipf workloads into a
//!   canonical stream of [`TraceRecord`]s.
//! - [`analytics`] derives the empirical observables of a stream: the ranked
//!   popularity list, the special points `M` and `p`, the Zipf exponent, the
//!   cacheable fraction, renewal observables and replay lifetimes.
//! - [`model`] evaluates the closed-form and integral cache models (Zipf
//!   normalization, hit-ratio bounds, the steady-state integral with
//!   rank-dependent change rates, kernel sizing).
//! - [`simcache`] replays a stream through an LRU baseline or the
//!   kernel/accessory/managing construction and measures `H`, `H^B`,
//!   `E(S)`, `E(C)` and residence times.

pub mod analytics;
pub mod error;
pub mod model;
pub mod simcache;
pub mod trace;

pub use analytics::{LifetimeStats, MeasurementSummary, PopularityProfile, RenewalObservables, Window};
pub use error::{Error, Result};
pub use model::{RenewalModel, WolmanParams, ZipfLaw};
pub use simcache::{CacheConfig, Policy, SimulationResult, Simulator};
pub use trace::{GroundTruth, SyntheticWorkloadSpec, TraceRecord};

/// Seconds in one day; every rate is kept per day internally.
pub const SECONDS_PER_DAY: f64 = 86_400.0;
