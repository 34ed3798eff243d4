//! Automatic-alarm earthquake predictions and the significance tests used to judge them.
//!
//! The crate builds alarm sets from a catalog (every event above a threshold
//! raises an alarm over a spherical cap and a fixed time window), scores any
//! deterministic alarm set against observed seismicity, and computes
//! significance under several null models: permuted event times, uniform
//! times, homogeneous and cell-wise Poisson seismicity, binomial and
//! Poisson-binomial success counts, and randomized cell predictions for the
//! R-score.

pub mod alarm;
pub mod catalog;
pub mod decluster;
pub mod error;
pub mod geo;
pub mod nullmodels;
pub mod real;
pub mod rng;
pub mod sigtests;
pub mod time;

pub use error::{Error, Result};
pub use real::Real;

/// Epicenter in `f64` degrees.
pub type GeoPoint = geo::Point<f64>;
/// Single-precision point for the generic geometry kernels.
pub type GeoPointF32 = geo::Point<f32>;
/// Exact probabilities from enumeration.
pub type ExactProb = num_rational::Ratio<u64>;

pub use alarm::{AlarmConfig, AlarmSet, PredictorMode, ScoreSummary};
pub use catalog::{Catalog, CatalogFormat, Event, MagnitudeSelector, StudyVolume};
pub use time::{Instant, TimeWindow};
