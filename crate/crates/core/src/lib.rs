//! Exact hitting-time and return-time statistics for finite measure-preserving
//! systems, and a constructive realization of concave hitting-time limits.
//!
//! The crate is organised bottom-up:
//!
//! * [`distributions`]: exact rationals, step CDFs, piecewise-linear targets
//!   and distances between distribution functions.
//! * [`cyclic`]: hitting/return statistics of a marked subset of a cycle.
//! * [`conditions`]: structural checkers for hitting CDFs and their limits.
//! * [`stamp`]: rational step CDF → periodic system, and back.
//! * [`rationalize`]: approximation of concave targets by rational step CDFs.
//! * [`odometer`]: tower stamping on the dyadic odometer and the full
//!   realization pipeline.
//! * [`montecarlo`]: stochastic cross-checks of hitting-time laws.
//! * [`json`]: file formats shared with the command-line tool.

pub mod conditions;
pub mod cyclic;
pub mod distributions;
pub mod json;
pub mod montecarlo;
pub mod odometer;
pub mod rationalize;
pub mod stamp;

mod error;

pub use error::{Error, Result};

pub use conditions::{CReport, Condition, RationalF, Violation};
pub use cyclic::{CyclicSystem, HittingHistogram, KacTown, Skyscraper};
pub use distributions::{Cdf, Rational, StepCdf, TargetF};
pub use odometer::{RealizationStage, RealizationTrace, TowerStamping};
pub use stamp::{Stamp, StampParams};
