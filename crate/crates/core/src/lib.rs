//! Integrated-volatility estimation for log-prices observed with additive
//! microstructure noise at (possibly endogenous) sampling times.
//!
//! The crate is organised around a few layers:
//!
//! * [`series`] and [`realized`]: the tick container and model-free realized
//!   measures (RV, tricity, quarticity, noise variance, sparse RV).
//! * [`lama`]: the sub-grid local-averaging / moving-average estimators with
//!   the block-derivative bias correction.
//! * [`baseline`]: TSRV, MSRV, the Parzen realized kernel and pre-averaging,
//!   each with its plug-in tuning rule.
//! * [`simulate`]: Brownian and Heston bridges, hitting-time and Poisson
//!   sampling schemes, noise injection and ground truth.
//! * [`harness`] and [`distribution`]: the seeded Monte Carlo driver and the
//!   RMSE / bias / normality summaries built on top of it.

pub mod baseline;
pub mod distribution;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod io;
pub mod lama;
mod quad;
pub mod realized;
pub mod rng;
pub mod series;
pub mod simulate;

pub use error::{Error, Result};
pub use estimate::{run_estimator, EstimateRecord, EstimatorKind, EstimatorSettings};
pub use harness::{run_design, BenchmarkReport, EstimatorRow, PathRecord, RunOptions};
pub use lama::GridPlan;
pub use series::TickSeries;
pub use simulate::{Design, DesignConfig, LatentPath, NoiseSpec};
