//! Competitor estimators with their plug-in tuning rules: two-scales RV,
//! multi-scale RV, the Parzen realized kernel and pre-averaging.
//!
//! Every tuning rule is driven by two data-dependent quantities: the noise
//! variance estimate `[Y,Y]_1 / (2 N_1)` from the full series and a sparse
//! RV, by default at a five-minute interval.

mod kernel;
mod msrv;
mod preavg;
mod tsrv;

pub use kernel::{parzen, parzen_constants, KernelConstants};
pub use msrv::msrv_weights;

use crate::error::{Error, Result};
use crate::estimate::{EstimateRecord, EstimatorKind};
use crate::realized::{self, DEFAULT_SPARSE_INTERVAL};
use crate::series::TickSeries;

/// Data-driven inputs shared by the tuning rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningInputs {
    pub n_obs: usize,
    pub rv: f64,
    pub noise_var: f64,
    pub sparse_rv: f64,
}

impl TuningInputs {
    pub fn from_series(series: &TickSeries, sparse_interval: f64) -> Result<Self> {
        let rv = realized::rv(series);
        let n_obs = series.n_increments();
        Ok(Self {
            n_obs,
            rv,
            noise_var: rv / (2.0 * n_obs as f64),
            sparse_rv: realized::sparse_rv(series, sparse_interval)?,
        })
    }

    /// A constant price path: every estimator is identically zero.
    fn is_flat(&self) -> bool {
        self.rv == 0.0
    }

    fn check_tunable(&self, who: EstimatorKind) -> Result<()> {
        if self.sparse_rv > 0.0 {
            Ok(())
        } else {
            Err(Error::numeric(format!(
                "{who}: sparse RV is {} so the bandwidth cannot be tuned",
                self.sparse_rv
            )))
        }
    }
}

/// Baseline estimators sharing one sparse-RV interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baselines {
    pub sparse_interval: f64,
}

impl Default for Baselines {
    fn default() -> Self {
        Self {
            sparse_interval: DEFAULT_SPARSE_INTERVAL,
        }
    }
}

impl Baselines {
    pub fn new(sparse_interval: f64) -> Self {
        Self { sparse_interval }
    }

    fn inputs(&self, series: &TickSeries, min_obs: usize, who: EstimatorKind) -> Result<TuningInputs> {
        if series.n_increments() < min_obs {
            return Err(Error::InvalidSeries(format!(
                "{who} needs at least {min_obs} increments, got {}",
                series.n_increments()
            )));
        }
        TuningInputs::from_series(series, self.sparse_interval)
    }

    pub fn tsrv(&self, series: &TickSeries) -> Result<EstimateRecord> {
        let inputs = self.inputs(series, 4, EstimatorKind::Tsrv)?;
        tsrv::estimate(series, &inputs)
    }

    pub fn msrv(&self, series: &TickSeries) -> Result<EstimateRecord> {
        let inputs = self.inputs(series, 6, EstimatorKind::Msrv)?;
        msrv::estimate(series, &inputs)
    }

    pub fn realized_kernel(&self, series: &TickSeries) -> Result<EstimateRecord> {
        let inputs = self.inputs(series, 4, EstimatorKind::Kernel)?;
        kernel::estimate(series, &inputs)
    }

    pub fn preaveraging(&self, series: &TickSeries) -> Result<EstimateRecord> {
        let inputs = self.inputs(series, 2, EstimatorKind::PreAveraging)?;
        preavg::estimate(series, &inputs)
    }
}

fn flat_record(who: EstimatorKind, inputs: &TuningInputs) -> Result<EstimateRecord> {
    Ok(EstimateRecord::new(who, 0.0)?
        .diag("flat_series", 1.0)
        .diag("noise_var", inputs.noise_var)
        .diag("sparse_rv", inputs.sparse_rv))
}

fn with_inputs(record: EstimateRecord, inputs: &TuningInputs) -> EstimateRecord {
    record
        .diag("noise_var", inputs.noise_var)
        .diag("sparse_rv", inputs.sparse_rv)
}

/// `sum_{i=lag}^{N} (Y_i - Y_{i-lag})^2`: the RVs of all `lag` interleaved
/// sub-grids added together.
pub(crate) fn lagged_rv_total(prices: &[f64], lag: usize) -> f64 {
    realized::pairwise_sum_by(lag, prices.len(), &|i| {
        let d = prices[i] - prices[i - lag];
        d * d
    })
}

pub fn tsrv(series: &TickSeries) -> Result<EstimateRecord> {
    Baselines::default().tsrv(series)
}

pub fn msrv(series: &TickSeries) -> Result<EstimateRecord> {
    Baselines::default().msrv(series)
}

pub fn realized_kernel(series: &TickSeries) -> Result<EstimateRecord> {
    Baselines::default().realized_kernel(series)
}

pub fn preaveraging(series: &TickSeries) -> Result<EstimateRecord> {
    Baselines::default().preaveraging(series)
}

pub use kernel::with_bandwidth as realized_kernel_with_bandwidth;
pub use msrv::with_scales as msrv_with_scales;
pub use preavg::with_window as preaveraging_with_window;
pub use tsrv::with_subgrids as tsrv_with_subgrids;
