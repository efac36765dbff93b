use super::{flat_record, lagged_rv_total, with_inputs, TuningInputs};
use crate::error::Result;
use crate::estimate::{EstimateRecord, EstimatorKind};
use crate::realized;
use crate::series::TickSeries;

/// Small-sample adjusted TSRV on `k` non-overlapping sub-grids.
pub fn with_subgrids(series: &TickSeries, k: usize) -> f64 {
    let y = series.prices();
    let kf = k as f64;
    let avg = lagged_rv_total(y, k) / kf;
    (avg - realized::rv(series) / kf) / (1.0 - 1.0 / kf)
}

pub(super) fn estimate(series: &TickSeries, inputs: &TuningInputs) -> Result<EstimateRecord> {
    let who = EstimatorKind::Tsrv;
    if inputs.is_flat() {
        return flat_record(who, inputs);
    }
    inputs.check_tunable(who)?;
    let n = inputs.n_obs as f64;
    let c = (12.0 * inputs.noise_var.powi(2) / inputs.sparse_rv.powi(2)).cbrt();
    let k = ((c * n.powf(2.0 / 3.0)).round() as usize).clamp(2, inputs.n_obs / 2);
    let value = with_subgrids(series, k);
    Ok(with_inputs(EstimateRecord::new(who, value)?, inputs)
        .tune("K", k as f64)
        .tune("c_tsrv", c))
}
