use super::{flat_record, lagged_rv_total, with_inputs, TuningInputs};
use crate::error::{Error, Result};
use crate::estimate::{EstimateRecord, EstimatorKind};
use crate::series::TickSeries;

/// `lambda_1..=lambda_K` for `h(x) = 12x - 6`, including the end-weight
/// adjustment `+-((N_1 + 1) / 2)^{-1}` on the first two weights.
pub fn msrv_weights(k: usize, n_obs: usize) -> Vec<f64> {
    let kf = k as f64;
    let mut w: Vec<f64> = (1..=k)
        .map(|i| {
            let x = i as f64 / kf;
            (12.0 * x - 6.0) * i as f64 / (kf * kf) - 12.0 * i as f64 / (2.0 * kf * kf * kf)
        })
        .collect();
    let adj = 2.0 / (n_obs as f64 + 1.0);
    if k >= 2 {
        w[0] += adj;
        w[1] -= adj;
    }
    w
}

/// MSRV with `k` scales: `sum_j lambda_j (1/j) sum_{sub-grids} [Y,Y]^{(j)}`.
pub fn with_scales(series: &TickSeries, k: usize) -> f64 {
    let y = series.prices();
    msrv_weights(k, series.n_increments())
        .iter()
        .enumerate()
        .map(|(i, lam)| {
            let j = i + 1;
            lam * lagged_rv_total(y, j) / j as f64
        })
        .sum()
}

/// `c = ((T3 + T4 + sqrt((T3 + T4)^2 + 12 T1 T2)) / (2 T2))^{1/2}`.
///
/// `T2` uses the squared sparse RV (an integrated-quarticity proxy under
/// constant volatility) so that `c` grows with the noise-to-signal ratio.
pub(super) fn tuning_constant(noise_var: f64, sparse_rv: f64) -> f64 {
    let t1 = 48.0 * noise_var * noise_var;
    let t2 = 52.0 * sparse_rv * sparse_rv / 35.0;
    let t3 = 24.0 * noise_var * noise_var / 5.0;
    let t4 = 48.0 * sparse_rv * noise_var / 5.0;
    let s = t3 + t4;
    ((s + (s * s + 12.0 * t1 * t2).sqrt()) / (2.0 * t2)).sqrt()
}

pub(super) fn estimate(series: &TickSeries, inputs: &TuningInputs) -> Result<EstimateRecord> {
    let who = EstimatorKind::Msrv;
    if inputs.is_flat() {
        return flat_record(who, inputs);
    }
    inputs.check_tunable(who)?;
    let max_k = inputs.n_obs / 2;
    if max_k < 3 {
        return Err(Error::InvalidSeries(format!(
            "MSRV needs at least 6 increments, got {}",
            inputs.n_obs
        )));
    }
    let c = tuning_constant(inputs.noise_var, inputs.sparse_rv);
    let k = ((c * (inputs.n_obs as f64).sqrt()).round() as usize).clamp(3, max_k);
    let value = with_scales(series, k);
    Ok(with_inputs(EstimateRecord::new(who, value)?, inputs)
        .tune("K", k as f64)
        .tune("c_msrv", c))
}
