//! Model-free realized measures shared by every estimator.

use crate::error::{Error, Result};
use crate::series::TickSeries;

/// Five minutes of a 390-minute (6.5 hour) trading day mapped onto `[0, 1]`.
pub const DEFAULT_SPARSE_INTERVAL: f64 = 5.0 / 390.0;

const PAIRWISE_BLOCK: usize = 64;

/// Pairwise summation of `f(lo..hi)`.
pub(crate) fn pairwise_sum_by(lo: usize, hi: usize, f: &impl Fn(usize) -> f64) -> f64 {
    if hi - lo <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    } else {
        let mid = lo + (hi - lo) / 2;
        pairwise_sum_by(lo, mid, f) + pairwise_sum_by(mid, hi, f)
    }
}

pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(0, values.len(), &|i| values[i])
}

fn increment_power_sum(prices: &[f64], exponent: i32) -> f64 {
    pairwise_sum_by(1, prices.len(), &|i| (prices[i] - prices[i - 1]).powi(exponent))
}

/// Realized volatility `[Y, Y]_1`: the sum of squared increments.
pub fn rv(series: &TickSeries) -> f64 {
    increment_power_sum(series.prices(), 2)
}

/// Sum of cubed (tricity, signed) or fourth-power (quarticity) increments.
pub fn power_variation(series: &TickSeries, exponent: u32) -> Result<f64> {
    match exponent {
        3 | 4 => Ok(increment_power_sum(series.prices(), exponent as i32)),
        other => Err(Error::param(format!(
            "power variation exponent must be 3 or 4, got {other}"
        ))),
    }
}

/// `[Y, Y]_1 / (2 N_1)`, the moment estimator of the noise variance.
pub fn noise_var_hat(series: &TickSeries) -> f64 {
    rv(series) / (2.0 * series.n_increments() as f64)
}

/// Indices kept by previous-tick subsampling on the grid `{0, interval, 2 interval, ...}`.
///
/// Observation `i` is kept when some grid point `g` satisfies
/// `t_i <= g < t_{i+1}`; the first and last observations are always kept.
pub fn sparse_indices(series: &TickSeries, interval: f64) -> Result<Vec<usize>> {
    if !(interval > 0.0 && interval < 1.0) {
        return Err(Error::param(format!(
            "sparse interval must lie in (0, 1), got {interval}"
        )));
    }
    let t = series.times();
    let last = t.len() - 1;
    let mut keep = vec![0];
    for i in 1..last {
        // first grid multiple at or after t_i; the small shift absorbs t_i/interval
        // landing a rounding error above an integer
        let m = (t[i] / interval - 1e-9).ceil();
        if m * interval < t[i + 1] {
            keep.push(i);
        }
    }
    keep.push(last);
    if keep.len() < 2 {
        return Err(Error::numeric("sparse subsample has fewer than 2 points"));
    }
    Ok(keep)
}

/// RV of the previous-tick subsample at the given interval (fraction of `[0, 1]`).
pub fn sparse_rv(series: &TickSeries, interval: f64) -> Result<f64> {
    let idx = sparse_indices(series, interval)?;
    let y = series.prices();
    Ok(pairwise_sum_by(1, idx.len(), &|j| {
        let d = y[idx[j]] - y[idx[j - 1]];
        d * d
    }))
}
