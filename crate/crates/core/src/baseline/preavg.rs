use super::{flat_record, with_inputs, TuningInputs};
use crate::error::{Error, Result};
use crate::estimate::{EstimateRecord, EstimatorKind};
use crate::realized;
use crate::series::TickSeries;

const PHI1: f64 = 1.0;
const PHI2: f64 = 1.0 / 12.0;
const THETA_SCALE: f64 = 4.777;

/// Pre-averaging with an even window of `k` observations and window
/// constant `theta` (`k ~ theta sqrt(N_1)`).
pub fn with_window(series: &TickSeries, k: usize, theta: f64) -> Result<f64> {
    let n = series.n_increments();
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::param(format!("pre-averaging window {k} must be even and >= 2")));
    }
    if k > n {
        return Err(Error::numeric(format!(
            "pre-averaging window {k} exceeds the {n} available increments"
        )));
    }
    let y = series.prices();
    let half = k / 2;
    let kf = k as f64;
    // dYhat_i = (1/k) sum_{j<k/2} (Y_{i+k/2+j} - Y_{i+j}), i = 0..=N-k+1
    let sum_sq = realized::pairwise_sum_by(0, n - k + 2, &|i| {
        let mut acc = 0.0;
        for j in 0..half {
            acc += y[i + half + j] - y[i + j];
        }
        let d = acc / kf;
        d * d
    });
    let nf = n as f64;
    Ok(sum_sq / (theta * PHI2 * nf.sqrt())
        - PHI1 * realized::rv(series) / (2.0 * theta * theta * PHI2 * nf))
}

pub(super) fn estimate(series: &TickSeries, inputs: &TuningInputs) -> Result<EstimateRecord> {
    let who = EstimatorKind::PreAveraging;
    if inputs.is_flat() {
        return flat_record(who, inputs);
    }
    inputs.check_tunable(who)?;
    let theta = THETA_SCALE * inputs.noise_var.sqrt() / inputs.sparse_rv.sqrt();
    let root_n = (inputs.n_obs as f64).sqrt();
    let k = (2 * (root_n * theta / 2.0).round() as usize).max(2);
    // normalise with the window actually used
    let theta_eff = k as f64 / root_n;
    let value = with_window(series, k, theta_eff)?;
    Ok(with_inputs(EstimateRecord::new(who, value)?, inputs)
        .tune("theta", theta)
        .tune("k_n", k as f64)
        .tune("theta_eff", theta_eff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn window_two_by_hand() {
        let y = [0.0, 0.2, -0.1, 0.3, 0.25];
        let s = TickSeries::regular(y.to_vec()).unwrap();
        let n = 4.0f64;
        let theta = 0.7;
        // k = 2: dYhat_i = (Y_{i+1} - Y_i) / 2 for i = 0..=3
        let sum_sq: f64 = (0..4).map(|i| ((y[i + 1] - y[i]) / 2.0).powi(2)).sum();
        let rv: f64 = y.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
        let expect = sum_sq / (theta * PHI2 * n.sqrt()) - rv / (2.0 * theta * theta * PHI2 * n);
        assert_relative_eq!(with_window(&s, 2, theta).unwrap(), expect, max_relative = 1e-13);
    }

    #[test]
    fn rejects_bad_windows() {
        let s = TickSeries::regular(vec![0.0, 0.1, 0.3, 0.2]).unwrap();
        assert!(with_window(&s, 3, 1.0).is_err());
        assert!(with_window(&s, 4, 1.0).is_err());
    }

    #[test]
    fn flat_series_is_zero() {
        let s = TickSeries::regular(vec![2.0; 30]).unwrap();
        assert_eq!(super::super::preaveraging(&s).unwrap().value, 0.0);
    }
}
