use std::sync::OnceLock;

use super::{flat_record, with_inputs, TuningInputs};
use crate::error::{Error, Result};
use crate::estimate::{EstimateRecord, EstimatorKind};
use crate::quad::adaptive_simpson;
use crate::realized;
use crate::series::TickSeries;

const QUAD_TOL: f64 = 1e-10;

/// Integrals of the kernel that enter the bandwidth rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    /// `int_0^1 f(x)^2 dx`
    pub f00: f64,
    /// `int_0^1 f(x) f''(x) dx`
    pub f02: f64,
    /// `int_0^1 f(x) f'''(x) dx`
    pub f04: f64,
    /// `f'''(0+)`
    pub fppp0: f64,
}

fn parzen_unchecked(x: f64) -> f64 {
    if x <= 0.5 {
        1.0 - 6.0 * x * x + 6.0 * x * x * x
    } else {
        2.0 * (1.0 - x).powi(3)
    }
}

/// The Parzen kernel on `[0, 1]`.
pub fn parzen(x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(parzen_unchecked(x))
    } else {
        Err(Error::param(format!("Parzen kernel argument {x} outside [0, 1]")))
    }
}

fn parzen_d2(x: f64) -> f64 {
    if x <= 0.5 {
        -12.0 + 36.0 * x
    } else {
        12.0 * (1.0 - x)
    }
}

fn parzen_d3(x: f64) -> f64 {
    if x < 0.5 {
        36.0
    } else {
        -12.0
    }
}

/// Integrates each Parzen piece separately so the quadrature never straddles
/// the kink at 1/2.
fn piecewise(g: impl Fn(f64) -> f64 + Copy) -> f64 {
    adaptive_simpson(g, 0.0, 0.5, QUAD_TOL / 2.0)
        + adaptive_simpson(g, 0.5, 1.0, QUAD_TOL / 2.0)
}

/// Computed once and cached.
pub fn parzen_constants() -> KernelConstants {
    static CONSTANTS: OnceLock<KernelConstants> = OnceLock::new();
    *CONSTANTS.get_or_init(|| {
        // the third derivative jumps at 1/2, so its pieces are integrated on
        // open subintervals via explicit branch functions
        let f04 = adaptive_simpson(|x| parzen_unchecked(x) * 36.0, 0.0, 0.5, QUAD_TOL / 2.0)
            + adaptive_simpson(|x| 2.0 * (1.0 - x).powi(3) * -12.0, 0.5, 1.0, QUAD_TOL / 2.0);
        KernelConstants {
            f00: piecewise(|x| parzen_unchecked(x).powi(2)),
            f02: piecewise(|x| parzen_unchecked(x) * parzen_d2(x)),
            f04,
            fppp0: parzen_d3(0.0),
        }
    })
}

impl KernelConstants {
    /// The bandwidth constant multiplying `(noise_var / sparse RV)^{1/2}`.
    pub fn bandwidth_factor(&self) -> f64 {
        let inner = -self.f02
            + (self.f02 * self.f02 + 3.0 * self.f00 * (self.fppp0 + self.f04)).sqrt();
        (inner / self.f00).sqrt()
    }
}

/// Realized kernel with bandwidth `h`:
/// `[Y,Y] + sum_{s=1}^{h} f((s-1)/h) sum_i (dY_i dY_{i-s} + dY_i dY_{i+s})`,
/// dropping out-of-range terms.
pub fn with_bandwidth(series: &TickSeries, h: usize) -> f64 {
    let dy = series.increments();
    let n = dy.len();
    let mut value = realized::rv(series);
    for s in 1..=h.min(n.saturating_sub(1)) {
        let gamma = realized::pairwise_sum_by(s, n, &|i| dy[i] * dy[i - s]);
        value += parzen_unchecked((s - 1) as f64 / h as f64) * 2.0 * gamma;
    }
    value
}

pub(super) fn estimate(series: &TickSeries, inputs: &TuningInputs) -> Result<EstimateRecord> {
    let who = EstimatorKind::Kernel;
    if inputs.is_flat() {
        return flat_record(who, inputs);
    }
    inputs.check_tunable(who)?;
    let consts = parzen_constants();
    let c = (inputs.noise_var / inputs.sparse_rv).sqrt() * consts.bandwidth_factor();
    let h = ((c * (inputs.n_obs as f64).sqrt()).round() as usize).clamp(1, inputs.n_obs - 1);
    let value = with_bandwidth(series, h);
    Ok(with_inputs(EstimateRecord::new(who, value)?, inputs)
        .tune("H", h as f64)
        .tune("c_ker", c))
}
