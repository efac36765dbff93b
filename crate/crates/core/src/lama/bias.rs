//! Block-derivative estimates of `sigma^2` and of the tricity density, and
//! the resulting estimate of the endogeneity bias.

use super::subgrid::LocalAverager;
use super::GridPlan;
use crate::error::{Error, Result};
use crate::series::TickSeries;

/// Floor applied to per-block `f2` estimates (squared log-price units).
pub const F2_FLOOR: f64 = 1e-10;

/// Per-block quantities behind the bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasDiagnostics {
    /// Blocks whose `f2` estimate was raised to the floor.
    pub clamped_blocks: usize,
    pub block_count: usize,
    /// Tick indices of the block boundaries `tau_0 < ... < tau_m`.
    pub boundaries: Vec<usize>,
    /// Block boundary times.
    pub tau: Vec<f64>,
    /// `f2` on block `(tau_{j-1}, tau_j]`, after flooring; length `m`.
    pub f2: Vec<f64>,
    /// `f3` on block `(tau_{j-1}, tau_j]`; length `m`.
    pub f3: Vec<f64>,
    /// `Ybar(tau_j) - Ybar(tau_{j-1})`; length `m`.
    pub block_increments: Vec<f64>,
}

impl BiasDiagnostics {
    /// The bias estimate `B` built from these blocks.
    pub fn bias(&self) -> f64 {
        bias_from_blocks(&self.f2, &self.f3, &self.block_increments)
    }
}

/// `B = (2/3) sum_j f3(tau_{j-1}) / f2(tau_{j-1}) * dYbar(tau_j)`.
///
/// The derivative at `tau_{j-1}` is the one estimated on the preceding block
/// `(tau_{j-2}, tau_{j-1}]`, so each ratio is known before the increment it
/// multiplies. The first block only supplies a ratio; its own increment has
/// no preceding block and does not enter the sum.
pub fn bias_from_blocks(f2: &[f64], f3: &[f64], block_increments: &[f64]) -> f64 {
    debug_assert_eq!(f2.len(), f3.len());
    debug_assert_eq!(f2.len(), block_increments.len());
    let mut acc = 0.0;
    for j in 1..block_increments.len() {
        acc += f3[j - 1] / f2[j - 1] * block_increments[j];
    }
    2.0 / 3.0 * acc
}

/// Block boundaries `0, D, 2D, ..., (m-1)D, N_1` with `D = d1 q`; a trailing
/// partial block is merged into the last full one.
pub(crate) fn block_boundaries(n_obs: usize, block_ticks: usize) -> Result<Vec<usize>> {
    let m = n_obs / block_ticks;
    if m < 2 {
        return Err(Error::numeric(format!(
            "{n_obs} increments give {m} bias-correction blocks of {block_ticks} ticks, need 2"
        )));
    }
    let mut b: Vec<usize> = (0..m).map(|j| j * block_ticks).collect();
    b.push(n_obs);
    Ok(b)
}

pub(crate) fn block_derivatives(
    series: &TickSeries,
    plan: &GridPlan,
    noise_var: f64,
    one_plus_a: f64,
    f2_floor: f64,
) -> Result<BiasDiagnostics> {
    let (p, q) = (plan.p(), plan.q());
    let n_obs = series.n_increments();
    let bounds = block_boundaries(n_obs, plan.block_ticks())?;
    let m = bounds.len() - 1;
    let block_of = |e: usize| -> usize {
        // block j covers (b_{j-1}, b_j]; returned 0-based
        let j = e.div_ceil(plan.block_ticks());
        j.clamp(1, m) - 1
    };

    let avg = LocalAverager::new(series, p, q);
    avg.check_subgrids(q)?;
    let mut sq = vec![0.0; m];
    let mut cube = vec![0.0; m];
    for k in 0..q {
        avg.for_each_increment(k, |e, d| {
            let j = block_of(e);
            let d2 = d * d;
            sq[j] += d2;
            cube[j] += d2 * d;
        });
    }

    let t = series.times();
    let sqrt_ell = (plan.ell() as f64).sqrt();
    let pq = (p * q) as f64;
    let mut f2 = Vec::with_capacity(m);
    let mut f3 = Vec::with_capacity(m);
    let mut clamped = 0;
    for j in 0..m {
        let dt = t[bounds[j + 1]] - t[bounds[j]];
        let ticks = (bounds[j + 1] - bounds[j]) as f64;
        let df2 = (sq[j] / q as f64 - 2.0 * ticks / pq * noise_var) / one_plus_a;
        let df3 = sqrt_ell * cube[j] / q as f64;
        let raw = df2 / dt;
        if raw < f2_floor {
            clamped += 1;
            f2.push(f2_floor);
        } else {
            f2.push(raw);
        }
        f3.push(df3 / dt);
    }

    // local average whose window ends p ticks after the boundary, or at the
    // last observation when that would run past it
    let window_end = |b: usize| (b + p).min(n_obs);
    let block_increments = (0..m)
        .map(|j| avg.window_diff(window_end(bounds[j + 1]), window_end(bounds[j])))
        .collect();

    Ok(BiasDiagnostics {
        clamped_blocks: clamped,
        block_count: m,
        tau: bounds.iter().map(|&b| t[b]).collect(),
        boundaries: bounds,
        f2,
        f3,
        block_increments,
    })
}
