//! Sub-grid local-averaging estimators for prices observed with noise at
//! endogenous times.
//!
//! The pipeline is:
//!
//! 1. average the `p` prices preceding every `q`-th observation
//!    ([`local_averages`]) on each of the `q` shifted sub-grids;
//! 2. take the RV of the averaged prices on each sub-grid, average over
//!    sub-grids, subtract the noise contribution and undo the attenuation
//!    `1 + A(p, q)` ([`LamaEstimator::uncorrected`]);
//! 3. estimate the endogeneity bias from block derivatives of the
//!    multi-grid RV and tricity ([`LamaEstimator::bias_diagnostics`]) and
//!    remove it ([`LamaEstimator::final_estimate`]).

mod bias;
mod plan;
mod subgrid;

pub use bias::{bias_from_blocks, BiasDiagnostics, F2_FLOOR};
pub use plan::GridPlan;
pub use subgrid::{a_pq, local_averages, multigrid_rv};

use crate::error::{Error, Result};
use crate::estimate::{EstimateRecord, EstimatorKind};
use crate::realized::noise_var_hat;
use crate::series::TickSeries;
use subgrid::LocalAverager;

/// The pieces shared by the uncorrected and bias-corrected estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct MultigridParts {
    /// `(1/q) sum_k [Ybar, Ybar]^{S_k}_1`.
    pub multigrid_rv: f64,
    pub noise_var: f64,
    pub n_obs: usize,
    pub a_pq: f64,
}

impl MultigridParts {
    /// `multigrid_rv - 2 N_1 / (p q) * noise_var`.
    fn noise_corrected(&self, plan: &GridPlan) -> f64 {
        self.multigrid_rv - 2.0 * self.n_obs as f64 / (plan.p() * plan.q()) as f64 * self.noise_var
    }
}

/// Sub-grid estimators bound to a [`GridPlan`].
///
/// The noise variance defaults to [`noise_var_hat`] of the series being
/// estimated; [`LamaEstimator::with_noise_var`] pins it instead.
#[derive(Debug, Clone, PartialEq)]
pub struct LamaEstimator {
    plan: GridPlan,
    noise_var: Option<f64>,
    f2_floor: f64,
}

impl LamaEstimator {
    pub fn new(plan: GridPlan) -> Self {
        Self {
            plan,
            noise_var: None,
            f2_floor: F2_FLOOR,
        }
    }

    pub fn with_noise_var(mut self, noise_var: f64) -> Self {
        self.noise_var = Some(noise_var);
        self
    }

    pub fn with_f2_floor(mut self, floor: f64) -> Self {
        self.f2_floor = floor;
        self
    }

    pub fn plan(&self) -> &GridPlan {
        &self.plan
    }

    fn noise_var_for(&self, series: &TickSeries) -> f64 {
        self.noise_var.unwrap_or_else(|| noise_var_hat(series))
    }

    fn one_plus_a(&self) -> Result<f64> {
        let v = 1.0 + a_pq(self.plan.p(), self.plan.q());
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::numeric(format!("1 + A(p, q) = {v} is not positive")))
        }
    }

    /// Single-grid local averaging on sub-grid 0:
    /// `[Ybar, Ybar]^S_1 - (2 L_1 / p) * noise_var`.
    pub fn la_single_grid(&self, series: &TickSeries) -> Result<EstimateRecord> {
        let avg = LocalAverager::new(series, self.plan.p(), self.plan.q());
        avg.check_subgrids(1)?;
        let (rv0, increments) = avg.subgrid_rv(0);
        let noise_var = self.noise_var_for(series);
        let value = rv0 - 2.0 * increments as f64 / self.plan.p() as f64 * noise_var;
        Ok(EstimateRecord::new(EstimatorKind::LocalAveraging, value)?
            .tune("p", self.plan.p() as f64)
            .tune("q", self.plan.q() as f64)
            .tune("ell", self.plan.ell() as f64)
            .diag("L1", increments as f64)
            .diag("noise_var", noise_var))
    }

    pub fn parts(&self, series: &TickSeries) -> Result<MultigridParts> {
        Ok(MultigridParts {
            multigrid_rv: multigrid_rv(series, self.plan.p(), self.plan.q())?,
            noise_var: self.noise_var_for(series),
            n_obs: series.n_increments(),
            a_pq: a_pq(self.plan.p(), self.plan.q()),
        })
    }

    fn tuned(&self, record: EstimateRecord, parts: &MultigridParts) -> EstimateRecord {
        record
            .tune("n", self.plan.n() as f64)
            .tune("p", self.plan.p() as f64)
            .tune("q", self.plan.q() as f64)
            .tune("ell", self.plan.ell() as f64)
            .tune("a_pq", parts.a_pq)
            .diag("noise_var", parts.noise_var)
            .diag("multigrid_rv", parts.multigrid_rv)
    }

    /// `F^(2)(1) = (multigrid RV - 2 N_1 / (p q) * noise_var) / (1 + A(p, q))`.
    pub fn uncorrected(&self, series: &TickSeries) -> Result<EstimateRecord> {
        let one_plus_a = self.one_plus_a()?;
        let parts = self.parts(series)?;
        let value = parts.noise_corrected(&self.plan) / one_plus_a;
        Ok(self.tuned(EstimateRecord::new(EstimatorKind::Uncorrected, value)?, &parts))
    }

    /// Per-block `f2`, `f3` and block increments over blocks of `d1 q` ticks.
    pub fn bias_diagnostics(&self, series: &TickSeries) -> Result<BiasDiagnostics> {
        let one_plus_a = self.one_plus_a()?;
        bias::block_derivatives(
            series,
            &self.plan,
            self.noise_var_for(series),
            one_plus_a,
            self.f2_floor,
        )
    }

    /// The bias estimate `B`.
    pub fn bias_correction(&self, series: &TickSeries) -> Result<f64> {
        Ok(self.bias_diagnostics(series)?.bias())
    }

    /// Bias-corrected estimate
    /// `(-B + sqrt(ell) (multigrid RV - 2 N_1/(p q) noise_var)) / (sqrt(ell) (1 + A))`.
    pub fn final_estimate(&self, series: &TickSeries) -> Result<EstimateRecord> {
        let one_plus_a = self.one_plus_a()?;
        let parts = self.parts(series)?;
        let diag = self.bias_diagnostics(series)?;
        let bias = diag.bias();
        let sqrt_ell = (self.plan.ell() as f64).sqrt();
        let value = (-bias + sqrt_ell * parts.noise_corrected(&self.plan)) / (sqrt_ell * one_plus_a);
        Ok(self
            .tuned(EstimateRecord::new(EstimatorKind::Final, value)?, &parts)
            .tune("d1", self.plan.d1() as f64)
            .diag("bias", bias)
            .diag("uncorrected", parts.noise_corrected(&self.plan) / one_plus_a)
            .diag("block_count", diag.block_count as f64)
            .diag("clamped_blocks", diag.clamped_blocks as f64))
    }
}

/// Single-grid local averaging with the noise variance estimated from `series`.
pub fn la_single_grid(series: &TickSeries, plan: &GridPlan) -> Result<EstimateRecord> {
    LamaEstimator::new(*plan).la_single_grid(series)
}

pub fn uncorrected_estimate(series: &TickSeries, plan: &GridPlan) -> Result<EstimateRecord> {
    LamaEstimator::new(*plan).uncorrected(series)
}

pub fn f2_f3_blocks(series: &TickSeries, plan: &GridPlan) -> Result<BiasDiagnostics> {
    LamaEstimator::new(*plan).bias_diagnostics(series)
}

pub fn bias_correction(series: &TickSeries, plan: &GridPlan) -> Result<f64> {
    LamaEstimator::new(*plan).bias_correction(series)
}

pub fn final_estimate(series: &TickSeries, plan: &GridPlan) -> Result<EstimateRecord> {
    LamaEstimator::new(*plan).final_estimate(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realized::rv;
    use approx::assert_relative_eq;

    fn wiggle(n: usize) -> TickSeries {
        // deterministic, irregular-looking prices
        let y = (0..n)
            .map(|i| ((i * 7919 % 101) as f64 - 50.0) * 1e-4 + (i as f64 * 0.37).sin() * 1e-3)
            .collect();
        TickSeries::regular(y).unwrap()
    }

    #[test]
    fn single_grid_hand_computation() {
        let y = [0.0, 0.4, -0.2, 0.5, 0.1, 0.9, 0.3, -0.1, 0.6, 0.2];
        let s = TickSeries::regular(y.to_vec()).unwrap();
        let plan = GridPlan::new_unchecked(9, 2, 3, 1).unwrap();
        let bars = [(y[2] + y[1]) / 2.0, (y[5] + y[4]) / 2.0, (y[8] + y[7]) / 2.0];
        let rv_bar = (bars[1] - bars[0]).powi(2) + (bars[2] - bars[1]).powi(2);
        let noise = rv(&s) / 18.0;
        let expect = rv_bar - 2.0 * 2.0 / 2.0 * noise;
        let got = la_single_grid(&s, &plan).unwrap();
        assert_relative_eq!(got.value, expect, max_relative = 1e-13);
        assert_eq!(got.diagnostics["L1"], 2.0);
    }

    #[test]
    fn collapses_to_rv() {
        // sub-grids start at index p, so with p = q = 1 the first tick is unused
        let s = wiggle(200);
        let tail = TickSeries::regular(s.prices()[1..].to_vec()).unwrap();
        let plan = GridPlan::new_unchecked(199, 1, 1, 1).unwrap();
        let est = LamaEstimator::new(plan).with_noise_var(0.0);
        assert_eq!(est.la_single_grid(&s).unwrap().value, rv(&tail));
        assert_eq!(est.uncorrected(&s).unwrap().value, rv(&tail));

        let mut y = s.prices().to_vec();
        y[0] = y[1];
        let flat_start = TickSeries::regular(y).unwrap();
        assert_relative_eq!(
            est.uncorrected(&flat_start).unwrap().value,
            rv(&flat_start),
            max_relative = 1e-14
        );
    }

    #[test]
    fn uncorrected_noise_free_p1() {
        let s = wiggle(60);
        let plan = GridPlan::new(60, 1, 3, 1).unwrap();
        let est = LamaEstimator::new(plan).with_noise_var(0.0);
        let expect = multigrid_rv(&s, 1, 3).unwrap();
        assert_eq!(est.uncorrected(&s).unwrap().value, expect);
    }

    #[test]
    fn final_identity_and_determinism() {
        let s = wiggle(4_000);
        let plan = GridPlan::new(4_000, 3, 10, 20).unwrap();
        let est = LamaEstimator::new(plan);
        let fin = est.final_estimate(&s).unwrap();
        let unc = est.uncorrected(&s).unwrap().value;
        let b = est.bias_correction(&s).unwrap();
        let rhs = unc - b / ((plan.ell() as f64).sqrt() * (1.0 + a_pq(3, 10)));
        assert_relative_eq!(fin.value, rhs, max_relative = 1e-12);
        assert_eq!(fin, est.final_estimate(&s).unwrap());
    }

    #[test]
    fn two_block_edge() {
        let s = wiggle(2 * 5 * 10 + 4);
        let plan = GridPlan::new(103, 2, 10, 5).unwrap();
        let d = f2_f3_blocks(&s, &plan).unwrap();
        assert_eq!(d.block_count, 2);
        assert_eq!(d.boundaries, vec![0, 50, 103]);
        assert!(d.clamped_blocks <= d.block_count);
        let short = wiggle(2 * 5 * 10);
        assert!(f2_f3_blocks(&short, &plan).is_err());
    }

    #[test]
    fn block_sums_recover_uncorrected() {
        let s = wiggle(3_000);
        let plan = GridPlan::new(3_000, 3, 8, 25).unwrap();
        let est = LamaEstimator::new(plan).with_f2_floor(f64::NEG_INFINITY);
        let d = est.bias_diagnostics(&s).unwrap();
        let total: f64 = d
            .f2
            .iter()
            .zip(d.tau.windows(2))
            .map(|(f, w)| f * (w[1] - w[0]))
            .sum();
        assert_relative_eq!(total, est.uncorrected(&s).unwrap().value, max_relative = 1e-10);
    }
}
