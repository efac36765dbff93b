use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::baseline::Baselines;
use crate::error::{Error, Result};
use crate::lama::{GridPlan, LamaEstimator, F2_FLOOR};
use crate::realized::DEFAULT_SPARSE_INTERVAL;
use crate::series::TickSeries;

/// One estimator's output together with the tuning it actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRecord {
    pub estimator: EstimatorKind,
    pub value: f64,
    pub tuning: BTreeMap<String, f64>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl EstimateRecord {
    pub(crate) fn new(estimator: EstimatorKind, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::numeric(format!("{estimator} produced a non-finite value")));
        }
        Ok(Self {
            estimator,
            value,
            tuning: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
        })
    }

    pub(crate) fn tune(mut self, key: &str, value: f64) -> Self {
        self.tuning.insert(key.to_owned(), value);
        self
    }

    pub(crate) fn diag(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_owned(), value);
        self
    }
}

/// The estimators exposed through the harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Tsrv,
    Msrv,
    Kernel,
    PreAveraging,
    /// Multi-grid moving average without bias correction, `F^(2)(1)`.
    Uncorrected,
    /// Bias-corrected multi-grid estimator.
    Final,
    /// Single-grid local averaging (not part of the benchmark tables).
    LocalAveraging,
}

impl EstimatorKind {
    /// The six estimators compared in the benchmark tables, in table order.
    pub const TABLE: [EstimatorKind; 6] = [
        EstimatorKind::Tsrv,
        EstimatorKind::Msrv,
        EstimatorKind::Kernel,
        EstimatorKind::PreAveraging,
        EstimatorKind::Uncorrected,
        EstimatorKind::Final,
    ];

    /// Column label used in report files.
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Tsrv => "TSRV",
            EstimatorKind::Msrv => "MSRV",
            EstimatorKind::Kernel => "Kernel",
            EstimatorKind::PreAveraging => "Pre-averaging",
            EstimatorKind::Uncorrected => "Uncorrected",
            EstimatorKind::Final => "Final",
            EstimatorKind::LocalAveraging => "LA",
        }
    }

    /// Short command-line name.
    pub fn key(self) -> &'static str {
        match self {
            EstimatorKind::Tsrv => "tsrv",
            EstimatorKind::Msrv => "msrv",
            EstimatorKind::Kernel => "kernel",
            EstimatorKind::PreAveraging => "preavg",
            EstimatorKind::Uncorrected => "uncorrected",
            EstimatorKind::Final => "final",
            EstimatorKind::LocalAveraging => "la",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        [
            EstimatorKind::Tsrv,
            EstimatorKind::Msrv,
            EstimatorKind::Kernel,
            EstimatorKind::PreAveraging,
            EstimatorKind::Uncorrected,
            EstimatorKind::Final,
            EstimatorKind::LocalAveraging,
        ]
        .into_iter()
        .find(|k| k.key() == lower || k.label().to_ascii_lowercase() == lower)
        .ok_or_else(|| Error::param(format!("unknown estimator `{s}`")))
    }
}

/// Tuning shared by every estimator evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSettings {
    pub p: usize,
    pub q: usize,
    pub d1: usize,
    /// Overrides the nominal `n` used for `ell`; defaults to the observed `N_1`.
    pub n_override: Option<usize>,
    pub sparse_interval: f64,
    pub f2_floor: f64,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            p: GridPlan::DEFAULT_P,
            q: GridPlan::DEFAULT_Q,
            d1: GridPlan::DEFAULT_D1,
            n_override: None,
            sparse_interval: DEFAULT_SPARSE_INTERVAL,
            f2_floor: F2_FLOOR,
        }
    }
}

impl EstimatorSettings {
    pub fn plan_for(&self, series: &TickSeries) -> Result<GridPlan> {
        GridPlan::for_series(series, self.p, self.q, self.d1, self.n_override)
    }

    /// `key=value` pairs for run manifests.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("p", self.p.to_string()),
            ("q", self.q.to_string()),
            ("d1", self.d1.to_string()),
            ("sparse_interval", format!("{:?}", self.sparse_interval)),
            ("f2_floor", format!("{:?}", self.f2_floor)),
        ];
        if let Some(n) = self.n_override {
            out.push(("plan_n", n.to_string()));
        }
        out
    }
}

/// Evaluates one estimator on a series.
pub fn run_estimator(kind: EstimatorKind, series: &TickSeries, settings: &EstimatorSettings) -> Result<EstimateRecord> {
    let baselines = Baselines::new(settings.sparse_interval);
    let lama = || -> Result<LamaEstimator> {
        Ok(LamaEstimator::new(settings.plan_for(series)?).with_f2_floor(settings.f2_floor))
    };
    match kind {
        EstimatorKind::Tsrv => baselines.tsrv(series),
        EstimatorKind::Msrv => baselines.msrv(series),
        EstimatorKind::Kernel => baselines.realized_kernel(series),
        EstimatorKind::PreAveraging => baselines.preaveraging(series),
        EstimatorKind::Uncorrected => lama()?.uncorrected(series),
        EstimatorKind::Final => lama()?.final_estimate(series),
        EstimatorKind::LocalAveraging => lama()?.la_single_grid(series),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in EstimatorKind::TABLE {
            assert_eq!(k.key().parse::<EstimatorKind>().unwrap(), k);
            assert_eq!(k.label().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("nope".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(EstimateRecord::new(EstimatorKind::Tsrv, f64::NAN).is_err());
    }
}
