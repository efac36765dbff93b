//! Normality summaries of an estimator's cross-path distribution:
//! histogram and normal QQ pairs of the standardized estimates, plus
//! skewness and excess kurtosis.

use std::io::Write;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimate::EstimatorKind;
use crate::harness::BenchmarkReport;

pub const HISTOGRAM_BINS: usize = 30;
pub const MIN_ESTIMATES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionReport {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation used for standardizing.
    pub sd: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub histogram: Vec<HistogramBin>,
    /// `(theoretical, empirical)` quantiles of the standardized values.
    pub qq: Vec<(f64, f64)>,
}

/// Summary of one estimator's estimates in a benchmark report.
pub fn distribution_report(report: &BenchmarkReport, kind: EstimatorKind) -> Result<DistributionReport> {
    summarize(&report.estimates(kind))
}

/// Summary of an arbitrary sample.
pub fn summarize(values: &[f64]) -> Result<DistributionReport> {
    let m = values.len();
    if m < MIN_ESTIMATES {
        return Err(Error::param(format!("{m} estimates; at least {MIN_ESTIMATES} are needed")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("non-finite estimate"));
    }
    let mf = m as f64;
    let mean = values.iter().sum::<f64>() / mf;
    let central = |k: i32| values.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / mf;
    let m2 = central(2);
    let sd = m2.sqrt();
    if !(sd > 0.0) || sd <= 1e-14 * mean.abs() {
        return Err(Error::numeric("estimates have zero spread"));
    }
    let skewness = central(3) / (m2 * sd);
    let excess_kurtosis = central(4) / (m2 * m2) - 3.0;

    let mut z: Vec<f64> = values.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let (lo, hi) = (z[0], z[m - 1]);
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut histogram: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|i| HistogramBin {
            lower: lo + i as f64 * width,
            upper: if i + 1 == HISTOGRAM_BINS { hi } else { lo + (i + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for &v in &z {
        let i = (((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        histogram[i].count += 1;
    }
    let normal = Normal::standard();
    let qq = z
        .iter()
        .enumerate()
        .map(|(k, &v)| (normal.inverse_cdf((k + 1) as f64 / (mf + 1.0)), v))
        .collect();
    Ok(DistributionReport {
        count: m,
        mean,
        sd,
        skewness,
        excess_kurtosis,
        histogram,
        qq,
    })
}

impl DistributionReport {
    /// Long-format table `kind,index,x,y`: histogram rows carry the bin
    /// centre and count, QQ rows the theoretical and empirical quantiles.
    pub fn write(&self, out: &mut impl Write, config_comment: &str) -> Result<()> {
        writeln!(out, "{config_comment}")?;
        writeln!(
            out,
            "# moments count={} mean={:e} sd={:e} skewness={:.6} excess_kurtosis={:.6}",
            self.count, self.mean, self.sd, self.skewness, self.excess_kurtosis
        )?;
        writeln!(out, "kind,index,x,y")?;
        for (i, b) in self.histogram.iter().enumerate() {
            writeln!(out, "hist,{i},{:?},{}", 0.5 * (b.lower + b.upper), b.count)?;
        }
        for (i, (t, e)) in self.qq.iter().enumerate() {
            writeln!(out, "qq,{i},{t:?},{e:?}")?;
        }
        Ok(())
    }
}
