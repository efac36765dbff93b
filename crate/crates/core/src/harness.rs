//! Seeded Monte Carlo driver: simulates many paths of a design, evaluates
//! the estimators on each observed series and aggregates RMSE, bias and
//! standard deviation against the ground truth.
//!
//! Paths run in parallel; results are collected in path order, so reports
//! do not depend on the worker count.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{run_estimator, EstimatorKind, EstimatorSettings};
use crate::realized::noise_var_hat;
use crate::rng::PathSeeds;
use crate::simulate::{simulate_observed, DesignConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub estimators: Vec<EstimatorKind>,
    pub settings: EstimatorSettings,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            estimators: EstimatorKind::TABLE.to_vec(),
            settings: EstimatorSettings::default(),
            workers: None,
        }
    }
}

/// Outcome of one simulated path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub index: u64,
    pub seeds: PathSeeds,
    pub true_iv: f64,
    /// Observed increments `N_1` (0 if simulation failed).
    pub n_obs: usize,
    pub noise_var: f64,
    /// One entry per estimator of the report, `Err` holding the message.
    pub estimates: Vec<std::result::Result<f64, String>>,
}

/// Aggregates for one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRow {
    pub estimator: EstimatorKind,
    pub rmse: Option<f64>,
    pub bias: Option<f64>,
    /// Population s.d. of the estimates; only reported when the truth is
    /// the same on every path.
    pub sd: Option<f64>,
    pub valid: usize,
    pub failed: usize,
}

impl EstimatorRow {
    /// `false` when every path failed for this estimator.
    pub fn is_valid(&self) -> bool {
        self.valid > 0
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub config: DesignConfig,
    pub options: RunOptions,
    pub master_seed: u64,
    pub rows: Vec<EstimatorRow>,
    pub records: Vec<PathRecord>,
    pub wall_seconds: f64,
}

/// Simulates `paths` paths of `config` and evaluates the requested
/// estimators on each.
pub fn run_design(config: &DesignConfig, paths: usize, master_seed: u64, options: &RunOptions) -> Result<BenchmarkReport> {
    if paths == 0 {
        return Err(Error::param("at least one path is required"));
    }
    if options.estimators.is_empty() {
        return Err(Error::param("no estimators selected"));
    }
    config.validate()?;
    let start = Instant::now();
    let work = || -> Vec<PathRecord> {
        (0..paths as u64)
            .into_par_iter()
            .map(|i| evaluate_path(config, options, master_seed, i))
            .collect()
    };
    let records = match options.workers {
        Some(0) => return Err(Error::param("worker count must be positive")),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::param(format!("cannot start {w} workers: {e}")))?
            .install(work),
        None => work(),
    };
    let constant_truth = config.design.constant_truth();
    let rows = options
        .estimators
        .iter()
        .enumerate()
        .map(|(j, &kind)| aggregate(kind, &records, j, constant_truth))
        .collect();
    Ok(BenchmarkReport {
        config: *config,
        options: options.clone(),
        master_seed,
        rows,
        records,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Simulates and evaluates a single path.
pub fn evaluate_path(config: &DesignConfig, options: &RunOptions, master_seed: u64, index: u64) -> PathRecord {
    let seeds = PathSeeds::derive(master_seed, index);
    match simulate_observed(config, &seeds) {
        Ok(sim) => PathRecord {
            index,
            seeds,
            true_iv: sim.true_iv,
            n_obs: sim.observed.n_increments(),
            noise_var: noise_var_hat(&sim.observed),
            estimates: options
                .estimators
                .iter()
                .map(|&k| {
                    run_estimator(k, &sim.observed, &options.settings)
                        .map(|r| r.value)
                        .map_err(|e| e.to_string())
                })
                .collect(),
        },
        Err(e) => PathRecord {
            index,
            seeds,
            true_iv: f64::NAN,
            n_obs: 0,
            noise_var: f64::NAN,
            estimates: vec![Err(format!("simulation failed: {e}")); options.estimators.len()],
        },
    }
}

fn aggregate(kind: EstimatorKind, records: &[PathRecord], column: usize, constant_truth: bool) -> EstimatorRow {
    let pairs: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.estimates[column].as_ref().ok().map(|&e| (e, r.true_iv)))
        .collect();
    let valid = pairs.len();
    let failed = records.len() - valid;
    if valid == 0 {
        return EstimatorRow { estimator: kind, rmse: None, bias: None, sd: None, valid, failed };
    }
    let m = valid as f64;
    let bias = pairs.iter().map(|(e, t)| e - t).sum::<f64>() / m;
    let mse = pairs.iter().map(|(e, t)| (e - t) * (e - t)).sum::<f64>() / m;
    let sd = (constant_truth && valid >= 2).then(|| {
        let mean = pairs.iter().map(|p| p.0).sum::<f64>() / m;
        (pairs.iter().map(|(e, _)| (e - mean) * (e - mean)).sum::<f64>() / m).sqrt()
    });
    EstimatorRow {
        estimator: kind,
        rmse: Some(mse.sqrt()),
        bias: Some(bias),
        sd,
        valid,
        failed,
    }
}

impl BenchmarkReport {
    pub fn paths(&self) -> usize {
        self.records.len()
    }

    pub fn row(&self, kind: EstimatorKind) -> Option<&EstimatorRow> {
        self.rows.iter().find(|r| r.estimator == kind)
    }

    fn column(&self, kind: EstimatorKind) -> Option<usize> {
        self.options.estimators.iter().position(|&k| k == kind)
    }

    /// Successful estimates of one estimator, in path order.
    pub fn estimates(&self, kind: EstimatorKind) -> Vec<f64> {
        let Some(j) = self.column(kind) else {
            return Vec::new();
        };
        self.records.iter().filter_map(|r| r.estimates[j].as_ref().ok().copied()).collect()
    }

    /// Resolved configuration as `key=value` pairs.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        let mut out = self.config.describe();
        out.extend(self.options.settings.describe());
        out.push(("paths", self.paths().to_string()));
        out.push(("seed", self.master_seed.to_string()));
        out.push((
            "estimators",
            self.options.estimators.iter().map(|k| k.key()).collect::<Vec<_>>().join("+"),
        ));
        out
    }

    /// Single comment line recording the configuration.
    pub fn config_comment(&self) -> String {
        config_comment(&self.describe())
    }

    /// Metrics table: one row per estimator, in the order requested.
    pub fn write_metrics(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "{}", self.config_comment())?;
        writeln!(out, "estimator,rmse,bias,sd,valid,failed")?;
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_owned(), |x| format!("{x:e}"));
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.estimator.label(),
                fmt(r.rmse),
                fmt(r.bias),
                fmt(r.sd),
                r.valid,
                r.failed
            )?;
        }
        Ok(())
    }

    /// Per-path estimates; failed evaluations are written as `NA`.
    pub fn write_per_path(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "{}", self.config_comment())?;
        let labels: Vec<&str> = self.options.estimators.iter().map(|k| k.label()).collect();
        writeln!(out, "path,seed,true_iv,n_obs,noise_var,{}", labels.join(","))?;
        for r in &self.records {
            let cells: Vec<String> = r
                .estimates
                .iter()
                .map(|e| e.as_ref().map_or_else(|_| "NA".to_owned(), |v| format!("{v:?}")))
                .collect();
            writeln!(
                out,
                "{},{},{:?},{},{:?},{}",
                r.index,
                r.seeds.latent,
                r.true_iv,
                r.n_obs,
                r.noise_var,
                cells.join(",")
            )?;
        }
        Ok(())
    }

    /// Run manifest: configuration, timing and failure counts as `key=value`.
    pub fn write_manifest(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "{}", self.config_comment())?;
        for (k, v) in self.describe() {
            writeln!(out, "{k}={v}")?;
        }
        writeln!(out, "seed_derivation=splitmix64(seed, path, stream)")?;
        writeln!(out, "wall_seconds={:.3}", self.wall_seconds)?;
        for r in &self.rows {
            writeln!(out, "failed.{}={}", r.estimator.key(), r.failed)?;
        }
        for r in &self.records {
            for (k, e) in self.options.estimators.iter().zip(&r.estimates) {
                if let Err(msg) = e {
                    writeln!(out, "error.{}.{}={}", r.index, k.key(), msg.replace('\n', " "))?;
                }
            }
        }
        Ok(())
    }
}

/// `# config k=v k=v ...`
pub fn config_comment(pairs: &[(&'static str, String)]) -> String {
    let body: Vec<String> = pairs.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("# config {}", body.join(" "))
}
