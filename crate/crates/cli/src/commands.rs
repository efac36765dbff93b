use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use endovol::distribution::summarize;
use endovol::harness::config_comment;
use endovol::io::{read_ticks, write_ticks};
use endovol::rng::PathSeeds;
use endovol::simulate::simulate_observed;
use endovol::{run_design, run_estimator, EstimatorKind, RunOptions};

use crate::config::{io_error, CliError, RunConfig, DEFAULT_PATHS};

const DEFAULT_OUT: &str = "endovol-out";

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn finish(mut w: impl Write, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| io_error(path, e))
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let paths = cfg.paths.unwrap_or(1);
    let dir = out_dir(cfg)?;
    let mut pairs = cfg.design.describe();
    pairs.push(("paths", paths.to_string()));
    pairs.push(("seed", cfg.seed.to_string()));
    let comment = config_comment(&pairs);

    let manifest_path = dir.join("manifest.txt");
    let mut manifest = create(&manifest_path)?;
    let mw = |m: &mut BufWriter<File>, line: String| writeln!(m, "{line}").map_err(|e| io_error(&manifest_path, e));
    mw(&mut manifest, comment.clone())?;
    for (k, v) in &pairs {
        mw(&mut manifest, format!("{k}={v}"))?;
    }
    mw(&mut manifest, "seed_derivation=splitmix64(seed, path, stream)".into())?;

    for i in 0..paths {
        let seeds = PathSeeds::derive(cfg.seed, i as u64);
        let sim = simulate_observed(&cfg.design, &seeds)?;
        let name = format!("path_{i:04}.csv");
        let path = dir.join(&name);
        let mut w = create(&path)?;
        let line = format!("{} path={i}", comment.trim_start_matches("# "));
        write_ticks(&mut w, &sim.observed, Some(&line))?;
        finish(w, &path)?;
        for (k, v) in [
            ("file", name),
            ("seed.latent", seeds.latent.to_string()),
            ("seed.sampling", seeds.sampling.to_string()),
            ("seed.times", seeds.times.to_string()),
            ("seed.noise", seeds.noise.to_string()),
            ("n_obs", sim.observed.len().to_string()),
            ("true_iv", format!("{:?}", sim.true_iv)),
        ] {
            mw(&mut manifest, format!("path.{i}.{k}={v}"))?;
        }
    }
    finish(manifest, &manifest_path)?;
    println!("wrote {paths} tick files and manifest.txt to {}", dir.display());
    Ok(())
}

pub fn estimate(cfg: &RunConfig, input: &Path) -> Result<(), CliError> {
    let file = File::open(input).map_err(|e| io_error(input, e))?;
    let series = read_ticks(BufReader::new(file)).map_err(|e| CliError::Data(format!("{}: {e}", input.display())))?;
    let mut settings = cfg.settings;
    settings.n_override = cfg.n;

    let mut pairs = vec![("input", input.display().to_string())];
    pairs.extend(settings.describe());
    pairs.push(("estimators", cfg.estimator_list()));
    let mut lines = vec![config_comment(&pairs), format!("series n_obs={}", series.len())];

    let mut failed = 0;
    for &kind in &cfg.estimators {
        let mut line = format!("estimator={}", kind.key());
        match run_estimator(kind, &series, &settings) {
            Ok(r) => {
                line.push_str(&format!(" status=ok value={:e}", r.value));
                for (k, v) in &r.tuning {
                    line.push_str(&format!(" tuning.{k}={v:?}"));
                }
                for (k, v) in &r.diagnostics {
                    line.push_str(&format!(" diag.{k}={v:?}"));
                }
            }
            Err(e) => {
                failed += 1;
                line.push_str(&format!(" status=error message=\"{}\"", e.to_string().replace('"', "'")));
            }
        }
        lines.push(line);
    }

    let text = lines.join("\n") + "\n";
    io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Data(e.to_string()))?;
    if let Some(path) = &cfg.out {
        fs::write(path, &text).map_err(|e| io_error(path, e))?;
    }
    if failed > 0 {
        return Err(CliError::Numeric(format!("{failed} of {} estimators failed", cfg.estimators.len())));
    }
    Ok(())
}

pub fn benchmark(cfg: &RunConfig) -> Result<(), CliError> {
    let paths = cfg.paths.unwrap_or(DEFAULT_PATHS);
    let options = RunOptions {
        estimators: cfg.estimators.clone(),
        settings: cfg.settings,
        workers: cfg.workers,
    };
    let report = run_design(&cfg.design, paths, cfg.seed, &options)?;
    let dir = out_dir(cfg)?;

    let metrics_path = dir.join("metrics.csv");
    let mut w = create(&metrics_path)?;
    report.write_metrics(&mut w)?;
    finish(w, &metrics_path)?;

    let per_path = dir.join("per_path.csv");
    let mut w = create(&per_path)?;
    report.write_per_path(&mut w)?;
    finish(w, &per_path)?;

    let manifest = dir.join("manifest.txt");
    let mut w = create(&manifest)?;
    report.write_manifest(&mut w)?;
    finish(w, &manifest)?;

    let mut stdout = io::stdout().lock();
    report.write_metrics(&mut stdout)?;
    let failed: usize = report.rows.iter().map(|r| r.failed).sum();
    if report.rows.iter().all(|r| r.valid == 0) {
        return Err(CliError::Numeric(format!("all {failed} estimator evaluations failed")));
    }
    Ok(())
}

struct PerPathTable {
    config: String,
    labels: Vec<String>,
    /// `columns[j]` holds the finite values of estimator column `j`.
    columns: Vec<Vec<f64>>,
}

fn read_per_path(input: &Path) -> Result<PerPathTable, CliError> {
    let file = File::open(input).map_err(|e| io_error(input, e))?;
    let data = |line: usize, m: String| CliError::Data(format!("{}:{line}: {m}", input.display()));
    let mut config = String::new();
    let mut labels: Option<Vec<String>> = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_error(input, e))?;
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("# config") {
            config = rest.trim().to_owned();
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match &labels {
            None => {
                if fields.len() < 6 || fields[..5] != ["path", "seed", "true_iv", "n_obs", "noise_var"] {
                    return Err(data(i + 1, "not a per-path estimates file".into()));
                }
                let l: Vec<String> = fields[5..].iter().map(|s| s.to_string()).collect();
                columns = vec![Vec::new(); l.len()];
                labels = Some(l);
            }
            Some(l) => {
                if fields.len() != l.len() + 5 {
                    return Err(data(i + 1, format!("expected {} fields, found {}", l.len() + 5, fields.len())));
                }
                for (col, cell) in columns.iter_mut().zip(&fields[5..]) {
                    if *cell == "NA" {
                        continue;
                    }
                    let v: f64 = cell.parse().map_err(|_| data(i + 1, format!("invalid value `{cell}`")))?;
                    col.push(v);
                }
            }
        }
    }
    let labels = labels.ok_or_else(|| data(0, "missing header".into()))?;
    Ok(PerPathTable { config, labels, columns })
}

pub fn report(cfg: &RunConfig, input: &Path) -> Result<(), CliError> {
    let table = read_per_path(input)?;
    let dir = out_dir(cfg)?;
    let selected: Vec<EstimatorKind> = cfg
        .estimators
        .iter()
        .copied()
        .filter(|k| table.labels.iter().any(|l| l == k.label()))
        .collect();
    if selected.is_empty() {
        return Err(CliError::Usage(format!(
            "none of the selected estimators appear in {} (columns: {})",
            input.display(),
            table.labels.join(",")
        )));
    }
    for kind in selected {
        let j = table.labels.iter().position(|l| l == kind.label()).expect("filtered above");
        let dist = summarize(&table.columns[j])?;
        let comment = format!(
            "# config source={} estimator={} {}",
            input.display(),
            kind.key(),
            table.config
        );
        let path = dir.join(format!("distribution_{}.csv", kind.key()));
        let mut w = create(&path)?;
        dist.write(&mut w, comment.trim_end())?;
        finish(w, &path)?;
        println!(
            "estimator={} count={} mean={:e} sd={:e} skewness={:.4} excess_kurtosis={:.4} file={}",
            kind.key(),
            dist.count,
            dist.mean,
            dist.sd,
            dist.skewness,
            dist.excess_kurtosis,
            path.display()
        );
    }
    Ok(())
}
