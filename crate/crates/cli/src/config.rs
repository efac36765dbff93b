use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use endovol::{Design, DesignConfig, EstimatorKind, EstimatorSettings};

use crate::SharedArgs;

pub const WORKERS_ENV: &str = "ENDOVOL_WORKERS";
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_PATHS: usize = 1000;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<endovol::Error> for CliError {
    fn from(e: endovol::Error) -> Self {
        use endovol::Error as E;
        match e {
            E::InvalidParameter(_) => CliError::Usage(e.to_string()),
            E::Numeric(_) => CliError::Numeric(e.to_string()),
            E::InvalidSeries(_) | E::Parse { .. } | E::Io(_) => CliError::Data(e.to_string()),
        }
    }
}

pub fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

/// Fully resolved run parameters: flags, then config file, then defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub design: DesignConfig,
    pub settings: EstimatorSettings,
    /// `n` given explicitly; used as the plan's nominal `n` by `estimate`.
    pub n: Option<usize>,
    pub estimators: Vec<EstimatorKind>,
    pub seed: u64,
    pub paths: Option<usize>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

const KEYS: [&str; 13] = [
    "seed",
    "out",
    "p",
    "q",
    "d1",
    "n",
    "fine-factor",
    "crossing-depth",
    "noise-sd",
    "paths",
    "design",
    "estimators",
    "workers",
];

/// `key = value` lines; `#` starts a comment, `_` and `-` are interchangeable in keys.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{}:{}: expected `key = value`", path.display(), i + 1)));
        };
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("{}:{}: unknown key `{}`", path.display(), i + 1, k.trim())));
        }
        out.insert(key, v.trim().to_owned());
    }
    Ok(out)
}

struct Layer {
    file: BTreeMap<String, String>,
}

impl Layer {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|s| s.parse::<T>().map_err(|e| CliError::Usage(format!("config key `{key}`: {e}"))))
            .transpose()
    }
}

pub fn parse_estimators(s: &str) -> Result<Vec<EstimatorKind>, CliError> {
    match s.trim().to_ascii_lowercase().as_str() {
        "table" | "all" => return Ok(EstimatorKind::TABLE.to_vec()),
        _ => {}
    }
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let k: EstimatorKind = part.parse().map_err(|e: endovol::Error| CliError::Usage(e.to_string()))?;
        if !out.contains(&k) {
            out.push(k);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage("no estimators selected".into()));
    }
    Ok(out)
}

impl RunConfig {
    pub fn resolve(args: &SharedArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let l = Layer { file };

        let design_name: Option<String> = l.get(args.design.clone(), "design")?;
        let design = match design_name {
            Some(s) => Design::from_str(&s).map_err(|e| CliError::Usage(e.to_string()))?,
            None => Design::BrownianBridgeHitting,
        };
        let n: Option<usize> = l.get(args.n, "n")?;
        let mut dc = DesignConfig::new(design);
        if let Some(n) = n {
            dc = dc.with_n(n);
        }
        if let Some(m) = l.get(args.fine_factor, "fine-factor")? {
            dc.fine_factor = m;
        }
        if let Some(d) = l.get(args.crossing_depth, "crossing-depth")? {
            dc.crossing_depth = d;
        }
        if let Some(sd) = l.get(args.noise_sd, "noise-sd")? {
            dc.noise_sd = sd;
        }
        dc.validate()?;

        let mut settings = EstimatorSettings::default();
        if let Some(p) = l.get(args.p, "p")? {
            settings.p = p;
        }
        if let Some(q) = l.get(args.q, "q")? {
            settings.q = q;
        }
        if let Some(d1) = l.get(args.d1, "d1")? {
            settings.d1 = d1;
        }

        let estimators = match l.get(args.estimators.clone(), "estimators")? {
            Some(s) => parse_estimators(&s)?,
            None => EstimatorKind::TABLE.to_vec(),
        };

        let paths = l.get(args.paths, "paths")?;
        if paths == Some(0) {
            return Err(CliError::Usage("--paths must be at least 1".into()));
        }

        let mut workers = l.get(args.workers, "workers")?;
        if workers.is_none() {
            if let Ok(v) = std::env::var(WORKERS_ENV) {
                let w = v
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| CliError::Usage(format!("{WORKERS_ENV}: {e}")))?;
                workers = Some(w);
            }
        }
        if workers == Some(0) {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }

        Ok(Self {
            design: dc,
            settings,
            n,
            estimators,
            seed: l.get(args.seed, "seed")?.unwrap_or(DEFAULT_SEED),
            paths,
            out: l.get(args.out.clone(), "out")?,
            workers,
        })
    }

    pub fn estimator_list(&self) -> String {
        self.estimators.iter().map(|k| k.key()).collect::<Vec<_>>().join("+")
    }
}
