use rand_distr::{Distribution, StandardNormal};

use super::config::{Design, DesignConfig};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Latent log-price (and Heston variance) on the fine grid
/// `0, h, 2h, ..., 1 - h`.
#[derive(Debug, Clone)]
pub struct LatentPath {
    resolution: f64,
    x: Vec<f64>,
    v: Option<Vec<f64>>,
    sigma: Option<f64>,
}

impl LatentPath {
    /// Constant-volatility path.
    pub fn with_constant_vol(resolution: f64, x: Vec<f64>, sigma: f64) -> Result<Self> {
        Self::check(resolution, &x)?;
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::param(format!("sigma = {sigma} must be non-negative")));
        }
        Ok(Self { resolution, x, v: None, sigma: Some(sigma) })
    }

    /// Stochastic-variance path; `v[i]` is the (non-negative) spot variance at node `i`.
    pub fn with_variance(resolution: f64, x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Self::check(resolution, &x)?;
        if v.len() != x.len() {
            return Err(Error::param("x and v lengths differ"));
        }
        if v.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
            return Err(Error::param("variance path must be non-negative and finite"));
        }
        Ok(Self { resolution, x, v: Some(v), sigma: None })
    }

    fn check(resolution: f64, x: &[f64]) -> Result<()> {
        if !(resolution > 0.0) || x.len() < 2 {
            return Err(Error::param("latent path needs a positive step and at least 2 nodes"));
        }
        if (x.len() - 1) as f64 * resolution > 1.0 + 1e-12 {
            return Err(Error::param("latent path extends beyond t = 1"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric("non-finite latent value"));
        }
        Ok(())
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.resolution
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.x.len() - 1)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn v(&self) -> Option<&[f64]> {
        self.v.as_deref()
    }

    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    /// Spot variance used between node `i` and `i + 1`.
    pub(crate) fn local_variance(&self, i: usize) -> f64 {
        match (&self.v, self.sigma) {
            (Some(v), _) => v[i],
            (None, Some(s)) => s * s,
            (None, None) => 0.0,
        }
    }
}

/// Simulates the latent path of `config.design` with the given seed.
pub fn simulate_latent(config: &DesignConfig, seed: u64) -> Result<LatentPath> {
    match config.design {
        Design::HestonBridgeHitting => simulate_heston_bridge(config, seed),
        _ => simulate_brownian_bridge(config, seed),
    }
}

/// Constant-volatility Brownian bridge from `x0` to `x0 + 4 sigma`, drawn
/// with exact Gaussian transitions between grid nodes.
pub fn simulate_brownian_bridge(config: &DesignConfig, seed: u64) -> Result<LatentPath> {
    if config.design == Design::HestonBridgeHitting {
        return Err(Error::param("Brownian bridge requested for the Heston design"));
    }
    config.validate()?;
    let h = config.resolution();
    let nodes = config.node_count();
    let sigma = config.sigma;
    let target = config.x0 + config.terminal_shift();
    let mut rng = rng_from_seed(seed);
    let mut x = Vec::with_capacity(nodes);
    let mut cur = config.x0;
    x.push(cur);
    for i in 0..nodes - 1 {
        let rem = 1.0 - i as f64 * h;
        let rem_next = rem - h;
        let z: f64 = StandardNormal.sample(&mut rng);
        cur += (target - cur) * h / rem + sigma * (h * rem_next / rem).sqrt() * z;
        x.push(cur);
    }
    LatentPath::with_constant_vol(h, x, sigma)
}

/// Heston bridge by full-truncation Euler on the fine grid.
pub fn simulate_heston_bridge(config: &DesignConfig, seed: u64) -> Result<LatentPath> {
    if config.design != Design::HestonBridgeHitting {
        return Err(Error::param("Heston bridge requested for a constant-volatility design"));
    }
    config.validate()?;
    let hp = config.heston;
    let h = config.resolution();
    let sqrt_h = h.sqrt();
    let nodes = config.node_count();
    let target = config.x0 + config.terminal_shift();
    let rho_perp = (1.0 - hp.rho * hp.rho).max(0.0).sqrt();
    let mut rng = rng_from_seed(seed);
    let mut x = Vec::with_capacity(nodes);
    let mut v = Vec::with_capacity(nodes);
    let (mut cx, mut cv) = (config.x0, hp.v0);
    x.push(cx);
    v.push(cv.max(0.0));
    for i in 0..nodes - 1 {
        let rem = 1.0 - i as f64 * h;
        let vp = cv.max(0.0);
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let sv = vp.sqrt();
        cx += (target - cx) * h / rem + sv * sqrt_h * z1;
        cv += hp.kappa * (hp.vartheta - vp) * h + hp.gamma * sv * sqrt_h * (hp.rho * z1 + rho_perp * z2);
        x.push(cx);
        v.push(cv.max(0.0));
    }
    LatentPath::with_variance(h, x, v)
}

/// Integrated variance over `[0, 1]`: `sigma^2` for constant volatility,
/// otherwise the trapezoid rule over the grid plus the last node held to 1.
pub fn true_iv(path: &LatentPath) -> Result<f64> {
    match (&path.v, path.sigma) {
        (None, Some(s)) => Ok(s * s),
        (Some(v), _) => {
            let h = path.resolution;
            let last = v[v.len() - 1];
            let inner: f64 = v.windows(2).map(|w| 0.5 * (w[0] + w[1])).sum();
            let tail = 1.0 - path.end_time();
            Ok(inner * h + last * tail)
        }
        (None, None) => Err(Error::param("latent path carries no volatility information")),
    }
}
