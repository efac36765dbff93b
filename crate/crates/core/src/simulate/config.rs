use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Design {
    BrownianBridgeHitting,
    HestonBridgeHitting,
    BrownianBridgePoisson,
}

impl Design {
    pub const ALL: [Design; 3] = [
        Design::BrownianBridgeHitting,
        Design::HestonBridgeHitting,
        Design::BrownianBridgePoisson,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Design::BrownianBridgeHitting => "bb-hit",
            Design::HestonBridgeHitting => "heston-hit",
            Design::BrownianBridgePoisson => "bb-poisson",
        }
    }

    /// Whether the integrated volatility is the same on every path.
    pub fn constant_truth(self) -> bool {
        !matches!(self, Design::HestonBridgeHitting)
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Design {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Design::ALL
            .into_iter()
            .find(|d| d.key() == s.trim())
            .ok_or_else(|| Error::param(format!("unknown design `{s}` (bb-hit, heston-hit, bb-poisson)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams {
    pub vartheta: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub rho: f64,
    /// Initial variance.
    pub v0: f64,
}

impl Default for HestonParams {
    fn default() -> Self {
        Self {
            vartheta: 0.0004,
            gamma: 0.5 / 252.0,
            kappa: 5.0 / 252.0,
            rho: -0.5,
            v0: 0.0004,
        }
    }
}

/// Additive i.i.d. Gaussian observation noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma_eps: f64,
    pub seed: u64,
}

/// Parameters of one simulation design. [`DesignConfig::new`] gives the
/// benchmark defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignConfig {
    pub design: Design,
    /// Nominal sampling frequency.
    pub n: usize,
    /// Volatility of the Brownian-bridge designs.
    pub sigma: f64,
    pub x0: f64,
    pub heston: HestonParams,
    /// Upper barrier before scaling by `1/sqrt(ell_prime)`.
    pub barrier_a: f64,
    /// Lower barrier before scaling by `1/sqrt(ell_prime)`.
    pub barrier_b: f64,
    pub ell_prime: usize,
    pub poisson_rate: f64,
    pub noise_sd: f64,
    /// Fine simulation grid step is `1 / (fine_factor * n)`.
    pub fine_factor: usize,
    /// Crossing times are located to `resolution / 2^crossing_depth`.
    pub crossing_depth: u32,
}

/// `floor(n^{19/21})`.
pub fn default_ell_prime(n: usize) -> usize {
    (n as f64).powf(19.0 / 21.0).floor() as usize
}

impl DesignConfig {
    pub const REFERENCE_N: usize = 46_800;

    pub fn new(design: Design) -> Self {
        let sigma = 0.02;
        let n = Self::REFERENCE_N;
        Self {
            design,
            n,
            sigma,
            x0: 5f64.ln(),
            heston: HestonParams::default(),
            barrier_a: 5.0 * sigma,
            barrier_b: sigma / 10.0,
            ell_prime: default_ell_prime(n),
            poisson_rate: n as f64,
            noise_sd: 0.0005,
            fine_factor: 20,
            crossing_depth: 16,
        }
    }

    /// Changes the nominal frequency and the quantities tied to it
    /// (`ell_prime` and the Poisson rate).
    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self.ell_prime = default_ell_prime(n);
        self.poisson_rate = n as f64;
        self
    }

    pub fn q_prime(&self) -> usize {
        self.n / self.ell_prime.max(1)
    }

    /// Fine-grid step `1 / (M n)`.
    pub fn resolution(&self) -> f64 {
        1.0 / (self.fine_factor * self.n) as f64
    }

    /// Number of fine-grid nodes `0, h, ..., 1 - h`.
    pub fn node_count(&self) -> usize {
        self.fine_factor * self.n
    }

    /// Hitting barriers `(a / sqrt(ell'), b / sqrt(ell'))`.
    pub fn scaled_barriers(&self) -> (f64, f64) {
        let s = (self.ell_prime as f64).sqrt();
        (self.barrier_a / s, self.barrier_b / s)
    }

    /// The bridge's terminal value minus its starting value.
    pub fn terminal_shift(&self) -> f64 {
        match self.design {
            Design::HestonBridgeHitting => 4.0 * self.heston.vartheta.sqrt(),
            _ => 4.0 * self.sigma,
        }
    }

    /// `key=value` pairs for run manifests.
    pub fn describe(&self) -> Vec<(&'static str, String)> {
        let h = &self.heston;
        let mut out = vec![
            ("design", self.design.key().to_owned()),
            ("n", self.n.to_string()),
            ("x0", format!("{:?}", self.x0)),
        ];
        if self.design == Design::HestonBridgeHitting {
            out.extend([
                ("vartheta", format!("{:?}", h.vartheta)),
                ("gamma", format!("{:?}", h.gamma)),
                ("kappa", format!("{:?}", h.kappa)),
                ("rho", format!("{:?}", h.rho)),
                ("v0", format!("{:?}", h.v0)),
            ]);
        } else {
            out.push(("sigma", format!("{:?}", self.sigma)));
        }
        if self.design == Design::BrownianBridgePoisson {
            out.push(("poisson_rate", format!("{:?}", self.poisson_rate)));
        } else {
            out.extend([
                ("barrier_a", format!("{:?}", self.barrier_a)),
                ("barrier_b", format!("{:?}", self.barrier_b)),
                ("ell_prime", self.ell_prime.to_string()),
                ("q_prime", self.q_prime().to_string()),
                ("crossing_depth", self.crossing_depth.to_string()),
            ]);
        }
        out.extend([
            ("noise_sd", format!("{:?}", self.noise_sd)),
            ("fine_factor", self.fine_factor.to_string()),
        ]);
        out
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::param(m));
        if self.n < 2 {
            return fail(format!("n = {} must be at least 2", self.n));
        }
        if self.fine_factor < 1 {
            return fail("fine factor must be at least 1".into());
        }
        if self.ell_prime < 1 || self.q_prime() < 1 {
            return fail(format!(
                "q' = floor(n / ell') must be at least 1 (n = {}, ell' = {})",
                self.n, self.ell_prime
            ));
        }
        if !(self.barrier_a > 0.0 && self.barrier_b > 0.0) {
            return fail("barriers a and b must be positive".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return fail(format!("sigma = {} must be non-negative", self.sigma));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return fail(format!("noise sd = {} must be non-negative", self.noise_sd));
        }
        if !(self.poisson_rate > 0.0) {
            return fail("Poisson rate must be positive".into());
        }
        if !self.x0.is_finite() {
            return fail("x0 must be finite".into());
        }
        let h = &self.heston;
        if !(h.vartheta > 0.0 && h.kappa >= 0.0 && h.gamma >= 0.0 && h.v0 >= 0.0) {
            return fail("Heston parameters must be non-negative with vartheta > 0".into());
        }
        if !(-1.0..=1.0).contains(&h.rho) {
            return fail(format!("rho = {} outside [-1, 1]", h.rho));
        }
        Ok(())
    }
}
