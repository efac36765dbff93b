use crate::error::{Error, Result};
use crate::series::TickSeries;

/// Sub-grid layout: local-average width `p`, block size `q`, nominal
/// frequency `n`, sub-grid frequency `ell = floor((n - p) / q)` and the
/// bias-correction block length `d1 * q` (in ticks).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPlan {
    n: usize,
    p: usize,
    q: usize,
    ell: usize,
    d1: usize,
}

impl GridPlan {
    pub const DEFAULT_P: usize = 5;
    pub const DEFAULT_Q: usize = 20;
    pub const DEFAULT_D1: usize = 100;

    pub fn new(n: usize, p: usize, q: usize, d1: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::param("p must be at least 1"));
        }
        if q <= p {
            return Err(Error::param(format!("block size q = {q} must exceed p = {p}")));
        }
        let plan = Self::new_unchecked(n, p, q, d1)?;
        if plan.ell < 2 {
            return Err(Error::param(format!(
                "ell = floor((n - p) / q) = {} must be at least 2 (n = {n})",
                plan.ell
            )));
        }
        Ok(plan)
    }

    /// Like [`GridPlan::new`] but only requires `p, q, d1 >= 1` and `n >= p`.
    ///
    /// Degenerate layouts such as `p = q = 1` (plain RV on one grid) are
    /// useful for identities; the asymptotics assume `q > p`.
    pub fn new_unchecked(n: usize, p: usize, q: usize, d1: usize) -> Result<Self> {
        if p < 1 || q < 1 || d1 < 1 {
            return Err(Error::param("p, q and d1 must all be at least 1"));
        }
        if n < p {
            return Err(Error::param(format!("n = {n} is smaller than p = {p}")));
        }
        Ok(Self {
            n,
            p,
            q,
            ell: (n - p) / q,
            d1,
        })
    }

    /// Plan for a concrete series. `n` defaults to the observed `N_1`.
    pub fn for_series(
        series: &TickSeries,
        p: usize,
        q: usize,
        d1: usize,
        n_override: Option<usize>,
    ) -> Result<Self> {
        let n_obs = series.n_increments();
        if n_obs < p + q {
            return Err(Error::InvalidSeries(format!(
                "{n_obs} increments is fewer than p + q = {}",
                p + q
            )));
        }
        Self::new(n_override.unwrap_or(n_obs), p, q, d1)
    }

    pub fn reference_defaults(n: usize) -> Result<Self> {
        Self::new(n, Self::DEFAULT_P, Self::DEFAULT_Q, Self::DEFAULT_D1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    /// Ticks per bias-correction block, `d1 * q`.
    pub fn block_ticks(&self) -> usize {
        self.d1 * self.q
    }
}
