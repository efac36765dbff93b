use crate::error::{Error, Result};

/// Ordered `(time, log-price)` observations on `[0, 1]`.
///
/// Index `0` is the observation at `t_0`; the number of increments is
/// [`TickSeries::n_increments`].
#[derive(Debug, Clone, PartialEq)]
pub struct TickSeries {
    times: Vec<f64>,
    prices: Vec<f64>,
}

impl TickSeries {
    pub fn new(times: Vec<f64>, prices: Vec<f64>) -> Result<Self> {
        if times.len() != prices.len() {
            return Err(Error::InvalidSeries(format!(
                "{} times but {} prices",
                times.len(),
                prices.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "need at least 2 observations, got {}",
                times.len()
            )));
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidSeries(format!("time {i} is not finite")));
        }
        if let Some(i) = prices.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidSeries(format!("price {i} is not finite")));
        }
        if times[0] < 0.0 || times[times.len() - 1] > 1.0 {
            return Err(Error::InvalidSeries("times must lie in [0, 1]".into()));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries(format!(
                "times not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self { times, prices })
    }

    /// Regularly spaced observations `t_i = i / (len - 1)`.
    pub fn regular(prices: Vec<f64>) -> Result<Self> {
        let n = prices.len().saturating_sub(1).max(1) as f64;
        let times = (0..prices.len()).map(|i| i as f64 / n).collect();
        Self::new(times, prices)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `N_1`: the number of price increments.
    pub fn n_increments(&self) -> usize {
        self.times.len() - 1
    }

    /// `Y_{t_i} - Y_{t_{i-1}}` for `i = 1..=N_1`.
    pub fn increments(&self) -> Vec<f64> {
        self.prices.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn map_prices(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.times.clone(), self.prices.iter().map(|&p| f(p)).collect())
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.times, self.prices)
    }
}
