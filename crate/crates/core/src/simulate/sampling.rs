use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, StandardNormal};

use super::config::DesignConfig;
use super::path::LatentPath;
use super::NoiseSpec;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, PathRng};
use crate::series::TickSeries;

const TIME_EPS: f64 = 1e-13;
/// Crossing probabilities below `exp(-40)` are treated as zero.
const NEGLIGIBLE_EXPONENT: f64 = 40.0;

/// Walks a latent path forward in time, filling in values between grid
/// nodes by Brownian-bridge interpolation. Every value it reports stays
/// consistent with the values reported before it.
pub(crate) struct PathCursor<'a> {
    path: &'a LatentPath,
    rng: PathRng,
    t: f64,
    x: f64,
    /// Grid node at or before `t`; its variance drives the current interval.
    node: usize,
    next_node: usize,
    /// Known points after `(t, x)` and before `next_node`, nearest last.
    pending: Vec<(f64, f64)>,
    min_dt: f64,
    bridge_crossings: bool,
}

impl<'a> PathCursor<'a> {
    pub(crate) fn new(path: &'a LatentPath, seed: u64, crossing_depth: u32) -> Self {
        Self {
            path,
            rng: rng_from_seed(seed),
            t: 0.0,
            x: path.x()[0],
            node: 0,
            next_node: 1,
            pending: Vec::new(),
            min_dt: path.resolution() / 2f64.powi(crossing_depth as i32),
            bridge_crossings: crossing_depth > 0,
        }
    }

    pub(crate) fn current(&self) -> (f64, f64) {
        (self.t, self.x)
    }

    fn peek(&self) -> Option<(f64, f64)> {
        if let Some(&p) = self.pending.last() {
            return Some(p);
        }
        (self.next_node < self.path.len())
            .then(|| (self.path.time(self.next_node), self.path.x()[self.next_node]))
    }

    fn advance(&mut self) {
        if let Some((t, x)) = self.pending.pop() {
            self.t = t;
            self.x = x;
        } else {
            self.t = self.path.time(self.next_node);
            self.x = self.path.x()[self.next_node];
            self.node = self.next_node;
            self.next_node += 1;
        }
    }

    fn variance(&self) -> f64 {
        self.path.local_variance(self.node)
    }

    fn bridge_point(&mut self, t1: f64, x1: f64, tm: f64) -> f64 {
        let dt = t1 - self.t;
        let w = (tm - self.t) / dt;
        let sd = (self.variance() * (tm - self.t) * (t1 - tm) / dt).max(0.0).sqrt();
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.x + (x1 - self.x) * w + sd * z
    }

    /// Latent value at `t`, or `None` beyond the last grid node.
    pub(crate) fn value_at(&mut self, t: f64) -> Result<Option<f64>> {
        if t < self.t - TIME_EPS {
            return Err(Error::param(format!("cursor cannot move back from {} to {t}", self.t)));
        }
        if (t - self.t).abs() <= TIME_EPS {
            return Ok(Some(self.x));
        }
        loop {
            let Some((t1, x1)) = self.peek() else {
                return Ok(None);
            };
            if t1 < t - TIME_EPS {
                self.advance();
            } else if t1 <= t + TIME_EPS {
                self.advance();
                return Ok(Some(x1));
            } else {
                let x = self.bridge_point(t1, x1, t);
                self.t = t;
                self.x = x;
                return Ok(Some(x));
            }
        }
    }

    /// First time after the current point at which the path leaves the open
    /// band `(lo, hi)`. Returns `None` if the path ends first.
    ///
    /// With `crossing_depth > 0`, crossings between grid nodes are detected
    /// from the bridge crossing probability and the exit is reported at the
    /// barrier itself. With depth 0 the first grid node at or beyond a
    /// barrier is reported.
    pub(crate) fn first_exit(&mut self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        loop {
            let (t1, x1) = self.peek()?;
            let dt = t1 - self.t;
            let var_dt = self.variance() * dt;
            if x1 >= hi || x1 <= lo {
                if !self.bridge_crossings {
                    self.advance();
                    return Some((self.t, self.x));
                }
                if dt > self.min_dt && var_dt > 0.0 {
                    // Split so that an earlier crossing of the other barrier
                    // is not missed.
                    let tm = self.t + 0.5 * dt;
                    let xm = self.bridge_point(t1, x1, tm);
                    self.pending.push((tm, xm));
                    continue;
                }
                let level = if x1 >= hi { hi } else { lo };
                return Some(self.hit(level, t1, x1));
            }
            if self.bridge_crossings {
                let (p_hi, p_lo) = crossing_probabilities(self.x, x1, var_dt, lo, hi);
                if p_hi + p_lo > 0.0 {
                    let u: f64 = self.rng.random();
                    if u < p_hi {
                        return Some(self.hit(hi, t1, x1));
                    }
                    if u < p_hi + p_lo {
                        return Some(self.hit(lo, t1, x1));
                    }
                }
            }
            self.advance();
        }
    }

    /// Moves to the first time the bridge towards `(t1, x1)` touches `level`,
    /// given that it does. By reflection this is the hitting time of a bridge
    /// ending at the mirrored endpoint, which maps to an inverse Gaussian
    /// time under the bridge's time change.
    fn hit(&mut self, level: f64, t1: f64, x1: f64) -> (f64, f64) {
        let dt = t1 - self.t;
        let d = (level - self.x).abs();
        let beyond = (x1 - level).abs();
        let var = self.variance();
        let tau = if var <= 0.0 || beyond == 0.0 {
            // Degenerate bridge: straight line.
            dt * d / (d + beyond).max(f64::MIN_POSITIVE)
        } else {
            let mean = d * dt / beyond;
            let u = mean * standard_inverse_gaussian(d * beyond / (var * dt), &mut self.rng);
            dt * u / (dt + u)
        };
        let t = (self.t + tau).clamp(self.t, t1);
        if t >= t1 {
            self.advance();
            return (self.t, self.x);
        }
        self.t = t;
        self.x = level;
        (t, level)
    }
}

/// Inverse Gaussian draw with mean 1 and shape `phi`, using the root
/// transformation in a form that stays accurate for small and large `phi`.
fn standard_inverse_gaussian(phi: f64, rng: &mut PathRng) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    let y = z * z;
    let s = (y * y + 4.0 * phi * y).sqrt();
    let x = if y == 0.0 { 1.0 } else { 4.0 * phi * y / ((s + y) * (s + y)) };
    let u: f64 = rng.random();
    if u <= 1.0 / (1.0 + x) {
        x
    } else {
        1.0 / x
    }
}

/// Probabilities that a Brownian bridge from `x0` to `x1` with total
/// variance `var_dt` touches `hi` and `lo`, both ends inside the band.
/// The two one-sided terms are used as a first-order two-sided rule.
fn crossing_probabilities(x0: f64, x1: f64, var_dt: f64, lo: f64, hi: f64) -> (f64, f64) {
    if !(var_dt > 0.0) {
        return (0.0, 0.0);
    }
    let one_sided = |e: f64| if e < NEGLIGIBLE_EXPONENT { (-e).exp() } else { 0.0 };
    let p_hi = one_sided(2.0 * (hi - x0) * (hi - x1) / var_dt);
    let p_lo = one_sided(2.0 * (x0 - lo) * (x1 - lo) / var_dt);
    let total = p_hi + p_lo;
    if total > 1.0 {
        (p_hi / total, p_lo / total)
    } else {
        (p_hi, p_lo)
    }
}

/// One sparse (barrier) step of the hitting scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseExit {
    pub duration: f64,
    pub increment: f64,
    pub upper: bool,
}

#[derive(Debug, Clone)]
pub struct HittingSample {
    /// Latent prices at the sampling times.
    pub series: TickSeries,
    pub exits: Vec<SparseExit>,
}

/// Endogenous hitting-time scheme: `q'` regular steps of `1/(2n)`, then
/// repeating blocks of one barrier exit followed by `q' - 1` regular steps.
pub fn sample_hitting_scheme(path: &LatentPath, config: &DesignConfig, seed: u64) -> Result<HittingSample> {
    config.validate()?;
    let q = config.q_prime();
    let step = 0.5 / config.n as f64;
    let (up, down) = config.scaled_barriers();
    let mut cursor = PathCursor::new(path, seed, config.crossing_depth);
    let mut times = vec![0.0];
    let mut prices = vec![path.x()[0]];
    let mut exits = Vec::new();

    'outer: {
        for j in 1..=q {
            match cursor.value_at(j as f64 * step)? {
                Some(x) => {
                    times.push(j as f64 * step);
                    prices.push(x);
                }
                None => break 'outer,
            }
        }
        loop {
            let (t0, anchor) = cursor.current();
            let Some((t, x)) = cursor.first_exit(anchor - down, anchor + up) else {
                break 'outer;
            };
            times.push(t);
            prices.push(x);
            exits.push(SparseExit {
                duration: t - t0,
                increment: x - anchor,
                upper: x > anchor,
            });
            for _ in 1..q {
                let next = cursor.current().0 + step;
                match cursor.value_at(next)? {
                    Some(x) => {
                        times.push(next);
                        prices.push(x);
                    }
                    None => break 'outer,
                }
            }
        }
    }
    Ok(HittingSample {
        series: TickSeries::new(times, prices)?,
        exits,
    })
}

/// `0` followed by the arrival times of a Poisson process on `(0, 1]`.
pub fn sample_poisson(config: &DesignConfig, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let mut times = vec![0.0];
    let Ok(exp) = Exp::new(config.poisson_rate) else {
        return times;
    };
    let mut t = 0.0;
    loop {
        t += exp.sample(&mut rng);
        if t > 1.0 {
            break;
        }
        if t > *times.last().unwrap() {
            times.push(t);
        }
    }
    times
}

/// Latent values at increasing `times`, interpolating between grid nodes by
/// Brownian bridge.
pub fn sample_latent(path: &LatentPath, times: &[f64], seed: u64) -> Result<TickSeries> {
    let mut cursor = PathCursor::new(path, seed, 0);
    let mut prices = Vec::with_capacity(times.len());
    for &t in times {
        if !(0.0..=path.end_time() + TIME_EPS).contains(&t) {
            return Err(Error::param(format!(
                "time {t} outside the path coverage [0, {}]",
                path.end_time()
            )));
        }
        let x = cursor
            .value_at(t)?
            .ok_or_else(|| Error::param(format!("time {t} beyond the path end")))?;
        prices.push(x);
    }
    TickSeries::new(times.to_vec(), prices)
}

/// Adds i.i.d. `N(0, sigma_eps^2)` noise drawn from the noise seed alone.
pub fn observe_with_noise(latent: &TickSeries, noise: &NoiseSpec) -> Result<TickSeries> {
    if noise.sigma_eps == 0.0 {
        return Ok(latent.clone());
    }
    let dist = Normal::new(0.0, noise.sigma_eps)
        .map_err(|e| Error::param(format!("noise sd {}: {e}", noise.sigma_eps)))?;
    let mut rng = rng_from_seed(noise.seed);
    let prices = latent.prices().iter().map(|x| x + dist.sample(&mut rng)).collect();
    TickSeries::new(latent.times().to_vec(), prices)
}
