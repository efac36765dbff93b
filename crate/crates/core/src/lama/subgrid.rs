//! Local averages on the `q` interleaved sub-grids.
//!
//! Sub-grid `k` (`0 <= k < q`) consists of the observations with index
//! `e = i q + p + k`, `i = 0, 1, ...`; its `i`-th local average is the mean
//! of `Y` over indices `e - p + 1 ..= e`. Windows that would run past the
//! last observation are dropped.

use crate::error::{Error, Result};
use crate::realized::pairwise_sum;
use crate::series::TickSeries;

/// Local-average differences for the sub-grid estimators.
///
/// Differences are taken pairwise between prices before averaging, so
/// results depend on the prices only through `Y_a - Y_b`.
pub(crate) struct LocalAverager<'a> {
    series: &'a TickSeries,
    p: usize,
    q: usize,
}

impl<'a> LocalAverager<'a> {
    pub(crate) fn new(series: &'a TickSeries, p: usize, q: usize) -> Self {
        Self {
            series,
            p,
            q,
        }
    }

    pub(crate) fn n_obs(&self) -> usize {
        self.series.n_increments()
    }

    /// `Ybar(a) - Ybar(b)` for averaging windows ending at indices `a` and `b`.
    pub(crate) fn window_diff(&self, a: usize, b: usize) -> f64 {
        let y = self.series.prices();
        let mut acc = 0.0;
        for r in 0..self.p {
            acc += y[a - r] - y[b - r];
        }
        acc / self.p as f64
    }

    /// Number of local averages on sub-grid `k`.
    pub(crate) fn points_on(&self, k: usize) -> usize {
        let first = self.p + k;
        if first > self.n_obs() {
            0
        } else {
            (self.n_obs() - first) / self.q + 1
        }
    }

    /// Calls `f(e, dYbar)` for every increment of sub-grid `k`, where `e` is
    /// the index of the increment's right endpoint.
    pub(crate) fn for_each_increment(&self, k: usize, mut f: impl FnMut(usize, f64)) {
        let mut e = self.q + self.p + k;
        while e <= self.n_obs() {
            f(e, self.window_diff(e, e - self.q));
            e += self.q;
        }
    }

    /// `[Ybar, Ybar]^{S_k}_1` and the number of increments it sums.
    pub(crate) fn subgrid_rv(&self, k: usize) -> (f64, usize) {
        let mut sq = Vec::with_capacity(self.points_on(k));
        self.for_each_increment(k, |_, d| sq.push(d * d));
        (pairwise_sum(&sq), sq.len())
    }

    pub(crate) fn check_subgrids(&self, count: usize) -> Result<()> {
        for k in 0..count {
            let pts = self.points_on(k);
            if pts < 2 {
                return Err(Error::numeric(format!(
                    "sub-grid {k} has {pts} local averages, need at least 2"
                )));
            }
        }
        Ok(())
    }
}

/// `(t_{iq+p+k}, Ybar^k_i)` for every complete window on sub-grid `k`.
pub fn local_averages(series: &TickSeries, p: usize, q: usize, k: usize) -> Result<Vec<(f64, f64)>> {
    if p < 1 || q < 1 {
        return Err(Error::param("p and q must be at least 1"));
    }
    if k >= q {
        return Err(Error::param(format!("sub-grid index {k} must be below q = {q}")));
    }
    let t = series.times();
    let y = series.prices();
    let mut out = Vec::new();
    let mut e = p + k;
    while e < y.len() {
        let mean = y[e + 1 - p..=e].iter().sum::<f64>() / p as f64;
        out.push((t[e], mean));
        e += q;
    }
    Ok(out)
}

/// `A(p, q) = (2/q) sum_{j=1}^{p-1} (j^2/p^2 - j/p)`, the finite-sample
/// attenuation of the multi-grid estimator. Always `<= 0`.
pub fn a_pq(p: usize, q: usize) -> f64 {
    let pf = p as f64;
    let s: f64 = (1..p)
        .map(|j| {
            let x = j as f64 / pf;
            x * x - x
        })
        .sum();
    2.0 * s / q as f64
}

/// `(1/q) sum_k [Ybar, Ybar]^{S_k}_1`.
pub fn multigrid_rv(series: &TickSeries, p: usize, q: usize) -> Result<f64> {
    if p < 1 || q < 1 {
        return Err(Error::param("p and q must be at least 1"));
    }
    let avg = LocalAverager::new(series, p, q);
    avg.check_subgrids(q)?;
    let per_grid: Vec<f64> = (0..q).map(|k| avg.subgrid_rv(k).0).collect();
    Ok(per_grid.iter().sum::<f64>() / q as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ramp(n: usize) -> TickSeries {
        TickSeries::regular((0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn hand_indexing() {
        let s = ramp(10);
        let la = local_averages(&s, 2, 3, 0).unwrap();
        let t = s.times();
        assert_eq!(la, vec![(t[2], 1.5), (t[5], 4.5), (t[8], 7.5)]);
    }

    #[test]
    fn identity_averaging() {
        let s = TickSeries::regular(vec![0.3, -1.0, 2.0, 0.5, 0.25, 4.0, 1.0]).unwrap();
        let la = local_averages(&s, 1, 2, 1).unwrap();
        let y = s.prices();
        assert_eq!(la.iter().map(|v| v.1).collect::<Vec<_>>(), vec![y[2], y[4], y[6]]);
        assert!(local_averages(&s, 1, 2, 2).is_err());
    }

    #[test]
    fn a_pq_hand_values() {
        assert_eq!(a_pq(1, 7), 0.0);
        assert_relative_eq!(a_pq(2, 2), -0.25, max_relative = 1e-15);
        assert_relative_eq!(a_pq(5, 20), -0.08, max_relative = 1e-14);
        assert!((a_pq(5, 20) - (-5.0 / 60.0)).abs() < 0.004);
    }

    #[test]
    fn a_pq_asymptote() {
        for p in [2usize, 3, 10, 100, 1000] {
            let q = 3 * p;
            let a = a_pq(p, q);
            let lim = -(p as f64) / (3.0 * q as f64);
            assert!(a <= 0.0 && a > 1.5 * lim, "p = {p}: {a}");
        }
        for p in [10usize, 100, 1000] {
            let ratio = a_pq(p, 2 * p) * 3.0 * (2 * p) as f64 / p as f64;
            // exact value is -(1 - 1/p^2)
            assert_relative_eq!(ratio, -(1.0 - 1.0 / (p * p) as f64), max_relative = 1e-10);
        }
    }

    #[test]
    fn multigrid_two_subgrids_by_hand() {
        let y = [0.0, 0.5, -0.25, 1.0, 0.75, 2.0, 1.5];
        let s = TickSeries::regular(y.to_vec()).unwrap();
        // p = 1, q = 2: grid 0 at indices 1, 3, 5; grid 1 at 2, 4, 6
        let g0 = (y[3] - y[1]).powi(2) + (y[5] - y[3]).powi(2);
        let g1 = (y[4] - y[2]).powi(2) + (y[6] - y[4]).powi(2);
        assert_relative_eq!(multigrid_rv(&s, 1, 2).unwrap(), 0.5 * (g0 + g1), max_relative = 1e-14);
    }

    #[test]
    fn single_grid_equals_rv_without_first_tick() {
        let y = vec![0.1, 0.5, -0.25, 1.0, 0.75, 2.0, 1.5];
        let s = TickSeries::regular(y.clone()).unwrap();
        let tail = TickSeries::regular(y[1..].to_vec()).unwrap();
        assert_eq!(multigrid_rv(&s, 1, 1).unwrap(), crate::realized::rv(&tail));
    }

    #[test]
    fn empty_subgrid_is_error() {
        let s = ramp(6);
        assert!(multigrid_rv(&s, 2, 4).is_err());
    }
}
