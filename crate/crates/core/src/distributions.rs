//! Empirical distribution machinery shared by every index.
//!
//! Two representations exist:
//!
//! * [`EmpiricalDistribution`] keeps the sorted sample (an ensemble forecast).
//! * [`PercentileGrid`] keeps 101 thresholds at the levels 0.00, 0.01, ..., 1.00
//!   (a climate distribution, stored only as percentiles).
//!
//! Conventions, fixed so results are reproducible bit for bit:
//!
//! * The empirical CDF is the right-continuous step function `#(v <= x) / n`.
//! * Empirical quantiles interpolate linearly between order statistics placed
//!   at plotting positions `i / (n - 1)`, so level 0 is the minimum and level 1
//!   the maximum.
//! * Grid quantiles interpolate linearly between the bracketing thresholds; the
//!   grid CDF is the inverse of that piecewise-linear map, taking the highest
//!   level on flat runs (right-continuous).
//! * Standard deviations use the population (1/n) convention. Grid moments are
//!   taken over the 101 thresholds, an approximation of the underlying sample.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Number of entries in a percentile grid.
pub const GRID_SIZE: usize = 101;

/// Common interface for one-dimensional distributions.
pub trait Univariate {
    /// Probability of a value `<= x`.
    fn cdf_at(&self, x: f64) -> Result<f64>;
    /// Interpolated quantile at `level` in `[0, 1]`.
    fn quantile(&self, level: f64) -> Result<f64>;
    /// Mean and population standard deviation.
    fn mean_stddev(&self) -> (f64, f64);
}

/// Sorted sample backing an empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Sorts a copy of `samples`; rejects empty or non-finite input.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        samples.sort_by(f64::total_cmp);
        // -0.0 sorts before 0.0 under total_cmp; both compare equal afterwards.
        Ok(Self { values: samples })
    }

    pub fn from_slice(samples: &[f64]) -> Result<Self> {
        Self::new(samples.to_vec())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// CDF without the NaN check, for callers that already validated `x`.
    pub(crate) fn cdf(&self, x: f64) -> f64 {
        let below = self.values.partition_point(|&v| v <= x);
        below as f64 / self.values.len() as f64
    }

    pub(crate) fn quantile_unchecked(&self, level: f64) -> f64 {
        interpolate_positions(&self.values, level)
    }

    /// Thresholds at the 101 percentile levels. Needs at least two samples.
    pub fn to_percentile_grid(&self) -> Result<PercentileGrid> {
        if self.values.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: self.values.len(),
            });
        }
        let mut thresholds = [0.0; GRID_SIZE];
        for (i, t) in thresholds.iter_mut().enumerate() {
            *t = self.quantile_unchecked(grid_level(i));
        }
        Ok(PercentileGrid { thresholds })
    }

    /// Applies `f` to every member. `f` must be non-decreasing.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }
}

impl Univariate for EmpiricalDistribution {
    fn cdf_at(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::NonFinite);
        }
        Ok(self.cdf(x))
    }

    fn quantile(&self, level: f64) -> Result<f64> {
        check_level(level)?;
        Ok(self.quantile_unchecked(level))
    }

    fn mean_stddev(&self) -> (f64, f64) {
        moments(&self.values)
    }
}

/// 101 non-decreasing thresholds at levels `i / 100`.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentileGrid {
    thresholds: [f64; GRID_SIZE],
}

impl PercentileGrid {
    pub fn new(thresholds: &[f64]) -> Result<Self> {
        if thresholds.len() != GRID_SIZE
            || thresholds.iter().any(|t| !t.is_finite())
            || thresholds.windows(2).any(|w| w[1] < w[0])
        {
            return Err(Error::InvalidGrid);
        }
        let mut arr = [0.0; GRID_SIZE];
        arr.copy_from_slice(thresholds);
        Ok(Self { thresholds: arr })
    }

    pub fn thresholds(&self) -> &[f64; GRID_SIZE] {
        &self.thresholds
    }

    /// The probability levels `0.00, 0.01, ..., 1.00`.
    pub fn levels() -> [f64; GRID_SIZE] {
        core::array::from_fn(grid_level)
    }

    pub(crate) fn cdf(&self, x: f64) -> f64 {
        let t = &self.thresholds;
        if x < t[0] {
            return 0.0;
        }
        if x >= t[GRID_SIZE - 1] {
            return 1.0;
        }
        // largest i with t[i] <= x; t[i + 1] > x by construction
        let i = t.partition_point(|&v| v <= x) - 1;
        let frac = (x - t[i]) / (t[i + 1] - t[i]);
        (i as f64 + frac) / 100.0
    }

    pub(crate) fn quantile_unchecked(&self, level: f64) -> f64 {
        interpolate_positions(&self.thresholds, level)
    }

    /// Applies a non-decreasing map to every threshold.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mapped: Vec<f64> = self.thresholds.iter().map(|&v| f(v)).collect();
        Self::new(&mapped)
    }
}

impl Univariate for PercentileGrid {
    fn cdf_at(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::NonFinite);
        }
        Ok(self.cdf(x))
    }

    fn quantile(&self, level: f64) -> Result<f64> {
        check_level(level)?;
        Ok(self.quantile_unchecked(level))
    }

    fn mean_stddev(&self) -> (f64, f64) {
        moments(&self.thresholds)
    }
}

pub(crate) fn grid_level(i: usize) -> f64 {
    i as f64 / 100.0
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if (0.0..=1.0).contains(&level) {
        Ok(())
    } else {
        Err(Error::LevelOutOfRange(level))
    }
}

/// Linear interpolation over sorted `values` placed at positions `i / (n - 1)`.
/// Positions within a few ulps of a node snap to it, so node levels such as
/// `29.0 / 100.0` return the stored value exactly.
fn interpolate_positions(values: &[f64], level: f64) -> f64 {
    let n = values.len();
    if n == 1 {
        return values[0];
    }
    let last = (n - 1) as f64;
    let pos = (level * last).clamp(0.0, last);
    let nearest = libm::round(pos);
    if (pos - nearest).abs() <= 4.0 * f64::EPSILON * pos.max(1.0) {
        return values[nearest as usize];
    }
    let i = pos as usize;
    let frac = pos - i as f64;
    let (lo, hi) = (values[i], values[i + 1]);
    if lo == hi {
        lo
    } else {
        lo + frac * (hi - lo)
    }
}

fn moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma, Normal, StandardNormal};

    fn emp(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::from_slice(v).unwrap()
    }

    fn linear_grid() -> PercentileGrid {
        let t: Vec<f64> = (0..GRID_SIZE).map(|i| i as f64).collect();
        PercentileGrid::new(&t).unwrap()
    }

    #[test]
    fn build_sorts_and_sizes() {
        let d = emp(&[3.0, 1.0, 2.0]);
        assert_eq!(d.values(), &[1.0, 2.0, 3.0]);
        assert_eq!(d.size(), 3);
        let d = emp(&[5.0]);
        assert_eq!(d.values(), &[5.0]);
        assert_eq!(d.size(), 1);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(EmpiricalDistribution::new(vec![]), Err(Error::EmptySample));
        assert_eq!(EmpiricalDistribution::new(vec![1.0, f64::NAN]), Err(Error::NonFinite));
        assert_eq!(EmpiricalDistribution::new(vec![f64::INFINITY]), Err(Error::NonFinite));
    }

    #[test]
    fn build_matches_direct_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws: Vec<f64> = (0..50).map(|_| StandardNormal.sample(&mut rng)).collect();
        let d = emp(&draws);
        let mut sorted = draws.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(d.size(), 50);
        assert_eq!(d.values(), sorted.as_slice());
        assert_eq!(d.min(), sorted[0]);
        assert_eq!(d.max(), sorted[49]);
    }

    #[test]
    fn cdf_counting_convention() {
        let d = emp(&[1.0, 2.0, 3.0]);
        assert_eq!(d.cdf_at(2.0).unwrap(), 2.0 / 3.0);
        assert_eq!(d.cdf_at(0.5).unwrap(), 0.0);
        assert_eq!(d.cdf_at(10.0).unwrap(), 1.0);
        assert_eq!(d.cdf_at(f64::NAN), Err(Error::NonFinite));
        // ties counted inclusively
        assert_eq!(emp(&[1.0, 1.0, 2.0]).cdf_at(1.0).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(linear_grid().quantile(0.25).unwrap(), 25.0);
        assert_eq!(emp(&[0.0, 10.0]).quantile(0.5).unwrap(), 5.0);
        assert_eq!(emp(&[4.0]).quantile(0.3).unwrap(), 4.0);
        assert_eq!(emp(&[0.0, 10.0]).quantile(1.5), Err(Error::LevelOutOfRange(1.5)));
        assert_eq!(linear_grid().quantile(-0.1), Err(Error::LevelOutOfRange(-0.1)));
    }

    #[test]
    fn quantile_of_normal_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let q = emp(&draws).quantile(0.9).unwrap();
        let expected = crate::special::normal_quantile(0.9);
        assert!((expected - 1.2816).abs() < 1e-4);
        assert!((q - expected).abs() < 0.05, "q = {q}");
    }

    #[test]
    fn grid_examples() {
        let v: Vec<f64> = (0..=100).map(f64::from).collect();
        let g = emp(&v).to_percentile_grid().unwrap();
        assert_eq!(g.thresholds().as_slice(), v.as_slice());

        let g = emp(&[0.0, 1.0]).to_percentile_grid().unwrap();
        for (i, t) in g.thresholds().iter().enumerate() {
            assert!((t - i as f64 / 100.0).abs() < 1e-15);
        }

        assert_eq!(
            emp(&[1.0]).to_percentile_grid(),
            Err(Error::TooFewSamples { needed: 2, got: 1 })
        );
    }

    #[test]
    fn grid_of_gamma_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let gamma = Gamma::new(2.0, 5.0).unwrap();
        let draws: Vec<f64> = (0..2000).map(|_| gamma.sample(&mut rng)).collect();
        let g = emp(&draws).to_percentile_grid().unwrap();
        let analytic = crate::special::gamma_quantile(0.95, 2.0, 5.0);
        assert!((analytic - 23.719).abs() < 1e-3);
        assert!((g.thresholds()[95] - analytic).abs() / analytic < 0.03);
    }

    #[test]
    fn grid_validation() {
        assert_eq!(PercentileGrid::new(&[0.0; 100]), Err(Error::InvalidGrid));
        let mut t: Vec<f64> = (0..GRID_SIZE).map(|i| i as f64).collect();
        t[50] = 10.0;
        assert_eq!(PercentileGrid::new(&t), Err(Error::InvalidGrid));
    }

    #[test]
    fn grid_cdf_inverts_quantile() {
        let g = linear_grid();
        assert_eq!(g.cdf_at(-1.0).unwrap(), 0.0);
        assert_eq!(g.cdf_at(100.0).unwrap(), 1.0);
        assert!((g.cdf_at(25.5).unwrap() - 0.255).abs() < 1e-15);
        // flat run of zeros: right-continuous, top of the run
        let mut t = [0.0; GRID_SIZE];
        for (i, v) in t.iter_mut().enumerate().skip(40) {
            *v = (i - 40) as f64;
        }
        let g = PercentileGrid::new(&t).unwrap();
        assert_eq!(g.cdf_at(0.0).unwrap(), 0.40);
        assert_eq!(g.quantile(0.2).unwrap(), 0.0);
    }

    #[test]
    fn moments_examples() {
        assert_eq!(emp(&[2.0, 2.0, 2.0]).mean_stddev(), (2.0, 0.0));
        assert_eq!(emp(&[0.0, 2.0]).mean_stddev(), (1.0, 1.0));
        assert_eq!(emp(&[7.0]).mean_stddev(), (7.0, 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let normal = Normal::new(3.0, 2.0).unwrap();
        let draws: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let (m, s) = emp(&draws).mean_stddev();
        assert!((m - 3.0).abs() < 0.1);
        assert!((s - 2.0).abs() < 0.1);
    }

    #[test]
    fn grid_node_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..337).map(|_| StandardNormal.sample(&mut rng)).collect();
        let g = emp(&draws).to_percentile_grid().unwrap();
        for (level, t) in PercentileGrid::levels().iter().zip(g.thresholds()) {
            assert_eq!(g.quantile(*level).unwrap(), *t);
        }
    }

    #[test]
    fn quantiles_converge_to_analytic() {
        let mut rng = ChaCha8Rng::seed_from_u64(314);
        let mut worst = Vec::new();
        for &n in &[200usize, 2_000, 20_000] {
            let draws: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let d = emp(&draws);
            let err = (1..100)
                .map(|i| {
                    let l = i as f64 / 100.0;
                    (d.quantile(l).unwrap() - crate::special::normal_quantile(l)).abs()
                })
                .fold(0.0, f64::max);
            worst.push(err);
        }
        assert!(worst[2] < worst[0], "{worst:?}");
        assert!(worst[2] < 0.1, "{worst:?}");
    }

    fn sample_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3..1e3f64, 1..60)
    }

    proptest! {
        #[test]
        fn cdf_is_monotone_and_bounded(v in sample_strategy(), a in -2e3..2e3f64, b in -2e3..2e3f64) {
            let d = emp(&v);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (fl, fh) = (d.cdf_at(lo).unwrap(), d.cdf_at(hi).unwrap());
            prop_assert!(fl <= fh);
            prop_assert!((0.0..=1.0).contains(&fl) && (0.0..=1.0).contains(&fh));
        }

        #[test]
        fn quantile_is_monotone(v in sample_strategy(), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
            let d = emp(&v);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(d.quantile(lo).unwrap() <= d.quantile(hi).unwrap());
            let g = if d.size() >= 2 { Some(d.to_percentile_grid().unwrap()) } else { None };
            if let Some(g) = g {
                prop_assert!(g.quantile(lo).unwrap() <= g.quantile(hi).unwrap());
            }
        }

        #[test]
        // F(x) = k/n puts the interpolated quantile at position k - k/n, i.e.
        // between x and the next larger sample point.
        fn quantile_of_cdf_stays_in_next_gap(v in sample_strategy()) {
            let d = emp(&v);
            let values = d.values();
            for &x in values {
                let q = d.quantile(d.cdf_at(x).unwrap()).unwrap();
                let next = values.iter().copied().find(|&y| y > x).unwrap_or(x);
                let slack = 1e-9 * x.abs().max(next.abs()).max(1.0);
                prop_assert!(x - slack <= q && q <= next + slack, "q={} x={} next={}", q, x, next);
            }
        }

        #[test]
        fn quantile_is_affine_equivariant(v in sample_strategy(), a in 0.01..100.0f64, b in -100.0..100.0f64, level in 0.0..=1.0f64) {
            let d = emp(&v);
            let t = d.map(|x| a * x + b).unwrap();
            let lhs = t.quantile(level).unwrap();
            let rhs = a * d.quantile(level).unwrap() + b;
            let scale = lhs.abs().max(rhs.abs()).max(a * 1e3);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "lhs={} rhs={}", lhs, rhs);
        }

        #[test]
        fn grid_cdf_is_monotone(v in prop::collection::vec(-10.0..10.0f64, 2..40), a in -20.0..20.0f64, b in -20.0..20.0f64) {
            let g = emp(&v).to_percentile_grid().unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(g.cdf_at(lo).unwrap() <= g.cdf_at(hi).unwrap());
        }
    }
}
