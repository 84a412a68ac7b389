use alloc::vec::Vec;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::VerificationSample;
use crate::distributions::EmpiricalDistribution;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    /// Length of the consecutive date blocks that are resampled whole.
    pub block_days: u32,
    pub replicates: usize,
    /// Lower and upper percentile levels of the interval.
    pub levels: (f64, f64),
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            block_days: 5,
            replicates: 1000,
            levels: (0.05, 0.95),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BootstrapInterval {
    /// Statistic on the full sample.
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

/// Block bootstrap over items stamped with `dates`.
///
/// The date range is cut into consecutive `block_days`-day blocks counted from
/// the earliest date; each replicate draws as many blocks as there are, with
/// replacement, and passes the indices of their items to `statistic`.
/// Replicate `i` draws from ChaCha stream `i` of `seed`, so results do not
/// depend on evaluation order.
pub fn block_bootstrap_ci(
    dates: &[NaiveDate],
    statistic: impl Fn(&[usize]) -> Result<f64>,
    config: &BootstrapConfig,
) -> Result<BootstrapInterval> {
    if config.block_days == 0 || config.replicates < 100 {
        return Err(Error::BadConfig(
            "need block_days >= 1 and at least 100 replicates".into(),
        ));
    }
    let (lo, hi) = config.levels;
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err(Error::LevelOutOfRange(if (0.0..=1.0).contains(&lo) { hi } else { lo }));
    }
    let first = dates.iter().min().ok_or(Error::TooFewBlocks(0))?;
    let block_of = |d: &NaiveDate| ((*d - *first).num_days() as u64 / config.block_days as u64) as usize;
    let n_blocks = dates.iter().map(block_of).max().unwrap_or(0) + 1;
    if n_blocks < 2 {
        return Err(Error::TooFewBlocks(n_blocks));
    }
    let mut blocks: Vec<Vec<usize>> = alloc::vec![Vec::new(); n_blocks];
    for (i, d) in dates.iter().enumerate() {
        blocks[block_of(d)].push(i);
    }

    let all: Vec<usize> = (0..dates.len()).collect();
    let estimate = statistic(&all)?;

    let mut stats = Vec::with_capacity(config.replicates);
    let mut indices = Vec::with_capacity(dates.len());
    for r in 0..config.replicates {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(r as u64);
        indices.clear();
        for _ in 0..n_blocks {
            indices.extend_from_slice(&blocks[rng.random_range(0..n_blocks)]);
        }
        stats.push(statistic(&indices)?);
    }
    let dist = EmpiricalDistribution::new(stats)?;
    Ok(BootstrapInterval {
        estimate,
        low: dist.quantile_unchecked(lo),
        high: dist.quantile_unchecked(hi),
    })
}

/// [`block_bootstrap_ci`] over the records of a verification sample.
pub fn block_bootstrap_sample(
    sample: &VerificationSample,
    statistic: impl Fn(&VerificationSample) -> Result<f64>,
    config: &BootstrapConfig,
) -> Result<BootstrapInterval> {
    let dates: Vec<NaiveDate> = sample.records().iter().map(|r| r.validity_date).collect();
    block_bootstrap_ci(
        &dates,
        |idx| statistic(&sample.with_records(idx.iter().map(|&i| sample.records()[i].clone()).collect())),
        config,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Days;
    use rand_distr::{Distribution, StandardNormal};

    fn days(start: NaiveDate, n: u64, per_day: usize) -> Vec<NaiveDate> {
        (0..n)
            .flat_map(|d| core::iter::repeat_n(start + Days::new(d), per_day))
            .collect()
    }

    fn start() -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 6, 1).unwrap()
    }

    #[test]
    fn constant_statistic_has_zero_width() {
        let dates = days(start(), 30, 3);
        let ci = block_bootstrap_ci(&dates, |_| Ok(0.25), &BootstrapConfig::default()).unwrap();
        assert_eq!((ci.low, ci.high, ci.estimate), (0.25, 0.25, 0.25));
    }

    #[test]
    fn deterministic_under_seed() {
        let dates = days(start(), 40, 2);
        let values: Vec<f64> = (0..dates.len()).map(|i| ((i * 37) % 11) as f64).collect();
        let mean = |idx: &[usize]| Ok(idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64);
        let config = BootstrapConfig {
            seed: 9,
            ..BootstrapConfig::default()
        };
        let a = block_bootstrap_ci(&dates, mean, &config).unwrap();
        let b = block_bootstrap_ci(&dates, mean, &config).unwrap();
        assert_eq!(a, b);
        assert!(a.low < a.estimate && a.estimate < a.high);
        let c = block_bootstrap_ci(&dates, mean, &BootstrapConfig { seed: 10, ..config }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn config_and_block_errors() {
        let dates = days(start(), 4, 1);
        let ok = |_: &[usize]| Ok(1.0);
        let config = BootstrapConfig::default();
        assert_eq!(block_bootstrap_ci(&dates, ok, &config), Err(Error::TooFewBlocks(1)));
        assert_eq!(block_bootstrap_ci(&[], ok, &config), Err(Error::TooFewBlocks(0)));
        let few = BootstrapConfig {
            replicates: 99,
            ..config
        };
        assert!(matches!(block_bootstrap_ci(&dates, ok, &few), Err(Error::BadConfig(_))));
        let zero = BootstrapConfig {
            block_days: 0,
            ..config
        };
        assert!(matches!(
            block_bootstrap_ci(&dates, ok, &zero),
            Err(Error::BadConfig(_))
        ));
        let failing = |_: &[usize]| Err(Error::DegenerateSample);
        assert_eq!(
            block_bootstrap_ci(&days(start(), 20, 1), failing, &config),
            Err(Error::DegenerateSample)
        );
    }

    #[test]
    fn width_shrinks_with_longer_period() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let values: Vec<f64> = (0..160 * 4).map(|_| StandardNormal.sample(&mut rng)).collect();
        let width = |n_days: u64| {
            let dates = days(start(), n_days, 4);
            let mean = |idx: &[usize]| Ok(idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64);
            let ci = block_bootstrap_ci(&dates, mean, &BootstrapConfig::default()).unwrap();
            ci.high - ci.low
        };
        let (w40, w160) = (width(40), width(160));
        // four times the blocks: roughly half the width
        assert!(w160 < 0.75 * w40, "{w40} {w160}");
    }
}
