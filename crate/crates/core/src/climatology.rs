//! Local climate distributions pooled from an archive of runs.
//!
//! A climate is tied to one location and one day of the year. Days of the
//! year live on a fixed 365-day calendar: the year is ignored, February 29 is
//! folded onto February 28 and windows wrap across the new year.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{Datelike, NaiveDate};

use crate::distributions::{EmpiricalDistribution, PercentileGrid, Univariate};
use crate::{Error, Result};

const DAYS_IN_YEAR: u16 = 365;
const MONTH_OFFSETS: [u16; 12] = [0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334];

/// Day of year in `1..=365`, with February 29 mapped onto February 28.
pub fn day_of_year(date: NaiveDate) -> u16 {
    let month = date.month0() as usize;
    let day = if month == 1 && date.day() == 29 {
        28
    } else {
        date.day() as u16
    };
    MONTH_OFFSETS[month] + day
}

/// Circular distance between two days of the year.
pub fn day_distance(a: u16, b: u16) -> u16 {
    let d = a.abs_diff(b);
    d.min(DAYS_IN_YEAR - d)
}

/// One archived run: all member values valid on one date at one location.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveRecord {
    pub location: String,
    pub validity_date: NaiveDate,
    pub members: Vec<f64>,
}

/// Reforecast (or observation) archive indexed by location and day of year.
///
/// An observation archive is the same structure with one member per record.
#[derive(Debug, Clone)]
pub struct ReforecastArchive {
    records: Vec<ArchiveRecord>,
    members_per_run: usize,
    years_covered: u32,
    // location -> 365 buckets of record indices
    by_day: BTreeMap<String, Vec<Vec<usize>>>,
}

impl ReforecastArchive {
    pub fn new(records: Vec<ArchiveRecord>, members_per_run: usize, years_covered: u32) -> Result<Self> {
        let mut by_day: BTreeMap<String, Vec<Vec<usize>>> = BTreeMap::new();
        for (i, rec) in records.iter().enumerate() {
            if rec.members.is_empty() {
                return Err(Error::EmptySample);
            }
            if rec.members.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            let buckets = by_day
                .entry(rec.location.clone())
                .or_insert_with(|| alloc::vec![Vec::new(); DAYS_IN_YEAR as usize]);
            buckets[(day_of_year(rec.validity_date) - 1) as usize].push(i);
        }
        Ok(Self {
            records,
            members_per_run,
            years_covered,
            by_day,
        })
    }

    pub fn records(&self) -> &[ArchiveRecord] {
        &self.records
    }

    pub fn members_per_run(&self) -> usize {
        self.members_per_run
    }

    pub fn years_covered(&self) -> u32 {
        self.years_covered
    }

    pub fn locations(&self) -> impl Iterator<Item = &str> {
        self.by_day.keys().map(String::as_str)
    }

    pub fn contains_location(&self, location: &str) -> bool {
        self.by_day.contains_key(location)
    }

    /// All member values at `location` whose day of year lies within
    /// `window_days` of `target_day`, in day order.
    pub fn pool(&self, location: &str, target_day: u16, window_days: u16) -> Result<Vec<f64>> {
        let buckets = self
            .by_day
            .get(location)
            .ok_or_else(|| Error::UnknownLocation(location.to_string()))?;
        let mut pooled = Vec::new();
        for day in 1..=DAYS_IN_YEAR {
            if day_distance(day, target_day) <= window_days {
                for &i in &buckets[(day - 1) as usize] {
                    pooled.extend_from_slice(&self.records[i].members);
                }
            }
        }
        Ok(pooled)
    }
}

/// Climate distribution G for one location and day of year.
///
/// `mean` and `stddev` are the moments of the 101 grid thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ClimateDistribution {
    pub grid: PercentileGrid,
    pub mean: f64,
    pub stddev: f64,
    pub location: String,
    pub day_of_year: u16,
    pub sample_count: usize,
}

impl ClimateDistribution {
    pub fn from_grid(location: impl Into<String>, day_of_year: u16, grid: PercentileGrid, sample_count: usize) -> Self {
        let (mean, stddev) = grid.mean_stddev();
        Self {
            grid,
            mean,
            stddev,
            location: location.into(),
            day_of_year,
            sample_count,
        }
    }

    pub fn from_samples(location: impl Into<String>, day_of_year: u16, samples: Vec<f64>) -> Result<Self> {
        let location = location.into();
        let count = samples.len();
        if count < 2 {
            return Err(Error::InsufficientClimate {
                location,
                day_of_year,
                pooled: count,
            });
        }
        let grid = EmpiricalDistribution::new(samples)?.to_percentile_grid()?;
        Ok(Self::from_grid(location, day_of_year, grid, count))
    }
}

impl Univariate for ClimateDistribution {
    fn cdf_at(&self, x: f64) -> Result<f64> {
        self.grid.cdf_at(x)
    }

    fn quantile(&self, level: f64) -> Result<f64> {
        self.grid.quantile(level)
    }

    fn mean_stddev(&self) -> (f64, f64) {
        (self.mean, self.stddev)
    }
}

/// Builds the climate at `location` for the day of year of `validity_date`,
/// pooling every archived value within `window_days` days (any year).
pub fn build_climate(
    archive: &ReforecastArchive,
    location: &str,
    validity_date: NaiveDate,
    window_days: u16,
) -> Result<ClimateDistribution> {
    let doy = day_of_year(validity_date);
    let pooled = archive.pool(location, doy, window_days)?;
    ClimateDistribution::from_samples(location, doy, pooled)
}

/// Return period in years of an event at climate quantile level `q`:
/// `1 / (1 - q)`.
pub fn return_period(q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::LevelOutOfRange(q));
    }
    Ok(1.0 / (1.0 - q))
}
