//! In-memory steps shared by the subcommands: climates for every
//! (location, day) needed, and index fields per validity date.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use wxindex_core::climatology::{build_climate, day_of_year, ClimateDistribution, ReforecastArchive};
use wxindex_core::distributions::EmpiricalDistribution;
use wxindex_core::indices::{compute_index_field, IndexField, IndexKind, IndexParams};
use wxindex_core::synthgen::EnsembleRecord;
use wxindex_core::verification::ObsClimate;
use wxindex_core::Result;

/// Climates keyed by (location, day of year).
pub type ClimateTable = ObsClimate;

/// Builds a climate for every location and every day of year in `dates`.
pub fn build_climates<'a>(
    archive: &ReforecastArchive,
    locations: impl IntoIterator<Item = &'a str>,
    dates: impl IntoIterator<Item = NaiveDate>,
    window_days: u16,
) -> Result<ClimateTable> {
    let mut by_day: BTreeMap<u16, NaiveDate> = BTreeMap::new();
    for d in dates {
        by_day.entry(day_of_year(d)).or_insert(d);
    }
    let mut table = ClimateTable::new();
    for loc in locations {
        for (&doy, &date) in &by_day {
            table.insert((loc.to_string(), doy), build_climate(archive, loc, date, window_days)?);
        }
    }
    Ok(table)
}

/// One index field per validity date from the forecasts at `lead`.
pub fn index_fields(
    forecasts: &[EnsembleRecord],
    lead: u32,
    climates: &ClimateTable,
    kind: IndexKind,
    params: IndexParams,
) -> Result<Vec<IndexField>> {
    let mut by_date: BTreeMap<NaiveDate, BTreeMap<String, EmpiricalDistribution>> = BTreeMap::new();
    for rec in forecasts.iter().filter(|r| r.lead_days == lead) {
        by_date
            .entry(rec.validity_date)
            .or_default()
            .insert(rec.location.clone(), EmpiricalDistribution::from_slice(&rec.members)?);
    }
    let mut fields = Vec::with_capacity(by_date.len());
    for (date, ensembles) in by_date {
        let doy = day_of_year(date);
        let mut local = BTreeMap::new();
        for loc in ensembles.keys() {
            let climate = climates
                .get(&(loc.clone(), doy))
                .ok_or_else(|| wxindex_core::Error::MissingClimate {
                    location: loc.clone(),
                    date,
                })?;
            local.insert(loc.clone(), climate.clone());
        }
        fields.push(compute_index_field(&ensembles, &local, kind, params, date, lead)?);
    }
    Ok(fields)
}

/// Validity dates and locations of a set of forecasts.
pub fn forecast_extent(forecasts: &[EnsembleRecord]) -> (BTreeSet<String>, BTreeSet<NaiveDate>) {
    let locations = forecasts.iter().map(|r| r.location.clone()).collect();
    let dates = forecasts.iter().map(|r| r.validity_date).collect();
    (locations, dates)
}

/// Climate lookup used by index computation when climates are stored per lead.
pub fn climate_for<'a>(table: &'a ClimateTable, location: &str, date: NaiveDate) -> Option<&'a ClimateDistribution> {
    table.get(&(location.to_string(), day_of_year(date)))
}
