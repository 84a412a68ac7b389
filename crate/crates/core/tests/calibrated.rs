//! Verification statistics on calibrated synthetic data, where truth and
//! climate draws are exchangeable.

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{Days, NaiveDate};
use wxindex_core::climatology::{build_climate, day_of_year, ReforecastArchive};
use wxindex_core::distributions::EmpiricalDistribution;
use wxindex_core::indices::{efi, IndexKind};
use wxindex_core::synthgen::{generate, ScenarioConfig, SyntheticDataset};
use wxindex_core::verification::*;

fn climates(archive: &ReforecastArchive, data: &SyntheticDataset) -> ObsClimate {
    let mut map = ObsClimate::new();
    for loc in &data.locations {
        for d in 0..data.config.days as u64 {
            let date = data.config.start_date + Days::new(d);
            map.insert(
                (loc.clone(), day_of_year(date)),
                build_climate(archive, loc, date, 14).unwrap(),
            );
        }
    }
    map
}

fn observation_sample(data: &SyntheticDataset) -> VerificationSample {
    let obs_climate = Arc::new(climates(&data.observation_history, data));
    let records = data
        .verification_observations()
        .into_iter()
        .map(|((location, validity_date), observed)| VerificationRecord {
            location,
            validity_date,
            index_value: Some(0.0),
            observed,
        })
        .collect();
    VerificationSample::new(records, 0.95, obs_climate).unwrap()
}

// Only observations matter here, so forecasts are kept minimal.
fn observation_config(locations: usize, days: u32) -> ScenarioConfig {
    ScenarioConfig {
        locations,
        days,
        ensemble_size: 2,
        reforecast_members: 1,
        lead_times: vec![1],
        dispersion: vec![1.0],
        bias: vec![0.0],
        ..ScenarioConfig::default()
    }
}

#[test]
fn event_frequency_matches_quantile() {
    let data = generate(&observation_config(400, 250)).unwrap();
    let sample = observation_sample(&data);
    assert_eq!(sample.len(), 100_000);
    let pairs = binarize(&sample).unwrap();
    let freq = pairs.iter().filter(|p| p.1).count() as f64 / pairs.len() as f64;
    assert!((freq - 0.05).abs() <= 0.005, "{freq}");
}

#[test]
fn conditional_filter_retains_upper_tail() {
    let data = generate(&observation_config(200, 90)).unwrap();
    let sample = observation_sample(&data);
    let kept = conditional_filter(&sample, 0.70).unwrap();
    let retained = kept.len() as f64 / sample.len() as f64;
    assert!((retained - 0.30).abs() <= 0.02, "{retained}");
    let events = binarize(&kept).unwrap().iter().filter(|p| p.1).count() as f64;
    let all_events = binarize(&sample).unwrap().iter().filter(|p| p.1).count() as f64;
    assert_eq!(events, all_events);
    let base_rate = events / kept.len() as f64;
    assert!((base_rate - 0.05 / 0.30).abs() < 0.02, "{base_rate}");
}

fn efi_sample(seed: u64) -> VerificationSample {
    let config = ScenarioConfig {
        locations: 30,
        days: 60,
        ensemble_size: 20,
        lead_times: vec![3],
        dispersion: vec![1.0],
        bias: vec![0.0],
        seed,
        ..ScenarioConfig::default()
    };
    let data = generate(&config).unwrap();
    let model = climates(&data.reforecasts[&3], &data);
    let obs = data.verification_observations();
    let records = data
        .forecasts
        .iter()
        .map(|r| {
            let f = EmpiricalDistribution::from_slice(&r.members).unwrap();
            let g = &model[&(r.location.clone(), day_of_year(r.validity_date))];
            VerificationRecord {
                location: r.location.clone(),
                validity_date: r.validity_date,
                index_value: efi(&f, g).value,
                observed: obs[&(r.location.clone(), r.validity_date)],
            }
        })
        .collect();
    VerificationSample::new(records, 0.9, Arc::new(climates(&data.observation_history, &data))).unwrap()
}

fn auc(sample: &VerificationSample) -> wxindex_core::Result<f64> {
    let pairs = binarize(sample)?;
    Ok(roc_curve(&pairs, &grid500(IndexKind::Efi, &[])?)?.auc)
}

#[test]
fn bootstrap_interval_covers_estimate() {
    let mut covered = 0;
    for seed in 0..10 {
        let sample = efi_sample(seed);
        let config = BootstrapConfig {
            replicates: 200,
            seed,
            ..BootstrapConfig::default()
        };
        let ci = block_bootstrap_sample(&sample, auc, &config).unwrap();
        assert!(ci.estimate > 0.5, "{ci:?}");
        if ci.low <= ci.estimate && ci.estimate <= ci.high {
            covered += 1;
        }
    }
    assert!(covered >= 8, "{covered}");
}

#[test]
fn observations_are_shared_across_leads() {
    let data = generate(&ScenarioConfig {
        locations: 2,
        days: 5,
        reforecast_years: 2,
        ..ScenarioConfig::default()
    })
    .unwrap();
    let obs: BTreeMap<(String, NaiveDate), f64> = data.verification_observations();
    for r in &data.forecasts {
        assert!(obs.contains_key(&(r.location.clone(), r.validity_date)));
    }
}
