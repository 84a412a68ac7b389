//! CSV and JSON file formats.
//!
//! Every table is UTF-8 CSV with a header row; lines starting with `#` are
//! comments. Numbers are written with Rust's shortest round-trip formatting,
//! so a write-read-write cycle is byte-stable.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use wxindex_core::climatology::{ArchiveRecord, ClimateDistribution, ReforecastArchive};
use wxindex_core::distributions::{PercentileGrid, GRID_SIZE};
use wxindex_core::indices::{IndexField, IndexKind};
use wxindex_core::synthgen::{EnsembleRecord, ScenarioConfig, SyntheticDataset, VariableKind};

use crate::error::{CliError, CliResult};
use crate::pipeline::ClimateTable;

pub const ENSEMBLE_HEADER: [&str; 5] = ["location", "validity_date", "lead_days", "member_index", "value"];
pub const INDEX_HEADER: [&str; 5] = ["location", "validity_date", "lead_days", "kind", "value"];
const CLIMATE_FIXED: [&str; 6] = ["location", "lead_days", "day_of_year", "sample_count", "mean", "stddev"];

pub const MANIFEST_VERSION: u32 = 1;

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Buffered file writer that reports the path on failure.
pub(crate) struct TextFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl TextFile {
    pub(crate) fn create(path: &Path) -> CliResult<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        })
    }

    pub(crate) fn comment(&mut self, text: &str) -> CliResult<()> {
        let line = text.replace(['\n', '\r'], " ");
        writeln!(self.out, "# {line}").map_err(|e| CliError::io(&self.path, e))
    }

    pub(crate) fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> CliResult<()> {
        for (i, f) in fields.iter().enumerate() {
            let f = f.as_ref();
            if i > 0 {
                self.write(",")?;
            }
            if f.contains([',', '"', '\n', '\r']) {
                self.write(&format!("\"{}\"", f.replace('"', "\"\"")))?;
            } else {
                self.write(f)?;
            }
        }
        self.write("\n")
    }

    fn write(&mut self, s: &str) -> CliResult<()> {
        self.out
            .write_all(s.as_bytes())
            .map_err(|e| CliError::io(&self.path, e))
    }

    pub(crate) fn finish(mut self) -> CliResult<()> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

/// Writes a result table: optional invocation comment, header, rows.
pub fn write_table(path: &Path, comment: Option<&str>, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut f = TextFile::create(path)?;
    if let Some(c) = comment {
        f.comment(c)?;
    }
    f.row(header)?;
    for r in rows {
        f.row(r)?;
    }
    f.finish()
}

/// Data rows of a CSV file with their 1-based line numbers, after checking
/// the header.
fn read_rows(path: &Path, expected: &[&str]) -> CliResult<Vec<(u64, csv::StringRecord)>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let csv_err = |e: csv::Error| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            kind => CliError::parse(path, line, format!("{kind:?}")),
        }
    };
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(expected.iter().copied()) {
        let line = header.position().map(|p| p.line()).unwrap_or(1);
        return Err(CliError::parse(
            path,
            line,
            format!("expected header {}", expected.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        rows.push((line, rec));
    }
    Ok(rows)
}

struct Fields<'a> {
    path: &'a Path,
    line: u64,
    rec: &'a csv::StringRecord,
    names: &'a [&'a str],
}

impl Fields<'_> {
    fn err(&self, msg: String) -> CliError {
        CliError::parse(self.path, self.line, msg)
    }

    fn str(&self, i: usize) -> &str {
        self.rec.get(i).unwrap_or("")
    }

    fn nonempty(&self, i: usize) -> CliResult<&str> {
        let s = self.str(i);
        if s.is_empty() {
            return Err(self.err(format!("empty {}", self.names[i])));
        }
        Ok(s)
    }

    fn date(&self, i: usize) -> CliResult<NaiveDate> {
        let s = self.str(i);
        NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| self.err(format!("bad {} {s:?}", self.names[i])))
    }

    fn int<T: std::str::FromStr>(&self, i: usize) -> CliResult<T> {
        let s = self.str(i);
        s.parse().map_err(|_| self.err(format!("bad {} {s:?}", self.names[i])))
    }

    fn real(&self, i: usize) -> CliResult<f64> {
        let s = self.str(i);
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.err(format!("bad {} {s:?}", self.names[i]))),
        }
    }

    fn opt_real(&self, i: usize) -> CliResult<Option<f64>> {
        if self.str(i).is_empty() {
            Ok(None)
        } else {
            self.real(i).map(Some)
        }
    }
}

/// Writes ensemble records one member per row, sorted by location, date,
/// lead and member index.
pub fn write_ensemble_table(path: &Path, records: &[EnsembleRecord]) -> CliResult<()> {
    let mut order: Vec<&EnsembleRecord> = records.iter().collect();
    order.sort_by(|a, b| (&a.location, a.validity_date, a.lead_days).cmp(&(&b.location, b.validity_date, b.lead_days)));
    let mut f = TextFile::create(path)?;
    f.row(&ENSEMBLE_HEADER)?;
    for rec in order {
        let date = rec.validity_date.to_string();
        let lead = rec.lead_days.to_string();
        for (m, v) in rec.members.iter().enumerate() {
            f.row(&[rec.location.as_str(), &date, &lead, &m.to_string(), &fmt_f64(*v)])?;
        }
    }
    f.finish()
}

/// Reads a table written by [`write_ensemble_table`]. Rows of one record
/// must be consecutive with member indices `0, 1, 2, ...`, and records must
/// be in sorted order.
pub fn read_ensemble_table(path: &Path) -> CliResult<Vec<EnsembleRecord>> {
    let mut out: Vec<EnsembleRecord> = Vec::new();
    for (line, rec) in read_rows(path, &ENSEMBLE_HEADER)? {
        let f = Fields {
            path,
            line,
            rec: &rec,
            names: &ENSEMBLE_HEADER,
        };
        let location = f.nonempty(0)?;
        let date = f.date(1)?;
        let lead: u32 = f.int(2)?;
        let member: usize = f.int(3)?;
        let value = f.real(4)?;
        let key = (location, date, lead);
        match out.last_mut() {
            Some(last) if (last.location.as_str(), last.validity_date, last.lead_days) == key => {
                if member != last.members.len() {
                    return Err(f.err(format!("member_index {member}, expected {}", last.members.len())));
                }
                last.members.push(value);
            }
            last => {
                if let Some(last) = last {
                    if (last.location.as_str(), last.validity_date, last.lead_days) > key {
                        return Err(f.err("rows not sorted by location, date, lead, member".into()));
                    }
                }
                if member != 0 {
                    return Err(f.err(format!("member_index {member}, expected 0")));
                }
                out.push(EnsembleRecord {
                    location: location.to_string(),
                    validity_date: date,
                    lead_days: lead,
                    members: vec![value],
                });
            }
        }
    }
    Ok(out)
}

/// Writes climates keyed by lead time (0 for observation climates).
pub fn write_climates(path: &Path, comment: Option<&str>, climates: &BTreeMap<u32, ClimateTable>) -> CliResult<()> {
    let mut header: Vec<String> = CLIMATE_FIXED.iter().map(|s| s.to_string()).collect();
    header.extend((0..GRID_SIZE).map(|i| format!("q{i}")));
    let mut f = TextFile::create(path)?;
    if let Some(c) = comment {
        f.comment(c)?;
    }
    f.row(&header)?;
    for (lead, table) in climates {
        for ((loc, doy), c) in table {
            let mut row = vec![
                loc.clone(),
                lead.to_string(),
                doy.to_string(),
                c.sample_count.to_string(),
                fmt_f64(c.mean),
                fmt_f64(c.stddev),
            ];
            row.extend(c.grid.thresholds().iter().map(|&t| fmt_f64(t)));
            f.row(&row)?;
        }
    }
    f.finish()
}

pub fn read_climates(path: &Path) -> CliResult<BTreeMap<u32, ClimateTable>> {
    let mut header: Vec<String> = CLIMATE_FIXED.iter().map(|s| s.to_string()).collect();
    header.extend((0..GRID_SIZE).map(|i| format!("q{i}")));
    let names: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut out: BTreeMap<u32, ClimateTable> = BTreeMap::new();
    for (line, rec) in read_rows(path, &names)? {
        let f = Fields {
            path,
            line,
            rec: &rec,
            names: &names,
        };
        let location = f.nonempty(0)?.to_string();
        let lead: u32 = f.int(1)?;
        let doy: u16 = f.int(2)?;
        if !(1..=366).contains(&doy) {
            return Err(f.err(format!("day_of_year {doy} out of range")));
        }
        let count: usize = f.int(3)?;
        let thresholds = (0..GRID_SIZE).map(|i| f.real(6 + i)).collect::<CliResult<Vec<f64>>>()?;
        let grid = PercentileGrid::new(&thresholds).map_err(|e| f.err(e.to_string()))?;
        let climate = ClimateDistribution::from_grid(location.clone(), doy, grid, count);
        if out.entry(lead).or_default().insert((location, doy), climate).is_some() {
            return Err(f.err("duplicate location, lead and day".into()));
        }
    }
    Ok(out)
}

/// File name of the index fields of one kind at one lead.
pub fn index_file_name(kind: IndexKind, lead: u32) -> String {
    format!("index_{kind}_lead{lead}.csv")
}

/// Writes fields one location per row; missing values are empty.
pub fn write_index_fields(path: &Path, comment: Option<&str>, fields: &[IndexField]) -> CliResult<()> {
    let mut rows: Vec<(&str, NaiveDate, u32, &str, Option<f64>)> = fields
        .iter()
        .flat_map(|field| {
            field.entries.iter().map(move |(loc, v)| {
                (
                    loc.as_str(),
                    field.validity_date,
                    field.lead_time_days,
                    field.kind.as_str(),
                    *v,
                )
            })
        })
        .collect();
    rows.sort_by(|a, b| (a.0, a.1, a.2, a.3).cmp(&(b.0, b.1, b.2, b.3)));
    let mut f = TextFile::create(path)?;
    if let Some(c) = comment {
        f.comment(c)?;
    }
    f.row(&INDEX_HEADER)?;
    for (loc, date, lead, kind, v) in rows {
        f.row(&[loc, &date.to_string(), &lead.to_string(), kind, &fmt_opt(v)])?;
    }
    f.finish()
}

/// Reads index fields, one per (kind, lead, validity date), in that order.
pub fn read_index_fields(path: &Path) -> CliResult<Vec<IndexField>> {
    let mut fields: BTreeMap<(&'static str, u32, NaiveDate), IndexField> = BTreeMap::new();
    for (line, rec) in read_rows(path, &INDEX_HEADER)? {
        let f = Fields {
            path,
            line,
            rec: &rec,
            names: &INDEX_HEADER,
        };
        let location = f.nonempty(0)?.to_string();
        let date = f.date(1)?;
        let lead: u32 = f.int(2)?;
        let kind: IndexKind = f
            .str(3)
            .parse()
            .map_err(|_| f.err(format!("unknown kind {:?}", f.str(3))))?;
        let value = f.opt_real(4)?;
        let field = fields
            .entry((kind.as_str(), lead, date))
            .or_insert_with(|| IndexField::new(kind, date, lead));
        if field.entries.insert(location, value).is_some() {
            return Err(f.err("duplicate location".into()));
        }
    }
    Ok(fields.into_values().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEntry {
    /// Relative to the manifest's directory.
    pub path: String,
    /// Data rows, excluding the header.
    pub rows: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFiles {
    pub forecasts: FileEntry,
    /// All lead times in one table.
    pub reforecasts: FileEntry,
    /// Verification-period observations, member index 0.
    pub observations: FileEntry,
    /// Observations over the climate period, member index 0.
    pub observation_history: FileEntry,
}

/// Describes a dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub variable: VariableKind,
    pub units: String,
    pub locations: Vec<String>,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub lead_times: Vec<u32>,
    pub ensemble_size: usize,
    pub reforecast_members: usize,
    pub reforecast_years: u32,
    pub files: ManifestFiles,
    /// Generator settings when the dataset is synthetic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let manifest: Self =
            serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.line() as u64, e.to_string()))?;
        if manifest.format_version != MANIFEST_VERSION {
            return Err(CliError::ManifestMismatch(format!(
                "unsupported format version {} (expected {MANIFEST_VERSION})",
                manifest.format_version
            )));
        }
        Ok(manifest)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serialises");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

/// A dataset loaded from disk and checked against its manifest.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub forecasts: Vec<EnsembleRecord>,
    pub reforecasts: BTreeMap<u32, ReforecastArchive>,
    pub observations: BTreeMap<(String, NaiveDate), f64>,
    pub observation_history: ReforecastArchive,
}

fn mismatch(msg: String) -> CliError {
    CliError::ManifestMismatch(msg)
}

fn load_table(dir: &Path, name: &str, entry: &FileEntry) -> CliResult<Vec<EnsembleRecord>> {
    let path = dir.join(&entry.path);
    if !path.is_file() {
        return Err(mismatch(format!("{name} file {} does not exist", path.display())));
    }
    let records = read_ensemble_table(&path)?;
    let rows: u64 = records.iter().map(|r| r.members.len() as u64).sum();
    if rows != entry.rows {
        return Err(mismatch(format!(
            "{name} has {rows} rows, manifest says {}",
            entry.rows
        )));
    }
    Ok(records)
}

fn single_member(name: &str, records: Vec<EnsembleRecord>) -> CliResult<Vec<EnsembleRecord>> {
    if let Some(r) = records.iter().find(|r| r.members.len() != 1 || r.lead_days != 0) {
        return Err(mismatch(format!(
            "{name} must have lead 0 and one member per row ({} on {})",
            r.location, r.validity_date
        )));
    }
    Ok(records)
}

fn forecast_records(dir: &Path, manifest: &DatasetManifest) -> CliResult<Vec<EnsembleRecord>> {
    let forecasts = load_table(dir, "forecasts", &manifest.files.forecasts)?;
    for r in &forecasts {
        if !manifest.locations.contains(&r.location) {
            return Err(mismatch(format!(
                "forecasts mention location {} missing from the manifest",
                r.location
            )));
        }
        if r.members.len() != manifest.ensemble_size {
            return Err(mismatch(format!(
                "forecast {} {} lead {} has {} members, manifest says {}",
                r.location,
                r.validity_date,
                r.lead_days,
                r.members.len(),
                manifest.ensemble_size
            )));
        }
        if !manifest.lead_times.contains(&r.lead_days) {
            return Err(mismatch(format!(
                "forecast lead {} not listed in the manifest",
                r.lead_days
            )));
        }
        if r.validity_date < manifest.start_date || r.validity_date > manifest.end_date {
            return Err(mismatch(format!(
                "forecast date {} outside the manifest range",
                r.validity_date
            )));
        }
    }

    Ok(forecasts)
}

/// Reads only the manifest and the forecasts.
pub fn load_forecasts(manifest_path: &Path) -> CliResult<(DatasetManifest, Vec<EnsembleRecord>)> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let forecasts = forecast_records(dir, &manifest)?;
    Ok((manifest, forecasts))
}

fn observation_map(dir: &Path, manifest: &DatasetManifest) -> CliResult<BTreeMap<(String, NaiveDate), f64>> {
    let mut observations = BTreeMap::new();
    for r in single_member(
        "observations",
        load_table(dir, "observations", &manifest.files.observations)?,
    )? {
        if !manifest.locations.contains(&r.location) {
            return Err(mismatch(format!(
                "observations mention location {} missing from the manifest",
                r.location
            )));
        }
        observations.insert((r.location, r.validity_date), r.members[0]);
    }
    Ok(observations)
}

/// Verification-period observations keyed by (location, validity date).
pub type Observations = BTreeMap<(String, NaiveDate), f64>;

/// Reads only the manifest and the verification-period observations.
pub fn load_observations(manifest_path: &Path) -> CliResult<(DatasetManifest, Observations)> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let observations = observation_map(dir, &manifest)?;
    Ok((manifest, observations))
}

impl Dataset {
    pub fn load(manifest_path: &Path) -> CliResult<Self> {
        let manifest = DatasetManifest::read(manifest_path)?;
        let dir = manifest_path.parent().unwrap_or(Path::new("."));
        let files = &manifest.files;
        let locations: std::collections::BTreeSet<&str> = manifest.locations.iter().map(|s| s.as_str()).collect();
        let check_location = |name: &str, loc: &str| {
            if locations.contains(loc) {
                Ok(())
            } else {
                Err(mismatch(format!(
                    "{name} mentions location {loc} missing from the manifest"
                )))
            }
        };

        let forecasts = forecast_records(dir, &manifest)?;
        let mut by_lead: BTreeMap<u32, Vec<ArchiveRecord>> =
            manifest.lead_times.iter().map(|&l| (l, Vec::new())).collect();
        for r in load_table(dir, "reforecasts", &files.reforecasts)? {
            check_location("reforecasts", &r.location)?;
            if r.members.len() != manifest.reforecast_members {
                return Err(mismatch(format!(
                    "reforecast {} {} has {} members, manifest says {}",
                    r.location,
                    r.validity_date,
                    r.members.len(),
                    manifest.reforecast_members
                )));
            }
            let Some(list) = by_lead.get_mut(&r.lead_days) else {
                return Err(mismatch(format!(
                    "reforecast lead {} not listed in the manifest",
                    r.lead_days
                )));
            };
            list.push(ArchiveRecord {
                location: r.location,
                validity_date: r.validity_date,
                members: r.members,
            });
        }
        let reforecasts = by_lead
            .into_iter()
            .map(|(lead, recs)| {
                Ok((
                    lead,
                    ReforecastArchive::new(recs, manifest.reforecast_members, manifest.reforecast_years)?,
                ))
            })
            .collect::<CliResult<BTreeMap<_, _>>>()?;

        let observations = observation_map(dir, &manifest)?;
        let mut history = Vec::new();
        for r in single_member(
            "observation history",
            load_table(dir, "observation history", &files.observation_history)?,
        )? {
            check_location("observation history", &r.location)?;
            history.push(ArchiveRecord {
                location: r.location,
                validity_date: r.validity_date,
                members: r.members,
            });
        }
        let observation_history = ReforecastArchive::new(history, 1, manifest.reforecast_years)?;

        Ok(Self {
            manifest,
            forecasts,
            reforecasts,
            observations,
            observation_history,
        })
    }
}

fn archive_rows(archive: &ReforecastArchive, lead: u32) -> Vec<EnsembleRecord> {
    archive
        .records()
        .iter()
        .map(|r| EnsembleRecord {
            location: r.location.clone(),
            validity_date: r.validity_date,
            lead_days: lead,
            members: r.members.clone(),
        })
        .collect()
}

/// Writes a synthetic dataset and its manifest into `dir`; returns the paths
/// written, manifest last.
pub fn write_synthetic(dir: &Path, data: &SyntheticDataset) -> CliResult<Vec<PathBuf>> {
    let config = &data.config;
    let mut written = Vec::new();
    let mut entry = |name: &str, records: &[EnsembleRecord]| -> CliResult<FileEntry> {
        let path = dir.join(name);
        written.push(path.clone());
        write_ensemble_table(&path, records)?;
        Ok(FileEntry {
            path: name.to_string(),
            rows: records.iter().map(|r| r.members.len() as u64).sum(),
        })
    };
    let forecasts = entry("forecasts.csv", &data.forecasts)?;
    let refc: Vec<EnsembleRecord> = data
        .reforecasts
        .iter()
        .flat_map(|(&lead, archive)| archive_rows(archive, lead))
        .collect();
    let reforecasts = entry("reforecasts.csv", &refc)?;
    let obs: Vec<EnsembleRecord> = data
        .verification_observations()
        .into_iter()
        .map(|((location, validity_date), v)| EnsembleRecord {
            location,
            validity_date,
            lead_days: 0,
            members: vec![v],
        })
        .collect();
    let observations = entry("observations.csv", &obs)?;
    let observation_history = entry("observation_history.csv", &archive_rows(&data.observation_history, 0))?;

    let manifest = DatasetManifest {
        format_version: MANIFEST_VERSION,
        variable: config.variable,
        units: match config.variable {
            VariableKind::Gaussian => "standard anomaly".into(),
            VariableKind::GammaPrecip { .. } => "mm".into(),
        },
        locations: data.locations.clone(),
        start_date: config.start_date,
        end_date: config.end_date(),
        lead_times: config.lead_times.clone(),
        ensemble_size: config.ensemble_size,
        reforecast_members: config.reforecast_members,
        reforecast_years: config.reforecast_years,
        files: ManifestFiles {
            forecasts,
            reforecasts,
            observations,
            observation_history,
        },
        scenario: Some(config.clone()),
    };
    let path = dir.join("manifest.json");
    written.push(path.clone());
    manifest.write(&path)?;
    Ok(written)
}
