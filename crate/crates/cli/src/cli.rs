//! Command-line surface. [`run`] parses arguments, executes one subcommand
//! and returns the files it wrote; on failure every file written so far is
//! removed.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use chrono::{Days, NaiveDate};
use clap::{Args, Parser, Subcommand, ValueEnum};
use wxindex_core::distributions::Univariate;
use wxindex_core::indices::{CrossingRule, IndexField, IndexKind, IndexParams};
use wxindex_core::synthgen::{generate, ScenarioConfig};
use wxindex_core::verification::{
    actionable_thresholds, auc_skill_score, block_bootstrap_ci, conditional_filter, contingency_tables, grid500,
    index_histogram, kendall_tau_over_dates, log_spaced_alphas, pev_curve, reliability_from_sample, roc_curve,
    BootstrapConfig, KendallMode, VerificationSample, RELIABILITY_EDGES,
};

use crate::error::{CliError, CliResult};
use crate::io::{
    fmt_f64, index_file_name, load_forecasts, load_observations, read_climates, read_index_fields, write_climates,
    write_index_fields, write_synthetic, write_table, Dataset,
};
use crate::pipeline::{build_climates, index_fields, ClimateTable};

pub const CLIMATE_MODEL_FILE: &str = "climate_model.csv";
pub const CLIMATE_OBS_FILE: &str = "climate_obs.csv";

#[derive(Debug, Parser)]
#[command(
    name = "wxindex",
    version,
    about = "Ensemble extreme-weather indices and their verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset and its manifest.
    Synth(SynthArgs),
    /// Build model climates (per lead) and observation climates.
    Climatology(ClimatologyArgs),
    /// Compute one index at one lead for every location and date.
    Index(IndexArgs),
    /// Verify index files against observations.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Histogram of index values.
    Hist(HistArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory [default: the work directory].
    #[arg(long, env = "WXINDEX_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory holding climates and index files [default: the manifest's directory].
    #[arg(long)]
    pub work: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

impl DataArgs {
    fn work_dir(&self) -> PathBuf {
        self.work.clone().unwrap_or_else(|| parent_dir(&self.manifest))
    }

    fn out_dir(&self) -> PathBuf {
        self.out.out.clone().unwrap_or_else(|| self.work_dir())
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scenario JSON; omitted fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ClimatologyArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 14)]
    pub window_days: u16,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CrossingArg {
    Last,
    First,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub kind: IndexKind,
    #[arg(long)]
    pub lead: u32,
    /// ANF scale offset.
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    /// CPF ignores crossings at or below this value.
    #[arg(long)]
    pub lower_bound: Option<f64>,
    #[arg(long, value_enum, default_value_t = CrossingArg::Last)]
    pub crossing: CrossingArg,
}

/// Decision thresholds: `grid500`, `actionable`, or a comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdSpec {
    Grid500,
    Actionable,
    List(Vec<f64>),
}

impl FromStr for ThresholdSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "grid500" => Ok(ThresholdSpec::Grid500),
            "actionable" => Ok(ThresholdSpec::Actionable),
            list => parse_list(list).map(ThresholdSpec::List),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    let values = s
        .split(',')
        .map(|t| match t.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(format!("bad number {t:?}")),
        })
        .collect::<Result<Vec<f64>, String>>()?;
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(values)
}

impl ThresholdSpec {
    fn resolve(&self, kind: IndexKind, values: &[f64]) -> CliResult<Vec<f64>> {
        match self {
            ThresholdSpec::Grid500 => Ok(grid500(kind, values)?),
            ThresholdSpec::Actionable => actionable_thresholds(kind).map(|t| t.to_vec()).ok_or_else(|| {
                CliError::Usage(format!(
                    "{kind} has no actionable threshold set; pass explicit thresholds"
                ))
            }),
            ThresholdSpec::List(v) => Ok(v.clone()),
        }
    }
}

/// Values either as a comma-separated list or `log:LO:HI:N` / `lin:LO:HI:N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 4 && (parts[0] == "log" || parts[0] == "lin") {
            let lo: f64 = parts[1].parse().map_err(|_| format!("bad lower end {:?}", parts[1]))?;
            let hi: f64 = parts[2].parse().map_err(|_| format!("bad upper end {:?}", parts[2]))?;
            let n: usize = parts[3].parse().map_err(|_| format!("bad count {:?}", parts[3]))?;
            if parts[0] == "log" {
                return log_spaced_alphas(lo, hi, n).map(Grid).map_err(|e| e.to_string());
            }
            if !(lo.is_finite() && hi.is_finite() && lo < hi && n >= 2) {
                return Err("need finite lo < hi and at least two points".into());
            }
            let last = (n - 1) as f64;
            return Ok(Grid(
                (0..n)
                    .map(|i| {
                        if i == n - 1 {
                            hi
                        } else {
                            lo + (hi - lo) * i as f64 / last
                        }
                    })
                    .collect(),
            ));
        }
        parse_list(s).map(Grid)
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub lead: u32,
    /// Events are observations above this quantile of the observation climate.
    #[arg(long, default_value_t = 0.95)]
    pub event_quantile: f64,
    /// Keep only cases whose observation exceeds this climate quantile.
    #[arg(long)]
    pub condition_quantile: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// ROC points and area.
    Roc {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        kind: IndexKind,
        #[arg(long, default_value = "grid500")]
        thresholds: ThresholdSpec,
    },
    /// Potential economic value envelope over cost/loss ratios.
    Pev {
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long)]
        kind: IndexKind,
        #[arg(long, default_value = "grid500")]
        thresholds: ThresholdSpec,
        #[arg(long, default_value = "log:0.001:0.999:60")]
        alphas: Grid,
    },
    /// CPF reliability categories.
    Reliability {
        #[command(flatten)]
        sample: SampleArgs,
    },
    /// Kendall tau between two indices, per date and summarised.
    Corr {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        lead: u32,
        #[arg(long)]
        a: IndexKind,
        #[arg(long)]
        b: IndexKind,
        #[arg(long, value_enum, default_value_t = CorrMode::PerDate)]
        mode: CorrMode,
    },
    /// AUC per index and lead with block-bootstrap intervals.
    AucByLead {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated index kinds.
        #[arg(long, value_delimiter = ',', default_value = "cpf,efi,sot,anf")]
        kinds: Vec<IndexKind>,
        #[arg(long, default_value = "grid500")]
        thresholds: ThresholdSpec,
        #[arg(long, default_value_t = 0.95)]
        event_quantile: f64,
        #[arg(long)]
        condition_quantile: Option<f64>,
        /// Bootstrap replicates.
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
        #[arg(long, default_value_t = 5)]
        block_days: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also report the AUC skill score against this index.
        #[arg(long)]
        reference: Option<IndexKind>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrMode {
    PerDate,
    Pooled,
}

#[derive(Debug, Args)]
pub struct HistArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub kind: IndexKind,
    #[arg(long)]
    pub lead: u32,
    /// Bin edges [default: 20 equal bins over the index range, CPF and EFI only].
    #[arg(long)]
    pub bins: Option<Grid>,
}

/// What a successful invocation produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// Help or version text to print.
    Info(String),
    Written(Vec<PathBuf>),
}

/// Files created by the running command; removed unless committed.
struct Outputs {
    paths: Vec<PathBuf>,
    committed: bool,
}

impl Outputs {
    fn file(&mut self, dir: &Path, name: &str) -> PathBuf {
        let p = dir.join(name);
        self.paths.push(p.clone());
        p
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.paths {
                let _ = std::fs::remove_file(p);
            }
        }
    }
}

fn invocation(argv: &[OsString]) -> String {
    let mut s = String::from("wxindex");
    for a in argv.iter().skip(1) {
        let a = a.to_string_lossy();
        s.push(' ');
        if a.is_empty() || a.contains(char::is_whitespace) {
            s.push_str(&format!("'{a}'"));
        } else {
            s.push_str(&a);
        }
    }
    s
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run(argv: Vec<OsString>) -> CliResult<Outcome> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Ok(Outcome::Info(e.to_string()));
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Err(CliError::Usage(first.trim_start_matches("error: ").to_string()));
        }
    };
    let mut outputs = Outputs {
        paths: Vec::new(),
        committed: false,
    };
    let ctx = Context {
        invocation: invocation(&argv),
    };
    match &cli.command {
        Command::Synth(a) => ctx.synth(a, &mut outputs)?,
        Command::Climatology(a) => ctx.climatology(a, &mut outputs)?,
        Command::Index(a) => ctx.index(a, &mut outputs)?,
        Command::Verify(v) => ctx.verify(v, &mut outputs)?,
        Command::Hist(a) => ctx.hist(a, &mut outputs)?,
    }
    outputs.committed = true;
    Ok(Outcome::Written(outputs.paths.clone()))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

struct Context {
    invocation: String,
}

impl Context {
    fn comment(&self) -> Option<&str> {
        Some(&self.invocation)
    }

    fn synth(&self, a: &SynthArgs, outputs: &mut Outputs) -> CliResult<()> {
        let config: ScenarioConfig = match &a.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.line() as u64, e.to_string()))?
            }
            None => ScenarioConfig::default(),
        };
        let out = a
            .out
            .out
            .clone()
            .ok_or_else(|| usage("synth needs --out or WXINDEX_OUT"))?;
        let data = generate(&config)?;
        ensure_dir(&out)?;
        // register every file before writing so a failure midway cleans up
        for name in [
            "forecasts.csv",
            "reforecasts.csv",
            "observations.csv",
            "observation_history.csv",
            "manifest.json",
        ] {
            outputs.file(&out, name);
        }
        write_synthetic(&out, &data)?;
        Ok(())
    }

    fn climatology(&self, a: &ClimatologyArgs, outputs: &mut Outputs) -> CliResult<()> {
        let data = Dataset::load(&a.data.manifest)?;
        let m = &data.manifest;
        let days = (m.end_date - m.start_date).num_days();
        if days < 0 {
            return Err(CliError::ManifestMismatch("end date precedes start date".into()));
        }
        let dates: Vec<NaiveDate> = (0..=days as u64).map(|d| m.start_date + Days::new(d)).collect();
        let locs = || m.locations.iter().map(|s| s.as_str());
        let mut model = BTreeMap::new();
        for (&lead, archive) in &data.reforecasts {
            model.insert(
                lead,
                build_climates(archive, locs(), dates.iter().copied(), a.window_days)?,
            );
        }
        let obs = BTreeMap::from([(
            0,
            build_climates(&data.observation_history, locs(), dates.iter().copied(), a.window_days)?,
        )]);
        let out = a.data.out_dir();
        ensure_dir(&out)?;
        write_climates(&outputs.file(&out, CLIMATE_MODEL_FILE), self.comment(), &model)?;
        write_climates(&outputs.file(&out, CLIMATE_OBS_FILE), self.comment(), &obs)?;
        Ok(())
    }

    fn index(&self, a: &IndexArgs, outputs: &mut Outputs) -> CliResult<()> {
        let (manifest, forecasts) = load_forecasts(&a.data.manifest)?;
        if !manifest.lead_times.contains(&a.lead) {
            return Err(usage(format!("lead {} not in the dataset", a.lead)));
        }
        let work = a.data.work_dir();
        let mut climates = read_climates(&work.join(CLIMATE_MODEL_FILE))?;
        let table = climates
            .remove(&a.lead)
            .ok_or_else(|| CliError::ManifestMismatch(format!("no model climate for lead {}", a.lead)))?;
        let params = IndexParams {
            k: a.k,
            lower_bound: a.lower_bound,
            crossing: match a.crossing {
                CrossingArg::Last => CrossingRule::Last,
                CrossingArg::First => CrossingRule::First,
            },
        };
        let fields = index_fields(&forecasts, a.lead, &table, a.kind, params)?;
        let out = a.data.out_dir();
        ensure_dir(&out)?;
        write_index_fields(
            &outputs.file(&out, &index_file_name(a.kind, a.lead)),
            self.comment(),
            &fields,
        )?;
        Ok(())
    }

    fn verify(&self, v: &VerifyCommand, outputs: &mut Outputs) -> CliResult<()> {
        match v {
            VerifyCommand::Roc {
                sample,
                kind,
                thresholds,
            } => {
                let s = load_sample(sample, *kind)?;
                let pairs = wxindex_core::verification::binarize(&s)?;
                let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
                let th = thresholds.resolve(*kind, &values)?;
                let roc = roc_curve(&pairs, &th)?;
                let rows: Vec<Vec<String>> = roc
                    .thresholds
                    .iter()
                    .zip(&roc.points)
                    .map(|(t, (far, h))| vec![fmt_f64(*t), fmt_f64(*far), fmt_f64(*h)])
                    .collect();
                let stem = format!(
                    "roc_{kind}_lead{}{}",
                    sample.lead,
                    cond_suffix(sample.condition_quantile)
                );
                let out = sample.data.out_dir();
                ensure_dir(&out)?;
                write_table(
                    &outputs.file(&out, &format!("{stem}.csv")),
                    self.comment(),
                    &["threshold", "false_alarm_rate", "hit_rate"],
                    &rows,
                )?;
                let events = pairs.iter().filter(|p| p.1).count();
                write_table(
                    &outputs.file(&out, &format!("{stem}_auc.csv")),
                    self.comment(),
                    &["kind", "lead_days", "thresholds", "cases", "events", "auc"],
                    &[vec![
                        kind.to_string(),
                        sample.lead.to_string(),
                        th.len().to_string(),
                        pairs.len().to_string(),
                        events.to_string(),
                        fmt_f64(roc.auc),
                    ]],
                )
            }
            VerifyCommand::Pev {
                sample,
                kind,
                thresholds,
                alphas,
            } => {
                let s = load_sample(sample, *kind)?;
                let pairs = wxindex_core::verification::binarize(&s)?;
                let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
                let mut th = thresholds.resolve(*kind, &values)?;
                th.sort_by(f64::total_cmp);
                let tables = contingency_tables(&pairs, &th)?;
                let curve = pev_curve(&tables, &alphas.0)?;
                let rows: Vec<Vec<String>> = curve
                    .cost_loss_ratios
                    .iter()
                    .zip(&curve.values)
                    .map(|(a, v)| vec![fmt_f64(*a), fmt_f64(*v), fmt_f64(curve.base_rate)])
                    .collect();
                let out = sample.data.out_dir();
                ensure_dir(&out)?;
                let name = format!(
                    "pev_{kind}_lead{}{}.csv",
                    sample.lead,
                    cond_suffix(sample.condition_quantile)
                );
                write_table(
                    &outputs.file(&out, &name),
                    self.comment(),
                    &["alpha", "value", "base_rate"],
                    &rows,
                )
            }
            VerifyCommand::Reliability { sample } => {
                let s = load_sample(sample, IndexKind::Cpf)?;
                let rel = reliability_from_sample(&s)?;
                let rows: Vec<Vec<String>> = (0..rel.bin_centers.len())
                    .map(|i| {
                        vec![
                            fmt_f64(rel.bin_centers[i]),
                            fmt_f64(RELIABILITY_EDGES[i]),
                            fmt_f64(RELIABILITY_EDGES[i + 1]),
                            rel.bin_counts[i].to_string(),
                            fmt_f64(rel.case_share[i]),
                            opt(rel.observed_frequency[i]),
                        ]
                    })
                    .collect();
                let out = sample.data.out_dir();
                ensure_dir(&out)?;
                let name = format!(
                    "reliability_cpf_lead{}{}.csv",
                    sample.lead,
                    cond_suffix(sample.condition_quantile)
                );
                write_table(
                    &outputs.file(&out, &name),
                    self.comment(),
                    &[
                        "bin_center",
                        "lower_edge",
                        "upper_edge",
                        "count",
                        "case_share",
                        "observed_frequency",
                    ],
                    &rows,
                )
            }
            VerifyCommand::Corr { data, lead, a, b, mode } => {
                let work = data.work_dir();
                let fa = load_fields(&work, *a, *lead)?;
                let fb = load_fields(&work, *b, *lead)?;
                let kmode = match mode {
                    CorrMode::PerDate => KendallMode::PerDateMean,
                    CorrMode::Pooled => KendallMode::Pooled,
                };
                let result = kendall_tau_over_dates(&fa, &fb, kmode)?;
                let mut rows: Vec<Vec<String>> = result
                    .per_date
                    .iter()
                    .map(|(d, t)| vec![d.to_string(), t.n.to_string(), fmt_f64(t.tau)])
                    .collect();
                let total: usize = result.per_date.iter().map(|(_, t)| t.n).sum();
                let label = match mode {
                    CorrMode::PerDate => "mean",
                    CorrMode::Pooled => "pooled",
                };
                rows.push(vec![label.to_string(), total.to_string(), fmt_f64(result.summary)]);
                let out = data.out_dir();
                ensure_dir(&out)?;
                write_table(
                    &outputs.file(&out, &format!("corr_{a}_{b}_lead{lead}.csv")),
                    self.comment(),
                    &["validity_date", "n", "tau"],
                    &rows,
                )
            }
            VerifyCommand::AucByLead {
                data,
                kinds,
                thresholds,
                event_quantile,
                condition_quantile,
                bootstrap,
                block_days,
                seed,
                reference,
            } => {
                let (manifest, observations) = load_observations(&data.manifest)?;
                let obs_climate = load_obs_climate(&data.work_dir())?;
                let config = BootstrapConfig {
                    block_days: *block_days,
                    replicates: *bootstrap,
                    seed: *seed,
                    ..BootstrapConfig::default()
                };
                let mut rows = Vec::new();
                for &lead in &manifest.lead_times {
                    let reference_cases = match reference {
                        Some(r) => Some(auc_cases(
                            &data.work_dir(),
                            *r,
                            lead,
                            &observations,
                            *event_quantile,
                            *condition_quantile,
                            &obs_climate,
                            thresholds,
                        )?),
                        None => None,
                    };
                    for &kind in kinds {
                        let cases = auc_cases(
                            &data.work_dir(),
                            kind,
                            lead,
                            &observations,
                            *event_quantile,
                            *condition_quantile,
                            &obs_climate,
                            thresholds,
                        )?;
                        let dates: Vec<NaiveDate> = cases.keys.iter().map(|k| k.1).collect();
                        let ci = block_bootstrap_ci(&dates, |idx| cases.auc(idx.iter().copied()), &config)?;
                        let mut row = vec![
                            kind.to_string(),
                            lead.to_string(),
                            cases.present().to_string(),
                            fmt_f64(ci.estimate),
                            fmt_f64(ci.low),
                            fmt_f64(ci.high),
                        ];
                        if let (Some(r), Some(rc)) = (reference, &reference_cases) {
                            let lookup: BTreeMap<&(String, NaiveDate), usize> =
                                rc.keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
                            let other: Vec<Option<usize>> = cases.keys.iter().map(|k| lookup.get(k).copied()).collect();
                            let skill = block_bootstrap_ci(
                                &dates,
                                |idx| {
                                    let own = cases.auc(idx.iter().copied())?;
                                    let refa = rc.auc(idx.iter().filter_map(|&i| other[i]))?;
                                    auc_skill_score(own, refa)
                                },
                                &config,
                            )?;
                            row.extend([
                                r.to_string(),
                                fmt_f64(skill.estimate),
                                fmt_f64(skill.low),
                                fmt_f64(skill.high),
                            ]);
                        }
                        rows.push(row);
                    }
                }
                let mut header = vec!["kind", "lead_days", "cases", "auc", "ci_low", "ci_high"];
                if reference.is_some() {
                    header.extend(["reference", "skill", "skill_low", "skill_high"]);
                }
                let out = data.out_dir();
                ensure_dir(&out)?;
                let name = format!("auc_by_lead{}.csv", cond_suffix(*condition_quantile));
                write_table(&outputs.file(&out, &name), self.comment(), &header, &rows)
            }
        }
    }

    fn hist(&self, a: &HistArgs, outputs: &mut Outputs) -> CliResult<()> {
        let fields = load_fields(&a.data.work_dir(), a.kind, a.lead)?;
        let edges = match (&a.bins, a.kind.bounds()) {
            (Some(g), _) => g.0.clone(),
            (None, Some((lo, hi))) => Grid::from_str(&format!("lin:{lo}:{hi}:21")).map_err(usage)?.0,
            (None, None) => return Err(usage(format!("{} is unbounded; pass --bins", a.kind))),
        };
        let counts = index_histogram(fields.iter().flat_map(|f| f.entries.values().copied()), &edges)?;
        let rows: Vec<Vec<String>> = counts
            .iter()
            .enumerate()
            .map(|(i, c)| vec![fmt_f64(edges[i]), fmt_f64(edges[i + 1]), c.to_string()])
            .collect();
        let out = a.data.out_dir();
        ensure_dir(&out)?;
        write_table(
            &outputs.file(&out, &format!("hist_{}_lead{}.csv", a.kind, a.lead)),
            self.comment(),
            &["bin_low", "bin_high", "count"],
            &rows,
        )
    }
}

fn cond_suffix(c: Option<f64>) -> String {
    c.map(|q| format!("_cond{q}")).unwrap_or_default()
}

fn load_fields(work: &Path, kind: IndexKind, lead: u32) -> CliResult<Vec<IndexField>> {
    let path = work.join(index_file_name(kind, lead));
    let fields: Vec<IndexField> = read_index_fields(&path)?
        .into_iter()
        .filter(|f| f.kind == kind && f.lead_time_days == lead)
        .collect();
    if fields.is_empty() {
        return Err(CliError::ManifestMismatch(format!(
            "{} holds no {kind} fields at lead {lead}",
            path.display()
        )));
    }
    Ok(fields)
}

fn load_obs_climate(work: &Path) -> CliResult<Arc<ClimateTable>> {
    let mut obs = read_climates(&work.join(CLIMATE_OBS_FILE))?;
    Ok(Arc::new(obs.remove(&0).unwrap_or_default()))
}

fn load_sample(a: &SampleArgs, kind: IndexKind) -> CliResult<VerificationSample> {
    let work = a.data.work_dir();
    let (_, observations) = load_observations(&a.data.manifest)?;
    let fields = load_fields(&work, kind, a.lead)?;
    let sample = VerificationSample::from_fields(&fields, &observations, a.event_quantile, load_obs_climate(&work)?)?;
    Ok(match a.condition_quantile {
        Some(c) => conditional_filter(&sample, c)?,
        None => sample,
    })
}

/// Index values and events of one kind at one lead, with fixed thresholds.
struct AucCases {
    keys: Vec<(String, NaiveDate)>,
    values: Vec<Option<f64>>,
    events: Vec<bool>,
    thresholds: Vec<f64>,
}

impl AucCases {
    fn present(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    fn auc(&self, idx: impl Iterator<Item = usize>) -> wxindex_core::Result<f64> {
        let pairs: Vec<(f64, bool)> = idx
            .filter_map(|i| self.values[i].map(|v| (v, self.events[i])))
            .collect();
        Ok(roc_curve(&pairs, &self.thresholds)?.auc)
    }
}

#[allow(clippy::too_many_arguments)]
fn auc_cases(
    work: &Path,
    kind: IndexKind,
    lead: u32,
    observations: &BTreeMap<(String, NaiveDate), f64>,
    event_quantile: f64,
    condition_quantile: Option<f64>,
    obs_climate: &Arc<ClimateTable>,
    thresholds: &ThresholdSpec,
) -> CliResult<AucCases> {
    let fields = load_fields(work, kind, lead)?;
    let mut sample = VerificationSample::from_fields(&fields, observations, event_quantile, Arc::clone(obs_climate))?;
    if let Some(c) = condition_quantile {
        sample = conditional_filter(&sample, c)?;
    }
    let mut cases = AucCases {
        keys: Vec::with_capacity(sample.len()),
        values: Vec::with_capacity(sample.len()),
        events: Vec::with_capacity(sample.len()),
        thresholds: Vec::new(),
    };
    for r in sample.records() {
        let climate = sample.climate_for(r)?;
        cases.keys.push((r.location.clone(), r.validity_date));
        cases.values.push(r.index_value);
        cases.events.push(r.observed > climate.quantile(event_quantile)?);
    }
    let present: Vec<f64> = cases.values.iter().flatten().copied().collect();
    cases.thresholds = thresholds.resolve(kind, &present)?;
    Ok(cases)
}
