use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CONFIG: &str = r#"{
  "locations": 6,
  "days": 30,
  "ensemble_size": 10,
  "reforecast_members": 5,
  "reforecast_years": 5,
  "seed": 3
}"#;

fn wxindex(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wxindex"));
    cmd.args(args).env_remove("WXINDEX_OUT");
    if let Some(o) = out {
        cmd.env("WXINDEX_OUT", o);
    }
    cmd.output().unwrap()
}

fn ok(args: &[&str], out: Option<&Path>) -> Output {
    let o = wxindex(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Synthetic dataset plus model and observation climates in a fresh directory.
fn prepared() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.json");
    std::fs::write(&cfg, CONFIG).unwrap();
    let data = dir.path().join("data");
    ok(
        &[
            "synth",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            data.to_str().unwrap(),
        ],
        None,
    );
    let manifest = data.join("manifest.json");
    ok(&["climatology", "--manifest", manifest.to_str().unwrap()], None);
    (dir, manifest)
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

// Data rows without the comment line.
fn body(p: &Path) -> String {
    read(p)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn help_and_version_succeed() {
    let o = ok(&["--help"], None);
    assert!(String::from_utf8_lossy(&o.stdout).contains("climatology"));
    ok(&["verify", "roc", "--help"], None);
    ok(&["--version"], None);
}

#[test]
fn usage_errors_are_single_line() {
    for args in [
        vec!["verify", "roc", "--bogus"],
        vec!["index", "--manifest", "m.json", "--kind", "xyz", "--lead", "1"],
        vec!["nonsense"],
        vec!["synth"],
    ] {
        let o = wxindex(&args, None);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let e = stderr(&o);
        assert_eq!(e.lines().count(), 1, "{e}");
        assert!(e.starts_with("error[usage]: "), "{e}");
    }
}

#[test]
fn missing_manifest_is_io_error() {
    let o = wxindex(&["climatology", "--manifest", "/nonexistent/manifest.json"], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[io]: "));
}

#[test]
fn bad_config_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, "{\n  \"locations\": 2,\n  \"colour\": 1\n}").unwrap();
    let out = dir.path().join("out");
    let o = wxindex(
        &[
            "synth",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("c.json:3:"), "{}", stderr(&o));

    std::fs::write(&cfg, "{\"persistence\": 1.5}").unwrap();
    let o = wxindex(
        &[
            "synth",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(6), "{}", stderr(&o));
}

#[test]
fn pipeline_and_outputs() {
    let (dir, manifest) = prepared();
    let m = manifest.to_str().unwrap();
    let data = manifest.parent().unwrap();
    for kind in ["cpf", "efi", "sot", "anf"] {
        for lead in ["1", "3", "6"] {
            ok(&["index", "--manifest", m, "--kind", kind, "--lead", lead], None);
        }
    }

    // actionable presets
    ok(
        &[
            "verify",
            "roc",
            "--manifest",
            m,
            "--kind",
            "cpf",
            "--lead",
            "1",
            "--thresholds",
            "actionable",
        ],
        None,
    );
    let roc = read(&data.join("roc_cpf_lead1.csv"));
    let thresholds: Vec<&str> = roc.lines().skip(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(thresholds, ["inf", "0.999", "0.99", "0.98", "0.95", "0.85", "-inf"]);
    assert!(roc.starts_with("# wxindex verify roc --manifest"));
    ok(
        &[
            "verify",
            "roc",
            "--manifest",
            m,
            "--kind",
            "sot",
            "--lead",
            "1",
            "--thresholds",
            "actionable",
        ],
        None,
    );
    let roc = read(&data.join("roc_sot_lead1.csv"));
    let thresholds: Vec<&str> = roc.lines().skip(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(thresholds, ["inf", "8", "5", "2", "1", "0", "-inf"]);

    let o = wxindex(
        &[
            "verify",
            "roc",
            "--manifest",
            m,
            "--kind",
            "anf",
            "--lead",
            "1",
            "--thresholds",
            "actionable",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("explicit thresholds"));
    ok(
        &[
            "verify",
            "roc",
            "--manifest",
            m,
            "--kind",
            "anf",
            "--lead",
            "1",
            "--thresholds",
            "0,0.5,1,2",
        ],
        None,
    );

    // ANF defaults to k = 1
    let out2 = dir.path().join("k1");
    ok(
        &[
            "index",
            "--manifest",
            m,
            "--kind",
            "anf",
            "--lead",
            "3",
            "--k",
            "1.0",
            "--out",
            out2.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(
        body(&data.join("index_anf_lead3.csv")),
        body(&out2.join("index_anf_lead3.csv"))
    );
    ok(
        &[
            "index",
            "--manifest",
            m,
            "--kind",
            "anf",
            "--lead",
            "3",
            "--k",
            "5",
            "--out",
            out2.to_str().unwrap(),
        ],
        None,
    );
    assert_ne!(
        body(&data.join("index_anf_lead3.csv")),
        body(&out2.join("index_anf_lead3.csv"))
    );

    ok(
        &[
            "verify",
            "pev",
            "--manifest",
            m,
            "--kind",
            "efi",
            "--lead",
            "3",
            "--alphas",
            "0.05,0.1,0.5",
        ],
        None,
    );
    let pev = read(&data.join("pev_efi_lead3.csv"));
    assert_eq!(pev.lines().nth(1), Some("alpha,value,base_rate"));
    assert_eq!(pev.lines().count(), 5);

    ok(&["verify", "reliability", "--manifest", m, "--lead", "1"], None);
    let rel = read(&data.join("reliability_cpf_lead1.csv"));
    assert_eq!(rel.lines().count(), 8);

    ok(
        &[
            "verify",
            "corr",
            "--manifest",
            m,
            "--lead",
            "1",
            "--a",
            "cpf",
            "--b",
            "efi",
        ],
        None,
    );
    let corr = read(&data.join("corr_cpf_efi_lead1.csv"));
    assert_eq!(corr.lines().count(), 2 + 30 + 1);
    assert!(corr.lines().last().unwrap().starts_with("mean,180,"));

    ok(&["hist", "--manifest", m, "--kind", "efi", "--lead", "1"], None);
    let hist = read(&data.join("hist_efi_lead1.csv"));
    let total: u64 = hist
        .lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 180);
    let o = wxindex(&["hist", "--manifest", m, "--kind", "sot", "--lead", "1"], None);
    assert_eq!(o.status.code(), Some(2));

    ok(
        &[
            "verify",
            "auc-by-lead",
            "--manifest",
            m,
            "--bootstrap",
            "100",
            "--block-days",
            "5",
            "--seed",
            "9",
            "--reference",
            "efi",
            "--kinds",
            "cpf,efi",
        ],
        None,
    );
    let table = read(&data.join("auc_by_lead.csv"));
    assert_eq!(
        table.lines().nth(1),
        Some("kind,lead_days,cases,auc,ci_low,ci_high,reference,skill,skill_low,skill_high")
    );
    assert_eq!(table.lines().count(), 2 + 6);
    for line in table.lines().skip(2) {
        let f: Vec<f64> = line.split(',').skip(3).filter_map(|x| x.parse().ok()).collect();
        assert!(f[1] <= f[0] && f[0] <= f[2], "{line}");
    }

    // condition quantile keeps only upper-tail cases
    ok(
        &[
            "verify",
            "roc",
            "--manifest",
            m,
            "--kind",
            "efi",
            "--lead",
            "1",
            "--condition-quantile",
            "0.7",
        ],
        None,
    );
    let auc = read(&data.join("roc_efi_lead1_cond0.7_auc.csv"));
    let cases: usize = auc.lines().nth(2).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(cases < 180 && cases > 20, "{cases}");
    let o = wxindex(
        &[
            "verify",
            "roc",
            "--manifest",
            m,
            "--kind",
            "efi",
            "--lead",
            "1",
            "--condition-quantile",
            "0.95",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn reruns_are_byte_identical() {
    let (dir, manifest) = prepared();
    let m = manifest.to_str().unwrap();
    let data = manifest.parent().unwrap();
    let mut steps: Vec<Vec<&str>> = vec![vec!["climatology", "--manifest", m]];
    for lead in ["1", "3", "6"] {
        steps.push(vec!["index", "--manifest", m, "--kind", "cpf", "--lead", lead]);
    }
    steps.push(vec!["verify", "roc", "--manifest", m, "--kind", "cpf", "--lead", "3"]);
    steps.push(vec![
        "verify",
        "auc-by-lead",
        "--manifest",
        m,
        "--kinds",
        "cpf",
        "--bootstrap",
        "100",
        "--seed",
        "4",
    ]);
    let names = [
        "climate_model.csv",
        "climate_obs.csv",
        "index_cpf_lead3.csv",
        "roc_cpf_lead3.csv",
        "roc_cpf_lead3_auc.csv",
        "auc_by_lead.csv",
    ];
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        for step in &steps {
            ok(step, None);
        }
        snapshots.push(names.map(|n| std::fs::read(data.join(n)).unwrap()));
    }
    for (i, name) in names.iter().enumerate() {
        assert!(snapshots[0][i] == snapshots[1][i], "{name} differs between runs");
    }

    // synth into two directories chosen through the environment, so the
    // command lines are identical
    let runs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("run{i}"))).collect();
    let cfg = dir.path().join("scenario.json");
    for run in &runs {
        ok(&["synth", "--config", cfg.to_str().unwrap()], Some(run));
    }
    for name in [
        "forecasts.csv",
        "reforecasts.csv",
        "observations.csv",
        "observation_history.csv",
        "manifest.json",
    ] {
        assert_eq!(
            std::fs::read(runs[0].join(name)).unwrap(),
            std::fs::read(runs[1].join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn failure_removes_partial_outputs() {
    let (dir, manifest) = prepared();
    let out = dir.path().join("partial");
    std::fs::create_dir_all(out.join("climate_obs.csv")).unwrap();
    let o = wxindex(&["climatology", "--manifest", manifest.to_str().unwrap()], Some(&out));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!out.join("climate_model.csv").exists());
}

#[test]
fn corrupt_inputs_report_line_and_mismatch() {
    let (_dir, manifest) = prepared();
    let m = manifest.to_str().unwrap();
    let data = manifest.parent().unwrap();

    let obs = data.join("observations.csv");
    let text = read(&obs);
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[4] = lines[4].replace(",0,", ",0,oops");
    std::fs::write(&obs, lines.join("\n") + "\n").unwrap();
    ok(&["index", "--manifest", m, "--kind", "efi", "--lead", "1"], None);
    let o = wxindex(
        &["verify", "roc", "--manifest", m, "--kind", "efi", "--lead", "1"],
        None,
    );
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("observations.csv:5:"), "{}", stderr(&o));

    std::fs::write(&obs, text.lines().take(10).collect::<Vec<_>>().join("\n") + "\n").unwrap();
    let o = wxindex(
        &["verify", "roc", "--manifest", m, "--kind", "efi", "--lead", "1"],
        None,
    );
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[manifest]: "));
}
