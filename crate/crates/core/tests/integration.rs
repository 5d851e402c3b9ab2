use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use loadcast::cooling::CoolingScenario;
use loadcast::ev::ChargingScheme;
use loadcast::fixtures::{self, FixtureSet};
use loadcast::gdp::{GdpProjections, GdpScenario, StableTable};
use loadcast::ingest::{
    files, load_daily_demand, load_reference_year, validate_bundle, write_daily_demand, write_reference_years,
    InputBundle, StateMap,
};
use loadcast::runner::{self, list_files, sha256_file, RunConfig};

fn fixture() -> &'static (tempfile::TempDir, FixtureSet) {
    static F: OnceLock<(tempfile::TempDir, FixtureSet)> = OnceLock::new();
    F.get_or_init(|| {
        let tmp = tempfile::tempdir().unwrap();
        let set = fixtures::generate(&tmp.path().join("data"), 7).unwrap();
        (tmp, set)
    })
}

fn bundle() -> &'static InputBundle {
    static B: OnceLock<InputBundle> = OnceLock::new();
    B.get_or_init(|| InputBundle::load(&fixture().1.dir).unwrap())
}

fn small_config() -> RunConfig {
    RunConfig {
        snapshot_years: vec![2030, 2050],
        ..RunConfig::load(&fixture().1.config_path).unwrap()
    }
}

fn scratch(name: &str) -> PathBuf {
    let p = fixture().0.path().join(name);
    let _ = std::fs::remove_dir_all(&p);
    p
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_loadcast"))
}

fn last_json_line(bytes: &[u8]) -> serde_json::Value {
    let text = String::from_utf8_lossy(bytes);
    let line = text.lines().rev().find(|l| l.starts_with('{')).unwrap_or_else(|| panic!("no json in {text}"));
    serde_json::from_str(line).unwrap()
}

#[test]
fn generated_fixtures_validate_clean() {
    let report = validate_bundle(&fixture().1.dir);
    assert!(report.ok, "{:#?}", report.issues);
    assert_eq!(report.files.len(), files::ALL.len());
}

#[test]
fn validation_reports_every_missing_file() {
    let dir = scratch("empty");
    std::fs::create_dir_all(&dir).unwrap();
    let report = validate_bundle(&dir);
    assert!(!report.ok);
    let failed = report.files.iter().filter(|f| !f.ok).count();
    // the two optional inputs may be absent
    assert!(failed >= files::ALL.len() - 2, "{failed}");
}

#[test]
fn gdp_scenarios_stay_ordered_on_fixtures() {
    let b = bundle();
    let stable = StableTable::from_rows(b.stable_anchors.as_deref().unwrap()).unwrap();
    let gdp = GdpProjections::build(&b.gdp, Some(&stable), &b.states, Default::default()).unwrap();
    assert!(gdp.ordering_violations().is_empty(), "{:?}", gdp.ordering_violations());
    for g in GdpScenario::ALL {
        let national = gdp.national(g).unwrap();
        for year in [2020, 2035, 2050] {
            let states: f64 = gdp.states(g).unwrap().values().map(|p| p.get(year).unwrap()).sum();
            let v = national.get(year).unwrap();
            assert!((states - v).abs() <= 1e-9 * v, "{g} {year}: {states} vs {v}");
        }
    }
}

#[test]
fn demand_and_reference_round_trip() {
    let b = bundle();
    let dir = scratch("roundtrip");
    std::fs::create_dir_all(&dir).unwrap();
    let demand = dir.join(files::DEMAND);
    write_daily_demand(&demand, &b.demand).unwrap();
    assert_eq!(load_daily_demand(&demand).unwrap(), b.demand);

    let reference = dir.join(files::REFERENCE);
    let years: Vec<_> = b.reference.values().cloned().collect();
    write_reference_years(&reference, &years).unwrap();
    assert_eq!(&load_reference_year(&reference).unwrap(), &b.reference);

    let states = dir.join(files::STATES);
    b.states.write(&states).unwrap();
    let back = StateMap::load(&states).unwrap();
    assert_eq!(back.states().collect::<Vec<_>>(), b.states.states().collect::<Vec<_>>());
}

#[test]
fn scenario_outputs_do_not_depend_on_the_filter() {
    let narrow = RunConfig {
        gdp: vec![GdpScenario::Slow],
        charging: vec![ChargingScheme::Home],
        cooling: vec![CoolingScenario::Baseline],
        ..small_config()
    };
    let wide = RunConfig {
        gdp: vec![GdpScenario::Slow, GdpScenario::Rapid],
        charging: vec![ChargingScheme::Home, ChargingScheme::Public],
        ..small_config()
    };
    let (a, b) = (scratch("narrow"), scratch("wide"));
    runner::run(&narrow, &a, Some(1)).unwrap();
    runner::run(&wide, &b, Some(1)).unwrap();
    let shared = Path::new("slow/home/baseline");
    let files_a: Vec<_> = list_files(&a.join(shared));
    assert_eq!(files_a.len(), 46);
    for rel in files_a {
        let x = sha256_file(&a.join(shared).join(&rel)).unwrap();
        let y = sha256_file(&b.join(shared).join(&rel)).unwrap();
        assert_eq!(x, y, "{}", rel.display());
    }
}

fn diurnal(values: impl Iterator<Item = f64>) -> [f64; 24] {
    let mut acc = [0.0; 24];
    for (i, v) in values.enumerate() {
        acc[i % 24] += v;
    }
    acc
}

fn correlation(a: &[f64; 24], b: &[f64; 24]) -> f64 {
    let ma = a.iter().sum::<f64>() / 24.0;
    let mb = b.iter().sum::<f64>() / 24.0;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn projected_base_keeps_the_reference_daily_shape() {
    let config = RunConfig {
        gdp: vec![GdpScenario::Stable],
        charging: vec![ChargingScheme::Home],
        cooling: vec![CoolingScenario::Baseline],
        ..small_config()
    };
    let out = scratch("shape");
    runner::run(&config, &out, Some(1)).unwrap();
    let text = std::fs::read_to_string(out.join("stable/home/baseline/detailed/IN.csv")).unwrap();
    let base = diurnal(text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()));
    let mut reference = [0.0; 24];
    for year in bundle().reference.values() {
        let d = diurnal(year.values.iter().copied());
        (0..24).for_each(|h| reference[h] += d[h]);
    }
    let r = correlation(&base, &reference);
    assert!(r > 0.8, "diurnal correlation {r}");
}

#[test]
fn cli_errors_are_json_with_nonzero_exit() {
    let out = bin().args(["run", "--config", "/nonexistent/config.json"]).output().unwrap();
    assert!(!out.status.success());
    let body = last_json_line(&out.stderr);
    assert!(body["error"]["kind"].is_string(), "{body}");
    assert!(body["error"]["message"].as_str().unwrap().contains("nonexistent"));

    let out = bin().args(["run", "--year", "1990"]).arg("--config").arg(&fixture().1.config_path).output().unwrap();
    assert!(!out.status.success());
    assert!(last_json_line(&out.stderr)["error"].is_object());
}

#[test]
fn cli_validate_inputs_prints_a_report() {
    let out = bin().arg("validate-inputs").arg("--data").arg(&fixture().1.dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["ok"], true);

    let empty = scratch("cli-empty");
    std::fs::create_dir_all(&empty).unwrap();
    let out = bin().arg("validate-inputs").arg("--data").arg(&empty).output().unwrap();
    assert!(!out.status.success());
    assert!(last_json_line(&out.stderr)["error"].is_object());
}

#[test]
fn cli_init_fixtures_then_plot() {
    let data = scratch("cli-data");
    let out = bin().args(["init-fixtures", "--seed", "3", "--out"]).arg(&data).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(data.join(fixtures::CONFIG_FILE).is_file());

    let run = scratch("cli-run");
    let status = bin()
        .args(["run", "--gdp", "rapid", "--charging", "work", "--cooling", "efficient", "--year", "2025,2045", "--jobs", "1"])
        .arg("--config")
        .arg(data.join(fixtures::CONFIG_FILE))
        .arg("--out")
        .arg(&run)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let summary = std::fs::read_to_string(run.join("rapid/work/efficient/summary/IN.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    // detail year falls back to the last requested year
    assert_eq!(std::fs::read_to_string(run.join("rapid/work/efficient/detailed/IN.csv")).unwrap().lines().count(), 8761);

    let plot = bin().args(["plot", "--geography", "SR", "--out"]).arg(&run).output().unwrap();
    assert!(plot.status.success(), "{}", String::from_utf8_lossy(&plot.stderr));
    let plots = last_json_line(&plot.stderr)["plots"].as_array().unwrap().clone();
    assert!(!plots.is_empty());
    for p in plots {
        assert!(std::fs::read_to_string(p.as_str().unwrap()).unwrap().starts_with("<svg"));
    }
}
