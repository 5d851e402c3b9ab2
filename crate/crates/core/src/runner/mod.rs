//! Scenario orchestration: the 18-cell matrix, assembly of component
//! traces, aggregation to regions and the nation, and output files.

mod backtest;
mod config;
mod pipeline;
mod plot;
mod scenario;
mod table;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use log::{error, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use backtest::{backtest, BacktestReport, BacktestRow};
pub use config::RunConfig;
pub use pipeline::{draw_weather_years, BaseSet, Pipeline, ProjectionStats, ScenarioOutput};
pub use plot::{plot_outputs, stacked_bar_svg};
pub use scenario::{enumerate_scenarios, ScenarioDescriptor};
pub use table::{
    aggregate, assemble, hour_stamps, write_detailed, write_summary, Component, OutputTable, SummaryTable, COLUMNS,
};

use crate::ingest::InputBundle;
use crate::Result;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("{geography}: {component} has {found} hours, expected 8760")]
    ComponentLengthMismatch { geography: String, component: &'static str, found: usize },
    #[error("{geography}: {component} is negative at hour {hour}")]
    NegativeValue { geography: String, component: &'static str, hour: usize },
    #[error("{geography}: member {member} is not aligned with the others")]
    MisalignedTimestamps { geography: String, member: String },
    #[error("{0}: nothing to aggregate")]
    EmptyAggregate(String),
    #[error("{failed} of {total} scenarios failed")]
    ScenariosFailed { failed: usize, total: usize },
}

impl RunError {
    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        RunError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStatus {
    pub scenario: String,
    pub status: String,
    pub files: usize,
}

/// What was run and on which inputs; enough to reproduce the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub seed: u64,
    pub config_digest: String,
    pub inputs: BTreeMap<String, String>,
    pub detail_year: i32,
    pub snapshot_years: Vec<i32>,
    pub weather_years: BTreeMap<i32, i32>,
    pub scenarios: Vec<ScenarioStatus>,
    pub noise_vectors: Vec<String>,
    pub models: String,
    pub stats: BTreeMap<String, ProjectionStats>,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MODELS_FILE: &str = "models.json";
pub const NOISE_DIR: &str = "noise";

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| RunError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 20];
    loop {
        let n = f.read(&mut buf).map_err(|e| RunError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| RunError::Config(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| RunError::io(path, e))?;
    Ok(())
}

#[derive(Serialize)]
struct NoiseEntry {
    region: crate::Region,
    target: crate::bau::Target,
    month: usize,
    mean_abs: f64,
    std_abs: f64,
}

#[derive(Serialize)]
struct ModelsManifest<'a> {
    bau: Vec<&'a crate::bau::PenalizedLinearModel>,
    gdp_national_slow: &'a crate::gdp::GrowthCurve,
    gdp_national_rapid: &'a crate::gdp::GrowthCurve,
    gdp_anchor_value: f64,
    gdp_state_fits: &'a BTreeMap<String, crate::gdp::StateFits>,
    noise: Vec<NoiseEntry>,
}

/// Write the models manifest for a prepared pipeline.
pub fn write_models(pipeline: &Pipeline<'_>, path: &Path) -> Result<()> {
    let noise = pipeline
        .noise
        .iter()
        .flat_map(|(region, target, stats)| {
            stats.iter().enumerate().map(move |(m, s)| NoiseEntry {
                region,
                target,
                month: m + 1,
                mean_abs: s.mean_abs,
                std_abs: s.std_abs,
            })
        })
        .collect();
    let manifest = ModelsManifest {
        bau: pipeline.models.values().collect(),
        gdp_national_slow: &pipeline.gdp.national_slow,
        gdp_national_rapid: &pipeline.gdp.national_rapid,
        gdp_anchor_value: pipeline.gdp.anchor_value,
        gdp_state_fits: &pipeline.gdp.state_fits,
        noise,
    };
    write_json(path, &manifest)
}

/// Run every configured scenario and write the output tree under `out`.
pub fn run(config: &RunConfig, out: &Path, jobs: Option<usize>) -> Result<RunManifest> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(config, out))
}

fn run_in_pool(config: &RunConfig, out: &Path) -> Result<RunManifest> {
    let bundle = InputBundle::load(&config.data_dir)?;
    let pipeline = Pipeline::prepare(&bundle, config)?;
    std::fs::create_dir_all(out).map_err(|e| RunError::io(out, e))?;
    let scenarios = enumerate_scenarios(config);

    let mut gdp_axis: Vec<_> = scenarios.iter().map(|s| s.gdp).collect();
    gdp_axis.dedup();
    let mut bases = BTreeMap::new();
    let mut fleets = BTreeMap::new();
    let mut stats = BTreeMap::new();
    for g in gdp_axis {
        info!("projecting business-as-usual demand for {g} growth");
        let base = pipeline.base(g)?;
        stats.insert(g.to_string(), base.stats.clone());
        bases.insert(g, base);
        fleets.insert(g, pipeline.fleets(g)?);
    }

    let outcomes: Vec<(ScenarioDescriptor, Result<ScenarioOutput>)> = scenarios
        .par_iter()
        .map(|d| {
            info!("scenario {d}");
            (*d, pipeline.run_scenario(d, &bases[&d.gdp], &fleets[&d.gdp], out))
        })
        .collect();

    let noise_dir = out.join(NOISE_DIR);
    let mut noise_vectors = Vec::new();
    if config.noise {
        std::fs::create_dir_all(&noise_dir).map_err(|e| RunError::io(&noise_dir, e))?;
        for v in pipeline.noise_vectors()? {
            let rel = format!("{NOISE_DIR}/{}_{}.csv", v.region, v.target);
            v.write_csv(&out.join(&rel))?;
            noise_vectors.push(rel);
        }
    }
    write_models(&pipeline, &out.join(MODELS_FILE))?;

    let mut inputs = BTreeMap::new();
    for path in InputBundle::input_paths(&config.data_dir) {
        if path.exists() {
            let name = path.file_name().unwrap().to_string_lossy().to_string();
            inputs.insert(name, sha256_file(&path)?);
        }
    }
    let mut failed = 0;
    let statuses = outcomes
        .into_iter()
        .map(|(d, r)| match r {
            Ok(o) => ScenarioStatus { scenario: d.path(), status: "ok".into(), files: o.files },
            Err(e) => {
                error!("scenario {d} failed: {e}");
                failed += 1;
                ScenarioStatus { scenario: d.path(), status: format!("failed: {e}"), files: 0 }
            }
        })
        .collect::<Vec<_>>();
    let manifest = RunManifest {
        seed: config.seed,
        config_digest: config.digest(),
        inputs,
        detail_year: config.detail_year,
        snapshot_years: config.snapshot_years.clone(),
        weather_years: pipeline.weather_years.clone(),
        scenarios: statuses,
        noise_vectors,
        models: MODELS_FILE.into(),
        stats,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    if failed > 0 {
        return Err(RunError::ScenariosFailed { failed, total: manifest.scenarios.len() }.into());
    }
    Ok(manifest)
}

/// Relative paths of every file under `root`, sorted.
pub fn list_files(root: &Path) -> Vec<PathBuf> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<PathBuf>) {
        let Ok(entries) = std::fs::read_dir(dir) else { return };
        for e in entries.flatten() {
            let p = e.path();
            if p.is_dir() {
                walk(&p, root, out);
            } else if let Ok(rel) = p.strip_prefix(root) {
                out.push(rel.to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
