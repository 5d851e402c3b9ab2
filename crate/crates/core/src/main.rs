use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use loadcast::cooling::CoolingScenario;
use loadcast::ev::ChargingScheme;
use loadcast::gdp::GdpScenario;
use loadcast::ingest::{validate_bundle, InputBundle};
use loadcast::runner::{self, RunConfig};
use loadcast::{fixtures, Error};
use serde_json::json;

#[derive(Parser)]
#[command(name = "loadcast", version, about = "Scenario projections of hourly electricity demand")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run config (JSON). Without it, defaults apply and inputs come from --data.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input directory, overriding the config.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    gdp: Vec<GdpScenario>,
    #[arg(long, global = true, value_delimiter = ',')]
    charging: Vec<ChargingScheme>,
    #[arg(long, global = true, value_delimiter = ',')]
    cooling: Vec<CoolingScenario>,
    /// Restrict snapshot years.
    #[arg(long, global = true, value_delimiter = ',')]
    year: Vec<i32>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario matrix and write output tables.
    Run,
    /// Fit on 2014-2018 and score the 2019 hold-out.
    Backtest,
    /// Check every input file and print a report.
    ValidateInputs,
    /// Write the synthetic input set and a matching config.
    InitFixtures,
    /// Render stacked annual bars from a finished run.
    Plot {
        #[arg(long, default_value = "IN")]
        geography: String,
    },
}

impl Global {
    fn config(&self) -> Result<RunConfig, Error> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig { data_dir: PathBuf::from("data"), ..RunConfig::default() },
        };
        if let Some(d) = &self.data {
            c.data_dir = d.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if !self.gdp.is_empty() {
            c.gdp = self.gdp.clone();
        }
        if !self.charging.is_empty() {
            c.charging = self.charging.clone();
        }
        if !self.cooling.is_empty() {
            c.cooling = self.cooling.clone();
        }
        if !self.year.is_empty() {
            c.snapshot_years = self.year.clone();
            if !c.snapshot_years.contains(&c.detail_year) {
                c.detail_year = *c.snapshot_years.iter().max().unwrap();
                log::info!("detail year set to {}", c.detail_year);
            }
        }
        c.validate()?;
        Ok(c)
    }

    fn out(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

fn execute(cli: Cli) -> Result<serde_json::Value, Error> {
    let g = &cli.global;
    match cli.command {
        Command::Run => {
            let config = g.config()?;
            let out = g.out("out");
            let manifest = runner::run(&config, &out, g.jobs)?;
            Ok(json!({
                "out": out,
                "scenarios": manifest.scenarios.len(),
                "weather_years": manifest.weather_years,
                "config_digest": manifest.config_digest,
            }))
        }
        Command::Backtest => {
            let config = g.config()?;
            let bundle = InputBundle::load(&config.data_dir)?;
            let report = runner::backtest(&bundle, &config)?;
            print!("{}", report.to_text());
            if let Some(out) = &g.out {
                std::fs::create_dir_all(out).map_err(|e| runner::RunError::Io { path: out.display().to_string(), message: e.to_string() })?;
                report.write_csv(&out.join("backtest.csv"))?;
            }
            Ok(json!({ "test_year": report.test_year, "rows": report.rows.len() }))
        }
        Command::ValidateInputs => {
            let dir = match (&g.data, &g.config) {
                (Some(d), _) => d.clone(),
                (None, Some(_)) => g.config()?.data_dir,
                (None, None) => PathBuf::from("data"),
            };
            let report = validate_bundle(&dir);
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if report.ok {
                Ok(json!({ "ok": true }))
            } else {
                Err(runner::RunError::Config(format!("{} input problems in {}", report.issues.len() + report.files.iter().filter(|f| !f.ok).count(), dir.display())).into())
            }
        }
        Command::InitFixtures => {
            let dir = g.out("data");
            let set = fixtures::generate(&dir, g.seed.unwrap_or(42))?;
            Ok(json!({ "dir": set.dir, "config": set.config_path, "files": set.files.len(), "weather_rows": set.weather_rows }))
        }
        Command::Plot { geography } => {
            let out = g.out("out");
            let files = runner::plot_outputs(&out, &geography)?;
            Ok(json!({ "plots": files }))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(summary) => {
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
