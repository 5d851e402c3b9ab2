//! Train on 2014-2018 and score the 2019 hold-out, with and without
//! natural variation.
//!
//!     cargo run --release --example backtest

use loadcast::fixtures;
use loadcast::ingest::InputBundle;
use loadcast::runner::{backtest, RunConfig};

fn main() -> anyhow::Result<()> {
    let tmp = tempfile::tempdir()?;
    let set = fixtures::generate(tmp.path(), 42)?;
    let bundle = InputBundle::load(&set.dir)?;
    let config = RunConfig::load(&set.config_path)?;
    let report = backtest(&bundle, &config)?;
    print!("{}", report.to_text());
    Ok(())
}
