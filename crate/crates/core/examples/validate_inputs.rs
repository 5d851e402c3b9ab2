//! Generate the synthetic input set, break one file, and show the report.
//!
//!     cargo run --example validate_inputs

use loadcast::fixtures;
use loadcast::ingest::{files, validate_bundle};

fn main() -> anyhow::Result<()> {
    let tmp = tempfile::tempdir()?;
    let set = fixtures::generate(tmp.path(), 42)?;
    let report = validate_bundle(&set.dir);
    println!("fresh fixtures ok: {}", report.ok);
    for f in &report.files {
        println!("  {:<24} {}", f.file, f.detail);
    }

    std::fs::write(set.dir.join(files::EV_PARAMS), "segment,kwh_per_km\nE2W,abc\n")?;
    let broken = validate_bundle(&set.dir);
    println!("after corrupting {}: ok = {}", files::EV_PARAMS, broken.ok);
    for f in broken.files.iter().filter(|f| !f.ok) {
        println!("  {}: {}", f.file, f.detail);
    }
    Ok(())
}
