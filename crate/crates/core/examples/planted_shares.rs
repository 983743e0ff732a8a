//! Write the planted co-sharing fixture: `shares.ndjson` and `labels.csv`.
//!
//! Usage: planted_shares <out-dir> [seed]

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use domainweb_core::sharing::{planted_share_records, PlantedConfig};

const DEFAULT_SEED: u64 = 2021;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(
        args.next()
            .ok_or("usage: planted_shares <out-dir> [seed]")?,
    );
    let seed = match args.next() {
        Some(s) => s.parse()?,
        None => DEFAULT_SEED,
    };
    let (records, labels) = planted_share_records(&PlantedConfig::default(), seed);
    fs::create_dir_all(&out)?;

    let mut shares = fs::File::create(out.join("shares.ndjson"))?;
    for r in &records {
        writeln!(shares, "{}", serde_json::to_string(r)?)?;
    }
    let mut csv = fs::File::create(out.join("labels.csv"))?;
    writeln!(csv, "domain,label")?;
    for (domain, label) in &labels {
        writeln!(csv, "{domain},{label}")?;
    }
    println!(
        "{} records, {} labeled domains",
        records.len(),
        labels.len()
    );
    Ok(())
}
