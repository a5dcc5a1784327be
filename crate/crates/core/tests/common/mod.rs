#![allow(dead_code)]

use std::path::PathBuf;

use anticyc::formats::ingest_eigenform;
use anticyc::qexp::Eigenform;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// The level-11 weight-2 newform from the data directory.
pub fn level11() -> Eigenform {
    ingest_eigenform(&data_path("level11.json")).expect("data/level11.json")
}

/// Seed for sampled properties, overridable through ANTICYC_SEED.
pub fn seed() -> u64 {
    std::env::var("ANTICYC_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20240101)
}
