#![allow(dead_code)]

use std::path::PathBuf;

use cito_core::frontend::{compile, SourceUnit};
use cito_core::model::ProgramModel;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn sample_sources() -> Vec<SourceUnit> {
    ["A", "B", "C"]
        .iter()
        .map(|c| {
            let path = fixtures().join("sample").join(format!("{c}.minij"));
            SourceUnit::new(
                path.display().to_string(),
                std::fs::read_to_string(&path).unwrap(),
            )
        })
        .collect()
}

pub fn sample() -> ProgramModel {
    compile("sample", &sample_sources()).unwrap()
}
pub mod oracle;
