//! Scenario sweeps. Each row is an independent run; a failing row records
//! its error and the others proceed.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use crate::taxonomy::Scheme;

use super::config::RunConfig;
use super::ingest::{self, RawInputs};
use super::report::{self, fmt6, Headline, OutputFile, CELL_NAMES, NA};
use super::{compute_from, write_atomic, PipelineError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepValues {
    pub cells: [f64; 12],
    /// Headline-variant employment change per wage quartile.
    pub quartiles: [Option<f64>; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scenario: String,
    pub health_growth: bool,
    pub consensus_threshold: usize,
    pub result: Result<SweepValues, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

type InputKey = (Vec<(&'static str, PathBuf)>, Scheme, Scheme, Scheme);

fn input_key(c: &RunConfig) -> InputKey {
    (c.input_files(), c.industry_scheme, c.fine_scheme, c.occupation_scheme)
}

/// Runs every config, in parallel, keeping input order. Input files shared
/// between configs are read once.
pub fn sweep(configs: &[RunConfig]) -> Result<SweepTable, PipelineError> {
    if configs.is_empty() {
        return Err(PipelineError::Config("sweep needs at least one configuration".into()));
    }
    let mut cache: BTreeMap<InputKey, Result<RawInputs, String>> = BTreeMap::new();
    for c in configs {
        cache
            .entry(input_key(c))
            .or_insert_with(|| ingest::read_inputs(c).map_err(|e| e.to_string()));
    }
    let rows = configs
        .par_iter()
        .map(|c| {
            let result = match &cache[&input_key(c)] {
                Err(e) => Err(e.clone()),
                Ok(raw) => c
                    .check_ranges()
                    .and_then(|()| compute_from(c, raw))
                    .map(|out| {
                        let quartiles = out.report.quartiles.quartiles.clone();
                        SweepValues {
                            cells: out.aggregates().cells().map(|(_, v)| v),
                            quartiles: std::array::from_fn(|q| quartiles[q].employment_change),
                        }
                    })
                    .map_err(|e| e.to_string()),
            };
            SweepRow {
                scenario: c.scenario.clone(),
                health_growth: c.health_growth,
                consensus_threshold: c.consensus_threshold,
                result,
            }
        })
        .collect();
    Ok(SweepTable { rows })
}

impl SweepTable {
    pub fn to_csv(&self) -> Vec<u8> {
        let mut header = vec!["scenario", "health_growth", "consensus_threshold", "headline", "status"];
        header.extend(CELL_NAMES);
        header.extend(["q1", "q2", "q3", "q4", "error"]);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec = vec![
                r.scenario.clone(),
                r.health_growth.to_string(),
                r.consensus_threshold.to_string(),
                Headline::from_flag(r.health_growth).as_str().to_string(),
            ];
            match &r.result {
                Ok(v) => {
                    rec.push("ok".into());
                    rec.extend(v.cells.iter().map(|&x| fmt6(x)));
                    rec.extend(v.quartiles.iter().map(|q| q.map_or_else(|| NA.to_string(), fmt6)));
                    rec.push(String::new());
                }
                Err(e) => {
                    rec.push("error".into());
                    rec.extend(std::iter::repeat_n(NA.to_string(), 16));
                    rec.push(e.clone());
                }
            }
            w.write_record(&rec).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Runs the sweep grid of `config` and writes `sweep.csv` plus a manifest.
pub fn run_sweep(config: &RunConfig) -> Result<SweepTable, PipelineError> {
    let table = sweep(&config.sweep_variants())?;
    let mut hashes = BTreeMap::new();
    for (key, path) in config.input_files() {
        if let Ok(bytes) = std::fs::read(&path) {
            hashes.insert(key.to_string(), ingest::sha256_hex(&bytes));
        }
    }
    let files = vec![OutputFile {
        path: "sweep.csv".into(),
        bytes: table.to_csv(),
    }];
    let manifest = report::manifest(&config.echo(), &hashes, &files);
    let files = [
        files,
        vec![OutputFile {
            path: "sweep_manifest.json".into(),
            ..manifest
        }],
    ]
    .concat();
    write_atomic(&config.output_path(), &files)?;
    Ok(table)
}
