//! Engine against oracle on one economy.

use std::path::Path;

use shockgrid::pipeline::{self, PipelineError, RunConfig, RunOutput};

use crate::economy::SyntheticEconomy;
use crate::fixture::write_inputs;
use crate::oracle::{oracle_shocks, OracleOutput};

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub max_abs_diff: f64,
    /// Structural disagreements: axes, drop lists, missing values.
    pub mismatches: Vec<String>,
}

impl Comparison {
    pub fn agrees(&self, tol: f64) -> bool {
        self.mismatches.is_empty() && self.max_abs_diff <= tol
    }
}

/// Writes `econ` into `dir` and runs the pipeline on it without writing
/// outputs.
pub fn run_engine(econ: &SyntheticEconomy, dir: &Path) -> Result<RunOutput, PipelineError> {
    let config_path = write_inputs(econ, dir).map_err(|source| PipelineError::InputIo {
        path: dir.to_path_buf(),
        source,
    })?;
    pipeline::compute(&RunConfig::from_file(&config_path)?)
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

fn diff(cmp: &mut Comparison, what: &str, a: &[f64], b: &[f64]) {
    if a.len() != b.len() {
        cmp.mismatches
            .push(format!("{what}: length {} vs {}", a.len(), b.len()));
        return;
    }
    for (x, y) in a.iter().zip(b) {
        cmp.max_abs_diff = cmp.max_abs_diff.max((x - y).abs());
    }
}

pub fn compare(engine: &RunOutput, oracle: &OracleOutput) -> Comparison {
    let mut cmp = Comparison {
        max_abs_diff: 0.0,
        mismatches: Vec::new(),
    };
    let mut same_list = |what: &str, a: Vec<String>, b: &[String]| {
        if a != b {
            cmp.mismatches.push(format!("{what}: engine {a:?}, oracle {b:?}"));
        }
    };
    let ind = &engine.shocks.industries;
    let occ = &engine.shocks.occupations;
    let diag = &engine.diagnostics;
    same_list("industries", strings(&ind.e.entities), &oracle.industries);
    same_list("occupations", strings(&occ.y.entities), &oracle.occupations);
    same_list(
        "dropped for activities",
        strings(&diag.dropped_occupations.fewer_activities),
        &oracle.dropped_fewer_activities,
    );
    same_list(
        "dropped for employment",
        strings(&diag.dropped_occupations.zero_employment),
        &oracle.dropped_zero_employment,
    );
    same_list(
        "industries without employment",
        strings(&diag.industries_without_employment),
        &oracle.industries_without_employment,
    );
    same_list(
        "zero-link industries",
        strings(&diag.zero_link_industries),
        &oracle.zero_link_industries,
    );

    diff(&mut cmp, "e", &ind.e.values, &oracle.e);
    diff(&mut cmp, "r", &ind.r.values, &oracle.r);
    diff(&mut cmp, "ISS", &ind.iss.values, &oracle.iss);
    diff(&mut cmp, "IDS", &ind.ids.values, &oracle.ids);
    diff(&mut cmp, "ITS", &ind.its.values, &oracle.its);
    diff(&mut cmp, "ITS_h", &ind.its_health.values, &oracle.its_health);
    diff(&mut cmp, "x", &occ.x.values, &oracle.x);
    diff(&mut cmp, "y", &occ.y.values, &oracle.y);
    diff(&mut cmp, "OSS", &occ.oss.values, &oracle.oss);
    diff(&mut cmp, "ODS", &occ.ods.values, &oracle.ods);
    diff(&mut cmp, "OTS", &occ.ots.values, &oracle.ots);
    diff(&mut cmp, "OTS_h", &occ.ots_health.values, &oracle.ots_health);
    diff(
        &mut cmp,
        "aggregates",
        &engine.aggregates().cells().map(|(_, v)| v),
        &oracle.aggregates,
    );
    let v = &engine.report.venn;
    diff(
        &mut cmp,
        "venn",
        &[v.non_essential, v.cannot_remote, v.intersection, v.essential_and_remote],
        &oracle.venn,
    );
    for (q, expected) in engine.report.quartiles.quartiles.iter().zip(&oracle.quartiles) {
        match (q.employment_change, expected) {
            (Some(a), Some(b)) => diff(&mut cmp, "quartile", &[a], &[*b]),
            (None, None) => {}
            (a, b) => cmp
                .mismatches
                .push(format!("quartile {}: engine {a:?}, oracle {b:?}", q.quartile)),
        }
    }
    cmp
}

/// Runs both routes on `econ`, using `dir` for the input files. Both
/// failing counts as agreement with a zero difference; one failing is an
/// error.
pub fn check_economy(econ: &SyntheticEconomy, dir: &Path) -> Result<Comparison, String> {
    let engine = run_engine(econ, dir);
    let oracle = oracle_shocks(econ);
    match (engine, oracle) {
        (Ok(e), Ok(o)) => Ok(compare(&e, &o)),
        (Err(_), Err(_)) => Ok(Comparison {
            max_abs_diff: 0.0,
            mismatches: Vec::new(),
        }),
        (Ok(_), Err(o)) => Err(format!("seed {}: oracle failed ({o}) but engine ran", econ.seed)),
        (Err(e), Ok(_)) => Err(format!("seed {}: engine failed ({e}) but oracle ran", econ.seed)),
    }
}
