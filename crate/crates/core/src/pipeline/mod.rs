//! End-to-end runs: read inputs, assemble the model, compute shocks and
//! aggregates, and write reports.

pub mod config;
pub mod ingest;
pub mod model;
pub mod report;
pub mod sweep;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::aggregation::{quartile_breakdown, venn_decomposition, AggregateError, AggregateReport, AggregateRow};
use crate::engine::{compute_shocks, EngineError, ShockInputs, ShockSet};
use crate::scenario::ScenarioError;
use crate::stats::{pearson, pearson_present};
use crate::taxonomy::TaxonomyError;

pub use config::RunConfig;
pub use model::{Diagnostics, Model};
pub use report::{AggregateTable, AggregatesDoc, Headline, OutputFile};
pub use sweep::{sweep, SweepRow, SweepTable};

use report::{
    CorrelationEntry, EssentialSummary, IndustryPlotRow, IndustryRow, OccupationPlotRow, OccupationRow, QuartileSection,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{file}:{line}: column {column:?}: {reason}")]
    Schema {
        file: PathBuf,
        line: u64,
        column: String,
        reason: String,
    },
    #[error("integrity: {0}")]
    Integrity(String),
    #[error("reading {path}: {source}")]
    InputIo { path: PathBuf, source: std::io::Error },
    #[error("writing {path}: {source}")]
    OutputIo { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
}

impl PipelineError {
    /// Whether the error means the inputs or config are unusable, as
    /// opposed to a failure while computing or writing.
    pub fn is_validation(&self) -> bool {
        match self {
            PipelineError::Config(_)
            | PipelineError::Schema { .. }
            | PipelineError::Integrity(_)
            | PipelineError::InputIo { .. }
            | PipelineError::Taxonomy(_)
            | PipelineError::Scenario(_) => true,
            PipelineError::Engine(e) => matches!(e, EngineError::BadThreshold { .. }),
            PipelineError::Aggregate(e) => matches!(
                e,
                AggregateError::MissingWages
                    | AggregateError::ZeroEmployment
                    | AggregateError::ZeroGdp
                    | AggregateError::InvalidValue { .. }
            ),
            PipelineError::OutputIo { .. } => false,
        }
    }
}

/// Everything one run produces, before rendering.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub model: Model,
    pub shocks: ShockSet,
    pub report: AggregateReport,
    pub headline: Headline,
    pub correlations: BTreeMap<String, CorrelationEntry>,
    pub essential_summary: EssentialSummary,
    pub diagnostics: Diagnostics,
    pub config_echo: BTreeMap<String, String>,
    pub input_hashes: BTreeMap<String, String>,
}

impl RunOutput {
    pub fn aggregates(&self) -> AggregateTable {
        AggregateTable {
            supply: self.report.supply,
            demand: self.report.demand,
            total: self.report.total,
            total_health: self.report.total_health,
        }
    }
}

/// Checks every input and reports what would be dropped.
pub fn validate(config: &RunConfig) -> Result<Diagnostics, PipelineError> {
    config.check_ranges()?;
    let raw = ingest::read_inputs(config)?;
    let (_, diag) = model::assemble(config, &raw)?;
    Ok(diag)
}

/// Computes all shocks and aggregates without writing anything.
pub fn compute(config: &RunConfig) -> Result<RunOutput, PipelineError> {
    config.check_ranges()?;
    let raw = ingest::read_inputs(config)?;
    compute_from(config, &raw)
}

pub(crate) fn compute_from(config: &RunConfig, raw: &ingest::RawInputs) -> Result<RunOutput, PipelineError> {
    let (model, diagnostics) = model::assemble(config, raw)?;
    let shocks = compute_shocks(&ShockInputs {
        concordance: &model.concordance,
        essential: &model.essential,
        overrides: Some(&model.overrides),
        employment: &model.employment,
        activities: &model.activities,
        remotability: &model.remotability,
        scenario: &model.sector_shocks,
    })?;
    let (ind, occ) = (&shocks.industries, &shocks.occupations);
    let (wages, va) = (&model.wages, &model.value_added);
    let headline = Headline::from_flag(config.health_growth);
    let headline_shock = match headline {
        Headline::Total => &occ.ots,
        Headline::TotalHealth => &occ.ots_health,
    };
    let report = AggregateReport {
        supply: AggregateRow::compute(&occ.oss, &ind.iss, wages, va)?,
        demand: AggregateRow::compute(&occ.ods, &ind.ids, wages, va)?,
        total: AggregateRow::compute(&occ.ots, &ind.its, wages, va)?,
        total_health: AggregateRow::compute(&occ.ots_health, &ind.its_health, wages, va)?,
        quartiles: quartile_breakdown(headline_shock, wages)?,
        venn: venn_decomposition(&model.employment, &ind.e, &occ.y)?,
    };
    let correlations = correlations(&model, &shocks);
    let essential_summary = essential_summary(&model, &shocks);
    let mut input_hashes = raw.hashes.clone();
    input_hashes.insert(
        "scenario".into(),
        ingest::sha256_hex(model.scenario.to_csv().as_bytes()),
    );
    Ok(RunOutput {
        model,
        shocks,
        report,
        headline,
        correlations,
        essential_summary,
        diagnostics,
        config_echo: config.echo(),
        input_hashes,
    })
}

fn correlations(model: &Model, shocks: &ShockSet) -> BTreeMap<String, CorrelationEntry> {
    let (ind, occ) = (&shocks.industries, &shocks.occupations);
    let employed: Vec<usize> = (0..ind.e.len())
        .filter(|n| !ind.without_employment.contains(n))
        .collect();
    let pick = |v: &[f64]| employed.iter().map(|&n| v[n]).collect::<Vec<_>>();
    let median: Vec<Option<f64>> = model.wages.rows().iter().map(|r| r.median_wage).collect();
    let exposure: Vec<Option<f64>> = model.wages.rows().iter().map(|r| r.exposure).collect();
    let some = |v: &[f64]| v.iter().map(|&x| Some(x)).collect::<Vec<_>>();

    let mut out = BTreeMap::new();
    let mut put = |name: &str, entry| {
        out.insert(name.to_string(), entry);
    };
    put(
        "industry_essential_vs_rli",
        CorrelationEntry::from_result(pearson(&pick(&ind.e.values), &pick(&ind.r.values))),
    );
    put(
        "occupation_essential_vs_rli",
        CorrelationEntry::from_result(pearson(&occ.x.values, &occ.y.values)),
    );
    for (name, values) in [
        ("median_wage_vs_rli", &occ.y.values),
        ("median_wage_vs_essential", &occ.x.values),
        ("median_wage_vs_supply_shock", &occ.oss.values),
        ("median_wage_vs_demand_shock", &occ.ods.values),
        ("median_wage_vs_labor_shock", &occ.ots_health.values),
    ] {
        put(
            name,
            CorrelationEntry::from_result(pearson_present(&median, &some(values))),
        );
    }
    put(
        "median_wage_vs_exposure",
        CorrelationEntry::from_result(pearson_present(&median, &exposure)),
    );
    out
}

fn essential_summary(model: &Model, shocks: &ShockSet) -> EssentialSummary {
    let e = &shocks.industries.e.values;
    let totals = model.employment.industry_totals();
    let total: f64 = totals.iter().sum();
    EssentialSummary {
        fine_essential_fraction: model.essential.essential_fraction(),
        mean_industry_score: if e.is_empty() {
            0.0
        } else {
            e.iter().sum::<f64>() / e.len() as f64
        },
        labor_share_essential: e.iter().zip(&totals).map(|(a, b)| a * b).sum::<f64>() / total,
    }
}

/// Renders every output file of a run, manifest last.
pub fn render(out: &RunOutput, impute_missing_wages: bool) -> Vec<OutputFile> {
    let (ind, occ) = (&out.shocks.industries, &out.shocks.occupations);
    let m = &out.model;
    let industry_rows: Vec<IndustryRow> = (0..ind.e.len())
        .map(|n| IndustryRow {
            code: ind.e.entities[n].clone(),
            e: ind.e.values[n],
            r: (!ind.without_employment.contains(&n)).then(|| ind.r.values[n]),
            iss: ind.iss.values[n],
            ids: ind.ids.values[n],
            its: ind.its.values[n],
            its_health: ind.its_health.values[n],
        })
        .collect();
    let occupation_rows: Vec<OccupationRow> = (0..occ.x.len())
        .map(|j| OccupationRow {
            code: occ.x.entities[j].clone(),
            x: occ.x.values[j],
            y: occ.y.values[j],
            oss: occ.oss.values[j],
            ods: occ.ods.values[j],
            ots: occ.ots.values[j],
            ots_health: occ.ots_health.values[j],
        })
        .collect();

    let imputed = impute_missing_wages.then(|| m.wages.mean_median_wage()).flatten();
    let occ_plot: Vec<OccupationPlotRow> = m
        .wages
        .rows()
        .iter()
        .zip(&occupation_rows)
        .map(|(w, o)| OccupationPlotRow {
            code: o.code.clone(),
            employment: w.employment,
            median_wage: w.median_wage.or(imputed),
            wage_available: w.median_wage.is_some(),
            exposure: w.exposure,
            x: o.x,
            y: o.y,
            oss: o.oss,
            ods: o.ods,
            ots: o.ots,
            ots_health: o.ots_health,
        })
        .collect();
    let counts = m.employment.counts();
    let ind_totals = m.employment.industry_totals();
    let va_shares = m.value_added.shares();
    let ind_plot: Vec<IndustryPlotRow> = industry_rows
        .iter()
        .enumerate()
        .map(|(n, r)| {
            let (mut num, mut den) = (0.0, 0.0);
            for (j, w) in m.wages.rows().iter().enumerate() {
                if let Some(x) = w.exposure {
                    num += counts.get(n, j) * x;
                    den += counts.get(n, j);
                }
            }
            IndustryPlotRow {
                code: r.code.clone(),
                employment: ind_totals[n],
                value_added_share: va_shares[n],
                exposure: (den > 0.0).then(|| num / den),
                e: r.e,
                r: r.r,
                iss: r.iss,
                ids: r.ids,
                its: r.its,
                its_health: r.its_health,
            }
        })
        .collect();

    let doc = AggregatesDoc {
        config: out.config_echo.clone(),
        input_hashes: out.input_hashes.clone(),
        scenario: out.diagnostics.scenario.clone(),
        headline: out.headline,
        aggregates: out.aggregates(),
        quartiles: QuartileSection {
            variant: out.headline,
            rows: out.report.quartiles.quartiles.clone(),
            excluded_without_wage: out.report.quartiles.excluded_without_wage.clone(),
        },
        venn: out.report.venn,
        correlations: out.correlations.clone(),
        essential_summary: out.essential_summary,
    };

    let (echo, hashes) = (&out.config_echo, &out.input_hashes);
    let mut files = vec![
        OutputFile {
            path: "industry_shocks.csv".into(),
            bytes: report::industry_shocks_csv(&industry_rows),
        },
        OutputFile {
            path: "occupation_shocks.csv".into(),
            bytes: report::occupation_shocks_csv(&occupation_rows),
        },
        OutputFile {
            path: "aggregates.json".into(),
            bytes: report::json_bytes(&doc),
        },
        OutputFile {
            path: "quartiles.csv".into(),
            bytes: report::quartiles_csv(out.headline.as_str(), &out.report.quartiles.quartiles),
        },
        OutputFile {
            path: "venn.json".into(),
            bytes: report::venn_json(echo, hashes, &out.report.venn),
        },
        OutputFile {
            path: "diagnostics.json".into(),
            bytes: report::diagnostics_json(echo, hashes, &out.diagnostics),
        },
    ];
    files.extend(report::plot_files(&ind_plot, &occ_plot));
    let manifest = report::manifest(echo, hashes, &files);
    files.push(manifest);
    files
}

fn output_io(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::OutputIo {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `files` under `dir` through a staging directory, so that a
/// failure leaves no new or partially written file behind.
pub fn write_atomic(dir: &Path, files: &[OutputFile]) -> Result<(), PipelineError> {
    let created = !dir.exists();
    fs::create_dir_all(dir).map_err(output_io(dir))?;
    let result = stage_and_commit(dir, files);
    if result.is_err() && created {
        let _ = fs::remove_dir_all(dir);
    }
    result
}

fn stage_and_commit(dir: &Path, files: &[OutputFile]) -> Result<(), PipelineError> {
    let staging = tempfile::Builder::new()
        .prefix(".shockgrid-staging-")
        .tempdir_in(dir)
        .map_err(output_io(dir))?;
    for f in files {
        let path = staging.path().join(&f.path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(output_io(parent))?;
        }
        fs::write(&path, &f.bytes).map_err(output_io(&path))?;
    }
    let mut committed: Vec<PathBuf> = Vec::with_capacity(files.len());
    for f in files {
        let target = dir.join(&f.path);
        let step = (|| {
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::rename(staging.path().join(&f.path), &target)
        })();
        if let Err(source) = step {
            for p in &committed {
                let _ = fs::remove_file(p);
            }
            return Err(PipelineError::OutputIo { path: target, source });
        }
        committed.push(target);
    }
    Ok(())
}

/// Validates, computes and writes all outputs for one configuration.
pub fn run(config: &RunConfig) -> Result<RunOutput, PipelineError> {
    let out = compute(config)?;
    let files = render(&out, config.impute_missing_wages);
    write_atomic(&config.output_path(), &files)?;
    Ok(out)
}
