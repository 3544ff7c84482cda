//! Output rendering. Everything is rendered to bytes in memory; writing
//! happens in one step afterwards. Floats are fixed at 6 decimals in CSV
//! files and rounded to 6 decimals in JSON, with negative zero printed as
//! zero.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use crate::aggregation::{AggregateRow, Quartile, VennReport};
use crate::stats::Correlation;
use crate::taxonomy::ClassCode;

use super::model::{Diagnostics, ScenarioInfo};

pub const NA: &str = "NA";

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: Vec<u8>,
}

pub fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), fmt6)
}

fn pct(x: Option<f64>) -> String {
    fmt_opt(x.map(|v| v * 100.0))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round6(n.as_f64().unwrap_or(0.0));
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON with rounded floats and a trailing newline.
pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_value(value).expect("serializable report");
    round_floats(&mut v);
    let mut out = serde_json::to_vec_pretty(&v).expect("serializable value");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndustryRow {
    pub code: ClassCode,
    pub e: f64,
    /// `None` for industries without employment.
    pub r: Option<f64>,
    pub iss: f64,
    pub ids: f64,
    pub its: f64,
    pub its_health: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupationRow {
    pub code: ClassCode,
    pub x: f64,
    pub y: f64,
    pub oss: f64,
    pub ods: f64,
    pub ots: f64,
    pub ots_health: f64,
}

pub fn industry_shocks_csv(rows: &[IndustryRow]) -> Vec<u8> {
    let header = [
        "code",
        "e",
        "r",
        "ISS",
        "IDS",
        "ITS",
        "ITS_h",
        "ISS_pct",
        "IDS_pct",
        "ITS_pct",
        "ITS_h_pct",
    ];
    csv_bytes(
        &header,
        rows.iter().map(|r| {
            let shocks = [r.iss, r.ids, r.its, r.its_health];
            let mut out = vec![r.code.to_string(), fmt6(r.e), fmt_opt(r.r)];
            out.extend(shocks.iter().map(|&v| fmt6(v)));
            out.extend(shocks.iter().map(|&v| pct(Some(v))));
            out
        }),
    )
}

pub fn occupation_shocks_csv(rows: &[OccupationRow]) -> Vec<u8> {
    let header = [
        "code",
        "x",
        "y",
        "OSS",
        "ODS",
        "OTS",
        "OTS_h",
        "OSS_pct",
        "ODS_pct",
        "OTS_pct",
        "OTS_h_pct",
    ];
    csv_bytes(
        &header,
        rows.iter().map(|r| {
            let shocks = [r.oss, r.ods, r.ots, r.ots_health];
            let mut out = vec![r.code.to_string(), fmt6(r.x), fmt6(r.y)];
            out.extend(shocks.iter().map(|&v| fmt6(v)));
            out.extend(shocks.iter().map(|&v| pct(Some(v))));
            out
        }),
    )
}

pub fn quartiles_csv(variant: &str, quartiles: &[Quartile]) -> Vec<u8> {
    let header = [
        "variant",
        "quartile",
        "occupations",
        "employment_share",
        "wage_bill_share",
        "min_mean_wage",
        "max_mean_wage",
        "employment_change",
        "employment_change_pct",
        "lost_wage_share",
        "lost_wage_share_pct",
    ];
    csv_bytes(
        &header,
        quartiles.iter().map(|q| {
            vec![
                variant.to_string(),
                format!("q{}", q.quartile),
                q.occupations.to_string(),
                fmt6(q.employment_share),
                fmt6(q.wage_bill_share),
                fmt_opt(q.min_mean_wage),
                fmt_opt(q.max_mean_wage),
                fmt_opt(q.employment_change),
                pct(q.employment_change),
                fmt_opt(q.lost_wage_share),
                pct(q.lost_wage_share),
            ]
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Headline {
    Total,
    TotalHealth,
}

impl Headline {
    pub fn from_flag(health_growth: bool) -> Self {
        if health_growth {
            Headline::TotalHealth
        } else {
            Headline::Total
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Headline::Total => "total",
            Headline::TotalHealth => "total_health",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateTable {
    pub supply: AggregateRow,
    pub demand: AggregateRow,
    pub total: AggregateRow,
    pub total_health: AggregateRow,
}

impl AggregateTable {
    pub fn row(&self, name: Headline) -> &AggregateRow {
        match name {
            Headline::Total => &self.total,
            Headline::TotalHealth => &self.total_health,
        }
    }

    /// The twelve cells in (variant, measure) order.
    pub fn cells(&self) -> [(&'static str, f64); 12] {
        let values: Vec<f64> = [self.supply, self.demand, self.total, self.total_health]
            .iter()
            .flat_map(|r| [r.employment, r.wages, r.value_added])
            .collect();
        std::array::from_fn(|i| (CELL_NAMES[i], values[i]))
    }
}

pub const CELL_NAMES: [&str; 12] = [
    "supply_employment",
    "supply_wages",
    "supply_value_added",
    "demand_employment",
    "demand_wages",
    "demand_value_added",
    "total_employment",
    "total_wages",
    "total_value_added",
    "total_health_employment",
    "total_health_wages",
    "total_health_value_added",
];

/// A correlation as reported. The p-value is kept in scientific notation
/// since it is routinely far below the 6-decimal rounding of other fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CorrelationEntry {
    Ok { rho: f64, p_value: String, n: usize },
    Unavailable { error: String },
}

impl CorrelationEntry {
    pub fn from_result<E: std::fmt::Display>(r: Result<Correlation, E>) -> Self {
        match r {
            Ok(c) => CorrelationEntry::Ok {
                rho: c.rho,
                p_value: format!("{:.3e}", c.p_value),
                n: c.n,
            },
            Err(e) => CorrelationEntry::Unavailable { error: e.to_string() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EssentialSummary {
    /// Share of fine codes flagged essential.
    pub fine_essential_fraction: f64,
    /// Unweighted mean industry essential score.
    pub mean_industry_score: f64,
    /// Employment-weighted mean industry essential score.
    pub labor_share_essential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuartileSection {
    pub variant: Headline,
    pub rows: Vec<Quartile>,
    pub excluded_without_wage: Vec<ClassCode>,
}

/// Contents of `aggregates.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregatesDoc {
    pub config: BTreeMap<String, String>,
    pub input_hashes: BTreeMap<String, String>,
    pub scenario: ScenarioInfo,
    pub headline: Headline,
    pub aggregates: AggregateTable,
    pub quartiles: QuartileSection,
    pub venn: VennReport,
    pub correlations: BTreeMap<String, CorrelationEntry>,
    pub essential_summary: EssentialSummary,
}

#[derive(Serialize)]
struct Echoed<'a, T: Serialize> {
    config: &'a BTreeMap<String, String>,
    input_hashes: &'a BTreeMap<String, String>,
    #[serde(flatten)]
    body: &'a T,
}

/// Wraps `body` with the config echo and input hashes.
pub fn echoed_json<T: Serialize>(
    config: &BTreeMap<String, String>,
    input_hashes: &BTreeMap<String, String>,
    body: &T,
) -> Vec<u8> {
    json_bytes(&Echoed {
        config,
        input_hashes,
        body,
    })
}

#[derive(Serialize)]
struct VennBody<'a> {
    venn: &'a VennReport,
    non_essential_only: f64,
    cannot_remote_only: f64,
}

pub fn venn_json(
    config: &BTreeMap<String, String>,
    input_hashes: &BTreeMap<String, String>,
    venn: &VennReport,
) -> Vec<u8> {
    echoed_json(
        config,
        input_hashes,
        &VennBody {
            venn,
            non_essential_only: venn.non_essential_only(),
            cannot_remote_only: venn.cannot_remote_only(),
        },
    )
}

#[derive(Serialize)]
struct DiagnosticsBody<'a> {
    diagnostics: &'a Diagnostics,
}

pub fn diagnostics_json(
    config: &BTreeMap<String, String>,
    input_hashes: &BTreeMap<String, String>,
    diagnostics: &Diagnostics,
) -> Vec<u8> {
    echoed_json(config, input_hashes, &DiagnosticsBody { diagnostics })
}

/// Plot data columns for one occupation.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationPlotRow {
    pub code: ClassCode,
    pub employment: f64,
    /// Median wage, imputed when requested and missing.
    pub median_wage: Option<f64>,
    pub wage_available: bool,
    pub exposure: Option<f64>,
    pub x: f64,
    pub y: f64,
    pub oss: f64,
    pub ods: f64,
    pub ots: f64,
    pub ots_health: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndustryPlotRow {
    pub code: ClassCode,
    pub employment: f64,
    pub value_added_share: f64,
    /// Employment-weighted exposure over occupations that report one.
    pub exposure: Option<f64>,
    pub e: f64,
    pub r: Option<f64>,
    pub iss: f64,
    pub ids: f64,
    pub its: f64,
    pub its_health: f64,
}

pub fn plot_files(industries: &[IndustryPlotRow], occupations: &[OccupationPlotRow]) -> Vec<OutputFile> {
    let flag = |b: bool| if b { "1" } else { "0" }.to_string();
    vec![
        OutputFile {
            path: "plotdata/industry_supply_demand.csv".into(),
            bytes: csv_bytes(
                &[
                    "code",
                    "employment",
                    "value_added_share",
                    "exposure",
                    "ISS",
                    "IDS",
                    "ITS",
                    "ITS_h",
                ],
                industries.iter().map(|r| {
                    vec![
                        r.code.to_string(),
                        fmt6(r.employment),
                        fmt6(r.value_added_share),
                        fmt_opt(r.exposure),
                        fmt6(r.iss),
                        fmt6(r.ids),
                        fmt6(r.its),
                        fmt6(r.its_health),
                    ]
                }),
            ),
        },
        OutputFile {
            path: "plotdata/industry_essential_rli.csv".into(),
            bytes: csv_bytes(
                &["code", "employment", "e", "r"],
                industries
                    .iter()
                    .map(|r| vec![r.code.to_string(), fmt6(r.employment), fmt6(r.e), fmt_opt(r.r)]),
            ),
        },
        OutputFile {
            path: "plotdata/occupation_supply_demand.csv".into(),
            bytes: csv_bytes(
                &[
                    "code",
                    "employment",
                    "median_wage",
                    "wage_available",
                    "exposure",
                    "OSS",
                    "ODS",
                    "OTS",
                    "OTS_h",
                ],
                occupations.iter().map(|r| {
                    vec![
                        r.code.to_string(),
                        fmt6(r.employment),
                        fmt_opt(r.median_wage),
                        flag(r.wage_available),
                        fmt_opt(r.exposure),
                        fmt6(r.oss),
                        fmt6(r.ods),
                        fmt6(r.ots),
                        fmt6(r.ots_health),
                    ]
                }),
            ),
        },
        OutputFile {
            path: "plotdata/occupation_essential_rli.csv".into(),
            bytes: csv_bytes(
                &["code", "employment", "median_wage", "wage_available", "x", "y"],
                occupations.iter().map(|r| {
                    vec![
                        r.code.to_string(),
                        fmt6(r.employment),
                        fmt_opt(r.median_wage),
                        flag(r.wage_available),
                        fmt6(r.x),
                        fmt6(r.y),
                    ]
                }),
            ),
        },
    ]
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a BTreeMap<String, String>,
    input_hashes: &'a BTreeMap<String, String>,
    outputs: BTreeMap<&'a str, String>,
}

/// `run_manifest.json`: config echo, input hashes and the hash of every
/// other output file.
pub fn manifest(
    config: &BTreeMap<String, String>,
    input_hashes: &BTreeMap<String, String>,
    files: &[OutputFile],
) -> OutputFile {
    let outputs = files
        .iter()
        .map(|f| (f.path.as_str(), super::ingest::sha256_hex(&f.bytes)))
        .collect();
    OutputFile {
        path: "run_manifest.json".into(),
        bytes: json_bytes(&Manifest {
            config,
            input_hashes,
            outputs,
        }),
    }
}
