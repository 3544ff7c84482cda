//! Sector-level demand scenarios and the epidemiological side-calculator.
//!
//! A scenario is a list of `(sector, shock_pct, postponed, source)` rows.
//! NAICS-coded scenarios name sector code prefixes directly. Scenarios
//! expressed in other categories (consumption groups, ISIC industries)
//! need a category map from NAICS prefixes to their categories before
//! they can drive industry demand shocks; shocks derived that way are
//! flagged as approximate.

pub mod epidemic;

use std::fs;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

pub use epidemic::{attack_rate_estimate, labor_loss_morbidity, labor_loss_mortality, EpidemicParams};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0:?}; bundled scenarios are {list}", list = BUNDLED.join(", "))]
    UnknownScenario(String),
    #[error("malformed scenario {name}: {reason}")]
    MalformedScenario { name: String, reason: String },
    #[error("scenario {name} does not cover NAICS sectors {missing:?}")]
    IncompleteCoverage { name: String, missing: Vec<String> },
    #[error("scenario {0} uses categories and needs a NAICS category map")]
    MissingCategoryMap(String),
    #[error("bad count: {0}")]
    BadCount(String),
    #[error("bad share: {0}")]
    BadShare(String),
    #[error("bad epidemic parameters: {0}")]
    BadParams(String),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type Result<T, E = ScenarioError> = std::result::Result<T, E>;

/// The 2-digit NAICS sectors.
pub const NAICS_SECTORS: [&str; 24] = [
    "11", "21", "22", "23", "31", "32", "33", "42", "44", "45", "48", "49", "51", "52", "53", "54", "55", "56", "61",
    "62", "71", "72", "81", "92",
];

pub const BUNDLED: [&str; 6] = [
    "cbo_severe",
    "cbo_mild",
    "keogh_brown",
    "oecd_isic",
    "oecd_coicop",
    "muellbauer",
];

fn bundled_source(name: &str) -> Option<(&'static str, Option<&'static str>)> {
    Some(match name {
        "cbo_severe" => (include_str!("data/cbo_severe.csv"), None),
        "cbo_mild" => (include_str!("data/cbo_mild.csv"), None),
        "keogh_brown" => (
            include_str!("data/keogh_brown.csv"),
            Some(include_str!("data/keogh_brown_map.csv")),
        ),
        "oecd_isic" => (
            include_str!("data/oecd_isic.csv"),
            Some(include_str!("data/oecd_isic_map.csv")),
        ),
        "oecd_coicop" => (
            include_str!("data/oecd_coicop.csv"),
            Some(include_str!("data/oecd_coicop_map.csv")),
        ),
        "muellbauer" => (
            include_str!("data/muellbauer.csv"),
            Some(include_str!("data/muellbauer_map.csv")),
        ),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioEntry {
    pub sector: String,
    /// Signed percentage, -80 means an 80% fall in demand.
    pub shock_pct: f64,
    /// Whether the lost demand is only postponed. Carried as metadata.
    pub postponed: Option<bool>,
    pub source: String,
}

impl ScenarioEntry {
    pub fn shock(&self) -> f64 {
        self.shock_pct / 100.0
    }
}

/// Maps NAICS code prefixes onto scenario categories.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CategoryMap {
    pub pairs: Vec<(String, String)>,
}

impl CategoryMap {
    pub fn from_csv(text: &str) -> Result<Self> {
        let malformed = |reason: String| ScenarioError::MalformedScenario {
            name: "category map".into(),
            reason,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| malformed(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| malformed(format!("missing column {name}")))
        };
        let (p, c) = (col("naics_prefix")?, col("category")?);
        let mut pairs = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| malformed(e.to_string()))?;
            let prefix = rec.get(p).unwrap_or_default().to_string();
            if prefix.len() < 2 || !prefix.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed(format!("bad NAICS prefix {prefix:?}")));
            }
            if pairs.iter().any(|(q, _)| *q == prefix) {
                return Err(malformed(format!("duplicate prefix {prefix}")));
            }
            pairs.push((prefix, rec.get(c).unwrap_or_default().to_string()));
        }
        Ok(Self { pairs })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_csv(&read(path)?)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandScenario {
    pub name: String,
    pub entries: Vec<ScenarioEntry>,
    pub category_map: Option<CategoryMap>,
}

fn is_naics_prefix(s: &str) -> bool {
    (2..=6).contains(&s.len()) && s.bytes().all(|b| b.is_ascii_digit())
}

fn parse_postponed(raw: &str) -> Option<Option<bool>> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "" | "na" => Some(None),
        "yes" | "true" | "1" => Some(Some(true)),
        "no" | "false" | "0" => Some(Some(false)),
        _ => None,
    }
}

fn format_postponed(p: Option<bool>) -> &'static str {
    match p {
        None => "NA",
        Some(true) => "yes",
        Some(false) => "no",
    }
}

impl DemandScenario {
    /// Parses the scenario CSV schema `sector_code, shock_pct, postponed, source`.
    pub fn from_csv(name: &str, text: &str) -> Result<Self> {
        let malformed = |reason: String| ScenarioError::MalformedScenario {
            name: name.to_string(),
            reason,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| malformed(e.to_string()))?.clone();
        let col = |h: &str| {
            headers
                .iter()
                .position(|x| x == h)
                .ok_or_else(|| malformed(format!("missing column {h}")))
        };
        let (ci, si) = (col("sector_code")?, col("shock_pct")?);
        let pi = headers.iter().position(|x| x == "postponed");
        let oi = headers.iter().position(|x| x == "source");
        let mut entries: Vec<ScenarioEntry> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| malformed(e.to_string()))?;
            let row = line + 2;
            let sector = rec.get(ci).unwrap_or_default().to_string();
            if sector.is_empty() {
                return Err(malformed(format!("row {row}: empty sector_code")));
            }
            let raw = rec.get(si).unwrap_or_default();
            let shock_pct: f64 = raw
                .parse()
                .map_err(|_| malformed(format!("row {row}: shock_pct {raw:?} is not a number")))?;
            if !(-100.0..=100.0).contains(&shock_pct) {
                return Err(malformed(format!(
                    "row {row}: shock_pct {shock_pct} outside [-100, 100]"
                )));
            }
            let postponed = match pi.and_then(|i| rec.get(i)) {
                None => None,
                Some(p) => parse_postponed(p).ok_or_else(|| malformed(format!("row {row}: postponed {p:?}")))?,
            };
            if entries.iter().any(|e| e.sector == sector) {
                return Err(malformed(format!("row {row}: duplicate sector {sector:?}")));
            }
            entries.push(ScenarioEntry {
                sector,
                shock_pct,
                postponed,
                source: oi.and_then(|i| rec.get(i)).unwrap_or_default().to_string(),
            });
        }
        if entries.is_empty() {
            return Err(malformed("no rows".into()));
        }
        Ok(Self {
            name: name.to_string(),
            entries,
            category_map: None,
        })
    }

    /// Canonical CSV form: fixed header, rows in scenario order.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["sector_code", "shock_pct", "postponed", "source"])
            .expect("in-memory write");
        for e in &self.entries {
            w.write_record([
                e.sector.as_str(),
                &e.shock_pct.to_string(),
                format_postponed(e.postponed),
                &e.source,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn with_category_map(mut self, map: CategoryMap) -> Self {
        self.category_map = Some(map);
        self
    }

    pub fn is_naics_coded(&self) -> bool {
        self.entries.iter().all(|e| is_naics_prefix(&e.sector))
    }

    pub fn entry(&self, sector: &str) -> Option<&ScenarioEntry> {
        self.entries.iter().find(|e| e.sector == sector)
    }

    /// NAICS sectors with no scenario entry at or above them.
    pub fn coverage_gaps(&self) -> Result<Vec<String>> {
        Ok(self.sector_shocks()?.gaps)
    }

    /// Resolves the scenario to NAICS prefix shocks. Sectors the scenario
    /// leaves uncovered get a zero shock and are listed in `gaps`.
    pub fn sector_shocks(&self) -> Result<SectorShocks> {
        let (mut entries, approximate) = if self.is_naics_coded() {
            let e: Vec<_> = self.entries.iter().map(|e| (e.sector.clone(), e.shock())).collect();
            (e, false)
        } else {
            let map = self
                .category_map
                .as_ref()
                .ok_or_else(|| ScenarioError::MissingCategoryMap(self.name.clone()))?;
            let mut e = Vec::with_capacity(map.pairs.len());
            for (prefix, category) in &map.pairs {
                let entry = self.entry(category).ok_or_else(|| ScenarioError::MalformedScenario {
                    name: self.name.clone(),
                    reason: format!("category map names unknown category {category:?}"),
                })?;
                e.push((prefix.clone(), entry.shock()));
            }
            (e, true)
        };
        let mut gaps = Vec::new();
        for sector in NAICS_SECTORS {
            if !entries.iter().any(|(p, _)| sector.starts_with(p.as_str())) {
                gaps.push(sector.to_string());
                entries.push((sector.to_string(), 0.0));
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(SectorShocks {
            scenario: self.name.clone(),
            entries,
            approximate,
            gaps,
        })
    }
}

/// Demand shocks (fractions) keyed by NAICS code prefix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorShocks {
    pub scenario: String,
    pub entries: Vec<(String, f64)>,
    pub approximate: bool,
    pub gaps: Vec<String>,
}

impl SectorShocks {
    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, f64)>) -> Self {
        let mut entries: Vec<(String, f64)> = pairs.into_iter().map(|(p, s)| (p.into(), s)).collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Self {
            scenario: "custom".into(),
            entries,
            approximate: false,
            gaps: Vec::new(),
        }
    }

    /// The shock of the longest prefix of `digits`.
    pub fn resolve(&self, digits: &str) -> Option<f64> {
        self.entries
            .iter()
            .filter(|(p, _)| digits.starts_with(p.as_str()))
            .max_by_key(|(p, _)| p.len())
            .map(|&(_, s)| s)
    }
}

/// Loads a bundled scenario by name.
pub fn bundled(name: &str) -> Result<DemandScenario> {
    let (csv, map) = bundled_source(name).ok_or_else(|| ScenarioError::UnknownScenario(name.into()))?;
    let mut scenario = DemandScenario::from_csv(name, csv)?;
    if let Some(map) = map {
        scenario = scenario.with_category_map(CategoryMap::from_csv(map)?);
    }
    if name.starts_with("cbo_") {
        let gaps = scenario.coverage_gaps()?;
        if !gaps.is_empty() {
            return Err(ScenarioError::IncompleteCoverage {
                name: name.into(),
                missing: gaps,
            });
        }
    }
    Ok(scenario)
}

/// The bundled category map of a scenario, as CSV text.
pub fn bundled_category_map(name: &str) -> Option<&'static str> {
    bundled_source(name).and_then(|(_, m)| m)
}

/// Loads a bundled scenario by name, or a scenario CSV from a path. A
/// category map named `<stem>_map.csv` next to the file is picked up
/// automatically.
pub fn load_scenario(name_or_path: &str) -> Result<DemandScenario> {
    if bundled_source(name_or_path).is_some() {
        return bundled(name_or_path);
    }
    let path = Path::new(name_or_path);
    if !path.is_file() {
        return Err(ScenarioError::UnknownScenario(name_or_path.into()));
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    let mut scenario = DemandScenario::from_csv(&stem, &read(path)?)?;
    let sibling = path.with_file_name(format!("{stem}_map.csv"));
    if !scenario.is_naics_coded() && sibling.is_file() {
        scenario = scenario.with_category_map(CategoryMap::load(&sibling)?);
    }
    Ok(scenario)
}
