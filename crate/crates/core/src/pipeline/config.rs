//! Run configuration.
//!
//! The config file is flat `key = value` text. Blank lines and lines
//! starting with `#` are ignored, as is anything after a ` #` on a value
//! line. Relative paths resolve against the directory holding the file.
//!
//! | key | required | default |
//! |---|---|---|
//! | `crosswalk`, `essential_list`, `activity_ratings`, `activity_map`, `employment`, `wages`, `value_added` | yes | |
//! | `scenario` (bundled name or CSV path) | yes | |
//! | `overrides`, `scenario_map` | no | none |
//! | `consensus_threshold` | no | 3 |
//! | `min_activities` | no | 5 |
//! | `health_growth`, `impute_missing_wages` | no | false |
//! | `output_dir` | no | `output` |
//! | `industry_scheme`, `fine_scheme` | no | NAICS |
//! | `occupation_scheme` | no | SOC |
//! | `sweep_scenarios`, `sweep_health_growth`, `sweep_consensus_thresholds` | no | the single-run value |

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::scenario::BUNDLED;
use crate::taxonomy::Scheme;

use super::PipelineError;

pub const DEFAULT_CONSENSUS_THRESHOLD: usize = 3;
pub const DEFAULT_MIN_ACTIVITIES: usize = 5;

const PATH_KEYS: [&str; 10] = [
    "crosswalk",
    "essential_list",
    "overrides",
    "activity_ratings",
    "activity_map",
    "employment",
    "wages",
    "value_added",
    "scenario_map",
    "output_dir",
];

const OTHER_KEYS: [&str; 10] = [
    "scenario",
    "consensus_threshold",
    "min_activities",
    "health_growth",
    "impute_missing_wages",
    "industry_scheme",
    "fine_scheme",
    "occupation_scheme",
    "sweep_scenarios",
    "sweep_health_growth",
];

const SWEEP_THRESHOLDS: &str = "sweep_consensus_thresholds";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Directory that relative paths resolve against.
    pub base_dir: PathBuf,
    pub crosswalk: PathBuf,
    pub essential_list: PathBuf,
    pub overrides: Option<PathBuf>,
    pub activity_ratings: PathBuf,
    pub activity_map: PathBuf,
    pub employment: PathBuf,
    pub wages: PathBuf,
    pub value_added: PathBuf,
    /// Bundled scenario name, or a path to a scenario CSV.
    pub scenario: String,
    pub scenario_map: Option<PathBuf>,
    pub consensus_threshold: usize,
    pub min_activities: usize,
    pub health_growth: bool,
    pub impute_missing_wages: bool,
    pub output_dir: PathBuf,
    pub industry_scheme: Scheme,
    pub fine_scheme: Scheme,
    pub occupation_scheme: Scheme,
    pub sweep_scenarios: Vec<String>,
    pub sweep_health_growth: Vec<bool>,
    pub sweep_consensus_thresholds: Vec<usize>,
}

fn config_error(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

fn parse_bool(key: &str, value: &str) -> Result<bool, PipelineError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(config_error(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize, PipelineError> {
    value
        .parse()
        .map_err(|_| config_error(format!("{key}: expected a non-negative integer, got {value:?}")))
}

fn parse_scheme(key: &str, value: &str) -> Result<Scheme, PipelineError> {
    value
        .parse()
        .map_err(|_| config_error(format!("{key}: unknown scheme {value:?}")))
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::InputIo {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let line = line.split(" #").next().unwrap_or(line);
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            if !PATH_KEYS.contains(&key.as_str()) && !OTHER_KEYS.contains(&key.as_str()) && key != SWEEP_THRESHOLDS {
                return Err(config_error(format!("line {}: unknown key {key:?}", lineno + 1)));
            }
            if kv.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(config_error(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
        }

        let required = |key: &str| -> Result<String, PipelineError> {
            kv.get(key)
                .filter(|v| !v.is_empty())
                .cloned()
                .ok_or_else(|| config_error(format!("missing required key {key:?}")))
        };
        let optional = |key: &str| kv.get(key).filter(|v| !v.is_empty()).cloned();

        let consensus_threshold = optional("consensus_threshold")
            .map(|v| parse_usize("consensus_threshold", &v))
            .transpose()?
            .unwrap_or(DEFAULT_CONSENSUS_THRESHOLD);
        let health_growth = optional("health_growth")
            .map(|v| parse_bool("health_growth", &v))
            .transpose()?
            .unwrap_or(false);
        let scenario = required("scenario")?;

        let sweep_scenarios = optional("sweep_scenarios")
            .map(|v| split_list(&v).map(str::to_string).collect())
            .unwrap_or_default();
        let sweep_health_growth = optional("sweep_health_growth")
            .map(|v| split_list(&v).map(|b| parse_bool("sweep_health_growth", b)).collect())
            .transpose()?
            .unwrap_or_default();
        let sweep_consensus_thresholds = optional(SWEEP_THRESHOLDS)
            .map(|v| split_list(&v).map(|t| parse_usize(SWEEP_THRESHOLDS, t)).collect())
            .transpose()?
            .unwrap_or_default();

        let config = Self {
            base_dir: base_dir.to_path_buf(),
            crosswalk: required("crosswalk")?.into(),
            essential_list: required("essential_list")?.into(),
            overrides: optional("overrides").map(Into::into),
            activity_ratings: required("activity_ratings")?.into(),
            activity_map: required("activity_map")?.into(),
            employment: required("employment")?.into(),
            wages: required("wages")?.into(),
            value_added: required("value_added")?.into(),
            scenario,
            scenario_map: optional("scenario_map").map(Into::into),
            consensus_threshold,
            min_activities: optional("min_activities")
                .map(|v| parse_usize("min_activities", &v))
                .transpose()?
                .unwrap_or(DEFAULT_MIN_ACTIVITIES),
            health_growth,
            impute_missing_wages: optional("impute_missing_wages")
                .map(|v| parse_bool("impute_missing_wages", &v))
                .transpose()?
                .unwrap_or(false),
            output_dir: optional("output_dir").unwrap_or_else(|| "output".into()).into(),
            industry_scheme: optional("industry_scheme")
                .map(|v| parse_scheme("industry_scheme", &v))
                .transpose()?
                .unwrap_or(Scheme::Naics),
            fine_scheme: optional("fine_scheme")
                .map(|v| parse_scheme("fine_scheme", &v))
                .transpose()?
                .unwrap_or(Scheme::Naics),
            occupation_scheme: optional("occupation_scheme")
                .map(|v| parse_scheme("occupation_scheme", &v))
                .transpose()?
                .unwrap_or(Scheme::Soc),
            sweep_scenarios,
            sweep_health_growth,
            sweep_consensus_thresholds,
        };
        config.check_ranges()?;
        Ok(config)
    }

    pub fn check_ranges(&self) -> Result<(), PipelineError> {
        if self.min_activities < 1 {
            return Err(config_error("min_activities must be at least 1"));
        }
        let thresholds = std::iter::once(&self.consensus_threshold).chain(&self.sweep_consensus_thresholds);
        if thresholds.clone().any(|&t| t < 1) {
            return Err(config_error("consensus thresholds must be at least 1"));
        }
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    /// The scenario argument for loading: bundled names pass through,
    /// anything else is treated as a path relative to the config.
    pub fn scenario_source(&self) -> String {
        scenario_source(self, &self.scenario)
    }

    /// Named input files, in a fixed order. The scenario is included when
    /// it is a file.
    pub fn input_files(&self) -> Vec<(&'static str, PathBuf)> {
        let mut files = vec![
            ("crosswalk", self.resolve(&self.crosswalk)),
            ("essential_list", self.resolve(&self.essential_list)),
            ("activity_ratings", self.resolve(&self.activity_ratings)),
            ("activity_map", self.resolve(&self.activity_map)),
            ("employment", self.resolve(&self.employment)),
            ("wages", self.resolve(&self.wages)),
            ("value_added", self.resolve(&self.value_added)),
        ];
        if let Some(p) = &self.overrides {
            files.push(("overrides", self.resolve(p)));
        }
        if let Some(p) = &self.scenario_map {
            files.push(("scenario_map", self.resolve(p)));
        }
        files
    }

    /// Resolved settings as written, with defaults filled in.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let path = |p: &Path| p.to_string_lossy().replace('\\', "/");
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            out.insert(k.to_string(), v);
        };
        put("crosswalk", path(&self.crosswalk));
        put("essential_list", path(&self.essential_list));
        put("overrides", self.overrides.as_deref().map(path).unwrap_or_default());
        put("activity_ratings", path(&self.activity_ratings));
        put("activity_map", path(&self.activity_map));
        put("employment", path(&self.employment));
        put("wages", path(&self.wages));
        put("value_added", path(&self.value_added));
        put("scenario", self.scenario.clone());
        put(
            "scenario_map",
            self.scenario_map.as_deref().map(path).unwrap_or_default(),
        );
        put("consensus_threshold", self.consensus_threshold.to_string());
        put("min_activities", self.min_activities.to_string());
        put("health_growth", self.health_growth.to_string());
        put("impute_missing_wages", self.impute_missing_wages.to_string());
        put("output_dir", path(&self.output_dir));
        put("industry_scheme", self.industry_scheme.to_string());
        put("fine_scheme", self.fine_scheme.to_string());
        put("occupation_scheme", self.occupation_scheme.to_string());
        put("sweep_scenarios", self.sweep_scenarios.join(","));
        let bools: Vec<String> = self.sweep_health_growth.iter().map(bool::to_string).collect();
        put("sweep_health_growth", bools.join(","));
        let ts: Vec<String> = self.sweep_consensus_thresholds.iter().map(usize::to_string).collect();
        put(SWEEP_THRESHOLDS, ts.join(","));
        out
    }

    /// One config per (scenario, health growth, threshold) cell of the
    /// sweep grid, scenario-major. Unset axes take the single-run value.
    pub fn sweep_variants(&self) -> Vec<RunConfig> {
        let scenarios = if self.sweep_scenarios.is_empty() {
            vec![self.scenario.clone()]
        } else {
            self.sweep_scenarios.clone()
        };
        let growth = if self.sweep_health_growth.is_empty() {
            vec![self.health_growth]
        } else {
            self.sweep_health_growth.clone()
        };
        let thresholds = if self.sweep_consensus_thresholds.is_empty() {
            vec![self.consensus_threshold]
        } else {
            self.sweep_consensus_thresholds.clone()
        };
        let mut out = Vec::with_capacity(scenarios.len() * growth.len() * thresholds.len());
        for s in &scenarios {
            for &g in &growth {
                for &t in &thresholds {
                    out.push(RunConfig {
                        scenario: s.clone(),
                        health_growth: g,
                        consensus_threshold: t,
                        sweep_scenarios: Vec::new(),
                        sweep_health_growth: Vec::new(),
                        sweep_consensus_thresholds: Vec::new(),
                        ..self.clone()
                    });
                }
            }
        }
        out
    }
}

pub(crate) fn scenario_source(config: &RunConfig, scenario: &str) -> String {
    if BUNDLED.contains(&scenario) {
        scenario.to_string()
    } else {
        config.resolve(Path::new(scenario)).to_string_lossy().into_owned()
    }
}
