//! Cross-file assembly: builds aligned axes and matrices from the raw
//! inputs and records everything that had to be dropped.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::aggregation::{ValueAddedRow, ValueAddedTable, WageTable};
use crate::engine::{filter_occupations, rate_consensus, ActivityMap, EmploymentMatrix, RemotabilityVector};
use crate::matrix::DenseMatrix;
use crate::scenario::{load_scenario, CategoryMap, DemandScenario, SectorShocks};
use crate::taxonomy::{build_concordance, ClassCode, Concordance, EssentialList, EssentialVector, OverrideList};

use super::config::{scenario_source, RunConfig};
use super::ingest::RawInputs;
use super::PipelineError;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DroppedOccupations {
    /// Linked to fewer than `min_activities` rated activities.
    pub fewer_activities: Vec<ClassCode>,
    /// Zero total employment after matching.
    pub zero_employment: Vec<ClassCode>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct UnmappedCodes {
    /// Crosswalk industry codes matching no analysis industry.
    pub crosswalk_industries: Vec<ClassCode>,
    /// Essential-list entries matching no fine code.
    pub essential_entries: Vec<ClassCode>,
    /// Fine codes with no essential-list entry; treated as non-essential.
    pub fine_codes_without_flag: Vec<ClassCode>,
    pub override_industries: Vec<ClassCode>,
    /// Activity ids in the activity map with no ratings.
    pub activities: Vec<String>,
    /// Employment occupations absent from the activity map.
    pub employment_occupations: Vec<ClassCode>,
    /// Wage rows for occupations outside the analysis.
    pub wage_occupations: Vec<ClassCode>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Coverage {
    /// Retained employment over all employment in the employment file.
    pub employment: f64,
    /// Retained occupations over distinct employment-file occupations.
    pub occupations: f64,
    /// Value added of industries with employment over GDP.
    pub value_added: f64,
    /// Crosswalk rows that resolved.
    pub crosswalk: f64,
    /// Fine codes with an essential flag.
    pub essential_flags: f64,
    /// Retained employment in occupations with a mean wage.
    pub mean_wage_employment: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub approximate: bool,
    pub gaps: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub industries: usize,
    pub fine_codes: usize,
    pub occupations: usize,
    pub activities: usize,
    pub dropped_occupations: DroppedOccupations,
    pub zero_link_industries: Vec<ClassCode>,
    pub industries_without_employment: Vec<ClassCode>,
    pub industries_without_value_added: Vec<ClassCode>,
    pub unmapped_codes: UnmappedCodes,
    pub missing_mean_wage: Vec<ClassCode>,
    pub missing_median_wage: Vec<ClassCode>,
    pub missing_exposure: Vec<ClassCode>,
    pub duplicate_employment_cells: usize,
    pub coverage: Coverage,
    pub scenario: ScenarioInfo,
}

/// Aligned inputs for one run.
#[derive(Debug, Clone)]
pub struct Model {
    pub concordance: Concordance,
    pub essential: EssentialVector,
    pub overrides: OverrideList,
    pub employment: EmploymentMatrix,
    pub activities: ActivityMap,
    pub remotability: RemotabilityVector,
    pub wages: WageTable,
    pub value_added: ValueAddedTable,
    pub scenario: DemandScenario,
    pub sector_shocks: SectorShocks,
}

fn integrity(msg: impl Into<String>) -> PipelineError {
    PipelineError::Integrity(msg.into())
}

fn ratio(part: f64, whole: f64) -> f64 {
    if whole > 0.0 {
        (part / whole).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Whether `code` equals or contains some code on `axis`.
fn reaches(code: &ClassCode, axis: &[ClassCode]) -> bool {
    axis.iter().any(|c| code.contains(c))
}

pub fn load_config_scenario(config: &RunConfig) -> Result<DemandScenario, PipelineError> {
    let mut scenario = load_scenario(&scenario_source(config, &config.scenario))?;
    if let Some(map) = &config.scenario_map {
        scenario = scenario.with_category_map(CategoryMap::load(&config.resolve(map))?);
    }
    Ok(scenario)
}

/// Builds the aligned model from raw inputs.
pub fn assemble(config: &RunConfig, raw: &RawInputs) -> Result<(Model, Diagnostics), PipelineError> {
    let mut diag = Diagnostics::default();

    // Industry axis: everything with employment or value added.
    let industries: Vec<ClassCode> = raw
        .employment
        .iter()
        .map(|(n, _, _)| n.clone())
        .chain(raw.value_added.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if raw.employment.is_empty() {
        return Err(integrity("employment file has no rows"));
    }

    // Concordance over the fine codes the crosswalk reaches.
    let mut unresolved = BTreeSet::new();
    let kept: Vec<(ClassCode, ClassCode)> = raw
        .crosswalk
        .iter()
        .filter(|(from, _)| {
            let ok = reaches(from, &industries);
            if !ok {
                unresolved.insert(from.clone());
            }
            ok
        })
        .cloned()
        .collect();
    diag.unmapped_codes.crosswalk_industries = unresolved.into_iter().collect();
    let fine: Vec<ClassCode> = kept
        .iter()
        .map(|(_, to)| to.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if fine.is_empty() {
        return Err(integrity("no crosswalk row links to an analysis industry"));
    }
    let concordance = build_concordance(&industries, &fine, &kept)?;
    diag.zero_link_industries = concordance.empty_rows();
    diag.coverage.crosswalk = ratio(kept.len() as f64, raw.crosswalk.len() as f64);

    let essential = EssentialList::new(raw.essential.clone())?.align(concordance.cols());
    diag.unmapped_codes.essential_entries = essential.unmatched_entries.clone();
    diag.unmapped_codes.fine_codes_without_flag = essential.uncovered.clone();
    diag.coverage.essential_flags = ratio((fine.len() - essential.uncovered.len()) as f64, fine.len() as f64);

    let (known, unknown): (Vec<_>, Vec<_>) = raw
        .overrides
        .iter()
        .cloned()
        .partition(|o| industries.contains(&o.code));
    diag.unmapped_codes.override_industries = unknown.into_iter().map(|o| o.code).collect();
    let overrides = OverrideList::new(known)?;

    // Activities and occupations.
    let remotability = rate_consensus(&raw.activity_ids, &raw.ratings, config.consensus_threshold)?;
    let activity_index: BTreeMap<&str, usize> = raw
        .activity_ids
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    let mut links: BTreeMap<ClassCode, BTreeSet<usize>> = BTreeMap::new();
    let mut unrated = BTreeSet::new();
    for (occ, act) in &raw.activity_map {
        let entry = links.entry(occ.clone()).or_default();
        match activity_index.get(act.as_str()) {
            Some(&i) => {
                entry.insert(i);
            }
            None => {
                unrated.insert(act.clone());
            }
        }
    }
    diag.unmapped_codes.activities = unrated.into_iter().collect();
    let (map_occs, map_links): (Vec<_>, Vec<_>) = links
        .into_iter()
        .map(|(o, l)| (o, l.into_iter().collect::<Vec<_>>()))
        .unzip();
    let full_map = ActivityMap::new(map_occs, raw.activity_ids.clone(), map_links)?;
    let (filtered, excluded) = filter_occupations(&full_map, config.min_activities);

    // Employment over the occupations that survive both files.
    let in_map: BTreeSet<&ClassCode> = full_map.occupations().iter().collect();
    let in_filtered: BTreeSet<&ClassCode> = filtered.occupations().iter().collect();
    let emp_occs: BTreeSet<&ClassCode> = raw.employment.iter().map(|(_, j, _)| j).collect();
    diag.unmapped_codes.employment_occupations = emp_occs
        .iter()
        .filter(|j| !in_map.contains(*j))
        .map(|j| (*j).clone())
        .collect();
    diag.dropped_occupations.fewer_activities = excluded;
    let occupations: Vec<ClassCode> = emp_occs
        .iter()
        .filter(|j| in_filtered.contains(*j))
        .map(|j| (*j).clone())
        .collect();
    let occ_index: BTreeMap<&ClassCode, usize> = occupations.iter().enumerate().map(|(j, c)| (c, j)).collect();
    let ind_index: BTreeMap<&ClassCode, usize> = industries.iter().enumerate().map(|(n, c)| (c, n)).collect();
    let mut counts = DenseMatrix::zeros(industries.len(), occupations.len());
    let mut seen_cells = BTreeSet::new();
    let mut file_total = 0.0;
    for (n, j, v) in &raw.employment {
        file_total += v;
        if !seen_cells.insert((n, j)) {
            diag.duplicate_employment_cells += 1;
        }
        if let Some(&jj) = occ_index.get(j) {
            counts.add(ind_index[n], jj, *v);
        }
    }
    if occupations.is_empty() {
        return Err(integrity("no occupation appears in both employment and activity data"));
    }
    if counts.total() <= 0.0 {
        return Err(integrity("retained employment is zero"));
    }
    let (employment, zero) = EmploymentMatrix::new(industries.clone(), occupations, counts)?.drop_zero_occupations();
    diag.dropped_occupations.zero_employment = zero;
    diag.industries_without_employment = employment.zero_industries();
    let activities = filtered.select_occupations(employment.occupations())?;

    // Wages and value added.
    let wages = WageTable::from_employment(&employment, |code| match raw.wages.get(code) {
        Some(w) => (w.mean_wage, w.median_wage, w.exposure),
        None => (None, None, None),
    })?;
    let occ_set: BTreeSet<&ClassCode> = employment.occupations().iter().collect();
    diag.unmapped_codes.wage_occupations = raw.wages.keys().filter(|c| !occ_set.contains(c)).cloned().collect();
    diag.missing_mean_wage = wages.missing_mean_wage();
    diag.missing_median_wage = wages.missing_median_wage();
    diag.missing_exposure = wages
        .rows()
        .iter()
        .filter(|r| r.exposure.is_none())
        .map(|r| r.code.clone())
        .collect();

    let mut va_rows = Vec::with_capacity(industries.len());
    for code in &industries {
        match raw.value_added.get(code) {
            Some(r) => va_rows.push(ValueAddedRow {
                code: code.clone(),
                value_added: r.value_added,
                gross_output: r.gross_output,
            }),
            None => {
                diag.industries_without_value_added.push(code.clone());
                va_rows.push(ValueAddedRow {
                    code: code.clone(),
                    value_added: 0.0,
                    gross_output: None,
                });
            }
        }
    }
    let value_added = ValueAddedTable::new(va_rows).map_err(|e| integrity(e.to_string()))?;

    // Scenario.
    let scenario = load_config_scenario(config)?;
    let sector_shocks = scenario.sector_shocks()?;
    let unmapped: Vec<String> = industries
        .iter()
        .filter(|c| sector_shocks.resolve(c.digits()).is_none())
        .map(ToString::to_string)
        .collect();
    if !unmapped.is_empty() {
        return Err(integrity(format!(
            "industries {unmapped:?} match no sector of scenario {}",
            scenario.name
        )));
    }
    diag.scenario = ScenarioInfo {
        name: scenario.name.clone(),
        approximate: sector_shocks.approximate,
        gaps: sector_shocks.gaps.clone(),
    };

    let retained = employment.total();
    let ind_totals = employment.industry_totals();
    let va_with_emp: f64 = value_added
        .rows()
        .iter()
        .zip(&ind_totals)
        .filter(|(_, &t)| t > 0.0)
        .map(|(r, _)| r.value_added)
        .sum();
    let with_wage: f64 = wages
        .rows()
        .iter()
        .filter(|r| r.mean_wage.is_some())
        .map(|r| r.employment)
        .sum();
    diag.coverage.employment = ratio(retained, file_total);
    diag.coverage.occupations = ratio(employment.occupations().len() as f64, emp_occs.len() as f64);
    diag.coverage.value_added = ratio(va_with_emp, value_added.gdp());
    diag.coverage.mean_wage_employment = ratio(with_wage, retained);
    diag.industries = industries.len();
    diag.fine_codes = fine.len();
    diag.occupations = employment.occupations().len();
    diag.activities = raw.activity_ids.len();

    Ok((
        Model {
            concordance,
            essential,
            overrides,
            employment,
            activities,
            remotability,
            wages,
            value_added,
            scenario,
            sector_shocks,
        },
        diag,
    ))
}
