//! Supply, demand and total shocks for industries and occupations.
//!
//! Four node sets are linked by three bipartite incidences: fine industry
//! codes to analysis industries (`S`), industries to occupations weighted
//! by employment (`M`), and occupations to work activities (`T`). The
//! essential flags `u` live on the fine codes and flow towards occupations;
//! the home-feasibility flags `v` live on activities and flow towards
//! industries.
//!
//! | symbol | meaning | computed as |
//! |---|---|---|
//! | `e` | industry essential score | `S̃ u` |
//! | `y` | occupation remote labor index | `T̃ v` |
//! | `r` | industry remote labor index | `M̃ y` |
//! | `x` | occupation essential score | `M*ᵀ e` |
//! | `ISS`, `OSS` | supply shocks | `-(1 - e)(1 - r)`, `-(1 - x)(1 - y)` |
//! | `IDS`, `ODS` | demand shocks | scenario by prefix, `M*ᵀ IDS` |
//! | `ITS`, `OTS` | total shocks | pointwise `min(supply, demand)` |
//!
//! `S̃`, `T̃`, `M̃` are row-normalized and `M*` is column-normalized. Rows or
//! columns that sum to zero contribute zeros.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::matrix::DenseMatrix;
use crate::scenario::SectorShocks;
use crate::taxonomy::{
    apply_overrides, ClassCode, Concordance, EssentialVector, OverrideAudit, OverrideList, TaxonomyError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("consensus threshold {threshold} outside [1, {raters}]")]
    BadThreshold { threshold: usize, raters: usize },
    #[error("rating for activity {activity} must be 0 or 1, got {value}")]
    NonBinaryRating { activity: String, value: u8 },
    #[error("dimension mismatch: {what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("axis misalignment: {0}")]
    AxisMisalignment(String),
    #[error("industry {0} matches no scenario sector")]
    UnmappedIndustry(String),
    #[error("negative employment {value} for ({industry}, {occupation})")]
    NegativeEmployment {
        industry: String,
        occupation: String,
        value: f64,
    },
    #[error("total employment is zero")]
    EmptyEmployment,
    #[error("activity index {index} out of range for occupation {occupation}")]
    ActivityOutOfRange { occupation: String, index: usize },
    #[error("{0} has the wrong shock kind")]
    WrongKind(&'static str),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;

/// Employment `M`: persons in each (industry, occupation) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EmploymentMatrix {
    industries: Vec<ClassCode>,
    occupations: Vec<ClassCode>,
    counts: DenseMatrix,
}

impl EmploymentMatrix {
    pub fn new(industries: Vec<ClassCode>, occupations: Vec<ClassCode>, counts: DenseMatrix) -> Result<Self> {
        if counts.nrows() != industries.len() {
            return Err(EngineError::DimensionMismatch {
                what: "employment rows",
                expected: industries.len(),
                found: counts.nrows(),
            });
        }
        if counts.ncols() != occupations.len() {
            return Err(EngineError::DimensionMismatch {
                what: "employment columns",
                expected: occupations.len(),
                found: counts.ncols(),
            });
        }
        for (n, ind) in industries.iter().enumerate() {
            for (j, &v) in counts.row(n).iter().enumerate() {
                if v.is_nan() || v < 0.0 {
                    return Err(EngineError::NegativeEmployment {
                        industry: ind.to_string(),
                        occupation: occupations[j].to_string(),
                        value: v,
                    });
                }
            }
        }
        if counts.total() <= 0.0 {
            return Err(EngineError::EmptyEmployment);
        }
        Ok(Self {
            industries,
            occupations,
            counts,
        })
    }

    pub fn industries(&self) -> &[ClassCode] {
        &self.industries
    }

    pub fn occupations(&self) -> &[ClassCode] {
        &self.occupations
    }

    pub fn counts(&self) -> &DenseMatrix {
        &self.counts
    }

    pub fn total(&self) -> f64 {
        self.counts.total()
    }

    pub fn occupation_totals(&self) -> Vec<f64> {
        self.counts.col_sums()
    }

    pub fn industry_totals(&self) -> Vec<f64> {
        self.counts.row_sums()
    }

    /// `L`: each occupation's share of total employment.
    pub fn employment_shares(&self) -> Vec<f64> {
        let total = self.total();
        self.occupation_totals().iter().map(|v| v / total).collect()
    }

    pub fn zero_occupations(&self) -> Vec<ClassCode> {
        zero_entries(&self.occupations, &self.occupation_totals())
    }

    pub fn zero_industries(&self) -> Vec<ClassCode> {
        zero_entries(&self.industries, &self.industry_totals())
    }

    /// Drops occupations with no employment and returns them.
    pub fn drop_zero_occupations(self) -> (Self, Vec<ClassCode>) {
        let totals = self.occupation_totals();
        let keep: Vec<usize> = (0..totals.len()).filter(|&j| totals[j] > 0.0).collect();
        let dropped = zero_entries(&self.occupations, &totals);
        let occupations = keep.iter().map(|&j| self.occupations[j].clone()).collect();
        let counts = self.counts.select_columns(&keep);
        (
            Self {
                industries: self.industries,
                occupations,
                counts,
            },
            dropped,
        )
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.industries.clone(),
            self.occupations.clone(),
            self.counts.scaled(factor),
        )
    }
}

fn zero_entries(codes: &[ClassCode], totals: &[f64]) -> Vec<ClassCode> {
    codes
        .iter()
        .zip(totals)
        .filter(|(_, &t)| t <= 0.0)
        .map(|(c, _)| c.clone())
        .collect()
}

/// Occupation-activity incidence `T`, stored as sorted activity indices
/// per occupation.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityMap {
    occupations: Vec<ClassCode>,
    activities: Vec<String>,
    links: Vec<Vec<usize>>,
}

impl ActivityMap {
    pub fn new(occupations: Vec<ClassCode>, activities: Vec<String>, mut links: Vec<Vec<usize>>) -> Result<Self> {
        if links.len() != occupations.len() {
            return Err(EngineError::DimensionMismatch {
                what: "activity links",
                expected: occupations.len(),
                found: links.len(),
            });
        }
        for (occ, list) in occupations.iter().zip(links.iter_mut()) {
            if let Some(&index) = list.iter().find(|&&i| i >= activities.len()) {
                return Err(EngineError::ActivityOutOfRange {
                    occupation: occ.to_string(),
                    index,
                });
            }
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            occupations,
            activities,
            links,
        })
    }

    pub fn occupations(&self) -> &[ClassCode] {
        &self.occupations
    }

    pub fn activities(&self) -> &[String] {
        &self.activities
    }

    pub fn links(&self) -> &[Vec<usize>] {
        &self.links
    }

    pub fn incidence(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.occupations.len(), self.activities.len());
        for (j, list) in self.links.iter().enumerate() {
            for &i in list {
                t.set(j, i, 1.0);
            }
        }
        t
    }

    /// Reorders and restricts the occupation axis to `occupations`, which
    /// must all be present.
    pub fn select_occupations(&self, occupations: &[ClassCode]) -> Result<Self> {
        let mut links = Vec::with_capacity(occupations.len());
        for occ in occupations {
            let j = self
                .occupations
                .iter()
                .position(|o| o == occ)
                .ok_or_else(|| EngineError::AxisMisalignment(format!("occupation {occ} has no activities")))?;
            links.push(self.links[j].clone());
        }
        Ok(Self {
            occupations: occupations.to_vec(),
            activities: self.activities.clone(),
            links,
        })
    }
}

/// Home-feasibility flags `v` over activities.
#[derive(Debug, Clone, PartialEq)]
pub struct RemotabilityVector {
    pub activities: Vec<String>,
    pub remote: Vec<bool>,
}

impl RemotabilityVector {
    pub fn as_f64(&self) -> Vec<f64> {
        self.remote.iter().map(|&b| f64::from(u8::from(b))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShockKind {
    EssentialScore,
    RemoteLaborIndex,
    Supply,
    Demand,
    Total,
    TotalHealth,
}

/// Per-entity values of one kind, stored as fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockVector {
    pub entities: Vec<ClassCode>,
    pub kind: ShockKind,
    pub values: Vec<f64>,
}

impl ShockVector {
    pub fn new(entities: Vec<ClassCode>, kind: ShockKind, values: Vec<f64>) -> Result<Self> {
        if entities.len() != values.len() {
            return Err(EngineError::DimensionMismatch {
                what: "shock values",
                expected: entities.len(),
                found: values.len(),
            });
        }
        Ok(Self { entities, kind, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn aligned_with(&self, codes: &[ClassCode]) -> bool {
        self.entities == codes
    }
}

fn require_aligned(a: &[ClassCode], b: &[ClassCode], what: &str) -> Result<()> {
    if a.len() != b.len() {
        return Err(EngineError::AxisMisalignment(format!(
            "{what}: {} vs {} entities",
            a.len(),
            b.len()
        )));
    }
    if let Some((x, y)) = a.iter().zip(b).find(|(x, y)| x != y) {
        return Err(EngineError::AxisMisalignment(format!("{what}: {x} vs {y}")));
    }
    Ok(())
}

fn require_kind(v: &ShockVector, kinds: &[ShockKind], what: &'static str) -> Result<()> {
    if kinds.contains(&v.kind) {
        Ok(())
    } else {
        Err(EngineError::WrongKind(what))
    }
}

/// Consensus home-feasibility: an activity is remote when at least
/// `threshold` raters marked it so.
pub fn rate_consensus(activities: &[String], ratings: &[Vec<u8>], threshold: usize) -> Result<RemotabilityVector> {
    if ratings.len() != activities.len() {
        return Err(EngineError::DimensionMismatch {
            what: "rating rows",
            expected: activities.len(),
            found: ratings.len(),
        });
    }
    let raters = ratings.first().map_or(0, Vec::len);
    if raters == 0 || threshold < 1 || threshold > raters {
        return Err(EngineError::BadThreshold { threshold, raters });
    }
    let mut remote = Vec::with_capacity(ratings.len());
    for (activity, row) in activities.iter().zip(ratings) {
        if row.len() != raters {
            return Err(EngineError::DimensionMismatch {
                what: "raters per activity",
                expected: raters,
                found: row.len(),
            });
        }
        if let Some(&value) = row.iter().find(|&&r| r > 1) {
            return Err(EngineError::NonBinaryRating {
                activity: activity.clone(),
                value,
            });
        }
        let votes: usize = row.iter().map(|&r| usize::from(r)).sum();
        remote.push(votes >= threshold);
    }
    Ok(RemotabilityVector {
        activities: activities.to_vec(),
        remote,
    })
}

/// Removes occupations with fewer than `min_activities` linked activities.
pub fn filter_occupations(map: &ActivityMap, min_activities: usize) -> (ActivityMap, Vec<ClassCode>) {
    let mut kept = ActivityMap {
        occupations: Vec::new(),
        activities: map.activities.clone(),
        links: Vec::new(),
    };
    let mut excluded = Vec::new();
    for (occ, list) in map.occupations.iter().zip(&map.links) {
        if list.len() >= min_activities {
            kept.occupations.push(occ.clone());
            kept.links.push(list.clone());
        } else {
            excluded.push(occ.clone());
        }
    }
    (kept, excluded)
}

/// `e = S̃ u`. Industries without linked fine codes score 0.
pub fn essential_score_industries(s: &Concordance, u: &EssentialVector) -> Result<ShockVector> {
    if u.values.len() != s.cols().len() {
        return Err(EngineError::DimensionMismatch {
            what: "essential vector",
            expected: s.cols().len(),
            found: u.values.len(),
        });
    }
    require_aligned(s.cols(), &u.codes, "fine codes")?;
    ShockVector::new(
        s.rows().to_vec(),
        ShockKind::EssentialScore,
        s.incidence().row_means(&u.values),
    )
}

/// `y = T̃ v`.
pub fn rli_occupations(t: &ActivityMap, v: &RemotabilityVector) -> Result<ShockVector> {
    if v.remote.len() != t.activities.len() {
        return Err(EngineError::DimensionMismatch {
            what: "remotability vector",
            expected: t.activities.len(),
            found: v.remote.len(),
        });
    }
    if v.activities != t.activities {
        return Err(EngineError::AxisMisalignment(
            "activity ids differ between activity map and ratings".into(),
        ));
    }
    ShockVector::new(
        t.occupations.clone(),
        ShockKind::RemoteLaborIndex,
        t.incidence().row_means(&v.as_f64()),
    )
}

/// `r = M̃ T̃ v`. Industries without employment get 0.
pub fn rli_industries(m: &EmploymentMatrix, t: &ActivityMap, v: &RemotabilityVector) -> Result<ShockVector> {
    require_aligned(&m.occupations, &t.occupations, "employment vs activity occupations")?;
    let y = rli_occupations(t, v)?;
    rli_industries_from(m, &y)
}

/// `r = M̃ y` for an already computed occupation RLI.
pub fn rli_industries_from(m: &EmploymentMatrix, y: &ShockVector) -> Result<ShockVector> {
    require_kind(y, &[ShockKind::RemoteLaborIndex], "occupation RLI")?;
    require_aligned(&m.occupations, &y.entities, "employment vs RLI occupations")?;
    ShockVector::new(
        m.industries.clone(),
        ShockKind::RemoteLaborIndex,
        m.counts.row_means(&y.values),
    )
}

fn supply_shock(essential: &ShockVector, remote: &ShockVector) -> Result<ShockVector> {
    require_kind(essential, &[ShockKind::EssentialScore], "essential score")?;
    require_kind(remote, &[ShockKind::RemoteLaborIndex], "remote labor index")?;
    require_aligned(&essential.entities, &remote.entities, "essential vs RLI")?;
    let values = essential
        .values
        .iter()
        .zip(&remote.values)
        .map(|(e, r)| -(1.0 - e) * (1.0 - r))
        .collect();
    ShockVector::new(essential.entities.clone(), ShockKind::Supply, values)
}

/// `ISS_n = -(1 - e_n)(1 - r_n)`.
pub fn supply_shock_industries(e: &ShockVector, r: &ShockVector) -> Result<ShockVector> {
    supply_shock(e, r)
}

/// `x = M*ᵀ e`. Occupations without employment get 0.
pub fn essential_score_occupations(m: &EmploymentMatrix, e: &ShockVector) -> Result<ShockVector> {
    require_kind(e, &[ShockKind::EssentialScore], "industry essential score")?;
    project_to_occupations(m, e, ShockKind::EssentialScore)
}

/// `OSS_j = -(1 - x_j)(1 - y_j)`.
pub fn supply_shock_occupations(x: &ShockVector, y: &ShockVector) -> Result<ShockVector> {
    supply_shock(x, y)
}

fn project_to_occupations(m: &EmploymentMatrix, industry_values: &ShockVector, kind: ShockKind) -> Result<ShockVector> {
    require_aligned(
        &m.industries,
        &industry_values.entities,
        "employment vs industry vector",
    )?;
    ShockVector::new(m.occupations.clone(), kind, m.counts.col_means(&industry_values.values))
}

/// `IDS_n`: the shock of the scenario sector whose code is the longest
/// prefix of the industry's digits.
pub fn demand_shock_industries(scenario: &SectorShocks, industries: &[ClassCode]) -> Result<ShockVector> {
    let values = industries
        .iter()
        .map(|c| {
            scenario
                .resolve(c.digits())
                .ok_or_else(|| EngineError::UnmappedIndustry(c.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    ShockVector::new(industries.to_vec(), ShockKind::Demand, values)
}

/// `ODS = M*ᵀ IDS`.
pub fn demand_shock_occupations(m: &EmploymentMatrix, ids: &ShockVector) -> Result<ShockVector> {
    require_kind(ids, &[ShockKind::Demand], "industry demand shock")?;
    project_to_occupations(m, ids, ShockKind::Demand)
}

fn check_pair(supply: &ShockVector, demand: &ShockVector) -> Result<()> {
    require_kind(supply, &[ShockKind::Supply], "supply shock")?;
    require_kind(demand, &[ShockKind::Demand], "demand shock")?;
    require_aligned(&supply.entities, &demand.entities, "supply vs demand")
}

/// `min(supply, demand)` pointwise, for industries or occupations.
pub fn total_shock(supply: &ShockVector, demand: &ShockVector) -> Result<ShockVector> {
    check_pair(supply, demand)?;
    let values = supply
        .values
        .iter()
        .zip(&demand.values)
        .map(|(s, d)| s.min(*d))
        .collect();
    ShockVector::new(supply.entities.clone(), ShockKind::Total, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Industry,
    Occupation,
}

/// Total shock when positive demand can be met. Industries with rising
/// demand take the demand shock; occupations with net rising demand take
/// demand plus supply shock.
pub fn total_shock_health(supply: &ShockVector, demand: &ShockVector, level: Level) -> Result<ShockVector> {
    check_pair(supply, demand)?;
    let values = supply
        .values
        .iter()
        .zip(&demand.values)
        .map(|(&s, &d)| match level {
            _ if d <= 0.0 => s.min(d),
            Level::Industry => d,
            Level::Occupation => d + s,
        })
        .collect();
    ShockVector::new(supply.entities.clone(), ShockKind::TotalHealth, values)
}

/// Everything the shock computation needs, on aligned axes: the
/// concordance rows must equal the employment industries.
#[derive(Debug, Clone, Copy)]
pub struct ShockInputs<'a> {
    pub concordance: &'a Concordance,
    pub essential: &'a EssentialVector,
    pub overrides: Option<&'a OverrideList>,
    pub employment: &'a EmploymentMatrix,
    pub activities: &'a ActivityMap,
    pub remotability: &'a RemotabilityVector,
    pub scenario: &'a SectorShocks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndustryShocks {
    pub e: ShockVector,
    pub r: ShockVector,
    pub iss: ShockVector,
    pub ids: ShockVector,
    pub its: ShockVector,
    pub its_health: ShockVector,
    /// Industries with no employed occupations: `r` is not observed.
    pub without_employment: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupationShocks {
    pub x: ShockVector,
    pub y: ShockVector,
    pub oss: ShockVector,
    pub ods: ShockVector,
    pub ots: ShockVector,
    pub ots_health: ShockVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockSet {
    pub industries: IndustryShocks,
    pub occupations: OccupationShocks,
    pub override_audit: Vec<OverrideAudit>,
}

/// Runs every shock computation.
pub fn compute_shocks(inputs: &ShockInputs<'_>) -> Result<ShockSet> {
    let m = inputs.employment;
    require_aligned(
        inputs.concordance.rows(),
        m.industries(),
        "concordance vs employment industries",
    )?;

    let mut e = essential_score_industries(inputs.concordance, inputs.essential)?;
    let mut override_audit = Vec::new();
    if let Some(list) = inputs.overrides {
        let (values, audit) = apply_overrides(&e.entities, &e.values, list)?;
        e.values = values;
        override_audit = audit;
    }
    let y = rli_occupations(inputs.activities, inputs.remotability)?;
    require_aligned(m.occupations(), &y.entities, "employment vs activity occupations")?;
    let r = rli_industries_from(m, &y)?;
    let x = essential_score_occupations(m, &e)?;
    let iss = supply_shock_industries(&e, &r)?;
    let oss = supply_shock_occupations(&x, &y)?;
    let ids = demand_shock_industries(inputs.scenario, m.industries())?;
    let ods = demand_shock_occupations(m, &ids)?;
    let its = total_shock(&iss, &ids)?;
    let ots = total_shock(&oss, &ods)?;
    let its_health = total_shock_health(&iss, &ids, Level::Industry)?;
    let ots_health = total_shock_health(&oss, &ods, Level::Occupation)?;
    let without_employment = m
        .industry_totals()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t <= 0.0)
        .map(|(n, _)| n)
        .collect();
    Ok(ShockSet {
        industries: IndustryShocks {
            e,
            r,
            iss,
            ids,
            its,
            its_health,
            without_employment,
        },
        occupations: OccupationShocks {
            x,
            y,
            oss,
            ods,
            ots,
            ots_health,
        },
        override_audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{build_concordance, parse_code, EssentialList, Scheme};
    use proptest::prelude::*;

    fn naics(d: &str) -> ClassCode {
        parse_code(Scheme::Naics, d).unwrap()
    }

    fn soc(d: &str) -> ClassCode {
        parse_code(Scheme::Soc, d).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
    }

    struct Toy {
        s: Concordance,
        u: EssentialVector,
        m: EmploymentMatrix,
        t: ActivityMap,
        v: RemotabilityVector,
    }

    /// Two industries, three occupations, four activities, four fine codes.
    fn toy() -> Toy {
        let rows = vec![naics("3251"), naics("6211")];
        let fine = vec![naics("325120"), naics("325130"), naics("621111"), naics("621210")];
        let xw: Vec<_> = [(0, 0), (0, 1), (1, 2), (1, 3)]
            .iter()
            .map(|&(r, c)| (rows[r].clone(), fine[c].clone()))
            .collect();
        let s = build_concordance(&rows, &fine, &xw).unwrap();
        let u = EssentialList::new(vec![(naics("325120"), 1), (naics("325130"), 0), (naics("62"), 1)])
            .unwrap()
            .align(s.cols());
        let occs = vec![soc("13-2011"), soc("13-2041"), soc("47-2011")];
        let m = EmploymentMatrix::new(
            rows,
            occs.clone(),
            DenseMatrix::from_rows(&[vec![10.0, 0.0, 30.0], vec![0.0, 20.0, 20.0]]).unwrap(),
        )
        .unwrap();
        let acts: Vec<String> = ["A1", "A2", "A3", "A4"].iter().map(|s| s.to_string()).collect();
        let t = ActivityMap::new(occs, acts.clone(), vec![vec![0, 1], vec![0, 2], vec![1, 3]]).unwrap();
        let v = RemotabilityVector {
            activities: acts,
            remote: vec![true, false, true, false],
        };
        Toy { s, u, m, t, v }
    }

    #[test]
    fn consensus_thresholds() {
        let acts: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let ratings = vec![vec![1, 1, 1, 0], vec![1, 1, 0, 0], vec![0, 0, 0, 0]];
        let v3 = rate_consensus(&acts, &ratings, 3).unwrap();
        assert_eq!(v3.remote, vec![true, false, false]);
        let v2 = rate_consensus(&acts, &ratings, 2).unwrap();
        assert_eq!(v2.remote, vec![true, true, false]);
        assert!(!rate_consensus(&acts, &ratings, 1).unwrap().remote[2]);
        assert!(matches!(
            rate_consensus(&acts, &ratings, 0),
            Err(EngineError::BadThreshold { .. })
        ));
        assert!(matches!(
            rate_consensus(&acts, &ratings, 5),
            Err(EngineError::BadThreshold { .. })
        ));
        let bad = vec![vec![1, 2, 0, 0], vec![0; 4], vec![0; 4]];
        assert!(matches!(
            rate_consensus(&acts, &bad, 2),
            Err(EngineError::NonBinaryRating { .. })
        ));
    }

    #[test]
    fn occupation_filter() {
        let occs = vec![soc("11-1011"), soc("11-1021")];
        let acts: Vec<String> = (0..6).map(|i| format!("a{i}")).collect();
        let map = ActivityMap::new(occs.clone(), acts, vec![vec![0, 1, 2, 3], vec![0, 1, 2, 3, 4]]).unwrap();
        let (kept, excluded) = filter_occupations(&map, 5);
        assert_eq!(kept.occupations(), &occs[1..]);
        assert_eq!(excluded, vec![occs[0].clone()]);
        let (kept, excluded) = filter_occupations(&map, 1);
        assert_eq!(kept.occupations().len(), 2);
        assert!(excluded.is_empty());
        let toy = toy();
        assert_eq!(filter_occupations(&toy.t, 1).1, vec![]);
    }

    #[test]
    fn toy_essential_scores() {
        let toy = toy();
        let e = essential_score_industries(&toy.s, &toy.u).unwrap();
        assert!(close(&e.values, &[0.5, 1.0]));
        let x = essential_score_occupations(&toy.m, &e).unwrap();
        assert!(close(&x.values, &[0.5, 1.0, 0.7]));
    }

    #[test]
    fn toy_rli() {
        let toy = toy();
        let y = rli_occupations(&toy.t, &toy.v).unwrap();
        assert!(close(&y.values, &[0.5, 1.0, 0.0]));
        let r = rli_industries(&toy.m, &toy.t, &toy.v).unwrap();
        assert!(close(&r.values, &[0.125, 0.5]));
        let all_remote = RemotabilityVector {
            remote: vec![true; 4],
            ..toy.v.clone()
        };
        assert!(close(&rli_occupations(&toy.t, &all_remote).unwrap().values, &[1.0; 3]));
        let none = RemotabilityVector {
            remote: vec![false; 4],
            ..toy.v.clone()
        };
        assert!(close(&rli_industries(&toy.m, &toy.t, &none).unwrap().values, &[0.0; 2]));
    }

    #[test]
    fn toy_supply_shocks() {
        let toy = toy();
        let e = essential_score_industries(&toy.s, &toy.u).unwrap();
        let r = rli_industries(&toy.m, &toy.t, &toy.v).unwrap();
        let iss = supply_shock_industries(&e, &r).unwrap();
        assert!(close(&iss.values, &[-0.4375, 0.0]));
        let x = essential_score_occupations(&toy.m, &e).unwrap();
        let y = rli_occupations(&toy.t, &toy.v).unwrap();
        let oss = supply_shock_occupations(&x, &y).unwrap();
        assert!(close(&oss.values, &[-0.25, 0.0, -0.3]));
    }

    #[test]
    fn supply_shock_corner_cases() {
        let codes = vec![naics("11"), naics("21")];
        let e = ShockVector::new(codes.clone(), ShockKind::EssentialScore, vec![1.0, 0.0]).unwrap();
        let r = ShockVector::new(codes, ShockKind::RemoteLaborIndex, vec![0.3, 0.0]).unwrap();
        let iss = supply_shock_industries(&e, &r).unwrap();
        assert_eq!(iss.values, vec![0.0, -1.0]);
        assert!(matches!(
            supply_shock_industries(&r, &e),
            Err(EngineError::WrongKind(_))
        ));
    }

    #[test]
    fn demand_shocks() {
        let toy = toy();
        let scenario = SectorShocks::from_pairs([("32", -0.10), ("62", 0.15)]);
        let ids = demand_shock_industries(&scenario, toy.m.industries()).unwrap();
        assert!(close(&ids.values, &[-0.10, 0.15]));
        let ods = demand_shock_occupations(&toy.m, &ids).unwrap();
        assert!(close(&ods.values, &[-0.10, 0.15, 0.0]));
        let cbo = crate::scenario::bundled("cbo_severe").unwrap().sector_shocks().unwrap();
        let inds = vec![naics("7225"), naics("6211"), naics("2211")];
        let ids = demand_shock_industries(&cbo, &inds).unwrap();
        assert_eq!(ids.values, vec![-0.80, 0.15, 0.0]);
        let unmapped = SectorShocks::from_pairs([("11", -0.1)]);
        assert!(matches!(
            demand_shock_industries(&unmapped, &inds),
            Err(EngineError::UnmappedIndustry(_))
        ));
    }

    #[test]
    fn total_shocks() {
        let codes = vec![naics("3251"), naics("6211"), naics("7225")];
        let s = ShockVector::new(codes.clone(), ShockKind::Supply, vec![-0.4375, 0.0, -0.2]).unwrap();
        let d = ShockVector::new(codes.clone(), ShockKind::Demand, vec![-0.10, 0.15, -0.2]).unwrap();
        assert_eq!(total_shock(&s, &d).unwrap().values, vec![-0.4375, 0.0, -0.2]);
        let ih = total_shock_health(&s, &d, Level::Industry).unwrap();
        assert_eq!(ih.values, vec![-0.4375, 0.15, -0.2]);
        let s2 = ShockVector::new(codes.clone(), ShockKind::Supply, vec![0.0, -0.05, -0.3]).unwrap();
        let d2 = ShockVector::new(codes.clone(), ShockKind::Demand, vec![0.15, 0.15, -0.1]).unwrap();
        let oh = total_shock_health(&s2, &d2, Level::Occupation).unwrap();
        assert!(close(&oh.values, &[0.15, 0.1, -0.3]));
        let neg = ShockVector::new(codes.clone(), ShockKind::Demand, vec![-0.1, 0.0, -0.5]).unwrap();
        assert_eq!(
            total_shock_health(&s2, &neg, Level::Occupation).unwrap().values,
            total_shock(&s2, &neg).unwrap().values
        );
        let short = ShockVector::new(codes[..2].to_vec(), ShockKind::Demand, vec![0.0, 0.0]).unwrap();
        assert!(matches!(total_shock(&s, &short), Err(EngineError::AxisMisalignment(_))));
    }

    #[test]
    fn axis_checks() {
        let toy = toy();
        let other = ActivityMap::new(
            vec![soc("11-1011"), soc("13-2041"), soc("47-2011")],
            toy.t.activities().to_vec(),
            vec![vec![0], vec![1], vec![2]],
        )
        .unwrap();
        assert!(matches!(
            rli_industries(&toy.m, &other, &toy.v),
            Err(EngineError::AxisMisalignment(_))
        ));
        let short_v = RemotabilityVector {
            activities: vec!["A1".into()],
            remote: vec![true],
        };
        assert!(matches!(
            rli_occupations(&toy.t, &short_v),
            Err(EngineError::DimensionMismatch { .. })
        ));
        let short_u = EssentialVector {
            codes: vec![naics("325120")],
            values: vec![1.0],
            uncovered: vec![],
            unmatched_entries: vec![],
        };
        assert!(matches!(
            essential_score_industries(&toy.s, &short_u),
            Err(EngineError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn employment_validation_and_drops() {
        let inds = vec![naics("11"), naics("21")];
        let occs = vec![soc("11-1011"), soc("11-1021")];
        let neg = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            EmploymentMatrix::new(inds.clone(), occs.clone(), neg),
            Err(EngineError::NegativeEmployment { .. })
        ));
        let zero = DenseMatrix::zeros(2, 2);
        assert!(matches!(
            EmploymentMatrix::new(inds.clone(), occs.clone(), zero),
            Err(EngineError::EmptyEmployment)
        ));
        let m = EmploymentMatrix::new(
            inds.clone(),
            occs.clone(),
            DenseMatrix::from_rows(&[vec![5.0, 0.0], vec![0.0, 0.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(m.zero_occupations(), vec![occs[1].clone()]);
        assert_eq!(m.zero_industries(), vec![inds[1].clone()]);
        let (m, dropped) = m.drop_zero_occupations();
        assert_eq!(m.occupations(), &occs[..1]);
        assert_eq!(dropped, vec![occs[1].clone()]);
    }

    #[test]
    fn full_pipeline_on_toy() {
        let toy = toy();
        let scenario = SectorShocks::from_pairs([("32", -0.10), ("62", 0.15)]);
        let set = compute_shocks(&ShockInputs {
            concordance: &toy.s,
            essential: &toy.u,
            overrides: None,
            employment: &toy.m,
            activities: &toy.t,
            remotability: &toy.v,
            scenario: &scenario,
        })
        .unwrap();
        let ind = &set.industries;
        assert!(close(&ind.its.values, &[-0.4375, 0.0]));
        assert!(close(&ind.its_health.values, &[-0.4375, 0.15]));
        let occ = &set.occupations;
        assert!(close(&occ.ots.values, &[-0.25, 0.0, -0.3]));
        assert!(close(&occ.ots_health.values, &[-0.25, 0.15, -0.3]));
        assert!(ind.without_employment.is_empty());
    }

    fn random_instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..6, 1usize..8).prop_flat_map(|(n, j)| {
            (
                prop::collection::vec(prop::collection::vec(0.0f64..50.0, j), n),
                prop::collection::vec(0.0f64..=1.0, n),
                prop::collection::vec(0.0f64..=1.0, j),
                prop::collection::vec(-0.8f64..=0.2, n),
            )
        })
    }

    fn build(counts: &[Vec<f64>]) -> Option<EmploymentMatrix> {
        let inds = (0..counts.len()).map(|i| naics(&format!("3{i}"))).collect();
        let occs = (0..counts[0].len()).map(|j| soc(&format!("11-10{j:02}"))).collect();
        EmploymentMatrix::new(inds, occs, DenseMatrix::from_rows(counts)?).ok()
    }

    proptest! {
        #[test]
        fn bounds_and_dominance((counts, e, y, ids) in random_instance()) {
            let Some(m) = build(&counts) else { return Ok(()) };
            let e = ShockVector::new(m.industries().to_vec(), ShockKind::EssentialScore, e).unwrap();
            let y = ShockVector::new(m.occupations().to_vec(), ShockKind::RemoteLaborIndex, y).unwrap();
            let ids = ShockVector::new(m.industries().to_vec(), ShockKind::Demand, ids).unwrap();
            let r = rli_industries_from(&m, &y).unwrap();
            let x = essential_score_occupations(&m, &e).unwrap();
            for v in r.values.iter().chain(&x.values) {
                prop_assert!((0.0..=1.0 + 1e-12).contains(v));
            }
            let iss = supply_shock_industries(&e, &r).unwrap();
            let oss = supply_shock_occupations(&x, &y).unwrap();
            for v in iss.values.iter().chain(&oss.values) {
                prop_assert!((-1.0..=0.0).contains(v));
            }
            for (n, &ev) in e.values.iter().enumerate() {
                if ev == 1.0 { prop_assert_eq!(iss.values[n], 0.0); }
            }
            let ods = demand_shock_occupations(&m, &ids).unwrap();
            let ots = total_shock(&oss, &ods).unwrap();
            let otsh = total_shock_health(&oss, &ods, Level::Occupation).unwrap();
            for j in 0..ots.len() {
                let (s, d, t) = (oss.values[j], ods.values[j], ots.values[j]);
                prop_assert!(t <= 0.0);
                prop_assert_eq!(t.abs(), s.abs().max(d.min(0.0).abs()));
                prop_assert!(t.abs() <= s.abs() + d.min(0.0).abs());
                prop_assert!(otsh.values[j] >= t);
            }
            let its = total_shock(&iss, &ids).unwrap();
            let itsh = total_shock_health(&iss, &ids, Level::Industry).unwrap();
            for n in 0..its.len() {
                prop_assert!(itsh.values[n] >= its.values[n]);
            }
        }

        #[test]
        fn employment_scale_invariance((counts, e, y, ids) in random_instance(), k in 0.01f64..1000.0) {
            let Some(m) = build(&counts) else { return Ok(()) };
            let mk = m.scaled(k).unwrap();
            let e = ShockVector::new(m.industries().to_vec(), ShockKind::EssentialScore, e).unwrap();
            let y = ShockVector::new(m.occupations().to_vec(), ShockKind::RemoteLaborIndex, y).unwrap();
            let ids = ShockVector::new(m.industries().to_vec(), ShockKind::Demand, ids).unwrap();
            let pairs = [
                (essential_score_occupations(&m, &e).unwrap(), essential_score_occupations(&mk, &e).unwrap()),
                (rli_industries_from(&m, &y).unwrap(), rli_industries_from(&mk, &y).unwrap()),
                (demand_shock_occupations(&m, &ids).unwrap(), demand_shock_occupations(&mk, &ids).unwrap()),
            ];
            for (a, b) in &pairs {
                for (p, q) in a.values.iter().zip(&b.values) {
                    prop_assert!((p - q).abs() <= 1e-12);
                }
            }
        }
    }
}
