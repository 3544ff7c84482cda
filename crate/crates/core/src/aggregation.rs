//! Economy-wide totals, wage quartiles and the essential/remote split of
//! the workforce.

use serde::Serialize;
use thiserror::Error;

use crate::engine::{EmploymentMatrix, ShockKind, ShockVector};
use crate::taxonomy::ClassCode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AggregateError {
    #[error("axis misalignment: {0}")]
    AxisMisalignment(String),
    #[error("no occupation has a mean wage")]
    MissingWages,
    #[error("total employment is zero")]
    ZeroEmployment,
    #[error("total value added is zero")]
    ZeroGdp,
    #[error("invalid {what} for {code}: {value}")]
    InvalidValue {
        what: &'static str,
        code: String,
        value: f64,
    },
    #[error("dimension mismatch: {what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

pub type Result<T, E = AggregateError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub struct WageRow {
    pub code: ClassCode,
    pub employment: f64,
    pub mean_wage: Option<f64>,
    pub median_wage: Option<f64>,
    /// Exposure-to-infection index on a 0 to 100 scale.
    pub exposure: Option<f64>,
}

/// Per-occupation employment and wages, in axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct WageTable {
    rows: Vec<WageRow>,
}

impl WageTable {
    pub fn new(rows: Vec<WageRow>) -> Result<Self> {
        for row in &rows {
            let code = || row.code.to_string();
            if !row.employment.is_finite() || row.employment < 0.0 {
                return Err(AggregateError::InvalidValue {
                    what: "employment",
                    code: code(),
                    value: row.employment,
                });
            }
            for (what, wage) in [("mean wage", row.mean_wage), ("median wage", row.median_wage)] {
                if let Some(w) = wage {
                    if !w.is_finite() || w <= 0.0 {
                        return Err(AggregateError::InvalidValue {
                            what,
                            code: code(),
                            value: w,
                        });
                    }
                }
            }
            if let Some(x) = row.exposure {
                if !(0.0..=100.0).contains(&x) {
                    return Err(AggregateError::InvalidValue {
                        what: "exposure",
                        code: code(),
                        value: x,
                    });
                }
            }
        }
        Ok(Self { rows })
    }

    /// Builds a table whose employment column is taken from `M`.
    pub fn from_employment(
        m: &EmploymentMatrix,
        wage_of: impl Fn(&ClassCode) -> (Option<f64>, Option<f64>, Option<f64>),
    ) -> Result<Self> {
        let totals = m.occupation_totals();
        let rows = m
            .occupations()
            .iter()
            .zip(totals)
            .map(|(code, employment)| {
                let (mean_wage, median_wage, exposure) = wage_of(code);
                WageRow {
                    code: code.clone(),
                    employment,
                    mean_wage,
                    median_wage,
                    exposure,
                }
            })
            .collect();
        Self::new(rows)
    }

    pub fn rows(&self) -> &[WageRow] {
        &self.rows
    }

    pub fn codes(&self) -> Vec<ClassCode> {
        self.rows.iter().map(|r| r.code.clone()).collect()
    }

    pub fn total_employment(&self) -> f64 {
        self.rows.iter().map(|r| r.employment).sum()
    }

    /// `L`: employment shares.
    pub fn employment_shares(&self) -> Result<Vec<f64>> {
        let total = self.total_employment();
        if total <= 0.0 {
            return Err(AggregateError::ZeroEmployment);
        }
        Ok(self.rows.iter().map(|r| r.employment / total).collect())
    }

    /// Employment times mean wage; zero where the wage is missing.
    pub fn wage_bill(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.mean_wage.map_or(0.0, |w| w * r.employment))
            .collect()
    }

    /// `w`: wage-bill shares, renormalized over occupations with a wage.
    pub fn wage_bill_shares(&self) -> Result<Vec<f64>> {
        let bill = self.wage_bill();
        let total: f64 = bill.iter().sum();
        if total <= 0.0 {
            return Err(AggregateError::MissingWages);
        }
        Ok(bill.iter().map(|b| b / total).collect())
    }

    pub fn missing_mean_wage(&self) -> Vec<ClassCode> {
        self.rows
            .iter()
            .filter(|r| r.mean_wage.is_none())
            .map(|r| r.code.clone())
            .collect()
    }

    pub fn missing_median_wage(&self) -> Vec<ClassCode> {
        self.rows
            .iter()
            .filter(|r| r.median_wage.is_none())
            .map(|r| r.code.clone())
            .collect()
    }

    /// Mean of the available median wages, used to place occupations
    /// without one on plots.
    pub fn mean_median_wage(&self) -> Option<f64> {
        let present: Vec<f64> = self.rows.iter().filter_map(|r| r.median_wage).collect();
        (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueAddedRow {
    pub code: ClassCode,
    pub value_added: f64,
    pub gross_output: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueAddedTable {
    rows: Vec<ValueAddedRow>,
}

impl ValueAddedTable {
    pub fn new(rows: Vec<ValueAddedRow>) -> Result<Self> {
        for row in &rows {
            if !row.value_added.is_finite() || row.value_added < 0.0 {
                return Err(AggregateError::InvalidValue {
                    what: "value added",
                    code: row.code.to_string(),
                    value: row.value_added,
                });
            }
        }
        let table = Self { rows };
        if table.gdp() <= 0.0 {
            return Err(AggregateError::ZeroGdp);
        }
        Ok(table)
    }

    pub fn rows(&self) -> &[ValueAddedRow] {
        &self.rows
    }

    pub fn codes(&self) -> Vec<ClassCode> {
        self.rows.iter().map(|r| r.code.clone()).collect()
    }

    pub fn gdp(&self) -> f64 {
        self.rows.iter().map(|r| r.value_added).sum()
    }

    /// `Y`: value-added shares of GDP.
    pub fn shares(&self) -> Vec<f64> {
        let gdp = self.gdp();
        self.rows.iter().map(|r| r.value_added / gdp).collect()
    }
}

fn check_axis(shock: &ShockVector, codes: &[ClassCode], what: &str) -> Result<()> {
    if shock.entities.len() != codes.len() {
        return Err(AggregateError::AxisMisalignment(format!(
            "{what}: shock has {} entities, table has {}",
            shock.entities.len(),
            codes.len()
        )));
    }
    match shock.entities.iter().zip(codes).find(|(a, b)| a != b) {
        Some((a, b)) => Err(AggregateError::AxisMisalignment(format!("{what}: {a} vs {b}"))),
        None => Ok(()),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Employment-share weighted occupation shock.
pub fn aggregate_employment(shock: &ShockVector, wages: &WageTable) -> Result<f64> {
    check_axis(shock, &wages.codes(), "employment aggregate")?;
    Ok(dot(&shock.values, &wages.employment_shares()?))
}

/// Wage-bill weighted occupation shock over occupations with a mean wage.
pub fn aggregate_wages(shock: &ShockVector, wages: &WageTable) -> Result<f64> {
    check_axis(shock, &wages.codes(), "wage aggregate")?;
    Ok(dot(&shock.values, &wages.wage_bill_shares()?))
}

/// Value-added weighted industry shock.
pub fn aggregate_value_added(shock: &ShockVector, va: &ValueAddedTable) -> Result<f64> {
    check_axis(shock, &va.codes(), "value-added aggregate")?;
    Ok(dot(&shock.values, &va.shares()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quartile {
    pub quartile: u8,
    pub occupations: usize,
    pub employment: f64,
    pub employment_share: f64,
    pub wage_bill_share: f64,
    pub min_mean_wage: Option<f64>,
    pub max_mean_wage: Option<f64>,
    /// Employment-weighted mean shock within the quartile.
    pub employment_change: Option<f64>,
    /// Quartile's part of the economy-wide wage-bill loss.
    pub lost_wage_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuartileReport {
    pub quartiles: Vec<Quartile>,
    pub excluded_without_wage: Vec<ClassCode>,
}

/// Quartile of an occupation whose cumulative-employment interval has
/// midpoint `m` (a fraction of total employment). Intervals are closed at
/// the top, so a midpoint of exactly 0.25 lands in the first quartile.
pub fn quartile_of_midpoint(m: f64) -> usize {
    ((4.0 * m).ceil() as i64 - 1).clamp(0, 3) as usize
}

/// Splits occupations with a mean wage into employment quartiles ranked by
/// mean wage. Each occupation goes whole to the quartile holding the
/// midpoint of its cumulative-employment interval; ties in wage are
/// ordered by code.
pub fn quartile_breakdown(shock: &ShockVector, wages: &WageTable) -> Result<QuartileReport> {
    check_axis(shock, &wages.codes(), "quartile breakdown")?;
    let mut ranked: Vec<(usize, f64)> = wages
        .rows()
        .iter()
        .enumerate()
        .filter_map(|(j, r)| r.mean_wage.map(|w| (j, w)))
        .collect();
    if ranked.is_empty() {
        return Err(AggregateError::MissingWages);
    }
    ranked.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then_with(|| wages.rows()[a.0].code.cmp(&wages.rows()[b.0].code))
    });

    let rows = wages.rows();
    let covered: f64 = ranked.iter().map(|&(j, _)| rows[j].employment).sum();
    if covered <= 0.0 {
        return Err(AggregateError::ZeroEmployment);
    }
    let bill = wages.wage_bill();
    let total_bill: f64 = bill.iter().sum();
    let total_loss: f64 = ranked.iter().map(|&(j, _)| bill[j] * shock.values[j]).sum();

    #[derive(Default, Clone)]
    struct Acc {
        n: usize,
        emp: f64,
        emp_shock: f64,
        bill: f64,
        bill_shock: f64,
        lo: Option<f64>,
        hi: Option<f64>,
    }
    let mut acc = vec![Acc::default(); 4];
    let mut cum = 0.0;
    for &(j, w) in &ranked {
        let emp = rows[j].employment;
        let q = quartile_of_midpoint((cum + emp / 2.0) / covered);
        cum += emp;
        let a = &mut acc[q];
        a.n += 1;
        a.emp += emp;
        a.emp_shock += emp * shock.values[j];
        a.bill += bill[j];
        a.bill_shock += bill[j] * shock.values[j];
        a.lo = Some(a.lo.map_or(w, |x: f64| x.min(w)));
        a.hi = Some(a.hi.map_or(w, |x: f64| x.max(w)));
    }

    let quartiles = acc
        .into_iter()
        .enumerate()
        .map(|(q, a)| Quartile {
            quartile: q as u8 + 1,
            occupations: a.n,
            employment: a.emp,
            employment_share: a.emp / covered,
            wage_bill_share: if total_bill > 0.0 { a.bill / total_bill } else { 0.0 },
            min_mean_wage: a.lo,
            max_mean_wage: a.hi,
            employment_change: (a.n > 0 && a.emp > 0.0).then(|| a.emp_shock / a.emp),
            lost_wage_share: (a.n > 0 && total_loss != 0.0).then(|| a.bill_shock / total_loss),
        })
        .collect();
    Ok(QuartileReport {
        quartiles,
        excluded_without_wage: wages.missing_mean_wage(),
    })
}

/// Employment split by essential status and remote feasibility. Each
/// worker in cell `(n, j)` counts as non-essential with weight `1 - e_n`
/// and as unable to work remotely with weight `1 - y_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VennReport {
    pub non_essential: f64,
    pub cannot_remote: f64,
    /// Non-essential and unable to work remotely.
    pub intersection: f64,
    pub essential_and_remote: f64,
}

impl VennReport {
    pub fn non_essential_only(&self) -> f64 {
        self.non_essential - self.intersection
    }

    pub fn cannot_remote_only(&self) -> f64 {
        self.cannot_remote - self.intersection
    }

    /// Mass not accounted for by the four disjoint cells; zero up to
    /// rounding.
    pub fn remainder(&self) -> f64 {
        1.0 - self.intersection - self.essential_and_remote - self.non_essential_only() - self.cannot_remote_only()
    }
}

pub fn venn_decomposition(m: &EmploymentMatrix, e: &ShockVector, y: &ShockVector) -> Result<VennReport> {
    if e.kind != ShockKind::EssentialScore || y.kind != ShockKind::RemoteLaborIndex {
        return Err(AggregateError::AxisMisalignment(
            "expected industry essential scores and occupation RLI".into(),
        ));
    }
    check_axis(e, m.industries(), "venn industries")?;
    check_axis(y, m.occupations(), "venn occupations")?;
    let total = m.total();
    if total <= 0.0 {
        return Err(AggregateError::ZeroEmployment);
    }
    let counts = m.counts();
    let mut out = VennReport {
        non_essential: 0.0,
        cannot_remote: 0.0,
        intersection: 0.0,
        essential_and_remote: 0.0,
    };
    for (n, &en) in e.values.iter().enumerate() {
        for (j, &yj) in y.values.iter().enumerate() {
            let w = counts.get(n, j) / total;
            out.non_essential += w * (1.0 - en);
            out.cannot_remote += w * (1.0 - yj);
            out.intersection += w * (1.0 - en) * (1.0 - yj);
            out.essential_and_remote += w * en * yj;
        }
    }
    Ok(out)
}

/// The three aggregates for one shock variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateRow {
    pub employment: f64,
    pub wages: f64,
    pub value_added: f64,
}

impl AggregateRow {
    pub fn compute(
        occupation_shock: &ShockVector,
        industry_shock: &ShockVector,
        wages: &WageTable,
        va: &ValueAddedTable,
    ) -> Result<Self> {
        Ok(Self {
            employment: aggregate_employment(occupation_shock, wages)?,
            wages: aggregate_wages(occupation_shock, wages)?,
            value_added: aggregate_value_added(industry_shock, va)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub supply: AggregateRow,
    pub demand: AggregateRow,
    pub total: AggregateRow,
    pub total_health: AggregateRow,
    pub quartiles: QuartileReport,
    pub venn: VennReport,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;
    use crate::taxonomy::{parse_code, Scheme};
    use proptest::prelude::*;

    fn soc(d: &str) -> ClassCode {
        parse_code(Scheme::Soc, d).unwrap()
    }

    fn naics(d: &str) -> ClassCode {
        parse_code(Scheme::Naics, d).unwrap()
    }

    fn occ_codes(n: usize) -> Vec<ClassCode> {
        (0..n).map(|j| soc(&format!("11-1{j:03}"))).collect()
    }

    fn table(emp: &[f64], wage: &[Option<f64>]) -> WageTable {
        let rows = occ_codes(emp.len())
            .into_iter()
            .zip(emp.iter().zip(wage))
            .map(|(code, (&employment, &mean_wage))| WageRow {
                code,
                employment,
                mean_wage,
                median_wage: mean_wage,
                exposure: None,
            })
            .collect();
        WageTable::new(rows).unwrap()
    }

    fn occ_shock(values: Vec<f64>) -> ShockVector {
        ShockVector::new(occ_codes(values.len()), ShockKind::Total, values).unwrap()
    }

    fn toy_m() -> EmploymentMatrix {
        EmploymentMatrix::new(
            vec![naics("3251"), naics("6211")],
            vec![soc("13-2011"), soc("13-2041"), soc("47-2011")],
            DenseMatrix::from_rows(&[vec![10.0, 0.0, 30.0], vec![0.0, 20.0, 20.0]]).unwrap(),
        )
        .unwrap()
    }

    fn toy_wages() -> WageTable {
        let wages = [40.0, 60.0, 20.0];
        let m = toy_m();
        let codes = m.occupations().to_vec();
        WageTable::from_employment(&m, |c| {
            let j = codes.iter().position(|x| x == c).unwrap();
            (Some(wages[j]), Some(wages[j]), None)
        })
        .unwrap()
    }

    /// Hand computation on the toy economy: L = (10, 20, 50)/80,
    /// wage bill = (400, 1200, 1000), GDP shares = (0.4, 0.6).
    #[test]
    fn toy_aggregates() {
        let m = toy_m();
        let wages = toy_wages();
        let ots = ShockVector::new(m.occupations().to_vec(), ShockKind::Total, vec![-0.25, 0.0, -0.3]).unwrap();
        assert!((aggregate_employment(&ots, &wages).unwrap() + 0.21875).abs() < 1e-15);
        let w = aggregate_wages(&ots, &wages).unwrap();
        assert!((w + 400.0 / 2600.0).abs() < 1e-15);
        assert!((w + 0.15385).abs() < 1e-5);
        let va = ValueAddedTable::new(vec![
            ValueAddedRow {
                code: naics("3251"),
                value_added: 40.0,
                gross_output: None,
            },
            ValueAddedRow {
                code: naics("6211"),
                value_added: 60.0,
                gross_output: None,
            },
        ])
        .unwrap();
        let its = ShockVector::new(va.codes(), ShockKind::Total, vec![-0.4375, 0.0]).unwrap();
        assert!((aggregate_value_added(&its, &va).unwrap() + 0.175).abs() < 1e-15);
        let its_h = ShockVector::new(va.codes(), ShockKind::TotalHealth, vec![-0.4375, 0.15]).unwrap();
        assert!((aggregate_value_added(&its_h, &va).unwrap() + 0.085).abs() < 1e-15);
        let minus_one = ShockVector::new(va.codes(), ShockKind::Total, vec![-1.0, -1.0]).unwrap();
        assert_eq!(aggregate_value_added(&minus_one, &va).unwrap(), -1.0);
        let zero = ShockVector::new(m.occupations().to_vec(), ShockKind::Total, vec![0.0; 3]).unwrap();
        assert_eq!(aggregate_employment(&zero, &wages).unwrap(), 0.0);
    }

    #[test]
    fn toy_venn() {
        let m = toy_m();
        let e = ShockVector::new(m.industries().to_vec(), ShockKind::EssentialScore, vec![0.5, 1.0]).unwrap();
        let y = ShockVector::new(
            m.occupations().to_vec(),
            ShockKind::RemoteLaborIndex,
            vec![0.5, 1.0, 0.0],
        )
        .unwrap();
        let v = venn_decomposition(&m, &e, &y).unwrap();
        // Cell weights 10/80, 30/80, 20/80, 20/80 over (n, j) = (1,1), (1,3), (2,2), (2,3).
        let cells = [(0.125, 0.5, 0.5), (0.375, 0.5, 0.0), (0.25, 1.0, 1.0), (0.25, 1.0, 0.0)];
        let by_hand = |f: &dyn Fn(f64, f64) -> f64| cells.iter().map(|&(w, e, y)| w * f(e, y)).sum::<f64>();
        assert!((v.non_essential - by_hand(&|e, _| 1.0 - e)).abs() < 1e-15);
        assert!((v.cannot_remote - by_hand(&|_, y| 1.0 - y)).abs() < 1e-15);
        assert!((v.intersection - by_hand(&|e, y| (1.0 - e) * (1.0 - y))).abs() < 1e-15);
        assert!((v.essential_and_remote - by_hand(&|e, y| e * y)).abs() < 1e-15);
        assert_eq!(
            (v.non_essential, v.cannot_remote, v.intersection, v.essential_and_remote),
            (0.25, 0.6875, 0.21875, 0.28125)
        );
        assert!(v.remainder().abs() < 1e-15);
        let ones = ShockVector::new(m.industries().to_vec(), ShockKind::EssentialScore, vec![1.0, 1.0]).unwrap();
        assert_eq!(venn_decomposition(&m, &ones, &y).unwrap().intersection, 0.0);
    }

    #[test]
    fn wages_exclude_missing() {
        let wages = table(&[10.0, 10.0, 10.0], &[Some(10.0), None, Some(30.0)]);
        let shares = wages.wage_bill_shares().unwrap();
        assert_eq!(shares, vec![0.25, 0.0, 0.75]);
        let s = occ_shock(vec![-0.2, -0.9, -0.2]);
        assert!((aggregate_wages(&s, &wages).unwrap() + 0.2).abs() < 1e-15);
        assert_eq!(wages.missing_mean_wage().len(), 1);
        let none = table(&[1.0], &[None]);
        assert_eq!(
            aggregate_wages(&occ_shock(vec![0.0]), &none),
            Err(AggregateError::MissingWages)
        );
        assert_eq!(
            quartile_breakdown(&occ_shock(vec![0.0]), &none),
            Err(AggregateError::MissingWages)
        );
    }

    #[test]
    fn invalid_tables() {
        let bad = WageRow {
            code: soc("11-1011"),
            employment: 1.0,
            mean_wage: Some(0.0),
            median_wage: None,
            exposure: None,
        };
        assert!(matches!(
            WageTable::new(vec![bad]),
            Err(AggregateError::InvalidValue { .. })
        ));
        let zero = ValueAddedRow {
            code: naics("11"),
            value_added: 0.0,
            gross_output: None,
        };
        assert_eq!(ValueAddedTable::new(vec![zero]), Err(AggregateError::ZeroGdp));
    }

    #[test]
    fn misaligned_axes() {
        let wages = table(&[1.0, 1.0], &[Some(1.0), Some(2.0)]);
        let shifted = ShockVector::new(vec![soc("99-9999"), soc("11-1001")], ShockKind::Total, vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            aggregate_employment(&shifted, &wages),
            Err(AggregateError::AxisMisalignment(_))
        ));
        assert!(matches!(
            aggregate_employment(&occ_shock(vec![0.0]), &wages),
            Err(AggregateError::AxisMisalignment(_))
        ));
    }

    #[test]
    fn quartile_midpoints() {
        assert_eq!(quartile_of_midpoint(0.0), 0);
        assert_eq!(quartile_of_midpoint(0.25), 0);
        assert_eq!(quartile_of_midpoint(0.2500001), 1);
        assert_eq!(quartile_of_midpoint(0.75), 2);
        assert_eq!(quartile_of_midpoint(1.0), 3);
    }

    #[test]
    fn two_occupation_quartiles() {
        let wages = table(&[50.0, 50.0], &[Some(80.0), Some(20.0)]);
        let shock = occ_shock(vec![0.0, -0.4]);
        let rep = quartile_breakdown(&shock, &wages).unwrap();
        let q = &rep.quartiles;
        assert_eq!(q[0].employment_change, Some(-0.4));
        assert_eq!(q[0].occupations, 1);
        assert_eq!(q[1].employment_change, None);
        assert_eq!(q[2].employment_change, Some(0.0));
        assert_eq!(q[3].occupations, 0);
        assert_eq!(q[0].lost_wage_share, Some(1.0));
    }

    #[test]
    fn uniform_shock_quartiles() {
        let emp = [5.0, 30.0, 10.0, 20.0, 15.0, 20.0];
        let wage: Vec<_> = [12.0, 50.0, 33.0, 21.0, 90.0, 7.0].iter().map(|&w| Some(w)).collect();
        let wages = table(&emp, &wage);
        let rep = quartile_breakdown(&occ_shock(vec![-0.3; 6]), &wages).unwrap();
        for q in &rep.quartiles {
            if q.occupations > 0 {
                assert!((q.employment_change.unwrap() + 0.3).abs() < 1e-12);
                assert!((q.lost_wage_share.unwrap() - q.wage_bill_share).abs() < 1e-12);
            }
        }
        let none = quartile_breakdown(&occ_shock(vec![0.0; 6]), &wages).unwrap();
        assert!(none.quartiles.iter().all(|q| q.lost_wage_share.is_none()));
    }

    #[test]
    fn wage_ties_ordered_by_code() {
        let wages = table(&[10.0, 10.0, 10.0, 10.0], &[Some(5.0); 4]);
        let rep = quartile_breakdown(&occ_shock(vec![-0.1, -0.2, -0.3, -0.4]), &wages).unwrap();
        let changes: Vec<_> = rep.quartiles.iter().map(|q| q.employment_change.unwrap()).collect();
        assert_eq!(changes, vec![-0.1, -0.2, -0.3, -0.4]);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..30).prop_flat_map(|j| {
            (
                prop::collection::vec(0.0f64..100.0, j),
                prop::collection::vec(1.0f64..200.0, j),
                prop::collection::vec(-1.0f64..=0.0, j),
                prop::collection::vec(-1.0f64..=0.2, j),
            )
        })
    }

    proptest! {
        #[test]
        fn linearity_and_bounds((emp, wage, s1, s2) in instance(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
            prop_assume!(emp.iter().sum::<f64>() > 0.0);
            let wages = table(&emp, &wage.iter().map(|&w| Some(w)).collect::<Vec<_>>());
            prop_assume!(wages.wage_bill_shares().is_ok());
            let combo: Vec<f64> = s1.iter().zip(&s2).map(|(x, y)| a * x + b * y).collect();
            for f in [aggregate_employment, aggregate_wages] {
                let lhs = f(&occ_shock(combo.clone()), &wages).unwrap();
                let rhs = a * f(&occ_shock(s1.clone()), &wages).unwrap() + b * f(&occ_shock(s2.clone()), &wages).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12);
                let agg = f(&occ_shock(s2.clone()), &wages).unwrap();
                let lo = s2.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = s2.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(agg >= lo - 1e-12 && agg <= hi + 1e-12);
            }
        }

        #[test]
        fn quartiles_reproduce_aggregate((emp, wage, s, _) in instance()) {
            prop_assume!(emp.iter().sum::<f64>() > 0.0);
            let wages = table(&emp, &wage.iter().map(|&w| Some(w)).collect::<Vec<_>>());
            let shock = occ_shock(s);
            let rep = quartile_breakdown(&shock, &wages).unwrap();
            let combined: f64 = rep.quartiles.iter()
                .filter_map(|q| q.employment_change.map(|c| c * q.employment_share))
                .sum();
            let agg = aggregate_employment(&shock, &wages).unwrap();
            prop_assert!((combined - agg).abs() <= 1e-9);
            let shares: Vec<f64> = rep.quartiles.iter().filter_map(|q| q.lost_wage_share).collect();
            if !shares.is_empty() {
                prop_assert!((shares.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
            let emp_share: f64 = rep.quartiles.iter().map(|q| q.employment_share).sum();
            prop_assert!((emp_share - 1.0).abs() <= 1e-12);
        }
    }
}
