//! Classification codes, crosswalks between schemes and the incidence
//! matrices built from them.
//!
//! Codes are hierarchical: a code contains every code of the same scheme
//! whose digits it prefixes (`"325"` contains `"325130"`). Every axis built
//! here is sorted by scheme, then digits, so that matrices and the files
//! derived from them are reproducible byte for byte.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::matrix::DenseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaxonomyError {
    #[error("malformed code {raw:?}: {reason}")]
    MalformedCode { raw: String, reason: &'static str },
    #[error("unknown classification scheme {0:?}")]
    UnknownScheme(String),
    #[error("scheme mismatch: expected {expected}, found {found}")]
    SchemeMismatch { expected: Scheme, found: Scheme },
    #[error("unknown code {0}")]
    UnknownCode(String),
    #[error("duplicate code {0}")]
    DuplicateCode(String),
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("essential flag for {code} must be 0 or 1, got {value}")]
    NonBinaryEssential { code: String, value: u8 },
    #[error("override for {code} must lie in [0, 1], got {value}")]
    OverrideOutOfRange { code: String, value: f64 },
    #[error("dimension mismatch: {what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

pub type Result<T, E = TaxonomyError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Scheme {
    #[serde(rename = "NAICS")]
    Naics,
    #[serde(rename = "NACE")]
    Nace,
    #[serde(rename = "SOC")]
    Soc,
    #[serde(rename = "ONET_SOC")]
    OnetSoc,
    #[serde(rename = "BLS_IO")]
    BlsIo,
    #[serde(rename = "CUSTOM")]
    Custom,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Naics => "NAICS",
            Scheme::Nace => "NACE",
            Scheme::Soc => "SOC",
            Scheme::OnetSoc => "ONET_SOC",
            Scheme::BlsIo => "BLS_IO",
            Scheme::Custom => "CUSTOM",
        }
    }

    /// Whether codes of this scheme may contain letters (NACE sections,
    /// BLS input-output labels, user-defined codes).
    pub fn allows_letters(self) -> bool {
        matches!(self, Scheme::Nace | Scheme::BlsIo | Scheme::Custom)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = TaxonomyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('-', "_").as_str() {
            "NAICS" => Ok(Scheme::Naics),
            "NACE" => Ok(Scheme::Nace),
            "SOC" => Ok(Scheme::Soc),
            "ONET_SOC" | "ONET" => Ok(Scheme::OnetSoc),
            "BLS_IO" => Ok(Scheme::BlsIo),
            "CUSTOM" => Ok(Scheme::Custom),
            _ => Err(TaxonomyError::UnknownScheme(s.to_string())),
        }
    }
}

/// A code in one classification scheme. Identity is `(scheme, digits)`;
/// the optional title never takes part in comparisons.
#[derive(Debug, Clone)]
pub struct ClassCode {
    scheme: Scheme,
    digits: String,
    title: Option<String>,
}

pub const MIN_CODE_LEN: usize = 2;
pub const MAX_CODE_LEN: usize = 8;

impl ClassCode {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn digits(&self) -> &str {
        &self.digits
    }

    pub fn title(&self) -> Option<&str> {
        self.title.as_deref()
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = Some(title.into());
        self
    }

    /// True when `other` is this code or one of its descendants.
    pub fn contains(&self, other: &ClassCode) -> bool {
        self.scheme == other.scheme && other.digits.starts_with(&self.digits)
    }
}

impl PartialEq for ClassCode {
    fn eq(&self, other: &Self) -> bool {
        self.scheme == other.scheme && self.digits == other.digits
    }
}

impl Eq for ClassCode {}

impl Hash for ClassCode {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.scheme.hash(state);
        self.digits.hash(state);
    }
}

impl PartialOrd for ClassCode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ClassCode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.scheme
            .cmp(&other.scheme)
            .then_with(|| self.digits.cmp(&other.digits))
    }
}

impl fmt::Display for ClassCode {
    /// SOC-family codes are shown in their usual hyphenated form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.digits;
        match self.scheme {
            Scheme::Soc if d.len() == 6 => write!(f, "{}-{}", &d[..2], &d[2..]),
            Scheme::OnetSoc if d.len() == 8 => {
                write!(f, "{}-{}.{}", &d[..2], &d[2..6], &d[6..])
            }
            _ => f.write_str(d),
        }
    }
}

impl Serialize for ClassCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parses a raw code. Hyphens, dots and spaces are presentation-only and
/// are stripped before validation.
pub fn parse_code(scheme: Scheme, raw: &str) -> Result<ClassCode> {
    let malformed = |reason| TaxonomyError::MalformedCode {
        raw: raw.to_string(),
        reason,
    };
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(malformed("empty"));
    }
    let mut digits = String::with_capacity(trimmed.len());
    for ch in trimmed.chars() {
        match ch {
            '-' | '.' | ' ' => {}
            c if c.is_ascii_digit() => digits.push(c),
            c if c.is_ascii_alphabetic() && scheme.allows_letters() => digits.push(c.to_ascii_uppercase()),
            _ => return Err(malformed("illegal character")),
        }
    }
    if !(MIN_CODE_LEN..=MAX_CODE_LEN).contains(&digits.len()) {
        return Err(malformed("length outside 2..=8"));
    }
    Ok(ClassCode {
        scheme,
        digits,
        title: None,
    })
}

/// Every code of `universe` that `coarse` contains, in universe order.
pub fn expand_prefix(coarse: &ClassCode, universe: &[ClassCode]) -> Result<Vec<ClassCode>> {
    if let Some(bad) = universe.iter().find(|c| c.scheme != coarse.scheme) {
        return Err(TaxonomyError::SchemeMismatch {
            expected: coarse.scheme,
            found: bad.scheme,
        });
    }
    Ok(universe.iter().filter(|c| coarse.contains(c)).cloned().collect())
}

/// Exact match when the axis holds the code itself, otherwise every
/// axis code it contains.
fn resolve(code: &ClassCode, axis: &[ClassCode]) -> Vec<usize> {
    if let Some(i) = axis.iter().position(|c| c == code) {
        return vec![i];
    }
    axis.iter()
        .enumerate()
        .filter(|(_, c)| code.contains(c))
        .map(|(i, _)| i)
        .collect()
}

fn sorted_unique(codes: &[ClassCode]) -> Result<Vec<ClassCode>> {
    let mut out = codes.to_vec();
    out.sort();
    if let Some(w) = out.windows(2).find(|w| w[0] == w[1]) {
        return Err(TaxonomyError::DuplicateCode(w[0].to_string()));
    }
    Ok(out)
}

/// Binary essential flags over fine industry codes. Entries may be coarse;
/// they are expanded over the fine axis when aligned.
#[derive(Debug, Clone, Default)]
pub struct EssentialList {
    entries: Vec<(ClassCode, u8)>,
}

impl EssentialList {
    pub fn new(entries: Vec<(ClassCode, u8)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (code, flag) in &entries {
            if *flag > 1 {
                return Err(TaxonomyError::NonBinaryEssential {
                    code: code.to_string(),
                    value: *flag,
                });
            }
            if !seen.insert(code.clone()) {
                return Err(TaxonomyError::DuplicateCode(code.to_string()));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(ClassCode, u8)] {
        &self.entries
    }

    /// Produces the vector `u` over `fine`. Each fine code takes the flag
    /// of its most specific containing entry; fine codes with no entry are
    /// non-essential and reported in `uncovered`.
    pub fn align(&self, fine: &[ClassCode]) -> EssentialVector {
        let mut values = vec![0.0; fine.len()];
        let mut depth = vec![None::<usize>; fine.len()];
        let mut unmatched = Vec::new();
        for (code, flag) in &self.entries {
            let hits = resolve(code, fine);
            if hits.is_empty() {
                unmatched.push(code.clone());
            }
            for i in hits {
                let len = code.digits.len();
                if depth[i].is_none_or(|d| len > d) {
                    depth[i] = Some(len);
                    values[i] = f64::from(*flag);
                }
            }
        }
        let uncovered = fine
            .iter()
            .zip(&depth)
            .filter(|(_, d)| d.is_none())
            .map(|(c, _)| c.clone())
            .collect();
        EssentialVector {
            codes: fine.to_vec(),
            values,
            uncovered,
            unmatched_entries: unmatched,
        }
    }
}

/// The essential vector `u` aligned to a fine-code axis.
#[derive(Debug, Clone, PartialEq)]
pub struct EssentialVector {
    pub codes: Vec<ClassCode>,
    pub values: Vec<f64>,
    pub uncovered: Vec<ClassCode>,
    pub unmatched_entries: Vec<ClassCode>,
}

impl EssentialVector {
    pub fn essential_fraction(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Incidence between analysis industries (rows) and fine codes (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Concordance {
    rows: Vec<ClassCode>,
    cols: Vec<ClassCode>,
    links: BTreeSet<(usize, usize)>,
}

impl Concordance {
    pub fn rows(&self) -> &[ClassCode] {
        &self.rows
    }

    pub fn cols(&self) -> &[ClassCode] {
        &self.cols
    }

    pub fn links(&self) -> &BTreeSet<(usize, usize)> {
        &self.links
    }

    pub fn incidence(&self) -> DenseMatrix {
        let mut s = DenseMatrix::zeros(self.rows.len(), self.cols.len());
        for &(r, c) in &self.links {
            s.set(r, c, 1.0);
        }
        s
    }

    /// Rows without any linked fine code.
    pub fn empty_rows(&self) -> Vec<ClassCode> {
        let mut linked = vec![false; self.rows.len()];
        for &(r, _) in &self.links {
            linked[r] = true;
        }
        self.rows
            .iter()
            .zip(linked)
            .filter(|(_, l)| !l)
            .map(|(c, _)| c.clone())
            .collect()
    }
}

/// Builds the incidence matrix `S` from `(row code, fine code)` pairs.
/// Either endpoint may be coarser than its axis and is then expanded.
pub fn build_concordance(
    rows: &[ClassCode],
    fine: &[ClassCode],
    crosswalk: &[(ClassCode, ClassCode)],
) -> Result<Concordance> {
    let rows = sorted_unique(rows)?;
    let cols = sorted_unique(fine)?;
    let mut links = BTreeSet::new();
    for (from, to) in crosswalk {
        let rs = resolve(from, &rows);
        if rs.is_empty() {
            return Err(TaxonomyError::UnknownCode(format!("{} {}", from.scheme, from)));
        }
        let cs = resolve(to, &cols);
        if cs.is_empty() {
            return Err(TaxonomyError::UnknownCode(format!("{} {}", to.scheme, to)));
        }
        for &r in &rs {
            for &c in &cs {
                links.insert((r, c));
            }
        }
    }
    Ok(Concordance { rows, cols, links })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub code: ClassCode,
    pub share: f64,
    pub note: String,
}

/// Hand corrections to industry essential shares.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OverrideList {
    entries: Vec<Override>,
}

impl OverrideList {
    pub fn new(entries: Vec<Override>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for o in &entries {
            if !(0.0..=1.0).contains(&o.share) {
                return Err(TaxonomyError::OverrideOutOfRange {
                    code: o.code.to_string(),
                    value: o.share,
                });
            }
            if !seen.insert(o.code.clone()) {
                return Err(TaxonomyError::DuplicateCode(o.code.to_string()));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[Override] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverrideAudit {
    pub code: ClassCode,
    pub old: f64,
    pub new: f64,
    pub note: String,
}

/// Replaces overridden industry shares. Codes must match an industry
/// exactly.
pub fn apply_overrides(
    industries: &[ClassCode],
    base: &[f64],
    overrides: &OverrideList,
) -> Result<(Vec<f64>, Vec<OverrideAudit>)> {
    if industries.len() != base.len() {
        return Err(TaxonomyError::DimensionMismatch {
            what: "base shares",
            expected: industries.len(),
            found: base.len(),
        });
    }
    let index: BTreeMap<&ClassCode, usize> = industries.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut out = base.to_vec();
    let mut audit = Vec::with_capacity(overrides.entries.len());
    for o in &overrides.entries {
        let &i = index
            .get(&o.code)
            .ok_or_else(|| TaxonomyError::UnknownCode(o.code.to_string()))?;
        audit.push(OverrideAudit {
            code: o.code.clone(),
            old: base[i],
            new: o.share,
            note: o.note.clone(),
        });
        out[i] = o.share;
    }
    Ok((out, audit))
}

/// A normalized matrix and the indices of the lines (rows or columns)
/// that summed to zero and were left untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub matrix: DenseMatrix,
    pub zero_lines: Vec<usize>,
}

fn check_nonnegative(m: &DenseMatrix) -> Result<()> {
    for r in 0..m.nrows() {
        for (c, &v) in m.row(r).iter().enumerate() {
            if v < 0.0 || v.is_nan() {
                return Err(TaxonomyError::NegativeEntry {
                    row: r,
                    col: c,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

/// Divides every row by its sum.
pub fn row_normalize(m: &DenseMatrix) -> Result<Normalized> {
    check_nonnegative(m)?;
    let mut out = m.clone();
    let mut zero_lines = Vec::new();
    for (r, sum) in m.row_sums().into_iter().enumerate() {
        if sum > 0.0 {
            out.row_mut(r).iter_mut().for_each(|v| *v /= sum);
        } else {
            zero_lines.push(r);
        }
    }
    Ok(Normalized {
        matrix: out,
        zero_lines,
    })
}

/// Divides every column by its sum.
pub fn column_normalize(m: &DenseMatrix) -> Result<Normalized> {
    check_nonnegative(m)?;
    let sums = m.col_sums();
    let mut out = m.clone();
    for r in 0..m.nrows() {
        for (v, &sum) in out.row_mut(r).iter_mut().zip(&sums) {
            if sum > 0.0 {
                *v /= sum;
            }
        }
    }
    let zero_lines = sums
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= 0.0)
        .map(|(c, _)| c)
        .collect();
    Ok(Normalized {
        matrix: out,
        zero_lines,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naics(d: &str) -> ClassCode {
        parse_code(Scheme::Naics, d).unwrap()
    }

    #[test]
    fn parse_valid_and_invalid() {
        let c = naics("325130");
        assert_eq!(c.scheme(), Scheme::Naics);
        assert_eq!(c.digits(), "325130");
        assert!(matches!(
            parse_code(Scheme::Naics, ""),
            Err(TaxonomyError::MalformedCode { .. })
        ));
        assert!(parse_code(Scheme::Naics, "   ").is_err());
        assert!(parse_code(Scheme::Naics, "3").is_err());
        assert!(parse_code(Scheme::Naics, "123456789").is_err());
        assert!(parse_code(Scheme::Naics, "32A").is_err());
        assert!(parse_code(Scheme::Naics, "32/5").is_err());
    }

    #[test]
    fn soc_separators_are_stripped() {
        let c = parse_code(Scheme::Soc, "11-1011").unwrap();
        assert_eq!(c.digits(), "111011");
        assert_eq!(c.to_string(), "11-1011");
        let o = parse_code(Scheme::OnetSoc, "13-2041.00").unwrap();
        assert_eq!(o.digits(), "13204100");
        assert_eq!(o.to_string(), "13-2041.00");
    }

    #[test]
    fn letters_only_where_allowed() {
        assert_eq!(parse_code(Scheme::BlsIo, "s00102").unwrap().digits(), "S00102");
        assert_eq!(parse_code(Scheme::Nace, "C10.1").unwrap().digits(), "C101");
        assert!(parse_code(Scheme::Soc, "AB-1234").is_err());
    }

    #[test]
    fn titles_do_not_affect_identity() {
        assert_eq!(naics("4451").with_title("Grocery stores"), naics("4451"));
    }

    #[test]
    fn prefix_expansion() {
        let universe = vec![naics("325130"), naics("325200"), naics("481000")];
        let got = expand_prefix(&naics("32"), &universe).unwrap();
        assert_eq!(got, vec![naics("325130"), naics("325200")]);
        assert_eq!(
            expand_prefix(&naics("325130"), &universe).unwrap(),
            vec![naics("325130")]
        );
        assert!(expand_prefix(&naics("99"), &universe).unwrap().is_empty());
        let soc = parse_code(Scheme::Soc, "11").unwrap();
        assert!(matches!(
            expand_prefix(&soc, &universe),
            Err(TaxonomyError::SchemeMismatch { .. })
        ));
    }

    fn toy_codes() -> (Vec<ClassCode>, Vec<ClassCode>) {
        (
            vec![naics("3251"), naics("6211")],
            vec![naics("325120"), naics("325130"), naics("621111"), naics("621210")],
        )
    }

    #[test]
    fn concordance_toy_economy() {
        let (rows, fine) = toy_codes();
        let xw = vec![
            (naics("3251"), naics("325120")),
            (naics("3251"), naics("325130")),
            (naics("6211"), naics("621111")),
            (naics("6211"), naics("621210")),
            (naics("6211"), naics("621210")),
        ];
        let s = build_concordance(&rows, &fine, &xw).unwrap();
        assert_eq!(s.links().len(), 4);
        assert_eq!(
            s.incidence(),
            DenseMatrix::from_rows(&[vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]]).unwrap()
        );
        assert!(s.empty_rows().is_empty());
    }

    #[test]
    fn concordance_expands_coarse_endpoints() {
        let (rows, fine) = toy_codes();
        let s = build_concordance(&rows, &fine, &[(naics("6211"), naics("62"))]).unwrap();
        assert_eq!(s.links().len(), 2);
        assert_eq!(s.empty_rows(), vec![naics("3251")]);
    }

    #[test]
    fn concordance_unknown_code() {
        let (rows, fine) = toy_codes();
        let err = build_concordance(&rows, &fine, &[(naics("3251"), naics("999999"))]);
        assert!(matches!(err, Err(TaxonomyError::UnknownCode(_))));
        let err = build_concordance(&rows, &fine, &[(naics("4451"), naics("325120"))]);
        assert!(matches!(err, Err(TaxonomyError::UnknownCode(_))));
    }

    #[test]
    fn concordance_rejects_duplicate_axis_codes() {
        let rows = vec![naics("3251"), naics("32-51")];
        assert!(matches!(
            build_concordance(&rows, &[naics("325120")], &[]),
            Err(TaxonomyError::DuplicateCode(_))
        ));
    }

    #[test]
    fn essential_alignment_most_specific_wins() {
        let (_, fine) = toy_codes();
        let list = EssentialList::new(vec![
            (naics("32"), 1),
            (naics("325130"), 0),
            (naics("62"), 1),
            (naics("99"), 1),
        ])
        .unwrap();
        let u = list.align(&fine);
        assert_eq!(u.values, vec![1.0, 0.0, 1.0, 1.0]);
        assert!(u.uncovered.is_empty());
        assert_eq!(u.unmatched_entries, vec![naics("99")]);
        assert_eq!(u.essential_fraction(), 0.75);
    }

    #[test]
    fn essential_list_validation() {
        assert!(EssentialList::new(vec![(naics("32"), 2)]).is_err());
        assert!(EssentialList::new(vec![(naics("32"), 1), (naics("32"), 0)]).is_err());
        let u = EssentialList::default().align(&[naics("325120")]);
        assert_eq!(u.values, vec![0.0]);
        assert_eq!(u.uncovered, vec![naics("325120")]);
    }

    #[test]
    fn overrides_from_hand_review() {
        let inds = vec![naics("4451"), naics("5112")];
        let list = OverrideList::new(vec![
            Override {
                code: naics("4451"),
                share: 1.0,
                note: "Grocery stores: non-essential to essential".into(),
            },
            Override {
                code: naics("5112"),
                share: 0.0,
                note: "Software publishers: essential to non-essential".into(),
            },
        ])
        .unwrap();
        let (out, audit) = apply_overrides(&inds, &[0.0, 1.0], &list).unwrap();
        assert_eq!(out, vec![1.0, 0.0]);
        assert_eq!(audit.len(), 2);
        assert_eq!((audit[0].old, audit[0].new), (0.0, 1.0));
        assert_eq!((audit[1].old, audit[1].new), (1.0, 0.0));

        let (same, audit) = apply_overrides(&inds, &[0.3, 0.7], &OverrideList::default()).unwrap();
        assert_eq!(same, vec![0.3, 0.7]);
        assert!(audit.is_empty());
    }

    #[test]
    fn overrides_errors() {
        let bad = OverrideList::new(vec![Override {
            code: naics("4451"),
            share: 1.5,
            note: String::new(),
        }]);
        assert!(matches!(bad, Err(TaxonomyError::OverrideOutOfRange { .. })));
        let list = OverrideList::new(vec![Override {
            code: naics("7211"),
            share: 0.0,
            note: String::new(),
        }])
        .unwrap();
        assert!(matches!(
            apply_overrides(&[naics("4451")], &[0.0], &list),
            Err(TaxonomyError::UnknownCode(_))
        ));
    }

    #[test]
    fn normalization_examples() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 0.0]]).unwrap();
        let n = row_normalize(&m).unwrap();
        assert_eq!(n.matrix.row(0), &[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(n.matrix.row(1), &[0.0; 4]);
        assert_eq!(n.zero_lines, vec![1]);

        let m = DenseMatrix::from_rows(&[vec![10.0, 0.0, 30.0], vec![0.0, 20.0, 20.0]]).unwrap();
        let n = row_normalize(&m).unwrap();
        assert_eq!(n.matrix.row(0), &[0.25, 0.0, 0.75]);
        let c = column_normalize(&m).unwrap();
        assert_eq!(c.matrix.column(0), vec![1.0, 0.0]);
        assert_eq!(c.matrix.column(2), vec![0.6, 0.4]);
        assert!(c.zero_lines.is_empty());

        let z = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 3.0]]).unwrap();
        let c = column_normalize(&z).unwrap();
        assert_eq!(c.zero_lines, vec![0]);
        assert_eq!(c.matrix.column(0), vec![0.0, 0.0]);
        assert_eq!(c.matrix.column(1), vec![0.25, 0.75]);
    }

    #[test]
    fn normalization_rejects_negative() {
        let m = DenseMatrix::from_rows(&[vec![1.0, -1.0]]).unwrap();
        assert!(matches!(row_normalize(&m), Err(TaxonomyError::NegativeEntry { .. })));
        assert!(matches!(column_normalize(&m), Err(TaxonomyError::NegativeEntry { .. })));
    }

    fn code_strategy() -> impl Strategy<Value = String> {
        proptest::string::string_regex("[1-9][0-9]{1,5}").unwrap()
    }

    proptest! {
        #[test]
        fn expand_prefix_returns_contained_subset(
            coarse in "[1-9][0-9]{0,2}",
            universe in proptest::collection::btree_set(code_strategy(), 0..20),
        ) {
            prop_assume!(coarse.len() >= 2);
            let c = naics(&coarse);
            let u: Vec<_> = universe.iter().map(|d| naics(d)).collect();
            let got = expand_prefix(&c, &u).unwrap();
            for g in &got {
                prop_assert!(u.contains(g));
                prop_assert!(g.digits().starts_with(c.digits()));
            }
            let expected = u.iter().filter(|x| x.digits().starts_with(&coarse)).count();
            prop_assert_eq!(got.len(), expected);
        }

        #[test]
        fn row_sums_are_one(rows in proptest::collection::vec(
            proptest::collection::vec(0.0f64..100.0, 5), 1..8)) {
            let m = DenseMatrix::from_rows(&rows).unwrap();
            let n = row_normalize(&m).unwrap();
            for (r, s) in n.matrix.row_sums().iter().enumerate() {
                if n.zero_lines.contains(&r) {
                    prop_assert_eq!(*s, 0.0);
                } else {
                    prop_assert!((s - 1.0).abs() <= 1e-12);
                }
            }
            let c = column_normalize(&m).unwrap();
            for (j, s) in c.matrix.col_sums().iter().enumerate() {
                if !c.zero_lines.contains(&j) {
                    prop_assert!((s - 1.0).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn overrides_are_idempotent(
            base in proptest::collection::vec(0.0f64..=1.0, 6),
            picks in proptest::collection::btree_map(0usize..6, 0.0f64..=1.0, 0..6),
        ) {
            let inds: Vec<_> = (0..6).map(|i| naics(&format!("44{i}1"))).collect();
            let list = OverrideList::new(picks.iter().map(|(&i, &share)| Override {
                code: inds[i].clone(), share, note: String::new(),
            }).collect()).unwrap();
            let (once, _) = apply_overrides(&inds, &base, &list).unwrap();
            let (twice, _) = apply_overrides(&inds, &once, &list).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn concordance_ignores_crosswalk_order(
            (pairs, shuffled) in proptest::collection::vec((0usize..4, 0usize..6), 1..15)
                .prop_flat_map(|p| (Just(p.clone()), Just(p).prop_shuffle())),
        ) {
            let rows: Vec<_> = (0..4).map(|i| naics(&format!("31{i}0"))).collect();
            let fine: Vec<_> = (0..6).map(|i| naics(&format!("4{i}0000"))).collect();
            let to_pairs = |ps: &[(usize, usize)]| -> Vec<_> {
                ps.iter().map(|&(r, c)| (rows[r].clone(), fine[c].clone())).collect()
            };
            let mut rev_rows = rows.clone();
            rev_rows.reverse();
            let a = build_concordance(&rows, &fine, &to_pairs(&pairs)).unwrap();
            let b = build_concordance(&rev_rows, &fine, &to_pairs(&shuffled)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
