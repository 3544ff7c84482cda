//! CSV readers for the run inputs. Each reader checks its file's schema
//! and returns typed rows; cross-file checks happen during assembly.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::taxonomy::{parse_code, ClassCode, Override, Scheme};

use super::config::RunConfig;
use super::PipelineError;

/// Parsed wage file row.
#[derive(Debug, Clone, PartialEq)]
pub struct WageRecord {
    pub employment: f64,
    pub mean_wage: Option<f64>,
    pub median_wage: Option<f64>,
    pub exposure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VaRecord {
    pub value_added: f64,
    pub gross_output: Option<f64>,
}

/// Every input file, parsed but not yet cross-checked.
#[derive(Debug, Clone, Default)]
pub struct RawInputs {
    pub crosswalk: Vec<(ClassCode, ClassCode)>,
    pub essential: Vec<(ClassCode, u8)>,
    pub overrides: Vec<Override>,
    /// Activity ids sorted ascending, with one rating row each.
    pub activity_ids: Vec<String>,
    pub ratings: Vec<Vec<u8>>,
    pub activity_map: Vec<(ClassCode, String)>,
    pub employment: Vec<(ClassCode, ClassCode, f64)>,
    pub wages: BTreeMap<ClassCode, WageRecord>,
    pub value_added: BTreeMap<ClassCode, VaRecord>,
    /// SHA-256 of each input file, keyed by config key.
    pub hashes: BTreeMap<String, String>,
}

#[derive(Debug)]
struct Table {
    file: PathBuf,
    headers: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn schema(file: &Path, line: u64, column: &str, reason: impl Into<String>) -> PipelineError {
    PipelineError::Schema {
        file: file.to_path_buf(),
        line,
        column: column.to_string(),
        reason: reason.into(),
    }
}

impl Table {
    fn read(path: &Path, bytes: &[u8], required: &[&str]) -> Result<Self, PipelineError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| schema(path, 1, "", e.to_string()))?
            .iter()
            .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
            .collect();
        for r in required {
            if !headers.iter().any(|h| h == r) {
                return Err(schema(path, 1, r, "missing column"));
            }
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                schema(path, line, "", e.to_string())
            })?;
            if rec.iter().all(str::is_empty) {
                continue;
            }
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec));
        }
        Ok(Self {
            file: path.to_path_buf(),
            headers,
            rows,
        })
    }

    fn col(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn req(&self, name: &str) -> usize {
        self.col(name).expect("required column checked on read")
    }

    fn code(&self, line: u64, rec: &csv::StringRecord, idx: usize, scheme: Scheme) -> Result<ClassCode, PipelineError> {
        let raw = rec.get(idx).unwrap_or_default();
        parse_code(scheme, raw).map_err(|e| schema(&self.file, line, &self.headers[idx], e.to_string()))
    }

    fn number(&self, line: u64, rec: &csv::StringRecord, idx: usize) -> Result<f64, PipelineError> {
        self.optional_number(line, rec, idx)?
            .ok_or_else(|| schema(&self.file, line, &self.headers[idx], "value required"))
    }

    /// Empty cells and `NA` read as missing.
    fn optional_number(&self, line: u64, rec: &csv::StringRecord, idx: usize) -> Result<Option<f64>, PipelineError> {
        let raw = rec.get(idx).unwrap_or_default();
        if raw.is_empty() || raw.eq_ignore_ascii_case("na") {
            return Ok(None);
        }
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(schema(
                &self.file,
                line,
                &self.headers[idx],
                format!("{raw:?} is not a number"),
            )),
        }
    }

    fn text<'a>(&self, rec: &'a csv::StringRecord, idx: usize) -> &'a str {
        rec.get(idx).unwrap_or_default()
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, PipelineError> {
    std::fs::read(path).map_err(|source| PipelineError::InputIo {
        path: path.to_path_buf(),
        source,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_crosswalk(
    t: &Table,
    row_scheme: Scheme,
    fine_scheme: Scheme,
) -> Result<Vec<(ClassCode, ClassCode)>, PipelineError> {
    let (ri, fi) = (t.req("industry_code"), t.req("fine_code"));
    t.rows
        .iter()
        .map(|(line, rec)| {
            Ok((
                t.code(*line, rec, ri, row_scheme)?,
                t.code(*line, rec, fi, fine_scheme)?,
            ))
        })
        .collect()
}

fn read_essential(t: &Table, scheme: Scheme) -> Result<Vec<(ClassCode, u8)>, PipelineError> {
    let (ci, ei) = (t.req("code"), t.req("essential"));
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let code = t.code(*line, rec, ci, scheme)?;
        let flag = match t.text(rec, ei) {
            "0" => 0,
            "1" => 1,
            other => return Err(schema(&t.file, *line, "essential", format!("{other:?} is not 0 or 1"))),
        };
        if !seen.insert(code.clone()) {
            return Err(schema(&t.file, *line, "code", format!("duplicate code {code}")));
        }
        out.push((code, flag));
    }
    Ok(out)
}

fn read_overrides(t: &Table, scheme: Scheme) -> Result<Vec<Override>, PipelineError> {
    let (ci, si) = (t.req("industry_code"), t.req("essential_share"));
    let ni = t.col("note");
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let code = t.code(*line, rec, ci, scheme)?;
        let share = t.number(*line, rec, si)?;
        if !(0.0..=1.0).contains(&share) {
            return Err(schema(
                &t.file,
                *line,
                "essential_share",
                format!("{share} outside [0, 1]"),
            ));
        }
        if !seen.insert(code.clone()) {
            return Err(schema(
                &t.file,
                *line,
                "industry_code",
                format!("duplicate override for {code}"),
            ));
        }
        let note = ni.map(|i| t.text(rec, i).to_string()).unwrap_or_default();
        out.push(Override { code, share, note });
    }
    Ok(out)
}

fn read_ratings(t: &Table) -> Result<(Vec<String>, Vec<Vec<u8>>), PipelineError> {
    let ai = t.req("activity_id");
    let raters: Vec<usize> = t
        .headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("rater"))
        .map(|(i, _)| i)
        .collect();
    if raters.is_empty() {
        return Err(schema(&t.file, 1, "rater_1", "no rater columns"));
    }
    let mut by_id: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    for (line, rec) in &t.rows {
        let id = t.text(rec, ai);
        if id.is_empty() {
            return Err(schema(&t.file, *line, "activity_id", "empty activity id"));
        }
        let mut row = Vec::with_capacity(raters.len());
        for &i in &raters {
            row.push(match t.text(rec, i) {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(schema(
                        &t.file,
                        *line,
                        &t.headers[i],
                        format!("{other:?} is not 0 or 1"),
                    ))
                }
            });
        }
        if by_id.insert(id.to_string(), row).is_some() {
            return Err(schema(
                &t.file,
                *line,
                "activity_id",
                format!("duplicate activity {id:?}"),
            ));
        }
    }
    Ok(by_id.into_iter().unzip())
}

fn read_activity_map(t: &Table, scheme: Scheme) -> Result<Vec<(ClassCode, String)>, PipelineError> {
    let (oi, ai) = (t.req("occupation_code"), t.req("activity_id"));
    t.rows
        .iter()
        .map(|(line, rec)| {
            let id = t.text(rec, ai);
            if id.is_empty() {
                return Err(schema(&t.file, *line, "activity_id", "empty activity id"));
            }
            Ok((t.code(*line, rec, oi, scheme)?, id.to_string()))
        })
        .collect()
}

fn nonnegative(t: &Table, line: u64, column: &str, v: f64) -> Result<f64, PipelineError> {
    if v < 0.0 {
        return Err(schema(&t.file, line, column, format!("{v} is negative")));
    }
    Ok(v)
}

fn read_employment(t: &Table, ind: Scheme, occ: Scheme) -> Result<Vec<(ClassCode, ClassCode, f64)>, PipelineError> {
    let (ii, oi, ei) = (t.req("industry_code"), t.req("occupation_code"), t.req("employment"));
    t.rows
        .iter()
        .map(|(line, rec)| {
            let n = t.code(*line, rec, ii, ind)?;
            let j = t.code(*line, rec, oi, occ)?;
            let v = nonnegative(t, *line, "employment", t.number(*line, rec, ei)?)?;
            Ok((n, j, v))
        })
        .collect()
}

fn read_wages(t: &Table, scheme: Scheme) -> Result<BTreeMap<ClassCode, WageRecord>, PipelineError> {
    let (oi, ei) = (t.req("occupation_code"), t.req("employment"));
    let (mi, di) = (t.req("mean_wage"), t.req("median_wage"));
    let xi = t.col("exposure_to_infection");
    let mut out = BTreeMap::new();
    for (line, rec) in &t.rows {
        let code = t.code(*line, rec, oi, scheme)?;
        let positive = |idx: usize| -> Result<Option<f64>, PipelineError> {
            match t.optional_number(*line, rec, idx)? {
                Some(w) if w <= 0.0 => Err(schema(&t.file, *line, &t.headers[idx], format!("{w} is not positive"))),
                other => Ok(other),
            }
        };
        let exposure = match xi {
            Some(i) => t.optional_number(*line, rec, i)?,
            None => None,
        };
        if let Some(x) = exposure {
            if !(0.0..=100.0).contains(&x) {
                return Err(schema(
                    &t.file,
                    *line,
                    "exposure_to_infection",
                    format!("{x} outside [0, 100]"),
                ));
            }
        }
        let record = WageRecord {
            employment: nonnegative(t, *line, "employment", t.number(*line, rec, ei)?)?,
            mean_wage: positive(mi)?,
            median_wage: positive(di)?,
            exposure,
        };
        if out.insert(code.clone(), record).is_some() {
            return Err(schema(
                &t.file,
                *line,
                "occupation_code",
                format!("duplicate occupation {code}"),
            ));
        }
    }
    Ok(out)
}

fn read_value_added(t: &Table, scheme: Scheme) -> Result<BTreeMap<ClassCode, VaRecord>, PipelineError> {
    let (ii, vi) = (t.req("industry_code"), t.req("value_added"));
    let gi = t.col("gross_output");
    let mut out = BTreeMap::new();
    for (line, rec) in &t.rows {
        let code = t.code(*line, rec, ii, scheme)?;
        let value_added = nonnegative(t, *line, "value_added", t.number(*line, rec, vi)?)?;
        let gross_output = match gi {
            Some(i) => t.optional_number(*line, rec, i)?,
            None => None,
        };
        if out
            .insert(
                code.clone(),
                VaRecord {
                    value_added,
                    gross_output,
                },
            )
            .is_some()
        {
            return Err(schema(
                &t.file,
                *line,
                "industry_code",
                format!("duplicate industry {code}"),
            ));
        }
    }
    Ok(out)
}

/// Reads and schema-checks every input file named by `config`.
pub fn read_inputs(config: &RunConfig) -> Result<RawInputs, PipelineError> {
    let mut raw = RawInputs::default();
    for (key, path) in config.input_files() {
        let bytes = read_bytes(&path)?;
        raw.hashes.insert(key.to_string(), sha256_hex(&bytes));
        let (ind, fine, occ) = (config.industry_scheme, config.fine_scheme, config.occupation_scheme);
        match key {
            "crosswalk" => {
                let t = Table::read(&path, &bytes, &["industry_code", "fine_code"])?;
                raw.crosswalk = read_crosswalk(&t, ind, fine)?;
            }
            "essential_list" => {
                let t = Table::read(&path, &bytes, &["code", "essential"])?;
                raw.essential = read_essential(&t, fine)?;
            }
            "overrides" => {
                let t = Table::read(&path, &bytes, &["industry_code", "essential_share"])?;
                raw.overrides = read_overrides(&t, ind)?;
            }
            "activity_ratings" => {
                let t = Table::read(&path, &bytes, &["activity_id"])?;
                (raw.activity_ids, raw.ratings) = read_ratings(&t)?;
            }
            "activity_map" => {
                let t = Table::read(&path, &bytes, &["occupation_code", "activity_id"])?;
                raw.activity_map = read_activity_map(&t, occ)?;
            }
            "employment" => {
                let t = Table::read(&path, &bytes, &["industry_code", "occupation_code", "employment"])?;
                raw.employment = read_employment(&t, ind, occ)?;
            }
            "wages" => {
                let t = Table::read(
                    &path,
                    &bytes,
                    &["occupation_code", "employment", "mean_wage", "median_wage"],
                )?;
                raw.wages = read_wages(&t, occ)?;
            }
            "value_added" => {
                let t = Table::read(&path, &bytes, &["industry_code", "value_added"])?;
                raw.value_added = read_value_added(&t, ind)?;
            }
            // Category maps are loaded with the scenario.
            _ => {}
        }
    }
    Ok(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(text: &str, required: &[&str]) -> Result<Table, PipelineError> {
        Table::read(Path::new("t.csv"), text.as_bytes(), required)
    }

    #[test]
    fn missing_column_is_schema_error() {
        let err = table(
            "industry_code,occupation\n11,11-1011\n",
            &["industry_code", "occupation_code"],
        );
        match err {
            Err(PipelineError::Schema { column, line, .. }) => {
                assert_eq!(column, "occupation_code");
                assert_eq!(line, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn typed_cells() {
        let t = table(
            "industry_code,occupation_code,employment\n11,11-1011,5\n21,11-1011,-1\n",
            &["industry_code", "occupation_code", "employment"],
        )
        .unwrap();
        let err = read_employment(&t, Scheme::Naics, Scheme::Soc).unwrap_err();
        assert!(matches!(err, PipelineError::Schema { line: 3, .. }), "{err:?}");
        let t = table(
            "occupation_code,employment,mean_wage,median_wage\n11-1011,3,NA,x\n",
            &[],
        )
        .unwrap();
        assert!(read_wages(&t, Scheme::Soc).is_err());
        let t = table("occupation_code,employment,mean_wage,median_wage\n11-1011,3,NA,\n", &[]).unwrap();
        let w = read_wages(&t, Scheme::Soc).unwrap();
        let rec = w.values().next().unwrap();
        assert_eq!((rec.mean_wage, rec.median_wage, rec.exposure), (None, None, None));
    }

    #[test]
    fn ratings_sorted_and_binary() {
        let t = table(
            "activity_id,title,rater_1,rater_2\nb,x,1,0\na,y,0,0\n",
            &["activity_id"],
        )
        .unwrap();
        let (ids, ratings) = read_ratings(&t).unwrap();
        assert_eq!(ids, vec!["a", "b"]);
        assert_eq!(ratings, vec![vec![0, 0], vec![1, 0]]);
        let t = table("activity_id,rater_1\na,2\n", &["activity_id"]).unwrap();
        assert!(read_ratings(&t).is_err());
        let t = table("activity_id,title\na,x\n", &["activity_id"]).unwrap();
        assert!(read_ratings(&t).is_err());
    }

    #[test]
    fn essential_flags() {
        let t = table("code,essential\n325120,1\n62,0\n", &[]).unwrap();
        assert_eq!(read_essential(&t, Scheme::Naics).unwrap().len(), 2);
        let t = table("code,essential\n325120,0.5\n", &[]).unwrap();
        assert!(read_essential(&t, Scheme::Naics).is_err());
        let t = table("code,essential\n325120,1\n325120,0\n", &[]).unwrap();
        assert!(read_essential(&t, Scheme::Naics).is_err());
    }
}
