//! Writes synthetic economies as pipeline input files, and oracle results
//! in the pipeline's output layout.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::economy::{SyntheticEconomy, SECTORS};
use crate::oracle::OracleOutput;

pub const CONFIG_FILE: &str = "run.conf";

fn opt(x: Option<u64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Writes every input file plus `run.conf` into `dir`; returns the config
/// path. Outputs of a run go to `dir/out`.
pub fn write_inputs(econ: &SyntheticEconomy, dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut s = String::from("industry_code,fine_code\n");
    for (code, &p) in econ.fine_codes.iter().zip(&econ.fine_parent) {
        let _ = writeln!(s, "{},{code}", econ.industries[p]);
    }
    fs::write(dir.join("crosswalk.csv"), s)?;

    let mut s = String::from("code,essential\n");
    for (code, flag) in econ.fine_codes.iter().zip(&econ.essential) {
        let _ = writeln!(s, "{code},{flag}");
    }
    fs::write(dir.join("essential_list.csv"), s)?;

    let raters = econ.votes.first().map_or(0, Vec::len);
    let mut s = String::from("activity_id,title");
    for r in 1..=raters {
        let _ = write!(s, ",rater_{r}");
    }
    s.push('\n');
    for (id, votes) in econ.activities.iter().zip(&econ.votes) {
        let _ = write!(s, "{id},Activity {id}");
        for v in votes {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    fs::write(dir.join("activity_ratings.csv"), s)?;

    let mut s = String::from("occupation_code,activity_id\n");
    for (occ, links) in econ.occupations.iter().zip(&econ.links) {
        for &a in links {
            let _ = writeln!(s, "{occ},{}", econ.activities[a]);
        }
    }
    fs::write(dir.join("activity_map.csv"), s)?;

    let mut s = String::from("industry_code,occupation_code,employment\n");
    for (ind, row) in econ.industries.iter().zip(&econ.employment) {
        for (occ, count) in econ.occupations.iter().zip(row) {
            let _ = writeln!(s, "{ind},{occ},{count}");
        }
    }
    fs::write(dir.join("employment.csv"), s)?;

    let mut s = String::from("occupation_code,employment,mean_wage,median_wage,exposure_to_infection\n");
    for (j, occ) in econ.occupations.iter().enumerate() {
        let total: u64 = econ.employment.iter().map(|row| row[j]).sum();
        let _ = writeln!(
            s,
            "{occ},{total},{},{},{}",
            opt(econ.mean_wage[j]),
            opt(econ.median_wage[j]),
            opt(econ.exposure[j])
        );
    }
    fs::write(dir.join("wages.csv"), s)?;

    let mut s = String::from("industry_code,value_added,gross_output\n");
    for (ind, va) in econ.industries.iter().zip(&econ.value_added) {
        let _ = writeln!(s, "{ind},{va},{}", 2 * va);
    }
    fs::write(dir.join("value_added.csv"), s)?;

    let mut s = String::from("sector_code,shock_pct,postponed,source\n");
    for (sector, pct) in SECTORS.iter().zip(&econ.demand_pct) {
        let _ = writeln!(s, "{sector},{pct},NA,synthetic seed {}", econ.seed);
    }
    fs::write(dir.join("scenario.csv"), s)?;

    let config = format!(
        "# synthetic economy, seed {seed}, dims {n},{j},{i},{k}{deg}\n\
         crosswalk = crosswalk.csv\n\
         essential_list = essential_list.csv\n\
         activity_ratings = activity_ratings.csv\n\
         activity_map = activity_map.csv\n\
         employment = employment.csv\n\
         wages = wages.csv\n\
         value_added = value_added.csv\n\
         scenario = scenario.csv\n\
         consensus_threshold = {threshold}\n\
         min_activities = {min}\n\
         health_growth = {hg}\n\
         output_dir = out\n",
        seed = econ.seed,
        n = econ.dims.n,
        j = econ.dims.j,
        i = econ.dims.i,
        k = econ.dims.k,
        deg = if econ.degenerate { ", degenerate" } else { "" },
        threshold = econ.consensus_threshold,
        min = econ.min_activities,
        hg = econ.health_growth,
    );
    let path = dir.join(CONFIG_FILE);
    fs::write(&path, config)?;
    Ok(path)
}

fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn shock_rows(header: &str, codes: &[String], cols: [&[f64]; 6], na_second: &[String]) -> String {
    let mut s = format!("{header}\n");
    for (idx, code) in codes.iter().enumerate() {
        let _ = write!(s, "{code},{}", fmt6(cols[0][idx]));
        if na_second.contains(code) {
            s.push_str(",NA");
        } else {
            let _ = write!(s, ",{}", fmt6(cols[1][idx]));
        }
        for c in &cols[2..] {
            let _ = write!(s, ",{}", fmt6(c[idx]));
        }
        for c in &cols[2..] {
            let _ = write!(s, ",{}", fmt6(c[idx] * 100.0));
        }
        s.push('\n');
    }
    s
}

/// Writes `industry_shocks.csv`, `occupation_shocks.csv` and a reduced
/// `aggregates.json` holding the aggregates, Venn cells and headline
/// quartile changes.
pub fn write_oracle_outputs(out: &OracleOutput, health_growth: bool, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("industry_shocks.csv"),
        shock_rows(
            "code,e,r,ISS,IDS,ITS,ITS_h,ISS_pct,IDS_pct,ITS_pct,ITS_h_pct",
            &out.industries,
            [&out.e, &out.r, &out.iss, &out.ids, &out.its, &out.its_health],
            &out.industries_without_employment,
        ),
    )?;
    fs::write(
        dir.join("occupation_shocks.csv"),
        shock_rows(
            "code,x,y,OSS,ODS,OTS,OTS_h,OSS_pct,ODS_pct,OTS_pct,OTS_h_pct",
            &out.occupations,
            [&out.x, &out.y, &out.oss, &out.ods, &out.ots, &out.ots_health],
            &[],
        ),
    )?;
    let a = out.aggregates.map(round6);
    let row = |v: usize| json!({"employment": a[3 * v], "wages": a[3 * v + 1], "value_added": a[3 * v + 2]});
    let doc = json!({
        "headline": if health_growth { "total_health" } else { "total" },
        "aggregates": {
            "supply": row(0),
            "demand": row(1),
            "total": row(2),
            "total_health": row(3),
        },
        "quartile_employment_change": out.quartiles.map(|q| q.map(round6)),
        "venn": {
            "non_essential": round6(out.venn[0]),
            "cannot_remote": round6(out.venn[1]),
            "intersection": round6(out.venn[2]),
            "essential_and_remote": round6(out.venn[3]),
        },
    });
    let mut bytes = serde_json::to_vec_pretty(&doc).map_err(io::Error::other)?;
    bytes.push(b'\n');
    fs::write(dir.join("aggregates.json"), bytes)
}
