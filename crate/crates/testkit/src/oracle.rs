//! Reference shocks by plain loops over a [`SyntheticEconomy`]. Nothing
//! here calls into the engine; only the data layout is shared.

#![allow(clippy::needless_range_loop)]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::economy::{SyntheticEconomy, SECTORS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    /// Every occupation was dropped.
    NoOccupations,
    NoEmployment,
    /// No retained occupation has a mean wage.
    NoWages,
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OracleError::NoOccupations => "no occupation retained",
            OracleError::NoEmployment => "retained employment is zero",
            OracleError::NoWages => "no retained occupation has a mean wage",
        })
    }
}

impl std::error::Error for OracleError {}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutput {
    pub industries: Vec<String>,
    /// Retained occupations.
    pub occupations: Vec<String>,
    pub dropped_fewer_activities: Vec<String>,
    pub dropped_zero_employment: Vec<String>,
    pub industries_without_employment: Vec<String>,
    pub zero_link_industries: Vec<String>,
    pub e: Vec<f64>,
    pub r: Vec<f64>,
    pub iss: Vec<f64>,
    pub ids: Vec<f64>,
    pub its: Vec<f64>,
    pub its_health: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub oss: Vec<f64>,
    pub ods: Vec<f64>,
    pub ots: Vec<f64>,
    pub ots_health: Vec<f64>,
    /// Employment, wages, value added for supply, demand, total and
    /// health-variant total, in that order.
    pub aggregates: [f64; 12],
    /// Non-essential, cannot work remotely, both, essential and remote.
    pub venn: [f64; 4],
    /// Employment change per wage quartile for the headline variant.
    pub quartiles: [Option<f64>; 4],
}

fn sector_shock(econ: &SyntheticEconomy, industry: &str) -> f64 {
    let s = SECTORS
        .iter()
        .position(|s| industry.starts_with(s))
        .expect("generated codes start with a sector");
    econ.demand_pct[s] as f64 / 100.0
}

pub fn oracle_shocks(econ: &SyntheticEconomy) -> Result<OracleOutput, OracleError> {
    let n_ind = econ.industries.len();

    // Essential score: share of an industry's fine codes flagged essential.
    let mut e = vec![0.0; n_ind];
    let mut zero_link_industries = Vec::new();
    for n in 0..n_ind {
        let mut links = 0u64;
        let mut flagged = 0u64;
        for (k, &p) in econ.fine_parent.iter().enumerate() {
            if p == n {
                links += 1;
                flagged += u64::from(econ.essential[k]);
            }
        }
        if links == 0 {
            zero_link_industries.push(econ.industries[n].clone());
        } else {
            e[n] = flagged as f64 / links as f64;
        }
    }

    // Consensus remote flags.
    let remote: Vec<bool> = econ
        .votes
        .iter()
        .map(|v| v.iter().map(|&x| x as usize).sum::<usize>() >= econ.consensus_threshold)
        .collect();

    // Occupation filter: enough activities, then positive employment.
    let mut retained = Vec::new();
    let mut dropped_fewer_activities = Vec::new();
    let mut dropped_zero_employment = Vec::new();
    for j in 0..econ.occupations.len() {
        if econ.links[j].len() < econ.min_activities {
            dropped_fewer_activities.push(econ.occupations[j].clone());
            continue;
        }
        let mut col = 0u64;
        for n in 0..n_ind {
            col += econ.employment[n][j];
        }
        if col == 0 {
            dropped_zero_employment.push(econ.occupations[j].clone());
        } else {
            retained.push(j);
        }
    }
    if retained.is_empty() {
        let any_linked = econ.links.iter().any(|l| l.len() >= econ.min_activities);
        return Err(if any_linked {
            OracleError::NoEmployment
        } else {
            OracleError::NoOccupations
        });
    }

    let jn = retained.len();
    let mut m = vec![vec![0u64; jn]; n_ind];
    for n in 0..n_ind {
        for (jj, &j) in retained.iter().enumerate() {
            m[n][jj] = econ.employment[n][j];
        }
    }
    let mut l = vec![0u64; jn];
    let mut row_tot = vec![0u64; n_ind];
    let mut total = 0u64;
    for n in 0..n_ind {
        for jj in 0..jn {
            l[jj] += m[n][jj];
            row_tot[n] += m[n][jj];
            total += m[n][jj];
        }
    }
    let industries_without_employment = (0..n_ind)
        .filter(|&n| row_tot[n] == 0)
        .map(|n| econ.industries[n].clone())
        .collect();

    // Occupation RLI: share of linked activities that are remote.
    let mut y = vec![0.0; jn];
    for (jj, &j) in retained.iter().enumerate() {
        let mut yes = 0u64;
        for &a in &econ.links[j] {
            yes += u64::from(remote[a]);
        }
        y[jj] = yes as f64 / econ.links[j].len() as f64;
    }

    // Industry RLI: employment-weighted over occupations.
    let mut r = vec![0.0; n_ind];
    for n in 0..n_ind {
        if row_tot[n] > 0 {
            let mut acc = 0.0;
            for jj in 0..jn {
                acc += m[n][jj] as f64 * y[jj];
            }
            r[n] = acc / row_tot[n] as f64;
        }
    }

    // Occupation essential score and demand: employment-weighted over
    // industries.
    let ids: Vec<f64> = econ.industries.iter().map(|c| sector_shock(econ, c)).collect();
    let mut x = vec![0.0; jn];
    let mut ods = vec![0.0; jn];
    for jj in 0..jn {
        let mut ex = 0.0;
        let mut dm = 0.0;
        for n in 0..n_ind {
            ex += m[n][jj] as f64 * e[n];
            dm += m[n][jj] as f64 * ids[n];
        }
        x[jj] = ex / l[jj] as f64;
        ods[jj] = dm / l[jj] as f64;
    }

    let mut iss = vec![0.0; n_ind];
    let mut its = vec![0.0; n_ind];
    let mut its_health = vec![0.0; n_ind];
    for n in 0..n_ind {
        iss[n] = -(1.0 - e[n]) * (1.0 - r[n]);
        its[n] = if iss[n] < ids[n] { iss[n] } else { ids[n] };
        its_health[n] = if ids[n] > 0.0 { ids[n] } else { its[n] };
    }
    let mut oss = vec![0.0; jn];
    let mut ots = vec![0.0; jn];
    let mut ots_health = vec![0.0; jn];
    for jj in 0..jn {
        oss[jj] = -(1.0 - x[jj]) * (1.0 - y[jj]);
        ots[jj] = if oss[jj] < ods[jj] { oss[jj] } else { ods[jj] };
        ots_health[jj] = if ods[jj] > 0.0 { ods[jj] + oss[jj] } else { ots[jj] };
    }

    // Aggregates.
    let mut bill = vec![0u64; jn];
    let mut bill_total = 0u64;
    for (jj, &j) in retained.iter().enumerate() {
        if let Some(w) = econ.mean_wage[j] {
            bill[jj] = l[jj] * w;
            bill_total += bill[jj];
        }
    }
    if retained.iter().all(|&j| econ.mean_wage[j].is_none()) {
        return Err(OracleError::NoWages);
    }
    let gdp: u64 = econ.value_added.iter().sum();
    let mut aggregates = [0.0; 12];
    let variants: [(&[f64], &[f64]); 4] = [(&oss, &iss), (&ods, &ids), (&ots, &its), (&ots_health, &its_health)];
    for (v, (occ, ind)) in variants.iter().enumerate() {
        let mut emp = 0.0;
        let mut wages = 0.0;
        for jj in 0..jn {
            emp += l[jj] as f64 / total as f64 * occ[jj];
            wages += bill[jj] as f64 / bill_total as f64 * occ[jj];
        }
        let mut va = 0.0;
        for n in 0..n_ind {
            va += econ.value_added[n] as f64 / gdp as f64 * ind[n];
        }
        aggregates[3 * v] = emp;
        aggregates[3 * v + 1] = wages;
        aggregates[3 * v + 2] = va;
    }

    // Venn cells.
    let mut venn = [0.0; 4];
    for n in 0..n_ind {
        for jj in 0..jn {
            let w = m[n][jj] as f64 / total as f64;
            venn[0] += w * (1.0 - e[n]);
            venn[1] += w * (1.0 - y[jj]);
            venn[2] += w * (1.0 - e[n]) * (1.0 - y[jj]);
            venn[3] += w * e[n] * y[jj];
        }
    }

    // Wage quartiles, placed by the midpoint of each occupation's
    // cumulative-employment interval in exact integer arithmetic.
    let headline = if econ.health_growth { &ots_health } else { &ots };
    let mut ranked: Vec<usize> = (0..jn).filter(|&jj| econ.mean_wage[retained[jj]].is_some()).collect();
    ranked.sort_by(|&a, &b| {
        let wa = econ.mean_wage[retained[a]];
        let wb = econ.mean_wage[retained[b]];
        wa.cmp(&wb)
            .then_with(|| econ.occupations[retained[a]].cmp(&econ.occupations[retained[b]]))
    });
    let covered: u64 = ranked.iter().map(|&jj| l[jj]).sum();
    let mut q_emp = [0u64; 4];
    let mut q_shock = [0.0; 4];
    let mut cum = 0u64;
    for &jj in &ranked {
        // quartile = ceil(4 * (cum + l/2) / covered) - 1
        let num = 2 * (2 * cum + l[jj]);
        let q = (num.div_ceil(covered) as i64 - 1).clamp(0, 3) as usize;
        cum += l[jj];
        q_emp[q] += l[jj];
        q_shock[q] += l[jj] as f64 * headline[jj];
    }
    let quartiles = std::array::from_fn(|q| (q_emp[q] > 0).then(|| q_shock[q] / q_emp[q] as f64));

    Ok(OracleOutput {
        industries: econ.industries.clone(),
        occupations: retained.iter().map(|&j| econ.occupations[j].clone()).collect(),
        dropped_fewer_activities,
        dropped_zero_employment,
        industries_without_employment,
        zero_link_industries,
        e,
        r,
        iss,
        ids,
        its,
        its_health,
        x,
        y,
        oss,
        ods,
        ots,
        ots_health,
        aggregates,
        venn,
        quartiles,
    })
}

/// Sample Pearson correlation from the textbook sums.
pub fn naive_pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..xs.len() {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Two-sided permutation p-value for zero correlation: the share of
/// shuffles of `ys` whose |r| reaches the observed |r|.
pub fn permutation_p_value(xs: &[f64], ys: &[f64], permutations: usize, seed: u64) -> f64 {
    let observed = naive_pearson(xs, ys).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = ys.to_vec();
    let mut hits = 0usize;
    for _ in 0..permutations {
        shuffled.shuffle(&mut rng);
        if naive_pearson(xs, &shuffled).abs() >= observed - 1e-12 {
            hits += 1;
        }
    }
    (hits + 1) as f64 / (permutations + 1) as f64
}
