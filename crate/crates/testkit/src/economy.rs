//! Seeded synthetic economies.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two-digit NAICS sectors. Every generated industry code starts with one.
pub const SECTORS: [&str; 24] = [
    "11", "21", "22", "23", "31", "32", "33", "42", "44", "45", "48", "49", "51", "52", "53", "54", "55", "56", "61",
    "62", "71", "72", "81", "92",
];

const SOC_MAJOR: [&str; 22] = [
    "11", "13", "15", "17", "19", "21", "23", "25", "27", "29", "31", "33", "35", "37", "39", "41", "43", "45", "47",
    "49", "51", "53",
];

/// Axis sizes: industries `N`, occupations `J`, activities `I`, fine
/// industry codes `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub n: usize,
    pub j: usize,
    pub i: usize,
    pub k: usize,
}

impl Dims {
    pub fn new(n: usize, j: usize, i: usize, k: usize) -> Self {
        Self { n, j, i, k }
    }
}

impl std::str::FromStr for Dims {
    type Err = String;

    /// Parses `N,J,I,K`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [n, j, i, k] if n.min(j).min(i).min(k) >= 1 => Ok(Dims::new(n, j, i, k)),
            [_, _, _, _] => Err("every dimension must be at least 1".into()),
            _ => Err(format!("expected N,J,I,K, got {s:?}")),
        }
    }
}

/// All inputs of one run, as plain data. Integer-valued so that hand and
/// fraction arithmetic stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticEconomy {
    pub seed: u64,
    pub dims: Dims,
    pub degenerate: bool,
    /// Four-digit codes, sorted.
    pub industries: Vec<String>,
    /// Six-digit codes, sorted, each extending its parent industry's code.
    pub fine_codes: Vec<String>,
    pub fine_parent: Vec<usize>,
    /// Essential flag per fine code.
    pub essential: Vec<u8>,
    pub activities: Vec<String>,
    /// Rater votes per activity.
    pub votes: Vec<Vec<u8>>,
    pub consensus_threshold: usize,
    /// SOC codes like `13-2011`, sorted.
    pub occupations: Vec<String>,
    /// Sorted activity indices per occupation, never empty.
    pub links: Vec<Vec<usize>>,
    pub min_activities: usize,
    /// Employment counts, industries by occupations.
    pub employment: Vec<Vec<u64>>,
    pub mean_wage: Vec<Option<u64>>,
    pub median_wage: Vec<Option<u64>>,
    pub exposure: Vec<Option<u64>>,
    pub value_added: Vec<u64>,
    /// Demand shock in percent for each of [`SECTORS`].
    pub demand_pct: Vec<i64>,
    pub health_growth: bool,
}

fn distinct_codes(rng: &mut ChaCha8Rng, count: usize, mut draw: impl FnMut(&mut ChaCha8Rng) -> String) -> Vec<String> {
    let mut set = BTreeSet::new();
    while set.len() < count {
        set.insert(draw(rng));
    }
    set.into_iter().collect()
}

/// Generates an economy from `seed`. In degenerate mode one occupation has
/// no employment, one industry has no employment and (when there are at
/// least two) one has no fine codes, every fine code is essential, one
/// occupation has a single activity while `min_activities` is 2, and one
/// occupation has no wage data.
pub fn generate(seed: u64, dims: Dims, degenerate: bool) -> SyntheticEconomy {
    assert!(
        dims.n.min(dims.j).min(dims.i).min(dims.k) >= 1,
        "dims must be at least 1"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let Dims { n, j, i, k } = dims;

    let industries = distinct_codes(&mut rng, n, |r| {
        format!(
            "{}{:02}",
            SECTORS[r.random_range(0..SECTORS.len())],
            r.random_range(10..100)
        )
    });

    let orphan = (degenerate && n >= 2).then(|| rng.random_range(0..n));
    let parents: Vec<usize> = (0..n).filter(|&p| Some(p) != orphan).collect();
    assert!(k <= 90 * parents.len(), "too many fine codes for the industries");
    let mut fine: BTreeSet<(String, usize)> = BTreeSet::new();
    let mut used = BTreeSet::new();
    let mut per_parent = vec![0usize; n];
    for idx in 0..k {
        let mut parent = if idx < parents.len() {
            parents[idx]
        } else {
            parents[rng.random_range(0..parents.len())]
        };
        // Two-digit suffixes give 90 codes per industry.
        if per_parent[parent] >= 90 {
            parent = *parents.iter().find(|&&p| per_parent[p] < 90).expect("checked above");
        }
        per_parent[parent] += 1;
        loop {
            let suffix: u32 = rng.random_range(10..100);
            if used.insert((parent, suffix)) {
                fine.insert((format!("{}{suffix}", industries[parent]), parent));
                break;
            }
        }
    }
    let (fine_codes, fine_parent): (Vec<String>, Vec<usize>) = fine.into_iter().unzip();
    let essential = (0..k).map(|_| u8::from(degenerate || rng.random_bool(0.5))).collect();

    let raters = rng.random_range(3..=6usize);
    let activities: Vec<String> = (0..i).map(|a| format!("A{a:04}")).collect();
    let votes: Vec<Vec<u8>> = (0..i)
        .map(|_| (0..raters).map(|_| u8::from(rng.random_bool(0.5))).collect())
        .collect();
    let consensus_threshold = rng.random_range(1..=raters);

    let occupations = distinct_codes(&mut rng, j, |r| {
        format!(
            "{}-{}",
            SOC_MAJOR[r.random_range(0..SOC_MAJOR.len())],
            r.random_range(1000..10000)
        )
    });
    let single = degenerate.then(|| rng.random_range(0..j));
    let links: Vec<Vec<usize>> = (0..j)
        .map(|occ| {
            let size = if Some(occ) == single {
                1
            } else {
                rng.random_range(1..=i.min(8))
            };
            let mut l = sample(&mut rng, i, size).into_vec();
            l.sort_unstable();
            l
        })
        .collect();
    let min_activities = if degenerate { 2 } else { 1 };

    let mut employment: Vec<Vec<u64>> = (0..n)
        .map(|_| {
            (0..j)
                .map(|_| {
                    if rng.random_bool(0.7) {
                        rng.random_range(1..=500)
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    for row in &mut employment {
        if row.iter().all(|&c| c == 0) {
            let col = rng.random_range(0..j);
            row[col] = rng.random_range(1..=500);
        }
    }
    for col in 0..j {
        if employment.iter().all(|row| row[col] == 0) {
            let row = rng.random_range(0..n);
            employment[row][col] = rng.random_range(1..=500);
        }
    }
    if degenerate {
        let col = rng.random_range(0..j);
        employment.iter_mut().for_each(|row| row[col] = 0);
        if n >= 2 {
            let row = rng.random_range(0..n);
            employment[row].iter_mut().for_each(|c| *c = 0);
        }
    }

    let mut mean_wage: Vec<Option<u64>> = (0..j).map(|_| Some(rng.random_range(15..=150))).collect();
    let mut median_wage: Vec<Option<u64>> = mean_wage
        .iter()
        .map(|w| w.map(|w| w - rng.random_range(0..10)))
        .collect();
    let mut exposure: Vec<Option<u64>> = (0..j).map(|_| Some(rng.random_range(0..=100))).collect();
    if degenerate {
        let occ = rng.random_range(0..j);
        mean_wage[occ] = None;
        median_wage[occ] = None;
        exposure[occ] = None;
    }
    let value_added = (0..n).map(|_| rng.random_range(1..=10_000)).collect();
    let demand_pct = (0..SECTORS.len()).map(|_| rng.random_range(-80..=30)).collect();
    let health_growth = rng.random_bool(0.5);

    SyntheticEconomy {
        seed,
        dims,
        degenerate,
        industries,
        fine_codes,
        fine_parent,
        essential,
        activities,
        votes,
        consensus_threshold,
        occupations,
        links,
        min_activities,
        employment,
        mean_wage,
        median_wage,
        exposure,
        value_added,
        demand_pct,
        health_growth,
    }
}

/// Dimensions for economy number `index` of a test grid bounded by `max`.
pub fn grid_dims(index: u64, max: Dims) -> Dims {
    let mut rng = ChaCha8Rng::seed_from_u64(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    Dims::new(
        rng.random_range(1..=max.n),
        rng.random_range(1..=max.j),
        rng.random_range(1..=max.i),
        rng.random_range(1..=max.k),
    )
}
