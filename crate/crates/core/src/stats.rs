use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Pearson correlation with a two-sided p-value from the t statistic
/// `rho * sqrt((n - 2) / (1 - rho^2))` on `n - 2` degrees of freedom.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<Correlation, StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::DegenerateInput(format!(
            "lengths differ ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 3 {
        return Err(StatsError::DegenerateInput(format!("need at least 3 points, got {n}")));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateInput("constant vector".into()));
    }
    let rho = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p_value = if rho.abs() == 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        (2.0 * dist.cdf(-t.abs())).min(1.0)
    };
    Ok(Correlation { rho, p_value, n })
}

/// Pearson over pairs where both values are present.
pub fn pearson_present(xs: &[Option<f64>], ys: &[Option<f64>]) -> Result<Correlation, StatsError> {
    let (a, b): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).filter_map(|(x, y)| Some(((*x)?, (*y)?))).unzip();
    pearson(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Two-sided tail of the t distribution by composite Simpson
    /// integration of the density over `[0, |t|]`.
    fn simpson_two_sided(t: f64, df: f64) -> f64 {
        let ln_gamma = |x: f64| statrs::function::gamma::ln_gamma(x);
        let c = (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0)).exp() / (df * PI).sqrt();
        let density = |u: f64| c * (1.0 + u * u / df).powf(-(df + 1.0) / 2.0);
        let steps = 20_000;
        let h = t.abs() / steps as f64;
        let mut acc = density(0.0) + density(t.abs());
        for i in 1..steps {
            acc += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        1.0 - 2.0 * acc * h / 3.0
    }

    #[test]
    fn small_example() {
        let c = pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert!((c.rho - 0.6).abs() < 1e-15);
        let t = 0.6 * (2.0f64 / (1.0 - 0.36)).sqrt();
        let oracle = simpson_two_sided(t, 2.0);
        assert!((c.p_value - oracle).abs() < 1e-10);
        // df = 2 has a closed form: p = 1 - t / sqrt(2 + t^2).
        assert!((c.p_value - (1.0 - t / (2.0 + t * t).sqrt())).abs() < 1e-12);
        assert!((c.p_value - 0.4).abs() < 1e-12);
    }

    #[test]
    fn identical_vectors() {
        let xs: Vec<f64> = (0..10).map(|i| (i * i) as f64).collect();
        let c = pearson(&xs, &xs).unwrap();
        assert_eq!(c.rho, 1.0);
        assert!(c.p_value < 1e-12);
    }

    #[test]
    fn against_quadrature_at_larger_df() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0, 3.0, 9.0, 6.0, 0.5, 2.5, 4.5];
        let ys = [2.0, 3.0, 1.0, 7.0, 2.0, 9.0, 4.0, 6.0, 8.0, 1.5, 0.5, 3.5];
        let c = pearson(&xs, &ys).unwrap();
        let df = (xs.len() - 2) as f64;
        let t = c.rho * (df / (1.0 - c.rho * c.rho)).sqrt();
        assert!((c.p_value - simpson_two_sided(t, df)).abs() < 1e-9);
    }

    #[test]
    fn degenerate() {
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        let c = pearson_present(
            &[Some(1.0), None, Some(2.0), Some(3.0)],
            &[Some(2.0), Some(5.0), Some(1.0), Some(4.0)],
        )
        .unwrap();
        assert_eq!(c.n, 3);
    }

    proptest! {
        #[test]
        fn symmetric_and_affine_invariant(
            pairs in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..40),
            scale in 0.1f64..10.0, shift in -100.0f64..100.0,
        ) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let Ok(a) = pearson(&xs, &ys) else { return Ok(()) };
            let b = pearson(&ys, &xs).unwrap();
            prop_assert!((a.rho - b.rho).abs() < 1e-12);
            prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
            let moved: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            let c = pearson(&moved, &ys).unwrap();
            prop_assert!((a.rho - c.rho).abs() < 1e-9);
            prop_assert!((a.p_value - c.p_value).abs() < 1e-8);
            prop_assert!((0.0..=1.0).contains(&a.p_value));
        }
    }
}
