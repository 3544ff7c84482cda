//! Back-of-envelope labor-supply losses from sickness and death.

use super::{Result, ScenarioError};

pub const DEFAULT_WEEKS_PER_YEAR: f64 = 48.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpidemicParams {
    /// Share of the population infected.
    pub attack_rate: f64,
    /// Share of infected who die.
    pub fatality: f64,
    /// Weeks of work lost by an infected survivor.
    pub weeks_out: f64,
    pub weeks_per_year: f64,
}

impl EpidemicParams {
    pub fn new(attack_rate: f64, fatality: f64, weeks_out: f64) -> Result<Self> {
        Self {
            attack_rate,
            fatality,
            weeks_out,
            weeks_per_year: DEFAULT_WEEKS_PER_YEAR,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.attack_rate) || !unit.contains(&self.fatality) {
            return Err(ScenarioError::BadParams(format!(
                "attack rate {} and fatality {} must lie in [0, 1]",
                self.attack_rate, self.fatality
            )));
        }
        if !(self.weeks_out > 0.0 && self.weeks_out <= self.weeks_per_year) {
            return Err(ScenarioError::BadParams(format!(
                "weeks out {} must lie in (0, {}]",
                self.weeks_out, self.weeks_per_year
            )));
        }
        Ok(self)
    }
}

/// Permanent fall in the labor force: attack rate times fatality.
pub fn labor_loss_mortality(p: &EpidemicParams) -> f64 {
    p.attack_rate * p.fatality
}

/// Annualized fall in labor supply from survivors being off work,
/// `(weeks_out / weeks_per_year) * (attack_rate - deaths_share)`.
///
/// `deaths_share` is taken as given; `attack_rate * fatality` is the
/// consistent choice.
pub fn labor_loss_morbidity(p: &EpidemicParams, deaths_share: f64) -> Result<f64> {
    let p = p.validated()?;
    if !(0.0..=p.attack_rate).contains(&deaths_share) {
        return Err(ScenarioError::BadShare(format!(
            "deaths share {deaths_share} must lie in [0, attack rate {}]",
            p.attack_rate
        )));
    }
    Ok(p.weeks_out / p.weeks_per_year * (p.attack_rate - deaths_share))
}

/// Attack rate implied by confirmed cases, scaled for cases still to come
/// and for undetected infections.
pub fn attack_rate_estimate(
    confirmed: u64,
    population: u64,
    peak_doubling: f64,
    underascertainment: f64,
) -> Result<f64> {
    if population == 0 {
        return Err(ScenarioError::BadCount("population must be positive".into()));
    }
    if !(peak_doubling >= 1.0 && underascertainment >= 1.0) {
        return Err(ScenarioError::BadCount(format!(
            "scaling factors must be >= 1, got {peak_doubling} and {underascertainment}"
        )));
    }
    Ok(confirmed as f64 * peak_doubling * underascertainment / population as f64)
}
