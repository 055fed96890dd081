//! GDP-per-capita growth scenarios and rate projections through a fitted model.
//!
//! A constant annual increment `C` is the closed-form long-run solution of
//! growth inversely proportional to the attained level, `dlnG/dt = C/G`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::CountryDataset;
use crate::model::{predict_level, SegmentedModel};
use crate::series::{log_growth, AnnualSeries, Unit};

/// Relative tolerance on the GDP value at the splice year.
pub const SPLICE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GrowthRule {
    /// `G_t = G_0 + C (t - t_0)`, currency per year.
    ConstantIncrement { increment: f64 },
    /// `G_t = G_0 exp(r (t - t_0))`, log rate per year.
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthScenario {
    pub rule: GrowthRule,
    pub start_year: i32,
    pub start_value: f64,
    pub horizon_year: i32,
}

impl GrowthScenario {
    /// A horizon equal to the start year is allowed and yields the splice
    /// point alone.
    pub fn new(
        rule: GrowthRule,
        start_year: i32,
        start_value: f64,
        horizon_year: i32,
    ) -> Result<Self> {
        if horizon_year < start_year {
            return Err(Error::Config(format!(
                "horizon {horizon_year} precedes scenario start {start_year}"
            )));
        }
        if start_value.is_nan() || start_value <= 0.0 {
            return Err(Error::Domain {
                year: start_year,
                value: start_value,
            });
        }
        Ok(Self {
            rule,
            start_year,
            start_value,
            horizon_year,
        })
    }

    /// Scenario starting from the last observation of `gdp`.
    pub fn from_history(rule: GrowthRule, gdp: &AnnualSeries, horizon_year: i32) -> Result<Self> {
        Self::new(rule, gdp.end_year(), gdp.last(), horizon_year)
    }
}

pub fn gdp_path(s: &GrowthScenario) -> Result<AnnualSeries> {
    let values = (s.start_year..=s.horizon_year)
        .map(|t| {
            let dt = f64::from(t - s.start_year);
            let v = match s.rule {
                GrowthRule::ConstantIncrement { increment } => s.start_value + increment * dt,
                GrowthRule::Exponential { rate } => s.start_value * (rate * dt).exp(),
            };
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Domain { year: t, value: v })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    AnnualSeries::new(s.start_year, values, Unit::CurrencyPerCapita)
}

/// Annual log growth of a GDP path, in percent per year. For a
/// constant-increment path this tracks `100 C / G`.
pub fn implied_growth_rate(path: &AnnualSeries) -> Result<AnnualSeries> {
    log_growth(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// Historical GDP followed by the scenario path.
    pub gdp: AnnualSeries,
    /// Projected rate from the splice year to the horizon, in measured units.
    pub rate: AnnualSeries,
    /// Years where the raw projection left [0, 100] and was clipped.
    pub clipped: Vec<bool>,
}

impl Projection {
    pub fn any_clipped(&self) -> bool {
        self.clipped.iter().any(|&c| c)
    }
}

fn splice(history: &AnnualSeries, s: &GrowthScenario) -> Result<AnnualSeries> {
    if s.start_year != history.end_year() {
        return Err(Error::Alignment(format!(
            "scenario starts in {} but GDP history ends in {}",
            s.start_year,
            history.end_year()
        )));
    }
    let last = history.last();
    if (s.start_value - last).abs() > SPLICE_TOLERANCE * last.abs() {
        return Err(Error::Alignment(format!(
            "scenario start value {} differs from final GDP observation {last}",
            s.start_value
        )));
    }
    let path = gdp_path(s)?;
    if path.len() == 1 {
        return Ok(history.clone());
    }
    history.concat(&path.slice(s.start_year + 1..=s.horizon_year)?)
}

/// Extends GDP with the scenario path and evaluates the model from the
/// splice year to the horizon with the second segment's coefficients.
pub fn project_rate(
    m: &SegmentedModel,
    history: &CountryDataset,
    s: &GrowthScenario,
) -> Result<Projection> {
    let gdp = splice(&history.gdp_per_capita, s)?;
    let raw = predict_level(m, &gdp, s.start_year..=s.horizon_year)?;
    let raw = history.restore_shifts(m.target, &raw)?;
    let clipped: Vec<bool> = raw
        .values()
        .iter()
        .map(|v| !(0.0..=100.0).contains(v))
        .collect();
    let rate = AnnualSeries::new(
        raw.start_year(),
        raw.values().iter().map(|v| v.clamp(0.0, 100.0)).collect(),
        Unit::PercentPoints,
    )?;
    Ok(Projection { gdp, rate, clipped })
}

/// Post-break prediction had the first segment's time trend persisted,
/// keeping the second segment's GDP slope. Values are on the estimation
/// scale (level shifts not restored).
pub fn counterfactual_trend(m: &SegmentedModel, history: &CountryDataset) -> Result<AnnualSeries> {
    let rate = history.rate(m.target).ok_or_else(|| {
        Error::InvalidSeries(format!("{}: no {} rate series", history.country, m.target))
    })?;
    let end = rate
        .end_year()
        .min(history.gdp_per_capita.end_year() + m.lag as i32);
    if end < m.break_year {
        return Err(Error::Alignment(format!(
            "no data after break year {}",
            m.break_year
        )));
    }
    let actual = predict_level(m, &history.gdp_per_capita, m.break_year..=end)?;
    let extra = m.segment1.trend - m.segment2.trend;
    let values = actual
        .iter()
        .map(|(t, v)| v + extra * f64::from(t - m.break_year))
        .collect();
    AnnualSeries::new(m.break_year, values, Unit::PercentPoints)
}
