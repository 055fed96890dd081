//! Two-segment integral Okun model.
//!
//! Within a segment anchored at year `a` with value `y_a`, the predicted
//! rate level is
//!
//! ```text
//! y_t = y_a + slope * 100 * ln(G_{t-k} / G_{a-k}) + trend * (t - a)
//! ```
//!
//! where `k` is the predictor lag. The first segment is anchored at the first
//! measured observation; the second is anchored at the break year with the
//! first segment's *prediction* there, so the fitted curve is continuous.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{diff, AnnualSeries, Unit};

/// Integration constant of the level form. It vanishes because the model is
/// exact at its anchor year, so it is never estimated.
pub const INTEGRATION_CONSTANT: f64 = 0.0;

/// Which labour-market rate a model explains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Unemployment,
    Employment,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Unemployment => "unemployment",
            Target::Employment => "employment",
        }
    }

    /// Sign the GDP slope is expected to carry: unemployment falls and
    /// employment rises with output growth.
    pub fn expected_slope_sign(self) -> f64 {
        match self {
            Target::Unemployment => -1.0,
            Target::Employment => 1.0,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "unemployment" => Ok(Target::Unemployment),
            "employment" => Ok(Target::Employment),
            other => Err(format!(
                "unknown target {other:?}, expected unemployment or employment"
            )),
        }
    }
}

/// One anchored piece of the integral model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Percentage points of the rate per percentage point of log GDP.
    pub slope: f64,
    /// Percentage points per year.
    pub trend: f64,
    pub anchor_year: i32,
    pub anchor_value: f64,
}

pub(crate) fn gdp_at(g: &AnnualSeries, year: i32) -> Result<f64> {
    g.get(year).ok_or_else(|| {
        Error::Alignment(format!(
            "GDP per capita covers {}-{}, {year} is required",
            g.start_year(),
            g.end_year()
        ))
    })
}

impl Segment {
    /// The two regressors for `year`: cumulative log growth since the anchor
    /// (percent) and elapsed years.
    pub fn regressors(&self, g: &AnnualSeries, lag: usize, year: i32) -> Result<(f64, f64)> {
        let k = lag as i32;
        let g_t = gdp_at(g, year - k)?;
        let g_a = gdp_at(g, self.anchor_year - k)?;
        Ok((100.0 * (g_t / g_a).ln(), f64::from(year - self.anchor_year)))
    }

    pub fn eval(&self, g: &AnnualSeries, lag: usize, year: i32) -> Result<f64> {
        let (x1, x2) = self.regressors(g, lag, year)?;
        Ok(self.anchor_value + INTEGRATION_CONSTANT + self.slope * x1 + self.trend * x2)
    }

    /// Predicted annual change of the rate for a given GDP growth (percent).
    pub fn change(&self, dlng: f64) -> f64 {
        self.trend + self.slope * dlng
    }

    /// GDP growth rate (percent per year) at which the predicted rate is
    /// stationary: `-trend / slope`.
    pub fn threshold(&self) -> Result<f64> {
        if self.slope == 0.0 {
            return Err(Error::Degenerate(
                "zero GDP slope has no growth threshold".into(),
            ));
        }
        Ok(-self.trend / self.slope)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedModel {
    pub target: Target,
    pub lag: usize,
    pub break_year: i32,
    pub segment1: Segment,
    pub segment2: Segment,
}

impl SegmentedModel {
    pub fn new(
        target: Target,
        lag: usize,
        break_year: i32,
        segment1: Segment,
        segment2: Segment,
    ) -> Result<Self> {
        if segment1.anchor_year >= break_year {
            return Err(Error::Config(format!(
                "first anchor {} must precede break year {break_year}",
                segment1.anchor_year
            )));
        }
        if segment2.anchor_year != break_year {
            return Err(Error::Config(format!(
                "second segment must be anchored at break year {break_year}, got {}",
                segment2.anchor_year
            )));
        }
        Ok(Self {
            target,
            lag,
            break_year,
            segment1,
            segment2,
        })
    }

    /// Builds a model whose second anchor is the first segment's prediction
    /// at the break year.
    pub fn chained(
        target: Target,
        lag: usize,
        break_year: i32,
        segment1: Segment,
        slope2: f64,
        trend2: f64,
        g: &AnnualSeries,
    ) -> Result<Self> {
        let anchor_value = segment1.eval(g, lag, break_year)?;
        let segment2 = Segment {
            slope: slope2,
            trend: trend2,
            anchor_year: break_year,
            anchor_value,
        };
        Self::new(target, lag, break_year, segment1, segment2)
    }

    pub fn segment_for(&self, year: i32) -> &Segment {
        if year < self.break_year {
            &self.segment1
        } else {
            &self.segment2
        }
    }

    /// Difference between the first segment extended to the break year and
    /// the second anchor. Zero for a chained model.
    pub fn continuity_gap(&self, g: &AnnualSeries) -> Result<f64> {
        Ok(self.segment1.eval(g, self.lag, self.break_year)? - self.segment2.anchor_value)
    }

    /// Slopes whose sign contradicts the target's expected direction.
    pub fn sign_warnings(&self) -> Vec<String> {
        let want = self.target.expected_slope_sign();
        [("segment1", &self.segment1), ("segment2", &self.segment2)]
            .iter()
            .filter(|(_, s)| s.slope * want < 0.0)
            .map(|(name, s)| {
                format!(
                    "{name} slope {} has the wrong sign for {}",
                    s.slope, self.target
                )
            })
            .collect()
    }
}

fn check_years(m: &SegmentedModel, years: &RangeInclusive<i32>) -> Result<()> {
    if years.is_empty() {
        return Err(Error::Alignment("empty year range".into()));
    }
    if *years.start() < m.segment1.anchor_year {
        return Err(Error::Alignment(format!(
            "requested years start {} before first anchor {}",
            years.start(),
            m.segment1.anchor_year
        )));
    }
    Ok(())
}

/// Predicted rate level for every year in `years`.
pub fn predict_level(
    m: &SegmentedModel,
    g: &AnnualSeries,
    years: RangeInclusive<i32>,
) -> Result<AnnualSeries> {
    check_years(m, &years)?;
    let start = *years.start();
    let values = years
        .map(|t| m.segment_for(t).eval(g, m.lag, t))
        .collect::<Result<Vec<_>>>()?;
    AnnualSeries::new(start, values, Unit::PercentPoints)
}

/// Predicted annual change of the rate for every year in `years`. The first
/// requested year must come after the first anchor.
pub fn predict_change(
    m: &SegmentedModel,
    g: &AnnualSeries,
    years: RangeInclusive<i32>,
) -> Result<AnnualSeries> {
    check_years(m, &years)?;
    let (from, to) = (*years.start(), *years.end());
    diff(&predict_level(m, g, from - 1..=to)?)
}

/// Splits the predicted level into a time-trend component and a GDP
/// component whose difference is the prediction:
/// `trend_t - gdp_t = y_t`, with `gdp_t = -slope * 100 * ln(G_t/G_0) - y_0`
/// accumulated across the break.
pub fn trend_components(
    m: &SegmentedModel,
    g: &AnnualSeries,
    years: RangeInclusive<i32>,
) -> Result<(AnnualSeries, AnnualSeries)> {
    check_years(m, &years)?;
    let start = *years.start();
    let s1 = &m.segment1;
    let s2 = &m.segment2;
    let trend_at_break = s1.trend * f64::from(m.break_year - s1.anchor_year);
    let mut trend = Vec::new();
    let mut gdp = Vec::new();
    for t in years {
        if t < m.break_year {
            let (x1, x2) = s1.regressors(g, m.lag, t)?;
            trend.push(s1.trend * x2);
            gdp.push(-s1.slope * x1 - s1.anchor_value);
        } else {
            let (x1, x2) = s2.regressors(g, m.lag, t)?;
            trend.push(trend_at_break + s2.trend * x2);
            // The GDP part accumulated before the break is whatever the second
            // anchor carries beyond the first trend.
            gdp.push(-(s2.anchor_value - trend_at_break) - s2.slope * x1);
        }
    }
    Ok((
        AnnualSeries::new(start, trend, Unit::PercentPoints)?,
        AnnualSeries::new(start, gdp, Unit::PercentPoints)?,
    ))
}
