//! Year-indexed annual series and the elementary transforms built on them.
//!
//! Rates (unemployment, employment, and their annual changes) are carried in
//! percentage points. Log-growth is 100 times the exact log difference, so a
//! cumulative sum of log-growth telescopes to `100 * ln(G_t / G_0)`.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Unit {
    PercentPoints,
    Fraction,
    CurrencyPerCapita,
    LogPoints,
    /// Annual change of a currency-per-capita series; may be zero or negative.
    CurrencyChange,
}

impl Unit {
    pub fn as_str(self) -> &'static str {
        match self {
            Unit::PercentPoints => "percent-points",
            Unit::Fraction => "fraction",
            Unit::CurrencyPerCapita => "currency-per-capita",
            Unit::LogPoints => "log-points",
            Unit::CurrencyChange => "currency-change",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "percent-points" => Ok(Unit::PercentPoints),
            "fraction" => Ok(Unit::Fraction),
            "currency-per-capita" => Ok(Unit::CurrencyPerCapita),
            "log-points" => Ok(Unit::LogPoints),
            "currency-change" => Ok(Unit::CurrencyChange),
            other => Err(format!("unknown unit {other:?}")),
        }
    }
}

/// Contiguous annual observations starting at `start_year`.
///
/// Construction rejects empty or non-finite data, and non-positive values for
/// [`Unit::CurrencyPerCapita`] so that logarithms are always defined.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnualSeries {
    start_year: i32,
    values: Vec<f64>,
    unit: Unit,
}

impl AnnualSeries {
    pub fn new(start_year: i32, values: Vec<f64>, unit: Unit) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        for (i, &v) in values.iter().enumerate() {
            let year = start_year + i as i32;
            if !v.is_finite() {
                return Err(Error::InvalidSeries(format!("non-finite value in {year}")));
            }
            if unit == Unit::CurrencyPerCapita && v <= 0.0 {
                return Err(Error::Domain { year, value: v });
            }
        }
        Ok(Self {
            start_year,
            values,
            unit,
        })
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.values.len() as i32 - 1
    }

    pub fn years(&self) -> RangeInclusive<i32> {
        self.start_year..=self.end_year()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false for a constructed series; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn contains_year(&self, year: i32) -> bool {
        self.years().contains(&year)
    }

    pub fn get(&self, year: i32) -> Option<f64> {
        if self.contains_year(year) {
            Some(self.values[(year - self.start_year) as usize])
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.start_year + i as i32, v))
    }

    /// Sub-series covering `years`, which must lie inside this series.
    pub fn slice(&self, years: RangeInclusive<i32>) -> Result<Self> {
        let (from, to) = (*years.start(), *years.end());
        if from > to || !self.contains_year(from) || !self.contains_year(to) {
            return Err(Error::Alignment(format!(
                "requested {from}-{to} outside series range {}-{}",
                self.start_year,
                self.end_year()
            )));
        }
        let lo = (from - self.start_year) as usize;
        let hi = (to - self.start_year) as usize;
        Ok(Self {
            start_year: from,
            values: self.values[lo..=hi].to_vec(),
            unit: self.unit,
        })
    }

    /// Multiplies every value by `factor`, keeping the unit.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.start_year,
            self.values.iter().map(|v| v * factor).collect(),
            self.unit,
        )
    }

    /// Appends `other`, which must start on the year after this series ends.
    pub fn concat(&self, other: &AnnualSeries) -> Result<Self> {
        if other.start_year != self.end_year() + 1 {
            return Err(Error::Alignment(format!(
                "cannot append series starting {} to series ending {}",
                other.start_year,
                self.end_year()
            )));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        Self::new(self.start_year, values, self.unit)
    }

    /// Checks that a rate series stays within [0, 100] percentage points.
    pub fn check_rate_range(&self) -> Result<()> {
        if self.unit != Unit::PercentPoints {
            return Ok(());
        }
        match self.iter().find(|(_, v)| !(0.0..=100.0).contains(v)) {
            Some((year, v)) => Err(Error::InvalidSeries(format!(
                "rate {v} in {year} outside [0, 100] percentage points"
            ))),
            None => Ok(()),
        }
    }
}

fn require_len(s: &AnnualSeries, needed: usize) -> Result<()> {
    if s.len() < needed {
        Err(Error::InsufficientData {
            needed,
            got: s.len(),
        })
    } else {
        Ok(())
    }
}

/// Annual growth `100 * (ln g_t - ln g_{t-1})`, in percent per year.
pub fn log_growth(g: &AnnualSeries) -> Result<AnnualSeries> {
    require_len(g, 2)?;
    if let Some((year, value)) = g.iter().find(|(_, v)| *v <= 0.0) {
        return Err(Error::Domain { year, value });
    }
    let values = g
        .values
        .windows(2)
        .map(|w| 100.0 * (w[1].ln() - w[0].ln()))
        .collect();
    AnnualSeries::new(g.start_year + 1, values, Unit::PercentPoints)
}

/// First difference `s_t - s_{t-1}`, indexed by the later year.
pub fn diff(s: &AnnualSeries) -> Result<AnnualSeries> {
    require_len(s, 2)?;
    let values = s.values.windows(2).map(|w| w[1] - w[0]).collect();
    let unit = match s.unit {
        Unit::CurrencyPerCapita => Unit::CurrencyChange,
        u => u,
    };
    AnnualSeries::new(s.start_year + 1, values, unit)
}

/// Integrates annual increments from an initial condition one year before
/// the first increment.
pub fn cumsum(
    increments: &AnnualSeries,
    anchor_year: i32,
    anchor_value: f64,
) -> Result<AnnualSeries> {
    if anchor_year != increments.start_year - 1 {
        return Err(Error::Alignment(format!(
            "anchor year {anchor_year} must immediately precede first increment year {}",
            increments.start_year
        )));
    }
    let mut values = Vec::with_capacity(increments.len() + 1);
    values.push(anchor_value);
    let mut level = anchor_value;
    for &dx in &increments.values {
        level += dx;
        values.push(level);
    }
    AnnualSeries::new(anchor_year, values, increments.unit)
}

/// Re-indexes `s` forward by `k` years: the value observed in year `t`
/// becomes the regressor for year `t + k`.
pub fn lag(s: &AnnualSeries, k: usize) -> Result<AnnualSeries> {
    if k >= s.len() {
        return Err(Error::InsufficientData {
            needed: k + 1,
            got: s.len(),
        });
    }
    Ok(AnnualSeries {
        start_year: s.start_year + k as i32,
        values: s.values.clone(),
        unit: s.unit,
    })
}

/// Restricts both series to their common years.
pub fn align(a: &AnnualSeries, b: &AnnualSeries) -> Result<(AnnualSeries, AnnualSeries)> {
    let from = a.start_year.max(b.start_year);
    let to = a.end_year().min(b.end_year());
    if from > to {
        return Err(Error::Alignment(format!(
            "no common years between {}-{} and {}-{}",
            a.start_year,
            a.end_year(),
            b.start_year,
            b.end_year()
        )));
    }
    Ok((a.slice(from..=to)?, b.slice(from..=to)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pp(start: i32, v: &[f64]) -> AnnualSeries {
        AnnualSeries::new(start, v.to_vec(), Unit::PercentPoints).unwrap()
    }

    fn gdp(start: i32, v: &[f64]) -> AnnualSeries {
        AnnualSeries::new(start, v.to_vec(), Unit::CurrencyPerCapita).unwrap()
    }

    #[test]
    fn rejects_empty_and_nonpositive_currency() {
        assert!(matches!(
            AnnualSeries::new(1970, vec![], Unit::Fraction),
            Err(Error::InsufficientData { .. })
        ));
        assert_eq!(
            AnnualSeries::new(1970, vec![1.0, 0.0], Unit::CurrencyPerCapita),
            Err(Error::Domain {
                year: 1971,
                value: 0.0
            })
        );
    }

    #[test]
    fn log_growth_of_constant_is_zero() {
        let g = log_growth(&gdp(2000, &[100.0, 100.0, 100.0])).unwrap();
        assert_eq!(g.values(), &[0.0, 0.0]);
        assert_eq!(g.start_year(), 2001);
        assert_eq!(g.unit(), Unit::PercentPoints);
    }

    #[test]
    fn log_growth_of_exponential_path_is_constant() {
        let g0 = 15_000.0;
        let path: Vec<f64> = (0..61).map(|t| g0 * (0.0209 * t as f64).exp()).collect();
        let g = log_growth(&gdp(1950, &path)).unwrap();
        for v in g.values() {
            assert!((v - 2.09).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn log_growth_small_step_matches_high_precision_value() {
        // 100 * ln(102.02 / 100), evaluated with 40-digit arithmetic.
        let expected = 1.999_868_650_668_912_7;
        let g = log_growth(&gdp(2000, &[100.0, 102.02])).unwrap();
        assert!((g.values()[0] - expected).abs() < 1e-13);
    }

    #[test]
    fn log_growth_errors() {
        assert_eq!(
            log_growth(&gdp(2000, &[100.0])),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        );
        // A non-currency series can hold non-positive values; log_growth must still reject them.
        let s = AnnualSeries::new(2000, vec![1.0, -1.0], Unit::Fraction).unwrap();
        assert_eq!(
            log_growth(&s),
            Err(Error::Domain {
                year: 2001,
                value: -1.0
            })
        );
    }

    #[test]
    fn diff_examples() {
        let d = diff(&pp(2000, &[5.0, 7.0, 6.0])).unwrap();
        assert_eq!(d.values(), &[2.0, -1.0]);
        assert_eq!(d.start_year(), 2001);
        assert_eq!(diff(&pp(2000, &[3.0; 4])).unwrap().values(), &[0.0; 3]);
        assert!(matches!(
            diff(&pp(2000, &[1.0])),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn cumsum_examples() {
        let inc = pp(2001, &[1.0, 1.0, 1.0]);
        let c = cumsum(&inc, 2000, 5.0).unwrap();
        assert_eq!(c.values(), &[5.0, 6.0, 7.0, 8.0]);
        assert_eq!(c.start_year(), 2000);
        assert!(matches!(cumsum(&inc, 2001, 5.0), Err(Error::Alignment(_))));
    }

    #[test]
    fn lag_examples() {
        let s = pp(1970, &[1.0, 2.0]);
        assert_eq!(lag(&s, 0).unwrap(), s);
        let l = lag(&s, 1).unwrap();
        assert_eq!(l.start_year(), 1971);
        assert_eq!(l.get(1972), Some(2.0));
        assert!(matches!(lag(&s, 2), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn align_examples() {
        let a = pp(1948, &[1.0; 63]);
        let b = pp(1970, &[2.0; 41]);
        let (x, y) = align(&a, &b).unwrap();
        assert_eq!((x.years(), y.years()), (1970..=2010, 1970..=2010));

        let (x, y) = align(&b, &b).unwrap();
        assert_eq!((&x, &y), (&b, &b));

        let a = pp(1950, &[1.0; 41]);
        let b = pp(1980, &[2.0; 31]);
        let (x, y) = align(&a, &b).unwrap();
        assert_eq!((x.years(), y.years()), (1980..=1990, 1980..=1990));

        let c = pp(2020, &[1.0]);
        assert!(matches!(align(&a, &c), Err(Error::Alignment(_))));
    }

    #[test]
    fn rate_range_check() {
        assert!(pp(2000, &[0.0, 100.0]).check_rate_range().is_ok());
        assert!(pp(2000, &[-0.1]).check_rate_range().is_err());
    }

    fn series_strategy() -> impl Strategy<Value = AnnualSeries> {
        (1900i32..2000, prop::collection::vec(-50.0f64..50.0, 2..80))
            .prop_map(|(y, v)| AnnualSeries::new(y, v, Unit::PercentPoints).unwrap())
    }

    proptest! {
        #[test]
        fn cumsum_diff_round_trip(s in series_strategy()) {
            let back = cumsum(&diff(&s).unwrap(), s.start_year(), s.first()).unwrap();
            prop_assert_eq!(back.years(), s.years());
            for (a, b) in back.values().iter().zip(s.values()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn diff_cumsum_round_trip(x in series_strategy(), x0 in -10.0f64..10.0) {
            let c = cumsum(&x, x.start_year() - 1, x0).unwrap();
            prop_assert_eq!(c.len(), x.len() + 1);
            let d = diff(&c).unwrap();
            prop_assert_eq!(d.years(), x.years());
            for (a, b) in d.values().iter().zip(x.values()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn log_growth_scale_invariant(
            v in prop::collection::vec(1.0f64..1e5, 2..60),
            c in 1e-3f64..1e3,
        ) {
            let g = gdp(1950, &v);
            let a = log_growth(&g).unwrap();
            let b = log_growth(&g.scaled(c).unwrap()).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }

        #[test]
        fn diff_and_lag_commute(s in series_strategy(), k in 0usize..2) {
            prop_assume!(s.len() > k + 1);
            let a = lag(&diff(&s).unwrap(), k).unwrap();
            let b = diff(&lag(&s, k).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
