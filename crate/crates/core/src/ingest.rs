//! CSV ingestion, unit normalization and declared level-shift adjustments.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseErrorKind, Result};
use crate::model::Target;
use crate::series::{AnnualSeries, Unit};

/// Minimum overlap, in years, between GDP and each rate series.
pub const MIN_OVERLAP_YEARS: usize = 12;

/// A definitional jump in a measured rate series, removed before estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelShift {
    pub series: Target,
    pub year: i32,
    /// Percentage points added to the series from `year` onwards.
    pub magnitude: f64,
}

/// Aligned inputs for one country.
///
/// Rate series are stored as measured; [`CountryDataset::adjusted_rate`]
/// returns the spliced series the estimator works on.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryDataset {
    pub country: String,
    pub gdp_per_capita: AnnualSeries,
    pub employment_rate: Option<AnnualSeries>,
    pub unemployment_rate: Option<AnnualSeries>,
    pub adjustments: Vec<LevelShift>,
    /// Free-text description of the GDP source (e.g. a price basis); not interpreted.
    pub gdp_variant: Option<String>,
}

impl CountryDataset {
    pub fn new(
        country: impl Into<String>,
        gdp_per_capita: AnnualSeries,
        employment_rate: Option<AnnualSeries>,
        unemployment_rate: Option<AnnualSeries>,
        adjustments: Vec<LevelShift>,
    ) -> Result<Self> {
        let country = country.into();
        if gdp_per_capita.unit() != Unit::CurrencyPerCapita {
            return Err(Error::InvalidSeries(format!(
                "{country}: GDP per capita must be {}, got {}",
                Unit::CurrencyPerCapita,
                gdp_per_capita.unit()
            )));
        }
        if employment_rate.is_none() && unemployment_rate.is_none() {
            return Err(Error::InvalidSeries(format!(
                "{country}: at least one of employment or unemployment rate is required"
            )));
        }
        for (target, rate) in [
            (Target::Employment, &employment_rate),
            (Target::Unemployment, &unemployment_rate),
        ] {
            let Some(rate) = rate else { continue };
            if rate.unit() != Unit::PercentPoints {
                return Err(Error::InvalidSeries(format!(
                    "{country}: {target} rate must be in {}, got {}",
                    Unit::PercentPoints,
                    rate.unit()
                )));
            }
            rate.check_rate_range()?;
            let from = rate.start_year().max(gdp_per_capita.start_year());
            let to = rate.end_year().min(gdp_per_capita.end_year());
            let overlap = (to - from + 1).max(0) as usize;
            if overlap < MIN_OVERLAP_YEARS {
                return Err(Error::InsufficientData {
                    needed: MIN_OVERLAP_YEARS,
                    got: overlap,
                });
            }
        }
        let ds = Self {
            country,
            gdp_per_capita,
            employment_rate,
            unemployment_rate,
            adjustments,
            gdp_variant: None,
        };
        for shift in &ds.adjustments {
            let Some(rate) = ds.rate(shift.series) else {
                return Err(Error::Alignment(format!(
                    "level shift targets missing {} series",
                    shift.series
                )));
            };
            check_shift_year(rate, shift)?;
        }
        Ok(ds)
    }

    pub fn rate(&self, target: Target) -> Option<&AnnualSeries> {
        match target {
            Target::Employment => self.employment_rate.as_ref(),
            Target::Unemployment => self.unemployment_rate.as_ref(),
        }
    }

    /// The measured rate with every declared level shift spliced out.
    pub fn adjusted_rate(&self, target: Target) -> Result<AnnualSeries> {
        let rate = self.rate(target).ok_or_else(|| {
            Error::InvalidSeries(format!("{}: no {target} rate series", self.country))
        })?;
        self.shifts_for(target)
            .try_fold(rate.clone(), |s, shift| apply_level_shift(&s, shift))
    }

    /// Puts the declared level shifts back into a series on the adjusted
    /// scale, for display next to measured data.
    pub fn restore_shifts(&self, target: Target, s: &AnnualSeries) -> Result<AnnualSeries> {
        let values = s
            .iter()
            .map(|(t, v)| {
                v + self
                    .shifts_for(target)
                    .filter(|sh| t >= sh.year)
                    .map(|sh| sh.magnitude)
                    .sum::<f64>()
            })
            .collect();
        AnnualSeries::new(s.start_year(), values, s.unit())
    }

    pub fn shifts_for(&self, target: Target) -> impl Iterator<Item = &LevelShift> + '_ {
        self.adjustments.iter().filter(move |s| s.series == target)
    }

    /// Returns a copy with GDP per capita multiplied by `factor`.
    pub fn with_scaled_gdp(&self, factor: f64) -> Result<Self> {
        Ok(Self {
            gdp_per_capita: self.gdp_per_capita.scaled(factor)?,
            ..self.clone()
        })
    }
}

fn check_shift_year(s: &AnnualSeries, shift: &LevelShift) -> Result<()> {
    if shift.year <= s.start_year() || shift.year > s.end_year() {
        return Err(Error::Alignment(format!(
            "level shift year {} must lie in {}-{} after the first year",
            shift.year,
            s.start_year(),
            s.end_year()
        )));
    }
    Ok(())
}

/// Parses `year,value` records with an optional `year,value` header line.
///
/// Records may arrive in any order; they are sorted by year and must then
/// form a contiguous run without duplicates.
pub fn parse_series_csv(text: &[u8], declared_unit: Unit) -> Result<AnnualSeries> {
    let text = std::str::from_utf8(text).map_err(|e| {
        let line = 1 + text[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count();
        Error::Parse {
            line,
            kind: ParseErrorKind::BadRecord("invalid UTF-8".into()),
        }
    })?;

    let mut records: Vec<(i32, f64, usize)> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        if records.is_empty() && raw.eq_ignore_ascii_case("year,value") {
            continue;
        }
        let mut fields = raw.split(',');
        let (Some(year), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line,
                kind: ParseErrorKind::BadRecord(raw.to_string()),
            });
        };
        let year: i32 = year.trim().parse().map_err(|_| Error::Parse {
            line,
            kind: ParseErrorKind::BadNumber(year.trim().to_string()),
        })?;
        let value: f64 = value
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::Parse {
                line,
                kind: ParseErrorKind::BadNumber(value.trim().to_string()),
            })?;
        records.push((year, value, line));
    }
    if records.is_empty() {
        return Err(Error::Parse {
            line: last_line.max(1),
            kind: ParseErrorKind::Empty,
        });
    }

    records.sort_by_key(|r| r.0);
    for pair in records.windows(2) {
        let ((prev, _, prev_line), (year, _, line)) = (pair[0], pair[1]);
        if year == prev {
            return Err(Error::Parse {
                line: line.max(prev_line),
                kind: ParseErrorKind::DuplicateYear(year),
            });
        }
        if year != prev + 1 {
            return Err(Error::Parse {
                line,
                kind: ParseErrorKind::Gap { missing: prev + 1 },
            });
        }
    }
    AnnualSeries::new(
        records[0].0,
        records.iter().map(|r| r.1).collect(),
        declared_unit,
    )
}

/// Writes a series as `year,value` CSV. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_series_csv(s: &AnnualSeries) -> String {
    let mut out = String::from("year,value\n");
    for (year, v) in s.iter() {
        out.push_str(&format!("{year},{v}\n"));
    }
    out
}

/// Converts between fractions and percentage points.
pub fn normalize_unit(s: &AnnualSeries, target: Unit) -> Result<AnnualSeries> {
    let factor = match (s.unit(), target) {
        (from, to) if from == to => return Ok(s.clone()),
        (Unit::Fraction, Unit::PercentPoints) => 100.0,
        (Unit::PercentPoints, Unit::Fraction) => 0.01,
        (from, to) => return Err(Error::Unit { from, to }),
    };
    AnnualSeries::new(
        s.start_year(),
        s.values().iter().map(|v| v * factor).collect(),
        target,
    )
}

/// Subtracts `shift.magnitude` from every value at or after `shift.year`.
pub fn apply_level_shift(s: &AnnualSeries, shift: &LevelShift) -> Result<AnnualSeries> {
    check_shift_year(s, shift)?;
    let values = s
        .iter()
        .map(|(t, v)| {
            if t >= shift.year {
                v - shift.magnitude
            } else {
                v
            }
        })
        .collect();
    AnnualSeries::new(s.start_year(), values, s.unit())
}

/// Location and unit of one input CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSource {
    pub path: PathBuf,
    pub unit: Unit,
}

/// JSON description of one country's inputs. Relative paths resolve
/// against the directory holding the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub country: String,
    #[serde(default)]
    pub gdp_variant: Option<String>,
    pub gdp_per_capita: SeriesSource,
    #[serde(default)]
    pub employment_rate: Option<SeriesSource>,
    #[serde(default)]
    pub unemployment_rate: Option<SeriesSource>,
    #[serde(default)]
    pub level_shifts: Vec<LevelShift>,
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load_source(src: &SeriesSource, base_dir: &Path, target_unit: Unit) -> Result<AnnualSeries> {
    let path = base_dir.join(&src.path);
    let bytes = read_file(&path)?;
    parse_series_csv(&bytes, src.unit)
        .and_then(|s| normalize_unit(&s, target_unit))
        .map_err(|e| e.in_file(path.display().to_string()))
}

impl DatasetManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn load(&self, base_dir: &Path) -> Result<CountryDataset> {
        let gdp = load_source(&self.gdp_per_capita, base_dir, Unit::CurrencyPerCapita)?;
        let emp = self
            .employment_rate
            .as_ref()
            .map(|s| load_source(s, base_dir, Unit::PercentPoints))
            .transpose()?;
        let unemp = self
            .unemployment_rate
            .as_ref()
            .map(|s| load_source(s, base_dir, Unit::PercentPoints))
            .transpose()?;
        let mut ds = CountryDataset::new(
            self.country.clone(),
            gdp,
            emp,
            unemp,
            self.level_shifts.clone(),
        )?;
        ds.gdp_variant = self.gdp_variant.clone();
        Ok(ds)
    }
}
