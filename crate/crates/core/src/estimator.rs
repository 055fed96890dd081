//! Least-squares estimation of the two-segment model on rate levels.
//!
//! Each segment is an anchored regression with two regressors and no free
//! intercept. Segment 1 is anchored at the first measured observation,
//! segment 2 at segment 1's prediction for the break year. The break year and
//! predictor lag are chosen by exhaustive search over a grid, minimising the
//! sum of squared level residuals over the whole fit window.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::ingest::CountryDataset;
use crate::model::{predict_level, Segment, SegmentedModel, Target};
use crate::series::{align, diff, AnnualSeries, Unit};

/// Estimated coefficients: two per segment. Anchors are not counted; the
/// first is data and the second is derived.
pub const N_PARAMS: usize = 4;

/// Scaled-determinant tolerance for the 2x2 normal matrix.
pub const DET_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub break_grid: RangeInclusive<i32>,
    pub lag_candidates: Vec<usize>,
    /// Observations per segment, not counting the segment's anchor year.
    pub min_segment_obs: usize,
    pub target: Target,
}

impl FitConfig {
    pub fn new(target: Target) -> Self {
        Self {
            break_grid: 1975..=1995,
            lag_candidates: vec![0, 1],
            min_segment_obs: 5,
            target,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.break_grid.is_empty() {
            return Err(Error::Config(format!(
                "empty break grid {}-{}",
                self.break_grid.start(),
                self.break_grid.end()
            )));
        }
        if self.lag_candidates.is_empty() {
            return Err(Error::Config("no lag candidates".into()));
        }
        if self.min_segment_obs < 3 {
            return Err(Error::Config(format!(
                "min_segment_obs must be at least 3, got {}",
                self.min_segment_obs
            )));
        }
        Ok(())
    }

    fn sorted_lags(&self) -> Vec<usize> {
        let mut lags = self.lag_candidates.clone();
        lags.sort_unstable();
        lags.dedup();
        lags
    }
}

/// Outcome of one (break year, lag) candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub break_year: i32,
    pub lag: usize,
    /// Total level SSE, or the reason the candidate was inadmissible.
    pub outcome: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitStats {
    pub r_squared: f64,
    pub std_error: f64,
    pub sse: f64,
    pub residuals: AnnualSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: SegmentedModel,
    pub r_squared: f64,
    pub std_error: f64,
    pub sse: f64,
    pub residuals: AnnualSeries,
    /// Target rate after level-shift adjustment, over the fit window.
    pub measured: AnnualSeries,
    pub predicted: AnnualSeries,
    /// Best SSE over lags for each admissible break year.
    pub sse_by_break: BTreeMap<i32, f64>,
    pub grid: Vec<GridPoint>,
    pub n_obs: usize,
    pub warnings: Vec<String>,
}

impl FitReport {
    pub fn fit_window(&self) -> RangeInclusive<i32> {
        self.measured.years()
    }
}

/// Anchored two-regressor least squares for one segment.
///
/// Regresses `y_t - anchor_value` on `100 ln(G_{t-lag} / G_{anchor_year-lag})`
/// and `t - anchor_year` over `window`, without an intercept.
pub fn fit_segment(
    y: &AnnualSeries,
    g: &AnnualSeries,
    anchor_year: i32,
    anchor_value: f64,
    lag: usize,
    window: RangeInclusive<i32>,
    min_obs: usize,
) -> Result<Segment> {
    let mut seg = Segment {
        slope: 0.0,
        trend: 0.0,
        anchor_year,
        anchor_value,
    };
    let informative = window.clone().filter(|&t| t != anchor_year).count();
    if informative < min_obs {
        return Err(Error::InsufficientData {
            needed: min_obs,
            got: informative,
        });
    }

    let (mut s11, mut s12, mut s22, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for t in window {
        let y_t = y
            .get(t)
            .ok_or_else(|| Error::Alignment(format!("target series has no observation for {t}")))?;
        let (x1, x2) = seg.regressors(g, lag, t)?;
        let dy = y_t - anchor_value;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        s1y += x1 * dy;
        s2y += x2 * dy;
    }

    let det = s11 * s22 - s12 * s12;
    let scale = s11 * s22;
    if scale == 0.0 || det / scale <= DET_TOLERANCE {
        return Err(Error::RankDeficient(format!(
            "GDP and time regressors are collinear (scaled determinant {:e})",
            if scale == 0.0 { 0.0 } else { det / scale }
        )));
    }
    seg.slope = (s22 * s1y - s12 * s2y) / det;
    seg.trend = (s11 * s2y - s12 * s1y) / det;
    Ok(seg)
}

/// Coefficient of determination, standard error with `n - n_params` degrees
/// of freedom, and residuals `measured - predicted`.
pub fn fit_stats(
    measured: &AnnualSeries,
    predicted: &AnnualSeries,
    n_params: usize,
) -> Result<FitStats> {
    if measured.years() != predicted.years() {
        return Err(Error::Alignment(format!(
            "measured covers {}-{}, predicted covers {}-{}",
            measured.start_year(),
            measured.end_year(),
            predicted.start_year(),
            predicted.end_year()
        )));
    }
    let n = measured.len();
    if n <= n_params {
        return Err(Error::InsufficientData {
            needed: n_params + 1,
            got: n,
        });
    }
    let mean = measured.values().iter().sum::<f64>() / n as f64;
    let sst: f64 = measured.values().iter().map(|y| (y - mean).powi(2)).sum();
    if sst == 0.0 {
        return Err(Error::Degenerate(
            "measured series has zero variance".into(),
        ));
    }
    let resid: Vec<f64> = measured
        .values()
        .iter()
        .zip(predicted.values())
        .map(|(y, p)| y - p)
        .collect();
    let sse: f64 = resid.iter().map(|r| r * r).sum();
    Ok(FitStats {
        r_squared: 1.0 - sse / sst,
        std_error: (sse / (n - n_params) as f64).sqrt(),
        sse,
        residuals: AnnualSeries::new(measured.start_year(), resid, Unit::PercentPoints)?,
    })
}

/// Years over which every lag candidate has both a measured rate and the
/// lagged GDP observation.
fn fit_window(y: &AnnualSeries, g: &AnnualSeries, lags: &[usize]) -> Result<RangeInclusive<i32>> {
    let max_lag = *lags.iter().max().unwrap_or(&0) as i32;
    let min_lag = *lags.iter().min().unwrap_or(&0) as i32;
    let from = y.start_year().max(g.start_year() + max_lag);
    let to = y.end_year().min(g.end_year() + min_lag);
    if from >= to {
        return Err(Error::Alignment(format!(
            "no common fit window between rate {}-{} and GDP {}-{}",
            y.start_year(),
            y.end_year(),
            g.start_year(),
            g.end_year()
        )));
    }
    Ok(from..=to)
}

struct Candidate {
    model: SegmentedModel,
    sse: f64,
}

fn fit_candidate(
    y: &AnnualSeries,
    g: &AnnualSeries,
    window: &RangeInclusive<i32>,
    break_year: i32,
    lag: usize,
    cfg: &FitConfig,
) -> Result<Candidate> {
    let (t0, end) = (*window.start(), *window.end());
    if break_year <= t0 + 1 || break_year > end {
        return Err(Error::Config(format!(
            "break year outside fit window {t0}-{end}"
        )));
    }
    let anchor1 = y.get(t0).expect("window lies inside target series");
    let seg1 = fit_segment(
        y,
        g,
        t0,
        anchor1,
        lag,
        t0..=break_year - 1,
        cfg.min_segment_obs,
    )?;
    let anchor2 = seg1.eval(g, lag, break_year)?;
    let seg2 = fit_segment(
        y,
        g,
        break_year,
        anchor2,
        lag,
        break_year..=end,
        cfg.min_segment_obs,
    )?;
    let model = SegmentedModel::new(cfg.target, lag, break_year, seg1, seg2)?;
    let predicted = predict_level(&model, g, window.clone())?;
    let sse = y
        .slice(window.clone())?
        .values()
        .iter()
        .zip(predicted.values())
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Ok(Candidate { model, sse })
}

/// Grid search over break year and lag; returns the SSE-minimising fit.
///
/// Ties go to the earlier break year, then the smaller lag.
pub fn fit_model(data: &CountryDataset, cfg: &FitConfig) -> Result<FitReport> {
    cfg.validate()?;
    let y = data.adjusted_rate(cfg.target)?;
    let g = &data.gdp_per_capita;
    let lags = cfg.sorted_lags();
    let window = fit_window(&y, g, &lags)?;

    let mut grid = Vec::new();
    let mut best: Option<Candidate> = None;
    for break_year in cfg.break_grid.clone() {
        for &lag in &lags {
            let outcome = match fit_candidate(&y, g, &window, break_year, lag, cfg) {
                Ok(c) => {
                    let sse = c.sse;
                    if best.as_ref().is_none_or(|b| sse < b.sse) {
                        best = Some(c);
                    }
                    Ok(sse)
                }
                Err(e) => Err(e.to_string()),
            };
            grid.push(GridPoint {
                break_year,
                lag,
                outcome,
            });
        }
    }

    let Some(best) = best else {
        let reasons: Vec<String> = grid
            .iter()
            .map(|p| {
                format!(
                    "{}/lag {}: {}",
                    p.break_year,
                    p.lag,
                    p.outcome.as_ref().err().map(String::as_str).unwrap_or("")
                )
            })
            .collect();
        return Err(Error::Config(format!(
            "no admissible grid point: {}",
            reasons.join("; ")
        )));
    };

    let mut sse_by_break = BTreeMap::new();
    for p in &grid {
        if let Ok(sse) = p.outcome {
            sse_by_break
                .entry(p.break_year)
                .and_modify(|v: &mut f64| *v = v.min(sse))
                .or_insert(sse);
        }
    }

    let measured = y.slice(window.clone())?;
    let predicted = predict_level(&best.model, g, window)?;
    let stats = fit_stats(&measured, &predicted, N_PARAMS)?;
    let warnings = best.model.sign_warnings();
    Ok(FitReport {
        model: best.model,
        r_squared: stats.r_squared,
        std_error: stats.std_error,
        sse: stats.sse,
        residuals: stats.residuals,
        n_obs: measured.len(),
        measured,
        predicted,
        sse_by_break,
        grid,
        warnings,
    })
}

/// Result of regressing the annual change in unemployment on the negated
/// annual change in employment, with a free intercept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OkunCorrelation {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n: usize,
}

pub fn okun_correlation(e: &AnnualSeries, u: &AnnualSeries) -> Result<OkunCorrelation> {
    let (e, u) = align(e, u)?;
    if e.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: e.len(),
        });
    }
    let x: Vec<f64> = diff(&e)?.values().iter().map(|v| -v).collect();
    let du = diff(&u)?;
    let y = du.values();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate(
            "employment or unemployment changes have zero variance".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok(OkunCorrelation {
        slope,
        intercept: my - slope * mx,
        r_squared: sxy * sxy / (sxx * syy),
        n: x.len(),
    })
}
