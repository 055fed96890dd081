//! Batch commands behind the `okun` binary: run manifests, fit reports,
//! projections and plot-data files.
//!
//! Every command builds all of its outputs in memory before anything is
//! written, so a failure never leaves partial files behind. Numbers are
//! printed with six significant digits so that outputs are byte-stable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::estimator::{fit_model, FitConfig, FitReport, N_PARAMS};
use crate::ingest::{read_file, CountryDataset, DatasetManifest};
use crate::model::{trend_components, Target};
use crate::projector::{counterfactual_trend, gdp_path, project_rate, GrowthRule, GrowthScenario};
use crate::series::{align, diff, log_growth};

pub const SCHEMA_VERSION: u32 = 1;

/// Published JSON schema for fit reports.
pub const FIT_REPORT_SCHEMA: &str = include_str!("../schema/fit_report.schema.json");

const CONTINUITY_TOLERANCE: f64 = 1e-9;

/// Formats `x` with six significant digits, C `%g` style: fixed notation
/// for decimal exponents in [-4, 6), scientific otherwise, trailing zeros
/// removed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (5 - exp) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn round6(x: f64) -> Value {
    match fmt_num(x).parse::<f64>() {
        Ok(v) if v.is_finite() => json!(v),
        _ => Value::Null,
    }
}

/// Failure of a CLI command, split by exit status.
#[derive(Debug)]
pub enum RunError {
    /// Bad input, configuration or data. Exit status 1.
    User(Error),
    /// A post-condition the library guarantees did not hold. Exit status 2.
    Internal(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::User(_) => 1,
            RunError::Internal(_) => 2,
        }
    }

    /// One-line JSON description for stderr.
    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            RunError::User(e) => (e.kind(), e.to_string()),
            RunError::Internal(m) => ("internal", m.clone()),
        };
        json!({ "error": { "kind": kind, "message": message } }).to_string()
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::User(e) => write!(f, "{e}"),
            RunError::Internal(m) => write!(f, "internal invariant violated: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::User(e)
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSettings {
    pub break_from: i32,
    pub break_to: i32,
    pub lags: Vec<usize>,
    pub min_segment_obs: usize,
}

impl Default for FitSettings {
    fn default() -> Self {
        let d = FitConfig::new(Target::Unemployment);
        Self {
            break_from: *d.break_grid.start(),
            break_to: *d.break_grid.end(),
            lags: d.lag_candidates,
            min_segment_obs: d.min_segment_obs,
        }
    }
}

/// GDP rule of a named scenario. `threshold_growth` grows exponentially at
/// the fitted second-segment threshold rate.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioRule {
    ConstantIncrement { increment: f64 },
    Exponential { rate: f64 },
    ThresholdGrowth,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScenarioSpec {
    #[serde(flatten)]
    pub rule: ScenarioRule,
    pub horizon_year: i32,
    #[serde(default)]
    pub target: Option<Target>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FigureSettings {
    pub horizon_year: i32,
    /// Annual GDP increment for the linear path; defaults to the mean
    /// historical increment.
    pub increment: Option<f64>,
    /// Log rate for the exponential path; defaults to the mean historical
    /// log growth.
    pub exponential_rate: Option<f64>,
}

impl Default for FigureSettings {
    fn default() -> Self {
        Self {
            horizon_year: 2050,
            increment: None,
            exponential_rate: None,
        }
    }
}

/// Top-level JSON run description.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub countries: Vec<DatasetManifest>,
    #[serde(default)]
    pub fit: FitSettings,
    #[serde(default)]
    pub scenarios: BTreeMap<String, ScenarioSpec>,
    #[serde(default)]
    pub figures: FigureSettings,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunManifest {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, Error> {
        let mut m: RunManifest =
            serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        m.base_dir = base_dir.into();
        let mut seen = BTreeSet::new();
        for c in &m.countries {
            if !seen.insert(c.country.as_str()) {
                return Err(Error::Manifest(format!(
                    "duplicate country {:?}",
                    c.country
                )));
            }
        }
        if m.fit.break_from > m.fit.break_to {
            return Err(Error::Manifest(format!(
                "break_from {} exceeds break_to {}",
                m.fit.break_from, m.fit.break_to
            )));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let bytes = read_file(path)?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Io {
            path: path.display().to_string(),
            message: "manifest is not valid UTF-8".into(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base).map_err(|e| e.in_file(path.display().to_string()))
    }

    pub fn dataset(&self, country: &str) -> Result<CountryDataset, Error> {
        let entry = self
            .countries
            .iter()
            .find(|c| c.country == country)
            .ok_or_else(|| {
                let known: Vec<_> = self.countries.iter().map(|c| c.country.as_str()).collect();
                Error::Config(format!(
                    "unknown country {country:?}; manifest lists {}",
                    known.join(", ")
                ))
            })?;
        entry.load(&self.base_dir)
    }

    pub fn fit_config(&self, target: Target, overrides: &FitOverrides) -> FitConfig {
        FitConfig {
            break_grid: overrides.break_from.unwrap_or(self.fit.break_from)
                ..=overrides.break_to.unwrap_or(self.fit.break_to),
            lag_candidates: overrides
                .lags
                .clone()
                .unwrap_or_else(|| self.fit.lags.clone()),
            min_segment_obs: self.fit.min_segment_obs,
            target,
        }
    }
}

/// Command-line overrides of the manifest fit settings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitOverrides {
    pub break_from: Option<i32>,
    pub break_to: Option<i32>,
    pub lags: Option<Vec<usize>>,
}

/// A file produced by a command, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub path: PathBuf,
    pub contents: String,
}

impl OutputFile {
    fn new(path: impl Into<PathBuf>, contents: String) -> Self {
        Self {
            path: path.into(),
            contents,
        }
    }
}

/// Writes every file to a temporary sibling first and renames only once all
/// writes succeeded.
pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<(), Error> {
    let io_err = |p: &Path, e: std::io::Error| Error::Io {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    let mut staged = Vec::new();
    let result = files.iter().try_for_each(|f| {
        let dest = dir.join(&f.path);
        if let Some(parent) = dest.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        let tmp = dest.with_extension("partial");
        fs::write(&tmp, &f.contents).map_err(|e| io_err(&tmp, e))?;
        staged.push((tmp, dest));
        Ok(())
    });
    if let Err(e) = result {
        for (tmp, _) in &staged {
            let _ = fs::remove_file(tmp);
        }
        return Err(e);
    }
    for (tmp, dest) in &staged {
        fs::rename(tmp, dest).map_err(|e| io_err(dest, e))?;
    }
    Ok(())
}

fn default_target(ds: &CountryDataset) -> Target {
    if ds.unemployment_rate.is_some() {
        Target::Unemployment
    } else {
        Target::Employment
    }
}

fn check_fit(report: &FitReport, ds: &CountryDataset) -> RunResult<()> {
    let gap = report
        .model
        .continuity_gap(&ds.gdp_per_capita)
        .map_err(|e| RunError::Internal(e.to_string()))?;
    if gap.abs() > CONTINUITY_TOLERANCE * report.model.segment2.anchor_value.abs().max(1.0) {
        return Err(RunError::Internal(format!(
            "predicted curve jumps by {gap:e} at the break"
        )));
    }
    Ok(())
}

fn run_fit(
    m: &RunManifest,
    ds: &CountryDataset,
    target: Target,
    overrides: &FitOverrides,
) -> RunResult<FitReport> {
    let report = fit_model(ds, &m.fit_config(target, overrides))?;
    check_fit(&report, ds)?;
    Ok(report)
}

fn threshold_value(seg: &crate::model::Segment) -> Value {
    seg.threshold().map(round6).unwrap_or(Value::Null)
}

/// JSON document for a fit, matching [`FIT_REPORT_SCHEMA`].
pub fn fit_json(report: &FitReport, ds: &CountryDataset) -> Value {
    let m = &report.model;
    let segment = |s: &crate::model::Segment, from: i32, to: i32| {
        json!({
            "from_year": from,
            "to_year": to,
            "slope": round6(s.slope),
            "trend": round6(s.trend),
            "anchor_year": s.anchor_year,
            "anchor_value": round6(s.anchor_value),
            "threshold": threshold_value(s),
        })
    };
    let window = report.fit_window();
    let sse_by_break: serde_json::Map<String, Value> = report
        .sse_by_break
        .iter()
        .map(|(y, v)| (y.to_string(), round6(*v)))
        .collect();
    let rejected: Vec<Value> = report
        .grid
        .iter()
        .filter_map(|p| {
            p.outcome
                .as_ref()
                .err()
                .map(|reason| json!({ "break_year": p.break_year, "lag": p.lag, "reason": reason }))
        })
        .collect();
    let shifts: Vec<Value> = ds
        .shifts_for(m.target)
        .map(|s| json!({ "series": s.series, "year": s.year, "magnitude": round6(s.magnitude) }))
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "country": ds.country,
        "gdp_variant": ds.gdp_variant,
        "target": m.target,
        "break_year": m.break_year,
        "lag": m.lag,
        "fit_window": { "from_year": *window.start(), "to_year": *window.end() },
        "n_obs": report.n_obs,
        "n_params": N_PARAMS,
        "std_error_dof": report.n_obs - N_PARAMS,
        "r_squared": round6(report.r_squared),
        "std_error": round6(report.std_error),
        "sse": round6(report.sse),
        "segments": [
            segment(&m.segment1, *window.start(), m.break_year - 1),
            segment(&m.segment2, m.break_year, *window.end()),
        ],
        "sse_by_break": sse_by_break,
        "rejected_candidates": rejected,
        "level_shifts": shifts,
        "warnings": report.warnings,
    })
}

/// `year,measured,predicted,residual` on the measured scale.
pub fn predicted_csv(report: &FitReport, ds: &CountryDataset) -> RunResult<String> {
    let target = report.model.target;
    let measured = ds.restore_shifts(target, &report.measured)?;
    let predicted = ds.restore_shifts(target, &report.predicted)?;
    let mut out = String::from("year,measured,predicted,residual\n");
    for ((t, y), p) in measured.iter().zip(predicted.values()) {
        out.push_str(&format!(
            "{t},{},{},{}\n",
            fmt_num(y),
            fmt_num(*p),
            fmt_num(y - p)
        ));
    }
    Ok(out)
}

pub fn cmd_fit(
    m: &RunManifest,
    country: &str,
    target: Target,
    overrides: &FitOverrides,
) -> RunResult<Vec<OutputFile>> {
    let ds = m.dataset(country)?;
    let report = run_fit(m, &ds, target, overrides)?;
    let json = serde_json::to_string_pretty(&fit_json(&report, &ds))
        .map_err(|e| RunError::Internal(e.to_string()))?;
    Ok(vec![
        OutputFile::new(format!("{country}_{target}_fit.json"), json + "\n"),
        OutputFile::new(
            format!("{country}_{target}_predicted.csv"),
            predicted_csv(&report, &ds)?,
        ),
    ])
}

pub fn cmd_project(
    m: &RunManifest,
    country: &str,
    scenario: &str,
    target: Option<Target>,
    horizon: Option<i32>,
) -> RunResult<Vec<OutputFile>> {
    let spec = m.scenarios.get(scenario).ok_or_else(|| {
        let known: Vec<_> = m.scenarios.keys().map(String::as_str).collect();
        Error::Config(format!(
            "unknown scenario {scenario:?}; manifest defines {}",
            if known.is_empty() {
                "none".to_string()
            } else {
                known.join(", ")
            }
        ))
    })?;
    let ds = m.dataset(country)?;
    let target = target
        .or(spec.target)
        .unwrap_or_else(|| default_target(&ds));
    let report = run_fit(m, &ds, target, &FitOverrides::default())?;
    let rule = match spec.rule {
        ScenarioRule::ConstantIncrement { increment } => {
            GrowthRule::ConstantIncrement { increment }
        }
        ScenarioRule::Exponential { rate } => GrowthRule::Exponential { rate },
        ScenarioRule::ThresholdGrowth => GrowthRule::Exponential {
            rate: report.model.segment2.threshold()? / 100.0,
        },
    };
    let horizon = horizon.unwrap_or(spec.horizon_year);
    let scenario_def = GrowthScenario::from_history(rule, &ds.gdp_per_capita, horizon)?;
    let proj = project_rate(&report.model, &ds, &scenario_def)?;

    let mut out = String::from("year,gdp,projected_rate,clipped\n");
    for ((t, rate), clipped) in proj.rate.iter().zip(&proj.clipped) {
        let gdp = proj
            .gdp
            .get(t)
            .ok_or_else(|| RunError::Internal(format!("projected GDP path lacks {t}")))?;
        out.push_str(&format!(
            "{t},{},{},{}\n",
            fmt_num(gdp),
            fmt_num(rate),
            u8::from(*clipped)
        ));
    }
    Ok(vec![OutputFile::new(
        format!("{country}_{target}_{scenario}_projection.csv"),
        out,
    )])
}

fn tsv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

fn opt_num(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// Plot data for the du vs -de comparison, level fit, trend components,
/// GDP paths and growth threshold charts, under `<country>/`.
pub fn cmd_figures(
    m: &RunManifest,
    country: &str,
    target: Option<Target>,
) -> RunResult<Vec<OutputFile>> {
    let ds = m.dataset(country)?;
    let target = target.unwrap_or_else(|| default_target(&ds));
    let report = run_fit(m, &ds, target, &FitOverrides::default())?;
    let model = &report.model;
    let g = &ds.gdp_per_capita;
    let dir = PathBuf::from(country);
    let mut files = Vec::new();

    if let (Some(e), Some(u)) = (&ds.employment_rate, &ds.unemployment_rate) {
        let (e, u) = align(e, u)?;
        let de = diff(&e)?;
        let du = diff(&u)?;
        let rows = du
            .iter()
            .zip(de.values())
            .map(|((t, a), b)| vec![t.to_string(), fmt_num(a), fmt_num(-b)]);
        files.push(OutputFile::new(
            dir.join("du_vs_minus_de.tsv"),
            tsv(&["year", "du", "minus_de"], rows),
        ));
    }

    let measured = ds.restore_shifts(target, &report.measured)?;
    let predicted = ds.restore_shifts(target, &report.predicted)?;
    let rows = measured
        .iter()
        .zip(predicted.values())
        .map(|((t, y), p)| vec![t.to_string(), fmt_num(y), fmt_num(*p), fmt_num(y - p)]);
    files.push(OutputFile::new(
        dir.join("level_fit.tsv"),
        tsv(&["year", "measured", "predicted", "residual"], rows),
    ));

    let window = report.fit_window();
    let (trend, gdp_part) = trend_components(model, g, window.clone())?;
    let counterfactual = counterfactual_trend(model, &ds)?;
    let mut rows = Vec::new();
    for (((t, a), b), p) in trend
        .iter()
        .zip(gdp_part.values())
        .zip(report.predicted.values())
    {
        if (a - b - p).abs() > CONTINUITY_TOLERANCE * p.abs().max(1.0) {
            return Err(RunError::Internal(format!(
                "trend components do not reproduce the prediction in {t}"
            )));
        }
        let cf = counterfactual.get(t).unwrap_or(*p);
        rows.push(vec![
            t.to_string(),
            fmt_num(a),
            fmt_num(*b),
            fmt_num(*p),
            fmt_num(cf),
        ]);
    }
    files.push(OutputFile::new(
        dir.join("components.tsv"),
        tsv(
            &[
                "year",
                "trend_component",
                "gdp_component",
                "predicted",
                "counterfactual",
            ],
            rows,
        ),
    ));

    let years = (g.len() - 1) as f64;
    let increment = m
        .figures
        .increment
        .unwrap_or((g.last() - g.first()) / years);
    let rate = m
        .figures
        .exponential_rate
        .unwrap_or((g.last() / g.first()).ln() / years);
    let horizon = m.figures.horizon_year.max(g.end_year());
    let linear = gdp_path(&GrowthScenario::from_history(
        GrowthRule::ConstantIncrement { increment },
        g,
        horizon,
    )?)?;
    let exponential = gdp_path(&GrowthScenario::from_history(
        GrowthRule::Exponential { rate },
        g,
        horizon,
    )?)?;
    let rows = (g.start_year()..=horizon).map(|t| {
        vec![
            t.to_string(),
            opt_num(g.get(t)),
            opt_num(linear.get(t)),
            opt_num(exponential.get(t)),
        ]
    });
    files.push(OutputFile::new(
        dir.join("gdp_paths.tsv"),
        tsv(&["year", "observed", "linear", "exponential"], rows),
    ));

    let growth = log_growth(g)?;
    let from = model.break_year.max(growth.start_year());
    if from <= growth.end_year() {
        let after = growth.slice(from..=growth.end_year())?;
        let mean = after.values().iter().sum::<f64>() / after.len() as f64;
        let threshold = model.segment2.threshold().ok();
        let rows = after
            .iter()
            .map(|(t, v)| vec![t.to_string(), fmt_num(v), opt_num(threshold), fmt_num(mean)]);
        files.push(OutputFile::new(
            dir.join("growth_threshold.tsv"),
            tsv(&["year", "dlng", "threshold", "mean"], rows),
        ));
    }

    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (1.862365591, "1.86237"),
            (-0.465, "-0.465"),
            (23660.0, "23660"),
            (123456.7, "123457"),
            (999999.7, "1e6"),
            (1234567.0, "1.23457e6"),
            (0.0001234567, "0.000123457"),
            (0.00001234567, "1.23457e-5"),
            (57.5, "57.5"),
            (-1e-20, "-1e-20"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_num(x), want, "{x}");
        }
    }

    #[test]
    fn manifest_parsing() {
        let m = RunManifest::from_json(
            r#"{
                "countries": [{"country":"us",
                    "gdp_per_capita":{"path":"g.csv","unit":"currency-per-capita"},
                    "unemployment_rate":{"path":"u.csv","unit":"percent-points"}}],
                "fit": {"break_from": 1976, "lags": [0]},
                "scenarios": {
                    "linear": {"rule":"constant_increment","increment":591.5,"horizon_year":2050},
                    "flat": {"rule":"threshold_growth","horizon_year":2030,"target":"employment"}
                }
            }"#,
            "/tmp",
        )
        .unwrap();
        assert_eq!(m.fit.break_from, 1976);
        assert_eq!(m.fit.break_to, 1995);
        assert_eq!(m.fit.lags, vec![0]);
        assert_eq!(
            m.scenarios["linear"].rule,
            ScenarioRule::ConstantIncrement { increment: 591.5 }
        );
        assert_eq!(m.scenarios["flat"].target, Some(Target::Employment));
        let cfg = m.fit_config(
            Target::Unemployment,
            &FitOverrides {
                break_to: Some(1990),
                ..Default::default()
            },
        );
        assert_eq!(cfg.break_grid, 1976..=1990);

        assert!(RunManifest::from_json(r#"{"countries": [], "bogus": 1}"#, "/tmp").is_err());
        let dup = r#"{"countries": [
            {"country":"a","gdp_per_capita":{"path":"g","unit":"currency-per-capita"}},
            {"country":"a","gdp_per_capita":{"path":"g","unit":"currency-per-capita"}}]}"#;
        assert!(RunManifest::from_json(dup, "/tmp").is_err());
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        // A directory where a file should go makes the second write fail.
        fs::create_dir_all(dir.path().join("b.partial")).unwrap();
        let files = vec![
            OutputFile::new("a.txt", "a".into()),
            OutputFile::new("b.txt", "b".into()),
        ];
        assert!(write_outputs(dir.path(), &files).is_err());
        assert!(!dir.path().join("a.txt").exists());
        assert!(!dir.path().join("a.partial").exists());
    }

    #[test]
    fn error_json_is_structured() {
        let e = RunError::from(Error::Config("x".into()));
        assert_eq!(e.exit_code(), 1);
        let v: Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"]["kind"], "config");
        assert_eq!(RunError::Internal("y".into()).exit_code(), 2);
    }
}
