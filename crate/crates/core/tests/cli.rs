use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_okun");

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn manifest() -> PathBuf {
    fixtures().join("manifest.json")
}

fn run(args: &[&str], manifest: &Path, out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--manifest")
        .arg(manifest)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn okun")
}

fn fit(country: &str, target: &str, out: &Path) -> Value {
    let o = run(
        &["fit", "--country", country, "--target", target],
        &manifest(),
        out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join(format!("{country}_{target}_fit.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("structured error on stderr")
}

#[test]
fn us_unemployment_break_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let j = fit("us", "unemployment", dir.path());
    assert_eq!(j["break_year"], 1979);
    assert_eq!(j["lag"], 0);
    let s2 = j["segments"][1]["slope"].as_f64().unwrap();
    assert!((s2 + 0.465).abs() < 0.02, "slope2 {s2}");
}

#[test]
fn noise_free_fixture_fits_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let j = fit("synthetic", "unemployment", dir.path());
    assert_eq!(j["r_squared"].as_f64(), Some(1.0));
    assert_eq!(j["break_year"], 1985);
}

#[test]
fn fit_reports_match_schema() {
    let schema: Value = serde_json::from_str(okun::report::FIT_REPORT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for (c, t) in [
        ("us", "unemployment"),
        ("us", "employment"),
        ("japan", "employment"),
        ("uk", "employment"),
        ("france", "employment"),
        ("synthetic", "unemployment"),
    ] {
        let j = fit(c, t, dir.path());
        let errors: Vec<String> = validator.iter_errors(&j).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{c}/{t}: {errors:?}");
    }
}

#[test]
fn france_report_lists_level_shift() {
    let dir = tempfile::tempdir().unwrap();
    let j = fit("france", "employment", dir.path());
    assert_eq!(j["level_shifts"][0]["year"], 1982);
    assert_eq!(j["break_year"], 1994);
    // Measured column is on the published scale, shift included.
    let csv = fs::read_to_string(dir.path().join("france_employment_predicted.csv")).unwrap();
    let row = |year: &str| -> Vec<f64> {
        let line = csv.lines().find(|l| l.starts_with(year)).unwrap();
        line.split(',')
            .skip(1)
            .map(|v| v.parse().unwrap())
            .collect()
    };
    let before = row("1981,");
    let after = row("1982,");
    assert!(after[0] - before[0] > 1.0, "{before:?} {after:?}");
    assert!((after[1] - before[1]).abs() < 1.5);
}

#[test]
fn predicted_csv_columns_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    fit("japan", "employment", dir.path());
    let csv = fs::read_to_string(dir.path().join("japan_employment_predicted.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("year,measured,predicted,residual"));
    let mut years = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 4);
        years.push(f[0].parse::<i32>().unwrap());
        let v: Vec<f64> = f[1..].iter().map(|x| x.parse().unwrap()).collect();
        assert!((v[0] - v[1] - v[2]).abs() < 1e-4, "{line}");
    }
    assert_eq!(years.first(), Some(&1970));
    assert_eq!(years.last(), Some(&2010));
}

#[test]
fn uk_selects_one_year_lag() {
    let dir = tempfile::tempdir().unwrap();
    let j = fit("uk", "employment", dir.path());
    assert_eq!(j["lag"], 1);
    let sse1 = j["sse"].as_f64().unwrap();
    let o = run(
        &[
            "fit",
            "--country",
            "uk",
            "--target",
            "employment",
            "--lags",
            "0",
        ],
        &manifest(),
        dir.path(),
    );
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("uk_employment_fit.json")).unwrap();
    let j0: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(j0["lag"], 0);
    assert!(sse1 < j0["sse"].as_f64().unwrap());
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("manifest.json");
    fs::write(
        &m,
        r#"{"countries":[{"country":"x",
            "gdp_per_capita":{"path":"nowhere_gdp.csv","unit":"currency-per-capita"},
            "unemployment_rate":{"path":"nowhere_u.csv","unit":"percent-points"}}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(
        &["fit", "--country", "x", "--target", "unemployment"],
        &m,
        &out,
    );
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["error"]["kind"], "io");
    assert!(e["error"]["message"]
        .as_str()
        .unwrap()
        .contains("nowhere_gdp.csv"));
    assert!(!out.exists());
}

#[test]
fn malformed_csv_reports_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixtures().join("us_gdp.csv"), dir.path().join("gdp.csv")).unwrap();
    fs::write(dir.path().join("u.csv"), "year,value\n1990,5\n1991,abc\n").unwrap();
    let m = dir.path().join("manifest.json");
    fs::write(
        &m,
        r#"{"countries":[{"country":"x",
            "gdp_per_capita":{"path":"gdp.csv","unit":"currency-per-capita"},
            "unemployment_rate":{"path":"u.csv","unit":"percent-points"}}]}"#,
    )
    .unwrap();
    let o = run(
        &["fit", "--country", "x", "--target", "unemployment"],
        &m,
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr_json(&o)["error"]["message"]
        .as_str()
        .unwrap()
        .to_string();
    assert!(msg.contains("u.csv") && msg.contains("line 3"), "{msg}");
}

#[test]
fn unknown_scenario_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["project", "--country", "us", "--scenario", "nope"],
        &manifest(),
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"]["kind"], "config");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn missing_target_series_is_a_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["fit", "--country", "japan", "--target", "unemployment"],
        &manifest(),
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn projection_rows_and_empty_future() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["project", "--country", "us", "--scenario", "linear"],
        &manifest(),
        dir.path(),
    );
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("us_unemployment_linear_projection.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "year,gdp,projected_rate,clipped");
    assert_eq!(rows.len(), 1 + 41);
    assert!(rows[1].starts_with("2010,"));
    assert!(rows[41].starts_with("2050,"));

    let o = run(
        &[
            "project",
            "--country",
            "us",
            "--scenario",
            "linear",
            "--horizon",
            "2010",
        ],
        &manifest(),
        dir.path(),
    );
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("us_unemployment_linear_projection.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn figures_write_expected_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["figures", "--country", "us"], &manifest(), dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "du_vs_minus_de.tsv",
        "level_fit.tsv",
        "components.tsv",
        "gdp_paths.tsv",
        "growth_threshold.tsv",
    ] {
        let text = fs::read_to_string(dir.path().join("us").join(f)).unwrap();
        assert!(text.lines().count() > 10, "{f}");
    }
    // Employment-only countries have no du/-de table.
    let o = run(&["figures", "--country", "japan"], &manifest(), dir.path());
    assert!(o.status.success());
    assert!(!dir.path().join("japan/du_vs_minus_de.tsv").exists());
}
