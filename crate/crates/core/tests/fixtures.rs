use std::path::Path;

use okun::report::RunManifest;
use okun::{counterfactual_trend, fit_model, predict_level, CountryDataset, FitConfig, Target};

fn dataset(country: &str) -> CountryDataset {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/manifest.json");
    RunManifest::load(&path).unwrap().dataset(country).unwrap()
}

#[test]
fn us_counterfactual_lies_above_fit_after_break() {
    let ds = dataset("us");
    let r = fit_model(&ds, &FitConfig::new(Target::Unemployment)).unwrap();
    let m = &r.model;
    let cf = counterfactual_trend(m, &ds).unwrap();
    let actual = predict_level(m, &ds.gdp_per_capita, cf.years()).unwrap();
    let extra = m.segment1.trend - m.segment2.trend;
    assert!(extra > 0.0);
    for ((t, c), a) in cf.iter().zip(actual.values()) {
        let gap = c - a;
        assert!((gap - extra * f64::from(t - m.break_year)).abs() < 1e-9);
        if t > m.break_year {
            assert!(gap > 0.0, "{t}");
        }
    }
}

#[test]
fn us_employment_breaks_later_than_unemployment() {
    let ds = dataset("us");
    let e = fit_model(&ds, &FitConfig::new(Target::Employment)).unwrap();
    let u = fit_model(&ds, &FitConfig::new(Target::Unemployment)).unwrap();
    assert!(
        (1981..=1985).contains(&e.model.break_year),
        "{}",
        e.model.break_year
    );
    assert!(e.model.break_year > u.model.break_year);
    assert!(e.model.segment2.slope > e.model.segment1.slope);
}

#[test]
fn japan_fit_statistics() {
    let r = fit_model(&dataset("japan"), &FitConfig::new(Target::Employment)).unwrap();
    assert!((r.r_squared - 0.95).abs() < 0.02, "{}", r.r_squared);
    assert!((r.std_error - 0.50).abs() < 0.05, "{}", r.std_error);
    assert_eq!(r.model.break_year, 1978);
}

#[test]
fn france_shift_is_removed_before_fitting() {
    let ds = dataset("france");
    let cfg = FitConfig::new(Target::Employment);
    let with = fit_model(&ds, &cfg).unwrap();
    let mut raw = ds.clone();
    raw.adjustments.clear();
    let without = fit_model(&raw, &cfg).unwrap();
    assert!(with.sse < without.sse);
    assert_eq!(with.model.break_year, 1994);
    assert!((with.model.segment2.threshold().unwrap() - 1.20).abs() < 0.3);
}
