//! Piecewise integral Okun's law models.
//!
//! Labour-market rates (unemployment or the employment/population ratio) are
//! modelled in levels as an anchored linear function of cumulative log growth
//! of real GDP per capita plus a linear time trend, with one structural break
//! chosen by grid search. The crate covers ingestion of annual CSV data,
//! estimation with fit diagnostics, growth thresholds, and projections under
//! parametric GDP scenarios. The `okun` binary wraps it in a batch CLI.

pub mod error;
pub mod estimator;
pub mod ingest;
pub mod model;
pub mod projector;
pub mod report;
pub mod series;

pub use error::{Error, ParseErrorKind, Result};
pub use estimator::{fit_model, fit_segment, fit_stats, okun_correlation, FitConfig, FitReport};
pub use ingest::{CountryDataset, DatasetManifest, LevelShift};
pub use model::{predict_change, predict_level, trend_components, Segment, SegmentedModel, Target};
pub use projector::{
    counterfactual_trend, gdp_path, project_rate, GrowthRule, GrowthScenario, Projection,
};
pub use series::{AnnualSeries, Unit};
