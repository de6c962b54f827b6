//! Monte-Carlo experiments: trial orchestration, empirical measurement and
//! the metric records they emit.

mod experiments;
mod measure;
mod records;

pub use experiments::{run_experiment, ExperimentParams};
pub use measure::{count_ber, empirical_cdf, measure_empirical_sinr, SinrMeasurement};
pub use records::{ExperimentKind, Method, Metric, MetricsRecord, UserTag};
