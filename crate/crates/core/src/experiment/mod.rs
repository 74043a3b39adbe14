//! Seeded Monte Carlo experiments: configuration, estimation, output.

pub mod config;
pub mod engine;
pub mod output;
pub mod plot;

pub use config::{scheme_name, ExperimentConfig};
pub use engine::{
    baseline_delay, bound_delay, default_max_steps, delay_at_arl, delay_ratio_report, ratio_limit, run_point,
    run_sweep, run_thresholds, run_trials, scenario, MetricEstimate, PointResult, RatioReport, SweepResult,
};
pub use output::{emit_outputs, read_curves, read_ratios, write_curves, write_ratios, CurveRow, RatioRow};
