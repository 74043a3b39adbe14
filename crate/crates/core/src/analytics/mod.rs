//! Closed forms, survival series, delay bounds and renewal constants.

mod bounds;
mod closed_form;
mod geometric;
mod renewal;
mod roots;
mod survival;

pub use bounds::{
    group_wise_arl_lower, group_wise_delay_upper, second_alarm_arl_lower, second_alarm_delay_upper,
    theorem1_delay_bound, theorem2_delay_bound, theorem3_delay_bound, theorem4_delay_bound,
};
pub use closed_form::{
    arl_centralized_closed_form, calibrate_centralized_threshold, delay_centralized_closed_form, prop1_bounds,
    Prop1Bounds,
};
pub use geometric::{geometric_approximation_check, geometric_scale};
pub use renewal::{estimate_renewal_constants, LadderPoint, RenewalConstants, RenewalOptions, DEFAULT_LADDER};
pub use roots::{solve_transcendental_roots, Roots, ROOT_TOLERANCE};
pub use survival::{SeriesValue, SurvivalSeriesParams, DEFAULT_TAIL_TOL, DEFAULT_TERMS};
