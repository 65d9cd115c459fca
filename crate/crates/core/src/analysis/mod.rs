//! Kibble-Zurek scaling analysis: data collapse of `y N^b = f(v N^k)`,
//! log-log slope checks, Binder-cumulant crossings and their extrapolation
//! in system size.

mod collapse;
mod crossing;
mod exponents;
mod optimize;

pub use collapse::{
    collapse_fit, verify_slope, CollapseOptions, CollapsePoint, CollapseResult, ScaledWindow, SlopeOptions,
    SlopeReport, DEFAULT_BOOTSTRAP, DEFAULT_DEGREE,
};
pub use crossing::{
    crossing_bootstrap, crossing_pairs, crossing_point, extrapolate_sc, BinderCurve, Crossing, CrossingEstimate,
    CrossingPoint, ScExtrapolation, EXTRAPOLATION_BOOTSTRAP,
};
pub use exponents::{
    kz_slope, kz_slope_from, reference, schedule_is_slow, schedule_velocity, ExponentSet, Measured,
    ReferenceExponents, REFERENCE_EXPONENTS,
};
pub use optimize::Polynomial;
