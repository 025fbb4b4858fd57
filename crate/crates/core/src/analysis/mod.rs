//! Estimators over traces: growth exponents, continuous-time rates, the
//! decay of activation probabilities, the never-added event, row and cone
//! occupation, and an exploratory interface speed.

mod decay;
mod fit;
mod growth;
mod never_added;
mod speed;

pub use decay::{activation_decay, DecayRow, DecayTable};
pub use fit::{linear_fit, mean_stderr, wilson_interval, LinearFit};
pub use growth::{
    activity_lower_constant, cone_occupation, continuous_rates, geometric_points, growth_exponents,
    height_floor_violation, pooled_exponents, row_occupancy, sample_curve, ConeHit, CurveSamples, GrowthCurve,
    RateRow, RatesTable, RowOccupancy, MIN_FIT_POINTS,
};
pub use never_added::{never_added_estimator, NeverAdded, NeverAddedPoint, WILSON_Z};
pub use speed::{speed_estimate, SpeedEstimate};
