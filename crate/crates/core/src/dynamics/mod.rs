//! Galerkin-truncated BBM flow `∂_t(1-∂_x²)u + ∂_x(u + u²/2) = 0` on the torus.

mod bounds;
mod flow;

pub use bounds::{
    bound_difference, bound_growth, calibrate_constants, calibrate_difference, calibrate_growth,
    calibrate_local_contraction, frequency_cutoff, horizon, measure_difference, measure_growth,
    trace_pair, BoundParams, CalibrationGrid, DifferenceMeasurement, DifferenceScenario,
    GrowthMeasurement, PairTrace,
};
pub use flow::{
    bbm_rhs, conserved_quantities, evolve, evolve_trajectory, Conserved, Direction,
    EvolveParams, Trajectory,
};
