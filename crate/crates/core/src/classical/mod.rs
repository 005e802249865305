//! Classical van der Pol dynamics: the second-order ODE, the amplitude-equation
//! Langevin models and the estimators that mirror the quantum observables.

mod analytic;
mod estimators;
mod langevin;
mod ode;
mod records;
mod threshold;

pub use analytic::{analytic_wc, analytic_wc_grid, analytic_wc_radial_peak};
pub use estimators::{
    ensemble_wigner_histogram, order_parameter_series, phase_difference_samples, steady_order_parameter,
    OrderParameter,
};
pub use langevin::{
    simulate_langevin, Coupling, Drive, InitialCondition, LangevinParams, Recording, SampleOptions,
    TrajectoryEnsemble,
};
pub use ode::{integrate_vdp_ode, ClassicalVdpState, VdpTrajectory};
pub use records::{read_records, write_records, TrajectoryRecord, RECORD_BYTES};
pub use threshold::{classical_sync_threshold, is_synchronized, ThresholdOptions, ThresholdResult};
