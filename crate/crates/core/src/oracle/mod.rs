//! Independent numeric checks of the exact results: the linearised flow,
//! cleanliness ranks, density quotients, Laplace multiplicities and a
//! smoothed wave trace.

mod clean;
mod flow;
pub mod hiprec;
mod spectrum;

pub use clean::{
    cleanliness_check, numeric_dg, numeric_dg_at, volume_monte_carlo, CleanlinessReport,
};
pub use flow::{
    canonical_form, flow_differential, jacobi_propagator, parallel_transport_drift, rotation_power,
    sample_point, FlowDifferential,
};
pub use spectrum::{
    default_grid, eigenvalue, laplace_multiplicities, laplace_multiplicities_float, peak_report,
    required_cutoff, smoothed_trace, sphere_multiplicity, PeakEntry, PeakReport, PeakThresholds,
    SpectrumTable,
};
