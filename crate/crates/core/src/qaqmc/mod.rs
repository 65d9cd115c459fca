//! Quasi-adiabatic quantum Monte Carlo.
//!
//! The sampled weight is `<Psi0| G(s_1) ... G(s_m) G(s_m) ... G(s_1) |Psi0>`
//! with `G(s) = c(s) - H(s)` and `|Psi0>` the equal-amplitude driver ground
//! state. Expanding every `G` into elementary operators gives a sum over
//! strings with strictly positive weights; measuring a diagonal operator
//! between slots `tau` and `tau + 1` of the string estimates the asymmetric
//! expectation value along the quench.

mod decomposition;
mod protocol;
mod quench;
mod string;

pub use decomposition::{bond_terms, build_elementary_decomposition, BondTerm, Decomposition, Op};
pub use protocol::{
    default_tau_grid, even_tau_grid, QuenchMode, QuenchProtocol, DEFAULT_TAU_POINTS, VELOCITY_PREFACTOR,
};
pub use quench::{
    default_therm_sweeps, measure, run_quench, run_quench_with, run_simulation_time_quench, ReplicaPair,
    SimulationTimeSample, StringLength, TauSample, UpdateKind, AUTOCORR_FLAG_FRACTION, MEASUREMENT_BINS,
};
pub use string::{init_string, OperatorString};
pub(crate) use quench::model_id;
