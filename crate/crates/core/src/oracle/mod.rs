//! Exact small-system references: dense evaluation of asymmetric
//! expectation values, ground-state and Boltzmann averages, and gaps.
//!
//! Basis ordering: configuration index `z` has spin `i` equal to `+1` when
//! bit `i` of `z` is clear and `-1` when it is set.

mod classical;
mod dense;
mod lanczos;

pub use classical::{chain_transfer_matrix, classical_equilibrium, ClassicalAverages};
pub use dense::{
    exact_asymmetric_curve, exact_asymmetric_expectation, exact_cut_distribution, exact_equilibrium, exact_gap, exact_slot_marginals,
    ground_state_averages, replica_moments, DenseState, DiagonalObservable, Equilibrium, ExactPoint, GapPoint,
    GapReport, QuantumAverages, SlotMarginal, CLASSICAL_CAP, DENSE_CAP, GAP_CAP,
};

#[inline]
pub(crate) fn spin(z: usize, i: usize) -> i8 {
    if z >> i & 1 == 0 {
        1
    } else {
        -1
    }
}

pub(crate) fn spins_of(z: usize, n: usize) -> Vec<i8> {
    (0..n).map(|i| spin(z, i)).collect()
}
