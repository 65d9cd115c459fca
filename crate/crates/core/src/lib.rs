// `!(x > 0.0)` is used throughout to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod classical;
pub mod cli;
pub mod error;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod qaqmc;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
