//! Hamiltonian instances: coupling graphs, disorder realizations and the
//! interpolating transverse-field Hamiltonian `H(s) = s H0 + (1 - s) H1`.

mod generate;
mod graph;
mod io;

pub use generate::{
    generate_regular_graph, make_chain, make_complete, make_square_lattice, CouplingModel,
};
pub use graph::{classical_energy, CouplingGraph, Edge, GraphKind};
pub use io::{parse_graph_text, write_graph_text};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Spatial dimension of an instance, used only for converting primed
/// exponents back to ordinary ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Dimension {
    Finite(u32),
    /// Random graphs and complete graphs; conversions then use the upper
    /// critical dimension.
    Infinite { upper_critical: u32 },
}

/// A graph together with the transverse field strength.
///
/// The driver is taken as `-h sum_i sigma^x_i` internally. This differs from
/// `+h sum_i sigma^x_i` by the unitary `prod_i sigma^z_i`, which leaves the
/// spectrum and every `sigma^z` observable unchanged, and it makes every
/// matrix element of `c(s) - H(s)` nonnegative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub graph: CouplingGraph,
    pub field: f64,
    pub dimension: Option<Dimension>,
}

impl ModelSpec {
    pub fn new(graph: CouplingGraph, field: f64) -> Result<Self> {
        if !(field > 0.0 && field.is_finite()) {
            return Err(Error::InvalidGraph(format!("field must be > 0, got {field}")));
        }
        let dimension = match graph.kind() {
            GraphKind::Chain => Some(Dimension::Finite(1)),
            GraphKind::SquareLattice { .. } => Some(Dimension::Finite(2)),
            GraphKind::Regular(_) => Some(Dimension::Infinite { upper_critical: 6 }),
            GraphKind::Complete => Some(Dimension::Infinite { upper_critical: 8 }),
            GraphKind::Custom => None,
        };
        Ok(Self { graph, field, dimension })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Shift `c(s) = s sum_e |J_e| + (1 - s) h N` that makes `c(s) - H(s)`
    /// elementwise nonnegative.
    pub fn shift(&self, s: f64) -> f64 {
        s * self.graph.total_abs_coupling() + (1.0 - s) * self.field * self.n() as f64
    }
}
