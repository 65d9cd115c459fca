use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Chain,
    Regular(usize),
    Complete,
    SquareLattice { l: usize },
    Custom,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::Chain => write!(f, "chain"),
            GraphKind::Regular(d) => write!(f, "regular {d}"),
            GraphKind::Complete => write!(f, "complete"),
            GraphKind::SquareLattice { l } => write!(f, "square {l}"),
            GraphKind::Custom => write!(f, "custom"),
        }
    }
}

/// Undirected coupling with `i < j`. Positive `coupling` is antiferromagnetic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub coupling: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingGraph {
    n: usize,
    edges: Vec<Edge>,
    kind: GraphKind,
    seed: Option<u64>,
}

impl CouplingGraph {
    /// Builds a graph from `(i, j, J)` triples, normalizing each pair to
    /// `i < j` and rejecting self-loops and duplicates.
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        kind: GraphKind,
        seed: Option<u64>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b, coupling) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j >= n {
                return Err(Error::InvalidGraph(format!("vertex {j} out of range for n = {n}")));
            }
            if !coupling.is_finite() {
                return Err(Error::InvalidGraph(format!("non-finite coupling on ({i}, {j})")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({i}, {j})")));
            }
            out.push(Edge { i: i as u32, j: j as u32, coupling });
        }
        let graph = Self { n, edges: out, kind, seed };
        graph.validate()?;
        Ok(graph)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.i as usize] += 1;
            deg[e.j as usize] += 1;
        }
        deg
    }

    /// Neighbor lists `(neighbor, J)` for every vertex.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.i as usize].push((e.j as usize, e.coupling));
            adj[e.j as usize].push((e.i as usize, e.coupling));
        }
        adj
    }

    pub fn total_abs_coupling(&self) -> f64 {
        self.edges.iter().map(|e| e.coupling.abs()).sum()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Checks the structural invariants implied by `kind`.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.edges {
            if e.i >= e.j || e.j as usize >= self.n {
                return Err(Error::InvalidGraph(format!("bad edge ({}, {})", e.i, e.j)));
            }
            if !seen.insert((e.i, e.j)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.i, e.j)));
            }
        }
        match self.kind {
            GraphKind::Regular(d) => {
                if !(self.n * d).is_multiple_of(2) {
                    return Err(Error::InvalidGraph("n*d must be even".into()));
                }
                if self.degrees().iter().any(|&k| k != d) {
                    return Err(Error::InvalidGraph(format!("not {d}-regular")));
                }
            }
            GraphKind::Chain => {
                if self.edges.len() != self.n {
                    return Err(Error::InvalidGraph("periodic chain needs n edges".into()));
                }
                for e in &self.edges {
                    let (i, j) = (e.i as usize, e.j as usize);
                    if !(j == i + 1 || (i == 0 && j == self.n - 1)) {
                        return Err(Error::InvalidGraph(format!("non-chain edge ({i}, {j})")));
                    }
                }
            }
            GraphKind::Complete => {
                if self.edges.len() != self.n * (self.n - 1) / 2 {
                    return Err(Error::InvalidGraph("complete graph edge count".into()));
                }
            }
            GraphKind::SquareLattice { l } => {
                if l * l != self.n || self.degrees().iter().any(|&k| k != 4) {
                    return Err(Error::InvalidGraph("square lattice shape".into()));
                }
            }
            GraphKind::Custom => {}
        }
        Ok(())
    }

    /// SHA-256 over the canonical edge list text (see [`super::write_graph_text`]).
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(super::io::canonical_body(self).as_bytes());
        hex::encode(hasher.finalize())
    }
}

/// `sum_e J_e s_i s_j`, each unordered pair counted once.
pub fn classical_energy(graph: &CouplingGraph, spins: &[i8]) -> Result<f64> {
    if spins.len() != graph.n() {
        return Err(Error::SizeMismatch { expected: graph.n(), got: spins.len() });
    }
    Ok(graph
        .edges()
        .iter()
        .map(|e| e.coupling * f64::from(spins[e.i as usize] * spins[e.j as usize]))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_chain, make_complete, CouplingModel};

    fn k4() -> CouplingGraph {
        let edges = (0..4).flat_map(|i| ((i + 1)..4).map(move |j| (i, j, 1.0)));
        CouplingGraph::from_edges(4, edges, GraphKind::Regular(3), None).unwrap()
    }

    #[test]
    fn k4_energies() {
        let g = k4();
        assert_eq!(classical_energy(&g, &[1, 1, 1, 1]).unwrap(), 6.0);
        assert_eq!(classical_energy(&g, &[1, 1, -1, -1]).unwrap(), -2.0);
    }

    #[test]
    fn chain_ferromagnet_ground_state() {
        let g = make_chain(4).unwrap();
        assert_eq!(classical_energy(&g, &[1; 4]).unwrap(), -4.0);
        let g = make_chain(17).unwrap();
        assert_eq!(classical_energy(&g, &[-1; 17]).unwrap(), -17.0);
    }

    #[test]
    fn energy_size_mismatch() {
        assert!(matches!(
            classical_energy(&k4(), &[1, 1, 1]),
            Err(Error::SizeMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(CouplingGraph::from_edges(3, [(1, 1, 1.0)], GraphKind::Custom, None).is_err());
        assert!(CouplingGraph::from_edges(3, [(0, 1, 1.0), (1, 0, 1.0)], GraphKind::Custom, None)
            .is_err());
    }

    #[test]
    fn hash_depends_on_couplings() {
        let a = make_complete(5, CouplingModel::Gaussian, 1).unwrap();
        let b = make_complete(5, CouplingModel::Gaussian, 2).unwrap();
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash(), a.clone().content_hash());
    }

    proptest::proptest! {
        #[test]
        fn energy_invariant_under_global_flip(bits in proptest::collection::vec(proptest::bool::ANY, 12), seed in 0u64..1000) {
            let g = make_complete(12, CouplingModel::Gaussian, seed).unwrap();
            let s: Vec<i8> = bits.iter().map(|&b| if b { 1 } else { -1 }).collect();
            let f: Vec<i8> = s.iter().map(|x| -x).collect();
            let e1 = classical_energy(&g, &s).unwrap();
            let e2 = classical_energy(&g, &f).unwrap();
            proptest::prop_assert!((e1 - e2).abs() < 1e-12);
        }
    }
}
