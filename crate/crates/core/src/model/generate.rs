use super::graph::{CouplingGraph, GraphKind};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

const MAX_RESTARTS: usize = 1000;
/// Consecutive rejected proposals before the remaining points are scanned
/// for a suitable pair directly.
const REJECTION_BUDGET: usize = 64;

/// Random simple `d`-regular graph on `n` vertices with all `J = +1`.
///
/// Steger-Wormald pairing: `n d` points in `n` cells are joined two at a
/// time, each time choosing uniformly among the pairs that do not create a
/// loop or a double edge. A dead end restarts the whole pairing.
pub fn generate_regular_graph(n: usize, d: usize, seed: u64) -> Result<CouplingGraph> {
    if !(n * d).is_multiple_of(2) {
        return Err(Error::InvalidGraph(format!("n*d = {} is odd", n * d)));
    }
    if n <= d {
        return Err(Error::InvalidGraph(format!("need n > d, got n = {n}, d = {d}")));
    }
    let mut rng = rng_from_seed(seed);
    for _ in 0..MAX_RESTARTS {
        if let Some(pairs) = try_pairing(n, d, &mut rng) {
            let edges = pairs.into_iter().map(|(i, j)| (i, j, 1.0));
            return CouplingGraph::from_edges(n, edges, GraphKind::Regular(d), Some(seed));
        }
    }
    Err(Error::PairingFailed(MAX_RESTARTS))
}

fn try_pairing<R: Rng>(n: usize, d: usize, rng: &mut R) -> Option<Vec<(usize, usize)>> {
    // points[k] is the cell (vertex) owning point k
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut adjacent: HashSet<(usize, usize)> = HashSet::with_capacity(n * d / 2);
    let mut edges = Vec::with_capacity(n * d / 2);
    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };

    while !points.is_empty() {
        let mut chosen = None;
        for _ in 0..REJECTION_BUDGET {
            let a = rng.random_range(0..points.len());
            let b = rng.random_range(0..points.len());
            if a != b && points[a] != points[b] && !adjacent.contains(&key(points[a], points[b])) {
                chosen = Some((a, b));
                break;
            }
        }
        let (a, b) = match chosen {
            Some(p) => p,
            None => {
                let suitable: Vec<(usize, usize)> = (0..points.len())
                    .flat_map(|a| ((a + 1)..points.len()).map(move |b| (a, b)))
                    .filter(|&(a, b)| {
                        points[a] != points[b] && !adjacent.contains(&key(points[a], points[b]))
                    })
                    .collect();
                if suitable.is_empty() {
                    return None;
                }
                suitable[rng.random_range(0..suitable.len())]
            }
        };
        let (u, v) = (points[a], points[b]);
        adjacent.insert(key(u, v));
        edges.push(key(u, v));
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        points.swap_remove(hi);
        points.swap_remove(lo);
    }
    Some(edges)
}

/// Periodic ferromagnetic chain, `J = -1` on `(i, i+1 mod n)`.
pub fn make_chain(n: usize) -> Result<CouplingGraph> {
    if n < 3 {
        return Err(Error::InvalidGraph(format!("chain needs n >= 3, got {n}")));
    }
    let edges = (0..n).map(|i| (i, (i + 1) % n, -1.0));
    CouplingGraph::from_edges(n, edges, GraphKind::Chain, None)
}

/// Periodic `l x l` ferromagnetic square lattice, `J = -1`.
pub fn make_square_lattice(l: usize) -> Result<CouplingGraph> {
    if l < 3 {
        return Err(Error::InvalidGraph(format!("square lattice needs l >= 3, got {l}")));
    }
    let site = |x: usize, y: usize| (y % l) * l + (x % l);
    let edges = (0..l).flat_map(|y| {
        (0..l).flat_map(move |x| [(site(x, y), site(x + 1, y), -1.0), (site(x, y), site(x, y + 1), -1.0)])
    });
    CouplingGraph::from_edges(l * l, edges, GraphKind::SquareLattice { l }, None)
}

/// Coupling distribution for the fully-connected model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingModel {
    /// `J_ij ~ Normal(0, 1/n)`.
    Gaussian,
    /// Every pair gets the same value.
    Uniform(f64),
}

pub fn make_complete(n: usize, model: CouplingModel, seed: u64) -> Result<CouplingGraph> {
    if n < 2 {
        return Err(Error::InvalidGraph(format!("complete graph needs n >= 2, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let scale = 1.0 / (n as f64).sqrt();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let coupling = match model {
                CouplingModel::Gaussian => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * scale
                }
                CouplingModel::Uniform(v) => v,
            };
            edges.push((i, j, coupling));
        }
    }
    CouplingGraph::from_edges(n, edges, GraphKind::Complete, Some(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_vertex_cubic_is_k4() {
        for seed in 0..20 {
            let g = generate_regular_graph(4, 3, seed).unwrap();
            assert_eq!(g.edges().len(), 6);
            assert!(g.degrees().iter().all(|&d| d == 3));
        }
    }

    #[test]
    fn odd_degree_sum_rejected() {
        assert!(generate_regular_graph(5, 3, 1).is_err());
        assert!(generate_regular_graph(3, 3, 1).is_err());
    }

    #[test]
    fn n64_cubic() {
        let g = generate_regular_graph(64, 3, 1).unwrap();
        assert_eq!(g.edges().len(), 96);
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert!(g.edges().iter().all(|e| e.coupling == 1.0));
        assert!(g.is_connected());
        assert_eq!(g, generate_regular_graph(64, 3, 1).unwrap());
        assert_ne!(g, generate_regular_graph(64, 3, 2).unwrap());
    }

    #[test]
    fn exhaustive_small_cubic_samples() {
        for seed in 0..10_000 {
            let g = generate_regular_graph(8, 3, seed).unwrap();
            let mut seen = HashSet::new();
            for e in g.edges() {
                assert_ne!(e.i, e.j);
                assert!(seen.insert((e.i, e.j)));
            }
            assert!(g.degrees().iter().all(|&d| d == 3));
        }
    }

    #[test]
    fn chains() {
        let g = make_chain(4).unwrap();
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.i, e.j, e.coupling)).collect();
        assert_eq!(pairs, vec![(0, 1, -1.0), (1, 2, -1.0), (2, 3, -1.0), (0, 3, -1.0)]);
        assert_eq!(make_chain(3).unwrap().edges().len(), 3);
        let g = make_chain(64).unwrap();
        assert_eq!(g.edges().len(), 64);
        assert!(g.degrees().iter().all(|&d| d == 2));
        assert!(make_chain(2).is_err());
    }

    #[test]
    fn complete_graphs() {
        assert_eq!(make_complete(2, CouplingModel::Gaussian, 0).unwrap().edges().len(), 1);
        let g = make_complete(16, CouplingModel::Gaussian, 7).unwrap();
        assert_eq!(g.edges().len(), 120);
        assert_eq!(g, make_complete(16, CouplingModel::Gaussian, 7).unwrap());
    }

    #[test]
    fn gaussian_coupling_variance_is_one_over_n() {
        let n = 3;
        let mut sum2 = 0.0;
        let mut count = 0.0;
        for seed in 0..20_000 {
            for e in make_complete(n, CouplingModel::Gaussian, seed).unwrap().edges() {
                sum2 += e.coupling * e.coupling;
                count += 1.0;
            }
        }
        let var = sum2 / count;
        // 60000 draws: relative std of the variance estimate is sqrt(2/60000) ~ 0.6%
        assert!((var - 1.0 / 3.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn square_lattice() {
        let g = make_square_lattice(4).unwrap();
        assert_eq!(g.n(), 16);
        assert_eq!(g.edges().len(), 32);
    }
}
