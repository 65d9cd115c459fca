use super::lanczos::{lowest, Eigenpair};
use super::spins_of;
use crate::error::{Error, Result};
use crate::model::{classical_energy, ModelSpec};
use crate::qaqmc::QuenchProtocol;
use crate::rng::rng_from_seed;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest `n` for dense quantum vectors.
pub const DENSE_CAP: usize = 14;
/// Largest `n` for gap computations.
pub const GAP_CAP: usize = 12;
/// Largest `n` for classical enumeration.
pub const CLASSICAL_CAP: usize = 20;

/// Amplitudes over the `2^n` configurations with an accumulated log-norm;
/// the stored vector is kept at unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    pub n: usize,
    pub amps: Vec<f64>,
    pub log_norm: f64,
}

impl DenseState {
    /// Equal-amplitude driver ground state.
    pub fn driver(n: usize) -> Result<Self> {
        if n > DENSE_CAP {
            return Err(Error::SizeCap { n, cap: DENSE_CAP });
        }
        let dim = 1usize << n;
        Ok(Self { n, amps: vec![1.0 / (dim as f64).sqrt(); dim], log_norm: 0.0 })
    }

    fn renormalize(&mut self) {
        let norm = self.amps.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(norm > 0.0 && norm.is_finite(), "dense state lost its norm");
        self.amps.iter_mut().for_each(|a| *a /= norm);
        self.log_norm += norm.ln();
    }
}

/// Matrix-free `H(s)` and `G(s)` on the full configuration space.
pub(crate) struct DenseModel {
    pub n: usize,
    field: f64,
    /// Classical energy `E0(z)` per configuration.
    energy: Vec<f64>,
    total_abs: f64,
}

impl DenseModel {
    pub fn new(model: &ModelSpec, cap: usize) -> Result<Self> {
        let n = model.n();
        if n > cap {
            return Err(Error::SizeCap { n, cap });
        }
        let energy = (0..1usize << n)
            .map(|z| classical_energy(&model.graph, &spins_of(z, n)).expect("sizes agree"))
            .collect();
        Ok(Self { n, field: model.field, energy, total_abs: model.graph.total_abs_coupling() })
    }

    fn shift(&self, s: f64) -> f64 {
        s * self.total_abs + (1.0 - s) * self.field * self.n as f64
    }

    /// `y = a x + b H(s) x` with `H(s) = s E0 - (1-s) h sum_i sigma^x_i`.
    fn apply_affine(&self, s: f64, a: f64, b: f64, x: &[f64], y: &mut [f64]) {
        let hop = (1.0 - s) * self.field;
        for (z, out) in y.iter_mut().enumerate() {
            let mut flips = 0.0;
            for i in 0..self.n {
                flips += x[z ^ (1 << i)];
            }
            *out = (a + b * s * self.energy[z]) * x[z] - b * hop * flips;
        }
    }

    pub fn apply_h(&self, s: f64, x: &[f64], y: &mut [f64]) {
        self.apply_affine(s, 0.0, 1.0, x, y)
    }

    pub fn apply_g(&self, s: f64, x: &[f64], y: &mut [f64]) {
        self.apply_affine(s, self.shift(s), -1.0, x, y)
    }

    fn step(&self, s: f64, state: &mut DenseState, scratch: &mut Vec<f64>) {
        scratch.resize(state.amps.len(), 0.0);
        self.apply_g(s, &state.amps, scratch);
        std::mem::swap(&mut state.amps, scratch);
        state.renormalize();
    }

    fn ground_state(&self, s: f64) -> Eigenpair {
        let dim = 1usize << self.n;
        let start = vec![1.0 / (dim as f64).sqrt(); dim];
        lowest(|x, y| self.apply_h(s, x, y), &start, &[], 1e-11)
    }
}

/// Diagonal observables available from a configuration distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalObservable {
    Mz2,
    Mz4,
    /// Two independent replicas.
    Q2,
    Q4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumAverages {
    pub mz2: f64,
    pub mz4: f64,
    pub q2: f64,
    pub q4: f64,
}

impl QuantumAverages {
    pub fn get(&self, obs: DiagonalObservable) -> f64 {
        match obs {
            DiagonalObservable::Mz2 => self.mz2,
            DiagonalObservable::Mz4 => self.mz4,
            DiagonalObservable::Q2 => self.q2,
            DiagonalObservable::Q4 => self.q4,
        }
    }
}

fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (u, w) = (*x, *y);
                *x = u + w;
                *y = u - w;
            }
        }
        h *= 2;
    }
}

/// `<q^2>` and `<q^4>` for two independent replicas drawn from the
/// distribution `p` (unnormalized, nonnegative).
///
/// The overlap depends only on `z1 xor z2`, whose distribution is the XOR
/// self-convolution of `p`; its Walsh-Hadamard transform is the square of
/// the single-replica correlators `<prod_{i in y} s_i>`.
pub fn replica_moments(p: &[f64], n: usize) -> (f64, f64) {
    let total: f64 = p.iter().sum();
    let mut c: Vec<f64> = p.iter().map(|x| x / total).collect();
    walsh_hadamard(&mut c);
    c.iter_mut().for_each(|x| *x *= *x);
    walsh_hadamard(&mut c);
    let dim = c.len() as f64;
    let (mut q2, mut q4) = (0.0, 0.0);
    for (x, w) in c.iter().enumerate() {
        let q = (n as f64 - 2.0 * x.count_ones() as f64) / n as f64;
        let w = w / dim;
        q2 += w * q * q;
        q4 += w * q.powi(4);
    }
    (q2, q4)
}

pub(crate) fn distribution_averages(p: &[f64], n: usize) -> QuantumAverages {
    let total: f64 = p.iter().sum();
    let (mut mz2, mut mz4) = (0.0, 0.0);
    for (z, w) in p.iter().enumerate() {
        let m = (n as f64 - 2.0 * z.count_ones() as f64) / n as f64;
        mz2 += w * m * m;
        mz4 += w * m.powi(4);
    }
    let (q2, q4) = replica_moments(p, n);
    QuantumAverages { mz2: mz2 / total, mz4: mz4 / total, q2, q4 }
}

/// Exact asymmetric expectation values at one slot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactPoint {
    pub tau: usize,
    pub s: f64,
    pub q2: f64,
    pub q4: f64,
    pub mz2: f64,
    pub mz4: f64,
}

/// Exact `<A>_tau` on every slot of `grid` for the same operator product the
/// sampler uses. The right vector `R_c` (first `c` operators applied to the
/// driver state) is propagated once; by the palindrome symmetry the left
/// vector at cut `tau` is `R_{2m - tau}`, so
/// `<A>_tau = R_{2m-tau} A R_tau / R_{2m-tau} R_tau`.
pub fn exact_asymmetric_curve(model: &ModelSpec, protocol: &QuenchProtocol, grid: &[usize]) -> Result<Vec<ExactPoint>> {
    let m = protocol.m;
    if let Some(&tau) = grid.iter().find(|&&t| t == 0 || t > m) {
        return Err(Error::TauOutOfRange { tau, m });
    }
    let dense = DenseModel::new(model, DENSE_CAP)?;
    let mut cuts: Vec<usize> = grid.iter().flat_map(|&t| [t, 2 * m - t]).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut stored: Vec<Vec<f64>> = Vec::with_capacity(cuts.len());
    let mut state = DenseState::driver(dense.n)?;
    let mut scratch = Vec::new();
    let mut next = 0;
    for c in 0..=protocol.string_len() {
        while next < cuts.len() && cuts[next] == c {
            stored.push(state.amps.clone());
            next += 1;
        }
        if c < protocol.string_len() {
            dense.step(protocol.string_s(c), &mut state, &mut scratch);
        }
    }
    let at = |cut: usize| &stored[cuts.binary_search(&cut).expect("cut stored")];
    Ok(grid
        .iter()
        .map(|&tau| {
            let p: Vec<f64> = at(tau).iter().zip(at(2 * m - tau)).map(|(a, b)| a * b).collect();
            let avg = distribution_averages(&p, dense.n);
            ExactPoint { tau, s: protocol.s_at(tau), q2: avg.q2, q4: avg.q4, mz2: avg.mz2, mz4: avg.mz4 }
        })
        .collect())
}

/// Probability of each basis state at string position `cut` under the
/// sampled distribution, indexed like [`DenseState`] amplitudes.
pub fn exact_cut_distribution(model: &ModelSpec, protocol: &QuenchProtocol, cut: usize) -> Result<Vec<f64>> {
    let len = protocol.string_len();
    if cut > len {
        return Err(Error::TauOutOfRange { tau: cut, m: protocol.m });
    }
    let dense = DenseModel::new(model, DENSE_CAP)?;
    let mut state = DenseState::driver(dense.n)?;
    let mut scratch = Vec::new();
    let mut right = None;
    let mut left = None;
    for c in 0..=len {
        if c == cut {
            right = Some(state.amps.clone());
        }
        if c == len - cut {
            left = Some(state.amps.clone());
        }
        if c < len {
            dense.step(protocol.string_s(c), &mut state, &mut scratch);
        }
    }
    let p: Vec<f64> = right.expect("cut reached").iter().zip(&left.expect("mirror cut reached")).map(|(a, b)| a * b).collect();
    let z: f64 = p.iter().sum();
    Ok(p.into_iter().map(|x| x / z).collect())
}

pub fn exact_asymmetric_expectation(
    model: &ModelSpec,
    protocol: &QuenchProtocol,
    obs: DiagonalObservable,
    tau: usize,
) -> Result<f64> {
    let p = exact_asymmetric_curve(model, protocol, &[tau])?[0];
    Ok(match obs {
        DiagonalObservable::Mz2 => p.mz2,
        DiagonalObservable::Mz4 => p.mz4,
        DiagonalObservable::Q2 => p.q2,
        DiagonalObservable::Q4 => p.q4,
    })
}

/// Exact probabilities of the three operator types at one string position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotMarginal {
    pub bond: f64,
    pub constant: f64,
    pub flip: f64,
}

/// Per-position operator-type marginals of the sampled string distribution,
/// summed exactly over all configurations. Small instances only.
pub fn exact_slot_marginals(model: &ModelSpec, protocol: &QuenchProtocol) -> Result<Vec<SlotMarginal>> {
    let dense = DenseModel::new(model, 10)?;
    let len = protocol.string_len();
    let mut right = Vec::with_capacity(len + 1);
    let mut state = DenseState::driver(dense.n)?;
    let mut scratch = Vec::new();
    right.push(state.amps.clone());
    for c in 0..len {
        dense.step(protocol.string_s(c), &mut state, &mut scratch);
        right.push(state.amps.clone());
    }
    let dim = 1usize << dense.n;
    let mut out = Vec::with_capacity(len);
    for q in 0..len {
        let s = protocol.string_s(q);
        let (r, l) = (&right[q], &right[len - q - 1]);
        let site = (1.0 - s) * model.field;
        let shift = dense.shift(s);
        let (mut bond, mut constant, mut flip) = (0.0, 0.0, 0.0);
        for z in 0..dim {
            let diag_bonds = shift - s * dense.energy[z] - site * dense.n as f64;
            bond += l[z] * diag_bonds * r[z];
            constant += l[z] * site * dense.n as f64 * r[z];
            let hops: f64 = (0..dense.n).map(|i| r[z ^ (1 << i)]).sum();
            flip += l[z] * site * hops;
        }
        let total = bond + constant + flip;
        out.push(SlotMarginal { bond: bond / total, constant: constant / total, flip: flip / total });
    }
    Ok(out)
}

/// Equilibrium point: quantum ground state at `s` or classical Boltzmann
/// ensemble at temperature `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Equilibrium {
    GroundState { s: f64 },
    Thermal { t: f64 },
}

/// Ground-state energy and averages at `s`.
pub fn ground_state_averages(model: &ModelSpec, s: f64) -> Result<(f64, QuantumAverages)> {
    let dense = DenseModel::new(model, DENSE_CAP)?;
    let gs = dense.ground_state(s);
    let p: Vec<f64> = gs.vector.iter().map(|a| a * a).collect();
    Ok((gs.value, distribution_averages(&p, dense.n)))
}

pub fn exact_equilibrium(model: &ModelSpec, point: Equilibrium, obs: DiagonalObservable) -> Result<f64> {
    match point {
        Equilibrium::GroundState { s } => Ok(ground_state_averages(model, s)?.1.get(obs)),
        Equilibrium::Thermal { t } => {
            let avg = super::classical_equilibrium(&model.graph, t)?;
            Ok(match obs {
                DiagonalObservable::Mz2 => avg.mz2,
                DiagonalObservable::Mz4 => avg.mz4,
                DiagonalObservable::Q2 => avg.q2,
                DiagonalObservable::Q4 => avg.q4,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub s: f64,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    /// `e1 - e0` below the degeneracy tolerance.
    pub degenerate: bool,
    /// Gap to the first level above the (possibly degenerate) ground level.
    pub gap_nondegenerate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub points: Vec<GapPoint>,
    pub min_gap: f64,
    pub argmin: f64,
}

const DEGENERACY_TOL: f64 = 1e-8;
const MAX_DEFLATION: usize = 16;

/// Two lowest levels of `H(s)` on each point of `s_grid`.
pub fn exact_gap(model: &ModelSpec, s_grid: &[f64]) -> Result<GapReport> {
    let dense = DenseModel::new(model, GAP_CAP)?;
    let dim = 1usize << dense.n;
    let mut rng = rng_from_seed(0x6a9);
    // a fresh start per call: a single start only reaches one direction of a
    // degenerate eigenspace
    let mut fresh = || -> Vec<f64> { (0..dim).map(|_| rng.random::<f64>() - 0.5).collect() };
    let mut points = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let apply = |x: &[f64], y: &mut [f64]| dense.apply_h(s, x, y);
        let tol = |e0: f64| DEGENERACY_TOL * e0.abs().max(1.0);
        let e0 = lowest(apply, &fresh(), &[], 1e-12);
        let mut found = vec![e0.vector.clone()];
        let e1 = lowest(apply, &fresh(), &found, 1e-12);
        let degenerate = e1.value - e0.value < tol(e0.value);
        let mut gap_nondegenerate = (!degenerate).then_some(e1.value - e0.value);
        if degenerate {
            found.push(e1.vector.clone());
            while found.len() < MAX_DEFLATION.min(dim) {
                let next = lowest(apply, &fresh(), &found, 1e-12);
                if next.value - e0.value >= tol(e0.value) {
                    gap_nondegenerate = Some(next.value - e0.value);
                    break;
                }
                found.push(next.vector);
            }
        }
        points.push(GapPoint { s, e0: e0.value, e1: e1.value, gap: e1.value - e0.value, degenerate, gap_nondegenerate });
    }
    let (min_gap, argmin) = points
        .iter()
        .map(|p| (p.gap, p.s))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::InsufficientData("empty s grid".into()))?;
    Ok(GapReport { points, min_gap, argmin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_regular_graph, make_chain, CouplingGraph, GraphKind};

    fn pair_ferro() -> ModelSpec {
        let g = CouplingGraph::from_edges(2, [(0, 1, -1.0)], GraphKind::Custom, None).unwrap();
        ModelSpec::new(g, 1.0).unwrap()
    }

    #[test]
    fn replica_moments_of_uniform_distribution() {
        for n in [3usize, 6, 9] {
            let p = vec![1.0; 1 << n];
            let (q2, q4) = replica_moments(&p, n);
            assert!((q2 - 1.0 / n as f64).abs() < 1e-12);
            // <q^4> for a mean of n independent signs: (3n^2 - 2n) / n^4
            let nf = n as f64;
            assert!((q4 - (3.0 * nf * nf - 2.0 * nf) / nf.powi(4)).abs() < 1e-12);
        }
    }

    #[test]
    fn replica_moments_match_brute_force() {
        let n = 4;
        let mut rng = rng_from_seed(2);
        let p: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
        let total: f64 = p.iter().sum();
        let (mut q2, mut q4) = (0.0, 0.0);
        for a in 0..16usize {
            for b in 0..16usize {
                let w = p[a] * p[b] / (total * total);
                let q = (0..n).map(|i| f64::from(super::super::spin(a, i) * super::super::spin(b, i))).sum::<f64>() / n as f64;
                q2 += w * q * q;
                q4 += w * q.powi(4);
            }
        }
        let (x2, x4) = replica_moments(&p, n);
        assert!((x2 - q2).abs() < 1e-13 && (x4 - q4).abs() < 1e-13);
    }

    #[test]
    fn driver_point_gives_inverse_n() {
        let model = ModelSpec::new(generate_regular_graph(6, 3, 3).unwrap(), 1.0).unwrap();
        let p = QuenchProtocol::constant(0.0, 10).unwrap();
        for pt in exact_asymmetric_curve(&model, &p, &[1, 5, 10]).unwrap() {
            assert!((pt.q2 - 1.0 / 6.0).abs() < 1e-12);
        }
        let q2 = exact_equilibrium(&model, Equilibrium::GroundState { s: 0.0 }, DiagonalObservable::Q2).unwrap();
        assert!((q2 - 1.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn pair_ferromagnet_ordered_at_full_coupling() {
        let mz2 = exact_equilibrium(&pair_ferro(), Equilibrium::GroundState { s: 1.0 }, DiagonalObservable::Mz2).unwrap();
        assert!((mz2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pair_gap_closed_form() {
        // even sector: -sqrt(a^2 + 4 b^2); lowest odd level: -a
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let rep = exact_gap(&pair_ferro(), &grid).unwrap();
        for p in &rep.points {
            let (a, b) = (p.s, 1.0 - p.s);
            let expect = (a * a + 4.0 * b * b).sqrt() - a;
            assert!((p.gap - expect).abs() < 1e-8, "s = {}: {} vs {expect}", p.s, p.gap);
        }
        let last = rep.points.last().unwrap();
        assert!(last.degenerate);
        assert!((last.gap_nondegenerate.unwrap() - 2.0).abs() < 1e-8);
        assert!((rep.points[0].gap - 2.0).abs() < 1e-9);
    }

    #[test]
    fn driver_gap_is_two_h() {
        let g = generate_regular_graph(8, 3, 1).unwrap();
        let model = ModelSpec::new(g, 0.8).unwrap();
        let rep = exact_gap(&model, &[0.0]).unwrap();
        assert!((rep.points[0].gap - 1.6).abs() < 1e-8);
    }

    #[test]
    fn classical_glass_degenerate_at_full_coupling() {
        let model = ModelSpec::new(generate_regular_graph(8, 3, 5).unwrap(), 1.0).unwrap();
        let rep = exact_gap(&model, &[1.0]).unwrap();
        assert!(rep.points[0].degenerate);
        assert!(rep.points[0].gap.abs() < 1e-7);
    }

    #[test]
    fn slow_quench_approaches_ground_state() {
        let model = ModelSpec::new(make_chain(6).unwrap(), 1.0).unwrap();
        let (_, gs) = ground_state_averages(&model, 0.5).unwrap();
        let mut last = f64::INFINITY;
        for m in [8usize, 32, 128, 512, 2048, 8192] {
            let p = QuenchProtocol::with_slots(6, 0.0, 0.5, m, 1.0).unwrap();
            let v = exact_asymmetric_expectation(&model, &p, DiagonalObservable::Mz2, m).unwrap();
            let dev = (v - gs.mz2).abs() / gs.mz2;
            assert!(dev < last, "m = {m}: deviation {dev} did not shrink");
            last = dev;
        }
        // deviation is linear in the velocity
        assert!(last < 3e-3, "{last}");
    }

    #[test]
    fn slot_marginals_sum_to_one() {
        let model = ModelSpec::new(make_chain(4).unwrap(), 1.0).unwrap();
        let p = QuenchProtocol::with_slots(4, 0.0, 0.5, 8, 1.0).unwrap();
        let marg = exact_slot_marginals(&model, &p).unwrap();
        assert_eq!(marg.len(), 16);
        for (q, mk) in marg.iter().enumerate() {
            assert!((mk.bond + mk.constant + mk.flip - 1.0).abs() < 1e-12);
            assert!((mk.bond - marg[15 - q].bond).abs() < 1e-12);
        }
    }

    #[test]
    fn size_caps() {
        let model = ModelSpec::new(make_chain(15).unwrap(), 1.0).unwrap();
        assert!(matches!(ground_state_averages(&model, 0.3), Err(Error::SizeCap { .. })));
        let model = ModelSpec::new(make_chain(13).unwrap(), 1.0).unwrap();
        assert!(exact_gap(&model, &[0.3]).is_err());
    }
}
