use super::dense::{replica_moments, CLASSICAL_CAP};
use super::spins_of;
use crate::error::{Error, Result};
use crate::model::{classical_energy, CouplingGraph};
use serde::{Deserialize, Serialize};

/// Boltzmann averages of the classical Ising model on a coupling graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalAverages {
    pub e: f64,
    pub mz2: f64,
    pub mz4: f64,
    pub q2: f64,
    pub q4: f64,
}

/// Exact averages at temperature `t` by full enumeration.
pub fn classical_equilibrium(graph: &CouplingGraph, t: f64) -> Result<ClassicalAverages> {
    let n = graph.n();
    if n > CLASSICAL_CAP {
        return Err(Error::SizeCap { n, cap: CLASSICAL_CAP });
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidProtocol(format!("temperature must be positive, got {t}")));
    }
    let energies: Vec<f64> = (0..1usize << n)
        .map(|z| classical_energy(graph, &spins_of(z, n)).expect("sizes agree"))
        .collect();
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (-(e - e_min) / t).exp()).collect();
    let z: f64 = weights.iter().sum();
    let (mut e, mut mz2, mut mz4) = (0.0, 0.0, 0.0);
    for (c, (&w, &en)) in weights.iter().zip(&energies).enumerate() {
        let m = (n as f64 - 2.0 * c.count_ones() as f64) / n as f64;
        e += w * en;
        mz2 += w * m * m;
        mz4 += w * m.powi(4);
    }
    let (q2, q4) = replica_moments(&weights, n);
    Ok(ClassicalAverages { e: e / z, mz2: mz2 / z, mz4: mz4 / z, q2, q4 })
}

/// `(ln Z, <E>)` of a periodic chain of `n` spins with uniform coupling `j`
/// (energy `j sum s_i s_{i+1}`) at temperature `t`.
pub fn chain_transfer_matrix(n: usize, j: f64, t: f64) -> (f64, f64) {
    let beta = 1.0 / t;
    // eigenvalues of [[e^{-bj}, e^{bj}], [e^{bj}, e^{-bj}]]
    let lp = (-beta * j).exp() + (beta * j).exp();
    let lm = (-beta * j).exp() - (beta * j).exp();
    // derivatives with respect to beta
    let dlp = -j * (-beta * j).exp() + j * (beta * j).exp();
    let dlm = -j * (-beta * j).exp() - j * (beta * j).exp();
    let nf = n as i32;
    let z = lp.powi(nf) + lm.powi(nf);
    let dz = n as f64 * (lp.powi(nf - 1) * dlp + lm.powi(nf - 1) * dlm);
    (z.ln(), -dz / z)
}
