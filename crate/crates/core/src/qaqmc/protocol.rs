use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Velocity prefactor in `v = a N delta_s`.
pub const VELOCITY_PREFACTOR: f64 = 1.0;
/// Default number of evenly spaced measurement slots (the final slot is
/// always added).
pub const DEFAULT_TAU_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuenchMode {
    /// `s` evolves along the operator string.
    Hamiltonian,
    /// `s` is uniform along the string and changes with simulation time.
    SimulationTime,
}

/// Schedule `s_1, ..., s_m` of an operator product `G(s_m) ... G(s_1)`.
///
/// The sampled string is the palindrome `G(s_1) ... G(s_m) G(s_m) ... G(s_1)`
/// of length `2m`; slot `tau` of the forward half sits between string
/// positions `tau` and `tau + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuenchProtocol {
    pub s_start: f64,
    pub s_end: f64,
    /// Realized velocity `a N delta_s` after rounding `m`.
    pub velocity: f64,
    pub power: f64,
    pub m: usize,
    pub mode: QuenchMode,
    pub tau_grid: Vec<usize>,
    s: Vec<f64>,
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidProtocol(format!("s = {s} outside [0, 1]")));
    }
    Ok(())
}

impl QuenchProtocol {
    /// Linear quench from `s_start` to `s_end` at velocity `v` for `n` spins;
    /// `m = round(N (s_end - s_start) / v)`, at least 1, and `delta_s` is
    /// recomputed from the rounded `m`.
    pub fn linear(n: usize, s_start: f64, s_end: f64, v: f64) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidProtocol(format!("velocity must be > 0, got {v}")));
        }
        let span = s_end - s_start;
        let m = ((n as f64 * span / (VELOCITY_PREFACTOR * v)).round() as usize).max(1);
        Self::with_slots(n, s_start, s_end, m, 1.0)
    }

    /// Quench with an explicit string length and power `r`:
    /// `s_j = s_start + (s_end - s_start) (j/m)^r`.
    pub fn with_slots(n: usize, s_start: f64, s_end: f64, m: usize, power: f64) -> Result<Self> {
        check_s(s_start)?;
        check_s(s_end)?;
        if s_end < s_start {
            return Err(Error::InvalidProtocol("s_end < s_start".into()));
        }
        if m == 0 {
            return Err(Error::InvalidProtocol("m must be >= 1".into()));
        }
        if !(power > 0.0) {
            return Err(Error::InvalidProtocol(format!("power must be > 0, got {power}")));
        }
        let span = s_end - s_start;
        let s = (1..=m)
            .map(|j| {
                if j == m {
                    s_end
                } else {
                    s_start + span * (j as f64 / m as f64).powf(power)
                }
            })
            .collect();
        Ok(Self {
            s_start,
            s_end,
            velocity: VELOCITY_PREFACTOR * n as f64 * span / m as f64,
            power,
            m,
            mode: QuenchMode::Hamiltonian,
            tau_grid: default_tau_grid(m),
            s,
        })
    }

    /// All `m` slots at the same `s` (simulation-time strings, equilibrium
    /// checks).
    pub fn constant(s: f64, m: usize) -> Result<Self> {
        let mut p = Self::with_slots(1, s, s, m, 1.0)?;
        p.velocity = 0.0;
        Ok(p)
    }

    pub fn simulation_time(s: f64, m: usize) -> Result<Self> {
        let mut p = Self::constant(s, m)?;
        p.mode = QuenchMode::SimulationTime;
        Ok(p)
    }

    pub fn with_tau_grid(mut self, grid: Vec<usize>) -> Result<Self> {
        if let Some(&tau) = grid.iter().find(|&&t| t == 0 || t > self.m) {
            return Err(Error::TauOutOfRange { tau, m: self.m });
        }
        let mut grid = grid;
        grid.sort_unstable();
        grid.dedup();
        self.tau_grid = grid;
        Ok(self)
    }

    /// `s_j` for `j` in `1..=m`.
    pub fn s_at(&self, j: usize) -> f64 {
        self.s[j - 1]
    }

    pub fn schedule(&self) -> &[f64] {
        &self.s
    }

    /// `s` at 0-based string position `p` in `0..2m`.
    pub fn string_s(&self, p: usize) -> f64 {
        if p < self.m {
            self.s[p]
        } else {
            self.s[2 * self.m - 1 - p]
        }
    }

    pub fn string_len(&self) -> usize {
        2 * self.m
    }
}

/// `DEFAULT_TAU_POINTS` evenly spaced slots plus `m`, or every slot when
/// `m` is small.
pub fn default_tau_grid(m: usize) -> Vec<usize> {
    if m <= DEFAULT_TAU_POINTS {
        return (1..=m).collect();
    }
    let mut grid: Vec<usize> = (1..=DEFAULT_TAU_POINTS)
        .map(|k| ((k * m) as f64 / DEFAULT_TAU_POINTS as f64).round() as usize)
        .filter(|&t| t >= 1)
        .collect();
    grid.push(m);
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Evenly spaced grid of `points` slots ending at `m`.
pub fn even_tau_grid(m: usize, points: usize) -> Vec<usize> {
    let mut g: Vec<usize> = (1..=points.min(m))
        .map(|k| ((k * m) as f64 / points.min(m) as f64).round() as usize)
        .collect();
    g.dedup();
    g
}
