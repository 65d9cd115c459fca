//! Overlap and magnetization estimators, the Binder cumulant, and disorder
//! averaging of per-realization series.

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::stats::{bootstrap_std, mean, variance};
use serde::{Deserialize, Serialize};

/// Edwards-Anderson overlap `(1/N) sum_i s_i(1) s_i(2)`.
pub fn overlap_q(a: &[i8], b: &[i8]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch { expected: a.len(), got: b.len() });
    }
    if a.is_empty() {
        return Err(Error::Degenerate("empty configuration".into()));
    }
    Ok(overlap_unchecked(a, b))
}

#[inline]
pub(crate) fn overlap_unchecked(a: &[i8], b: &[i8]) -> f64 {
    let dot: i64 = a.iter().zip(b).map(|(&x, &y)| i64::from(x * y)).sum();
    dot as f64 / a.len() as f64
}

#[inline]
pub(crate) fn magnetization(a: &[i8]) -> f64 {
    a.iter().map(|&x| i64::from(x)).sum::<i64>() as f64 / a.len() as f64
}

/// Binder cumulant `U = (3 - <q^4>/<q^2>^2) / 2`.
pub fn binder(q2_mean: f64, q4_mean: f64) -> Result<f64> {
    if !(q2_mean > 0.0) {
        return Err(Error::Degenerate(format!("<q^2> = {q2_mean}")));
    }
    Ok(0.5 * (3.0 - q4_mean / (q2_mean * q2_mean)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Hamiltonian,
    SimulationTime,
    Thermal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolDescriptor {
    pub kind: ProtocolKind,
    /// `ds` per unit imaginary time (quantum) or `dT` per sweep (thermal).
    pub velocity: f64,
    /// Operator-string length `m` (quantum) or number of sweeps (thermal).
    pub m: usize,
    pub r: f64,
    /// `s` (quantum) or `T` (thermal) at the start and end of the quench.
    pub start: f64,
    pub end: f64,
    pub update: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub tau: usize,
    pub s_or_t: f64,
    pub q2_mean: f64,
    pub q2_err: f64,
    pub q4_mean: f64,
    pub q4_err: f64,
    pub mz2_mean: f64,
    pub mz2_err: f64,
    pub n_samples: usize,
}

/// Per-realization observable estimates along one quench.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub model_id: String,
    pub graph_hash: String,
    pub n: usize,
    pub protocol: ProtocolDescriptor,
    pub entries: Vec<SeriesEntry>,
    pub seed: u64,
    pub realization: u64,
    #[serde(default)]
    pub flags: Vec<String>,
}

impl ObservableSeries {
    pub fn last(&self) -> Option<&SeriesEntry> {
        self.entries.last()
    }

    /// Checks the range invariants of the stored moments.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for e in &self.entries {
            let ok = (-tol..=1.0 + tol).contains(&e.q2_mean)
                && (-tol..=1.0 + tol).contains(&e.q4_mean)
                && e.q4_mean >= e.q2_mean * e.q2_mean - tol
                && e.q2_err >= 0.0
                && e.q4_err >= 0.0
                && e.mz2_err >= 0.0;
            if !ok {
                return Err(Error::Inconsistent(format!("entry at tau {} out of range", e.tau)));
            }
        }
        Ok(())
    }
}

/// How the Binder cumulant of a disorder ensemble is formed.
pub const BINDER_CONVENTION: &str = "ratio_of_disorder_averaged_moments";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedEntry {
    pub tau: usize,
    pub s_or_t: f64,
    pub q2: f64,
    pub q2_err: f64,
    pub q4: f64,
    pub q4_err: f64,
    pub mz2: f64,
    pub mz2_err: f64,
    pub binder: f64,
    pub binder_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragedSeries {
    pub n: usize,
    pub velocity: f64,
    pub kind: ProtocolKind,
    pub realizations: usize,
    pub binder_convention: String,
    pub entries: Vec<AveragedEntry>,
}

/// Number of bootstrap resamples used for the Binder error.
pub const BINDER_BOOTSTRAP: usize = 200;

fn combined(values: &[f64], errs: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let within = errs.iter().map(|e| e * e).sum::<f64>() / k;
    (mean(values), ((variance(values) + within) / k).sqrt())
}

/// Averages realizations sharing `(N, v, kind)`. The Binder cumulant is
/// formed from the averaged moments; its error comes from a bootstrap over
/// realizations.
pub fn disorder_average(group: &[ObservableSeries], bootstrap_seed: u64) -> Result<AveragedSeries> {
    let first = group.first().ok_or_else(|| Error::InsufficientData("empty group".into()))?;
    for s in group {
        let same_v = (s.protocol.velocity - first.protocol.velocity).abs()
            <= 1e-12 * first.protocol.velocity.abs().max(1e-300);
        if s.n != first.n || s.protocol.kind != first.protocol.kind || !same_v {
            return Err(Error::Inconsistent("series differ in (N, v, kind)".into()));
        }
        if s.entries.len() != first.entries.len() {
            return Err(Error::Inconsistent("series differ in tau grid".into()));
        }
    }
    let mut rng = rng_from_seed(bootstrap_seed);
    let mut entries = Vec::with_capacity(first.entries.len());
    for (t, e0) in first.entries.iter().enumerate() {
        let col = |f: fn(&SeriesEntry) -> f64| group.iter().map(|s| f(&s.entries[t])).collect::<Vec<_>>();
        let (q2s, q4s, mzs) = (col(|e| e.q2_mean), col(|e| e.q4_mean), col(|e| e.mz2_mean));
        let (q2, q2_err) = combined(&q2s, &col(|e| e.q2_err));
        let (q4, q4_err) = combined(&q4s, &col(|e| e.q4_err));
        let (mz2, mz2_err) = combined(&mzs, &col(|e| e.mz2_err));
        let binder = binder(q2, q4).unwrap_or(f64::NAN);
        let binder_err = if group.len() > 1 {
            bootstrap_std(&mut rng, group.len(), BINDER_BOOTSTRAP, |idx| {
                let a = idx.iter().map(|&i| q2s[i]).sum::<f64>() / idx.len() as f64;
                let b = idx.iter().map(|&i| q4s[i]).sum::<f64>() / idx.len() as f64;
                self::binder(a, b).unwrap_or(f64::NAN)
            })
        } else {
            0.0
        };
        entries.push(AveragedEntry {
            tau: e0.tau,
            s_or_t: e0.s_or_t,
            q2,
            q2_err,
            q4,
            q4_err,
            mz2,
            mz2_err,
            binder,
            binder_err,
        });
    }
    Ok(AveragedSeries {
        n: first.n,
        velocity: first.protocol.velocity,
        kind: first.protocol.kind,
        realizations: group.len(),
        binder_convention: BINDER_CONVENTION.to_owned(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap_q(&[1, -1, 1], &[1, -1, 1]).unwrap(), 1.0);
        assert_eq!(overlap_q(&[1, -1, 1], &[-1, 1, -1]).unwrap(), -1.0);
        assert_eq!(overlap_q(&[1, 1, -1, -1], &[1, -1, 1, -1]).unwrap(), 0.0);
        assert!(overlap_q(&[1, 1], &[1]).is_err());
    }

    #[test]
    fn binder_examples() {
        assert_eq!(binder(0.5, 3.0 * 0.25).unwrap(), 0.0);
        assert!(binder(0.2, 3.0 * 0.04).unwrap().abs() < 1e-15);
        assert_eq!(binder(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(binder(0.5, 0.5).unwrap(), 0.5);
        assert!(binder(0.0, 0.0).is_err());
    }

    pub(crate) fn series(n: usize, v: f64, realization: u64, q2: &[(f64, f64)]) -> ObservableSeries {
        ObservableSeries {
            model_id: "test".into(),
            graph_hash: String::new(),
            n,
            protocol: ProtocolDescriptor {
                kind: ProtocolKind::Hamiltonian,
                velocity: v,
                m: q2.len(),
                r: 1.0,
                start: 0.0,
                end: 1.0,
                update: "cluster".into(),
            },
            entries: q2
                .iter()
                .enumerate()
                .map(|(t, &(m, e))| SeriesEntry {
                    tau: t + 1,
                    s_or_t: t as f64,
                    q2_mean: m,
                    q2_err: e,
                    q4_mean: 2.0 * m * m,
                    q4_err: e,
                    mz2_mean: m,
                    mz2_err: e,
                    n_samples: 10,
                })
                .collect(),
            seed: realization,
            realization,
            flags: vec![],
        }
    }

    #[test]
    fn single_realization_passes_through() {
        let s = series(8, 0.1, 0, &[(0.3, 0.01), (0.4, 0.02)]);
        let a = disorder_average(std::slice::from_ref(&s), 0).unwrap();
        assert_eq!(a.entries[1].q2, 0.4);
        assert!((a.entries[1].q2_err - 0.02).abs() < 1e-15);
        assert!((a.entries[0].binder - 0.5).abs() < 1e-12);
    }

    #[test]
    fn duplicates_shrink_error() {
        let s = series(8, 0.1, 0, &[(0.3, 0.01)]);
        let a = disorder_average(&vec![s; 16], 0).unwrap();
        assert!((a.entries[0].q2 - 0.3).abs() < 1e-15);
        assert!((a.entries[0].q2_err - 0.01 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_groups_rejected() {
        let a = series(8, 0.1, 0, &[(0.3, 0.01)]);
        let b = series(16, 0.1, 1, &[(0.3, 0.01)]);
        assert!(disorder_average(&[a, b], 0).is_err());
        assert!(disorder_average(&[], 0).is_err());
    }

    #[test]
    fn synthetic_population_recovered() {
        // realizations drawn from N(0.25, 0.05^2), each with within-run noise 0.01
        let mut rng = crate::rng::rng_from_seed(17);
        let pop = Normal::new(0.25, 0.05).unwrap();
        let k = 400;
        let group: Vec<_> = (0..k)
            .map(|r| {
                let m = pop.sample(&mut rng) + 0.01 * (rng.random::<f64>() - 0.5) * 3.46;
                series(8, 0.1, r, &[(m, 0.01)])
            })
            .collect();
        let a = disorder_average(&group, 0).unwrap();
        let e = &a.entries[0];
        assert!((e.q2 - 0.25).abs() < 3.0 * e.q2_err, "{} +- {}", e.q2, e.q2_err);
        // expected error sqrt((0.05^2 + 2 * 0.01^2) / 400) ~ 0.0026
        assert!((e.q2_err - 0.0026).abs() < 0.0005, "{}", e.q2_err);
    }
}
