use super::optimize::linear_fit;
use crate::error::{Error, Result};
use crate::observables::{binder, ObservableSeries};
use crate::rng::rng_from_seed;
use crate::stats::variance;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Binder cumulant `U(s)` of one size on an increasing grid of `s` (or `T`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinderCurve {
    pub n: usize,
    pub s: Vec<f64>,
    pub u: Vec<f64>,
}

impl BinderCurve {
    pub fn new(n: usize, s: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if s.len() != u.len() {
            return Err(Error::SizeMismatch { expected: s.len(), got: u.len() });
        }
        if s.len() < 3 {
            return Err(Error::InsufficientData("a curve needs >= 3 points".into()));
        }
        if !s.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Inconsistent("curve grid must be strictly increasing".into()));
        }
        Ok(Self { n, s, u })
    }

    /// Curve from a set of realizations: moments are averaged over the
    /// listed realizations before `U` is formed. The grid is sorted.
    pub fn from_realizations(group: &[ObservableSeries], pick: &[usize]) -> Result<Self> {
        let first = group.first().ok_or_else(|| Error::InsufficientData("no realizations".into()))?;
        let mut rows: Vec<(f64, f64)> = Vec::with_capacity(first.entries.len());
        for (t, e) in first.entries.iter().enumerate() {
            let (mut q2, mut q4) = (0.0, 0.0);
            for &r in pick {
                let entry = group[r].entries.get(t).ok_or_else(|| Error::Inconsistent("ragged series".into()))?;
                q2 += entry.q2_mean;
                q4 += entry.q4_mean;
            }
            let k = pick.len() as f64;
            rows.push((e.s_or_t, binder(q2 / k, q4 / k)?));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        rows.dedup_by(|a, b| a.0 == b.0);
        let (s, u) = rows.into_iter().unzip();
        Self::new(first.n, s, u)
    }

    /// Quadratic through the three grid points nearest to `x`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.s.len();
        let i = self.s.partition_point(|&v| v < x).clamp(1, n - 1);
        let start = if i == 1 {
            0
        } else if i == n - 1 || (x - self.s[i - 1]) < (self.s[i] - x) {
            i - 2
        } else {
            i - 1
        };
        let (xs, ys) = (&self.s[start..start + 3], &self.u[start..start + 3]);
        (0..3)
            .map(|a| {
                let mut w = ys[a];
                for b in 0..3 {
                    if a != b {
                        w *= (x - xs[b]) / (xs[a] - xs[b]);
                    }
                }
                w
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// All roots of `U_a - U_b` in the overlap of the two grids.
    pub roots: Vec<f64>,
    /// The crossing when it is unique.
    pub s_star: Option<f64>,
    pub ambiguous: bool,
}

/// Locates crossings of two Binder curves: each is interpolated locally by
/// quadratics, sign changes of the difference are bracketed on the union of
/// the grids and refined by bisection.
pub fn crossing_point(a: &BinderCurve, b: &BinderCurve) -> Result<Crossing> {
    let lo = a.s[0].max(b.s[0]);
    let hi = a.s.last().unwrap().min(*b.s.last().unwrap());
    if !(lo < hi) {
        return Err(Error::InsufficientData("curves do not overlap".into()));
    }
    let mut grid: Vec<f64> = a.s.iter().chain(&b.s).copied().filter(|&x| x >= lo && x <= hi).collect();
    grid.extend([lo, hi]);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let diff = |x: f64| a.interpolate(x) - b.interpolate(x);
    let values: Vec<f64> = grid.iter().map(|&x| diff(x)).collect();
    let scale = a.u.iter().chain(&b.u).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let zero = |v: f64| v.abs() <= 1e-13 * scale;

    let mut roots = Vec::new();
    let mut last_sign = 0.0;
    let mut last_x = grid[0];
    for (&x, &v) in grid.iter().zip(&values) {
        if zero(v) {
            continue;
        }
        let sign = v.signum();
        if last_sign != 0.0 && sign != last_sign {
            let (mut l, mut r) = (last_x, x);
            let mut fl = diff(l);
            for _ in 0..100 {
                let mid = 0.5 * (l + r);
                let fm = diff(mid);
                if zero(fm) {
                    l = mid;
                    r = mid;
                    break;
                }
                if fm.signum() == fl.signum() {
                    l = mid;
                    fl = fm;
                } else {
                    r = mid;
                }
            }
            roots.push(0.5 * (l + r));
        }
        last_sign = sign;
        last_x = x;
    }
    if roots.is_empty() {
        return Err(Error::NoCrossing);
    }
    let ambiguous = roots.len() > 1;
    Ok(Crossing { s_star: (!ambiguous).then(|| roots[0]), roots, ambiguous })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingEstimate {
    pub n_a: usize,
    pub n_b: usize,
    pub s_star: f64,
    pub err: f64,
    pub roots: Vec<f64>,
    pub ambiguous: bool,
    /// Bootstrap resamples that produced a unique crossing.
    pub valid_resamples: usize,
    pub resamples: usize,
}

/// Crossing of two disorder ensembles with its error from a bootstrap over
/// realizations.
pub fn crossing_bootstrap(
    group_a: &[ObservableSeries],
    group_b: &[ObservableSeries],
    resamples: usize,
    seed: u64,
) -> Result<CrossingEstimate> {
    let all = |g: &[ObservableSeries]| (0..g.len()).collect::<Vec<_>>();
    let ca = BinderCurve::from_realizations(group_a, &all(group_a))?;
    let cb = BinderCurve::from_realizations(group_b, &all(group_b))?;
    let central = crossing_point(&ca, &cb)?;
    let mut rng = rng_from_seed(seed);
    let mut draws = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let pa: Vec<usize> = (0..group_a.len()).map(|_| rng.random_range(0..group_a.len())).collect();
        let pb: Vec<usize> = (0..group_b.len()).map(|_| rng.random_range(0..group_b.len())).collect();
        let (Ok(ra), Ok(rb)) = (BinderCurve::from_realizations(group_a, &pa), BinderCurve::from_realizations(group_b, &pb)) else {
            continue;
        };
        if let Ok(Crossing { s_star: Some(s), .. }) = crossing_point(&ra, &rb) {
            draws.push(s);
        }
    }
    let s_star = central.s_star.unwrap_or(central.roots[0]);
    Ok(CrossingEstimate {
        n_a: ca.n,
        n_b: cb.n,
        s_star,
        err: if draws.len() > 1 { variance(&draws).sqrt() } else { f64::NAN },
        roots: central.roots,
        ambiguous: central.ambiguous,
        valid_resamples: draws.len(),
        resamples,
    })
}

/// Crossing estimate attributed to a size, for extrapolation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingPoint {
    pub n: f64,
    pub s_star: f64,
    pub err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScExtrapolation {
    pub s_c: f64,
    pub s_c_err: f64,
    pub c: f64,
    pub c_err: f64,
    pub omega: f64,
    pub omega_err: f64,
    pub chi2_dof: f64,
    /// The data do not pin down the correction exponent.
    pub omega_unconstrained: bool,
}

const OMEGA_RANGE: (f64, f64) = (0.05, 5.0);
const OMEGA_GRID: usize = 400;
pub const EXTRAPOLATION_BOOTSTRAP: usize = 200;

struct FixedOmega {
    s_c: f64,
    c: f64,
    s_c_err: f64,
    c_err: f64,
    chi2: f64,
}

fn fit_at(points: &[CrossingPoint], sigma: &[f64], omega: f64) -> Option<FixedOmega> {
    let x: Vec<f64> = points.iter().map(|p| p.n.powf(-omega)).collect();
    let y: Vec<f64> = points.iter().map(|p| p.s_star).collect();
    let (s_c, c, s_c_err, c_err, chi2) = linear_fit(&x, &y, sigma)?;
    Some(FixedOmega { s_c, c, s_c_err, c_err, chi2 })
}

fn best_omega(points: &[CrossingPoint], sigma: &[f64]) -> Option<(f64, FixedOmega)> {
    let (lo, hi) = OMEGA_RANGE;
    let ratio = (hi / lo).ln();
    let at = |j: f64| lo * (ratio * j / (OMEGA_GRID - 1) as f64).exp();
    let (mut best_j, mut best) = (0usize, f64::INFINITY);
    for j in 0..OMEGA_GRID {
        if let Some(f) = fit_at(points, sigma, at(j as f64)) {
            if f.chi2 < best {
                best = f.chi2;
                best_j = j;
            }
        }
    }
    // golden-section refinement inside the neighbouring grid cells
    let (mut a, mut b) = (best_j.saturating_sub(1) as f64, (best_j + 1).min(OMEGA_GRID - 1) as f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let cost = |j: f64| fit_at(points, sigma, at(j)).map_or(f64::INFINITY, |f| f.chi2);
    for _ in 0..80 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if cost(c) < cost(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let omega = at(0.5 * (a + b));
    let fit = fit_at(points, sigma, omega)?;
    Some((omega, fit))
}

/// Weighted fit of `s*(N) = s_c + c N^-omega`. The exponent is found by a
/// scan with local refinement; errors come from a parametric bootstrap of
/// the crossings. The correction exponent is flagged as unconstrained when
/// the amplitude `c` is compatible with zero or the best exponent sits on
/// the edge of the scan.
pub fn extrapolate_sc(crossings: &[CrossingPoint], seed: u64) -> Result<ScExtrapolation> {
    if crossings.len() < 3 {
        return Err(Error::InsufficientData(format!("extrapolation needs >= 3 crossings, have {}", crossings.len())));
    }
    let weighted = crossings.iter().all(|p| p.err > 0.0);
    let sigma: Vec<f64> = crossings.iter().map(|p| if weighted { p.err } else { 1.0 }).collect();
    let (omega, fit) = best_omega(crossings, &sigma).ok_or_else(|| Error::Degenerate("sizes must differ".into()))?;
    let dof = crossings.len().saturating_sub(3).max(1) as f64;
    let chi2_dof = fit.chi2 / dof;

    let mut draws = Vec::new();
    if weighted {
        let mut rng = rng_from_seed(seed);
        for _ in 0..EXTRAPOLATION_BOOTSTRAP {
            let pts: Vec<CrossingPoint> = crossings
                .iter()
                .map(|p| CrossingPoint { s_star: p.s_star + p.err * rng.sample::<f64, _>(StandardNormal), ..*p })
                .collect();
            if let Some((w, f)) = best_omega(&pts, &sigma) {
                draws.push((f.s_c, f.c, w));
            }
        }
    }
    let spread = |k: usize| -> f64 {
        let v: Vec<f64> = draws.iter().map(|d| [d.0, d.1, d.2][k]).collect();
        if v.len() > 1 {
            variance(&v).sqrt()
        } else {
            0.0
        }
    };
    let (s_c_err, c_err, omega_err) = if weighted { (spread(0), spread(1), spread(2)) } else { (fit.s_c_err * chi2_dof.sqrt(), fit.c_err * chi2_dof.sqrt(), 0.0) };
    let scale = crossings.iter().fold(0.0f64, |m, p| m.max(p.s_star.abs())).max(1e-300);
    let c_zero = if weighted { fit.c.abs() <= 2.0 * fit.c_err } else { fit.c.abs() <= 1e-10 * scale };
    let edge = omega <= OMEGA_RANGE.0 * 1.01 || omega >= OMEGA_RANGE.1 * 0.99;
    Ok(ScExtrapolation {
        s_c: fit.s_c,
        s_c_err,
        c: fit.c,
        c_err,
        omega,
        omega_err,
        chi2_dof,
        omega_unconstrained: c_zero || edge,
    })
}

/// Pairs `(N, N + delta)` among the available sizes.
pub fn crossing_pairs(sizes: &[usize], delta: usize) -> Vec<(usize, usize)> {
    sizes.iter().filter(|&&n| sizes.contains(&(n + delta))).map(|&n| (n, n + delta)).collect()
}
