use super::exponents::kz_slope_from;
use super::optimize::{linear_fit, nelder_mead, polyfit, Polynomial};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::stats::variance;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// One disorder-averaged observable at size `n` and velocity `v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub n: usize,
    pub v: f64,
    pub y: f64,
    pub y_err: f64,
}

/// Bounds on the scaled velocity `v N^k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScaledWindow {
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl ScaledWindow {
    fn contains(&self, x: f64) -> bool {
        self.min.is_none_or(|m| x >= m) && self.max.is_none_or(|m| x <= m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseOptions {
    /// Quench power; recorded with the result.
    pub r: f64,
    /// Master-curve degree; `None` selects it by cross-validation.
    pub degree: Option<usize>,
    /// Holds `b` fixed and fits `k` alone.
    pub fixed_b: Option<f64>,
    pub b_range: (f64, f64),
    pub k_range: (f64, f64),
    pub window: ScaledWindow,
    /// Drop the highest scaled velocities while their residuals exceed
    /// `exclusion_sigmas`.
    pub auto_high_v: bool,
    pub exclusion_sigmas: f64,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self {
            r: 1.0,
            degree: None,
            fixed_b: None,
            b_range: (-0.5, 2.0),
            k_range: (0.2, 4.0),
            window: ScaledWindow::default(),
            auto_high_v: true,
            exclusion_sigmas: 3.0,
            bootstrap: DEFAULT_BOOTSTRAP,
            seed: 0,
        }
    }
}

pub const DEFAULT_BOOTSTRAP: usize = 200;
pub const DEFAULT_DEGREE: usize = 5;
const DEGREE_CANDIDATES: std::ops::RangeInclusive<usize> = 3..=7;
const CV_FOLDS: usize = 5;
const GRID: usize = 25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    /// `2 beta / nu'`.
    pub b: f64,
    /// `z' r + 1/nu'`.
    pub k: f64,
    pub b_err: f64,
    pub k_err: f64,
    pub r: f64,
    /// Master curve of `ln(y N^b)` against `ln(v N^k)`.
    pub master: Polynomial,
    pub chi2_dof: f64,
    /// Range of `v N^k` over the points used.
    pub window: (f64, f64),
    pub used: Vec<usize>,
    pub excluded: Vec<usize>,
    pub fixed_b: bool,
    pub converged: bool,
    pub bootstrap_resamples: usize,
    /// Points carried no errors and were weighted uniformly.
    pub unit_weights: bool,
}

impl CollapseResult {
    pub fn scaled(&self, p: &CollapsePoint) -> (f64, f64) {
        scaled(p, self.b, self.k)
    }

    /// `x = (1 - b) / k` with first-order propagated error.
    pub fn slope(&self) -> Result<(f64, f64)> {
        let x = kz_slope_from(self.b, self.k)?;
        let err = ((self.b_err / self.k).powi(2) + ((1.0 - self.b) * self.k_err / (self.k * self.k)).powi(2)).sqrt();
        Ok((x, err))
    }
}

/// `(ln(v N^k), ln(y N^b))`.
fn scaled(p: &CollapsePoint, b: f64, k: f64) -> (f64, f64) {
    let ln_n = (p.n as f64).ln();
    (p.v.ln() + k * ln_n, p.y.ln() + b * ln_n)
}

struct Data<'a> {
    points: &'a [CollapsePoint],
    /// Standard deviation of `ln y`.
    sigma: Vec<f64>,
}

impl Data<'_> {
    fn arrays(&self, idx: &[usize], b: f64, k: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut x = Vec::with_capacity(idx.len());
        let mut y = Vec::with_capacity(idx.len());
        let mut s = Vec::with_capacity(idx.len());
        for &i in idx {
            let (a, c) = scaled(&self.points[i], b, k);
            x.push(a);
            y.push(c);
            s.push(self.sigma[i]);
        }
        (x, y, s)
    }

    fn chi2(&self, idx: &[usize], b: f64, k: f64, degree: usize) -> f64 {
        let (x, y, s) = self.arrays(idx, b, k);
        polyfit(&x, &y, &s, degree).map_or(f64::INFINITY, |(_, c)| c)
    }
}

struct Fit {
    b: f64,
    k: f64,
    converged: bool,
}

fn optimize(data: &Data, idx: &[usize], degree: usize, opts: &CollapseOptions, start: Option<(f64, f64)>) -> Fit {
    let (klo, khi) = opts.k_range;
    let dk = (khi - klo) / (GRID - 1) as f64;
    if let Some(b) = opts.fixed_b {
        let k0 = start.map(|s| s.1).unwrap_or_else(|| {
            (0..GRID)
                .map(|j| klo + j as f64 * dk)
                .min_by(|p, q| data.chi2(idx, b, *p, degree).total_cmp(&data.chi2(idx, b, *q, degree)))
                .expect("grid nonempty")
        });
        let m = nelder_mead(|p| data.chi2(idx, b, p[0], degree), &[k0], &[0.5 * dk], 1e-14, 2000);
        return Fit { b, k: m.x[0], converged: m.converged };
    }
    let (blo, bhi) = opts.b_range;
    let db = (bhi - blo) / (GRID - 1) as f64;
    let (b0, k0) = start.unwrap_or_else(|| {
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..GRID {
            for j in 0..GRID {
                let (b, k) = (blo + i as f64 * db, klo + j as f64 * dk);
                let c = data.chi2(idx, b, k, degree);
                if c < best.0 {
                    best = (c, b, k);
                }
            }
        }
        (best.1, best.2)
    });
    let m = nelder_mead(|p| data.chi2(idx, p[0], p[1], degree), &[b0, k0], &[0.5 * db, 0.5 * dk], 1e-14, 4000);
    Fit { b: m.x[0], k: m.x[1], converged: m.converged }
}

fn check_counts(points: &[CollapsePoint], idx: &[usize]) -> Result<()> {
    let mut per_n: BTreeMap<usize, BTreeSet<u64>> = BTreeMap::new();
    for &i in idx {
        per_n.entry(points[i].n).or_default().insert(points[i].v.to_bits());
    }
    if per_n.len() < 3 {
        return Err(Error::InsufficientData(format!("collapse needs >= 3 sizes, have {}", per_n.len())));
    }
    if let Some((n, vs)) = per_n.iter().find(|(_, vs)| vs.len() < 4) {
        return Err(Error::InsufficientData(format!("size {n} has {} velocities, need >= 4", vs.len())));
    }
    Ok(())
}

fn cv_score(data: &Data, idx: &[usize], b: f64, k: f64, degree: usize) -> f64 {
    let (x, y, s) = data.arrays(idx, b, k);
    let mut score = 0.0;
    for fold in 0..CV_FOLDS {
        let train: Vec<usize> = (0..x.len()).filter(|i| i % CV_FOLDS != fold).collect();
        let pick = |v: &[f64]| train.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let Some((poly, _)) = polyfit(&pick(&x), &pick(&y), &pick(&s), degree) else {
            return f64::INFINITY;
        };
        score += (0..x.len())
            .filter(|i| i % CV_FOLDS == fold)
            .map(|i| ((y[i] - poly.eval(x[i])) / s[i]).powi(2))
            .sum::<f64>();
    }
    score
}

/// Largest admissible exclusion, as a fraction of the points.
const MAX_EXCLUDED_FRACTION: f64 = 0.5;

/// Removes points from the high-velocity end: the cut is the smallest one
/// after which the collapse is statistically acceptable (chi-square per
/// degree of freedom within `exclusion_sigmas` of one), or the one with the
/// lowest chi-square per degree of freedom when none is.
fn high_velocity_cut(data: &Data, idx: Vec<usize>, fit: Fit, degree: usize, opts: &CollapseOptions) -> (Vec<usize>, Fit) {
    let free = if opts.fixed_b.is_some() { 1 } else { 2 };
    let quality = |set: &[usize], f: &Fit| {
        let dof = set.len().saturating_sub(degree + 1 + free).max(1) as f64;
        let chi2_dof = data.chi2(set, f.b, f.k, degree) / dof;
        (chi2_dof, chi2_dof <= 1.0 + opts.exclusion_sigmas * (2.0 / dof).sqrt())
    };
    let (q0, ok0) = quality(&idx, &fit);
    if ok0 {
        return (idx, fit);
    }
    let mut order = idx.clone();
    order.sort_by(|&a, &b| {
        let x = |i: usize| scaled(&data.points[i], 0.0, fit.k).0;
        x(b).total_cmp(&x(a))
    });
    let max_cut = (idx.len() as f64 * MAX_EXCLUDED_FRACTION) as usize;
    let mut best = (q0, idx.clone(), fit);
    for cut in 1..=max_cut {
        let trial: Vec<usize> = idx.iter().copied().filter(|i| !order[..cut].contains(i)).collect();
        if check_counts(data.points, &trial).is_err() {
            break;
        }
        let f = optimize(data, &trial, degree, opts, None);
        let (q, ok) = quality(&trial, &f);
        if ok {
            return (trial, f);
        }
        if q < best.0 {
            best = (q, trial, f);
        }
    }
    (best.1, best.2)
}

fn select_degree(data: &Data, idx: &[usize], fit: &Fit) -> Option<usize> {
    DEGREE_CANDIDATES
        .filter(|&d| d + 3 < idx.len())
        .min_by(|&p, &q| cv_score(data, idx, fit.b, fit.k, p).total_cmp(&cv_score(data, idx, fit.b, fit.k, q)))
}

/// Fits `y N^b = f(v N^k)` with `ln f` a polynomial in `ln(v N^k)`.
///
/// The exponents are found by a coarse grid followed by a simplex search;
/// the polynomial coefficients are linear least squares for each trial.
/// Points outside `opts.window`, and high-velocity points that do not
/// collapse, are excluded iteratively. Errors on `(b, k)` come from a
/// parametric bootstrap of the points within their errors.
pub fn collapse_fit(points: &[CollapsePoint], opts: &CollapseOptions) -> Result<CollapseResult> {
    if let Some(p) = points.iter().find(|p| !(p.y > 0.0 && p.v > 0.0)) {
        return Err(Error::InsufficientData(format!("collapse needs y > 0 and v > 0, got {p:?}")));
    }
    let all: Vec<usize> = (0..points.len()).collect();
    check_counts(points, &all)?;
    let unit_weights = points.iter().any(|p| !(p.y_err > 0.0));
    let sigma = points.iter().map(|p| if unit_weights { 1.0 } else { p.y_err / p.y }).collect();
    let data = Data { points, sigma };

    let mut degree = opts.degree.unwrap_or(DEFAULT_DEGREE);
    let mut active = all.clone();
    let mut fit = optimize(&data, &active, degree, opts, None);
    // choose the degree before exclusion so that a too-stiff master curve is
    // not mistaken for a high-velocity crossover
    if opts.degree.is_none() {
        if let Some(d) = select_degree(&data, &active, &fit).filter(|&d| d != degree) {
            degree = d;
            fit = optimize(&data, &active, degree, opts, None);
        }
    }
    for _ in 0..10 {
        let mut next: Vec<usize> =
            all.iter().copied().filter(|&i| opts.window.contains(scaled(&points[i], 0.0, fit.k).0.exp())).collect();
        check_counts(points, &next)?;
        if next != active {
            fit = optimize(&data, &next, degree, opts, None);
        }
        if opts.auto_high_v && !unit_weights {
            (next, fit) = high_velocity_cut(&data, next, fit, degree, opts);
        }
        if next == active {
            break;
        }
        active = next;
    }

    if opts.degree.is_none() {
        if let Some(d) = select_degree(&data, &active, &fit).filter(|&d| d != degree) {
            degree = d;
            fit = optimize(&data, &active, degree, opts, Some((fit.b, fit.k)));
        }
    }

    let (x, y, s) = data.arrays(&active, fit.b, fit.k);
    let (master, chi2) = polyfit(&x, &y, &s, degree).ok_or_else(|| Error::InsufficientData("too few points for degree".into()))?;
    let free = if opts.fixed_b.is_some() { 1 } else { 2 };
    let dof = active.len().saturating_sub(degree + 1 + free).max(1);
    let chi2_dof = chi2 / dof as f64;

    // parametric bootstrap in ln y; without point errors the residual
    // scale of the fit stands in for them
    let resid_scale = if unit_weights { chi2_dof.sqrt() } else { 1.0 };
    let mut rng = rng_from_seed(opts.seed);
    let (mut bs, mut ks) = (Vec::with_capacity(opts.bootstrap), Vec::with_capacity(opts.bootstrap));
    for _ in 0..opts.bootstrap {
        let resampled: Vec<CollapsePoint> = points
            .iter()
            .zip(&data.sigma)
            .map(|(p, &sg)| {
                let noise: f64 = rng.sample(StandardNormal);
                CollapsePoint { y: p.y * (sg * resid_scale * noise).exp(), ..*p }
            })
            .collect();
        let d = Data { points: &resampled, sigma: data.sigma.clone() };
        let f = optimize(&d, &active, degree, opts, Some((fit.b, fit.k)));
        bs.push(f.b);
        ks.push(f.k);
    }
    let std = |v: &[f64]| if v.len() > 1 { variance(v).sqrt() } else { 0.0 };

    let scaled_v: Vec<f64> = active.iter().map(|&i| scaled(&points[i], fit.b, fit.k).0.exp()).collect();
    let window = scaled_v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok(CollapseResult {
        b: fit.b,
        k: fit.k,
        b_err: if opts.fixed_b.is_some() { 0.0 } else { std(&bs) },
        k_err: std(&ks),
        r: opts.r,
        master,
        chi2_dof,
        window,
        excluded: all.iter().copied().filter(|i| !active.contains(i)).collect(),
        used: active,
        fixed_b: opts.fixed_b.is_some(),
        converged: fit.converged,
        bootstrap_resamples: opts.bootstrap,
        unit_weights,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeOptions {
    /// Lower bound on `v N^k` for the power-law regime.
    pub min_scaled: Option<f64>,
    /// Upper bound; defaults to the collapse window.
    pub max_scaled: Option<f64>,
    pub exclusion_sigmas: f64,
    /// Agreement tolerance in joint standard deviations.
    pub agreement_sigmas: f64,
}

impl Default for SlopeOptions {
    fn default() -> Self {
        Self { min_scaled: None, max_scaled: None, exclusion_sigmas: 3.0, agreement_sigmas: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    /// Fitted log-log slope of the collapsed data.
    pub slope: f64,
    pub slope_err: f64,
    /// `(1 - b) / k` from the collapse.
    pub x_expected: f64,
    pub x_err: f64,
    pub agree: bool,
    pub used: Vec<usize>,
    pub excluded: Vec<usize>,
}

/// Raises the lower end of the slope window until a straight line fits:
/// the smallest cutoff whose chi2/dof lies within `sigmas` standard
/// deviations of one. Without errors the upper half of the points is kept.
fn power_law_regime(
    mut idx: Vec<usize>,
    x_of: impl Fn(usize) -> f64,
    unit_weights: bool,
    sigmas: f64,
    chi2_of: impl Fn(&[usize]) -> Option<f64>,
) -> Vec<usize> {
    idx.sort_by(|&a, &b| x_of(a).total_cmp(&x_of(b)));
    if unit_weights {
        let half = idx.len() / 2;
        return idx.split_off(half.min(idx.len().saturating_sub(3)));
    }
    let mut best: Option<(f64, usize)> = None;
    for start in 0..idx.len().saturating_sub(2) {
        let set = &idx[start..];
        let Some(chi2) = chi2_of(set) else { continue };
        let dof = (set.len() - 2).max(1) as f64;
        if chi2 / dof <= 1.0 + sigmas * (2.0 / dof).sqrt() {
            return set.to_vec();
        }
        if best.is_none_or(|(q, _)| chi2 / dof < q) {
            best = Some((chi2 / dof, start));
        }
    }
    match best {
        Some((_, start)) => idx.split_off(start),
        None => idx,
    }
}

/// Fits a straight line to the collapsed data in the power-law regime and
/// compares its slope with `-(1 - b)/k`. Only points used by the collapse
/// are considered.
pub fn verify_slope(points: &[CollapsePoint], result: &CollapseResult, opts: &SlopeOptions) -> Result<SlopeReport> {
    let window = ScaledWindow { min: opts.min_scaled, max: opts.max_scaled.or(Some(result.window.1 * (1.0 + 1e-12))) };
    let mut idx: Vec<usize> =
        result.used.iter().copied().filter(|&i| i < points.len() && window.contains(result.scaled(&points[i]).0.exp())).collect();
    let sigma_of = |p: &CollapsePoint| if result.unit_weights || !(p.y_err > 0.0) { 1.0 } else { p.y_err / p.y };
    let fit_line = |idx: &[usize]| {
        let (x, y): (Vec<f64>, Vec<f64>) = idx.iter().map(|&i| result.scaled(&points[i])).unzip();
        let s: Vec<f64> = idx.iter().map(|&i| sigma_of(&points[i])).collect();
        (linear_fit(&x, &y, &s), x, y, s)
    };
    if opts.min_scaled.is_none() {
        idx = power_law_regime(idx, |i| result.scaled(&points[i]).0, result.unit_weights, opts.exclusion_sigmas, |set| {
            fit_line(set).0.map(|l| l.4)
        });
    }
    loop {
        if idx.len() < 3 {
            return Err(Error::InsufficientData(format!("slope window holds {} points", idx.len())));
        }
        let (line, x, y, s) = fit_line(&idx);
        let (a, b, _, _, chi2) = line.ok_or_else(|| Error::Degenerate("slope window has one velocity".into()))?;
        let scale = if result.unit_weights { (chi2 / (idx.len() - 2) as f64).sqrt().max(1e-300) } else { 1.0 };
        let mut order: Vec<usize> = (0..idx.len()).collect();
        order.sort_by(|&p, &q| x[q].total_cmp(&x[p]));
        let drop: Vec<usize> = order
            .iter()
            .take_while(|&&i| ((y[i] - a - b * x[i]) / (s[i] * scale)).abs() > opts.exclusion_sigmas)
            .map(|&i| idx[i])
            .collect();
        if drop.is_empty() {
            break;
        }
        idx.retain(|i| !drop.contains(i));
    }
    let (line, ..) = fit_line(&idx);
    let (_, slope, _, err, chi2) = line.expect("checked above");
    let dof = (idx.len() - 2).max(1) as f64;
    let slope_err = err * (chi2 / dof).sqrt().max(1.0);
    let (x_expected, x_err) = result.slope()?;
    let diff = (slope + x_expected).abs();
    let agree = diff <= opts.agreement_sigmas * slope_err.hypot(x_err) || diff <= 1e-9;
    Ok(SlopeReport {
        slope,
        slope_err,
        x_expected,
        x_err,
        agree,
        excluded: (0..points.len()).filter(|i| !idx.contains(i)).collect(),
        used: idx,
    })
}
