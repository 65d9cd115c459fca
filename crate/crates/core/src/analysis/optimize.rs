//! Small numerical helpers: a derivative-free simplex minimizer and
//! weighted polynomial least squares.

use nalgebra::{DMatrix, DVector};

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub converged: bool,
}

/// Nelder-Mead simplex minimization starting from `x0` with initial edge
/// lengths `step`. Converged when the spread of simplex values and the
/// simplex size both drop below `tol`.
pub(crate) fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], tol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step[i];
        let v = f(&x);
        simplex.push((x, v));
    }
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };
    let mut converged = false;
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (simplex[dim].1 - simplex[0].1).abs();
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= tol * (1.0 + simplex[0].1.abs()) && size <= tol.sqrt() {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            centroid.iter_mut().zip(x).for_each(|(c, v)| *c += v / dim as f64);
        }
        let worst = simplex[dim].clone();
        let reflected = combine(&centroid, &worst.0, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = combine(&centroid, &worst.0, -2.0);
            let fe = f(&expanded);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let (target, ft) = if fr < worst.1 { (reflected, fr) } else { (worst.0.clone(), worst.1) };
            let contracted = combine(&centroid, &target, 0.5);
            let fc = f(&contracted);
            if fc < ft {
                simplex[dim] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &entry.0, 0.5);
                    let v = f(&x);
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, _) = simplex.swap_remove(0);
    Minimum { x, converged }
}

/// Polynomial in a centred and scaled variable `u = (x - center) / scale`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Polynomial {
    pub center: f64,
    pub scale: f64,
    /// Coefficients of `u^0, u^1, ...`.
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.scale;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Weighted least-squares polynomial of `degree` through `(x, y)` with
/// standard deviations `sigma`. Returns the polynomial and its chi-square.
pub(crate) fn polyfit(x: &[f64], y: &[f64], sigma: &[f64], degree: usize) -> Option<(Polynomial, f64)> {
    let n = x.len();
    if n < degree + 1 {
        return None;
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let center = 0.5 * (lo + hi);
    let scale = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    let a = DMatrix::from_fn(n, degree + 1, |i, j| ((x[i] - center) / scale).powi(j as i32) / sigma[i]);
    let b = DVector::from_fn(n, |i, _| y[i] / sigma[i]);
    let coeffs = a.clone().svd(true, true).solve(&b, 1e-13).ok()?;
    let chi2 = (a * &coeffs - b).norm_squared();
    Some((Polynomial { center, scale, coeffs: coeffs.iter().copied().collect() }, chi2))
}

/// Weighted straight line `y = a + b x`; returns `(a, b, err_a, err_b, chi2)`.
pub(crate) fn linear_fit(x: &[f64], y: &[f64], sigma: &[f64]) -> Option<(f64, f64, f64, f64, f64)> {
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&xi, &yi), &si) in x.iter().zip(y).zip(sigma) {
        let w = 1.0 / (si * si);
        s += w;
        sx += w * xi;
        sy += w * yi;
        sxx += w * xi * xi;
        sxy += w * xi * yi;
    }
    let det = s * sxx - sx * sx;
    if x.len() < 2 || det.abs() <= 1e-300 {
        return None;
    }
    let a = (sxx * sy - sx * sxy) / det;
    let b = (s * sxy - sx * sy) / det;
    let chi2 = x.iter().zip(y).zip(sigma).map(|((&xi, &yi), &si)| ((yi - a - b * xi) / si).powi(2)).sum();
    Some((a, b, (sxx / det).sqrt(), (s / det).sqrt(), chi2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let m = nelder_mead(|x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2), &[0.0, 0.0], &[0.5, 0.5], 1e-14, 2000);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] + 2.0).abs() < 1e-5);
    }

    #[test]
    fn simplex_handles_rosenbrock() {
        let m = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            1e-16,
            5000,
        );
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn polyfit_reproduces_cubic() {
        let x: Vec<f64> = (0..12).map(|i| i as f64 * 0.3 - 1.0).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.0 - 2.0 * t + 0.5 * t.powi(3)).collect();
        let (p, chi2) = polyfit(&x, &y, &[1.0; 12], 3).unwrap();
        assert!(chi2 < 1e-20);
        assert!((p.eval(0.77) - (1.0 - 1.54 + 0.5 * 0.77f64.powi(3))).abs() < 1e-12);
        assert_eq!(p.degree(), 3);
        assert!(polyfit(&x[..3], &y[..3], &[1.0; 3], 3).is_none());
    }

    #[test]
    fn line_fit_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (a, b, _, _, chi2) = linear_fit(&x, &y, &[0.1; 4]).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && chi2 < 1e-20);
    }
}
