//! Lanczos with full reorthogonalization for the lowest eigenpairs of a
//! real symmetric operator given only as a matrix-vector product.

use nalgebra::{DMatrix, SymmetricEigen};

pub(crate) struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
}

/// Lowest eigenpair of `apply` restricted to the orthogonal complement of
/// `deflate` (orthonormal vectors), started from `start`.
pub(crate) fn lowest<F>(apply: F, start: &[f64], deflate: &[Vec<f64>], tol: f64) -> Eigenpair
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = start.len();
    let max_iter = dim.min(400);
    let mut q = start.to_vec();
    project_out(&mut q, deflate);
    normalize(&mut q);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut best = Eigenpair { value: f64::NAN, vector: Vec::new() };
    for k in 0..max_iter {
        apply(&basis[k], &mut w);
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        // full reorthogonalization, twice for stability
        for _ in 0..2 {
            project_out(&mut w, deflate);
            project_out(&mut w, &basis);
        }
        let b = dot(&w, &w).sqrt();
        let kdim = alpha.len();
        let mut t = DMatrix::<f64>::zeros(kdim, kdim);
        for i in 0..kdim {
            t[(i, i)] = alpha[i];
            if i + 1 < kdim {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (imin, &value) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("nonempty");
        let residual = (b * eig.eigenvectors[(kdim - 1, imin)]).abs();
        let done = residual < tol * value.abs().max(1.0) || b < 1e-12 || k + 1 == max_iter;
        if done {
            let mut vector = vec![0.0; dim];
            for (i, bv) in basis.iter().enumerate() {
                let c = eig.eigenvectors[(i, imin)];
                vector.iter_mut().zip(bv).for_each(|(x, y)| *x += c * y);
            }
            project_out(&mut vector, deflate);
            normalize(&mut vector);
            best = Eigenpair { value, vector };
            break;
        }
        beta.push(b);
        let next: Vec<f64> = w.iter().map(|x| x / b).collect();
        basis.push(next);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_operator() {
        let d = [3.0, -1.0, 2.0, 5.0, -1.0 + 1e-3];
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..5 {
                y[i] = d[i] * x[i];
            }
        };
        let start = [1.0, 0.3, 0.2, 0.1, 0.7];
        let e0 = lowest(apply, &start, &[], 1e-12);
        assert!((e0.value + 1.0).abs() < 1e-10);
        let e1 = lowest(apply, &start, std::slice::from_ref(&e0.vector), 1e-12);
        assert!((e1.value - (-1.0 + 1e-3)).abs() < 1e-9);
    }
}
