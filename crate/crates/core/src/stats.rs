//! Small statistics helpers shared by the samplers and the analysis code.

use rand::Rng;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Result of a binning analysis of a Markov-chain time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Binned {
    pub mean: f64,
    pub err: f64,
    /// `var_binned / (2 var_naive)`, an estimate of the integrated
    /// autocorrelation time in units of samples.
    pub tau_int: f64,
    pub bin_len: usize,
}

/// Bins `xs` into `n_bins` contiguous blocks (fewer when the series is
/// short) and returns the standard error of the block means.
pub fn binned(xs: &[f64], n_bins: usize) -> Binned {
    let n = xs.len();
    let m = mean(xs);
    if n < 2 {
        return Binned { mean: m, err: 0.0, tau_int: 0.5, bin_len: n };
    }
    let n_bins = n_bins.clamp(2, n);
    let bin_len = n / n_bins;
    let used = bin_len * n_bins;
    let bins: Vec<f64> = xs[..used].chunks(bin_len).map(mean).collect();
    let err_binned = (variance(&bins) / n_bins as f64).sqrt();
    let naive = (variance(xs) / n as f64).sqrt();
    let tau_int = if naive > 0.0 { 0.5 * (err_binned / naive).powi(2) } else { 0.5 };
    Binned { mean: m, err: err_binned.max(naive), tau_int, bin_len }
}

/// Bootstrap over indices `0..n`: `stat` receives resampled indices and
/// returns a value; returns the standard deviation of those values.
/// Resamples where `stat` returns a non-finite value are skipped.
pub fn bootstrap_std<R: Rng, F>(rng: &mut R, n: usize, resamples: usize, mut stat: F) -> f64
where
    F: FnMut(&[usize]) -> f64,
{
    let mut idx = vec![0usize; n];
    let mut vals = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for slot in idx.iter_mut() {
            *slot = rng.random_range(0..n);
        }
        let v = stat(&idx);
        if v.is_finite() {
            vals.push(v);
        }
    }
    variance(&vals).sqrt()
}
