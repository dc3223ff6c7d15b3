//! Truncated power series in one variable: binomial coefficients and real
//! powers through `exp(t log f)`.

use crate::{Error, Result};

/// Coefficients of `(1 - x)^{-s}` up to and excluding `x^n`:
/// `c_k = (s)_k / k!`.
pub fn binomial_series(s: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 1.0;
    for k in 0..n {
        if k > 0 {
            c *= (s + k as f64 - 1.0) / k as f64;
        }
        out.push(c);
    }
    out
}

/// `log f` for a series with `f_0 = 1`, truncated to the input length.
///
/// From `f L' = f'`: `n L_n = n f_n - Σ_{k=1}^{n-1} k L_k f_{n-k}`.
pub fn series_log(f: &[f64]) -> Vec<f64> {
    debug_assert!((f[0] - 1.0).abs() < 1e-15);
    let n = f.len();
    let mut out = vec![0.0; n];
    for m in 1..n {
        let mut acc = m as f64 * f[m];
        for k in 1..m {
            acc -= k as f64 * out[k] * f[m - k];
        }
        out[m] = acc / m as f64;
    }
    out
}

/// `exp g` for a series with `g_0 = 0`.
///
/// From `E' = g' E`: `n E_n = Σ_{k=1}^{n} k g_k E_{n-k}`.
pub fn series_exp(g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    out[0] = 1.0;
    for m in 1..n {
        let mut acc = 0.0;
        for k in 1..=m {
            acc += k as f64 * g[k] * out[m - k];
        }
        out[m] = acc / m as f64;
    }
    out
}

/// `f^t` as a formal power series, same truncation as `f`.
pub fn series_pow(f: &[f64], t: f64) -> Result<Vec<f64>> {
    let a0 = *f.first().ok_or(Error::ZeroConstantTerm)?;
    if a0 == 0.0 {
        return Err(Error::ZeroConstantTerm);
    }
    if a0 < 0.0 {
        return Err(Error::InvalidSpec("real power of a series with negative constant term".into()));
    }
    let unit: Vec<f64> = f.iter().map(|c| c / a0).collect();
    let log = series_log(&unit);
    let scaled: Vec<f64> = log.iter().map(|c| c * t).collect();
    let scale = a0.powf(t);
    Ok(series_exp(&scaled).into_iter().map(|c| c * scale).collect())
}
