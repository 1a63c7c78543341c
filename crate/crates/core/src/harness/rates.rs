//! Empirical convergence rates from a gap trace.
//!
//! The fit uses only the window [k_max/2, k_max], so the transient at the
//! start of a run does not bias the slope.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    /// Least-squares slope of log G against log k.
    pub exponent: f64,
    /// Geometric mean of G_k/G_{k−1} over the window.
    pub ratio: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    pub points: usize,
}

pub const MIN_ROWS: usize = 40;
pub const MIN_WINDOW: usize = 20;

/// Fit (k, G) pairs, k increasing. Zero gaps in the window give
/// `DegenerateTrace` ("converged-exactly").
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < MIN_ROWS {
        return Err(Error::DegenerateTrace(format!("{} rows, need {MIN_ROWS}", points.len())));
    }
    let k_max = points.last().expect("nonempty").0;
    let window: Vec<(f64, f64)> = points.iter().copied().filter(|(k, _)| *k >= 0.5 * k_max && *k > 0.0).collect();
    if window.len() < MIN_WINDOW {
        return Err(Error::DegenerateTrace(format!("window holds {} points", window.len())));
    }
    if window.iter().any(|(_, g)| !(*g > 0.0) || !g.is_finite()) {
        return Err(Error::DegenerateTrace("converged-exactly".into()));
    }
    let xs: Vec<f64> = window.iter().map(|(k, _)| k.ln()).collect();
    let ys: Vec<f64> = window.iter().map(|(_, g)| g.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum::<f64>() / n).sqrt();
    let steps = window.last().expect("nonempty").0 - window[0].0;
    let ratio = ((ys[ys.len() - 1] - ys[0]) / steps).exp();
    Ok(RateFit { exponent: slope, ratio, residual, points: window.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law() {
        let pts: Vec<_> = (1..=1000).map(|k| (k as f64, (k as f64).powi(-2))).collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.exponent + 2.0).abs() < 1e-6);
        assert!(f.residual < 1e-9);
    }

    #[test]
    fn geometric() {
        let pts: Vec<_> = (0..=100).map(|k| (k as f64, 0.5f64.powi(k))).collect();
        assert!((fit_rate(&pts).unwrap().ratio - 0.5).abs() < 1e-6);
    }

    #[test]
    fn zero_gaps_are_degenerate() {
        let pts: Vec<_> = (0..=100).map(|k| (k as f64, 0.0)).collect();
        assert!(matches!(fit_rate(&pts), Err(Error::DegenerateTrace(m)) if m == "converged-exactly"));
        assert!(fit_rate(&pts[..10]).is_err());
    }
}
