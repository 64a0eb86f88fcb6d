use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DistanceWindow;

/// Least-squares fit of `log(value) = log(C) - eta * d` over a distance window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub c: f64,
    pub eta: f64,
    pub r2: f64,
    pub d_min: usize,
    pub d_max: usize,
    /// Number of distances that entered the regression.
    pub points: usize,
    /// r^2 of the competing power-law fit `log(value)` vs `log(d)`.
    pub power_r2: f64,
    /// Every value in the window was strictly positive.
    pub all_positive: bool,
    pub min_r2: f64,
    /// `eta > 0`, `r2 >= min_r2`, the exponential beats the power law and no
    /// value in the window vanished.
    pub exponential: bool,
}

struct Line {
    slope: f64,
    intercept: f64,
    r2: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ssr / syy } else { 0.0 };
    Line { slope, intercept, r2 }
}

/// Fit `(distance, value)` points inside `window`. Fails with fewer than
/// three distances in the window; vanishing values are left out of the
/// regression and mark the fit as not exponential.
pub fn fit_exponential(points: &[(usize, f64)], window: &DistanceWindow, min_r2: f64) -> Result<ExpFit> {
    let inside: Vec<(usize, f64)> = points.iter().copied().filter(|(d, _)| window.contains(*d)).collect();
    if inside.len() < 3 {
        return Err(Error::Fit(format!(
            "only {} distances in window [{}, {}]; need at least 3",
            inside.len(),
            window.d_min,
            window.d_max
        )));
    }
    let all_positive = inside.iter().all(|(_, v)| *v > 0.0 && v.is_finite());
    let usable: Vec<(usize, f64)> = inside.iter().copied().filter(|(_, v)| *v > 0.0 && v.is_finite()).collect();
    let mut fit = ExpFit {
        c: 0.0,
        eta: 0.0,
        r2: 0.0,
        d_min: window.d_min,
        d_max: window.d_max,
        points: usable.len(),
        power_r2: 0.0,
        all_positive,
        min_r2,
        exponential: false,
    };
    if usable.len() < 3 {
        return Ok(fit);
    }
    let x: Vec<f64> = usable.iter().map(|(d, _)| *d as f64).collect();
    let y: Vec<f64> = usable.iter().map(|(_, v)| v.ln()).collect();
    let line = least_squares(&x, &y);
    fit.c = line.intercept.exp();
    fit.eta = -line.slope;
    fit.r2 = line.r2;
    let (px, py): (Vec<f64>, Vec<f64>) = usable.iter().filter(|(d, _)| *d > 0).map(|(d, v)| ((*d as f64).ln(), v.ln())).unzip();
    if px.len() >= 3 {
        fit.power_r2 = least_squares(&px, &py).r2;
    }
    fit.exponential = fit.eta > 0.0 && fit.r2 >= min_r2 && fit.r2 > fit.power_r2 && all_positive;
    Ok(fit)
}

/// Least-squares slope of `y = s x` through the origin.
pub fn slope_through_origin(x: &[f64], y: &[f64]) -> f64 {
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    if sxx == 0.0 {
        return 0.0;
    }
    x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(a: usize, b: usize) -> DistanceWindow {
        DistanceWindow { d_min: a, d_max: b }
    }

    #[test]
    fn recovers_exact_exponential() {
        let pts: Vec<(usize, f64)> = (0..30).map(|d| (d, 2.5 * (-0.7 * d as f64).exp())).collect();
        let f = fit_exponential(&pts, &window(5, 20), 0.95).unwrap();
        assert!((f.eta - 0.7).abs() < 1e-12);
        assert!((f.c - 2.5).abs() < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert_eq!(f.points, 16);
        assert!(f.exponential);
    }

    #[test]
    fn power_law_is_not_exponential() {
        let pts: Vec<(usize, f64)> = (1..60).map(|d| (d, 1.0 / d as f64)).collect();
        let f = fit_exponential(&pts, &window(2, 50), 0.5).unwrap();
        assert!(f.power_r2 > f.r2);
        assert!(!f.exponential);
    }

    #[test]
    fn flat_and_vanishing_values() {
        let flat: Vec<(usize, f64)> = (0..20).map(|d| (d, 0.4)).collect();
        let f = fit_exponential(&flat, &window(1, 10), 0.9).unwrap();
        assert_eq!(f.eta, 0.0);
        assert!(!f.exponential);
        let zeros: Vec<(usize, f64)> = (0..20).map(|d| (d, if d % 2 == 0 { 0.0 } else { (-(d as f64)).exp() })).collect();
        let f = fit_exponential(&zeros, &window(1, 19), 0.9).unwrap();
        assert!(!f.all_positive && !f.exponential);
        assert!(f.eta > 0.0);
    }

    #[test]
    fn window_too_small() {
        let pts = [(1, 1.0), (2, 0.5), (7, 0.1)];
        assert!(matches!(fit_exponential(&pts, &window(1, 3), 0.9), Err(Error::Fit(_))));
    }

    #[test]
    fn origin_slope() {
        assert_eq!(slope_through_origin(&[1.0, 2.0], &[3.0, 6.0]), 3.0);
        assert_eq!(slope_through_origin(&[0.0], &[1.0]), 0.0);
    }
}
