//! Adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 20_000;

/// Kronrod estimate and |Kronrod - Gauss| on `[a, b]`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integral over consecutive breakpoints `pts[0] < pts[1] < ...`, refined by
/// bisecting the interval with the largest error estimate until the total
/// estimate drops below `max(abs_tol, rel_tol * |result|)`.
pub fn integrate_pieces(f: impl Fn(f64) -> f64, pts: &[f64], abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)> {
    if pts.len() < 2 {
        return Ok((0.0, 0.0));
    }
    let mut work: Vec<(f64, f64, f64, f64)> = pts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    loop {
        let total: f64 = work.iter().map(|w| w.2).sum();
        let err: f64 = work.iter().map(|w| w.3).sum();
        if !total.is_finite() {
            return Err(Error::numerical("non-finite integrand"));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok((total, err));
        }
        if work.len() >= MAX_INTERVALS {
            return Err(Error::numerical(format!("quadrature did not converge (error estimate {err:e})")));
        }
        let (idx, _) = work
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, w)| if w.3 > acc.1 { (i, w.3) } else { acc });
        let (a, b, _, _) = work[idx];
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Err(Error::numerical("quadrature interval underflow"));
        }
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        work[idx] = (a, m, v1, e1);
        work.push((m, b, v2, e2));
    }
}

pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)> {
    integrate_pieces(f, &[a, b], abs_tol, rel_tol)
}
