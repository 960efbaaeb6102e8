//! Least-squares fitting of algebraic decay in log-log coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{NsvError, Result};

/// RMS log-residual above which a fit is flagged as not algebraic.
pub const NON_ALGEBRAIC_RESIDUAL: f64 = 0.05;

/// Minimum number of samples inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Result of fitting `value ≈ A·(B + t)^{−p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFitResult {
    pub exponent: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub window: (f64, f64),
    pub residual: f64,
    pub samples: usize,
}

impl DecayFitResult {
    pub fn is_algebraic(&self) -> bool {
        self.residual <= NON_ALGEBRAIC_RESIDUAL
    }
}

/// Ordinary least squares `y ≈ intercept + slope·x`, returning the RMS residual.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (slope, intercept, (ss / n).sqrt())
}

fn window_samples(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    if times.len() != values.len() {
        return Err(NsvError::structural("times and values differ in length"));
    }
    let (t0, t1) = window;
    if !(t1 > t0) {
        return Err(NsvError::domain(format!("empty fit window ({t0}, {t1})")));
    }
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t >= t0 * (1.0 - 1e-12) && t <= t1 * (1.0 + 1e-12) {
            if !(v > 0.0) || !v.is_finite() {
                return Err(NsvError::domain(format!("fit requires positive values, got {v} at t = {t}")));
            }
            ts.push(t);
            vs.push(v);
        }
    }
    if ts.len() < MIN_FIT_SAMPLES {
        return Err(NsvError::domain(format!(
            "fit window ({t0}, {t1}) holds {} samples, need at least {MIN_FIT_SAMPLES}",
            ts.len()
        )));
    }
    Ok((ts, vs))
}

/// Fits `A·(B + t)^{−p}` with `B ∈ [0, max(t₀, 1)]` by variable projection:
/// for fixed `B` the problem is linear in `(ln A, p)`.
pub fn fit_decay_exponent(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFitResult> {
    let (ts, vs) = window_samples(times, values, window)?;
    let y: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    let objective = |b: f64| -> (f64, f64, f64) {
        let x: Vec<f64> = ts.iter().map(|t| (b + t).ln()).collect();
        linear_fit(&x, &y)
    };
    let b_max = window.0.max(1.0);
    let b_min = if ts[0] > 0.0 { 0.0 } else { b_max * 1e-12 };

    // coarse log scan, then golden-section refinement around the best node
    let mut nodes = vec![b_min];
    nodes.extend((0..=96).rev().map(|i| b_max * 10f64.powf(-(i as f64) / 8.0)).filter(|&b| b > b_min));
    let scores: Vec<f64> = nodes.iter().map(|&b| objective(b).2).collect();
    let best = scores
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let mut lo = nodes[best.saturating_sub(1)];
    let mut hi = nodes[(best + 1).min(nodes.len() - 1)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (objective(c).2, objective(d).2);
    for _ in 0..200 {
        if (hi - lo) <= 1e-14 * hi.max(1e-300) {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = objective(c).2;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = objective(d).2;
        }
    }
    let mut b = 0.5 * (lo + hi);
    if objective(nodes[best]).2 < objective(b).2 {
        b = nodes[best];
    }
    let (slope, intercept, residual) = objective(b);
    Ok(DecayFitResult {
        exponent: -slope,
        amplitude: intercept.exp(),
        offset: b,
        window: (ts[0], *ts.last().unwrap()),
        residual,
        samples: ts.len(),
    })
}

/// Pure power-law fit `value ≈ A·x^{p}` over `window` (no offset); used for
/// cumulative spectral integrals where the variable is a radius.
pub fn fit_power_law(xs: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFitResult> {
    let (x, v) = window_samples(xs, values, window)?;
    let lx: Vec<f64> = x.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = v.iter().map(|a| a.ln()).collect();
    let (slope, intercept, residual) = linear_fit(&lx, &ly);
    Ok(DecayFitResult {
        exponent: slope,
        amplitude: intercept.exp(),
        offset: 0.0,
        window: (x[0], *x.last().unwrap()),
        residual,
        samples: x.len(),
    })
}

/// `count` log-spaced points per decade covering `[t0, t1]` inclusive.
pub fn log_spaced(t0: f64, t1: f64, per_decade: usize) -> Vec<f64> {
    assert!(t0 > 0.0 && t1 > t0 && per_decade > 0);
    let decades = (t1 / t0).log10();
    let steps = (decades * per_decade as f64).round().max(1.0) as usize;
    (0..=steps)
        .map(|i| t0 * 10f64.powf(decades * i as f64 / steps as f64))
        .collect()
}

/// Local decay exponent −Δln(value)/Δln(t) between consecutive decade marks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecadeSlope {
    pub t_from: f64,
    pub t_to: f64,
    pub slope: f64,
}

fn interp_log(times: &[f64], values: &[f64], t: f64) -> Option<f64> {
    let pos = times.iter().position(|&s| s >= t * (1.0 - 1e-12))?;
    if (times[pos] - t).abs() <= 1e-12 * t {
        return Some(values[pos].ln());
    }
    if pos == 0 {
        return None;
    }
    let (ta, tb) = (times[pos - 1].ln(), times[pos].ln());
    let (va, vb) = (values[pos - 1].ln(), values[pos].ln());
    Some(va + (vb - va) * (t.ln() - ta) / (tb - ta))
}

pub fn decade_slopes(times: &[f64], values: &[f64], t_start: f64, t_end: f64) -> Result<Vec<DecadeSlope>> {
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(NsvError::domain("decade slopes need positive values"));
    }
    let mut marks = vec![t_start];
    while *marks.last().unwrap() * 10.0 <= t_end * (1.0 + 1e-12) {
        let next = marks.last().unwrap() * 10.0;
        marks.push(next);
    }
    let mut out = Vec::new();
    for pair in marks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (Some(la), Some(lb)) = (interp_log(times, values, a), interp_log(times, values, b)) else {
            return Err(NsvError::domain(format!("series does not cover decade [{a}, {b}]")));
        };
        out.push(DecadeSlope { t_from: a, t_to: b, slope: -(lb - la) / (b / a).ln() });
    }
    Ok(out)
}

/// Classification of how per-decade slopes drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SlopeDrift {
    /// Slopes grow by at least one unit across the range.
    SuperAlgebraic,
    /// Slopes decrease monotonically toward zero.
    SubAlgebraic,
    Steady,
}

pub fn classify_drift(slopes: &[DecadeSlope]) -> SlopeDrift {
    if slopes.len() < 2 {
        return SlopeDrift::Steady;
    }
    let first = slopes[0].slope;
    let last = slopes[slopes.len() - 1].slope;
    let increasing = slopes.windows(2).all(|w| w[1].slope > w[0].slope);
    let decreasing = slopes.windows(2).all(|w| w[1].slope < w[0].slope);
    if increasing && last - first >= 1.0 {
        SlopeDrift::SuperAlgebraic
    } else if decreasing && last > 0.0 && last < 0.5 * first {
        SlopeDrift::SubAlgebraic
    } else {
        SlopeDrift::Steady
    }
}
