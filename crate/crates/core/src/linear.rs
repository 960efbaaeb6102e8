//! Exact evolution of the linear Voigt system `∂_t(v − α²Δv) − νΔv = 0`.
//!
//! The continuum path integrates the multiplier against the closed-form
//! radial profile and is the reference for the linear decay rates; the grid
//! path multiplies Fourier coefficients pointwise.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decay::{ContinuumDatum, DecayCharacter};
use crate::error::{NsvError, Result};
use crate::fit::{fit_decay_exponent, DecayFitResult};
use crate::spectral::{voigt_multiplier, NormTriple, PhysicsParams, SpectralVectorField};

/// Relative tolerance of each continuum norm sample.
pub const SERIES_REL_TOL: f64 = 1e-10;

/// Sampled squared norms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NormSeries {
    pub times: Vec<f64>,
    pub l2_sq: Vec<f64>,
    pub h1dot_sq: Vec<f64>,
    pub h1alpha_sq: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SeriesRow {
    t: f64,
    l2_sq: f64,
    h1dot_sq: f64,
    h1alpha_sq: f64,
}

impl NormSeries {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            l2_sq: Vec::with_capacity(n),
            h1dot_sq: Vec::with_capacity(n),
            h1alpha_sq: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, t: f64, norms: NormTriple) {
        self.times.push(t);
        self.l2_sq.push(norms.l2_sq);
        self.h1dot_sq.push(norms.h1dot_sq);
        self.h1alpha_sq.push(norms.h1alpha_sq);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn norms_at(&self, i: usize) -> NormTriple {
        NormTriple { l2_sq: self.l2_sq[i], h1dot_sq: self.h1dot_sq[i], h1alpha_sq: self.h1alpha_sq[i] }
    }

    /// Fit of the H¹_α decay over `window`.
    pub fn fit(&self, window: (f64, f64)) -> Result<DecayFitResult> {
        fit_decay_exponent(&self.times, &self.h1alpha_sq, window)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for i in 0..self.len() {
            out.serialize(SeriesRow {
                t: self.times[i],
                l2_sq: self.l2_sq[i],
                h1dot_sq: self.h1dot_sq[i],
                h1alpha_sq: self.h1alpha_sq[i],
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "l2_sq", "h1dot_sq", "h1alpha_sq"] {
            return Err(NsvError::Parse(format!("unexpected series header {headers:?}")));
        }
        let mut s = NormSeries::default();
        for row in rdr.deserialize() {
            let row: SeriesRow = row?;
            s.push(row.t, NormTriple { l2_sq: row.l2_sq, h1dot_sq: row.h1dot_sq, h1alpha_sq: row.h1alpha_sq });
        }
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// A continuum datum advanced to time `t` by the linear solution operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolvedDatum {
    pub datum: ContinuumDatum,
    pub params: PhysicsParams,
    pub t: f64,
}

impl EvolvedDatum {
    /// Squared norms by radial quadrature of
    /// `(1 + α²ρ²)·e^{−2νρ²t/(1+α²ρ²)}·a(ρ)²` over the ball.
    pub fn norms(&self) -> Result<NormTriple> {
        let p = self.params;
        let decay = |rho: f64| (-2.0 * p.damping_rate(rho) * self.t).exp();
        let kappa = self.datum.kappa();
        let l2 = self.datum.radial_integral(decay, kappa, SERIES_REL_TOL)?;
        let h1 = self.datum.radial_integral(|r| r * r * decay(r), kappa, SERIES_REL_TOL)?;
        Ok(NormTriple::from_parts(l2, h1, p.alpha))
    }

    /// Evolving an evolved datum composes the times.
    pub fn evolve(&self, dt: f64) -> Result<Self> {
        evolve_linear(&self.datum, self.t + check_time(dt)?, &self.params)
    }
}

fn check_time(t: f64) -> Result<f64> {
    if t < 0.0 || !t.is_finite() {
        return Err(NsvError::domain(format!("linear evolution needs finite t ≥ 0, got {t}")));
    }
    Ok(t)
}

/// Continuum path: the multiplier is applied inside the norm quadratures.
pub fn evolve_linear(datum: &ContinuumDatum, t: f64, params: &PhysicsParams) -> Result<EvolvedDatum> {
    Ok(EvolvedDatum { datum: *datum, params: *params, t: check_time(t)? })
}

/// Grid path: pointwise multiplication by `e^{tM(k)}`.
pub fn evolve_linear_field(field: &SpectralVectorField, t: f64, params: &PhysicsParams) -> Result<SpectralVectorField> {
    check_time(t)?;
    let grid = *field.grid();
    Ok(field.map_modes(|idx| {
        let k = grid.wavevector(idx);
        let kmag = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
        voigt_multiplier(kmag, params, t).expect("t checked")
    }))
}

/// Continuum norms at each requested time.
pub fn linear_norm_series(datum: &ContinuumDatum, times: &[f64], params: &PhysicsParams) -> Result<NormSeries> {
    let mut s = NormSeries::with_capacity(times.len());
    for &t in times {
        let norms = evolve_linear(datum, t, params)?.norms().map_err(|e| match e {
            NsvError::Numerical { message, achieved } => NsvError::Numerical {
                message: format!("sample t = {t}: {message}"),
                achieved,
            },
            other => other,
        })?;
        s.push(t, norms);
    }
    Ok(s)
}

/// Grid analogue of [`linear_norm_series`]: exact multiplier on every mode.
pub fn linear_norm_series_grid(field: &SpectralVectorField, times: &[f64], params: &PhysicsParams) -> Result<NormSeries> {
    let grid = *field.grid();
    let vol = grid.volume();
    // group per-mode energy once, then reuse for every time
    let modes: Vec<(f64, f64)> = (0..grid.len())
        .filter_map(|idx| {
            let e: f64 = field.coeff(idx).iter().map(|c| c.norm_sqr()).sum();
            (e > 0.0).then(|| {
                let k = grid.wavevector(idx);
                (k[0] * k[0] + k[1] * k[1] + k[2] * k[2], e)
            })
        })
        .collect();
    let mut s = NormSeries::with_capacity(times.len());
    for &t in times {
        check_time(t)?;
        let (mut l2, mut h1) = (0.0, 0.0);
        for &(k2, e) in &modes {
            let m = (-2.0 * params.damping_rate(k2.sqrt()) * t).exp();
            l2 += m * e;
            h1 += m * k2 * e;
        }
        s.push(t, NormTriple::from_parts(l2 * vol, h1 * vol, params.alpha));
    }
    Ok(s)
}

/// Predicted decay of ‖v(t)‖²_{H¹_α} for the linear system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LinearPrediction {
    /// `(1 + t)^{−p}` from above and below.
    Algebraic(f64),
    SlowerThanAlgebraic,
    FasterThanAlgebraic,
}

pub fn predicted_linear_exponent(r_star: DecayCharacter, n: usize) -> Result<LinearPrediction> {
    let half = n as f64 / 2.0;
    match r_star {
        DecayCharacter::Infinity => Ok(LinearPrediction::FasterThanAlgebraic),
        DecayCharacter::MinusNHalf => Ok(LinearPrediction::SlowerThanAlgebraic),
        DecayCharacter::Finite(r) if r.is_nan() || r < -half => {
            Err(NsvError::domain(format!("r* = {r} lies below −n/2 = {}", -half)))
        }
        DecayCharacter::Finite(r) if r == -half => Ok(LinearPrediction::SlowerThanAlgebraic),
        DecayCharacter::Finite(r) if r == f64::INFINITY => Ok(LinearPrediction::FasterThanAlgebraic),
        DecayCharacter::Finite(r) => Ok(LinearPrediction::Algebraic(half + r)),
    }
}
