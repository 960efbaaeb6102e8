//! Initial data of prescribed decay character and numerical estimation of r*.
//!
//! A [`ContinuumDatum`] is a radial spectral amplitude `a(|ξ|)` given in
//! closed form. The decay character is read off from the growth of the
//! cumulative integral `F_s(ρ) = ∫_{B(ρ)} |ξ|^{2s} a(|ξ|)² dξ ~ ρ^{2 r_s + n}`.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{NsvError, Result};
use crate::fit::{fit_power_law, log_spaced, DecayFitResult};
use crate::quadrature::integrate;
use crate::spectral::{Grid, SpectralVectorField};

/// Relative tolerance of the radial quadratures.
pub const RADIAL_REL_TOL: f64 = 1e-10;
/// Default radius window, as fractions of the outer cutoff κ.
pub const DEFAULT_RHO_WINDOW: (f64, f64) = (1e-3, 1e-1);
pub const DEFAULT_RHO_SAMPLES: usize = 32;
/// A fitted slope this close to a window boundary value selects a sentinel.
pub const SENTINEL_SLOPE_MARGIN: f64 = 0.1;
/// Log-log residual above which the profile is reported as not a pure power law.
pub const PURE_POWER_LAW_RESIDUAL: f64 = 1e-3;
/// Fitted r_s above this is indistinguishable from r_s = ∞.
pub const MAX_FINITE_CHARACTER: f64 = 100.0;

/// Decay character: finite, or one of the two limiting sentinels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayCharacter {
    Finite(f64),
    /// r* = −n/2 (r_s* = −n/2 + s): the indicator diverges for every admissible r.
    MinusNHalf,
    /// The indicator vanishes for every admissible r.
    Infinity,
}

impl DecayCharacter {
    /// Maps a numeric value onto the character, folding `−n/2 + s` and ∞ into sentinels.
    pub fn from_value(r: f64, n: usize, s: f64) -> Result<Self> {
        let floor = -(n as f64) / 2.0 + s;
        if r.is_nan() || r < floor {
            return Err(NsvError::domain(format!("decay character {r} lies below −n/2 + s = {floor}")));
        }
        Ok(if r == f64::INFINITY {
            DecayCharacter::Infinity
        } else if r == floor {
            DecayCharacter::MinusNHalf
        } else {
            DecayCharacter::Finite(r)
        })
    }

    /// Numeric value for derivative order `s` in dimension `n`.
    pub fn value(&self, n: usize, s: f64) -> f64 {
        match *self {
            DecayCharacter::Finite(r) => r,
            DecayCharacter::MinusNHalf => -(n as f64) / 2.0 + s,
            DecayCharacter::Infinity => f64::INFINITY,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CharacterRepr {
    Finite(f64),
    Sentinel(String),
}

impl Serialize for DecayCharacter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            DecayCharacter::Finite(r) => CharacterRepr::Finite(r),
            DecayCharacter::MinusNHalf => CharacterRepr::Sentinel("MINUS_N_HALF".into()),
            DecayCharacter::Infinity => CharacterRepr::Sentinel("INFINITY".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DecayCharacter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match CharacterRepr::deserialize(d)? {
            CharacterRepr::Finite(r) => Ok(DecayCharacter::Finite(r)),
            CharacterRepr::Sentinel(s) => match s.as_str() {
                "MINUS_N_HALF" => Ok(DecayCharacter::MinusNHalf),
                "INFINITY" => Ok(DecayCharacter::Infinity),
                other => Err(serde::de::Error::custom(format!("unknown sentinel {other}"))),
            },
        }
    }
}

/// Closed-form radial profile families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// a(ρ) = ρ^q on [0, κ].
    PowerLaw { q: f64, kappa: f64 },
    /// a(ρ) = 1 on [δ, κ], zero near the origin.
    Annulus { delta: f64, kappa: f64 },
    /// a(ρ)² = ρ^{−n} / ln²(e/ρ) on (0, κ], κ ≤ 1.
    CriticalLog { kappa: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::PowerLaw { .. } => "power-law",
            Family::Annulus { .. } => "annulus",
            Family::CriticalLog { .. } => "critical-log",
        }
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            Family::PowerLaw { kappa, .. } | Family::Annulus { kappa, .. } | Family::CriticalLog { kappa } => kappa,
        }
    }
}

/// Area of the unit sphere S^{n−1}.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// Radially structured initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuumDatum {
    pub n: usize,
    #[serde(flatten)]
    pub family: Family,
    /// Seed of the phase pattern used when sampling on a grid (0: zero phases).
    #[serde(default)]
    pub seed: u64,
}

impl ContinuumDatum {
    pub fn new(n: usize, family: Family) -> Result<Self> {
        if n == 0 {
            return Err(NsvError::validation("dimension must be positive"));
        }
        match family {
            Family::PowerLaw { q, kappa } => {
                if !(q > -(n as f64) / 2.0) {
                    return Err(NsvError::validation(format!(
                        "power-law exponent q = {q} must exceed −n/2 = {} (datum not in L²)",
                        -(n as f64) / 2.0
                    )));
                }
                if !(kappa > 0.0 && kappa.is_finite()) {
                    return Err(NsvError::validation("kappa must be positive"));
                }
            }
            Family::Annulus { delta, kappa } => {
                if !(delta > 0.0 && kappa > delta && kappa.is_finite()) {
                    return Err(NsvError::validation(format!(
                        "annulus needs 0 < delta < kappa, got delta = {delta}, kappa = {kappa}"
                    )));
                }
            }
            Family::CriticalLog { kappa } => {
                if !(kappa > 0.0 && kappa <= 1.0) {
                    return Err(NsvError::validation(format!("critical-log needs 0 < kappa ≤ 1, got {kappa}")));
                }
            }
        }
        Ok(Self { n, family, seed: 0 })
    }

    pub fn power_law(n: usize, q: f64, kappa: f64) -> Result<Self> {
        Self::new(n, Family::PowerLaw { q, kappa })
    }

    pub fn annulus(n: usize, delta: f64, kappa: f64) -> Result<Self> {
        Self::new(n, Family::Annulus { delta, kappa })
    }

    pub fn critical_log(n: usize, kappa: f64) -> Result<Self> {
        Self::new(n, Family::CriticalLog { kappa })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Re-checks the family invariants (used after deserialising).
    pub fn validated(self) -> Result<Self> {
        Ok(Self::new(self.n, self.family)?.with_seed(self.seed))
    }

    pub fn kappa(&self) -> f64 {
        self.family.kappa()
    }

    /// a(ρ)².
    pub fn amplitude_sq(&self, rho: f64) -> f64 {
        match self.family {
            Family::PowerLaw { q, kappa } => {
                if rho > kappa || rho <= 0.0 {
                    0.0
                } else {
                    rho.powf(2.0 * q)
                }
            }
            Family::Annulus { delta, kappa } => {
                if rho >= delta && rho <= kappa {
                    1.0
                } else {
                    0.0
                }
            }
            Family::CriticalLog { kappa } => {
                if rho > kappa || rho <= 0.0 {
                    0.0
                } else {
                    let l = (E / rho).ln();
                    rho.powi(-(self.n as i32)) / (l * l)
                }
            }
        }
    }

    /// Decay character implied by the family's closed form.
    pub fn analytic_r_star(&self) -> DecayCharacter {
        match self.family {
            Family::PowerLaw { q, .. } => DecayCharacter::Finite(q),
            Family::Annulus { .. } => DecayCharacter::Infinity,
            Family::CriticalLog { .. } => DecayCharacter::MinusNHalf,
        }
    }

    /// `|S^{n−1}| ∫₀^{min(upper, κ)} w(ρ) a(ρ)² ρ^{n−1} dρ`, each family
    /// integrated in a variable that removes its endpoint singularity.
    pub fn radial_integral<W: Fn(f64) -> f64>(&self, weight: W, upper: f64, rel_tol: f64) -> Result<f64> {
        let n = self.n as f64;
        let r_top = upper.min(self.kappa());
        if r_top <= 0.0 {
            return Ok(0.0);
        }
        let inner = match self.family {
            Family::PowerLaw { q, .. } => {
                // ρ = R e^{−σ}: integrand w(ρ) ρ^{2q+n} decays exponentially in σ
                let e = 2.0 * q + n;
                let sigma_max = ((1.0 / rel_tol).ln() + 40.0) / e;
                integrate(
                    |sigma| {
                        let rho = r_top * (-sigma).exp();
                        weight(rho) * rho.powf(e)
                    },
                    0.0,
                    sigma_max,
                    rel_tol,
                    0.0,
                )?
                .value
            }
            Family::Annulus { delta, .. } => {
                if r_top <= delta {
                    return Ok(0.0);
                }
                integrate(|rho| weight(rho) * rho.powf(n - 1.0), delta, r_top, rel_tol, 0.0)?.value
            }
            Family::CriticalLog { .. } => {
                // v = 1/ln(e/ρ) turns ρ^{−1} ln^{−2}(e/ρ) dρ into dv
                let v_max = 1.0 / (E / r_top).ln();
                integrate(
                    |v| {
                        let rho = if v <= 0.0 { 0.0 } else { (1.0 - 1.0 / v).exp() };
                        weight(rho)
                    },
                    0.0,
                    v_max,
                    rel_tol,
                    0.0,
                )?
                .value
            }
        };
        Ok(sphere_area(self.n) * inner)
    }

    /// `F_s(ρ) = ∫_{B(ρ)} |ξ|^{2s} a(|ξ|)² dξ`.
    pub fn cumulative_integral(&self, s: f64, rho: f64) -> Result<f64> {
        self.radial_integral(|r| if s == 0.0 { 1.0 } else { r.powf(2.0 * s) }, rho, RADIAL_REL_TOL)
    }

    /// Samples the datum on a grid: `û(k) = a(|k|)·P_k e·e^{iφ(k)}` with a
    /// fixed direction `e` projected onto the plane ⟂ k, restricted to the
    /// modes kept by the 2/3 rule. Phases are zero for seed 0 and otherwise
    /// drawn antisymmetrically from the seed.
    pub fn sample_on_grid(&self, grid: &Grid) -> Result<SpectralVectorField> {
        self.sample_on_grid_with_envelope(grid, None)
    }

    /// As [`Self::sample_on_grid`], with amplitudes multiplied by
    /// `exp(−|k|²/(2w²))`. The envelope leaves the small-|k| behaviour (and so
    /// r*) untouched but removes the sharp spectral edge, whose slow transient
    /// would otherwise dominate a desk-scale time window.
    pub fn sample_on_grid_with_envelope(&self, grid: &Grid, width: Option<f64>) -> Result<SpectralVectorField> {
        if let Some(w) = width {
            if !(w > 0.0) {
                return Err(NsvError::validation("envelope width must be positive"));
            }
        }
        if self.n != Grid::DIM {
            return Err(NsvError::validation(format!("grid sampling needs n = 3, datum has n = {}", self.n)));
        }
        const DIRECTION: [f64; 3] = [0.48, 0.6, 0.64];
        let mut field = SpectralVectorField::zeros(*grid);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for idx in 1..grid.len() {
            let neg = grid.neg_index(idx);
            if neg < idx || grid.is_nyquist(idx) || !grid.is_retained(idx) {
                continue;
            }
            let k = grid.wavevector(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let kmag = k2.sqrt();
            let phase = if self.seed == 0 { 0.0 } else { rng.gen::<f64>() * 2.0 * PI };
            let mut a = self.amplitude_sq(kmag).sqrt();
            if let Some(w) = width {
                a *= (-k2 / (2.0 * w * w)).exp();
            }
            if a == 0.0 {
                continue;
            }
            let ke = (k[0] * DIRECTION[0] + k[1] * DIRECTION[1] + k[2] * DIRECTION[2]) / k2;
            let rot = Complex64::from_polar(a, phase);
            let v = [0, 1, 2].map(|c| rot * (DIRECTION[c] - ke * k[c]));
            field.set_coeff(idx, v);
            field.set_coeff(neg, v.map(|c| c.conj()));
        }
        Ok(field)
    }
}

/// `ρ^{−2r−n} ∫_{B(ρ)} |ξ|^{2s} a² dξ`, the finite-radius s-decay indicator.
pub fn decay_indicator(datum: &ContinuumDatum, r: f64, s: f64, rho: f64) -> Result<f64> {
    let n = datum.n as f64;
    if !(rho > 0.0 && rho <= datum.kappa()) {
        return Err(NsvError::domain(format!("rho = {rho} must lie in (0, κ = {}]", datum.kappa())));
    }
    if !(r > -n / 2.0 + s) {
        return Err(NsvError::domain(format!("indicator requires r > −n/2 + s, got r = {r}")));
    }
    let f = datum.cumulative_integral(s, rho)?;
    Ok(rho.powf(-2.0 * r - n) * f)
}

/// Numerical estimate of the decay character.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCharacterEstimate {
    pub r_star: DecayCharacter,
    pub r_s_star: DecayCharacter,
    pub s: f64,
    pub n: usize,
    /// Fit of ln F_s against ln ρ; absent when F_s vanishes in the window.
    pub slope_fit: Option<DecayFitResult>,
    pub rho_window: (f64, f64),
    /// Slope measured in the deepest probe window, when one was needed.
    pub deep_slope: Option<f64>,
    pub warning: Option<String>,
}

/// Estimate with the default window `[10⁻³, 10⁻¹]·κ`.
pub fn estimate_decay_character(datum: &ContinuumDatum, s: f64) -> Result<DecayCharacterEstimate> {
    let k = datum.kappa();
    estimate_decay_character_in(datum, s, (DEFAULT_RHO_WINDOW.0 * k, DEFAULT_RHO_WINDOW.1 * k))
}

fn window_slope(datum: &ContinuumDatum, s: f64, window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let decades = (window.1 / window.0).log10();
    let per_decade = ((DEFAULT_RHO_SAMPLES as f64 - 1.0) / decades).ceil().max(1.0) as usize;
    let rhos = log_spaced(window.0, window.1, per_decade);
    let values = rhos
        .iter()
        .map(|&r| datum.cumulative_integral(s, r))
        .collect::<Result<Vec<_>>>()?;
    Ok((rhos, values))
}

pub fn estimate_decay_character_in(
    datum: &ContinuumDatum,
    s: f64,
    window: (f64, f64),
) -> Result<DecayCharacterEstimate> {
    if !(window.0 > 0.0 && window.1 > window.0 && window.1 <= datum.kappa()) {
        return Err(NsvError::domain(format!("invalid radius window {window:?}")));
    }
    if s < 0.0 {
        return Err(NsvError::domain("derivative order s must be ≥ 0"));
    }
    let n = datum.n;
    let nf = n as f64;
    let (rhos, values) = window_slope(datum, s, window)?;

    let infinity = |fit: Option<DecayFitResult>| DecayCharacterEstimate {
        r_star: DecayCharacter::Infinity,
        r_s_star: DecayCharacter::Infinity,
        s,
        n,
        slope_fit: fit,
        rho_window: window,
        deep_slope: None,
        warning: None,
    };
    if values[0] <= 0.0 {
        // F_s vanishes near the origin: P_r = 0 for every r
        return Ok(infinity(None));
    }
    let fit = fit_power_law(&rhos, &values, window)?;
    let p = fit.exponent;
    let r_s = (p - nf) / 2.0;
    if r_s > MAX_FINITE_CHARACTER {
        return Ok(infinity(Some(fit)));
    }
    let warning = (fit.residual > PURE_POWER_LAW_RESIDUAL)
        .then(|| format!("not a pure power law (log-log residual {:.2e})", fit.residual));

    // The lower boundary r_s = −n/2 + s corresponds to slope 2s. A slope near
    // it may be a logarithmic drift, so probe deeper windows before deciding.
    let boundary = 2.0 * s;
    let mut deep_slope = None;
    let mut slope_for_sentinel = p;
    if p - boundary < 1.0 {
        let mut w = window;
        for _ in 0..4 {
            w = (w.0 * 1e-2, w.1 * 1e-2);
            let (r, v) = window_slope(datum, s, w)?;
            if v[0] <= 0.0 {
                break;
            }
            slope_for_sentinel = fit_power_law(&r, &v, w)?.exponent;
        }
        deep_slope = Some(slope_for_sentinel);
    }
    let (r_s_star, r_star) = if slope_for_sentinel - boundary < SENTINEL_SLOPE_MARGIN {
        (DecayCharacter::MinusNHalf, DecayCharacter::MinusNHalf)
    } else {
        (DecayCharacter::Finite(r_s), DecayCharacter::Finite(r_s - s))
    };
    Ok(DecayCharacterEstimate {
        r_star,
        r_s_star,
        s,
        n,
        slope_fit: Some(fit),
        rho_window: window,
        deep_slope,
        warning,
    })
}

/// r_s* = s + r*; the sentinels shift with it (∞ stays ∞, −n/2 ↦ −n/2 + s).
pub fn shift_character(r_star: f64, s: f64, n: usize) -> Result<f64> {
    let floor = -(n as f64) / 2.0;
    if r_star.is_nan() || r_star < floor {
        return Err(NsvError::domain(format!("r* = {r_star} lies below −n/2 = {floor}")));
    }
    Ok(r_star + s)
}
