//! Periodic-box spectral representation of solenoidal vector fields.
//!
//! Coefficients are stored as full (Hermitian-redundant) complex arrays, one
//! per velocity component, in row-major order over the three axis indices.
//! Axis index `j` maps to the integer wavenumber `j` for `j < N/2` and
//! `j − N` otherwise, so the Nyquist index carries `−N/2`.

mod fft;
pub mod snapshot;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use fft::Fft3;

use crate::error::{NsvError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance used when validating the divergence of a projected field.
pub const DIVERGENCE_TOL: f64 = 1e-12;

/// Cubic periodic grid in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub points_per_dim: usize,
    pub box_length: f64,
}

impl Grid {
    pub const DIM: usize = 3;

    pub fn new(points_per_dim: usize, box_length: f64) -> Result<Self> {
        if points_per_dim < 4 || !points_per_dim.is_multiple_of(2) {
            return Err(NsvError::validation(format!(
                "points per dimension must be an even integer ≥ 4, got {points_per_dim}"
            )));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(NsvError::validation(format!("box length must be positive, got {box_length}")));
        }
        Ok(Self { points_per_dim, box_length })
    }

    /// Number of modes (= physical points).
    pub fn len(&self) -> usize {
        self.points_per_dim.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        self.points_per_dim == 0
    }

    /// 2π/L, the smallest nonzero wavenumber magnitude.
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.points_per_dim as f64
    }

    /// Integer wavenumber for an axis index.
    pub fn wavenumber_index(&self, j: usize) -> i64 {
        let n = self.points_per_dim;
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    pub fn split(&self, idx: usize) -> [usize; 3] {
        let n = self.points_per_dim;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn join(&self, axes: [usize; 3]) -> usize {
        let n = self.points_per_dim;
        (axes[0] * n + axes[1]) * n + axes[2]
    }

    /// Index of the mode carrying wavenumber −k.
    pub fn neg_index(&self, idx: usize) -> usize {
        let n = self.points_per_dim;
        let a = self.split(idx);
        self.join([(n - a[0]) % n, (n - a[1]) % n, (n - a[2]) % n])
    }

    /// Flat index for a signed integer wavenumber triple.
    pub fn index_of(&self, m: [i64; 3]) -> usize {
        let n = self.points_per_dim as i64;
        let wrap = |v: i64| v.rem_euclid(n) as usize;
        self.join([wrap(m[0]), wrap(m[1]), wrap(m[2])])
    }

    pub fn integer_wavevector(&self, idx: usize) -> [i64; 3] {
        let a = self.split(idx);
        [self.wavenumber_index(a[0]), self.wavenumber_index(a[1]), self.wavenumber_index(a[2])]
    }

    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let k0 = self.base_wavenumber();
        let m = self.integer_wavevector(idx);
        [m[0] as f64 * k0, m[1] as f64 * k0, m[2] as f64 * k0]
    }

    pub fn wavevectors(&self) -> Vec<[f64; 3]> {
        (0..self.len()).map(|i| self.wavevector(i)).collect()
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = self.points_per_dim / 2;
        self.split(idx).contains(&half)
    }

    /// Largest retained |axis index| under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.points_per_dim / 3) as i64
    }

    pub fn is_retained(&self, idx: usize) -> bool {
        let c = self.dealias_cutoff();
        self.integer_wavevector(idx).iter().all(|m| m.abs() <= c)
    }

    pub fn retained_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.is_retained(i)).collect()
    }

    /// Box volume L³, the Parseval weight that turns Σ|û|² into ∫|u|² dx.
    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    /// Physical coordinate of a grid point.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let a = self.split(idx);
        [a[0] as f64 * h, a[1] as f64 * h, a[2] as f64 * h]
    }
}

/// Physical parameters α (Voigt length), ν (viscosity) and dimension n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub alpha: f64,
    pub nu: f64,
    pub n: usize,
}

impl PhysicsParams {
    pub fn new(alpha: f64, nu: f64, n: usize) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(NsvError::validation(format!("alpha must be ≥ 0, got {alpha}")));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(NsvError::validation(format!("nu must be > 0, got {nu}")));
        }
        if n == 0 {
            return Err(NsvError::validation("dimension must be positive"));
        }
        Ok(Self { alpha, nu, n })
    }

    /// ν > α², the hypothesis under which the decay theorems are stated.
    pub fn within_theorem_hypotheses(&self) -> bool {
        self.nu > self.alpha * self.alpha
    }

    /// Damping rate νk²/(1 + α²k²) of a mode with wavenumber magnitude k.
    pub fn damping_rate(&self, k_mag: f64) -> f64 {
        let k2 = k_mag * k_mag;
        self.nu * k2 / (1.0 + self.alpha * self.alpha * k2)
    }
}

/// e^{−νk²t/(1+α²k²)}, the exact solution operator of the linear Voigt system.
pub fn voigt_multiplier(k_mag: f64, params: &PhysicsParams, t: f64) -> Result<f64> {
    if t < 0.0 || t.is_nan() {
        return Err(NsvError::domain(format!("multiplier requires t ≥ 0, got {t}")));
    }
    Ok((-params.damping_rate(k_mag) * t).exp())
}

/// 1/(1 + α²k²), the spectral inverse of I − α²Δ.
pub fn helmholtz_inverse_factor(k_mag: f64, params: &PhysicsParams) -> f64 {
    1.0 / (1.0 + params.alpha * params.alpha * k_mag * k_mag)
}

/// Squared L², Ḣ¹ and H¹_α norms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormTriple {
    pub l2_sq: f64,
    pub h1dot_sq: f64,
    pub h1alpha_sq: f64,
}

impl NormTriple {
    pub fn from_parts(l2_sq: f64, h1dot_sq: f64, alpha: f64) -> Self {
        Self { l2_sq, h1dot_sq, h1alpha_sq: l2_sq + alpha * alpha * h1dot_sq }
    }
}

fn dot(k: &[f64; 3], u: [Complex64; 3]) -> Complex64 {
    u[0] * k[0] + u[1] * k[1] + u[2] * k[2]
}

fn norm_sq(u: [Complex64; 3]) -> f64 {
    u.iter().map(|c| c.norm_sqr()).sum()
}

/// Real, three-component vector field held by its Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    grid: Grid,
    comps: [Vec<Complex64>; 3],
}

impl SpectralVectorField {
    pub fn new(grid: Grid, comps: [Vec<Complex64>; 3]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(NsvError::structural(format!(
                "coefficient arrays must have {} entries",
                grid.len()
            )));
        }
        Ok(Self { grid, comps })
    }

    pub fn zeros(grid: Grid) -> Self {
        let z = vec![ZERO; grid.len()];
        Self { grid, comps: [z.clone(), z.clone(), z] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [Vec<Complex64>; 3] {
        self.comps
    }

    pub fn coeff(&self, idx: usize) -> [Complex64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn set_coeff(&mut self, idx: usize, v: [Complex64; 3]) {
        for (c, val) in v.into_iter().enumerate() {
            self.comps[c][idx] = val;
        }
    }

    /// Builds a field from physical samples. The zero mode must vanish.
    pub fn from_physical(grid: Grid, values: [Vec<f64>; 3]) -> Result<Self> {
        if values.iter().any(|v| v.len() != grid.len()) {
            return Err(NsvError::structural("physical arrays do not match the grid"));
        }
        let fft = Fft3::new(grid.points_per_dim);
        let comps = values.map(|v| {
            let mut buf: Vec<Complex64> = v.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            fft.forward(&mut buf);
            buf
        });
        let field = Self { grid, comps };
        let scale = field.max_mode_norm();
        let mean = norm_sq(field.coeff(0)).sqrt();
        if mean > 1e-12 * scale {
            return Err(NsvError::validation(format!(
                "field has nonzero mean (|û(0)| = {mean:e}); velocities must be mean-free"
            )));
        }
        let mut field = field;
        field.set_coeff(0, [ZERO; 3]);
        Ok(field.symmetrized())
    }

    /// Physical-space samples of each component.
    pub fn to_physical(&self) -> [Vec<f64>; 3] {
        let fft = Fft3::new(self.grid.points_per_dim);
        // two real components per complex transform
        let pair = |a: &[Complex64], b: &[Complex64]| {
            let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + Complex64::i() * y).collect();
            fft.inverse(&mut buf);
            buf
        };
        let z01 = pair(&self.comps[0], &self.comps[1]);
        let mut z2 = self.comps[2].clone();
        fft.inverse(&mut z2);
        [
            z01.iter().map(|c| c.re).collect(),
            z01.iter().map(|c| c.im).collect(),
            z2.iter().map(|c| c.re).collect(),
        ]
    }

    pub fn max_mode_norm(&self) -> f64 {
        (0..self.grid.len()).map(|i| norm_sq(self.coeff(i))).fold(0.0, f64::max).sqrt()
    }

    /// Max over modes of |û(k) − conj û(−k)|, relative to the largest mode.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_mode_norm();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for idx in 0..self.grid.len() {
            let neg = self.grid.neg_index(idx);
            for c in 0..3 {
                worst = worst.max((self.comps[c][idx] - self.comps[c][neg].conj()).norm());
            }
        }
        worst / scale
    }

    /// Max over nonzero modes of |k·û(k)| / (|k||û(k)|).
    pub fn max_relative_divergence(&self) -> f64 {
        // modes at round-off level relative to the largest one carry no direction
        let floor = 1e-13 * self.max_mode_norm();
        let mut worst = 0.0f64;
        for idx in 1..self.grid.len() {
            let u = self.coeff(idx);
            let un = norm_sq(u).sqrt();
            if un == 0.0 || un <= floor {
                continue;
            }
            let k = self.grid.wavevector(idx);
            let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
            worst = worst.max(dot(&k, u).norm() / (kn * un));
        }
        worst
    }

    /// Checks zero mean, Hermitian symmetry and solenoidality.
    pub fn validate(&self) -> Result<()> {
        let scale = self.max_mode_norm();
        if norm_sq(self.coeff(0)).sqrt() > 1e-14 * scale {
            return Err(NsvError::validation("zero mode is not zero"));
        }
        let h = self.hermitian_defect();
        if h > 1e-12 {
            return Err(NsvError::validation(format!("Hermitian symmetry violated ({h:e})")));
        }
        let d = self.max_relative_divergence();
        if d > DIVERGENCE_TOL {
            return Err(NsvError::validation(format!("field is not divergence-free ({d:e})")));
        }
        Ok(())
    }

    /// Averages each mode with the conjugate of its partner, zeroes the mean
    /// and the Nyquist planes.
    pub fn symmetrized(mut self) -> Self {
        self.symmetrize_in_place();
        self
    }

    pub(crate) fn symmetrize_in_place(&mut self) {
        let grid = self.grid;
        for idx in 0..grid.len() {
            let neg = grid.neg_index(idx);
            if grid.is_nyquist(idx) || idx == 0 {
                for c in 0..3 {
                    self.comps[c][idx] = ZERO;
                }
                continue;
            }
            if neg < idx {
                continue;
            }
            for c in 0..3 {
                let avg = 0.5 * (self.comps[c][idx] + self.comps[c][neg].conj());
                self.comps[c][idx] = avg;
                self.comps[c][neg] = avg.conj();
            }
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let comps = self.comps.clone().map(|v| v.into_iter().map(|c| c * factor).collect());
        Self { grid: self.grid, comps }
    }

    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(NsvError::structural("grid mismatch in field difference"));
        }
        let mut out = self.clone();
        for c in 0..3 {
            for (a, b) in out.comps[c].iter_mut().zip(&other.comps[c]) {
                *a -= b;
            }
        }
        Ok(out)
    }

    /// Multiplies every mode by a real per-mode factor.
    pub fn map_modes(&self, mut factor: impl FnMut(usize) -> f64) -> Self {
        let mut out = self.clone();
        for idx in 0..self.grid.len() {
            let f = factor(idx);
            for c in 0..3 {
                out.comps[c][idx] *= f;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|v| v.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }
}

/// Projected convective term F((u·∇)u + ∇p).
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearFluxSpectrum(SpectralVectorField);

impl NonlinearFluxSpectrum {
    pub fn new(field: SpectralVectorField) -> Self {
        Self(field)
    }

    pub fn as_field(&self) -> &SpectralVectorField {
        &self.0
    }

    pub fn into_field(self) -> SpectralVectorField {
        self.0
    }

    pub fn grid(&self) -> &Grid {
        self.0.grid()
    }
}

/// physical → spectral → physical, re-imposing the field invariants.
pub fn transform_roundtrip(field: &SpectralVectorField) -> Result<SpectralVectorField> {
    SpectralVectorField::from_physical(*field.grid(), field.to_physical())
}

/// Per-mode projection û ↦ û − k(k·û)/|k|²; the zero mode is removed.
pub fn leray_project(field: &SpectralVectorField) -> SpectralVectorField {
    let grid = *field.grid();
    let mut out = field.clone();
    out.set_coeff(0, [ZERO; 3]);
    for idx in 1..grid.len() {
        let k = grid.wavevector(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let u = field.coeff(idx);
        let s = dot(&k, u) / k2;
        out.set_coeff(idx, [u[0] - s * k[0], u[1] - s * k[1], u[2] - s * k[2]]);
    }
    out
}

/// Zeroes every mode with an axis index above ⌊N/3⌋.
pub fn dealias_field(field: &SpectralVectorField) -> SpectralVectorField {
    let grid = *field.grid();
    field.map_modes(|idx| if grid.is_retained(idx) { 1.0 } else { 0.0 })
}

pub fn dealias(flux: &NonlinearFluxSpectrum) -> NonlinearFluxSpectrum {
    NonlinearFluxSpectrum(dealias_field(flux.as_field()))
}

/// Parseval sums scaled by L³, so that they approximate whole-space integrals.
pub fn h1alpha_norm_sq(field: &SpectralVectorField, params: &PhysicsParams) -> NormTriple {
    let grid = field.grid();
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for idx in 0..grid.len() {
        let e = norm_sq(field.coeff(idx));
        if e == 0.0 {
            continue;
        }
        let k = grid.wavevector(idx);
        l2 += e;
        h1 += (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * e;
    }
    let vol = grid.volume();
    NormTriple::from_parts(l2 * vol, h1 * vol, params.alpha)
}

/// Dealiased pseudo-spectral product of two real scalar fields.
pub fn dealiased_product(grid: &Grid, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let fft = Fft3::new(grid.points_per_dim);
    let mut z: Vec<Complex64> = f.iter().zip(g).map(|(a, b)| a + Complex64::i() * b).collect();
    fft.inverse(&mut z);
    let mut p: Vec<Complex64> = z.iter().map(|c| Complex64::new(c.re * c.im, 0.0)).collect();
    fft.forward(&mut p);
    for (idx, c) in p.iter_mut().enumerate() {
        if !grid.is_retained(idx) {
            *c = ZERO;
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(alpha: f64, nu: f64) -> PhysicsParams {
        PhysicsParams::new(alpha, nu, 3).unwrap()
    }

    #[test]
    fn grid_rejects_odd_and_nonpositive() {
        assert!(Grid::new(7, 1.0).is_err());
        assert!(Grid::new(8, 0.0).is_err());
        assert!(Grid::new(8, 2.0 * PI).is_ok());
    }

    #[test]
    fn smallest_wavenumber_and_symmetric_index_set() {
        let g = Grid::new(8, 4.0 * PI).unwrap();
        assert!((g.base_wavenumber() - 0.5).abs() < 1e-15);
        let smallest = (1..g.len())
            .map(|i| g.wavevector(i))
            .map(|k| (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!((smallest - 0.5).abs() < 1e-15);
        for idx in 0..g.len() {
            if g.is_nyquist(idx) {
                continue;
            }
            let m = g.integer_wavevector(idx);
            let mn = g.integer_wavevector(g.neg_index(idx));
            assert_eq!([-m[0], -m[1], -m[2]], mn);
        }
    }

    #[test]
    fn multiplier_values_and_limits() {
        let p = params(1.0, 1.0);
        assert_eq!(voigt_multiplier(0.0, &p, 3.0).unwrap(), 1.0);
        assert!((voigt_multiplier(1.0, &p, 1.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((voigt_multiplier(1.0, &p, 1.0).unwrap() - 0.606531).abs() < 1e-6);
        let heat = params(0.0, 0.7);
        assert!((voigt_multiplier(2.0, &heat, 0.3).unwrap() - (-0.7 * 4.0 * 0.3f64).exp()).abs() < 1e-15);
        // k → ∞ limit e^{−νt/α²}
        let p2 = params(0.5, 0.2);
        let lim = (-0.2 * 1.5 / 0.25f64).exp();
        assert!((voigt_multiplier(1e8, &p2, 1.5).unwrap() - lim).abs() < 1e-12);
        assert!(voigt_multiplier(1.0, &p, -1.0).is_err());
    }

    #[test]
    fn helmholtz_factor_values() {
        assert_eq!(helmholtz_inverse_factor(0.0, &params(1.0, 1.0)), 1.0);
        assert_eq!(helmholtz_inverse_factor(1.0, &params(1.0, 1.0)), 0.5);
        assert_eq!(helmholtz_inverse_factor(37.0, &params(0.0, 1.0)), 1.0);
    }

    #[test]
    fn constant_field_is_rejected() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let ones = vec![1.0; g.len()];
        let zeros = vec![0.0; g.len()];
        let err = SpectralVectorField::from_physical(g, [ones, zeros.clone(), zeros]).unwrap_err();
        assert!(matches!(err, NsvError::Validation(_)));
    }

    #[test]
    fn single_sine_mode_has_two_conjugate_coefficients() {
        let g = Grid::new(8, 3.0).unwrap();
        let u0: Vec<f64> = (0..g.len()).map(|i| (2.0 * PI * g.point(i)[0] / 3.0).sin()).collect();
        let z = vec![0.0; g.len()];
        let f = SpectralVectorField::from_physical(g, [u0, z.clone(), z]).unwrap();
        let plus = g.index_of([1, 0, 0]);
        let minus = g.index_of([-1, 0, 0]);
        for idx in 0..g.len() {
            let c = f.component(0)[idx];
            if idx == plus {
                assert!((c - Complex64::new(0.0, -0.5)).norm() < 1e-15);
            } else if idx == minus {
                assert!((c - Complex64::new(0.0, 0.5)).norm() < 1e-15);
            } else {
                assert!(c.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn gradient_field_projects_to_zero() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let mut f = SpectralVectorField::zeros(g);
        for idx in 1..g.len() {
            let k = g.wavevector(idx);
            let c = Complex64::new((idx as f64).sin(), (idx as f64 * 0.3).cos());
            f.set_coeff(idx, [c * k[0], c * k[1], c * k[2]]);
        }
        let p = leray_project(&f);
        assert!(p.max_mode_norm() < 1e-13 * f.max_mode_norm());
    }

    #[test]
    fn single_mode_norms() {
        let g = Grid::new(8, 2.0 * PI).unwrap();
        let alpha = 0.3;
        let mut f = SpectralVectorField::zeros(g);
        let c = Complex64::new(0.2, -0.1);
        f.set_coeff(g.index_of([2, 0, 0]), [ZERO, c, ZERO]);
        f.set_coeff(g.index_of([-2, 0, 0]), [ZERO, c.conj(), ZERO]);
        let n = h1alpha_norm_sq(&f, &params(alpha, 1.0));
        let k0 = 2.0;
        let weight = 2.0 * g.volume();
        assert!((n.h1alpha_sq - (1.0 + alpha * alpha * k0 * k0) * weight * c.norm_sqr()).abs() < 1e-12);
        let n0 = h1alpha_norm_sq(&f, &params(0.0, 1.0));
        assert_eq!(n0.h1alpha_sq, n0.l2_sq);
    }

    #[test]
    fn dealias_zeroes_high_and_nyquist_modes() {
        let g = Grid::new(12, 2.0 * PI).unwrap();
        let mut f = SpectralVectorField::zeros(g);
        let one = Complex64::new(1.0, 0.0);
        let kept = g.index_of([4, -4, 1]);
        let dropped = g.index_of([6, 0, 0]);
        let dropped2 = g.index_of([0, 5, 0]);
        for idx in [kept, dropped, dropped2] {
            f.set_coeff(idx, [one, one, one]);
        }
        let d = dealias_field(&f);
        assert_eq!(d.coeff(kept), [one; 3]);
        assert_eq!(d.coeff(dropped), [ZERO; 3]);
        assert_eq!(d.coeff(dropped2), [ZERO; 3]);
        assert_eq!(dealias_field(&d), d);
    }
}
