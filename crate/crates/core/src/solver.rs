//! Pseudo-spectral integrator for the Navier-Stokes-Voigt system on a
//! periodic box.
//!
//! Per mode the equation reads
//! `∂_t û = −[νk²/(1+α²k²)] û − (1+α²k²)⁻¹ P F(∇·(u⊗u))`,
//! where `P` is the Leray projector. The damping symbol is bounded by ν/α²,
//! so the whole right-hand side is advanced with explicit classical RK4.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NsvError, Result};
use crate::linear::{evolve_linear_field, NormSeries};
use crate::spectral::{
    h1alpha_norm_sq, Fft3, Grid, NonlinearFluxSpectrum, NormTriple, PhysicsParams, SpectralVectorField,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance for the divergence carried by a trajectory sample.
pub const TRAJECTORY_DIVERGENCE_TOL: f64 = 1e-10;

type Comps = [Vec<Complex64>; 3];

fn zeros3(n: usize) -> Comps {
    [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]]
}

#[derive(Debug, Clone)]
struct Buffers {
    z01: Vec<Complex64>,
    z2: Vec<Complex64>,
    pa: Vec<Complex64>,
    pb: Vec<Complex64>,
    pc: Vec<Complex64>,
    k: Comps,
    stage: Comps,
}

/// Precomputed per-mode symbols, FFT plans and work buffers for one
/// grid/parameter pair. Not shareable across threads; build one per worker.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    grid: Grid,
    params: PhysicsParams,
    fft: Fft3,
    kvec: Vec<[f64; 3]>,
    k2: Vec<f64>,
    damping: Vec<f64>,
    helmholtz: Vec<f64>,
    // modes touched by the nonlinearity: retained, non-mean, non-Nyquist
    active: Vec<usize>,
    passive: Vec<usize>,
    neg: Vec<usize>,
    keep_axis: Vec<bool>,
    buffers: RefCell<Buffers>,
}

impl SpectralOperator {
    pub fn new(grid: Grid, params: PhysicsParams) -> Self {
        let n = grid.len();
        let kvec = grid.wavevectors();
        let k2: Vec<f64> = kvec.iter().map(|k| k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).collect();
        let damping = k2.iter().map(|&q| params.damping_rate(q.sqrt())).collect();
        let helmholtz = k2.iter().map(|&q| 1.0 / (1.0 + params.alpha * params.alpha * q)).collect();
        let (active, passive) = (0..n).partition(|&i| i != 0 && grid.is_retained(i) && !grid.is_nyquist(i));
        let neg = (0..n).map(|i| grid.neg_index(i)).collect();
        let cut = grid.dealias_cutoff();
        let keep_axis = (0..grid.points_per_dim).map(|j| grid.wavenumber_index(j).abs() <= cut).collect();
        let buffers = Buffers {
            z01: vec![ZERO; n],
            z2: vec![ZERO; n],
            pa: vec![ZERO; n],
            pb: vec![ZERO; n],
            pc: vec![ZERO; n],
            k: zeros3(n),
            stage: zeros3(n),
        };
        Self {
            grid,
            params,
            fft: Fft3::new(grid.points_per_dim),
            kvec,
            k2,
            damping,
            helmholtz,
            active,
            passive,
            neg,
            keep_axis,
            buffers: RefCell::new(buffers),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysicsParams {
        &self.params
    }

    /// Accumulates `scale · P F(∇·(u⊗u))` (dealiased) into `out` on the active
    /// modes and returns max |u| in physical space.
    #[allow(clippy::too_many_arguments)]
    fn add_flux(&self, u: &Comps, out: &mut Comps, scale: &[f64], sign: f64, z01: &mut [Complex64], z2: &mut [Complex64], p: [&mut Vec<Complex64>; 3]) -> f64 {
        let i = Complex64::i();
        let [pa, pb, pc] = p;
        // two real fields per complex inverse transform
        z01.fill(ZERO);
        z2.fill(ZERO);
        for &idx in &self.active {
            z01[idx] = u[0][idx] + i * u[1][idx];
            z2[idx] = u[2][idx];
        }
        self.fft.inverse_band(z01, &self.keep_axis);
        self.fft.inverse_band(z2, &self.keep_axis);

        let mut max_speed = 0.0f64;
        for x in 0..z01.len() {
            let (u0, u1, u2) = (z01[x].re, z01[x].im, z2[x].re);
            max_speed = max_speed.max(u0 * u0 + u1 * u1 + u2 * u2);
            pa[x] = Complex64::new(u0 * u0, u0 * u1);
            pb[x] = Complex64::new(u0 * u2, u1 * u1);
            pc[x] = Complex64::new(u1 * u2, u2 * u2);
        }
        self.fft.forward_band(pa, &self.keep_axis);
        self.fft.forward_band(pb, &self.keep_axis);
        self.fft.forward_band(pc, &self.keep_axis);

        let unpack = |z: &[Complex64], idx: usize, neg: usize| -> (Complex64, Complex64) {
            let zc = z[neg].conj();
            (0.5 * (z[idx] + zc), -0.5 * i * (z[idx] - zc))
        };
        for &idx in &self.active {
            let neg = self.neg[idx];
            let (t00, t01) = unpack(pa, idx, neg);
            let (t02, t11) = unpack(pb, idx, neg);
            let (t12, t22) = unpack(pc, idx, neg);
            let k = self.kvec[idx];
            let f = [
                i * (k[0] * t00 + k[1] * t01 + k[2] * t02),
                i * (k[0] * t01 + k[1] * t11 + k[2] * t12),
                i * (k[0] * t02 + k[1] * t12 + k[2] * t22),
            ];
            let s = (k[0] * f[0] + k[1] * f[1] + k[2] * f[2]) / self.k2[idx];
            let w = sign * scale[idx];
            for c in 0..3 {
                out[c][idx] += w * (f[c] - s * k[c]);
            }
        }
        max_speed.sqrt()
    }

    /// Right-hand side of the spectral system written into `out`; returns
    /// max |u| (0 when linear).
    fn rhs(&self, u: &Comps, out: &mut Comps, nonlinear: bool, b: &mut Buffers) -> f64 {
        for c in 0..3 {
            for &idx in &self.active {
                out[c][idx] = -self.damping[idx] * u[c][idx];
            }
        }
        if !nonlinear {
            return 0.0;
        }
        let Buffers { z01, z2, pa, pb, pc, .. } = b;
        self.add_flux(u, out, &self.helmholtz, -1.0, z01, z2, [pa, pb, pc])
    }

    fn flux(&self, u: &SpectralVectorField) -> Comps {
        let mut out = zeros3(self.grid.len());
        let ones = vec![1.0; self.grid.len()];
        let mut b = self.buffers.borrow_mut();
        let Buffers { z01, z2, pa, pb, pc, .. } = &mut *b;
        self.add_flux(u.components(), &mut out, &ones, 1.0, z01, z2, [pa, pb, pc]);
        out
    }
}

/// Projected convective term of a divergence-free field.
pub fn nonlinear_flux(u: &SpectralVectorField, params: &PhysicsParams) -> Result<NonlinearFluxSpectrum> {
    let d = u.max_relative_divergence();
    if d > crate::spectral::DIVERGENCE_TOL {
        return Err(NsvError::validation(format!("nonlinear flux needs a divergence-free field (|k·û|/|k||û| = {d:e})")));
    }
    let op = SpectralOperator::new(*u.grid(), *params);
    let field = SpectralVectorField::new(*u.grid(), op.flux(u))?.symmetrized();
    Ok(NonlinearFluxSpectrum::new(field))
}

/// Outcome of a single RK4 step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub field: SpectralVectorField,
    /// max |u| at the start of the step (0 for linear steps).
    pub max_speed: f64,
}

/// One classical RK4 step. On NaN/overflow the input is left untouched and an
/// instability error is returned.
pub fn rk4_step(op: &SpectralOperator, u: &SpectralVectorField, dt: f64, nonlinear: bool) -> Result<StepOutcome> {
    if u.grid() != &op.grid {
        return Err(NsvError::structural("field grid differs from operator grid"));
    }
    if dt == 0.0 {
        return Ok(StepOutcome { field: u.clone(), max_speed: 0.0 });
    }
    let mut guard = op.buffers.borrow_mut();
    let b = &mut *guard;
    let mut k = std::mem::take(&mut b.k);
    let mut stage = std::mem::take(&mut b.stage);
    let u0 = u.components();
    let mut acc = u0.clone();
    let mut speed = 0.0;
    // (weight in the final combination, offset of the next stage)
    let tableau = [(1.0 / 6.0, 0.5), (1.0 / 3.0, 0.5), (1.0 / 3.0, 1.0), (1.0 / 6.0, 0.0)];
    for (s, &(weight, next)) in tableau.iter().enumerate() {
        let input = if s == 0 { u0 } else { &stage };
        let v = op.rhs(input, &mut k, nonlinear, b);
        if s == 0 {
            speed = v;
        }
        for c in 0..3 {
            for &idx in &op.active {
                acc[c][idx] += weight * dt * k[c][idx];
                if s < 3 {
                    stage[c][idx] = u0[c][idx] + next * dt * k[c][idx];
                }
            }
        }
    }
    // modes outside the nonlinear band evolve by the RK4 stability polynomial
    for &idx in &op.passive {
        let z = -op.damping[idx] * dt;
        let r = 1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
        for c in 0..3 {
            acc[c][idx] *= r;
        }
    }
    b.k = k;
    b.stage = stage;
    drop(guard);
    let mut next = SpectralVectorField::new(op.grid, acc)?;
    if nonlinear {
        next.symmetrize_in_place();
    }
    if !next.is_finite() {
        return Err(NsvError::Instability { t: f64::NAN, message: "non-finite coefficients after RK4 step".into() });
    }
    Ok(StepOutcome { field: next, max_speed: speed })
}

/// Run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: Grid,
    pub params: PhysicsParams,
    pub dt: f64,
    pub t_end: f64,
    /// Times at which norms and diagnostics are recorded.
    pub sample_times: Vec<f64>,
    /// Times at which full spectral snapshots are stored.
    pub snapshot_times: Vec<f64>,
    pub nonlinearity: bool,
    pub cfl_safety: f64,
    /// Advance the linear system from the same datum in lockstep and record
    /// the norms of the difference `u − ū`.
    pub linear_companion: bool,
}

impl SolverConfig {
    /// Desk-scale defaults: N = 64, L = 64·2π, α = 0.1, ν = 0.05.
    pub fn desk_scale() -> Self {
        let grid = Grid::new(64, 64.0 * 2.0 * std::f64::consts::PI).expect("valid");
        let t_end = max_trustworthy_time(&grid);
        Self {
            grid,
            params: PhysicsParams::new(0.1, 0.05, 3).expect("valid"),
            dt: 16.0,
            t_end,
            sample_times: energy_resolving_schedule(t_end, 2.0, 64),
            snapshot_times: Vec::new(),
            nonlinearity: true,
            cfl_safety: 0.5,
            linear_companion: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(NsvError::validation("dt must be positive"));
        }
        if !(self.t_end > 0.0) {
            return Err(NsvError::validation("t_end must be positive"));
        }
        if !(self.cfl_safety > 0.0) {
            return Err(NsvError::validation("CFL safety factor must be positive"));
        }
        for list in [&self.sample_times, &self.snapshot_times] {
            if list.windows(2).any(|w| w[1] <= w[0]) || list.iter().any(|&t| t <= 0.0 || t > self.t_end * (1.0 + 1e-12)) {
                return Err(NsvError::validation("sample/snapshot times must be strictly increasing in (0, t_end]"));
            }
        }
        if self.sample_times.is_empty() {
            return Err(NsvError::validation("at least one sample time is required"));
        }
        Ok(())
    }
}

/// Sample times whose spacing grows like `t·(10^{1/per_decade} − 1)` but never
/// drops below `h_min`; fine early spacing keeps the central-difference energy
/// balance accurate while the decay is fastest.
pub fn energy_resolving_schedule(t_end: f64, h_min: f64, per_decade: usize) -> Vec<f64> {
    let growth = 10f64.powf(1.0 / per_decade as f64) - 1.0;
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        t += (t * growth).max(h_min);
        if t >= t_end * (1.0 - 1e-9) {
            out.push(t_end);
            break;
        }
        out.push(t);
    }
    out
}

/// `(L/2π)²`: after this time the splitting radius `(1+t)^{−1/2}` falls inside
/// the first grid shell and box effects dominate the decay.
pub fn max_trustworthy_time(grid: &Grid) -> f64 {
    let r = grid.box_length / (2.0 * std::f64::consts::PI);
    r * r
}

/// Rescales `field` so that `‖field‖_{H¹_α}` equals `target`.
pub fn scale_to_h1alpha(field: &SpectralVectorField, params: &PhysicsParams, target: f64) -> Result<SpectralVectorField> {
    if !(target >= 0.0) {
        return Err(NsvError::validation("target norm must be nonnegative"));
    }
    let current = h1alpha_norm_sq(field, params).h1alpha_sq.sqrt();
    if current == 0.0 {
        return Err(NsvError::domain("cannot rescale the zero field"));
    }
    Ok(field.scaled(target / current))
}

/// Stored spectral state at a snapshot time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// ∫₀ᵗ ‖u‖²_{L²} dτ at this time.
    pub cumulative_l2: f64,
    pub field: SpectralVectorField,
}

/// Everything recorded during a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub grid: Grid,
    pub params: PhysicsParams,
    pub nonlinearity: bool,
    pub initial: NormTriple,
    pub series: NormSeries,
    pub balance_residual: Vec<f64>,
    pub max_divergence: Vec<f64>,
    pub cumulative_l2: Vec<f64>,
    pub difference: Option<NormSeries>,
    pub steps: usize,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub initial_field: Option<SpectralVectorField>,
    #[serde(skip)]
    pub snapshots: Vec<Snapshot>,
}

fn l2_sq(u: &SpectralVectorField) -> f64 {
    let s: f64 = u.components().iter().flat_map(|c| c.iter()).map(|c| c.norm_sqr()).sum();
    s * u.grid().volume()
}

/// Integrates `initial` to `config.t_end`, recording samples and snapshots.
pub fn run_simulation(config: &SolverConfig, initial: &SpectralVectorField) -> Result<TrajectoryRecord> {
    config.validate()?;
    if *initial.grid() != config.grid {
        return Err(NsvError::structural("initial field grid differs from the configured grid"));
    }
    initial.validate()?;
    let op = SpectralOperator::new(config.grid, config.params);
    let mut warnings = Vec::new();
    if !config.params.within_theorem_hypotheses() {
        warnings.push(format!(
            "nu = {} <= alpha^2 = {}: outside theorem hypotheses",
            config.params.nu,
            config.params.alpha * config.params.alpha
        ));
    }

    let mut stops: Vec<f64> = config.sample_times.iter().chain(&config.snapshot_times).copied().collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    if stops.last().copied() != Some(config.t_end) {
        stops.push(config.t_end);
    }

    let mut u = initial.clone();
    let mut companion = config.linear_companion.then(|| initial.clone());
    let mut t = 0.0;
    let mut dt = config.dt;
    let mut l2_now = l2_sq(&u);
    let mut cumulative = 0.0;
    let mut steps = 0usize;

    let mut record = TrajectoryRecord {
        grid: config.grid,
        params: config.params,
        nonlinearity: config.nonlinearity,
        initial: h1alpha_norm_sq(initial, &config.params),
        series: NormSeries::with_capacity(config.sample_times.len()),
        balance_residual: Vec::new(),
        max_divergence: Vec::new(),
        cumulative_l2: Vec::new(),
        difference: config.linear_companion.then(|| NormSeries::with_capacity(config.sample_times.len())),
        steps: 0,
        warnings: Vec::new(),
        initial_field: Some(initial.clone()),
        snapshots: Vec::new(),
    };
    let mut sample_iter = config.sample_times.iter().peekable();
    let mut snap_iter = config.snapshot_times.iter().peekable();

    for &stop in &stops {
        while t < stop {
            let remaining = stop - t;
            let h = if remaining <= dt * (1.0 + 1e-9) { remaining } else { dt };
            let out = rk4_step(&op, &u, h, config.nonlinearity).map_err(|e| match e {
                NsvError::Instability { message, .. } => NsvError::Instability { t, message },
                other => other,
            })?;
            if config.nonlinearity && out.max_speed > 0.0 {
                let limit = config.cfl_safety * config.grid.spacing() / out.max_speed;
                if h > limit {
                    dt = 0.5 * dt.min(h);
                    let msg = format!("CFL violated at t = {t} (dt = {h}, limit {limit:.3e}); halving dt to {dt}");
                    log::warn!("{msg}");
                    warnings.push(msg);
                    continue;
                }
            }
            if let Some(ubar) = companion.as_mut() {
                *ubar = rk4_step(&op, ubar, h, false)?.field;
            }
            u = out.field;
            let l2_next = l2_sq(&u);
            cumulative += 0.5 * h * (l2_now + l2_next);
            l2_now = l2_next;
            t = if h == remaining { stop } else { t + h };
            steps += 1;
        }

        if sample_iter.peek().is_some_and(|&&s| s == stop) {
            sample_iter.next();
            record.series.push(t, h1alpha_norm_sq(&u, &config.params));
            record.max_divergence.push(u.max_relative_divergence());
            record.cumulative_l2.push(cumulative);
            if let (Some(ubar), Some(diff)) = (companion.as_ref(), record.difference.as_mut()) {
                diff.push(t, h1alpha_norm_sq(&u.difference(ubar)?, &config.params));
            }
        }
        if snap_iter.peek().is_some_and(|&&s| s == stop) {
            snap_iter.next();
            record.snapshots.push(Snapshot { t, cumulative_l2: cumulative, field: u.clone() });
        }
    }

    if let Some(worst) = record.max_divergence.iter().copied().reduce(f64::max) {
        if worst > TRAJECTORY_DIVERGENCE_TOL {
            warnings.push(format!("max relative divergence {worst:e} exceeds {TRAJECTORY_DIVERGENCE_TOL:e}"));
        }
    }
    record.steps = steps;
    record.warnings = warnings;
    record.balance_residual = if record.series.len() >= 2 { energy_balance_residual(&record)? } else { Vec::new() };
    Ok(record)
}

/// Derivative at `x` of the Lagrange interpolant through `nodes`, as weights
/// on the nodal values.
fn derivative_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let mut sum = 0.0;
            for m in (0..nodes.len()).filter(|&m| m != j) {
                let mut prod = 1.0 / (nodes[j] - nodes[m]);
                for l in (0..nodes.len()).filter(|&l| l != j && l != m) {
                    prod *= (x - nodes[l]) / (nodes[j] - nodes[l]);
                }
                sum += prod;
            }
            sum
        })
        .collect()
}

// five-point stencils: fourth-order accurate on smooth series
const BALANCE_STENCIL: usize = 5;

/// `(d/dt ‖u‖²_{H¹_α} + 2ν‖∇u‖²) / ‖u₀‖²_{H¹_α}` at each sample, with the
/// derivative taken from local polynomial interpolation on the (possibly
/// nonuniform) sample times, centred where possible.
pub fn energy_balance_residual(traj: &TrajectoryRecord) -> Result<Vec<f64>> {
    let mut t = vec![0.0];
    t.extend_from_slice(&traj.series.times);
    let mut e = vec![traj.initial.h1alpha_sq];
    e.extend_from_slice(&traj.series.h1alpha_sq);
    let mut g = vec![traj.initial.h1dot_sq];
    g.extend_from_slice(&traj.series.h1dot_sq);
    if t.len() < 3 {
        return Err(NsvError::domain("energy balance needs at least three samples"));
    }
    let e0 = traj.initial.h1alpha_sq;
    if e0 == 0.0 {
        return Ok(vec![0.0; traj.series.len()]);
    }
    let width = BALANCE_STENCIL.min(t.len());
    let last = t.len() - 1;
    let mut out = Vec::with_capacity(last);
    for i in 1..=last {
        let base = i.saturating_sub(width / 2).min(t.len() - width);
        let w = derivative_weights(&t[base..base + width], t[i]);
        let de: f64 = w.iter().zip(&e[base..base + width]).map(|(w, e)| w * e).sum();
        out.push((de + 2.0 * traj.params.nu * g[i]) / e0);
    }
    Ok(out)
}

/// Result of checking `|û(k,t)|² ≤ C (e^{2tM(k)}|û₀(k)|² + |k|²(∫₀ᵗ‖u‖²)²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub c_fit: f64,
    /// Smallest constant that makes the inequality hold on every sample.
    pub c_required: f64,
    /// `c_required / c_fit`; at most 1 when the check passes.
    pub max_violation_ratio: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Relative slack on the comparison, absorbing roundoff in the stored states.
pub const LEMMA_SLACK: f64 = 1e-9;

/// Coefficients are scaled by L³ so they approximate the whole-space transform.
pub fn check_lemma_bound(traj: &TrajectoryRecord, c_fit: f64) -> Result<LemmaReport> {
    let initial = traj
        .initial_field
        .as_ref()
        .ok_or_else(|| NsvError::structural("trajectory carries no initial field"))?;
    let grid = traj.grid;
    let vol2 = grid.volume() * grid.volume();
    let mut c_required = 0.0f64;
    let mut samples = 0usize;
    let mut unbounded = false;
    for snap in &traj.snapshots {
        if snap.field.grid() != &grid {
            return Err(NsvError::structural("snapshot grid mismatch"));
        }
        let linear = evolve_linear_field(initial, snap.t, &traj.params)?;
        let i2 = snap.cumulative_l2 * snap.cumulative_l2;
        for idx in 0..grid.len() {
            let lhs: f64 = snap.field.coeff(idx).iter().map(|c| c.norm_sqr()).sum::<f64>() * vol2;
            let k = grid.wavevector(idx);
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            let first: f64 = linear.coeff(idx).iter().map(|c| c.norm_sqr()).sum::<f64>() * vol2;
            let rhs = first + k2 * i2;
            samples += 1;
            if lhs == 0.0 {
                continue;
            }
            if rhs == 0.0 {
                unbounded = true;
                continue;
            }
            c_required = c_required.max(lhs / rhs);
        }
    }
    if unbounded {
        c_required = f64::INFINITY;
    }
    let ratio = if c_fit > 0.0 { c_required / c_fit } else if c_required == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(LemmaReport {
        c_fit,
        c_required,
        max_violation_ratio: ratio,
        samples,
        passed: ratio <= 1.0 + LEMMA_SLACK,
    })
}

/// Smallest constant for which [`check_lemma_bound`] passes.
pub fn fit_lemma_constant(traj: &TrajectoryRecord) -> Result<f64> {
    Ok(check_lemma_bound(traj, 1.0)?.c_required)
}

/// Norms of `w = u − ū` at every snapshot, where `ū` is the datum advanced by
/// the exact multiplier.
pub fn difference_series(traj: &TrajectoryRecord, initial: &SpectralVectorField, params: &PhysicsParams) -> Result<NormSeries> {
    if initial.grid() != &traj.grid {
        return Err(NsvError::structural("datum grid differs from trajectory grid"));
    }
    if traj.snapshots.is_empty() {
        return Err(NsvError::structural("trajectory holds no snapshots"));
    }
    let mut s = NormSeries::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        let ubar = evolve_linear_field(initial, snap.t, params)?;
        s.push(snap.t, h1alpha_norm_sq(&snap.field.difference(&ubar)?, params));
    }
    Ok(s)
}

/// Norms of `u − ū` from a nonlinear run and a matched linear run with
/// identical snapshot schedules.
pub fn matched_difference_series(nonlinear: &TrajectoryRecord, linear: &TrajectoryRecord) -> Result<NormSeries> {
    if nonlinear.snapshots.len() != linear.snapshots.len() || nonlinear.grid != linear.grid {
        return Err(NsvError::structural("matched runs have different snapshot schedules"));
    }
    let mut s = NormSeries::with_capacity(nonlinear.snapshots.len());
    for (a, b) in nonlinear.snapshots.iter().zip(&linear.snapshots) {
        if a.t != b.t {
            return Err(NsvError::structural(format!("snapshot times differ: {} vs {}", a.t, b.t)));
        }
        s.push(a.t, h1alpha_norm_sq(&a.field.difference(&b.field)?, &nonlinear.params));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn trustworthy_time_formula() {
        assert!((max_trustworthy_time(&Grid::new(8, 2.0 * PI).unwrap()) - 1.0).abs() < 1e-12);
        assert!((max_trustworthy_time(&Grid::new(8, 128.0 * PI).unwrap()) - 4096.0).abs() < 1e-9);
        let a = max_trustworthy_time(&Grid::new(8, 10.0).unwrap());
        let b = max_trustworthy_time(&Grid::new(8, 20.0).unwrap());
        assert!((b / a - 4.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_is_increasing_and_ends_at_t_end() {
        let s = energy_resolving_schedule(100.0, 2.0, 16);
        assert!(s.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*s.last().unwrap(), 100.0);
        assert!((s[1] - s[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_stays_zero() {
        let grid = Grid::new(8, 2.0 * PI).unwrap();
        let params = PhysicsParams::new(0.1, 0.05, 3).unwrap();
        let op = SpectralOperator::new(grid, params);
        let z = SpectralVectorField::zeros(grid);
        assert_eq!(rk4_step(&op, &z, 0.1, true).unwrap().field, z);
        let flux = nonlinear_flux(&z, &params).unwrap();
        assert_eq!(flux.as_field().max_mode_norm(), 0.0);
    }

    #[test]
    fn zero_dt_is_identity() {
        let grid = Grid::new(8, 2.0 * PI).unwrap();
        let params = PhysicsParams::new(0.1, 0.05, 3).unwrap();
        let op = SpectralOperator::new(grid, params);
        let mut u = SpectralVectorField::zeros(grid);
        u.set_coeff(grid.index_of([1, 0, 0]), [ZERO, Complex64::new(0.3, 0.1), ZERO]);
        u.set_coeff(grid.index_of([-1, 0, 0]), [ZERO, Complex64::new(0.3, -0.1), ZERO]);
        assert_eq!(rk4_step(&op, &u, 0.0, true).unwrap().field, u);
    }

    #[test]
    fn derivative_weights_are_exact_for_quartics() {
        let t = [0.0, 1.0, 3.0, 3.5, 7.0];
        let f = |x: f64| x.powi(4) - 2.0 * x * x - x + 5.0;
        for &x in &t {
            let w = derivative_weights(&t, x);
            let d: f64 = w.iter().zip(&t).map(|(w, &s)| w * f(s)).sum();
            let exact = 4.0 * x.powi(3) - 4.0 * x - 1.0;
            assert!((d - exact).abs() < 1e-9 * exact.abs().max(1.0), "{d} vs {exact}");
        }
    }
}
