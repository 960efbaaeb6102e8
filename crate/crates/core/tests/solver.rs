use std::f64::consts::PI;

use nsv_core::decay::ContinuumDatum;
use nsv_core::linear::{evolve_linear_field, linear_norm_series_grid};
use nsv_core::solver::*;
use nsv_core::spectral::*;
use nsv_core::NsvError;
use num_complex::Complex64;

const C0: Complex64 = Complex64::new(0.0, 0.0);

fn params() -> PhysicsParams {
    PhysicsParams::new(0.1, 0.05, 3).unwrap()
}

fn taylor_green(grid: Grid) -> SpectralVectorField {
    let mut u = [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for idx in 0..grid.len() {
        let [x, y, _] = grid.point(idx);
        u[0][idx] = x.sin() * y.cos();
        u[1][idx] = -x.cos() * y.sin();
    }
    SpectralVectorField::from_physical(grid, u).unwrap()
}

fn sampled(n: usize, q: f64, amplitude: f64) -> SpectralVectorField {
    let grid = Grid::new(n, 4.0 * PI).unwrap();
    let d = ContinuumDatum::power_law(3, q, 4.0).unwrap().with_seed(11);
    let f = d.sample_on_grid(&grid).unwrap();
    scale_to_h1alpha(&f, &params(), amplitude).unwrap()
}

fn config(grid: Grid, dt: f64, t_end: f64, samples: Vec<f64>, nonlinear: bool) -> SolverConfig {
    SolverConfig {
        grid,
        params: params(),
        dt,
        t_end,
        sample_times: samples,
        snapshot_times: Vec::new(),
        nonlinearity: nonlinear,
        cfl_safety: 0.5,
        linear_companion: false,
    }
}

#[test]
fn taylor_green_flux_is_a_pure_gradient() {
    let grid = Grid::new(16, 2.0 * PI).unwrap();
    let flux = nonlinear_flux(&taylor_green(grid), &params()).unwrap();
    assert!(flux.as_field().max_mode_norm() < 1e-12, "{}", flux.as_field().max_mode_norm());
}

#[test]
fn single_mode_pair_matches_hand_convolution() {
    let grid = Grid::new(16, 2.0 * PI).unwrap();
    let p = [1i64, 0, 0];
    let q = [0i64, 2, 1];
    // divergence-free amplitudes: a ⟂ p, b ⟂ q
    let a = [C0, Complex64::new(0.3, 0.2), Complex64::new(-0.1, 0.4)];
    let b = [Complex64::new(0.5, -0.25), Complex64::new(0.1, 0.2), Complex64::new(-0.2, -0.4)];
    let mut u = SpectralVectorField::zeros(grid);
    for (m, v) in [(p, a), (q, b)] {
        u.set_coeff(grid.index_of(m), v);
        u.set_coeff(grid.index_of([-m[0], -m[1], -m[2]]), v.map(|c| c.conj()));
    }
    u.validate().unwrap();
    let flux = nonlinear_flux(&u, &params()).unwrap();

    // F(∇·(u⊗u))(p+q) = i (p+q)_j [a_i b_j + b_i a_j], then projected
    let m = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
    let k = m.map(|x| x as f64);
    let kb: Complex64 = (0..3).map(|j| k[j] * b[j]).sum();
    let ka: Complex64 = (0..3).map(|j| k[j] * a[j]).sum();
    let raw: Vec<Complex64> = (0..3).map(|i| Complex64::i() * (a[i] * kb + b[i] * ka)).collect();
    let k2 = k.iter().map(|x| x * x).sum::<f64>();
    let s: Complex64 = (0..3).map(|j| k[j] * raw[j]).sum::<Complex64>() / k2;
    let expected: Vec<Complex64> = (0..3).map(|i| raw[i] - s * k[i]).collect();
    let got = flux.as_field().coeff(grid.index_of(m));
    for i in 0..3 {
        assert!((got[i] - expected[i]).norm() < 1e-12, "component {i}: {} vs {}", got[i], expected[i]);
    }

    // only sums and differences of ±p, ±q can be excited
    let allowed: Vec<[i64; 3]> = [[1, 1], [1, -1], [-1, 1], [-1, -1], [2, 0], [-2, 0], [0, 2], [0, -2]]
        .iter()
        .map(|&[x, y]| [0, 1, 2].map(|c| x * p[c] + y * q[c]))
        .collect();
    for idx in 0..grid.len() {
        if !allowed.contains(&grid.integer_wavevector(idx)) {
            assert!(flux.as_field().coeff(idx).iter().all(|c| c.norm() < 1e-13));
        }
    }
}

#[test]
fn projected_flux_is_skew() {
    for seed in [1, 2, 3] {
        let grid = Grid::new(16, 4.0 * PI).unwrap();
        let d = ContinuumDatum::power_law(3, 0.0, 4.0).unwrap().with_seed(seed);
        let u = d.sample_on_grid(&grid).unwrap();
        let flux = nonlinear_flux(&u, &params()).unwrap();
        let f = flux.as_field();
        let mut inner = 0.0;
        let mut scale = 0.0;
        for idx in 0..grid.len() {
            let (a, b) = (u.coeff(idx), f.coeff(idx));
            for c in 0..3 {
                inner += (a[c].conj() * b[c]).re;
                scale += a[c].norm() * b[c].norm();
            }
        }
        assert!(scale > 0.0);
        assert!(inner.abs() <= 1e-12 * scale, "seed {seed}: {inner:e} vs {scale:e}");
    }
}

#[test]
fn non_solenoidal_input_is_rejected() {
    let grid = Grid::new(8, 2.0 * PI).unwrap();
    let mut u = SpectralVectorField::zeros(grid);
    let v = [Complex64::new(1.0, 0.0), C0, C0];
    u.set_coeff(grid.index_of([1, 0, 0]), v);
    u.set_coeff(grid.index_of([-1, 0, 0]), v);
    assert!(matches!(nonlinear_flux(&u, &params()), Err(NsvError::Validation(_))));
}

#[test]
fn rk4_is_fourth_order() {
    let u0 = sampled(16, 0.0, 40.0);
    let grid = *u0.grid();
    let op = SpectralOperator::new(grid, params());
    let integrate = |steps: usize| {
        let dt = 2.0 / steps as f64;
        let mut u = u0.clone();
        for _ in 0..steps {
            u = rk4_step(&op, &u, dt, true).unwrap().field;
        }
        u
    };
    let reference = integrate(256);
    let e1 = integrate(8).difference(&reference).unwrap().max_mode_norm();
    let e2 = integrate(16).difference(&reference).unwrap().max_mode_norm();
    let ratio = e1 / e2;
    assert!((ratio - 16.0).abs() <= 0.2 * 16.0, "ratio {ratio} (errors {e1:e}, {e2:e})");
}

#[test]
fn linear_steps_track_the_exact_multiplier() {
    let u0 = sampled(16, 1.0, 1.0);
    let grid = *u0.grid();
    let samples: Vec<f64> = (1..=20).map(|i| i as f64 * 5.0).collect();
    // the comparison holds once the step resolves the fastest damping rate
    let traj = run_simulation(&config(grid, 0.03125, 100.0, samples.clone(), false), &u0).unwrap();
    let exact = linear_norm_series_grid(&u0, &samples, &params()).unwrap();
    for i in 0..samples.len() {
        let (a, b) = (traj.series.h1alpha_sq[i], exact.h1alpha_sq[i]);
        assert!((a - b).abs() <= 1e-8 * b, "t = {}: {a} vs {b}", samples[i]);
    }
    // and mode by mode
    let op = SpectralOperator::new(grid, params());
    let stepped = rk4_step(&op, &u0, 0.0625, false).unwrap().field;
    let exact = evolve_linear_field(&u0, 0.0625, &params()).unwrap();
    let err = stepped.difference(&exact).unwrap().max_mode_norm();
    assert!(err < 1e-8 * u0.max_mode_norm(), "{err:e} vs {:e}", u0.max_mode_norm());
}

#[test]
fn zero_field_and_zero_dt() {
    let grid = Grid::new(8, 2.0 * PI).unwrap();
    let z = SpectralVectorField::zeros(grid);
    let traj = run_simulation(&config(grid, 0.1, 1.0, vec![0.5, 1.0], true), &z).unwrap();
    assert!(traj.series.h1alpha_sq.iter().all(|&e| e == 0.0));
    assert!(traj.balance_residual.iter().all(|&r| r == 0.0));
    let op = SpectralOperator::new(grid, params());
    let u = taylor_green(grid);
    assert_eq!(rk4_step(&op, &u, 0.0, true).unwrap().field, u);
}

#[test]
fn nonlinear_run_keeps_invariants() {
    let u0 = sampled(16, 0.0, 5.0);
    let grid = *u0.grid();
    let samples = energy_resolving_schedule(20.0, 0.05, 64);
    let traj = run_simulation(&config(grid, 0.025, 20.0, samples, true), &u0).unwrap();
    let e0 = traj.initial.h1alpha_sq;
    let mut last = e0;
    for (i, &e) in traj.series.h1alpha_sq.iter().enumerate() {
        assert!(e <= last + 1e-10 * e0, "energy grew at sample {i}");
        last = e;
    }
    let worst = traj.balance_residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let at = traj.balance_residual.iter().position(|r| r.abs() == worst).unwrap();
    assert!(worst <= 1e-6, "balance residual {worst:e} at t = {}", traj.series.times[at]);
    assert!(traj.max_divergence.iter().all(|&d| d <= TRAJECTORY_DIVERGENCE_TOL));
    assert!(traj.cumulative_l2.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn balance_residual_matches_single_mode_decay() {
    // one annulus shell: E(t) = E₀ e^{−2λt}, so the residual is pure truncation error
    let grid = Grid::new(8, 2.0 * PI).unwrap();
    let mut u = SpectralVectorField::zeros(grid);
    let v = [C0, Complex64::new(0.5, 0.0), C0];
    u.set_coeff(grid.index_of([1, 0, 0]), v);
    u.set_coeff(grid.index_of([-1, 0, 0]), v);
    let lambda = params().damping_rate(1.0);
    let make = |h: f64| {
        let samples: Vec<f64> = (1..=40).map(|i| i as f64 * h).collect();
        let traj = run_simulation(&config(grid, h / 4.0, 40.0 * h, samples, false), &u).unwrap();
        traj.balance_residual.iter().fold(0.0f64, |m, r| m.max(r.abs()))
    };
    let coarse = make(1.0);
    let fine = make(0.5);
    assert!(lambda > 0.0);
    assert!(coarse < 1e-6, "{coarse:e}");
    // fourth-order stencils: halving the spacing gains well over 4x
    assert!(fine < coarse / 8.0, "{fine:e} vs {coarse:e}");
}

#[test]
fn lemma_bound_examples() {
    let u0 = sampled(16, 0.0, 5.0);
    let grid = *u0.grid();
    let mut cfg = config(grid, 0.25, 10.0, vec![5.0, 10.0], false);
    cfg.snapshot_times = vec![5.0, 10.0];
    let traj = run_simulation(&cfg, &u0).unwrap();
    let report = check_lemma_bound(&traj, 1.0).unwrap();
    assert!(report.passed, "{report:?}");

    let z = SpectralVectorField::zeros(grid);
    let traj = run_simulation(&cfg, &z).unwrap();
    let report = check_lemma_bound(&traj, 1.0).unwrap();
    assert!(report.passed && report.c_required == 0.0);

    cfg.nonlinearity = true;
    let traj = run_simulation(&cfg, &sampled(16, 0.0, 50.0)).unwrap();
    let c = fit_lemma_constant(&traj).unwrap();
    assert!(c.is_finite() && c > 0.0);
    assert!(check_lemma_bound(&traj, c).unwrap().passed);
    assert!(!check_lemma_bound(&traj, 0.5 * c).unwrap().passed);
}

#[test]
fn difference_vanishes_without_nonlinearity() {
    let u0 = sampled(16, 0.0, 5.0);
    let grid = *u0.grid();
    let mut cfg = config(grid, 0.0625, 4.0, vec![1.0, 2.0, 4.0], false);
    cfg.snapshot_times = vec![2.0, 4.0];
    cfg.linear_companion = true;
    let traj = run_simulation(&cfg, &u0).unwrap();
    assert!(traj.difference.as_ref().unwrap().h1alpha_sq.iter().all(|&e| e == 0.0));
    // against the exact multiplier only the time-stepping error remains
    let d = difference_series(&traj, &u0, &params()).unwrap();
    let e0 = traj.initial.h1alpha_sq;
    assert!(d.h1alpha_sq.iter().all(|&e| e <= 1e-16 * e0), "{:?} vs {e0}", d.h1alpha_sq);

    cfg.nonlinearity = true;
    let nl = run_simulation(&cfg, &u0).unwrap();
    let w = nl.difference.as_ref().unwrap();
    assert!(w.h1alpha_sq.iter().all(|&e| e > 0.0));
    cfg.nonlinearity = false;
    cfg.linear_companion = false;
    let lin = run_simulation(&cfg, &u0).unwrap();
    let matched = matched_difference_series(&nl, &lin).unwrap();
    assert_eq!(matched.len(), 2);

    let other = Grid::new(8, 4.0 * PI).unwrap();
    assert!(matches!(
        difference_series(&traj, &SpectralVectorField::zeros(other), &params()),
        Err(NsvError::Structural(_))
    ));
}

#[test]
fn cfl_violation_halves_dt() {
    let u0 = sampled(16, 0.0, 2000.0);
    let grid = *u0.grid();
    let traj = run_simulation(&config(grid, 0.5, 1.0, vec![1.0], true), &u0).unwrap();
    assert!(traj.warnings.iter().any(|w| w.contains("CFL")), "{:?}", traj.warnings);
    assert!(traj.steps > 2);
}

#[test]
fn trustworthy_time_examples() {
    assert!((max_trustworthy_time(&Grid::new(8, 2.0 * PI).unwrap()) - 1.0).abs() < 1e-12);
    assert!((max_trustworthy_time(&Grid::new(64, 128.0 * PI).unwrap()) - 4096.0).abs() < 1e-9);
}

#[test]
fn rejects_bad_configs() {
    let u0 = sampled(8, 0.0, 1.0);
    let grid = *u0.grid();
    assert!(run_simulation(&config(grid, 0.0, 1.0, vec![1.0], true), &u0).is_err());
    assert!(run_simulation(&config(grid, 0.1, 1.0, vec![0.5, 0.2], true), &u0).is_err());
    assert!(run_simulation(&config(grid, 0.1, 1.0, vec![2.0], true), &u0).is_err());
    let other = Grid::new(8, 1.0).unwrap();
    assert!(run_simulation(&config(other, 0.1, 1.0, vec![1.0], true), &u0).is_err());
}
