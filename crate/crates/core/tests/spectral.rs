use std::f64::consts::PI;

use nsv_core::decay::ContinuumDatum;
use nsv_core::spectral::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn params() -> PhysicsParams {
    PhysicsParams::new(0.3, 0.5, 3).unwrap()
}

/// Smooth divergence-free field built in physical space from a stream function.
fn vortex_field(grid: Grid) -> SpectralVectorField {
    let k = grid.base_wavenumber();
    let mut u = [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for idx in 0..grid.len() {
        let [x, y, z] = grid.point(idx);
        let (x, y, z) = (k * x, k * y, k * z);
        // curl of (0, 0, sin x sin 2y) + curl of (cos 3z cos y, 0, 0)
        u[0][idx] = 2.0 * x.sin() * (2.0 * y).cos();
        u[1][idx] = -x.cos() * (2.0 * y).sin() - 3.0 * y.cos() * (3.0 * z).sin();
        u[2][idx] = y.sin() * (3.0 * z).cos();
    }
    SpectralVectorField::from_physical(grid, u).unwrap()
}

#[test]
fn parseval_matches_direct_physical_sum() {
    let grid = Grid::new(16, 3.0).unwrap();
    let f = vortex_field(grid);
    let phys = f.to_physical();
    let cell = (grid.box_length / grid.points_per_dim as f64).powi(3);
    let direct: f64 = phys.iter().flat_map(|c| c.iter()).map(|v| v * v).sum::<f64>() * cell;
    let spectral = h1alpha_norm_sq(&f, &params()).l2_sq;
    assert!((direct - spectral).abs() < 1e-12 * direct, "{direct} vs {spectral}");
}

#[test]
fn gradient_norm_matches_finite_differences() {
    let n = 48;
    let grid = Grid::new(n, 2.0 * PI).unwrap();
    let f = vortex_field(grid);
    let phys = f.to_physical();
    let h = grid.spacing();
    let at = |c: &Vec<f64>, i: [usize; 3]| c[(i[0] * n + i[1]) * n + i[2]];
    let mut sum = 0.0;
    for idx in 0..grid.len() {
        let base = grid.split(idx);
        for comp in &phys {
            for axis in 0..3 {
                // fourth-order central difference
                let shift = |s: isize| {
                    let mut j = base;
                    j[axis] = ((base[axis] as isize + s).rem_euclid(n as isize)) as usize;
                    at(comp, j)
                };
                let d = (-shift(2) + 8.0 * shift(1) - 8.0 * shift(-1) + shift(-2)) / (12.0 * h);
                sum += d * d;
            }
        }
    }
    let fd = sum * h * h * h;
    let spectral = h1alpha_norm_sq(&f, &params()).h1dot_sq;
    assert!((fd - spectral).abs() < 2e-3 * spectral, "{fd} vs {spectral}");
}

#[test]
fn product_of_cosines_is_dealiased() {
    let n = 16;
    let grid = Grid::new(n, 2.0 * PI).unwrap();
    let fft = Fft3::new(n);
    let scalar = |m: usize| {
        let mut v: Vec<Complex64> = (0..grid.len())
            .map(|idx| Complex64::new((m as f64 * grid.point(idx)[0]).cos(), 0.0))
            .collect();
        fft.forward(&mut v);
        v
    };
    // cos 2x · cos 3x = (cos 5x + cos x)/2: both survive the 2/3 rule (cutoff 5)
    let p = dealiased_product(&grid, &scalar(2), &scalar(3));
    for m in [1i64, 5] {
        for s in [m, -m] {
            let c = p[grid.index_of([s, 0, 0])];
            assert!((c - Complex64::new(0.25, 0.0)).norm() < 1e-14, "mode {s}: {c}");
        }
    }
    // cos 4x · cos 3x = (cos 7x + cos x)/2: mode 7 lies above the cutoff
    let p = dealiased_product(&grid, &scalar(4), &scalar(3));
    assert!((p[grid.index_of([1, 0, 0])] - Complex64::new(0.25, 0.0)).norm() < 1e-14);
    assert!(p[grid.index_of([7, 0, 0])].norm() < 1e-14);
    let total: f64 = p.iter().map(|c| c.norm_sqr()).sum();
    assert!((total - 2.0 * 0.0625).abs() < 1e-14);
}

#[test]
fn constant_field_is_rejected() {
    let grid = Grid::new(8, 1.0).unwrap();
    let ones = vec![1.0; grid.len()];
    let err = SpectralVectorField::from_physical(grid, [ones.clone(), ones.clone(), ones]).unwrap_err();
    assert!(matches!(err, nsv_core::NsvError::Validation(_)));
}

#[test]
fn sampled_datum_is_valid_and_roundtrips() {
    let grid = Grid::new(16, 40.0).unwrap();
    for seed in [0, 3] {
        let d = ContinuumDatum::power_law(3, 0.5, 1.0).unwrap().with_seed(seed);
        let f = d.sample_on_grid(&grid).unwrap();
        f.validate().unwrap();
        let back = transform_roundtrip(&f).unwrap();
        let err = back.difference(&f).unwrap().max_mode_norm();
        assert!(err < 1e-14 * f.max_mode_norm().max(1.0));
    }
}

fn random_field(grid: Grid, coeffs: &[(f64, f64)]) -> SpectralVectorField {
    let mut f = SpectralVectorField::zeros(grid);
    let mut it = coeffs.iter().cycle();
    for idx in 1..grid.len() {
        if !grid.is_retained(idx) || grid.is_nyquist(idx) {
            continue;
        }
        let v = [0; 3].map(|_| {
            let (a, b) = it.next().unwrap();
            Complex64::new(*a, *b)
        });
        f.set_coeff(idx, v);
    }
    leray_project(&f.symmetrized())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_is_idempotent_and_solenoidal(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16..64)) {
        let grid = Grid::new(8, 5.0).unwrap();
        let f = random_field(grid, &coeffs);
        prop_assert!(f.max_relative_divergence() < 1e-14);
        let again = leray_project(&f);
        prop_assert!(again.difference(&f).unwrap().max_mode_norm() <= 1e-15 * f.max_mode_norm().max(1.0));
        prop_assert!(f.hermitian_defect() < 1e-15);
    }

    #[test]
    fn transform_roundtrip_preserves_fields(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16..64)) {
        let grid = Grid::new(8, 2.0 * PI).unwrap();
        let f = random_field(grid, &coeffs);
        let back = transform_roundtrip(&f).unwrap();
        prop_assert!(back.difference(&f).unwrap().max_mode_norm() < 1e-14);
    }

    #[test]
    fn norms_are_nonnegative_and_consistent(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16..64), alpha in 0.0f64..2.0) {
        let grid = Grid::new(8, 3.0).unwrap();
        let f = random_field(grid, &coeffs);
        let p = PhysicsParams::new(alpha, 1.0, 3).unwrap();
        let n = h1alpha_norm_sq(&f, &p);
        prop_assert!(n.l2_sq >= 0.0 && n.h1dot_sq >= 0.0);
        prop_assert!((n.h1alpha_sq - (n.l2_sq + alpha * alpha * n.h1dot_sq)).abs() <= 1e-12 * n.h1alpha_sq.max(1e-300));
        let doubled = h1alpha_norm_sq(&f.scaled(2.0), &p);
        prop_assert!((doubled.h1alpha_sq - 4.0 * n.h1alpha_sq).abs() <= 1e-12 * n.h1alpha_sq.max(1e-300));
    }

    #[test]
    fn voigt_multiplier_is_a_semigroup(k in 0.0f64..50.0, s in 0.0f64..20.0, t in 0.0f64..20.0) {
        let p = PhysicsParams::new(0.2, 0.7, 3).unwrap();
        let a = voigt_multiplier(k, &p, s).unwrap() * voigt_multiplier(k, &p, t).unwrap();
        let b = voigt_multiplier(k, &p, s + t).unwrap();
        prop_assert!((a - b).abs() <= 1e-14);
        prop_assert!(b <= 1.0 && b >= (-p.nu / (p.alpha * p.alpha) * (s + t)).exp() * (1.0 - 1e-12));
    }
}
