use std::f64::consts::PI;

use nsv_core::decay::*;
use nsv_core::NsvError;

fn finite(c: DecayCharacter) -> f64 {
    match c {
        DecayCharacter::Finite(r) => r,
        other => panic!("expected a finite character, got {other:?}"),
    }
}

#[test]
fn power_law_cumulative_integral_is_closed_form() {
    // F(ρ) = 4π ρ^{2q+3} / (2q+3)
    for q in [-1.0, -0.5, 0.0, 1.0, 2.0] {
        let d = ContinuumDatum::power_law(3, q, 1.0).unwrap();
        for rho in [1e-3, 0.1, 0.5, 1.0] {
            let e = 2.0 * q + 3.0;
            let exact = 4.0 * PI * f64::powf(rho, e) / e;
            let got = d.cumulative_integral(0.0, rho).unwrap();
            assert!((got - exact).abs() <= 1e-9 * exact, "q = {q}, ρ = {rho}: {got} vs {exact}");
        }
    }
}

#[test]
fn indicator_examples() {
    let ball = ContinuumDatum::power_law(3, 0.0, 1.0).unwrap();
    for rho in [0.01, 0.3, 1.0] {
        let v = decay_indicator(&ball, 0.0, 0.0, rho).unwrap();
        assert!((v - 4.18879).abs() < 1e-5, "{v}");
    }
    let d = ContinuumDatum::power_law(3, 1.5, 1.0).unwrap();
    let a = decay_indicator(&d, 1.5, 0.0, 1e-3).unwrap();
    let b = decay_indicator(&d, 1.5, 0.0, 0.7).unwrap();
    assert!((a - b).abs() <= 1e-9 * b);
    assert!(matches!(decay_indicator(&d, -2.0, 0.0, 0.5), Err(NsvError::Domain(_))));
    assert!(matches!(decay_indicator(&d, 0.0, 0.0, 2.0), Err(NsvError::Domain(_))));
}

#[test]
fn estimator_matches_analytic_character_on_every_family() {
    for q in [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0] {
        for kappa in [0.5, 1.0, 4.0] {
            let d = ContinuumDatum::power_law(3, q, kappa).unwrap();
            let est = estimate_decay_character(&d, 0.0).unwrap();
            let r = finite(est.r_star);
            assert!((r - q).abs() <= 0.05, "q = {q}, κ = {kappa}: {r}");
            assert!(est.warning.is_none());
        }
    }
    for delta in [0.01, 0.5, 1.0] {
        let d = ContinuumDatum::annulus(3, delta, delta + 1.0).unwrap();
        assert_eq!(estimate_decay_character(&d, 0.0).unwrap().r_star, DecayCharacter::Infinity);
        assert_eq!(d.analytic_r_star(), DecayCharacter::Infinity);
    }
    for kappa in [0.5, 1.0] {
        let d = ContinuumDatum::critical_log(3, kappa).unwrap();
        let est = estimate_decay_character(&d, 0.0).unwrap();
        assert_eq!(est.r_star, DecayCharacter::MinusNHalf);
        assert_eq!(est.r_star.value(3, 0.0), -1.5);
        assert!(est.deep_slope.is_some());
    }
}

#[test]
fn derivative_order_shifts_the_character() {
    let d = ContinuumDatum::power_law(3, 0.0, 1.0).unwrap();
    let est = estimate_decay_character(&d, 1.0).unwrap();
    assert!((finite(est.r_s_star) - 1.0).abs() <= 0.05);
    assert!(finite(est.r_star).abs() <= 0.05);

    assert_eq!(shift_character(0.0, 1.0, 3).unwrap(), 1.0);
    assert_eq!(shift_character(f64::INFINITY, 1.0, 3).unwrap(), f64::INFINITY);
    assert_eq!(shift_character(-1.5, 1.0, 3).unwrap(), -0.5);
    assert!(shift_character(-2.0, 1.0, 3).is_err());

    let crit = ContinuumDatum::critical_log(3, 1.0).unwrap();
    let est = estimate_decay_character(&crit, 1.0).unwrap();
    assert_eq!(est.r_s_star, DecayCharacter::MinusNHalf);
    assert_eq!(est.r_s_star.value(3, 1.0), -0.5);
}

#[test]
fn character_serializes_sentinels_by_name() {
    let cases = [
        (DecayCharacter::Finite(0.25), "0.25"),
        (DecayCharacter::MinusNHalf, "\"MINUS_N_HALF\""),
        (DecayCharacter::Infinity, "\"INFINITY\""),
    ];
    for (c, json) in cases {
        assert_eq!(serde_json::to_string(&c).unwrap(), json);
        assert_eq!(serde_json::from_str::<DecayCharacter>(json).unwrap(), c);
    }
    assert!(serde_json::from_str::<DecayCharacter>("\"NOPE\"").is_err());
    assert_eq!(DecayCharacter::from_value(-1.5, 3, 0.0).unwrap(), DecayCharacter::MinusNHalf);
    assert!(DecayCharacter::from_value(-1.6, 3, 0.0).is_err());
}

#[test]
fn invalid_data_are_rejected() {
    assert!(ContinuumDatum::power_law(3, -1.5, 1.0).is_err());
    assert!(ContinuumDatum::power_law(3, 0.0, 0.0).is_err());
    assert!(ContinuumDatum::annulus(3, 1.0, 0.5).is_err());
    assert!(ContinuumDatum::critical_log(3, 2.0).is_err());
    let d = ContinuumDatum::power_law(3, 0.0, 1.0).unwrap();
    assert!(estimate_decay_character_in(&d, 0.0, (0.5, 0.1)).is_err());
    assert!(estimate_decay_character_in(&d, -1.0, (1e-3, 0.1)).is_err());
}

#[test]
fn datum_roundtrips_through_json() {
    let d = ContinuumDatum::annulus(3, 0.5, 1.0).unwrap().with_seed(9);
    let s = serde_json::to_string(&d).unwrap();
    let back: ContinuumDatum = serde_json::from_str(&s).unwrap();
    assert_eq!(back, d);
}
