use bbmflow_core::dynamics::{conserved_quantities, evolve, EvolveParams};
use bbmflow_core::random_fields::{sample_gaussian, MeasureSpec};
use bbmflow_core::spectral::{sobolev_norm, SobolevIndex, SpectralField};
use num_complex::Complex64;

fn gaussian_sample(modes: usize, seed: u64) -> SpectralField {
    sample_gaussian(&MeasureSpec::gaussian(modes), seed, 1)
        .unwrap()
        .into_samples()
        .remove(0)
}

fn l2_gap(a: &SpectralField, b: &SpectralField) -> f64 {
    sobolev_norm(&(a - b), SobolevIndex::L2)
}

#[test]
fn linear_flow_matches_dispersion_relation() {
    let u0 = gaussian_sample(64, 3);
    let t = 1.0;
    let u = evolve(&u0, t, &EvolveParams::new(1e-3, 64).linear()).unwrap();
    for (n, (c0, ct)) in u0.coeffs().iter().zip(u.coeffs()).enumerate() {
        let nf = n as f64;
        let want = c0 * Complex64::from_polar(1.0, -nf * t / (1.0 + nf * nf));
        assert!((ct.norm() - want.norm()).abs() < 1e-10, "mode {n}");
        if c0.norm() > 0.0 {
            let phase = (ct / want).arg().abs();
            assert!(phase < 1e-9, "mode {n}: phase error {phase}");
        }
    }
}

#[test]
fn mean_and_h1_energy_are_conserved() {
    let params = EvolveParams::new(1e-3, 32);
    for seed in 0..4 {
        let u0 = gaussian_sample(32, seed);
        let before = conserved_quantities(&u0);
        let after = conserved_quantities(&evolve(&u0, 3.0, &params).unwrap());
        assert_eq!(before.mean, after.mean);
        let rel = (after.h1_energy - before.h1_energy).abs() / before.h1_energy;
        assert!(rel < 1e-8, "seed {seed}: {rel:e}");
    }
}

#[test]
fn rk4_error_shrinks_at_fourth_order() {
    let u0 = gaussian_sample(32, 11);
    let t = 2.0;
    let dt = 0.1;
    let at = |h: f64| evolve(&u0, t, &EvolveParams::new(h, 32)).unwrap();
    let reference = at(dt / 8.0);
    let e1 = l2_gap(&at(dt), &reference);
    let e2 = l2_gap(&at(dt / 2.0), &reference);
    let ratio = e1 / e2;
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn forward_then_backward_returns_to_start() {
    let u0 = gaussian_sample(16, 5);
    let params = EvolveParams::new(1e-3, 16);
    let there = evolve(&u0, 1.5, &params).unwrap();
    let back = evolve(&there, -1.5, &params).unwrap();
    assert!(l2_gap(&back, &u0) < 1e-10);
    let back2 = evolve(&there, 1.5, &params.backward()).unwrap();
    assert_eq!(back, back2);
}

#[test]
fn flow_is_a_semigroup_up_to_integrator_error() {
    let u0 = gaussian_sample(16, 9);
    let params = EvolveParams::new(1e-3, 16);
    let direct = evolve(&u0, 1.0, &params).unwrap();
    let split = evolve(&evolve(&u0, 0.4, &params).unwrap(), 0.6, &params).unwrap();
    assert!(l2_gap(&direct, &split) < 1e-10);
}

#[test]
fn spatial_translation_commutes_with_flow() {
    // u(x + a) has coefficients c_n e^{ina}
    let shift = |u: &SpectralField, a: f64| {
        let coeffs = u
            .coeffs()
            .iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(1.0, n as f64 * a))
            .collect();
        SpectralField::new(coeffs).unwrap()
    };
    let u0 = gaussian_sample(16, 21);
    let params = EvolveParams::new(1e-3, 16);
    let a = evolve(&shift(&u0, 0.7), 1.0, &params).unwrap();
    let b = shift(&evolve(&u0, 1.0, &params).unwrap(), 0.7);
    assert!(l2_gap(&a, &b) < 1e-11);
}
