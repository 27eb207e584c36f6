//! Fourier representation of real functions on the torus.
//!
//! Convention: `u(x) = Σ_{|n|≤M} c_n e^{inx}` on `[0, 2π)` and
//! `‖u‖²_{H^s} = 2π Σ_{|n|≤M} (1+n²)^s |c_n|²`, so `s = 0` is the plain
//! `L²` norm and `s = 1` is `∫ u² + (∂_x u)²`.

mod field;
mod grid;

pub use field::{SobolevIndex, SpectralField};
pub use grid::{
    fft_size, field_from_grid, field_from_grid_modes, grid_transform, pointwise_square,
    SquareKernel,
};

use std::f64::consts::PI;

use num_complex::Complex64;

/// Per-mode weights `w_n` with `‖u‖²_{H^s} = Σ_{n=0}^{M} w_n |c_n|²`.
///
/// The factor 2 for `n ≥ 1` accounts for the implied negative modes.
pub fn sobolev_weights(max_mode: usize, s: SobolevIndex) -> Vec<f64> {
    (0..=max_mode)
        .map(|n| {
            let nf = n as f64;
            let mult = if n == 0 { 1.0 } else { 2.0 };
            2.0 * PI * mult * (1.0 + nf * nf).powf(s.value())
        })
        .collect()
}

pub(crate) fn weighted_norm_sq(coeffs: &[Complex64], weights: &[f64]) -> f64 {
    coeffs
        .iter()
        .zip(weights)
        .map(|(c, w)| w * c.norm_sqr())
        .sum()
}

/// `‖u - v‖²` under precomputed weights, without allocating the difference.
pub(crate) fn weighted_dist_sq(a: &[Complex64], b: &[Complex64], weights: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| w * (x - y).norm_sqr())
        .sum()
}

pub fn sobolev_norm_sq(field: &SpectralField, s: SobolevIndex) -> f64 {
    weighted_norm_sq(field.coeffs(), &sobolev_weights(field.max_mode(), s))
}

/// `‖u‖_{H^s}` in the convention of this module.
pub fn sobolev_norm(field: &SpectralField, s: SobolevIndex) -> f64 {
    sobolev_norm_sq(field, s).sqrt()
}

/// Orthogonal projection onto `span{cos nx, sin nx : n ≤ N}`.
pub fn project_low(field: &SpectralField, n: usize) -> SpectralField {
    let coeffs = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| if k <= n { *c } else { Complex64::new(0.0, 0.0) })
        .collect();
    SpectralField::from_real_mean(coeffs)
}

/// `∫_T u³ dx`, exact for the truncated field.
pub fn cubic_integral(field: &SpectralField) -> f64 {
    let m = field.max_mode();
    let sq = pointwise_square(field, m);
    let c = field.coeffs();
    let s = sq.coeffs();
    let mut acc = s[0].re * c[0].re;
    for n in 1..=m {
        acc += 2.0 * (s[n] * c[n].conj()).re;
    }
    2.0 * PI * acc
}


#[cfg(test)]
mod tests {
    use super::test_support::random_field;
    use super::*;
    use proptest::prelude::*;

    fn idx(s: f64) -> SobolevIndex {
        SobolevIndex::new(s).unwrap()
    }

    #[test]
    fn cosine_norms() {
        let u = SpectralField::trig(3, 1, 1.0, 0.0).unwrap();
        assert!((sobolev_norm(&u, SobolevIndex::L2) - PI.sqrt()).abs() < 1e-14);
        assert!((sobolev_norm(&u, SobolevIndex::H1) - (2.0 * PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn norm_matches_direct_summation() {
        let u = random_field(64, 3);
        for s in [0.0, 0.25, 0.5, 1.0] {
            let direct: f64 = (-64i64..=64)
                .map(|n| (1.0 + (n * n) as f64).powf(s) * u.coeff(n).norm_sqr())
                .sum::<f64>()
                * 2.0
                * PI;
            let got = sobolev_norm_sq(&u, idx(s));
            assert!((got - direct).abs() < 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn parseval_against_grid_quadrature() {
        let u = random_field(12, 5);
        let p = 64;
        let grid = grid_transform(&u, p).unwrap();
        let quad: f64 = grid.iter().map(|v| v * v).sum::<f64>() * 2.0 * PI / p as f64;
        assert!((quad - sobolev_norm_sq(&u, SobolevIndex::L2)).abs() < 1e-11);
    }

    #[test]
    fn projection_examples() {
        let u = SpectralField::from_modes(
            4,
            &[(1, Complex64::new(1.0, 0.0)), (3, Complex64::new(0.0, 2.0))],
        )
        .unwrap();
        let p = project_low(&u, 2);
        assert_eq!(p.coeffs()[1], Complex64::new(1.0, 0.0));
        assert_eq!(p.coeffs()[3], Complex64::new(0.0, 0.0));
        assert_eq!(project_low(&p, 2), p);
    }

    #[test]
    fn tail_bound_on_cos8() {
        let u = SpectralField::trig(8, 8, 1.0, 0.0).unwrap();
        let s = idx(0.5);
        let lhs = sobolev_norm(&(&u - &project_low(&u, 4)), SobolevIndex::L2);
        let rhs = 4f64.powf(-0.5) * sobolev_norm(&u, s);
        assert!((lhs - PI.sqrt()).abs() < 1e-14);
        assert!((rhs - 0.5 * 65f64.powf(0.25) * PI.sqrt()).abs() < 1e-13);
        assert!(lhs <= rhs);
    }

    #[test]
    fn cubic_integral_matches_quadrature() {
        let u = random_field(10, 11);
        let p = 64;
        let grid = grid_transform(&u, p).unwrap();
        let quad: f64 = grid.iter().map(|v| v * v * v).sum::<f64>() * 2.0 * PI / p as f64;
        assert!((cubic_integral(&u) - quad).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn norm_monotone_in_s(seed in 0u64..1000, s1 in 0.0f64..1.0, ds in 0.0f64..1.0) {
            let u = random_field(16, seed);
            prop_assert!(sobolev_norm(&u, idx(s1)) <= sobolev_norm(&u, idx(s1 + ds)) * (1.0 + 1e-15));
        }

        #[test]
        fn projection_contracts(seed in 0u64..1000, n in 0usize..20, s in 0.0f64..1.0) {
            let u = random_field(16, seed);
            prop_assert!(sobolev_norm(&project_low(&u, n), idx(s)) <= sobolev_norm(&u, idx(s)));
        }

        #[test]
        fn tail_bound_holds(seed in 0u64..1000, n in 1usize..16, s in 0.0f64..1.0) {
            let u = random_field(16, seed);
            let tail = &u - &project_low(&u, n);
            prop_assert!(
                sobolev_norm(&tail, SobolevIndex::L2)
                    <= (n as f64).powf(-s) * sobolev_norm(&u, idx(s)) * (1.0 + 1e-14)
            );
        }

        #[test]
        fn square_is_quadratic(seed in 0u64..1000, alpha in -3.0f64..3.0) {
            let u = random_field(8, seed);
            let a = pointwise_square(&u.scaled(alpha), 16);
            let b = pointwise_square(&u, 16).scaled(alpha * alpha);
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                prop_assert!((x - y).norm() < 1e-12 * (1.0 + alpha * alpha) * 8.0);
            }
        }
    }
}
