//! Moment-growth estimators: the `√p` law of Gaussian-tailed norms and the
//! `E X^p ≤ E_0 C^{p^{1+α}}` law of log-deviation tails.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Ensemble;
use crate::error::{Error, Result};
use crate::spectral::{sobolev_norm, SobolevIndex};

/// Least-squares slope above which moment ratios `‖X‖_q / √q` count as growing.
pub const SQRT_P_SLOPE_MAX: f64 = 0.05;
/// Minimum coefficient of determination for a log-deviation fit.
pub const LOG_DEVIATION_R2_MIN: f64 = 0.95;
/// Largest allowed gap (in nats) between full-sample and half-sample `ln E X^p`.
pub const HALF_SAMPLE_TOL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentLaw {
    SqrtP,
    LogDeviation { alpha: f64 },
}

/// Outcome of a moment-law fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub law: MomentLaw,
    pub q_grid: Vec<f64>,
    /// `(E X^q)^{1/q}` per grid point.
    pub norms: Vec<f64>,
    /// `max_q ‖X‖_q/√q` for the √p law, `C` for the log-deviation law.
    pub fit_c: f64,
    /// Slope of `ln(‖X‖_q/√q)` against `ln q`, or `ln C`.
    pub slope: f64,
    /// `ln E_0` for the log-deviation law, unused (0) otherwise.
    pub intercept: f64,
    pub r_squared: Option<f64>,
    /// Largest admissible `δ` in `E e^{δ (ln X)^{1+1/α}} < ∞`; `None` if unbounded.
    pub tail_delta: Option<f64>,
    /// Half-sample moment estimates agree with the full sample.
    pub stable: bool,
    pub pass: bool,
}

pub fn norms(e: &Ensemble, s: SobolevIndex) -> Vec<f64> {
    e.samples().par_iter().map(|u| sobolev_norm(u, s)).collect()
}

/// `((1/K) Σ x_i^q)^{1/q}` for nonnegative values, computed without overflow.
pub fn power_mean(values: &[f64], q: f64) -> f64 {
    let max = values.iter().copied().fold(0.0f64, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let mean = values.iter().map(|x| (x / max).powf(q)).sum::<f64>() / values.len() as f64;
    max * mean.powf(1.0 / q)
}

/// `((1/K) Σ ‖u_i‖^q_{H^{s'}})^{1/q}` over the ensemble.
pub fn empirical_moment(e: &Ensemble, s_prime: SobolevIndex, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::invalid(format!("moment order must be >= 1, got {q}")));
    }
    Ok(power_mean(&norms(e, s_prime), q))
}

/// Eight orders evenly spaced on `[1, ln K]`.
pub fn default_q_grid(count: usize) -> Vec<f64> {
    let q_max = (count as f64).ln();
    if q_max <= 1.0 {
        return vec![1.0];
    }
    (0..8).map(|k| 1.0 + (q_max - 1.0) * k as f64 / 7.0).collect()
}

/// Eight orders evenly spaced on `(0, p_max]` with `p_max^{1+α} = ln(K)/2`.
pub fn default_p_grid(count: usize, alpha: f64) -> Vec<f64> {
    let p_max = ((count as f64).ln() / 2.0).max(0.0).powf(1.0 / (1.0 + alpha));
    (1..=8).map(|k| p_max * k as f64 / 8.0).collect()
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r2 = if ss_tot <= 1e-24 { 1.0 } else { 1.0 - ss_res / ss_tot };
    (slope, intercept, r2)
}

/// Tests the `‖X‖_q ≤ C √q` law on the `H^{s'}` norms of an ensemble.
pub fn subgaussian_fit(e: &Ensemble, s_prime: SobolevIndex, q_grid: &[f64]) -> Result<MomentReport> {
    subgaussian_fit_values(&norms(e, s_prime), q_grid)
}

/// Tests the `‖X‖_q ≤ C √q` law on nonnegative samples of `X`.
///
/// Passes when the least-squares slope of `ln(‖X‖_q/√q)` against `ln q` is at
/// most [`SQRT_P_SLOPE_MAX`]. Orders are restricted to `[1, ln K]`.
pub fn subgaussian_fit_values(values: &[f64], q_grid: &[f64]) -> Result<MomentReport> {
    if q_grid.is_empty() {
        return Err(Error::Empty("q grid"));
    }
    if values.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let q_max = (values.len() as f64).ln();
    if let Some(q) = q_grid.iter().find(|&&q| !(1.0..=q_max.max(1.0)).contains(&q)) {
        return Err(Error::invalid(format!(
            "moment order {q} outside [1, ln K = {q_max:.3}]"
        )));
    }
    let norms: Vec<f64> = q_grid.iter().map(|&q| power_mean(values, q)).collect();
    let ratios: Vec<f64> = norms.iter().zip(q_grid).map(|(n, q)| n / q.sqrt()).collect();
    let fit_c = ratios.iter().copied().fold(0.0, f64::max);
    let (slope, r_squared) = if q_grid.len() >= 2 && ratios.iter().all(|&r| r > 0.0) {
        let x: Vec<f64> = q_grid.iter().map(|q| q.ln()).collect();
        let y: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
        let (slope, _, r2) = least_squares(&x, &y);
        (slope, Some(r2))
    } else {
        (0.0, None)
    };
    Ok(MomentReport {
        law: MomentLaw::SqrtP,
        q_grid: q_grid.to_vec(),
        norms,
        fit_c,
        slope,
        intercept: 0.0,
        r_squared,
        tail_delta: None,
        stable: true,
        pass: slope <= SQRT_P_SLOPE_MAX,
    })
}

/// `ln((1/K) Σ x_i^p)` via log-sum-exp over `p ln x_i`.
fn log_mean_power(values: &[f64], p: f64) -> f64 {
    let logs: Vec<f64> = values.iter().map(|x| p * x.ln()).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    max + sum.ln() - (values.len() as f64).ln()
}

/// `β(α) = (1+α)^{-1/α} (1 - 1/(1+α))`.
pub fn beta(alpha: f64) -> f64 {
    (1.0 + alpha).powf(-1.0 / alpha) * (1.0 - 1.0 / (1.0 + alpha))
}

/// [`log_deviation_fit_with`] on [`default_p_grid`].
pub fn log_deviation_fit(values: &[f64], alpha: f64) -> Result<MomentReport> {
    log_deviation_fit_with(values, alpha, &default_p_grid(values.len(), alpha))
}

/// Fits `ln E X^p = ln E_0 + p^{1+α} ln C` by least squares.
///
/// The verdict requires a linear fit (R² ≥ [`LOG_DEVIATION_R2_MIN`]) and
/// moment estimates that do not move when the sample is halved: for heavier
/// tails the empirical moments are carried by the sample maximum and keep
/// growing with the sample size.
pub fn log_deviation_fit_with(values: &[f64], alpha: f64, p_grid: &[f64]) -> Result<MomentReport> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if let Some(bad) = values.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::invalid(format!("values must be positive and finite, got {bad}")));
    }
    let usable: Vec<f64> = p_grid.iter().copied().filter(|&p| p > 0.0 && p.is_finite()).collect();
    if usable.len() < 3 || values.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 3 usable moment orders and 2 samples, got {} and {}",
            usable.len(),
            values.len()
        )));
    }
    let log_moments: Vec<f64> = usable.iter().map(|&p| log_mean_power(values, p)).collect();
    let x: Vec<f64> = usable.iter().map(|p| p.powf(1.0 + alpha)).collect();
    let (slope, intercept, r2) = least_squares(&x, &log_moments);

    let (first, second) = values.split_at(values.len() / 2);
    let stable = usable.iter().zip(&log_moments).all(|(&p, &full)| {
        [first, second]
            .iter()
            .all(|half| (log_mean_power(half, p) - full).abs() <= HALF_SAMPLE_TOL)
    });

    let norms = usable
        .iter()
        .zip(&log_moments)
        .map(|(p, l)| (l / p).exp())
        .collect();
    let tail_delta = (slope > 0.0).then(|| beta(alpha) / slope.powf(1.0 / alpha));
    Ok(MomentReport {
        law: MomentLaw::LogDeviation { alpha },
        q_grid: usable,
        norms,
        fit_c: slope.exp(),
        slope,
        intercept,
        r_squared: Some(r2),
        tail_delta,
        stable,
        pass: stable && r2 >= LOG_DEVIATION_R2_MIN,
    })
}

/// Counts samples `λ` whose empirical tail `P(X ≥ λ)` exceeds the Gaussian
/// bound `exp(-λ²/(2e C²))` implied by `‖X‖_p ≤ C√p`, over the range
/// `λ² ≥ e C²` where the Markov optimisation applies.
pub fn gaussian_tail_violations(values: &[f64], fit_c: f64) -> usize {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len() as f64;
    let e = std::f64::consts::E;
    sorted
        .iter()
        .enumerate()
        .filter(|(i, &lam)| {
            let p = lam * lam / (e * fit_c * fit_c);
            // samples at index >= i are >= λ
            let tail = (k - *i as f64) / k;
            p >= 1.0 && tail > (-p / 2.0).exp()
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_fields::{sample_gaussian, MeasureSpec};
    use crate::spectral::SpectralField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn power_mean_basics() {
        assert_eq!(power_mean(&[0.0, 0.0], 3.0), 0.0);
        assert!((power_mean(&[1.0, 3.0], 1.0) - 2.0).abs() < 1e-15);
        assert!((power_mean(&[1.0, 3.0], 2.0) - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn delta_measure_moment() {
        let e = Ensemble::empirical("cos", vec![SpectralField::trig(2, 1, 1.0, 0.0).unwrap()]).unwrap();
        for q in [1.0, 2.5, 7.0] {
            let m = empirical_moment(&e, SobolevIndex::L2, q).unwrap();
            assert!((m - PI.sqrt()).abs() < 1e-14);
        }
        assert!(empirical_moment(&e, SobolevIndex::L2, 0.5).is_err());
    }

    #[test]
    fn constant_norms_pass_with_unit_constant() {
        let values = vec![1.0; 100];
        let grid = default_q_grid(100);
        let r = subgaussian_fit_values(&values, &grid).unwrap();
        assert!(r.pass);
        assert!((r.fit_c - 1.0).abs() < 1e-15);
        assert!((r.slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn lognormal_fails_sqrt_law() {
        let values: Vec<f64> = normals(4000, 1).iter().map(|g| g.exp()).collect();
        let r = subgaussian_fit_values(&values, &default_q_grid(4000)).unwrap();
        assert!(!r.pass, "slope {}", r.slope);
    }

    #[test]
    fn gaussian_ensemble_passes_sqrt_law() {
        let e = sample_gaussian(&MeasureSpec::gaussian(16), 3, 1000).unwrap();
        let r = subgaussian_fit(&e, SobolevIndex::new(0.4).unwrap(), &default_q_grid(1000)).unwrap();
        assert!(r.pass, "slope {}", r.slope);
        assert!(r.norms.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn q_grid_validated() {
        let v = vec![1.0; 20];
        assert!(subgaussian_fit_values(&v, &[]).is_err());
        assert!(subgaussian_fit_values(&v, &[0.5]).is_err());
        assert!(subgaussian_fit_values(&v, &[4.0]).is_err());
    }

    #[test]
    fn unit_variable_log_deviation() {
        let r = log_deviation_fit(&vec![1.0; 50], 1.0).unwrap();
        assert!(r.pass);
        assert_eq!(r.slope, 0.0);
        assert_eq!(r.fit_c, 1.0);
        assert_eq!(r.tail_delta, None);
    }

    #[test]
    fn lognormal_log_deviation_slope() {
        let values: Vec<f64> = normals(100_000, 2).iter().map(|g| g.exp()).collect();
        let r = log_deviation_fit(&values, 1.0).unwrap();
        assert!(r.pass);
        assert!((r.slope - 0.5).abs() < 0.05, "slope {}", r.slope);
        assert!(r.intercept.abs() < 0.05);
        // β(1) = 1/4, so δ = 1/(4 ln C) ≈ 1/2
        assert!((r.tail_delta.unwrap() - 0.5).abs() < 0.06);
    }

    #[test]
    fn exp_of_square_is_unstable() {
        for k in [20_000usize, 100_000] {
            let values: Vec<f64> = normals(k, 3).iter().map(|g| (g * g).exp()).collect();
            let r = log_deviation_fit(&values, 1.0).unwrap();
            assert!(!r.stable && !r.pass);
        }
    }

    #[test]
    fn log_deviation_rejects_degenerate_input() {
        assert!(log_deviation_fit_with(&[1.0, 2.0], 1.0, &[1.0, 2.0]).is_err());
        assert!(log_deviation_fit(&[1.0, -2.0], 1.0).is_err());
        assert!(log_deviation_fit(&[1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn beta_value() {
        assert!((beta(1.0) - 0.25).abs() < 1e-15);
        assert!((beta(2.0) - 3f64.powf(-0.5) * (2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn tail_check_on_gaussian_norms() {
        let values: Vec<f64> = normals(2000, 4).iter().map(|g| g.abs()).collect();
        let r = subgaussian_fit_values(&values, &default_q_grid(2000)).unwrap();
        assert_eq!(gaussian_tail_violations(&values, r.fit_c), 0);
    }
}
