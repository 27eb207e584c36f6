use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::report::{Check, Relation, Table, VerifyReport};
use super::{aux_seed, flag, VerifyConfig};
use crate::error::{Error, Result};
use crate::random_fields::{
    default_q_grid, gaussian_tail_violations, log_deviation_fit, norms, sample_gaussian,
    subgaussian_fit_values, substream_seed, Ensemble, MeasureSpec,
};
use crate::spectral::{SobolevIndex, SpectralField};

const LOGNORMAL_FIELD_STREAM: u64 = 0;
const LOGNORMAL_SCALAR_STREAM: u64 = 1;
const EXP_SQUARE_STREAM: u64 = 2;

/// `count` standard normals, one substream per index.
pub(crate) fn standard_normals(seed: u64, count: usize) -> Vec<f64> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| ChaCha8Rng::seed_from_u64(substream_seed(seed, i)).sample(StandardNormal))
        .collect()
}

/// Constant fields `u_i ≡ e^{G_i}`: a measure whose norms have lognormal tails.
pub(crate) fn lognormal_constants(modes: usize, seed: u64, count: usize) -> Result<Ensemble> {
    let samples = standard_normals(seed, count)
        .into_iter()
        .map(|g| SpectralField::constant(modes, g.exp()))
        .collect();
    Ensemble::empirical("lognormal_constants", samples)
}

/// Checks the two moment laws on families whose answers are known: the
/// Gaussian measure obeys the `√p` law, lognormal norms violate it but obey
/// the log-deviation law with `ln C = 1/2`, and `e^{G²}` obeys neither.
pub fn verify_moment_laws(cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    if cfg.scalar_count < 2 {
        return Err(Error::invalid("moment scenario needs at least 2 scalar draws"));
    }
    let mut report = VerifyReport::new(cfg);
    let s = SobolevIndex::new(cfg.s)?;
    let tol = &cfg.tolerance;
    let q_grid = default_q_grid(cfg.count);

    let gaussian = sample_gaussian(&MeasureSpec::gaussian(cfg.modes), cfg.seed, cfg.count)?;
    let g_norms = norms(&gaussian, s);
    let g_fit = subgaussian_fit_values(&g_norms, &q_grid)?;
    report.check(Check::new(
        "gaussian_sqrt_p_slope",
        g_fit.slope,
        Relation::Le,
        tol.sqrt_p_slope_max,
    ));
    report.quantity("gaussian_fit_c", g_fit.fit_c);
    report.quantity(
        "gaussian_tail_violations",
        gaussian_tail_violations(&g_norms, g_fit.fit_c) as f64,
    );

    let lognormal = lognormal_constants(cfg.modes, aux_seed(cfg.seed, LOGNORMAL_FIELD_STREAM), cfg.count)?;
    let l_fit = subgaussian_fit_values(&norms(&lognormal, s), &q_grid)?;
    report.check(Check::new(
        "lognormal_sqrt_p_slope",
        l_fit.slope,
        Relation::Gt,
        tol.sqrt_p_slope_max,
    ));

    let mut q_table = Table::new(&["q", "gaussian_norm", "gaussian_ratio", "lognormal_norm", "lognormal_ratio"]);
    for (k, &q) in q_grid.iter().enumerate() {
        let (gn, ln) = (g_fit.norms[k], l_fit.norms[k]);
        q_table.push(vec![Some(q), Some(gn), Some(gn / q.sqrt()), Some(ln), Some(ln / q.sqrt())]);
    }
    report.tables.insert("q_grid".into(), q_table);

    let scalars: Vec<f64> = standard_normals(aux_seed(cfg.seed, LOGNORMAL_SCALAR_STREAM), cfg.scalar_count)
        .into_iter()
        .map(f64::exp)
        .collect();
    let ld = log_deviation_fit(&scalars, 1.0)?;
    report.check(Check::new(
        "lognormal_log_c_error",
        (ld.slope - tol.lognormal_log_c).abs(),
        Relation::Le,
        tol.lognormal_log_c_tol,
    ));
    report.check(Check::new("lognormal_log_deviation_pass", flag(ld.pass), Relation::Ge, 1.0));
    if let Some(delta) = ld.tail_delta {
        report.quantity("lognormal_tail_delta", delta);
    }
    let mut p_table = Table::new(&["p", "log_moment", "fitted"]);
    for (&p, &norm) in ld.q_grid.iter().zip(&ld.norms) {
        let fitted = ld.intercept + p * p * ld.slope;
        p_table.push(vec![Some(p), Some(p * norm.ln()), Some(fitted)]);
    }
    report.tables.insert("p_grid".into(), p_table);

    let heavy: Vec<f64> = standard_normals(aux_seed(cfg.seed, EXP_SQUARE_STREAM), cfg.scalar_count)
        .into_iter()
        .map(|g| (g * g).exp())
        .collect();
    let heavy_fit = log_deviation_fit(&heavy, 1.0)?;
    report.check(Check::new("exp_square_rejected", flag(!heavy_fit.pass), Relation::Ge, 1.0));
    Ok(report)
}
