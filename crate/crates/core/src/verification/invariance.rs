use rayon::prelude::*;

use super::report::{Check, Relation, Table, VerifyReport};
use super::{flag, VerifyConfig};
use crate::dynamics::{conserved_quantities, EvolveParams};
use crate::error::Result;
use crate::random_fields::{pushforward, sample_gaussian, Ensemble, MeasureSpec};
use crate::spectral::{cubic_integral, sobolev_norm_sq, SobolevIndex, SpectralField};

type Functional = (&'static str, fn(&SpectralField) -> f64);

/// Functionals whose ensemble means must not move under the flow.
pub(crate) const FUNCTIONALS: [Functional; 3] = [
    ("l2_squared", |u| sobolev_norm_sq(u, SobolevIndex::L2)),
    ("h_quarter_fourth", |u| {
        sobolev_norm_sq(u, SobolevIndex::new(0.25).expect("finite")).powi(2)
    }),
    ("cubic_integral", cubic_integral),
];

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct Drift {
    mean0: f64,
    mean_t: f64,
    se0: f64,
    se_t: f64,
}

impl Drift {
    fn in_se(&self) -> f64 {
        let gap = (self.mean_t - self.mean0).abs();
        let se = self.se0.hypot(self.se_t);
        if gap == 0.0 {
            0.0
        } else {
            gap / se
        }
    }
}

fn drifts(start: &Ensemble, end: &Ensemble) -> Vec<Drift> {
    FUNCTIONALS
        .iter()
        .map(|(_, f)| {
            let v0: Vec<f64> = start.samples().par_iter().map(f).collect();
            let vt: Vec<f64> = end.samples().par_iter().map(f).collect();
            let (mean0, se0) = mean_se(&v0);
            let (mean_t, se_t) = mean_se(&vt);
            Drift {
                mean0,
                mean_t,
                se0,
                se_t,
            }
        })
        .collect()
}

/// Samples the Gaussian measure, pushes it to time `t`, and checks that the
/// ensemble means of the test functionals drift by at most the configured
/// number of standard errors.
pub fn verify_invariance(cfg: &VerifyConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut report = VerifyReport::new(cfg);
    let start = sample_gaussian(&MeasureSpec::gaussian(cfg.modes), cfg.seed, cfg.count)?;
    let params = EvolveParams::new(cfg.dt, cfg.modes);
    let end = pushforward(&start, cfg.t, &params)?;

    let found = drifts(&start, &end);
    let mut table = Table::new(&["functional", "mean0", "mean_t", "se0", "se_t"]);
    for (k, ((name, _), d)) in FUNCTIONALS.iter().zip(&found).enumerate() {
        table.push(vec![Some(k as f64), Some(d.mean0), Some(d.mean_t), Some(d.se0), Some(d.se_t)]);
        report.check(Check::new(
            format!("{name}_drift_in_se"),
            d.in_se(),
            Relation::Le,
            cfg.tolerance.se_multiplier,
        ));
    }
    report.tables.insert("functionals".into(), table);

    let (mean_drift, energy_drift) = start
        .samples()
        .iter()
        .zip(end.samples())
        .map(|(a, b)| {
            let (ca, cb) = (conserved_quantities(a), conserved_quantities(b));
            (
                (ca.mean - cb.mean).abs(),
                (ca.h1_energy - cb.h1_energy).abs() / ca.h1_energy.max(f64::MIN_POSITIVE),
            )
        })
        .fold((0.0f64, 0.0f64), |acc, x| (acc.0.max(x.0), acc.1.max(x.1)));
    report.quantity("max_mean_drift", mean_drift);
    report.quantity("max_relative_h1_drift", energy_drift);

    if cfg.dt_bias_check {
        let coarse = pushforward(&start, cfg.t, &params.with_dt(2.0 * cfg.dt))?;
        let mut all = true;
        for ((name, _), d) in FUNCTIONALS.iter().zip(drifts(&start, &coarse)) {
            let v = d.in_se();
            all &= v <= cfg.tolerance.se_multiplier;
            report.quantity(&format!("{name}_drift_in_se_at_double_dt"), v);
        }
        report.quantity("pass_at_double_dt", flag(all));
    }
    Ok(report)
}
