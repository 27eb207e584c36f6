use serde::{Deserialize, Serialize};

use super::report::{Check, Relation, Table, VerifyReport};
use super::{aux_seed, Scenario, VerifyConfig};
use crate::dynamics::EvolveParams;
use crate::error::{Error, Result};
use crate::random_fields::{pushforward, sample_gaussian, Ensemble, MeasureSpec};
use crate::spectral::SobolevIndex;
use crate::transport::{cost_matrix, exact_ot, synchronized_bound};

const REFERENCE_STREAM: u64 = 16;
const NULL_STREAM_BASE: u64 = 64;

/// Distances for one perturbation size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRow {
    pub v: f64,
    /// Initial distance in `H^s` with exponent `p2`.
    pub d0: f64,
    /// Distance at time `t` in `L²` with exponent `p`.
    pub dt: f64,
}

impl PerturbationRow {
    pub fn ratio(&self) -> Option<f64> {
        (self.d0 > 0.0).then(|| self.dt / self.d0)
    }
}

/// How the two measures of a perturbation sweep are drawn and compared.
struct Sweep {
    fixed_seed: u64,
    evolve_fixed: bool,
    varying_seed: u64,
}

impl Sweep {
    /// Same-seed ensembles are index-coupled; their initial distance is the
    /// synchronized bound. Independent ensembles use the exact assignment.
    fn synchronized(&self) -> bool {
        self.fixed_seed == self.varying_seed
    }
}

fn exponents(cfg: &VerifyConfig) -> Result<(SobolevIndex, f64, f64)> {
    Ok((SobolevIndex::new(cfg.s)?, cfg.p, cfg.p2))
}

fn evolve_all(e: &Ensemble, cfg: &VerifyConfig) -> Result<Ensemble> {
    pushforward(e, cfg.t, &EvolveParams::new(cfg.dt, cfg.modes))
}

fn l2_exact(a: &Ensemble, b: &Ensemble, p: f64) -> Result<f64> {
    Ok(exact_ot(&cost_matrix(a, b, SobolevIndex::L2, p)?).value)
}

/// Gaussian ensemble `fixed` against `perturbed(V)` for every `V` in the grid:
/// `D0 = d_{s,p2}` at time zero, `Dt = d_{0,p}` after the flow.
fn sweep(cfg: &VerifyConfig, plan: &Sweep) -> Result<(Vec<PerturbationRow>, Ensemble)> {
    let (s, p, p2) = exponents(cfg)?;
    let fixed0 = sample_gaussian(&MeasureSpec::gaussian(cfg.modes), plan.fixed_seed, cfg.count)?;
    let fixed_t = if plan.evolve_fixed {
        evolve_all(&fixed0, cfg)?
    } else {
        fixed0.clone()
    };
    let mut rows = Vec::with_capacity(cfg.v_grid.len());
    for &v in &cfg.v_grid {
        let spec = MeasureSpec::perturbed(cfg.modes, v);
        let varying0 = sample_gaussian(&spec, plan.varying_seed, cfg.count)?;
        let d0 = if plan.synchronized() {
            synchronized_bound(&fixed0, &varying0, s, p2)?.value
        } else {
            exact_ot(&cost_matrix(&fixed0, &varying0, s, p2)?).value
        };
        let varying_t = evolve_all(&varying0, cfg)?;
        rows.push(PerturbationRow {
            v,
            d0,
            dt: l2_exact(&fixed_t, &varying_t, p)?,
        });
    }
    Ok((rows, fixed_t))
}

fn record_sweep(rows: &[PerturbationRow], cfg: &VerifyConfig, report: &mut VerifyReport) -> Result<()> {
    let mut table = Table::new(&["v", "d0", "dt", "ratio"]);
    for r in rows {
        table.push(vec![Some(r.v), Some(r.d0), Some(r.dt), r.ratio()]);
    }
    report.tables.insert("v_grid".into(), table);

    let ratios: Vec<f64> = rows.iter().filter_map(PerturbationRow::ratio).collect();
    if ratios.is_empty() {
        return Err(Error::invalid("perturbation grid has no pair with positive initial distance"));
    }
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    report.quantity("ratio_min", min);
    report.quantity("ratio_max", max);
    report.check(Check::new(
        "ratio_spread",
        max / min,
        Relation::Le,
        cfg.tolerance.ratio_spread_max,
    ));
    Ok(())
}

fn continuity_sweep(cfg: &VerifyConfig) -> Sweep {
    Sweep {
        fixed_seed: cfg.seed,
        evolve_fixed: true,
        varying_seed: cfg.reference_seed.unwrap_or(cfg.seed),
    }
}

fn stability_sweep(cfg: &VerifyConfig) -> Sweep {
    Sweep {
        fixed_seed: cfg
            .reference_seed
            .unwrap_or_else(|| aux_seed(cfg.seed, REFERENCE_STREAM)),
        evolve_fixed: cfg.evolve_reference,
        varying_seed: cfg.seed,
    }
}

fn require(cfg: &VerifyConfig, scenario: Scenario) -> Result<()> {
    if cfg.scenario != scenario {
        return Err(Error::invalid(format!(
            "config is for scenario '{}', not '{}'",
            cfg.scenario.name(),
            scenario.name()
        )));
    }
    cfg.validate()
}

/// Pushes the Gaussian measure and its multiplier perturbations through the
/// flow and checks that `Dt/D0` stays bounded across the perturbation grid
/// while `Dt` shrinks with the perturbation.
pub fn verify_continuity(cfg: &VerifyConfig) -> Result<VerifyReport> {
    require(cfg, Scenario::Continuity)?;
    let mut report = VerifyReport::new(cfg);
    let (rows, _) = sweep(cfg, &continuity_sweep(cfg))?;
    record_sweep(&rows, cfg, &mut report)?;

    if let Some(zero) = rows.iter().find(|r| r.v == 0.0 && r.d0 == 0.0) {
        report.check(Check::new("dt_at_zero_perturbation", zero.dt, Relation::Le, 0.0));
    }
    let nonzero: Vec<&PerturbationRow> = rows.iter().filter(|r| r.v != 0.0).collect();
    let smallest = nonzero.iter().min_by(|a, b| a.v.abs().total_cmp(&b.v.abs()));
    let largest = nonzero.iter().max_by(|a, b| a.v.abs().total_cmp(&b.v.abs()));
    if let (Some(lo), Some(hi)) = (smallest, largest) {
        if lo.v.abs() < hi.v.abs() {
            report.check(Check::new(
                "dt_small_over_large",
                lo.dt / hi.dt,
                Relation::Lt,
                cfg.tolerance.small_perturbation_ratio_max,
            ));
        }
    }
    Ok(report)
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Compares a perturbed Gaussian measure pushed through the flow against a
/// Gaussian reference: `Dt/D0` must stay bounded across the perturbation grid,
/// and with no perturbation `Dt` must be indistinguishable from the distance
/// between two independent reference ensembles.
pub fn verify_stability(cfg: &VerifyConfig) -> Result<VerifyReport> {
    require(cfg, Scenario::Stability)?;
    let mut report = VerifyReport::new(cfg);
    let (rows, reference) = sweep(cfg, &stability_sweep(cfg))?;
    record_sweep(&rows, cfg, &mut report)?;

    let reps = cfg.null_replicates;
    if reps >= 2 {
        let gaussian = MeasureSpec::gaussian(cfg.modes);
        let mut null = Vec::with_capacity(reps);
        let mut floor = Vec::with_capacity(reps);
        let mut table = Table::new(&["replicate", "null_dt", "floor"]);
        for r in 0..reps as u64 {
            let mu = sample_gaussian(&gaussian, aux_seed(cfg.seed, NULL_STREAM_BASE + 2 * r), cfg.count)?;
            let rho = sample_gaussian(&gaussian, aux_seed(cfg.seed, NULL_STREAM_BASE + 2 * r + 1), cfg.count)?;
            let n = l2_exact(&evolve_all(&mu, cfg)?, &reference, cfg.p)?;
            let f = l2_exact(&rho, &reference, cfg.p)?;
            table.push(vec![Some(r as f64), Some(n), Some(f)]);
            null.push(n);
            floor.push(f);
        }
        report.tables.insert("null".into(), table);
        let (mn, vn) = mean_and_var(&null);
        let (mf, vf) = mean_and_var(&floor);
        let se = ((vn + vf) / reps as f64).sqrt();
        let gap = (mn - mf).abs();
        report.quantity("null_mean", mn);
        report.quantity("floor_mean", mf);
        report.quantity("null_gap_se", se);
        let in_se = if gap == 0.0 { 0.0 } else { gap / se };
        report.check(Check::new(
            "null_gap_in_se",
            in_se,
            Relation::Le,
            cfg.tolerance.se_multiplier,
        ));
    }
    Ok(report)
}

#[cfg(test)]
pub(crate) fn sweep_rows(cfg: &VerifyConfig) -> Result<Vec<PerturbationRow>> {
    let plan = match cfg.scenario {
        Scenario::Continuity => continuity_sweep(cfg),
        _ => stability_sweep(cfg),
    };
    Ok(sweep(cfg, &plan)?.0)
}
