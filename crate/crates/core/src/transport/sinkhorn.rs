use super::{CostMatrix, Coupling, Diagnostics, DistanceReport, OtMethod};
use crate::error::{Error, Result};

pub const SINKHORN_MAX_ITERATIONS: usize = 100_000;

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Projects a nonnegative plan onto the set of plans with uniform marginals
/// `1/n`: rows then columns are scaled down to their targets, and the
/// remaining deficit is filled by a rank-one correction.
fn round_to_marginals(n: usize, plan: &mut [f64]) {
    let target = 1.0 / n as f64;
    for i in 0..n {
        let row = &mut plan[i * n..(i + 1) * n];
        let sum: f64 = row.iter().sum();
        if sum > target {
            let x = target / sum;
            row.iter_mut().for_each(|v| *v *= x);
        }
    }
    for j in 0..n {
        let sum: f64 = (0..n).map(|i| plan[i * n + j]).sum();
        if sum > target {
            let y = target / sum;
            (0..n).for_each(|i| plan[i * n + j] *= y);
        }
    }
    let err_r: Vec<f64> = (0..n)
        .map(|i| target - plan[i * n..(i + 1) * n].iter().sum::<f64>())
        .collect();
    let err_c: Vec<f64> = (0..n)
        .map(|j| target - (0..n).map(|i| plan[i * n + j]).sum::<f64>())
        .collect();
    let mass: f64 = err_r.iter().sum();
    if mass > 0.0 {
        for i in 0..n {
            for j in 0..n {
                plan[i * n + j] += err_r[i] * err_c[j] / mass;
            }
        }
    }
}

/// Iterations per intermediate stage of the `ε` schedule.
const STAGE_ITERATIONS: usize = 200;
/// Marginal error at which an intermediate stage hands over to the next.
const STAGE_TOL: f64 = 1e-3;

/// Sinkhorn state with potentials `f, g` in cost units.
struct Potentials<'a> {
    costs: &'a [f64],
    n: usize,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl Potentials<'_> {
    fn iterate(&mut self, eps: f64) -> f64 {
        let n = self.n;
        let log_w = -(n as f64).ln();
        let c = self.costs;
        for i in 0..n {
            let row = &c[i * n..(i + 1) * n];
            self.f[i] = eps * (log_w - log_sum_exp(self.g.iter().zip(row).map(|(gj, cij)| (gj - cij) / eps)));
        }
        for j in 0..n {
            let f = &self.f;
            self.g[j] = eps * (log_w - log_sum_exp((0..n).map(|i| (f[i] - c[i * n + j]) / eps)));
        }
        // columns are exact after the g-update; report the row error
        (0..n)
            .map(|i| {
                let row = &c[i * n..(i + 1) * n];
                let mass: f64 = self
                    .g
                    .iter()
                    .zip(row)
                    .map(|(gj, cij)| ((self.f[i] + gj - cij) / eps).exp())
                    .sum();
                (mass - log_w.exp()).abs()
            })
            .sum()
    }
}

/// Entropic approximation of `d_{s',p}` by log-domain Sinkhorn iterations.
///
/// The regularization is annealed from the largest cost down to `epsilon`,
/// halving per stage and warm-starting each stage from the previous
/// potentials. The last stage runs until the L1 row-marginal error is at most
/// `tol`. The plan is then rounded onto the exact marginals before costing, so
/// the value is that of a feasible coupling and never below the exact distance.
pub fn sinkhorn_ot(c: &CostMatrix, epsilon: f64, tol: f64) -> Result<DistanceReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let n = c.n();
    let mut pot = Potentials {
        costs: c.entries(),
        n,
        f: vec![0.0; n],
        g: vec![0.0; n],
    };
    let top = c.entries().iter().copied().fold(0.0f64, f64::max);
    let mut eps = top.max(epsilon);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while eps > epsilon {
        for _ in 0..STAGE_ITERATIONS {
            iterations += 1;
            residual = pot.iterate(eps);
            if residual <= STAGE_TOL.max(tol) {
                break;
            }
        }
        eps = (eps / 2.0).max(epsilon);
    }
    while iterations < SINKHORN_MAX_ITERATIONS {
        iterations += 1;
        residual = pot.iterate(eps);
        if residual <= tol {
            break;
        }
    }
    if residual > tol {
        return Err(Error::SinkhornNotConverged {
            iterations,
            residual,
        });
    }

    let Potentials { f, g, .. } = pot;
    let mut plan: Vec<f64> = (0..n * n)
        .map(|k| ((f[k / n] + g[k % n] - c.entries()[k]) / eps).exp())
        .collect();
    round_to_marginals(n, &mut plan);
    let total: f64 = plan.iter().zip(c.entries()).map(|(p, x)| p * x).sum();
    Ok(DistanceReport {
        value: total.max(0.0).powf(1.0 / c.p()),
        method: OtMethod::Sinkhorn,
        s_prime: c.s_prime(),
        p: c.p(),
        coupling: Coupling::Plan { n, entries: plan },
        diagnostics: Diagnostics {
            iterations,
            marginal_error: residual,
        },
    })
}
