//! Wasserstein distances `d_{s',p}` between equal-size uniform ensembles.
//!
//! For uniform empirical marginals of equal size the optimal coupling can be
//! taken to be a permutation, so the exact distance is an assignment problem.

mod assignment;
mod sinkhorn;

pub use assignment::{brute_force_ot, exact_ot, BRUTE_FORCE_MAX};
pub use sinkhorn::{sinkhorn_ot, SINKHORN_MAX_ITERATIONS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random_fields::Ensemble;
use crate::spectral::{sobolev_weights, weighted_dist_sq, SobolevIndex};

/// Pairwise ground costs `‖a_i - b_j‖^p_{H^{s'}}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<f64>,
    s_prime: f64,
    p: f64,
}

impl CostMatrix {
    /// Wraps an arbitrary square matrix of nonnegative finite costs.
    pub fn from_entries(n: usize, entries: Vec<f64>, s_prime: f64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("cost matrix"));
        }
        if entries.len() != n * n {
            return Err(Error::SizeMismatch(entries.len(), n * n));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::invalid(format!("exponent p must be >= 1, got {p}")));
        }
        if let Some(bad) = entries.iter().find(|&&c| !(c >= 0.0 && c.is_finite())) {
            return Err(Error::invalid(format!("cost entries must be finite and >= 0, got {bad}")));
        }
        Ok(Self {
            n,
            entries,
            s_prime,
            p,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn s_prime(&self) -> f64 {
        self.s_prime
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transposed(&self) -> Self {
        let n = self.n;
        let entries = (0..n * n).map(|k| self.entries[(k % n) * n + k / n]).collect();
        Self { entries, ..*self }
    }

    pub fn median(&self) -> f64 {
        let mut v = self.entries.clone();
        v.sort_by(f64::total_cmp);
        let m = v.len();
        if m % 2 == 1 {
            v[m / 2]
        } else {
            0.5 * (v[m / 2 - 1] + v[m / 2])
        }
    }

    /// `((1/n) Σ_i c_{i,π(i)})^{1/p}`, summed in row order.
    pub fn permutation_value(&self, perm: &[usize]) -> f64 {
        let total: f64 = perm.iter().enumerate().map(|(i, &j)| self.get(i, j)).sum();
        (total / self.n as f64).powf(1.0 / self.p)
    }
}

/// A transport plan between two uniform ensembles of size `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Sample `i` of the first ensemble is sent to sample `perm[i]`.
    Permutation(Vec<usize>),
    /// Dense `n × n` plan, row-major, each row and column summing to `1/n`.
    Plan { n: usize, entries: Vec<f64> },
}

impl Coupling {
    /// Largest deviation of a row or column sum from `1/n`, or 0 for valid permutations.
    pub fn marginal_error(&self) -> f64 {
        match self {
            Coupling::Permutation(perm) => {
                let mut seen = vec![false; perm.len()];
                for &j in perm {
                    if j >= perm.len() || std::mem::replace(&mut seen[j], true) {
                        return f64::INFINITY;
                    }
                }
                0.0
            }
            Coupling::Plan { n, entries } => {
                let target = 1.0 / *n as f64;
                let mut worst = 0.0f64;
                for i in 0..*n {
                    let row: f64 = entries[i * n..(i + 1) * n].iter().sum();
                    let col: f64 = (0..*n).map(|k| entries[k * n + i]).sum();
                    worst = worst.max((row - target).abs()).max((col - target).abs());
                }
                worst
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OtMethod {
    Exact,
    Sinkhorn,
    Synchronized,
    Brute,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub marginal_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub value: f64,
    pub method: OtMethod,
    pub s_prime: f64,
    pub p: f64,
    pub coupling: Coupling,
    pub diagnostics: Diagnostics,
}

/// Ground costs between two ensembles of equal size and `max_mode`.
pub fn cost_matrix(a: &Ensemble, b: &Ensemble, s_prime: SobolevIndex, p: f64) -> Result<CostMatrix> {
    a.check_compatible(b)?;
    let n = a.len();
    let w = sobolev_weights(a.max_mode(), s_prime);
    let half_p = p / 2.0;
    let entries: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let d2 = weighted_dist_sq(
                a.samples()[k / n].coeffs(),
                b.samples()[k % n].coeffs(),
                &w,
            );
            d2.powf(half_p)
        })
        .collect();
    CostMatrix::from_entries(n, entries, s_prime.value(), p)
}

/// Distance under the index coupling `i ↦ i`; an upper bound on `d_{s',p}`.
pub fn synchronized_bound(
    a: &Ensemble,
    b: &Ensemble,
    s_prime: SobolevIndex,
    p: f64,
) -> Result<DistanceReport> {
    a.check_compatible(b)?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(format!("exponent p must be >= 1, got {p}")));
    }
    let w = sobolev_weights(a.max_mode(), s_prime);
    let costs: Vec<f64> = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| weighted_dist_sq(x.coeffs(), y.coeffs(), &w).powf(p / 2.0))
        .collect();
    let value = (costs.iter().sum::<f64>() / costs.len() as f64).powf(1.0 / p);
    Ok(DistanceReport {
        value,
        method: OtMethod::Synchronized,
        s_prime: s_prime.value(),
        p,
        coupling: Coupling::Permutation((0..a.len()).collect()),
        diagnostics: Diagnostics::default(),
    })
}
