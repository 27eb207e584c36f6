use itertools::Itertools;

use super::{CostMatrix, Coupling, Diagnostics, DistanceReport, OtMethod};
use crate::error::{Error, Result};

/// Largest size accepted by [`brute_force_ot`].
pub const BRUTE_FORCE_MAX: usize = 8;

/// Minimum-cost assignment by successive shortest augmenting paths with
/// dual potentials (Hungarian method), `O(n³)`.
///
/// Returns `perm` with row `i` assigned to column `perm[i]`. Among equal
/// reduced costs the lowest column index is taken.
fn hungarian(c: &CostMatrix) -> Vec<usize> {
    let n = c.n();
    // 1-based arrays with a virtual column 0, following the classic formulation.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![f64::INFINITY; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let row = c.row(i0 - 1);
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[owner[j] - 1] = j - 1;
    }
    perm
}

/// Exact `d_{s',p}` between two uniform ensembles from their cost matrix.
pub fn exact_ot(c: &CostMatrix) -> DistanceReport {
    let perm = hungarian(c);
    DistanceReport {
        value: c.permutation_value(&perm),
        method: OtMethod::Exact,
        s_prime: c.s_prime(),
        p: c.p(),
        coupling: Coupling::Permutation(perm),
        diagnostics: Diagnostics::default(),
    }
}

/// Minimum of [`CostMatrix::permutation_value`] over all `n!` permutations.
pub fn brute_force_ot(c: &CostMatrix) -> Result<f64> {
    let n = c.n();
    if n > BRUTE_FORCE_MAX {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX,
        });
    }
    let best = (0..n)
        .permutations(n)
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(i, &j)| c.get(i, j))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    Ok((best / n as f64).powf(1.0 / c.p()))
}
