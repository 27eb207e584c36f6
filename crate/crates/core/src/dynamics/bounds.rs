//! Evaluable growth and difference bounds with calibratable constants.
//!
//! The inequalities carry absolute constants `C`, `c` that are not explicit.
//! Here they are parameters; [`calibrate_constants`] and [`calibrate_growth`]
//! search for the smallest `C` (with `c` held fixed) that makes an inequality
//! hold on measured trajectories.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::{evolve_trajectory, EvolveParams};
use crate::error::{Error, Result};
use crate::spectral::{sobolev_norm, SobolevIndex, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub s: f64,
    pub sigma: f64,
    /// Prefactor constant `C`.
    pub big_c: f64,
    /// Exponential-rate constant `c`.
    pub small_c: f64,
}

impl BoundParams {
    pub fn new(s: f64, sigma: f64, big_c: f64, small_c: f64) -> Result<Self> {
        let bp = Self {
            s,
            sigma,
            big_c,
            small_c,
        };
        bp.validate()?;
        Ok(bp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::invalid(format!("s must lie in (0, 1), got {}", self.s)));
        }
        if !(self.sigma > 0.5 && self.sigma <= 1.0) {
            return Err(Error::invalid(format!(
                "sigma must lie in (1/2, 1], got {}",
                self.sigma
            )));
        }
        if !(self.big_c > 0.0 && self.small_c > 0.0) {
            return Err(Error::invalid("constants C and c must be positive"));
        }
        Ok(())
    }

    pub fn with_big_c(mut self, big_c: f64) -> Self {
        self.big_c = big_c;
        self
    }

    pub fn s_index(&self) -> SobolevIndex {
        SobolevIndex::new(self.s).expect("validated")
    }
}

/// `T = 1 + |t|`.
pub fn horizon(t: f64) -> f64 {
    1.0 + t.abs()
}

/// Frequency cutoff `N = ⌈(C T ‖u_0‖_{H^s})^{1/s}⌉`.
pub fn frequency_cutoff(norm_hs: f64, t: f64, bp: &BoundParams) -> f64 {
    (bp.big_c * horizon(t) * norm_hs).powf(1.0 / bp.s).ceil()
}

/// `C (1/T + N^{σ-s} ‖u_0‖_{H^s})`, bounding `sup_{|τ|≤t} ‖u(τ)‖_{L²}`.
pub fn bound_growth(norm_u0_hs: f64, t: f64, bp: &BoundParams) -> f64 {
    let big_t = horizon(t);
    let n = frequency_cutoff(norm_u0_hs, t, bp);
    let tail = if norm_u0_hs == 0.0 {
        0.0
    } else {
        n.powf(bp.sigma - bp.s) * norm_u0_hs
    };
    bp.big_c * (1.0 / big_t + tail)
}

/// Right-hand side of the two-solution difference estimate:
///
/// `C (1 + (C T a)^{(σ-s)/s} + (C T b)^{(σ-s)/s}) e^{c P} ‖u_{0,1} - u_{0,2}‖_{H^s}`
///
/// with `a`, `b` the initial `H^s` norms and `P = ∫_0^t ‖u_1(τ)‖_{L²} dτ`.
pub fn bound_difference(
    norm1_hs: f64,
    norm2_hs: f64,
    diff_hs: f64,
    t: f64,
    path_integral: f64,
    bp: &BoundParams,
) -> f64 {
    let big_t = horizon(t);
    let k = (bp.sigma - bp.s) / bp.s;
    let term = |norm: f64| (bp.big_c * big_t * norm).powf(k);
    bp.big_c
        * (1.0 + term(norm1_hs) + term(norm2_hs))
        * (bp.small_c * path_integral).exp()
        * diff_hs
}

/// Geometric search grid `min · ratio^k` for calibrated constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationGrid {
    pub min: f64,
    pub max: f64,
    pub ratio: f64,
}

impl Default for CalibrationGrid {
    fn default() -> Self {
        Self {
            min: 1.0 / 1024.0,
            max: 1024.0,
            ratio: 2f64.sqrt(),
        }
    }
}

impl CalibrationGrid {
    pub fn points(&self) -> Vec<f64> {
        assert!(self.min > 0.0 && self.ratio > 1.0 && self.max >= self.min);
        let count = ((self.max / self.min).ln() / self.ratio.ln() + 1e-9).floor() as i32;
        (0..=count).map(|k| self.min * self.ratio.powi(k)).collect()
    }

    /// Smallest grid point accepted by a predicate that is monotone in `C`.
    fn smallest(&self, accept: impl Fn(f64) -> bool) -> Option<f64> {
        let pts = self.points();
        let idx = pts.partition_point(|&c| !accept(c));
        pts.get(idx).copied()
    }
}

/// One measured instance of the difference estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceMeasurement {
    pub t: f64,
    pub norm1_hs: f64,
    pub norm2_hs: f64,
    pub diff_hs: f64,
    pub path_integral: f64,
    /// `‖u_1(t) - u_2(t)‖_{L²}`.
    pub lhs: f64,
}

impl DifferenceMeasurement {
    pub fn rhs(&self, bp: &BoundParams) -> f64 {
        bound_difference(
            self.norm1_hs,
            self.norm2_hs,
            self.diff_hs,
            self.t,
            self.path_integral,
            bp,
        )
    }

    pub fn holds(&self, bp: &BoundParams) -> bool {
        self.lhs <= self.rhs(bp)
    }
}

/// Scenario input: two initial data and a time.
#[derive(Debug, Clone)]
pub struct DifferenceScenario {
    pub u01: SpectralField,
    pub u02: SpectralField,
    pub t: f64,
}

pub fn measure_difference(
    scenario: &DifferenceScenario,
    s: SobolevIndex,
    params: &EvolveParams,
) -> Result<DifferenceMeasurement> {
    let tr1 = evolve_trajectory(&scenario.u01, scenario.t, params)?;
    let u2 = super::flow::evolve(&scenario.u02, scenario.t, params)?;
    let diff0 = scenario.u01.axpy(-1.0, &scenario.u02)?;
    let diff_t = tr1.terminal.axpy(-1.0, &u2)?;
    Ok(DifferenceMeasurement {
        t: scenario.t,
        norm1_hs: sobolev_norm(&scenario.u01, s),
        norm2_hs: sobolev_norm(&scenario.u02, s),
        diff_hs: sobolev_norm(&diff0, s),
        path_integral: tr1.path_integral(),
        lhs: sobolev_norm(&diff_t, SobolevIndex::L2),
    })
}

/// Smallest grid `C` (with `c = bp0.small_c`) making the difference bound
/// hold on every measurement.
pub fn calibrate_difference(
    measurements: &[DifferenceMeasurement],
    bp0: &BoundParams,
    grid: &CalibrationGrid,
) -> Result<BoundParams> {
    if measurements.is_empty() {
        return Err(Error::Empty("calibration scenarios"));
    }
    bp0.validate()?;
    let accept = |c: f64| {
        let bp = bp0.with_big_c(c);
        measurements.iter().all(|m| m.holds(&bp))
    };
    match grid.smallest(accept) {
        Some(c) => Ok(bp0.with_big_c(c)),
        None => {
            let top = bp0.with_big_c(grid.max);
            let (worst, m) = measurements
                .iter()
                .enumerate()
                .max_by(|a, b| {
                    let ra = a.1.lhs / a.1.rhs(&top);
                    let rb = b.1.lhs / b.1.rhs(&top);
                    ra.total_cmp(&rb)
                })
                .expect("non-empty");
            Err(Error::CalibrationFailed {
                worst,
                required: grid.max * m.lhs / m.rhs(&top),
            })
        }
    }
}

/// Measures every scenario's trajectories, then calibrates `C` with
/// `c` held at `bp0.small_c`.
pub fn calibrate_constants(
    scenarios: &[DifferenceScenario],
    bp0: &BoundParams,
    params: &EvolveParams,
    grid: &CalibrationGrid,
) -> Result<BoundParams> {
    let measured = scenarios
        .par_iter()
        .enumerate()
        .map(|(i, sc)| measure_difference(sc, bp0.s_index(), params).map_err(|e| e.at_sample(i)))
        .collect::<Result<Vec<_>>>()?;
    calibrate_difference(&measured, bp0, grid)
}

/// One measured instance of the growth estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthMeasurement {
    pub t: f64,
    pub norm_hs: f64,
    /// `sup_{|τ|≤t} ‖u(τ)‖_{L²}`.
    pub sup_l2: f64,
}

impl GrowthMeasurement {
    pub fn rhs(&self, bp: &BoundParams) -> f64 {
        bound_growth(self.norm_hs, self.t, bp)
    }

    pub fn holds(&self, bp: &BoundParams) -> bool {
        self.sup_l2 <= self.rhs(bp)
    }
}

/// Growth measurements of `u0` at each horizon, from a single forward and
/// a single backward trajectory out to the largest horizon.
pub fn measure_growth(
    u0: &SpectralField,
    horizons: &[f64],
    s: SobolevIndex,
    params: &EvolveParams,
) -> Result<Vec<GrowthMeasurement>> {
    let t_max = horizons.iter().fold(0.0f64, |a, &t| a.max(t.abs()));
    let fwd = evolve_trajectory(u0, t_max, params)?;
    let bwd = evolve_trajectory(u0, -t_max, params)?;
    let norm_hs = sobolev_norm(u0, s);
    Ok(horizons
        .iter()
        .map(|&t| GrowthMeasurement {
            t,
            norm_hs,
            sup_l2: fwd.sup_l2(t.abs()).max(bwd.sup_l2(t.abs())),
        })
        .collect())
}

/// Smallest grid `C` making the growth bound hold on every measurement.
pub fn calibrate_growth(
    measurements: &[GrowthMeasurement],
    bp0: &BoundParams,
    grid: &CalibrationGrid,
) -> Result<BoundParams> {
    if measurements.is_empty() {
        return Err(Error::Empty("calibration samples"));
    }
    bp0.validate()?;
    let accept = |c: f64| {
        let bp = bp0.with_big_c(c);
        measurements.iter().all(|m| m.holds(&bp))
    };
    grid.smallest(accept)
        .map(|c| bp0.with_big_c(c))
        .ok_or_else(|| {
            let top = bp0.with_big_c(grid.max);
            let (worst, m) = measurements
                .iter()
                .enumerate()
                .max_by(|a, b| (a.1.sup_l2 / a.1.rhs(&top)).total_cmp(&(b.1.sup_l2 / b.1.rhs(&top))))
                .expect("non-empty");
            Error::CalibrationFailed {
                worst,
                required: grid.max * m.sup_l2 / m.rhs(&top),
            }
        })
}

/// Per-step record of a pair of trajectories for the local contraction check.
#[derive(Debug, Clone)]
pub struct PairTrace {
    /// `‖u_{0,1} - u_{0,2}‖_{L²}`.
    pub diff0: f64,
    /// `(τ, ‖u_1(τ) - u_2(τ)‖_{L²}, max_i ‖u_i(τ)‖_{L²})`.
    pub steps: Vec<(f64, f64, f64)>,
}

impl PairTrace {
    /// Whether both local estimates hold up to `|τ| ≤ 1/(CΛ)`.
    pub fn contracts(&self, big_c: f64, lambda: f64) -> bool {
        let horizon = 1.0 / (big_c * lambda);
        self.steps
            .iter()
            .take_while(|s| s.0.abs() <= horizon)
            .all(|&(_, d, m)| d <= big_c * self.diff0 && m <= big_c * lambda)
    }
}

/// Evolves a pair out to `max_horizon`, recording differences at each step.
pub fn trace_pair(
    u01: &SpectralField,
    u02: &SpectralField,
    max_horizon: f64,
    params: &EvolveParams,
) -> Result<PairTrace> {
    let l2 = SobolevIndex::L2;
    let dt = params.dt;
    let steps = (max_horizon / dt).ceil() as usize;
    let mut a = u01.clone();
    let mut b = u02.clone();
    let mut out = Vec::with_capacity(steps + 1);
    let record = |tau: f64, a: &SpectralField, b: &SpectralField| {
        (
            tau,
            sobolev_norm(&(a - b), l2),
            sobolev_norm(a, l2).max(sobolev_norm(b, l2)),
        )
    };
    out.push(record(0.0, &a, &b));
    for k in 1..=steps {
        a = super::flow::evolve(&a, dt, params)?;
        b = super::flow::evolve(&b, dt, params)?;
        out.push(record(k as f64 * dt, &a, &b));
    }
    Ok(PairTrace {
        diff0: sobolev_norm(&(u01 - u02), l2),
        steps: out,
    })
}

/// Smallest grid `C` for which every traced pair satisfies the local
/// contraction estimate on `|τ| ≤ 1/(CΛ)`. Only grid points with
/// `1/(CΛ) ≤ max_horizon` of the traces are eligible.
pub fn calibrate_local_contraction(
    traces: &[PairTrace],
    lambda: f64,
    max_horizon: f64,
    grid: &CalibrationGrid,
) -> Result<f64> {
    if traces.is_empty() {
        return Err(Error::Empty("pair traces"));
    }
    let c_floor = 1.0 / (lambda * max_horizon);
    grid.smallest(|c| c >= c_floor && traces.iter().all(|tr| tr.contracts(c, lambda)))
        .ok_or(Error::CalibrationFailed {
            worst: 0,
            required: grid.max,
        })
}
