use serde::{Deserialize, Serialize};

use crate::dynamics::CalibrationGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Growth,
    Difference,
    Continuity,
    Stability,
    Invariance,
    Moments,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Growth,
        Scenario::Difference,
        Scenario::Continuity,
        Scenario::Stability,
        Scenario::Invariance,
        Scenario::Moments,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Growth => "growth",
            Scenario::Difference => "difference",
            Scenario::Continuity => "continuity",
            Scenario::Stability => "stability",
            Scenario::Invariance => "invariance",
            Scenario::Moments => "moments",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scenario '{s}'")))
    }
}

/// Thresholds that turn measured quantities into verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Largest allowed `max(Dt/D0) / min(Dt/D0)` over the perturbation grid.
    pub ratio_spread_max: f64,
    /// Largest allowed `Dt(V_min) / Dt(V_max)` in the continuity scenario.
    pub small_perturbation_ratio_max: f64,
    /// Drifts and null-case gaps must stay within this many standard errors.
    pub se_multiplier: f64,
    /// Relative agreement of `‖u_1(t)-u_2(t)‖/ε` across perturbation sizes.
    pub lipschitz_rel: f64,
    /// Slope threshold of the √p law.
    pub sqrt_p_slope_max: f64,
    /// Expected `ln C` of the lognormal family at `α = 1`, and its tolerance.
    pub lognormal_log_c: f64,
    pub lognormal_log_c_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            ratio_spread_max: 3.0,
            small_perturbation_ratio_max: 0.5,
            se_multiplier: 3.0,
            lipschitz_rel: 0.10,
            sqrt_p_slope_max: crate::random_fields::SQRT_P_SLOPE_MAX,
            lognormal_log_c: 0.5,
            lognormal_log_c_tol: 0.05,
        }
    }
}

/// Fully resolved inputs of one scenario run; echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub scenario: Scenario,
    pub s: f64,
    pub sigma: f64,
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
    pub t: f64,
    /// Growth: horizons calibrated jointly (empty means `[t]`).
    pub horizons: Vec<f64>,
    pub modes: usize,
    pub count: usize,
    /// Growth/difference: held-out samples checked after calibration.
    pub holdout: usize,
    pub seed: u64,
    /// Seed of the second measure; `None` draws it from the main seed
    /// (same-index coupling for continuity, independent stream for stability).
    pub reference_seed: Option<u64>,
    /// Stability: also push the reference ensemble through the flow.
    pub evolve_reference: bool,
    pub dt: f64,
    pub v_grid: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub null_replicates: usize,
    /// Moments: number of scalar draws for the lognormal families.
    pub scalar_count: usize,
    /// Invariance: repeat at `2·dt` and report the difference.
    pub dt_bias_check: bool,
    /// Fixed exponential-rate constant `c` of the difference bound.
    pub small_c: f64,
    pub grid: CalibrationGrid,
    pub tolerance: TolerancePolicy,
}

impl VerifyConfig {
    /// Desk-scale defaults for a scenario.
    pub fn for_scenario(scenario: Scenario) -> Self {
        let base = Self {
            scenario,
            s: 0.4,
            sigma: 0.6,
            p: 2.0,
            p1: 4.0,
            p2: 4.0,
            t: 1.0,
            horizons: Vec::new(),
            modes: 32,
            count: 64,
            holdout: 0,
            seed: 42,
            reference_seed: None,
            evolve_reference: false,
            dt: 1e-3,
            v_grid: Vec::new(),
            epsilons: Vec::new(),
            null_replicates: 0,
            scalar_count: 0,
            dt_bias_check: false,
            small_c: 1.0,
            grid: CalibrationGrid::default(),
            tolerance: TolerancePolicy::default(),
        };
        match scenario {
            Scenario::Growth => Self {
                t: 2.0,
                holdout: 64,
                ..base
            },
            Scenario::Difference => Self {
                holdout: 64,
                epsilons: vec![1e-2, 5e-3],
                ..base
            },
            Scenario::Continuity => Self {
                count: 512,
                v_grid: vec![0.05, 0.1, 0.2],
                ..base
            },
            Scenario::Stability => Self {
                count: 512,
                sigma: 0.55,
                v_grid: vec![0.05, 0.1, 0.2],
                null_replicates: 6,
                ..base
            },
            Scenario::Invariance => Self {
                count: 2000,
                t: 5.0,
                ..base
            },
            Scenario::Moments => Self {
                count: 2000,
                scalar_count: 100_000,
                ..base
            },
        }
    }

    pub fn horizons(&self) -> Vec<f64> {
        if self.horizons.is_empty() {
            vec![self.t]
        } else {
            self.horizons.clone()
        }
    }

    /// Checks exponent relations and the admissible ranges of each scenario.
    pub fn validate(&self) -> Result<()> {
        let open = |x: f64, lo: f64, hi: f64| x > lo && x < hi;
        if self.count == 0 {
            return Err(Error::Empty("sample count"));
        }
        if self.dt.is_nan() || self.dt <= 0.0 {
            return Err(Error::invalid("dt must be positive"));
        }
        match self.scenario {
            Scenario::Growth | Scenario::Difference => {
                crate::dynamics::BoundParams::new(self.s, self.sigma, 1.0, self.small_c)?;
            }
            Scenario::Continuity | Scenario::Stability => {
                if self.v_grid.is_empty() {
                    return Err(Error::Empty("perturbation grid"));
                }
                if !(self.p >= 1.0 && self.p1 >= 1.0 && self.p2 >= 1.0) {
                    return Err(Error::invalid("exponents must be >= 1"));
                }
                if ((1.0 / self.p) - (1.0 / self.p1 + 1.0 / self.p2)).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "exponents must satisfy 1/p = 1/p1 + 1/p2 (p={}, p1={}, p2={})",
                        self.p, self.p1, self.p2
                    )));
                }
                let (s_lo, sigma_hi) = if self.scenario == Scenario::Continuity {
                    (0.25, (2.0 * self.s).min(1.0))
                } else {
                    (1.0 / 3.0, (1.5 * self.s).min(1.0))
                };
                if !open(self.s, s_lo, 1.0) {
                    return Err(Error::invalid(format!("s = {} outside ({s_lo:.4}, 1)", self.s)));
                }
                let sigma_lo = self.s.max(0.5);
                if !open(self.sigma, sigma_lo, sigma_hi) {
                    return Err(Error::invalid(format!(
                        "sigma = {} outside ({sigma_lo}, {sigma_hi})",
                        self.sigma
                    )));
                }
            }
            Scenario::Invariance | Scenario::Moments => {}
        }
        Ok(())
    }
}
