//! Measures on `H^s(T)`: Gaussian samplers, ensembles, pushforward and
//! moment-growth estimators.

mod moments;
mod sampling;

pub use moments::{
    default_p_grid, default_q_grid, empirical_moment, gaussian_tail_violations,
    log_deviation_fit, log_deviation_fit_with, norms, power_mean, subgaussian_fit,
    subgaussian_fit_values, MomentLaw, MomentReport, HALF_SAMPLE_TOL, LOG_DEVIATION_R2_MIN,
    SQRT_P_SLOPE_MAX,
};
pub use sampling::{pushforward, sample_gaussian, substream_seed};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Per-mode multiplier `V(n)` of a perturbed covariance `L(1+V)L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Multiplier {
    Constant(f64),
    /// `V(0), V(1), …, V(modes)`.
    Table(Vec<f64>),
}

impl Multiplier {
    pub fn at(&self, n: usize) -> f64 {
        match self {
            Multiplier::Constant(v) => *v,
            Multiplier::Table(t) => t[n],
        }
    }

    fn validate(&self, modes: usize) -> Result<()> {
        if let Multiplier::Table(t) = self {
            if t.len() != modes + 1 {
                return Err(Error::invalid(format!(
                    "multiplier table has {} entries, expected {}",
                    t.len(),
                    modes + 1
                )));
            }
        }
        for n in 0..=modes {
            let v = self.at(n);
            if !(v > -1.0 && v.is_finite()) {
                return Err(Error::InvalidPerturbation { mode: n, value: v });
            }
        }
        Ok(())
    }
}

/// Declarative description of a probability measure on `H^s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    /// Gaussian with covariance `(1-∂_x²)^{-1}` on modes `|n| ≤ modes`.
    GaussianL2 { modes: usize },
    /// Gaussian with covariance `L(1+V)L`, `L = (1-∂_x²)^{-1/2}`.
    GaussianPerturbed { modes: usize, v: Multiplier },
    /// A stored sample set with no generating law.
    Empirical { modes: usize, source: String },
}

impl MeasureSpec {
    pub fn gaussian(modes: usize) -> Self {
        MeasureSpec::GaussianL2 { modes }
    }

    pub fn perturbed(modes: usize, v: f64) -> Self {
        MeasureSpec::GaussianPerturbed {
            modes,
            v: Multiplier::Constant(v),
        }
    }

    pub fn modes(&self) -> usize {
        match self {
            MeasureSpec::GaussianL2 { modes }
            | MeasureSpec::GaussianPerturbed { modes, .. }
            | MeasureSpec::Empirical { modes, .. } => *modes,
        }
    }

    /// Multiplier `1 + V(n)` on the covariance of mode `n`; 1 for the base law.
    pub fn variance_factor(&self, n: usize) -> f64 {
        match self {
            MeasureSpec::GaussianPerturbed { v, .. } => 1.0 + v.at(n),
            _ => 1.0,
        }
    }

    /// `E|c_n|²` under a Gaussian spec.
    pub fn mode_variance(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.variance_factor(n) / (1.0 + nf * nf)
    }

    pub fn validate(&self) -> Result<()> {
        if let MeasureSpec::GaussianPerturbed { modes, v } = self {
            v.validate(*modes)?;
        }
        Ok(())
    }

    pub fn is_gaussian(&self) -> bool {
        !matches!(self, MeasureSpec::Empirical { .. })
    }
}

/// A finite sample set standing in for a measure, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    spec: MeasureSpec,
    seed: u64,
    time: f64,
    samples: Vec<SpectralField>,
}

impl Ensemble {
    pub fn new(spec: MeasureSpec, seed: u64, time: f64, samples: Vec<SpectralField>) -> Result<Self> {
        let first = samples.first().ok_or(Error::Empty("ensemble"))?;
        let m = first.max_mode();
        if let Some(bad) = samples.iter().find(|s| s.max_mode() != m) {
            return Err(Error::ModeMismatch(m, bad.max_mode()));
        }
        Ok(Self {
            spec,
            seed,
            time,
            samples,
        })
    }

    /// Wraps arbitrary samples as an empirical measure.
    pub fn empirical(source: impl Into<String>, samples: Vec<SpectralField>) -> Result<Self> {
        let modes = samples.first().map_or(0, |s| s.max_mode());
        Self::new(
            MeasureSpec::Empirical {
                modes,
                source: source.into(),
            },
            0,
            0.0,
            samples,
        )
    }

    pub fn spec(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn samples(&self) -> &[SpectralField] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<SpectralField> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_mode(&self) -> usize {
        self.samples[0].max_mode()
    }

    /// Checks that two ensembles can be compared sample-by-sample.
    pub fn check_compatible(&self, other: &Ensemble) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch(self.len(), other.len()));
        }
        if self.max_mode() != other.max_mode() {
            return Err(Error::ModeMismatch(self.max_mode(), other.max_mode()));
        }
        Ok(())
    }
}
