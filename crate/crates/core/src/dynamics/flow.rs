use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{sobolev_norm_sq, SobolevIndex, SpectralField, SquareKernel};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sign applied to the requested evolution time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// Integration settings for the Galerkin-truncated flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveParams {
    pub dt: f64,
    /// Dynamics act on modes `|n| ≤ truncation`; higher modes are left untouched.
    pub truncation: usize,
    /// Drop `u²/2` from the flux.
    #[serde(default)]
    pub linear_only: bool,
    #[serde(default)]
    pub direction: Direction,
}

impl EvolveParams {
    pub const DEFAULT_DT: f64 = 1e-3;

    pub fn new(dt: f64, truncation: usize) -> Self {
        Self {
            dt,
            truncation,
            linear_only: false,
            direction: Direction::Forward,
        }
    }

    pub fn linear(mut self) -> Self {
        self.linear_only = true;
        self
    }

    pub fn backward(mut self) -> Self {
        self.direction = Direction::Backward;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    fn validate(&self, max_mode: usize) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.truncation > max_mode {
            return Err(Error::TruncationTooLarge {
                truncation: self.truncation,
                max_mode,
            });
        }
        Ok(())
    }
}

/// Right-hand side `F` of `∂_t u = F(u)` restricted to modes `0..=N`:
/// `F_n = -i n/(1+n²) · (c_n + (Π_N u)²_n / 2)`.
struct GalerkinRhs {
    symbol: Vec<Complex64>,
    square: Option<(SquareKernel, Vec<Complex64>)>,
}

impl GalerkinRhs {
    fn new(truncation: usize, linear_only: bool) -> Self {
        let symbol = (0..=truncation)
            .map(|n| {
                let nf = n as f64;
                Complex64::new(0.0, -nf / (1.0 + nf * nf))
            })
            .collect();
        let square = (!linear_only).then(|| {
            (
                SquareKernel::new(truncation, truncation),
                vec![ZERO; truncation + 1],
            )
        });
        Self { symbol, square }
    }

    fn eval(&mut self, u: &[Complex64], out: &mut [Complex64]) {
        match &mut self.square {
            Some((kernel, sq)) => {
                kernel.square_into(u, sq);
                for n in 0..u.len() {
                    out[n] = self.symbol[n] * (u[n] + 0.5 * sq[n]);
                }
            }
            None => {
                for n in 0..u.len() {
                    out[n] = self.symbol[n] * u[n];
                }
            }
        }
        // ∂_x annihilates the mean exactly.
        out[0] = ZERO;
    }
}

/// `F(u)`: the time derivative of the truncated BBM flow at `u`.
///
/// Returned with the same `max_mode` as `u`; modes above the truncation are zero.
pub fn bbm_rhs(u: &SpectralField, params: &EvolveParams) -> Result<SpectralField> {
    params.validate(u.max_mode())?;
    let n = params.truncation;
    let mut rhs = GalerkinRhs::new(n, params.linear_only);
    let mut out = vec![ZERO; u.max_mode() + 1];
    rhs.eval(&u.coeffs()[..=n], &mut out[..=n]);
    SpectralField::new(out)
}

/// Classical RK4 stepper over the low-mode block of the state.
struct Rk4 {
    rhs: GalerkinRhs,
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    fn new(params: &EvolveParams) -> Self {
        let len = params.truncation + 1;
        Self {
            rhs: GalerkinRhs::new(params.truncation, params.linear_only),
            k1: vec![ZERO; len],
            k2: vec![ZERO; len],
            k3: vec![ZERO; len],
            k4: vec![ZERO; len],
            tmp: vec![ZERO; len],
        }
    }

    fn step(&mut self, y: &mut [Complex64], h: f64) {
        let Self {
            rhs,
            k1,
            k2,
            k3,
            k4,
            tmp,
        } = self;
        rhs.eval(y, k1);
        for i in 0..y.len() {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        rhs.eval(tmp, k2);
        for i in 0..y.len() {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        rhs.eval(tmp, k3);
        for i in 0..y.len() {
            tmp[i] = y[i] + k3[i] * h;
        }
        rhs.eval(tmp, k4);
        let w = h / 6.0;
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }
}

/// Step sizes covering `|t|` with steps of `dt` and a final partial step.
fn step_schedule(t: f64, dt: f64) -> (usize, f64) {
    let span = t.abs();
    let ratio = span / dt;
    let mut full = ratio.floor();
    // Treat a remainder within rounding of dt as an exact multiple.
    if ratio - full > 1.0 - 1e-9 {
        full += 1.0;
    }
    let rem = span - full * dt;
    let rem = if rem.abs() <= 1e-12 * span.max(dt) { 0.0 } else { rem };
    (full as usize, rem.max(0.0))
}

/// Terminal state plus `L²` norms sampled at every step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub terminal: SpectralField,
    /// `(τ, ‖u(τ)‖_{L²})`, starting with `τ = 0`.
    pub l2_norms: Vec<(f64, f64)>,
}

impl Trajectory {
    /// `sup ‖u(τ)‖_{L²}` over the samples with `|τ| ≤ horizon`.
    pub fn sup_l2(&self, horizon: f64) -> f64 {
        self.l2_norms
            .iter()
            .take_while(|(tau, _)| tau.abs() <= horizon * (1.0 + 1e-12))
            .map(|&(_, v)| v)
            .fold(0.0, f64::max)
    }

    /// `∫_0^{|t|} ‖u(τ)‖_{L²} dτ` by the trapezoid rule on the step samples.
    pub fn path_integral(&self) -> f64 {
        self.l2_norms
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0).abs() * (w[0].1 + w[1].1))
            .sum()
    }
}

fn integrate(
    u0: &SpectralField,
    t: f64,
    params: &EvolveParams,
    mut observe: impl FnMut(f64, &[Complex64], &[Complex64]),
) -> Result<SpectralField> {
    params.validate(u0.max_mode())?;
    let n = params.truncation;
    let signed = t * params.direction.sign();
    if signed == 0.0 {
        observe(0.0, u0.coeffs(), &[]);
        return Ok(u0.clone());
    }
    let sign = signed.signum();
    let (full, rem) = step_schedule(signed, params.dt);
    let mut state = u0.coeffs()[..=n].to_vec();
    let frozen = &u0.coeffs()[n + 1..];
    let mut stepper = Rk4::new(params);

    observe(0.0, &state, frozen);
    let mut tau = 0.0;
    let steps = (0..full).map(|_| params.dt).chain((rem > 0.0).then_some(rem));
    for (k, h) in steps.enumerate() {
        stepper.step(&mut state, sign * h);
        tau = if k < full {
            sign * (k + 1) as f64 * params.dt
        } else {
            signed
        };
        if !state.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::BlowUp { time: tau });
        }
        observe(tau, &state, frozen);
    }
    debug_assert!((tau - signed).abs() <= 1e-9 * signed.abs().max(1.0));
    state.extend_from_slice(frozen);
    Ok(SpectralField::from_real_mean(state))
}

/// Approximates `ψ(t) u0` for the Galerkin-truncated system with RK4.
///
/// Negative `t` integrates backwards. Fails with [`Error::BlowUp`] when the
/// discretisation produces non-finite values.
pub fn evolve(u0: &SpectralField, t: f64, params: &EvolveParams) -> Result<SpectralField> {
    integrate(u0, t, params, |_, _, _| {})
}

/// [`evolve`] that also records the `L²` norm after every step.
pub fn evolve_trajectory(
    u0: &SpectralField,
    t: f64,
    params: &EvolveParams,
) -> Result<Trajectory> {
    let weights = crate::spectral::sobolev_weights(u0.max_mode(), SobolevIndex::L2);
    let (lo, hi) = weights.split_at(params.truncation.min(u0.max_mode()) + 1);
    let mut l2_norms = Vec::new();
    let terminal = integrate(u0, t, params, |tau, low, frozen| {
        let sq = crate::spectral::weighted_norm_sq(low, lo)
            + crate::spectral::weighted_norm_sq(frozen, hi);
        l2_norms.push((tau, sq.sqrt()));
    })?;
    Ok(Trajectory { terminal, l2_norms })
}

/// Quantities conserved by the exact and the truncated flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    /// Average value `c_0`.
    pub mean: f64,
    /// `‖u‖²_{H^1}`.
    pub h1_energy: f64,
}

pub fn conserved_quantities(u: &SpectralField) -> Conserved {
    Conserved {
        mean: u.mean(),
        h1_energy: sobolev_norm_sq(u, SobolevIndex::H1),
    }
}
