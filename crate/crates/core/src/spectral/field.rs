use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real 2π-periodic function `u(x) = Σ_{|n|≤M} c_n e^{inx}`.
///
/// Only `c_0..=c_M` are stored; `c_{-n} = conj(c_n)` is implied, so every
/// field is real by construction. `c_0` always has an exactly zero imaginary
/// part.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    /// Builds a field from `c_0..=c_M`. Rejects a complex mean.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        match coeffs.first() {
            None => Err(Error::EmptyField),
            Some(c0) if c0.im != 0.0 => Err(Error::ComplexMean(c0.im)),
            Some(_) => Ok(Self { coeffs }),
        }
    }

    /// Builds a field, discarding whatever imaginary part mode 0 carries.
    /// Used for results of floating-point transforms.
    pub(crate) fn from_real_mean(mut coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "field needs mode 0");
        coeffs[0].im = 0.0;
        Self { coeffs }
    }

    pub fn zeros(max_mode: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); max_mode + 1],
        }
    }

    /// The constant function `value`.
    pub fn constant(max_mode: usize, value: f64) -> Self {
        let mut f = Self::zeros(max_mode);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Field with the listed `(n, c_n)` entries set, `n ≥ 0`.
    pub fn from_modes(max_mode: usize, modes: &[(usize, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); max_mode + 1];
        for &(n, c) in modes {
            if n > max_mode {
                return Err(Error::invalid(format!(
                    "mode {n} exceeds max_mode {max_mode}"
                )));
            }
            coeffs[n] = c;
        }
        Self::new(coeffs)
    }

    /// `a cos(nx) + b sin(nx)` for `n ≥ 1`.
    pub fn trig(max_mode: usize, n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Ok(Self::constant(max_mode, a));
        }
        Self::from_modes(max_mode, &[(n, Complex64::new(a / 2.0, -b / 2.0))])
    }

    pub fn max_mode(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// `c_n` for any integer `n`, zero beyond `max_mode`.
    pub fn coeff(&self, n: i64) -> Complex64 {
        let k = n.unsigned_abs() as usize;
        match self.coeffs.get(k) {
            None => Complex64::new(0.0, 0.0),
            Some(c) if n < 0 => c.conj(),
            Some(c) => *c,
        }
    }

    /// Mean value of the function over the period.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Same function with `max_mode` changed: padded with zeros or truncated.
    pub fn resized(&self, max_mode: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(max_mode + 1, Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Self) -> Result<Self> {
        if self.max_mode() != other.max_mode() {
            return Err(Error::ModeMismatch(self.max_mode(), other.max_mode()));
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * alpha)
                .collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Bitwise equality of `max_mode` and every coefficient.
impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs.len() == other.coeffs.len()
            && self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| {
                a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()
            })
    }
}

impl Eq for SpectralField {}

impl TryFrom<Vec<Complex64>> for SpectralField {
    type Error = Error;

    fn try_from(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(coeffs)
    }
}

impl From<SpectralField> for Vec<Complex64> {
    fn from(f: SpectralField) -> Self {
        f.coeffs
    }
}

// Arithmetic on references panics on mismatched max_mode, like slice zips
// would silently truncate otherwise. Use `axpy` for a checked variant.
impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: Self) -> SpectralField {
        self.axpy(1.0, rhs).expect("max_mode mismatch in field addition")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: Self) -> SpectralField {
        self.axpy(-1.0, rhs)
            .expect("max_mode mismatch in field subtraction")
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}

/// Regularity exponent `s` of the Sobolev space `H^s(T)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub const L2: SobolevIndex = SobolevIndex(0.0);
    pub const H1: SobolevIndex = SobolevIndex(1.0);

    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() {
            Ok(Self(s))
        } else {
            Err(Error::InvalidSobolevIndex(s))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SobolevIndex {
    type Error = Error;

    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<SobolevIndex> for f64 {
    fn from(s: SobolevIndex) -> f64 {
        s.0
    }
}
