//! Discrete Fourier analysis/synthesis and dealiased products.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::SpectralField;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(points: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(points), p.plan_fft_inverse(points))
    })
}

/// Smallest `2^a 3^b 5^c` that is `>= n`.
pub fn fft_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for f in [2, 3, 5] {
            while k.is_multiple_of(f) {
                k /= f;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

/// Writes the Hermitian spectrum of `coeffs` into `buf` (length P > 2M).
fn load_hermitian(coeffs: &[Complex64], buf: &mut [Complex64]) {
    let p = buf.len();
    buf.fill(ZERO);
    buf[0] = coeffs[0];
    for (n, c) in coeffs.iter().enumerate().skip(1) {
        buf[n] = *c;
        buf[p - n] = c.conj();
    }
}

/// Values `u(2πk/P)` for `k = 0..P`.
///
/// Requires `P >= 2M+1` so that the samples determine the field exactly.
pub fn grid_transform(field: &SpectralField, points: usize) -> Result<Vec<f64>> {
    let m = field.max_mode();
    if points < 2 * m + 1 {
        return Err(Error::GridTooSmall {
            points,
            max_mode: m,
            required: 2 * m + 1,
        });
    }
    let (_, inverse) = plans(points);
    let mut buf = vec![ZERO; points];
    load_hermitian(field.coeffs(), &mut buf);
    inverse.process(&mut buf);
    Ok(buf.into_iter().map(|z| z.re).collect())
}

/// Analysis of `P` equispaced samples into `floor((P-1)/2)` modes.
///
/// For even `P` the Nyquist mode `P/2` is not representable as a single
/// real mode and is dropped.
pub fn field_from_grid(samples: &[f64]) -> Result<SpectralField> {
    if samples.is_empty() {
        return Err(Error::Empty("grid samples"));
    }
    field_from_grid_modes(samples, (samples.len() - 1) / 2)
}

/// Analysis keeping modes `0..=max_mode`; requires `P >= 2·max_mode + 1`.
pub fn field_from_grid_modes(samples: &[f64], max_mode: usize) -> Result<SpectralField> {
    let points = samples.len();
    if points < 2 * max_mode + 1 {
        return Err(Error::GridTooSmall {
            points,
            max_mode,
            required: 2 * max_mode + 1,
        });
    }
    let (forward, _) = plans(points);
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward.process(&mut buf);
    let scale = 1.0 / points as f64;
    let coeffs = buf[..=max_mode].iter().map(|z| z * scale).collect();
    Ok(SpectralField::from_real_mean(coeffs))
}

/// Coefficients `0..=out_modes` of `u²`, free of aliasing.
///
/// The product is formed on a zero-padded grid of at least
/// `2M + out_modes + 1` points, which keeps every retained mode exact.
pub fn pointwise_square(field: &SpectralField, out_modes: usize) -> SpectralField {
    let mut kernel = SquareKernel::new(field.max_mode(), out_modes);
    let mut out = vec![ZERO; out_modes + 1];
    kernel.square_into(field.coeffs(), &mut out);
    SpectralField::from_real_mean(out)
}

/// Reusable buffers and plans for repeated dealiased squaring of fields with
/// a fixed number of input and output modes.
pub struct SquareKernel {
    in_modes: usize,
    out_modes: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SquareKernel {
    pub fn new(in_modes: usize, out_modes: usize) -> Self {
        let points = fft_size(2 * in_modes + out_modes + 1);
        let (forward, inverse) = plans(points);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            in_modes,
            out_modes,
            forward,
            inverse,
            buf: vec![ZERO; points],
            scratch: vec![ZERO; scratch_len],
        }
    }

    pub fn points(&self) -> usize {
        self.buf.len()
    }

    /// `input` holds `c_0..=c_{in_modes}`, `out` receives `(u²)_0..=(u²)_{out_modes}`.
    pub fn square_into(&mut self, input: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(input.len(), self.in_modes + 1);
        debug_assert_eq!(out.len(), self.out_modes + 1);
        load_hermitian(input, &mut self.buf);
        self.inverse
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        for z in self.buf.iter_mut() {
            *z = Complex64::new(z.re * z.re, 0.0);
        }
        self.forward
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / self.buf.len() as f64;
        for (o, z) in out.iter_mut().zip(&self.buf) {
            *o = z * scale;
        }
        out[0].im = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::test_support::random_field;
    use std::f64::consts::PI;

    fn dft_synthesis(field: &SpectralField, points: usize) -> Vec<f64> {
        let m = field.max_mode() as i64;
        (0..points)
            .map(|k| {
                let x = 2.0 * PI * k as f64 / points as f64;
                (-m..=m)
                    .map(|n| (field.coeff(n) * Complex64::from_polar(1.0, n as f64 * x)).re)
                    .sum()
            })
            .collect()
    }

    fn convolution_square(field: &SpectralField, n: i64) -> Complex64 {
        let m = field.max_mode() as i64;
        (-m..=m).map(|k| field.coeff(k) * field.coeff(n - k)).sum()
    }

    #[test]
    fn fft_sizes_are_smooth() {
        assert_eq!(fft_size(97), 100);
        assert_eq!(fft_size(129), 135);
        assert_eq!(fft_size(7), 8);
        assert_eq!(fft_size(1), 1);
    }

    #[test]
    fn cosine_synthesis() {
        let f = SpectralField::trig(1, 1, 1.0, 0.0).unwrap();
        let got = grid_transform(&f, 8).unwrap();
        for (k, v) in got.iter().enumerate() {
            let want = (2.0 * PI * k as f64 / 8.0).cos();
            assert!((v - want).abs() < 1e-15, "k={k}: {v} vs {want}");
        }
        let zero = grid_transform(&SpectralField::zeros(4), 9).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn undersized_grid_rejected() {
        let f = SpectralField::zeros(4);
        assert!(matches!(
            grid_transform(&f, 8),
            Err(Error::GridTooSmall { required: 9, .. })
        ));
    }

    #[test]
    fn synthesis_matches_direct_dft_and_round_trips() {
        for (m, p) in [(5usize, 11usize), (16, 40), (20, 41)] {
            let f = random_field(m, 7 + m as u64);
            let fast = grid_transform(&f, p).unwrap();
            let slow = dft_synthesis(&f, p);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12);
            }
            let back = field_from_grid_modes(&fast, m).unwrap();
            for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn even_grid_drops_nyquist() {
        let samples: Vec<f64> = (0..8).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let f = field_from_grid(&samples).unwrap();
        assert_eq!(f.max_mode(), 3);
        assert!(f.coeffs().iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn square_of_cosine() {
        let u = SpectralField::trig(1, 1, 1.0, 0.0).unwrap();
        let sq = pointwise_square(&u, 2);
        assert!((sq.coeffs()[0].re - 0.5).abs() < 1e-15);
        assert!(sq.coeffs()[1].norm() < 1e-15);
        assert!((sq.coeffs()[2] - Complex64::new(0.25, 0.0)).norm() < 1e-15);

        let u2 = SpectralField::trig(2, 2, 1.0, 0.0).unwrap();
        let sq2 = pointwise_square(&u2, 2);
        assert!((sq2.coeffs()[0].re - 0.5).abs() < 1e-15);
        assert!(sq2.coeffs()[1].norm() < 1e-15 && sq2.coeffs()[2].norm() < 1e-15);
    }

    #[test]
    fn square_matches_convolution() {
        let f = random_field(16, 99);
        for k in [8usize, 16, 32] {
            let sq = pointwise_square(&f, k);
            assert_eq!(sq.max_mode(), k);
            for n in 0..=k {
                let want = convolution_square(&f, n as i64);
                assert!((sq.coeffs()[n] - want).norm() < 1e-12, "n={n}");
            }
        }
    }
}
