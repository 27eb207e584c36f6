use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{Ensemble, MeasureSpec};
use crate::dynamics::{evolve, EvolveParams};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the RNG stream owned by sample `index`.
///
/// Depends only on `(seed, index)`, so ensembles are identical regardless of
/// how the work is split across threads.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

fn draw(spec: &MeasureSpec, rng: &mut impl Rng) -> SpectralField {
    let modes = spec.modes();
    let mut coeffs = Vec::with_capacity(modes + 1);
    let g0: f64 = rng.sample(StandardNormal);
    coeffs.push(Complex64::new(g0 * spec.variance_factor(0).sqrt(), 0.0));
    for n in 1..=modes {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let scale = (spec.mode_variance(n) / 2.0).sqrt();
        coeffs.push(Complex64::new(a * scale, b * scale));
    }
    SpectralField::new(coeffs).expect("mode 0 is real")
}

/// Draws `count` independent samples of a Gaussian spec.
///
/// `c_0 = g_0 √(1+V(0))` and `c_n = (a_n + i b_n) √((1+V(n)) / (2(1+n²)))` for
/// `1 ≤ n ≤ modes`, with `g_0, a_n, b_n` standard normals from the sample's
/// own substream.
pub fn sample_gaussian(spec: &MeasureSpec, seed: u64, count: usize) -> Result<Ensemble> {
    if !spec.is_gaussian() {
        return Err(Error::invalid("cannot sample an empirical measure spec"));
    }
    if count == 0 {
        return Err(Error::Empty("sample count"));
    }
    spec.validate()?;
    let samples = (0..count as u64)
        .into_par_iter()
        .map(|i| draw(spec, &mut ChaCha8Rng::seed_from_u64(substream_seed(seed, i))))
        .collect();
    Ensemble::new(spec.clone(), seed, 0.0, samples)
}

/// Sample-wise image of an ensemble under the flow; index order is kept so
/// index couplings between ensembles are carried along.
pub fn pushforward(e: &Ensemble, t: f64, params: &EvolveParams) -> Result<Ensemble> {
    let samples = e
        .samples()
        .par_iter()
        .enumerate()
        .map(|(i, u)| evolve(u, t, params).map_err(|err| err.at_sample(i)))
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(
        e.spec().clone(),
        e.seed(),
        e.time() + t * params.direction.sign(),
        samples,
    )
}
