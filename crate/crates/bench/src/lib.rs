//! Fixed inputs shared by the benchmarks.

use bbmflow_core::random_fields::{sample_gaussian, MeasureSpec};
use bbmflow_core::{Ensemble, SpectralField};

pub const SEED: u64 = 0xB3B3;

pub fn gaussian_ensemble(modes: usize, count: usize, seed: u64) -> Ensemble {
    sample_gaussian(&MeasureSpec::gaussian(modes), seed, count).expect("valid spec")
}

pub fn gaussian_field(modes: usize) -> SpectralField {
    gaussian_ensemble(modes, 1, SEED).into_samples().remove(0)
}

/// Two independent ensembles of the same shape.
pub fn ensemble_pair(modes: usize, count: usize) -> (Ensemble, Ensemble) {
    (
        gaussian_ensemble(modes, count, SEED),
        gaussian_ensemble(modes, count, SEED + 1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic_and_independent() {
        let (a, b) = ensemble_pair(8, 4);
        assert_eq!(a, gaussian_ensemble(8, 4, SEED));
        assert_ne!(a.samples()[0], b.samples()[0]);
        assert_eq!(gaussian_field(8), a.samples()[0]);
    }
}
