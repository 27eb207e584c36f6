//! Benjamin–Bona–Mahony flow on the torus acting on probability measures.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: real periodic fields as Hermitian Fourier coefficients,
//!   Sobolev norms, projections and exactly dealiased squares.
//! - [`dynamics`]: the Galerkin-truncated BBM flow integrated with RK4, its
//!   conserved quantities, and evaluable growth/difference bounds.
//! - [`random_fields`]: Gaussian measures with covariance `(1-∂_x²)^{-1}` and
//!   their multiplier perturbations, ensemble pushforward, moment estimators.
//! - [`transport`]: Wasserstein distances with Sobolev ground costs between
//!   equal-size empirical ensembles.
//! - [`verification`]: end-to-end scenario runners producing [`VerifyReport`]s.

pub mod dynamics;
pub mod error;
pub mod random_fields;
pub mod spectral;
pub mod transport;
pub mod verification;

pub use dynamics::{evolve, BoundParams, EvolveParams};
pub use error::{Error, Result};
pub use random_fields::{Ensemble, MeasureSpec, MomentReport};
pub use spectral::{SobolevIndex, SpectralField};
pub use transport::{Coupling, CostMatrix, DistanceReport};
pub use verification::{Scenario, VerifyConfig, VerifyReport};
