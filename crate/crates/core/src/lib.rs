//! Numerical core for Follow-the-Perturbed-Leader (FTPL) bandit policies.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. It provides
//!
//! * [`distributions`]: perturbation laws with exact CDF, density, density
//!   derivative and quantile, hybrid two-sided composition, truncation and an
//!   assumption checker for Fréchet-type tails;
//! * [`selection`]: arm-selection probabilities `phi_i(lambda)` and their
//!   own-coordinate derivatives by adaptive quadrature, with a Monte Carlo
//!   oracle and stability-ratio scans;
//! * [`policies`]: FTPL with geometric resampling and FTRL with Tsallis or
//!   Shannon regularizers behind one policy interface;
//! * [`environments`]: stochastic and adversarial loss generators and regret
//!   accounting;
//! * [`duality`]: the potential function, its Legendre conjugate, two-arm
//!   quantiles, the Tsallis difference law and characteristic functions;
//! * [`envelope`]: closed-form regret envelopes and regression helpers.
//!
//! Randomness always comes from a caller-owned [`rand::Rng`]; see [`rng`] for
//! the seeding contract used by the experiment harness.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod distributions;
pub mod duality;
pub mod envelope;
pub mod environments;
pub mod linalg;
pub mod math;
pub mod policies;
pub mod quadrature;
pub mod rng;
pub mod roots;
pub mod selection;

pub use distributions::{Derivative, Kind, PerturbationDistribution};
pub use environments::LossModel;
pub use policies::{BanditPolicy, PolicyState, Regularizer};
pub use selection::SelectionProbe;
