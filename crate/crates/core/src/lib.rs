//! Large deviations of random one-dimensional projections of the uniform
//! distribution on the cube.
//!
//! For a uniform direction `Θ` on the sphere in `R^n`, the law of
//! `⟨X, Θ⟩` with `X` uniform on `[-1,1]^n` (or `{-1,+1}^n`) is close to a
//! Gaussian for typical `Θ`. Atypical directions produce the limit laws
//! `ν(α)` of [`limitlaw`], at exponential cost `exp(-n I(α))` with
//! `I(α) = -½ log(1 - ‖α‖₂²)` ([`ldp::rate_function`]).
//!
//! * [`domain`]: spike sequences, windows, directions, sample batches.
//! * [`sphere`]: sphere sampling, exact marginal densities and tails,
//!   projections of the cube.
//! * [`limitlaw`]: characteristic functions, Fourier inversion, sampling,
//!   and recovery of `α` from the characteristic function.
//! * [`ldp`]: rate functions, window bounds and Monte Carlo estimators.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod ldp;
pub mod limitlaw;
pub mod numeric;
pub mod quad;
pub mod rng;
pub mod sphere;

pub use domain::{
    make_alpha, window_contains, AlphaSequence, Direction, ModelKind, OrderStatVector, SampleSet, WindowSpec,
};
pub use error::{Error, Result};
pub use ldp::{
    bonferroni_tail_bounds, empirical_rate_curve, estimate_window_probability, estimate_window_probability_conditional,
    rate_function, window_rate_bounds, Estimator, LdpEstimate, RateBounds, TailBounds,
};
pub use limitlaw::{ks_distance, recover_alpha, LimitLaw, Recovery, Termination};
pub use rng::RngSpec;
pub use sphere::{
    integrate_density_over_window, marginal_density, marginal_tail, order_statistics, sample_projection, sample_sphere,
    Region,
};
