//! ε-outage-capacity bounds for randomized frequency-hopping (FH) spectrum
//! sharing among a random number of Rayleigh-faded users.
//!
//! A random number `N` of transmitter–receiver pairs (pmf `q_n`, bounded
//! support) shares `u` sub-bands. Each transmitter hops over a freshly drawn
//! set of `v` sub-bands per transmission, so the noise-plus-interference seen
//! by a reference receiver — conditioned on the crossover fading gains — is a
//! finite *mixed Gaussian*: one component per subset of simultaneously
//! colliding interferers.
//!
//! The crate provides:
//!
//! * [`model`] — system parameters, user-count distribution, Rayleigh
//!   channel sampling with reproducible, splittable RNG streams;
//! * [`mixture`] — the interference mixture for a channel realization and a
//!   differential-entropy upper bound for complex mixed-Gaussian vectors,
//!   with a Monte Carlo entropy oracle;
//! * [`ratebounds`] — per-realization achievable-rate lower bounds for FH,
//!   full-band spreading (FBS), and a Gaussian-noise baseline;
//! * [`kernels`] — the special functions (`alpha`, `psi`, `phi`) and
//!   asymptotic helper factors the outage solvers are built from;
//! * [`capacity`] — semi-analytic ε-outage-capacity solvers (three FH
//!   bounds, exact FD and FBS baselines), optimal-`v` search, small-ε /
//!   small-γ / high-SNR approximations and design predicates;
//! * [`mcsim`] — an independent Monte Carlo oracle estimating empirical
//!   outage probabilities and empirical ε-outage capacities by direct
//!   channel simulation (shares no integration code with the solvers).
//!
//! Rates are bits per transmission: every capacity logarithm is base 2,
//! while probability exponentials use natural log. The SNR γ is linear
//! throughout this crate; convert from dB once at the boundary
//! (γ = 10^(dB/10), see [`model::NetworkConfig::from_db`]).

pub mod capacity;
pub mod kernels;
pub mod mcsim;
pub mod mixture;
pub mod model;
mod numeric;
pub mod ratebounds;

use std::fmt;

/// Errors shared by all modules of this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violates the documented domain of an operation.
    InvalidParameter {
        /// Name of the offending argument or invariant.
        what: &'static str,
        /// Human-readable explanation.
        why: String,
    },
    /// An operation needing the full interference mixture was asked for more
    /// interferers than the subset-enumeration cap allows (2^n levels).
    MixtureCapExceeded {
        /// Number of interferers requested.
        interferers: usize,
        /// Enumeration cap.
        cap: usize,
    },
    /// A bracketing or bisection loop exceeded its iteration budget.
    NonConvergence {
        /// Iterations spent before giving up.
        iterations: u32,
    },
    /// Too few Monte Carlo samples to resolve the requested ε-quantile.
    Undersampled {
        /// Effective sample count after auto-scaling.
        samples: u64,
        /// Requested outage level.
        epsilon: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { what, why } => {
                write!(f, "invalid parameter `{what}`: {why}")
            }
            Error::MixtureCapExceeded { interferers, cap } => write!(
                f,
                "mixture enumeration over {interferers} interferers exceeds the cap of {cap} \
                 (2^{interferers} levels); use the sum-of-gains bounds instead"
            ),
            Error::NonConvergence { iterations } => {
                write!(f, "solver failed to converge after {iterations} iterations")
            }
            Error::Undersampled { samples, epsilon } => write!(
                f,
                "{samples} samples cannot resolve an ε-quantile at ε = {epsilon} \
                 (need ε·samples ≥ 100)"
            ),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::InvalidParameter {
            what,
            why: why.into(),
        }
    }
}
