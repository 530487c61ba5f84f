//! Numerical laboratory for geometric Lorenz flows.
//!
//! The crate implements the full chain that connects the Lorenz equations to
//! their one-dimensional reduction and back:
//!
//! * [`flow`] — the 3D vector field, an adaptive embedded Runge-Kutta
//!   integrator with dense output, the origin's eigenstructure, and
//!   Poincaré section events at successive z-maxima;
//! * [`passage`] — the closed-form passage map through the linearised
//!   neighbourhood of the origin and its logarithmic time of flight;
//! * [`map`] / [`leo`] — a parametric family of expanding interval maps with
//!   a singular point, expansion-condition checks, and a covering
//!   (locally-eventually-onto) test by exhaustive interval iteration;
//! * [`induce`] — a full-branch inducing scheme on an interval around the
//!   singularity with Gibbs-Markov condition checks;
//! * [`measure`] — the absolutely continuous invariant measure via Ulam
//!   discretisation of the transfer operator, cross-validated by Birkhoff
//!   averaging;
//! * [`roof`] / [`suspension`] — the suspension semiflow under a roof with a
//!   logarithmic singularity;
//! * [`mixing`] — correlation decay, a twisted-transfer-operator residual for
//!   the eigenfunction (cohomology) equation, the alternating-phase
//!   obstruction sequence, and power spectra;
//! * [`cone`] — variational (tangent) dynamics of the section return map of
//!   the actual flow, with invariant-cone and expansion reports;
//! * [`extract`] — empirical return maps and roof functions recovered from
//!   flow data.
//!
//! Everything is deterministic given seeds and tolerances; ensemble
//! computations parallelise with fixed-order reductions so results do not
//! depend on thread count.

pub mod cone;
pub mod config;
pub mod error;
pub mod extract;
pub mod flow;
pub mod induce;
pub mod interp;
pub mod leo;
pub mod manifest;
pub mod map;
pub mod measure;
pub mod mixing;
pub mod passage;
pub mod roof;
pub mod suspension;

pub use error::{Error, Result};

/// SplitMix64 step, used to derive independent per-task RNG seeds from a
/// master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
