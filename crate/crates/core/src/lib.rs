//! Minimum expected distortion of a Gaussian source over a two-hop
//! block-fading channel with layered (broadcast) coding on both hops.
//!
//! The decode-and-forward pipeline runs in three stages:
//!
//! 1. [`relay`] solves the relay's layering for every relay input
//!    distortion `D_r`, tabulating the conditional destination distortion
//!    `G(D_r)` and its derivative.
//! 2. The derivative is fitted by a two-parameter family, which gives the
//!    source's layering in closed form ([`source`]).
//! 3. The end-to-end expectation is evaluated against the tabulated `G`.
//!
//! [`af`] and [`single_layer`] provide the amplify-and-forward and
//! single-rate baselines. The numerical kernel in [`numerics`] is generic
//! over the floating-point type; the solvers work in [`Real`].

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod af;
pub mod distributions;
pub mod error;
pub mod format;
pub mod numerics;
pub mod relay;
pub mod scalar;
pub mod single_hop;
pub mod single_layer;
pub mod source;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar type used by the solvers.
pub type Real = f64;
/// Evaluable function of one real argument at solver precision.
pub type Map = numerics::EvaluableMap<Real>;
/// Monotone cubic table at solver precision.
pub type Table = numerics::MonotoneCubic<Real>;

pub use af::{af_equivalent_cdf, af_equivalent_pdf, af_expected_distortion, AfSolution, EquivalentChannel};
pub use distributions::{FadingDistribution, GrowthRegion};
pub use relay::{
    build_g_profile, fit_g_parametric, g_derivative, g_of_dr, solve_relay_interval, GProfile, ParametricFit,
    ProfileGrid, RelayInterval,
};
pub use single_hop::{auxiliary_value, power_of, solve_single_hop, AllocationSolution};
pub use single_layer::{single_layer_distortion, SingleLayerSolution};
pub use source::{
    end_to_end_distortion, solve_decode_forward, solve_gamma1, solve_gamma2, source_auxiliary_closed_form,
    source_auxiliary_fixed_point, EndToEndSolution,
};
