//! Numerical kernel shared by every solver: quadrature, bracketed roots,
//! Lambert W, incomplete gamma, monotone interpolation and two-parameter
//! fitting. Everything here is generic over [`Scalar`](crate::Scalar).

pub mod fit;
pub mod gamma;
pub mod interp;
pub mod lambert;
pub mod quadrature;
pub mod roots;

pub use fit::{fit_two_param, fit_two_param_in, FitSettings, TwoParamFit};
pub use gamma::{exp_integral_e1, ln_gamma, regularized_lower_gamma, upper_incomplete_gamma};
pub use interp::{Edge, EvaluableMap, MonotoneCubic};
pub use lambert::{lambert_w, lambert_w_of_exp};
pub use quadrature::{integrate, Estimate, Quadrature};
pub use roots::{bisect, find_root, Bracket};
