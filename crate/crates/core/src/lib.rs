//! Internal approximation of the image set and integral funnel of a closed
//! `L_p` ball under a Urysohn-type integral operator
//!
//! ```text
//! U(x)(ξ) = ∫_Ω K(ξ, s, x(s)) ds,    ‖x‖_p ≤ r,  p > 1.
//! ```
//!
//! The ball is replaced by a finite family of piecewise-constant inputs built
//! from three discretizations:
//!
//! * a Δ-partition of the input domain Ω (and of the output domain E),
//! * a uniform magnitude grid `0 = w₀ < … < w_q = γ`,
//! * a σ-net on the unit sphere of `ℝᵐ`.
//!
//! Every enumerated input satisfies the `L_p` budget exactly, so every image
//! and every funnel point produced here is attainable by the true operator.
//! The [`approx`] module measures how far the finite family is from the
//! continuum with Hausdorff distances against analytic and Monte-Carlo
//! oracles.
//!
//! The crate is `no_std` (with `alloc`). The `parallel` feature pulls in
//! `std` and evaluates images and Monte-Carlo samples with rayon; output
//! order and values are identical with or without it.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod approx;
pub mod domain;
mod error;
pub mod inputs;
pub mod kernel;
pub mod operator;
mod par;
mod points;

pub use error::{Error, Result};
pub use points::PointSet;

/// Euclidean norm of a slice.
pub fn norm(v: &[f64]) -> f64 {
    #[allow(unused_imports)]
    use num_traits::Float;
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean distance between two slices of equal length.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    #[allow(unused_imports)]
    use num_traits::Float;
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
