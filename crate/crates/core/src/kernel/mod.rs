//! The Urysohn kernel `K(ξ, s, x)`, its regularity constants and the bounds
//! derived from them.
//!
//! Regularity is expressed by three constants and a modulus:
//!
//! * `l0`: Lipschitz constant of `K` in `x`,
//! * `beta0`, `beta1`, `phi`: `‖K(ξ₁,s,x) − K(ξ₂,s,x)‖ ≤ (β₀‖x‖ + β₁)·φ(‖ξ₁ − ξ₂‖)`,
//! * `m0`: `max ‖K(ξ, s, 0)‖` over `E × Ω`.
//!
//! These feed the uniform bound [`alpha_star`], the modulus bound
//! [`beta_star`] and the discretization budget [`parameter_budget`].

mod affine;
mod budget;

use alloc::sync::Arc;
use core::fmt;


#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Result};

pub use affine::{AffineKernel, Coefficient, Response};
pub use budget::{parameter_budget, ParameterBudget};

/// Dimensions of a kernel `K : ℝᵇ × ℝᵏ × ℝᵐ → ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Dims {
    /// `b`, dimension of the output domain E.
    pub xi: usize,
    /// `k`, dimension of the input domain Ω.
    pub s: usize,
    /// `m`, dimension of input values.
    pub input: usize,
    /// `n`, dimension of output values.
    pub output: usize,
}

/// Pointwise evaluation of a kernel.
pub trait Integrand: Send + Sync + fmt::Debug {
    fn dims(&self) -> Dims;

    /// Writes `K(xi, s, x)` into `out` (length `dims().output`).
    fn eval(&self, xi: &[f64], s: &[f64], x: &[f64], out: &mut [f64]);
}

/// Wraps a closure as an [`Integrand`]. Mostly useful in tests.
pub struct FnIntegrand<F> {
    dims: Dims,
    f: F,
}

impl<F> FnIntegrand<F>
where
    F: Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dims: Dims, f: F) -> Self {
        Self { dims, f }
    }
}

impl<F> fmt::Debug for FnIntegrand<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnIntegrand").field("dims", &self.dims).finish()
    }
}

impl<F> Integrand for FnIntegrand<F>
where
    F: Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync,
{
    fn dims(&self) -> Dims {
        self.dims
    }

    fn eval(&self, xi: &[f64], s: &[f64], x: &[f64], out: &mut [f64]) {
        (self.f)(xi, s, x, out)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Modulus of continuity `φ` of the kernel in `ξ`.
///
/// `φ` must be nondecreasing with `φ(0) = 0`; inversion by bisection relies
/// on monotonicity.
#[derive(Clone)]
pub enum Modulus {
    /// `φ(τ) = scale · τ^exponent`, inverted in closed form.
    Power { scale: f64, exponent: f64 },
    /// Arbitrary monotone `φ`, with an optional exact inverse.
    Custom {
        phi: ScalarFn,
        inverse: Option<ScalarFn>,
    },
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power { scale, exponent } => f
                .debug_struct("Power")
                .field("scale", scale)
                .field("exponent", exponent)
                .finish(),
            Self::Custom { inverse, .. } => f
                .debug_struct("Custom")
                .field("has_inverse", &inverse.is_some())
                .finish(),
        }
    }
}

/// Relative tolerance of the bisection used to invert `φ`.
pub const BISECTION_RTOL: f64 = 1e-12;

impl Modulus {
    pub fn linear() -> Self {
        Self::Power {
            scale: 1.0,
            exponent: 1.0,
        }
    }

    pub fn custom(phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom {
            phi: Arc::new(phi),
            inverse: None,
        }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        match self {
            Self::Power { scale, exponent } => {
                if tau <= 0.0 {
                    0.0
                } else {
                    scale * tau.powf(*exponent)
                }
            }
            Self::Custom { phi, .. } => phi(tau),
        }
    }

    fn closed_form_inverse(&self, level: f64) -> Option<f64> {
        match self {
            Self::Power { scale, exponent } if *scale > 0.0 && *exponent > 0.0 => {
                Some((level / scale).powf(1.0 / exponent))
            }
            Self::Power { .. } => Some(f64::INFINITY),
            Self::Custom { inverse, .. } => inverse.as_ref().map(|inv| inv(level)),
        }
    }

    /// Largest `τ ∈ [0, upper]` with `φ(τ) ≤ level`.
    ///
    /// Uses the exact inverse when one is known, otherwise bisection with
    /// relative tolerance [`BISECTION_RTOL`]. The returned value always
    /// satisfies `φ(τ) ≤ level`.
    pub fn largest_below(&self, level: f64, upper: f64) -> f64 {
        if level.is_infinite() || self.eval(upper) <= level {
            return upper;
        }
        if let Some(mut tau) = self.closed_form_inverse(level) {
            tau = tau.min(upper);
            while tau > 0.0 && self.eval(tau) > level {
                tau = tau.next_down();
            }
            return tau.max(0.0);
        }
        self.bisect(level, upper)
    }

    /// Bisection inverse, ignoring any closed form.
    pub fn bisect(&self, level: f64, upper: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, upper);
        while hi - lo > BISECTION_RTOL * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) <= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// How the constant `M₀ = max ‖K(ξ,s,0)‖` was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", content = "value", rename_all = "snake_case"))]
pub enum M0 {
    /// Closed form for a built-in kernel.
    Exact(f64),
    /// Supplied by the user.
    Supplied(f64),
    /// Maximum over a sample grid: a lower estimate of the true value.
    Estimated(f64),
}

impl M0 {
    pub fn value(self) -> f64 {
        match self {
            Self::Exact(v) | Self::Supplied(v) | Self::Estimated(v) => v,
        }
    }
}

/// A kernel together with its regularity data.
#[derive(Clone)]
pub struct KernelSpec {
    integrand: Arc<dyn Integrand>,
    pub l0: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub phi: Modulus,
    pub m0: M0,
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelSpec")
            .field("integrand", &self.integrand)
            .field("l0", &self.l0)
            .field("beta0", &self.beta0)
            .field("beta1", &self.beta1)
            .field("phi", &self.phi)
            .field("m0", &self.m0)
            .finish()
    }
}

impl KernelSpec {
    /// Assembles a kernel from an integrand and user-provided constants.
    pub fn new(
        integrand: impl Integrand + 'static,
        l0: f64,
        beta0: f64,
        beta1: f64,
        phi: Modulus,
        m0: M0,
    ) -> Result<Self> {
        Self::from_arc(Arc::new(integrand), l0, beta0, beta1, phi, m0)
    }

    pub fn from_arc(
        integrand: Arc<dyn Integrand>,
        l0: f64,
        beta0: f64,
        beta1: f64,
        phi: Modulus,
        m0: M0,
    ) -> Result<Self> {
        for (name, v) in [("l0", l0), ("beta0", beta0), ("beta1", beta1), ("m0", m0.value())] {
            if !(v >= 0.0 && v.is_finite()) {
                bail!(Domain, "kernel constant {name} must be finite and nonnegative, got {v}");
            }
        }
        let phi0 = phi.eval(0.0);
        if phi0 != 0.0 {
            bail!(Domain, "modulus phi must vanish at 0, got phi(0) = {phi0}");
        }
        Ok(Self {
            integrand,
            l0,
            beta0,
            beta1,
            phi,
            m0,
        })
    }

    pub fn dims(&self) -> Dims {
        self.integrand.dims()
    }

    pub fn integrand(&self) -> &dyn Integrand {
        &*self.integrand
    }

    #[inline]
    pub fn eval(&self, xi: &[f64], s: &[f64], x: &[f64], out: &mut [f64]) {
        self.integrand.eval(xi, s, x, out)
    }

    /// Returns a copy whose outputs are multiplied by `factor`; constants
    /// scale accordingly.
    pub fn scaled(&self, factor: f64) -> Self {
        #[derive(Debug)]
        struct Scaled(Arc<dyn Integrand>, f64);
        impl Integrand for Scaled {
            fn dims(&self) -> Dims {
                self.0.dims()
            }
            fn eval(&self, xi: &[f64], s: &[f64], x: &[f64], out: &mut [f64]) {
                self.0.eval(xi, s, x, out);
                out.iter_mut().for_each(|v| *v *= self.1);
            }
        }
        let a = factor.abs();
        let m0 = match self.m0 {
            M0::Exact(v) => M0::Exact(a * v),
            M0::Supplied(v) => M0::Supplied(a * v),
            M0::Estimated(v) => M0::Estimated(a * v),
        };
        Self {
            integrand: Arc::new(Scaled(self.integrand.clone(), factor)),
            l0: a * self.l0,
            beta0: a * self.beta0,
            beta1: a * self.beta1,
            phi: self.phi.clone(),
            m0,
        }
    }
}

/// The closed ball `V_{p,r}` of `L_p(Ω; ℝᵐ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BallSpec {
    p: f64,
    r: f64,
}

impl BallSpec {
    /// `p > 1`, `r ≥ 0`. `r = 0` is the degenerate ball `{0}`.
    pub fn new(p: f64, r: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            bail!(Domain, "ball exponent p must be finite and > 1, got {p}");
        }
        if !(r >= 0.0 && r.is_finite()) {
            bail!(Domain, "ball radius r must be finite and >= 0, got {r}");
        }
        Ok(Self { p, r })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `r^p`, the right-hand side of the budget constraint.
    pub fn budget(&self) -> f64 {
        self.r.powf(self.p)
    }

    /// Conjugate exponent `p' = p/(p−1)`.
    pub fn conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

fn check_measure(measure_omega: f64) -> Result<()> {
    if !(measure_omega > 0.0 && measure_omega.is_finite()) {
        bail!(Domain, "measure of Omega must be positive, got {measure_omega}");
    }
    Ok(())
}

/// Uniform bound on images: `α* = M₀·μ(Ω) + l₀·r·μ(Ω)^{(p−1)/p}`.
pub fn alpha_star(kernel: &KernelSpec, ball: &BallSpec, measure_omega: f64) -> Result<f64> {
    check_measure(measure_omega)?;
    let holder = measure_omega.powf((ball.p - 1.0) / ball.p);
    Ok(kernel.m0.value() * measure_omega + kernel.l0 * ball.r * holder)
}

/// Modulus coefficient of images: `β* = β₁·μ(Ω) + β₀·r·μ(Ω)^{(p−1)/p}`.
pub fn beta_star(kernel: &KernelSpec, ball: &BallSpec, measure_omega: f64) -> Result<f64> {
    check_measure(measure_omega)?;
    let holder = measure_omega.powf((ball.p - 1.0) / ball.p);
    Ok(kernel.beta1 * measure_omega + kernel.beta0 * ball.r * holder)
}

/// Maximum of `‖K(ξ, s, 0)‖` over the sample grids.
///
/// This is a lower bound on the true `M₀` and is tagged as an estimate.
pub fn estimate_m0(
    kernel: &KernelSpec,
    xi_samples: &crate::PointSet,
    s_samples: &crate::PointSet,
) -> Result<M0> {
    if xi_samples.is_empty() || s_samples.is_empty() {
        bail!(Argument, "estimate_m0 needs nonempty xi and s sample grids");
    }
    let dims = kernel.dims();
    if xi_samples.dim() != dims.xi || s_samples.dim() != dims.s {
        bail!(
            Argument,
            "sample grid dimensions ({}, {}) do not match kernel ({}, {})",
            xi_samples.dim(),
            s_samples.dim(),
            dims.xi,
            dims.s
        );
    }
    let zero = alloc::vec![0.0; dims.input];
    let mut out = alloc::vec![0.0; dims.output];
    let mut best = 0.0_f64;
    for xi in xi_samples.iter() {
        for s in s_samples.iter() {
            kernel.eval(xi, s, &zero, &mut out);
            best = best.max(crate::norm(&out));
        }
    }
    Ok(M0::Estimated(best))
}

/// Tchebyshev bound `r^p / γ^p` on the measure of `{s : ‖x(s)‖ > γ}`.
pub fn tchebyshev_measure_bound(ball: &BallSpec, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        bail!(Domain, "gamma must be positive, got {gamma}");
    }
    Ok(ball.r.powf(ball.p) / gamma.powf(ball.p))
}


#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn identity_kernel(l0: f64, m0: f64) -> KernelSpec {
        let dims = Dims {
            xi: 1,
            s: 1,
            input: 1,
            output: 1,
        };
        KernelSpec::new(
            FnIntegrand::new(dims, |_, _, x, out| out[0] = x[0]),
            l0,
            0.0,
            0.0,
            Modulus::linear(),
            M0::Supplied(m0),
        )
        .unwrap()
    }

    fn with_betas(beta0: f64, beta1: f64) -> KernelSpec {
        let mut k = identity_kernel(1.0, 0.0);
        k.beta0 = beta0;
        k.beta1 = beta1;
        k
    }

    #[test]
    fn alpha_star_examples() {
        let b = BallSpec::new(2.0, 1.0).unwrap();
        assert_eq!(alpha_star(&identity_kernel(1.0, 0.0), &b, 1.0).unwrap(), 1.0);
        let b = BallSpec::new(2.0, 2.0).unwrap();
        assert_eq!(alpha_star(&identity_kernel(3.0, 2.0), &b, 1.0).unwrap(), 8.0);
        let b = BallSpec::new(3.0, 5.0).unwrap();
        assert_eq!(alpha_star(&identity_kernel(0.0, 1.0), &b, 2.0).unwrap(), 2.0);
    }

    #[test]
    fn beta_star_examples() {
        for (p, r) in [(2.0, 1.0), (3.0, 7.0), (1.5, 0.1)] {
            let b = BallSpec::new(p, r).unwrap();
            assert_eq!(beta_star(&with_betas(0.0, 1.0), &b, 1.0).unwrap(), 1.0);
        }
        let b = BallSpec::new(2.0, 1.0).unwrap();
        assert_eq!(beta_star(&with_betas(1.0, 0.0), &b, 1.0).unwrap(), 1.0);
        assert_eq!(beta_star(&with_betas(2.0, 3.0), &b, 4.0).unwrap(), 16.0);
    }

    #[test]
    fn nonpositive_measure_is_a_domain_error() {
        let b = BallSpec::new(2.0, 1.0).unwrap();
        let k = identity_kernel(1.0, 0.0);
        assert!(matches!(alpha_star(&k, &b, 0.0), Err(crate::Error::Domain(_))));
        assert!(matches!(beta_star(&k, &b, -1.0), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn ball_rejects_p_at_most_one() {
        assert!(BallSpec::new(1.0, 1.0).is_err());
        assert!(BallSpec::new(2.0, -1.0).is_err());
        assert!(BallSpec::new(2.0, 0.0).is_ok());
    }

    #[test]
    fn tchebyshev_examples() {
        let b = BallSpec::new(2.0, 1.0).unwrap();
        assert_eq!(tchebyshev_measure_bound(&b, 20.0).unwrap(), 0.0025);
        assert_eq!(tchebyshev_measure_bound(&b, 1.0).unwrap(), 1.0);
        let b = BallSpec::new(3.0, 2.0).unwrap();
        assert_eq!(tchebyshev_measure_bound(&b, 4.0).unwrap(), 0.125);
        assert!(tchebyshev_measure_bound(&b, 0.0).is_err());
    }

    #[test]
    fn estimate_m0_examples() {
        let dims = Dims {
            xi: 1,
            s: 1,
            input: 1,
            output: 1,
        };
        let xi = crate::PointSet::from_flat(1, vec![0.0, 0.5, 1.0]);
        let grid: vec::Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let s = crate::PointSet::from_flat(1, grid);

        let zero = KernelSpec::new(
            FnIntegrand::new(dims, |_, _, _, out| out[0] = 0.0),
            0.0,
            0.0,
            0.0,
            Modulus::linear(),
            M0::Supplied(0.0),
        )
        .unwrap();
        assert_eq!(estimate_m0(&zero, &xi, &s).unwrap(), M0::Estimated(0.0));
        assert_eq!(estimate_m0(&identity_kernel(1.0, 0.0), &xi, &s).unwrap().value(), 0.0);

        let shifted = KernelSpec::new(
            FnIntegrand::new(dims, |_, s, x, out| out[0] = s[0] + x[0]),
            1.0,
            0.0,
            0.0,
            Modulus::linear(),
            M0::Supplied(1.0),
        )
        .unwrap();
        let est = estimate_m0(&shifted, &xi, &s).unwrap().value();
        assert!((est - 1.0).abs() <= 1e-3, "{est}");

        let empty = crate::PointSet::new(1);
        assert!(matches!(
            estimate_m0(&shifted, &empty, &s),
            Err(crate::Error::Argument(_))
        ));
    }

    #[test]
    fn modulus_inverse_agrees_with_bisection() {
        let phi = Modulus::Power {
            scale: 2.0,
            exponent: 0.5,
        };
        let level = 0.3;
        let closed = phi.largest_below(level, 10.0);
        let bisected = phi.bisect(level, 10.0);
        assert!(phi.eval(closed) <= level);
        assert!(phi.eval(bisected) <= level);
        assert!((closed - bisected).abs() <= 1e-11 * closed.max(1.0));
    }

    #[test]
    fn modulus_saturates_at_upper_bound() {
        let phi = Modulus::linear();
        assert_eq!(phi.largest_below(5.0, 1.0), 1.0);
        assert_eq!(phi.largest_below(f64::INFINITY, 2.0), 2.0);
    }

    #[test]
    fn modulus_rejects_nonzero_origin() {
        let dims = Dims {
            xi: 1,
            s: 1,
            input: 1,
            output: 1,
        };
        let res = KernelSpec::new(
            FnIntegrand::new(dims, |_, _, x, out| out[0] = x[0]),
            1.0,
            0.0,
            0.0,
            Modulus::custom(|t| t + 1.0),
            M0::Supplied(0.0),
        );
        assert!(res.is_err());
    }
}
