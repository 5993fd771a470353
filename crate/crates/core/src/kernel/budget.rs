
#[allow(unused_imports)]
use num_traits::Float;

use super::{beta_star, BallSpec, KernelSpec};
use crate::error::{bail, Result};

/// Discretization fineness that guarantees Hausdorff error below `epsilon`.
///
/// `r_star` is the integer `R*(ε)` for which no construction is known; it is
/// taken from configuration, so `partition_delta_star` is conservative only
/// relative to that choice.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ParameterBudget {
    pub epsilon: f64,
    /// `κ* = 2·l₀·r^p`
    pub kappa_star: f64,
    /// `γ*(ε) = (10·κ*/ε)^{1/(p−1)}`
    pub gamma_star: f64,
    /// `δ*(ε) = ε / (10·l₀·μ(Ω))`
    pub delta_star: f64,
    /// `σ*(ε) = ε / (10·l₀·μ(Ω)·γ*)`
    pub sigma_star: f64,
    /// `Δ*(ε) = min{ε/(10·l₀·μ(Ω)·R*), ε/10, Δ₁(ε)}`
    pub partition_delta_star: f64,
    /// Largest Δ with `φ(Δ) ≤ ε/(10·β*)`, searched on `[0, diam E]`.
    pub delta_one: f64,
    pub beta_star: f64,
    pub r_star: u32,
}

/// Computes the parameter budget for accuracy `eps`.
///
/// `e_diameter` bounds the search interval for `Δ₁(ε)`.
pub fn parameter_budget(
    eps: f64,
    kernel: &KernelSpec,
    ball: &BallSpec,
    measure_omega: f64,
    e_diameter: f64,
    r_star: u32,
) -> Result<ParameterBudget> {
    if !(eps > 0.0 && eps.is_finite()) {
        bail!(Domain, "epsilon must be positive, got {eps}");
    }
    if r_star < 1 {
        bail!(Domain, "r_star must be at least 1, got {r_star}");
    }
    if !(e_diameter > 0.0 && e_diameter.is_finite()) {
        bail!(Domain, "diameter of E must be positive, got {e_diameter}");
    }
    let l0 = kernel.l0;
    if !(l0 > 0.0) {
        bail!(BudgetInfeasible, "l0 must be positive for a parameter budget, got {l0}");
    }
    if !(ball.r() > 0.0) {
        bail!(BudgetInfeasible, "ball radius r must be positive for a parameter budget");
    }
    let beta = beta_star(kernel, ball, measure_omega)?;
    let p = ball.p();

    let kappa_star = 2.0 * l0 * ball.r().powf(p);
    let gamma_star = (10.0 * kappa_star / eps).powf(1.0 / (p - 1.0));
    let delta_star = eps / (10.0 * l0 * measure_omega);
    let sigma_star = eps / (10.0 * l0 * measure_omega * gamma_star);

    let level = if beta > 0.0 {
        eps / (10.0 * beta)
    } else {
        f64::INFINITY
    };
    let delta_one = kernel.phi.largest_below(level, e_diameter);
    if !(delta_one > 0.0) {
        bail!(
            BudgetInfeasible,
            "phi does not reach eps/(10*beta*) = {level} on [0, {e_diameter}]"
        );
    }
    let partition_delta_star = (eps / (10.0 * l0 * measure_omega * r_star as f64))
        .min(eps / 10.0)
        .min(delta_one);

    Ok(ParameterBudget {
        epsilon: eps,
        kappa_star,
        gamma_star,
        delta_star,
        sigma_star,
        partition_delta_star,
        delta_one,
        beta_star: beta,
        r_star,
    })
}
