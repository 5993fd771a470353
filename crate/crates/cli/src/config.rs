//! JSON run configuration.
//!
//! ```json
//! {
//!   "kernel": { "name": "affine", "a": { "constant": 1.0, "xi": [1.0] } },
//!   "omega": { "lower": [0.0], "upper": [1.0] },
//!   "e": { "lower": [0.0], "upper": [1.0] },
//!   "p": 2.0,
//!   "r": 1.0,
//!   "resolution": { "gamma": 1.25, "partition_delta": 0.5, "magnitude_step": 0.3125, "sigma": 1.0 },
//!   "monte_carlo": { "samples": 200, "seed": 7, "refinement": 4 },
//!   "output_dir": "out"
//! }
//! ```
//!
//! Exactly one of `epsilon` (budget mode) and `resolution` (explicit mode)
//! must be given. See [`KernelConfig`] for the kernel registry.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use urysohn_core::approx::{Caps, MonteCarloOptions, Resolution};
use urysohn_core::domain::AxisBox;
use urysohn_core::kernel::{AffineKernel, BallSpec, Coefficient, Dims, KernelSpec, Response, M0};
use urysohn_core::operator::{DEFAULT_ORDER, MAX_ORDER};

use crate::CliError;

/// `a(ξ,s) = constant + ⟨xi, ξ⟩ + ⟨s, s⟩ + ξᵀ·cross·s`; omitted terms are zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub xi: Vec<f64>,
    #[serde(default)]
    pub s: Vec<f64>,
    /// `b × k`, row-major.
    #[serde(default)]
    pub cross: Vec<f64>,
}

impl From<&CoefficientConfig> for Coefficient {
    fn from(c: &CoefficientConfig) -> Self {
        Coefficient::constant(c.constant)
            .with_xi(c.xi.clone())
            .with_s(c.s.clone())
            .with_cross(c.cross.clone())
    }
}

/// Built-in kernels, selected by `name`.
///
/// * `affine`: `K = a(ξ,s)·A·x + c(ξ,s)·d`
/// * `saturating`: `K = a(ξ,s)·A·tanh(x) + c(ξ,s)·d`
/// * `bilinear`: `K = (ξᵀ·P·s)·A·x`, with `P` given as `form` (`b × k`, row-major)
///
/// `A` is `matrix` (`n × m`, row-major, default the `m × m` identity),
/// `d` is `offset` (default zero) and `m` is `input_dim` (default 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Affine {
        a: CoefficientConfig,
        #[serde(default)]
        c: CoefficientConfig,
        #[serde(default)]
        matrix: Option<Vec<f64>>,
        #[serde(default)]
        offset: Option<Vec<f64>>,
        #[serde(default = "one")]
        input_dim: usize,
    },
    Saturating {
        a: CoefficientConfig,
        #[serde(default)]
        c: CoefficientConfig,
        #[serde(default)]
        matrix: Option<Vec<f64>>,
        #[serde(default)]
        offset: Option<Vec<f64>>,
        #[serde(default = "one")]
        input_dim: usize,
    },
    Bilinear {
        form: Vec<f64>,
        #[serde(default)]
        matrix: Option<Vec<f64>>,
        #[serde(default = "one")]
        input_dim: usize,
    },
}

fn one() -> usize {
    1
}

/// Larger regularity constants than the derived ones, e.g. to compare
/// against a published value. Smaller values are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantOverrides {
    pub l0: Option<f64>,
    pub beta0: Option<f64>,
    pub beta1: Option<f64>,
    pub m0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxConfig {
    fn build(&self, name: &str) -> Result<AxisBox, CliError> {
        AxisBox::new(self.lower.clone(), self.upper.clone())
            .map_err(|e| CliError::Config(format!("{name}: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionConfig {
    pub gamma: f64,
    pub partition_delta: f64,
    pub magnitude_step: f64,
    pub sigma: f64,
}

impl From<ResolutionConfig> for Resolution {
    fn from(r: ResolutionConfig) -> Self {
        Resolution {
            gamma: r.gamma,
            partition_delta: r.partition_delta,
            magnitude_step: r.magnitude_step,
            sigma: r.sigma,
        }
    }
}

/// `samples = 0` disables sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    #[serde(default)]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_refinement")]
    pub refinement: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            samples: 0,
            seed: 0,
            refinement: default_refinement(),
        }
    }
}

fn default_refinement() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsConfig {
    #[serde(default = "default_cells")]
    pub max_cells: usize,
    #[serde(default = "default_cells")]
    pub max_net_points: usize,
    #[serde(default = "default_inputs")]
    pub max_inputs: u64,
}

fn default_cells() -> usize {
    Caps::default().max_cells
}

fn default_inputs() -> u64 {
    Caps::default().max_inputs
}

impl Default for CapsConfig {
    fn default() -> Self {
        let c = Caps::default();
        Self {
            max_cells: c.max_cells,
            max_net_points: c.max_net_points,
            max_inputs: c.max_inputs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelConfig,
    pub omega: BoxConfig,
    pub e: BoxConfig,
    pub p: f64,
    pub r: f64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub resolution: Option<ResolutionConfig>,
    #[serde(default = "default_order")]
    pub quadrature_order: usize,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    /// `R*(ε)` for the budget.
    #[serde(default = "default_r_star")]
    pub r_star: u32,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub caps: CapsConfig,
    #[serde(default)]
    pub constants: ConstantOverrides,
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

fn default_r_star() -> u32 {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// How the discretization is sized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Budget(f64),
    Explicit(Resolution),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.mode()?;
        let caps = &self.caps;
        if caps.max_cells == 0 || caps.max_net_points == 0 || caps.max_inputs == 0 {
            return Err(CliError::Config(format!("caps must be positive, got {caps:?}")));
        }
        if !(1..=MAX_ORDER).contains(&self.quadrature_order) {
            return Err(CliError::Config(format!(
                "quadrature_order must lie in 1..={MAX_ORDER}, got {}",
                self.quadrature_order
            )));
        }
        if self.monte_carlo.refinement == 0 {
            return Err(CliError::Config("monte_carlo.refinement must be positive".into()));
        }
        if self.r_star == 0 {
            return Err(CliError::Config("r_star must be at least 1".into()));
        }
        self.ball()?;
        self.kernel()?;
        Ok(())
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        match (self.epsilon, self.resolution) {
            (Some(eps), None) => {
                if eps > 0.0 && eps.is_finite() {
                    Ok(Mode::Budget(eps))
                } else {
                    Err(CliError::Config(format!("epsilon must be positive, got {eps}")))
                }
            }
            (None, Some(r)) => Ok(Mode::Explicit(r.into())),
            (Some(_), Some(_)) => Err(CliError::Config("give either epsilon or resolution, not both".into())),
            (None, None) => Err(CliError::Config("one of epsilon or resolution is required".into())),
        }
    }

    pub fn omega_box(&self) -> Result<AxisBox, CliError> {
        self.omega.build("omega")
    }

    pub fn e_box(&self) -> Result<AxisBox, CliError> {
        self.e.build("e")
    }

    pub fn ball(&self) -> Result<BallSpec, CliError> {
        Ok(BallSpec::new(self.p, self.r)?)
    }

    pub fn caps(&self) -> Caps {
        Caps {
            max_cells: self.caps.max_cells,
            max_net_points: self.caps.max_net_points,
            max_inputs: self.caps.max_inputs,
        }
    }

    pub fn monte_carlo_options(&self) -> Option<MonteCarloOptions> {
        (self.monte_carlo.samples > 0).then_some(MonteCarloOptions {
            samples: self.monte_carlo.samples,
            seed: self.monte_carlo.seed,
            refinement: self.monte_carlo.refinement,
        })
    }

    /// Builds the kernel with derived constants and applies overrides.
    pub fn kernel(&self) -> Result<KernelSpec, CliError> {
        let e = self.e_box()?;
        let omega = self.omega_box()?;
        let (b, k) = (e.dim(), omega.dim());
        let (a, c, matrix, offset, m, response) = match &self.kernel {
            KernelConfig::Affine {
                a,
                c,
                matrix,
                offset,
                input_dim,
            } => (a.into(), c.into(), matrix, offset.clone(), *input_dim, Response::Linear),
            KernelConfig::Saturating {
                a,
                c,
                matrix,
                offset,
                input_dim,
            } => (a.into(), c.into(), matrix, offset.clone(), *input_dim, Response::Tanh),
            KernelConfig::Bilinear {
                form,
                matrix,
                input_dim,
            } => (
                Coefficient::default().with_cross(form.clone()),
                Coefficient::default(),
                matrix,
                None,
                *input_dim,
                Response::Linear,
            ),
        };
        if m == 0 {
            return Err(CliError::Config("kernel.input_dim must be positive".into()));
        }
        let matrix = match matrix {
            Some(mat) => mat.clone(),
            None => (0..m * m).map(|i| if i / m == i % m { 1.0 } else { 0.0 }).collect(),
        };
        if matrix.is_empty() || matrix.len() % m != 0 {
            return Err(CliError::Config(format!(
                "kernel.matrix has {} entries, not a multiple of input_dim = {m}",
                matrix.len()
            )));
        }
        let n = matrix.len() / m;
        let offset = offset.unwrap_or_else(|| vec![0.0; n]);
        let dims = Dims {
            xi: b,
            s: k,
            input: m,
            output: n,
        };
        let kernel = AffineKernel::new(dims, a, c, matrix, offset, response)?;
        let mut spec = kernel.into_spec(&e, &omega)?;
        let o = &self.constants;
        for (name, given, derived) in [
            ("l0", o.l0, spec.l0),
            ("beta0", o.beta0, spec.beta0),
            ("beta1", o.beta1, spec.beta1),
            ("m0", o.m0, spec.m0.value()),
        ] {
            if let Some(v) = given {
                if !(v >= derived && v.is_finite()) {
                    return Err(CliError::Config(format!(
                        "constants.{name} = {v} is below the derived value {derived}"
                    )));
                }
            }
        }
        spec.l0 = o.l0.unwrap_or(spec.l0);
        spec.beta0 = o.beta0.unwrap_or(spec.beta0);
        spec.beta1 = o.beta1.unwrap_or(spec.beta1);
        if let Some(v) = o.m0 {
            spec.m0 = M0::Supplied(v);
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "kernel": { "name": "affine", "a": { "constant": 1.0, "xi": [1.0] } },
        "omega": { "lower": [0.0], "upper": [1.0] },
        "e": { "lower": [0.0], "upper": [1.0] },
        "p": 2.0, "r": 1.0"#;

    fn with(rest: &str) -> String {
        format!("{BASE}{rest}}}")
    }

    #[test]
    fn explicit_mode_parses() {
        let c = RunConfig::from_json(&with(
            r#", "resolution": {"gamma": 1, "partition_delta": 0.5, "magnitude_step": 0.5, "sigma": 1}"#,
        ))
        .unwrap();
        assert!(matches!(c.mode().unwrap(), Mode::Explicit(_)));
        assert_eq!(c.quadrature_order, DEFAULT_ORDER);
        assert_eq!(c.r_star, 1);
        let k = c.kernel().unwrap();
        assert_eq!((k.l0, k.beta0), (2.0, 1.0));
    }

    #[test]
    fn exactly_one_mode() {
        let both = with(
            r#", "epsilon": 1, "resolution": {"gamma": 1, "partition_delta": 0.5, "magnitude_step": 0.5, "sigma": 1}"#,
        );
        let err = RunConfig::from_json(&both).unwrap_err().to_string();
        assert!(err.contains("epsilon"), "{err}");
        let err = RunConfig::from_json(&with("")).unwrap_err().to_string();
        assert!(err.contains("required"), "{err}");
        assert!(RunConfig::from_json(&with(r#", "epsilon": -1"#)).is_err());
    }

    #[test]
    fn caps_must_be_positive() {
        let err = RunConfig::from_json(&with(r#", "epsilon": 1, "caps": {"max_inputs": 0}"#))
            .unwrap_err()
            .to_string();
        assert!(err.contains("caps"), "{err}");
    }

    #[test]
    fn unknown_kernel_is_rejected() {
        let text = with(r#", "epsilon": 1"#).replace("affine", "python");
        assert!(RunConfig::from_json(&text).is_err());
    }

    #[test]
    fn overrides_may_only_grow_constants() {
        let c = RunConfig::from_json(&with(r#", "epsilon": 1, "constants": {"l0": 3, "m0": 0.5}"#)).unwrap();
        let k = c.kernel().unwrap();
        assert_eq!(k.l0, 3.0);
        assert_eq!(k.m0, M0::Supplied(0.5));
        let err = RunConfig::from_json(&with(r#", "epsilon": 1, "constants": {"l0": 1}"#))
            .unwrap_err()
            .to_string();
        assert!(err.contains("constants.l0"), "{err}");
    }

    #[test]
    fn registry_kernels_build() {
        let sat = with(r#", "epsilon": 1"#).replace(
            r#"{ "name": "affine", "a": { "constant": 1.0, "xi": [1.0] } }"#,
            r#"{ "name": "saturating", "a": { "constant": 1.0 }, "input_dim": 2 }"#,
        );
        let k = RunConfig::from_json(&sat).unwrap().kernel().unwrap();
        assert_eq!(k.dims().input, 2);
        assert!((k.l0 - 2f64.sqrt()).abs() < 1e-15);
        let bil = with(r#", "epsilon": 1"#).replace(
            r#"{ "name": "affine", "a": { "constant": 1.0, "xi": [1.0] } }"#,
            r#"{ "name": "bilinear", "form": [2.0] }"#,
        );
        let k = RunConfig::from_json(&bil).unwrap().kernel().unwrap();
        let mut out = [0.0];
        k.eval(&[0.5], &[0.5], &[3.0], &mut out);
        assert_eq!(out[0], 1.5);
        assert_eq!((k.l0, k.beta0), (2.0, 2.0));
    }
}
