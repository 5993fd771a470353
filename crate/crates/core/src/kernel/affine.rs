//! Built-in kernels of the form `K(ξ,s,x) = a(ξ,s)·A·ρ(x) + c(ξ,s)·d`.
//!
//! `a` and `c` are [`Coefficient`]s (affine in ξ and in s, plus a bilinear
//! `ξᵀPs` term), `A` is an `n × m` matrix, `d ∈ ℝⁿ`, and `ρ` is either the
//! identity or componentwise `tanh`. Because each coefficient is affine in
//! every coordinate separately, its extrema over a box product are attained
//! at vertices, which gives the regularity constants in closed form.

use alloc::vec;
use alloc::vec::Vec;


#[allow(unused_imports)]
use num_traits::Float;

use super::{Dims, Integrand, KernelSpec, Modulus, M0};
use crate::domain::AxisBox;
use crate::error::{bail, Result};

/// `a(ξ,s) = constant + ⟨xi, ξ⟩ + ⟨s, s⟩ + ξᵀ·cross·s`.
///
/// Empty vectors stand for zero terms; `cross` is `b × k`, row-major.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Coefficient {
    pub constant: f64,
    pub xi: Vec<f64>,
    pub s: Vec<f64>,
    pub cross: Vec<f64>,
}

impl Coefficient {
    pub fn constant(value: f64) -> Self {
        Self {
            constant: value,
            ..Self::default()
        }
    }

    pub fn with_xi(mut self, xi: Vec<f64>) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_s(mut self, s: Vec<f64>) -> Self {
        self.s = s;
        self
    }

    /// Sets the `b × k` row-major cross term.
    pub fn with_cross(mut self, cross: Vec<f64>) -> Self {
        self.cross = cross;
        self
    }

    pub fn eval(&self, xi: &[f64], s: &[f64]) -> f64 {
        let mut v = self.constant;
        v += self.xi.iter().zip(xi).map(|(c, x)| c * x).sum::<f64>();
        v += self.s.iter().zip(s).map(|(c, x)| c * x).sum::<f64>();
        if !self.cross.is_empty() {
            let k = s.len();
            for (i, x) in xi.iter().enumerate() {
                for (j, y) in s.iter().enumerate() {
                    v += x * self.cross[i * k + j] * y;
                }
            }
        }
        v
    }

    fn validate(&self, b: usize, k: usize, name: &str) -> Result<()> {
        if !self.xi.is_empty() && self.xi.len() != b {
            bail!(Argument, "coefficient {name}.xi has length {}, expected {b}", self.xi.len());
        }
        if !self.s.is_empty() && self.s.len() != k {
            bail!(Argument, "coefficient {name}.s has length {}, expected {k}", self.s.len());
        }
        if !self.cross.is_empty() && self.cross.len() != b * k {
            bail!(
                Argument,
                "coefficient {name}.cross has length {}, expected {}",
                self.cross.len(),
                b * k
            );
        }
        Ok(())
    }

    /// `sup |a|` over `E × Ω`.
    pub fn sup_abs(&self, e: &AxisBox, omega: &AxisBox) -> f64 {
        let mut best = 0.0_f64;
        for_each_vertex(e, |xi| {
            for_each_vertex(omega, |s| best = best.max(self.eval(xi, s).abs()));
        });
        best
    }

    /// Lipschitz constant of `ξ ↦ a(ξ, s)`, uniformly in `s ∈ Ω`:
    /// `max_s ‖xi + cross·s‖`, attained at a vertex of Ω by convexity.
    pub fn xi_lipschitz(&self, b: usize, omega: &AxisBox) -> f64 {
        if self.xi.is_empty() && self.cross.is_empty() {
            return 0.0;
        }
        let k = omega.dim();
        let mut grad = vec![0.0; b];
        let mut best = 0.0_f64;
        for_each_vertex(omega, |s| {
            for (i, g) in grad.iter_mut().enumerate() {
                *g = self.xi.get(i).copied().unwrap_or(0.0);
                if !self.cross.is_empty() {
                    *g += (0..k).map(|j| self.cross[i * k + j] * s[j]).sum::<f64>();
                }
            }
            best = best.max(crate::norm(&grad));
        });
        best
    }
}

fn for_each_vertex(region: &AxisBox, mut f: impl FnMut(&[f64])) {
    let d = region.dim();
    let mut v = region.lower().to_vec();
    for mask in 0u64..(1u64 << d) {
        for (j, vj) in v.iter_mut().enumerate() {
            *vj = if mask >> j & 1 == 1 {
                region.upper()[j]
            } else {
                region.lower()[j]
            };
        }
        f(&v);
    }
}

/// Nonlinearity applied to the input value before the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Response {
    #[default]
    Linear,
    /// Componentwise `tanh`, 1-Lipschitz and bounded.
    Tanh,
}

/// `K(ξ,s,x) = a(ξ,s)·A·ρ(x) + c(ξ,s)·d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineKernel {
    dims: Dims,
    pub a: Coefficient,
    pub c: Coefficient,
    /// `n × m`, row-major.
    pub matrix: Vec<f64>,
    pub offset: Vec<f64>,
    pub response: Response,
}

/// Vertex enumeration is exponential in `b + k`.
const MAX_VERTEX_DIM: usize = 24;

impl AffineKernel {
    pub fn new(
        dims: Dims,
        a: Coefficient,
        c: Coefficient,
        matrix: Vec<f64>,
        offset: Vec<f64>,
        response: Response,
    ) -> Result<Self> {
        if dims.xi == 0 || dims.s == 0 || dims.input == 0 || dims.output == 0 {
            bail!(Argument, "kernel dimensions must be positive, got {dims:?}");
        }
        if dims.xi + dims.s > MAX_VERTEX_DIM {
            bail!(
                Argument,
                "b + k = {} exceeds {MAX_VERTEX_DIM} for built-in kernels",
                dims.xi + dims.s
            );
        }
        a.validate(dims.xi, dims.s, "a")?;
        c.validate(dims.xi, dims.s, "c")?;
        if matrix.len() != dims.output * dims.input {
            bail!(
                Argument,
                "matrix has {} entries, expected n*m = {}",
                matrix.len(),
                dims.output * dims.input
            );
        }
        if offset.len() != dims.output {
            bail!(Argument, "offset has length {}, expected n = {}", offset.len(), dims.output);
        }
        Ok(Self {
            dims,
            a,
            c,
            matrix,
            offset,
            response,
        })
    }

    /// Scalar `K = a(ξ,s)·x` with `b = k = m = n = 1`.
    pub fn scalar(a: Coefficient) -> Self {
        let dims = Dims {
            xi: 1,
            s: 1,
            input: 1,
            output: 1,
        };
        Self::new(dims, a, Coefficient::default(), vec![1.0], vec![0.0], Response::Linear)
            .expect("scalar kernel is well formed")
    }

    /// `K = a(ξ,s)·ρ(x)` with identity matrix and no offset, `m = n`.
    pub fn diagonal(b: usize, k: usize, m: usize, a: Coefficient, response: Response) -> Result<Self> {
        let mut matrix = vec![0.0; m * m];
        for i in 0..m {
            matrix[i * m + i] = 1.0;
        }
        let dims = Dims {
            xi: b,
            s: k,
            input: m,
            output: m,
        };
        Self::new(dims, a, Coefficient::default(), matrix, vec![0.0; m], response)
    }

    fn frobenius(&self) -> f64 {
        crate::norm(&self.matrix)
    }

    /// Derives `l0`, `β₀`, `β₁`, `φ(τ) = τ` and the exact `M₀` for the
    /// given output domain `e` and input domain `omega`.
    pub fn into_spec(self, e: &AxisBox, omega: &AxisBox) -> Result<KernelSpec> {
        if e.dim() != self.dims.xi || omega.dim() != self.dims.s {
            bail!(
                Argument,
                "domain dimensions (E: {}, Omega: {}) do not match kernel (b = {}, k = {})",
                e.dim(),
                omega.dim(),
                self.dims.xi,
                self.dims.s
            );
        }
        let a_norm = self.frobenius();
        let d_norm = crate::norm(&self.offset);
        let l0 = self.a.sup_abs(e, omega) * a_norm;
        let beta0 = self.a.xi_lipschitz(self.dims.xi, omega) * a_norm;
        let beta1 = self.c.xi_lipschitz(self.dims.xi, omega) * d_norm;
        let m0 = self.c.sup_abs(e, omega) * d_norm;
        KernelSpec::new(self, l0, beta0, beta1, Modulus::linear(), M0::Exact(m0))
    }
}

impl Integrand for AffineKernel {
    fn dims(&self) -> Dims {
        self.dims
    }

    fn eval(&self, xi: &[f64], s: &[f64], x: &[f64], out: &mut [f64]) {
        let a = self.a.eval(xi, s);
        let c = self.c.eval(xi, s);
        let m = self.dims.input;
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.matrix[i * m..(i + 1) * m];
            let ax: f64 = match self.response {
                Response::Linear => row.iter().zip(x).map(|(r, v)| r * v).sum(),
                Response::Tanh => row.iter().zip(x).map(|(r, v)| r * v.tanh()).sum(),
            };
            *o = a * ax + c * self.offset[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize) -> AxisBox {
        AxisBox::new(vec![0.0; d], vec![1.0; d]).unwrap()
    }

    #[test]
    fn one_plus_xi_constants() {
        let k = AffineKernel::scalar(Coefficient {
            constant: 1.0,
            xi: vec![1.0],
            ..Coefficient::default()
        })
        .into_spec(&unit(1), &unit(1))
        .unwrap();
        assert_eq!(k.l0, 2.0);
        assert_eq!(k.beta0, 1.0);
        assert_eq!(k.beta1, 0.0);
        assert_eq!(k.m0, M0::Exact(0.0));
    }

    #[test]
    fn bilinear_coefficient() {
        let a = Coefficient {
            cross: vec![1.0],
            ..Coefficient::default()
        };
        assert_eq!(a.eval(&[2.0], &[0.5]), 1.0);
        let omega = AxisBox::new(vec![0.0], vec![3.0]).unwrap();
        let e = AxisBox::new(vec![-1.0], vec![2.0]).unwrap();
        assert_eq!(a.sup_abs(&e, &omega), 6.0);
        assert_eq!(a.xi_lipschitz(1, &omega), 3.0);
    }

    #[test]
    fn shifted_kernel_m0_is_exact() {
        let dims = Dims {
            xi: 1,
            s: 1,
            input: 1,
            output: 1,
        };
        let k = AffineKernel::new(
            dims,
            Coefficient::constant(1.0),
            Coefficient {
                s: vec![1.0],
                ..Coefficient::default()
            },
            vec![1.0],
            vec![1.0],
            Response::Linear,
        )
        .unwrap();
        let mut out = [0.0];
        k.eval(&[0.3], &[0.25], &[2.0], &mut out);
        assert_eq!(out[0], 2.25);
        let spec = k.into_spec(&unit(1), &unit(1)).unwrap();
        assert_eq!(spec.m0, M0::Exact(1.0));
        assert_eq!(spec.l0, 1.0);
    }

    #[test]
    fn tanh_response_saturates() {
        let k = AffineKernel::diagonal(1, 1, 2, Coefficient::constant(1.0), Response::Tanh).unwrap();
        let mut out = [0.0; 2];
        k.eval(&[0.0], &[0.0], &[100.0, -100.0], &mut out);
        assert!((out[0] - 1.0).abs() < 1e-12 && (out[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let dims = Dims {
            xi: 1,
            s: 1,
            input: 2,
            output: 1,
        };
        assert!(AffineKernel::new(
            dims,
            Coefficient::constant(1.0),
            Coefficient::default(),
            vec![1.0],
            vec![0.0],
            Response::Linear
        )
        .is_err());
    }
}
