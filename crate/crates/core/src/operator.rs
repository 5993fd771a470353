//! Evaluation of `U(x)(ξ) = ∫_Ω K(ξ, s, x(s)) ds` for inputs that are
//! constant on the cells of an Ω-partition.
//!
//! Each cell integral uses a tensor-product Gauss–Legendre rule. The same
//! integral at twice the order gives the error estimate attached to every
//! image.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::{Partition, PartitionCell};
use crate::error::{bail, Result};
use crate::inputs::SampledInput;
use crate::kernel::KernelSpec;
use crate::PointSet;

/// Largest supported quadrature order (per axis).
pub const MAX_ORDER: usize = 128;

/// Default quadrature order.
pub const DEFAULT_ORDER: usize = 4;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// The `n`-point rule, exact for polynomials of degree `2n − 1`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_ORDER {
            bail!(Argument, "quadrature order must lie in 1..={MAX_ORDER}, got {n}");
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// One sampled image `y(ξ_i)` on a grid of E-representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageFunction {
    pub input_id: usize,
    dim: usize,
    values: Vec<f64>,
    pub quad_error_estimate: f64,
}

impl ImageFunction {
    pub fn new(input_id: usize, dim: usize, values: Vec<f64>, quad_error_estimate: f64) -> Self {
        assert!(dim > 0 && values.len().is_multiple_of(dim));
        Self {
            input_id,
            dim,
            values,
            quad_error_estimate,
        }
    }

    /// Output dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// `max_i ‖self(ξ_i) − other(ξ_i)‖`.
    pub fn sup_distance(&self, other: &ImageFunction) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.values()
            .zip(other.values())
            .map(|(a, b)| crate::distance(a, b))
            .fold(0.0, f64::max)
    }
}

/// Which of the two rules held by an [`Operator`] to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Order `n`; produces reported values.
    Primary,
    /// Order `2n`; used only for the error estimate.
    Reference,
}

/// The integral operator over a fixed Ω-partition.
#[derive(Debug, Clone)]
pub struct Operator {
    kernel: KernelSpec,
    partition: Partition,
    order: usize,
    primary: GaussLegendre,
    reference: GaussLegendre,
}

impl Operator {
    pub fn new(kernel: KernelSpec, partition: Partition, order: usize) -> Result<Self> {
        let k = kernel.dims().s;
        if partition.dim() != k {
            bail!(
                Argument,
                "Omega partition has dimension {} but the kernel expects s in R^{k}",
                partition.dim()
            );
        }
        let primary = GaussLegendre::new(order)?;
        let reference = GaussLegendre::new(2 * order)?;
        Ok(Self {
            kernel,
            partition,
            order,
            primary,
            reference,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Same kernel and order over another partition of Ω.
    pub fn with_partition(&self, partition: Partition) -> Result<Self> {
        Self::new(self.kernel.clone(), partition, self.order)
    }

    fn rule(&self, rule: Rule) -> &GaussLegendre {
        match rule {
            Rule::Primary => &self.primary,
            Rule::Reference => &self.reference,
        }
    }

    /// Writes `∫_{Ω_j} K(ξ, s, value) ds` into `out`.
    pub fn cell_integral(&self, rule: Rule, xi: &[f64], j: usize, value: &[f64], out: &mut [f64]) {
        integrate_cell(&self.kernel, self.rule(rule), xi, self.partition.cell(j), value, out);
    }

    fn check_input(&self, x: &SampledInput) -> Result<()> {
        let dims = self.kernel.dims();
        if x.cells() != self.partition.len() || x.dim() != dims.input {
            bail!(
                Argument,
                "input has {} cells of dimension {}, expected {} cells of dimension {}",
                x.cells(),
                x.dim(),
                self.partition.len(),
                dims.input
            );
        }
        Ok(())
    }

    fn check_xi(&self, xi: &[f64]) -> Result<()> {
        let b = self.kernel.dims().xi;
        if xi.len() != b {
            bail!(Argument, "xi has dimension {}, expected {b}", xi.len());
        }
        Ok(())
    }

    fn accumulate(&self, rule: Rule, x: &SampledInput, xi: &[f64], out: &mut [f64], cell: &mut [f64]) {
        out.fill(0.0);
        for (j, v) in x.iter().enumerate() {
            self.cell_integral(rule, xi, j, v, cell);
            out.iter_mut().zip(cell.iter()).for_each(|(o, c)| *o += c);
        }
    }

    /// `U(x)(ξ)`, summing cell integrals in cell order.
    pub fn evaluate(&self, x: &SampledInput, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        self.check_xi(xi)?;
        let n = self.kernel.dims().output;
        let (mut out, mut cell) = (vec![0.0; n], vec![0.0; n]);
        self.accumulate(Rule::Primary, x, xi, &mut out, &mut cell);
        Ok(out)
    }

    /// The image of `x` on `xi_grid` with its two-level error estimate.
    pub fn sample_image(&self, x: &SampledInput, xi_grid: &PointSet, input_id: usize) -> Result<ImageFunction> {
        self.check_input(x)?;
        if xi_grid.is_empty() {
            bail!(Argument, "xi grid is empty");
        }
        self.check_xi(xi_grid.get(0))?;
        let n = self.kernel.dims().output;
        let mut values = vec![0.0; xi_grid.len() * n];
        let (mut fine, mut cell) = (vec![0.0; n], vec![0.0; n]);
        let mut err = 0.0f64;
        for (xi, out) in xi_grid.iter().zip(values.chunks_exact_mut(n)) {
            self.accumulate(Rule::Primary, x, xi, out, &mut cell);
            self.accumulate(Rule::Reference, x, xi, &mut fine, &mut cell);
            err = err.max(crate::distance(out, &fine));
        }
        Ok(ImageFunction::new(input_id, n, values, err))
    }
}

fn integrate_cell(
    kernel: &KernelSpec,
    rule: &GaussLegendre,
    xi: &[f64],
    cell: &PartitionCell,
    value: &[f64],
    out: &mut [f64],
) {
    let k = cell.lower.len();
    let q = rule.len();
    let half: Vec<f64> = cell.lower.iter().zip(&cell.upper).map(|(l, u)| 0.5 * (u - l)).collect();
    let mid: Vec<f64> = cell.lower.iter().zip(&cell.upper).map(|(l, u)| 0.5 * (u + l)).collect();
    let mut idx = vec![0usize; k];
    let mut s = vec![0.0; k];
    let mut f = vec![0.0; out.len()];
    out.fill(0.0);
    for _ in 0..q.pow(k as u32) {
        let mut w = 1.0;
        for j in 0..k {
            s[j] = mid[j] + half[j] * rule.nodes[idx[j]];
            w *= half[j] * rule.weights[idx[j]];
        }
        kernel.eval(xi, &s, value, &mut f);
        out.iter_mut().zip(&f).for_each(|(o, v)| *o += w * v);
        for j in (0..k).rev() {
            idx[j] += 1;
            if idx[j] < q {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// `∫_cell K(ξ, s, value) ds` with the `order`-point tensor rule.
pub fn evaluate_on_cell(
    kernel: &KernelSpec,
    xi: &[f64],
    cell: &PartitionCell,
    value: &[f64],
    order: usize,
) -> Result<Vec<f64>> {
    let rule = GaussLegendre::new(order)?;
    let mut out = vec![0.0; kernel.dims().output];
    integrate_cell(kernel, &rule, xi, cell, value, &mut out);
    Ok(out)
}

/// `U(x)(ξ)` for an input constant on the cells of `partition`.
pub fn evaluate_operator(
    kernel: &KernelSpec,
    partition: &Partition,
    x: &SampledInput,
    xi: &[f64],
    order: usize,
) -> Result<Vec<f64>> {
    Operator::new(kernel.clone(), partition.clone(), order)?.evaluate(x, xi)
}

/// The image of `x` at each point of `xi_grid`.
pub fn sample_image(
    kernel: &KernelSpec,
    partition: &Partition,
    x: &SampledInput,
    xi_grid: &PointSet,
    order: usize,
) -> Result<ImageFunction> {
    Operator::new(kernel.clone(), partition.clone(), order)?.sample_image(x, xi_grid, 0)
}
