//! Piecewise-constant inputs, exact enumeration of the admissible family,
//! and the maps used to push an arbitrary input of the ball onto it.
//!
//! The admissible family consists of the functions that take the value
//! `w_λ · b_i` on each cell of the Ω-partition, with `w_λ` from a
//! [`MagnitudeGrid`], `b_i` from a [`SphereNet`], and
//!
//! ```text
//! Σ_j μ(Ω_j) · w_{λ_j}^p ≤ r^p.
//! ```
//!
//! The budget sum is always evaluated left to right over the cells with the
//! per-cell cost `μ_j · w^p`, both when pruning and when checking, so the
//! admissibility test has no tolerance.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)]
use num_traits::Float;

use crate::domain::{MagnitudeGrid, Partition, SphereNet};
use crate::error::{bail, Result};
use crate::kernel::BallSpec;

/// One member of the admissible family: per-cell indices into the magnitude
/// grid and the sphere net. Cells with magnitude index 0 carry direction 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PiecewiseConstantInput {
    magnitudes: Vec<usize>,
    directions: Vec<usize>,
}

impl PiecewiseConstantInput {
    /// # Panics
    /// If the index vectors differ in length or a zero-magnitude cell has a
    /// nonzero direction index.
    pub fn new(magnitudes: Vec<usize>, directions: Vec<usize>) -> Self {
        assert_eq!(magnitudes.len(), directions.len());
        assert!(
            magnitudes.iter().zip(&directions).all(|(l, i)| *l != 0 || *i == 0),
            "zero-magnitude cells must use direction index 0"
        );
        Self {
            magnitudes,
            directions,
        }
    }

    pub fn zero(cells: usize) -> Self {
        Self::new(vec![0; cells], vec![0; cells])
    }

    pub fn cells(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn magnitude_indices(&self) -> &[usize] {
        &self.magnitudes
    }

    pub fn direction_indices(&self) -> &[usize] {
        &self.directions
    }

    pub fn is_zero(&self) -> bool {
        self.magnitudes.iter().all(|l| *l == 0)
    }

    /// `(cell, magnitude_index, direction_index)` for every cell.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.magnitudes
            .iter()
            .zip(&self.directions)
            .enumerate()
            .map(|(j, (l, i))| (j, *l, *i))
    }

    /// Writes `w_{λ_j} · b_{i_j}` into `out`.
    pub fn value_into(&self, j: usize, grid: &MagnitudeGrid, net: &SphereNet, out: &mut [f64]) {
        let w = grid.value(self.magnitudes[j]);
        for (o, b) in out.iter_mut().zip(net.point(self.directions[j])) {
            *o = w * b;
        }
    }

    /// The realized per-cell values.
    pub fn to_sampled(&self, grid: &MagnitudeGrid, net: &SphereNet) -> SampledInput {
        let m = net.dim();
        let mut values = vec![0.0; self.cells() * m];
        for (j, chunk) in values.chunks_exact_mut(m).enumerate() {
            self.value_into(j, grid, net, chunk);
        }
        SampledInput::new(m, values)
    }
}

/// Per-cell cost `μ · w^p` used by every budget computation.
#[inline]
pub fn cell_cost(measure: f64, magnitude: f64, p: f64) -> f64 {
    measure * magnitude.powf(p)
}

/// The finite admissible family over fixed discretizations.
#[derive(Debug, Clone)]
pub struct InputFamily {
    costs: Vec<Vec<f64>>,
    q: usize,
    g: usize,
    budget: f64,
}

impl InputFamily {
    pub fn new(partition: &Partition, grid: &MagnitudeGrid, net: &SphereNet, ball: &BallSpec) -> Self {
        let costs = partition
            .measures()
            .map(|mu| grid.values().iter().map(|w| cell_cost(mu, *w, ball.p())).collect())
            .collect();
        Self {
            costs,
            q: grid.q(),
            g: net.len(),
            budget: ball.budget(),
        }
    }

    pub fn cells(&self) -> usize {
        self.costs.len()
    }

    /// `r^p`.
    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Canonical left-to-right budget sum of an input.
    pub fn budget_of(&self, input: &PiecewiseConstantInput) -> f64 {
        input
            .magnitudes
            .iter()
            .enumerate()
            .fold(0.0, |acc, (j, l)| acc + self.costs[j][*l])
    }

    pub fn is_admissible(&self, input: &PiecewiseConstantInput) -> bool {
        input.cells() == self.cells()
            && input.magnitudes.iter().all(|l| *l <= self.q)
            && input.directions.iter().all(|i| *i < self.g)
            && self.budget_of(input) <= self.budget
    }

    /// Family size, saturating at `u128::MAX`.
    pub fn count(&self) -> u128 {
        self.count_capped(u128::MAX).unwrap_or(u128::MAX)
    }

    /// Family size, or `None` as soon as it is known to exceed `cap`.
    pub fn count_capped(&self, cap: u128) -> Option<u128> {
        let mut total = 0u128;
        self.count_from(0, 0.0, 1, cap, &mut total).then_some(total)
    }

    fn count_from(&self, j: usize, partial: f64, weight: u128, cap: u128, total: &mut u128) -> bool {
        if j == self.cells() {
            *total = match total.checked_add(weight) {
                Some(t) if t <= cap => t,
                _ => return false,
            };
            return true;
        }
        for (l, cost) in self.costs[j].iter().enumerate() {
            let next = partial + cost;
            if next > self.budget {
                break;
            }
            let w = if l == 0 {
                weight
            } else {
                match weight.checked_mul(self.g as u128) {
                    Some(w) => w,
                    None => return false,
                }
            };
            if !self.count_from(j + 1, next, w, cap, total) {
                return false;
            }
        }
        true
    }

    /// Iterates the family: magnitude patterns in lexicographic order (last
    /// cell fastest), and for each pattern the direction assignments of its
    /// nonzero cells in lexicographic order.
    pub fn iter(&self) -> InputIter<'_> {
        let m = self.cells();
        InputIter {
            family: self,
            current: Some(PiecewiseConstantInput::zero(m)),
            partial: vec![0.0; m],
        }
    }
}

/// Iterator over an [`InputFamily`].
#[derive(Debug, Clone)]
pub struct InputIter<'a> {
    family: &'a InputFamily,
    current: Option<PiecewiseConstantInput>,
    // partial[j]: budget sum over cells 0..=j
    partial: Vec<f64>,
}

impl InputIter<'_> {
    fn advance_directions(&mut self, x: &mut PiecewiseConstantInput) -> bool {
        let g = self.family.g;
        for j in (0..x.cells()).rev() {
            if x.magnitudes[j] == 0 {
                continue;
            }
            if x.directions[j] + 1 < g {
                x.directions[j] += 1;
                for i in j + 1..x.cells() {
                    x.directions[i] = 0;
                }
                return true;
            }
        }
        false
    }

    fn advance_magnitudes(&mut self, x: &mut PiecewiseConstantInput) -> bool {
        let f = self.family;
        for j in (0..x.cells()).rev() {
            let l = x.magnitudes[j] + 1;
            if l > f.q {
                continue;
            }
            let before = if j == 0 { 0.0 } else { self.partial[j - 1] };
            let next = before + f.costs[j][l];
            if next > f.budget {
                continue;
            }
            x.magnitudes[j] = l;
            self.partial[j] = next;
            for i in j + 1..x.cells() {
                x.magnitudes[i] = 0;
                self.partial[i] = self.partial[i - 1] + f.costs[i][0];
            }
            x.directions.iter_mut().for_each(|d| *d = 0);
            return true;
        }
        false
    }
}

impl Iterator for InputIter<'_> {
    type Item = PiecewiseConstantInput;

    fn next(&mut self) -> Option<Self::Item> {
        let out = self.current.take()?;
        assert!(
            self.family.budget_of(&out) <= self.family.budget,
            "enumerated input violates the budget"
        );
        let mut x = out.clone();
        if self.advance_directions(&mut x) || self.advance_magnitudes(&mut x) {
            self.current = Some(x);
        }
        Some(out)
    }
}

/// Materializes the admissible family, refusing families larger than `cap`.
pub fn enumerate_inputs(
    partition: &Partition,
    grid: &MagnitudeGrid,
    net: &SphereNet,
    ball: &BallSpec,
    cap: u64,
) -> Result<Vec<PiecewiseConstantInput>> {
    let family = InputFamily::new(partition, grid, net, ball);
    if family.count_capped(cap as u128).is_none() {
        bail!(
            Capacity,
            "input family exceeds the cap of {cap} inputs (M = {}, q = {}, g = {})",
            partition.len(),
            grid.q(),
            net.len()
        );
    }
    Ok(family.iter().collect())
}

/// Size of the admissible family (saturating).
pub fn count_inputs(partition: &Partition, grid: &MagnitudeGrid, net: &SphereNet, ball: &BallSpec) -> u128 {
    InputFamily::new(partition, grid, net, ball).count()
}

/// Arbitrary per-cell values `x_j ∈ ℝᵐ` over some partition.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledInput {
    dim: usize,
    values: Vec<f64>,
}

impl SampledInput {
    /// # Panics
    /// If `dim == 0` or `values.len()` is not a multiple of `dim`.
    pub fn new(dim: usize, values: Vec<f64>) -> Self {
        assert!(dim > 0 && values.len().is_multiple_of(dim));
        Self { dim, values }
    }

    pub fn constant(cells: usize, value: &[f64]) -> Self {
        Self::new(value.len(), value.repeat(cells))
    }

    pub fn zeros(cells: usize, dim: usize) -> Self {
        Self::new(dim, vec![0.0; cells * dim])
    }

    /// Values of `f` at the cell representatives.
    pub fn from_fn(partition: &Partition, dim: usize, mut f: impl FnMut(&[f64], &mut [f64])) -> Self {
        let mut values = vec![0.0; partition.len() * dim];
        for (cell, out) in partition.cells().iter().zip(values.chunks_exact_mut(dim)) {
            f(&cell.representative, out);
        }
        Self::new(dim, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn value(&self, j: usize) -> &[f64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// `max_j ‖x_j‖`.
    pub fn sup_norm(&self) -> f64 {
        self.iter().map(crate::norm).fold(0.0, f64::max)
    }

    /// Left-to-right `Σ_j μ_j ‖x_j‖^p`.
    pub fn budget(&self, partition: &Partition, p: f64) -> f64 {
        debug_assert_eq!(partition.len(), self.cells());
        partition
            .measures()
            .zip(self.iter())
            .fold(0.0, |acc, (mu, x)| acc + cell_cost(mu, crate::norm(x), p))
    }

    pub fn lp_norm(&self, partition: &Partition, p: f64) -> f64 {
        self.budget(partition, p).powf(p.recip())
    }

    /// `max_j ‖x_j − y_j‖`.
    pub fn sup_distance(&self, other: &SampledInput) -> f64 {
        assert_eq!(self.values.len(), other.values.len());
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| crate::distance(a, b))
            .fold(0.0, f64::max)
    }

    /// The same function expressed on a refinement of its partition.
    pub fn refine(&self, coarse: &Partition, fine: &Partition) -> Result<SampledInput> {
        let parents = fine.parent_map(coarse)?;
        let mut values = Vec::with_capacity(fine.len() * self.dim);
        for c in parents {
            values.extend_from_slice(self.value(c));
        }
        Ok(Self::new(self.dim, values))
    }
}

fn scale_below(v: &[f64], factor: f64, limit: f64, out: &mut [f64]) {
    let mut s = factor;
    loop {
        for (o, x) in out.iter_mut().zip(v) {
            *o = x * s;
        }
        if crate::norm(out) <= limit {
            return;
        }
        s = s.next_down();
    }
}

/// Rescales every cell value with `‖x_j‖ > γ` onto the sphere of radius γ.
/// The result satisfies `‖x_j‖ ≤ γ` in floating point, so the map is
/// idempotent.
pub fn truncate_to_gamma(x: &SampledInput, gamma: f64) -> Result<SampledInput> {
    if !(gamma > 0.0) {
        bail!(Domain, "truncation level gamma must be positive, got {gamma}");
    }
    let mut out = x.clone();
    for (j, chunk) in out.values.chunks_exact_mut(x.dim).enumerate() {
        let v = x.value(j);
        let n = crate::norm(v);
        if n > gamma {
            scale_below(v, gamma / n, gamma, chunk);
        }
    }
    Ok(out)
}

/// Measure-weighted mean of a fine-partition input over each coarse cell.
///
/// A coarse value is never longer than the longest fine value it averages,
/// and the `p`-budget of the result never exceeds that of `x`. Both hold
/// mathematically; when rounding breaks them the result is scaled down by a
/// few ulps.
pub fn cell_average(x: &SampledInput, fine: &Partition, coarse: &Partition, p: f64) -> Result<SampledInput> {
    if x.cells() != fine.len() {
        bail!(
            Argument,
            "input has {} cells but the fine partition has {}",
            x.cells(),
            fine.len()
        );
    }
    let parents = fine.parent_map(coarse)?;
    let m = x.dim;
    let mut sums = vec![0.0; coarse.len() * m];
    let mut mass = vec![0.0; coarse.len()];
    let mut longest = vec![0.0f64; coarse.len()];
    for (f, (&c, mu)) in parents.iter().zip(fine.measures()).enumerate() {
        let v = x.value(f);
        for (s, xv) in sums[c * m..(c + 1) * m].iter_mut().zip(v) {
            *s += mu * xv;
        }
        mass[c] += mu;
        longest[c] = longest[c].max(crate::norm(v));
    }
    let mut values = vec![0.0; coarse.len() * m];
    for c in 0..coarse.len() {
        let avg: Vec<f64> = sums[c * m..(c + 1) * m].iter().map(|s| s / mass[c]).collect();
        scale_below(&avg, 1.0, longest[c], &mut values[c * m..(c + 1) * m]);
    }
    let limit = x.budget(fine, p);
    let mut out = SampledInput::new(m, values.clone());
    let mut s = 1.0f64;
    while out.budget(coarse, p) > limit {
        s = s.next_down();
        out = SampledInput::new(m, values.iter().map(|v| v * s).collect());
    }
    Ok(out)
}

/// Replaces each cell norm by the largest grid value not above it, keeping
/// the direction. Zero cells and cells already on the grid are unchanged.
pub fn project_magnitudes(x: &SampledInput, grid: &MagnitudeGrid) -> Result<SampledInput> {
    let mut out = x.clone();
    for (j, chunk) in out.values.chunks_exact_mut(x.dim).enumerate() {
        let v = x.value(j);
        let n = crate::norm(v);
        if n > grid.gamma() {
            bail!(
                Precondition,
                "cell {j} has norm {n} above the grid maximum gamma = {}",
                grid.gamma()
            );
        }
        if n == 0.0 {
            continue;
        }
        let w = grid.value(grid.floor_index(n));
        if w == n {
            continue;
        }
        for (o, xv) in chunk.iter_mut().zip(v) {
            *o = xv * (w / n);
        }
    }
    Ok(out)
}

/// Relative tolerance used to recognize grid magnitudes after projection.
pub const GRID_MATCH_RTOL: f64 = 1e-12;

/// Snaps each nonzero direction to its nearest net point (lowest index on
/// ties), producing a member of the enumerated family's index space.
pub fn project_directions(
    x: &SampledInput,
    grid: &MagnitudeGrid,
    net: &SphereNet,
) -> Result<PiecewiseConstantInput> {
    if x.dim != net.dim() {
        bail!(
            Argument,
            "input dimension {} does not match the net dimension {}",
            x.dim,
            net.dim()
        );
    }
    let mut magnitudes = Vec::with_capacity(x.cells());
    let mut directions = Vec::with_capacity(x.cells());
    let mut dir = vec![0.0; x.dim];
    for (j, v) in x.iter().enumerate() {
        let n = crate::norm(v);
        let Some(l) = grid.index_of(n, GRID_MATCH_RTOL) else {
            bail!(Precondition, "cell {j} has norm {n}, which is not a grid magnitude");
        };
        let i = if l == 0 {
            0
        } else {
            dir.iter_mut().zip(v).for_each(|(d, xv)| *d = xv / n);
            net.nearest(&dir).0
        };
        magnitudes.push(l);
        directions.push(i);
    }
    Ok(PiecewiseConstantInput::new(magnitudes, directions))
}

/// Volume of the unit ball in `ℝᵏ`, `π^{k/2} / Γ(k/2 + 1)`.
pub fn unit_ball_volume(k: usize) -> f64 {
    let half = k as f64 / 2.0;
    PI.powf(half) / libm::tgamma(half + 1.0)
}

/// Lipschitz constant `χ(γ, h) = max{ r / (c*·h^{k+p})^{1/p}, k·γ/h }` of the
/// Steklov average of an input with `‖x‖∞ ≤ γ` and `‖x‖_p ≤ r`.
pub fn steklov_lipschitz_bound(gamma: f64, h: f64, ball: &BallSpec, k: usize) -> Result<f64> {
    check_radius(h)?;
    let p = ball.p();
    let c = unit_ball_volume(k);
    let first = ball.r() / (c * h.powf(k as f64 + p)).powf(p.recip());
    Ok(first.max(k as f64 * gamma / h))
}

fn check_radius(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        bail!(Domain, "Steklov radius h must lie in (0, 1), got {h}");
    }
    Ok(())
}

/// Sub-cell resolution used for Steklov averages in dimension ≥ 2.
pub const STEKLOV_RESOLUTION: usize = 64;

/// Mean of `x` (extended by zero outside Ω) over the ball `B(s, h)`.
///
/// In one dimension the overlaps are exact interval lengths. In higher
/// dimensions the ball is sampled at the midpoints of a
/// `STEKLOV_RESOLUTION`-per-axis grid on its bounding cube, and the mean is
/// taken over the midpoints that fall in the ball.
pub fn steklov_value(x: &SampledInput, partition: &Partition, h: f64, s: &[f64]) -> Result<Vec<f64>> {
    check_radius(h)?;
    let k = partition.dim();
    if s.len() != k {
        bail!(Argument, "evaluation point has dimension {}, expected {k}", s.len());
    }
    if x.cells() != partition.len() {
        bail!(
            Argument,
            "input has {} cells but the partition has {}",
            x.cells(),
            partition.len()
        );
    }
    let m = x.dim;
    let mut acc = vec![0.0; m];
    if k == 1 {
        let (a, b) = (s[0] - h, s[0] + h);
        for (cell, v) in partition.cells().iter().zip(x.iter()) {
            let len = b.min(cell.upper[0]) - a.max(cell.lower[0]);
            if len > 0.0 {
                acc.iter_mut().zip(v).for_each(|(o, xv)| *o += len * xv);
            }
        }
        acc.iter_mut().for_each(|o| *o /= 2.0 * h);
        return Ok(acc);
    }
    let n = STEKLOV_RESOLUTION;
    let step = 2.0 * h / n as f64;
    let mut idx = vec![0usize; k];
    let mut t = vec![0.0; k];
    let mut inside = 0usize;
    for _ in 0..n.pow(k as u32) {
        for j in 0..k {
            t[j] = s[j] - h + (idx[j] as f64 + 0.5) * step;
        }
        if crate::distance(&t, s) <= h {
            inside += 1;
            if let Some(c) = partition.locate(&t) {
                acc.iter_mut().zip(x.value(c)).for_each(|(o, xv)| *o += xv);
            }
        }
        for j in (0..k).rev() {
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
        }
    }
    acc.iter_mut().for_each(|o| *o /= inside as f64);
    Ok(acc)
}

/// Steklov average of `x` evaluated at the representatives of `target`.
pub fn steklov_average(
    x: &SampledInput,
    partition: &Partition,
    h: f64,
    target: &Partition,
) -> Result<SampledInput> {
    let mut values = Vec::with_capacity(target.len() * x.dim);
    for cell in target.cells() {
        values.extend(steklov_value(x, partition, h, &cell.representative)?);
    }
    Ok(SampledInput::new(x.dim, values))
}
