//! Finite structures the approximation is built from: Δ-partitions of
//! boxes, uniform magnitude grids on `[0, γ]` and σ-nets on the unit sphere.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Result};

/// Axis-aligned box `[lower, upper] ⊂ ℝ^d` with positive side lengths.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AxisBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            bail!(
                Argument,
                "box bounds must be nonempty and of equal length, got {} and {}",
                lower.len(),
                upper.len()
            );
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                bail!(Domain, "box side {j} must satisfy lower < upper, got [{lo}, {hi}]");
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unit(d: usize) -> Self {
        Self::new(vec![0.0; d], vec![1.0; d]).expect("unit box")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn sides(&self) -> impl Iterator<Item = f64> + '_ {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l)
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.sides().product()
    }

    pub fn diameter(&self) -> f64 {
        self.sides().map(|s| s * s).sum::<f64>().sqrt()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (l, u))| *l <= *x && *x <= *u)
    }
}

/// One cell of a [`Partition`].
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionCell {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub measure: f64,
    pub diameter: f64,
    /// Cell center.
    pub representative: Vec<f64>,
}

/// Uniform grid partition of a box into cells of diameter and measure at
/// most Δ. Cells are stored in lexicographic index order, first axis most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    region: AxisBox,
    delta: f64,
    counts: Vec<usize>,
    breaks: Vec<Vec<f64>>,
    cells: Vec<PartitionCell>,
}

/// Builds the Δ-partition of `region`.
///
/// Starting from one cell, the axis with the longest cell side (lowest axis
/// on ties) is subdivided once more until every cell has diameter ≤ Δ and
/// measure ≤ Δ. In one dimension this is `⌈L/Δ⌉` cells; for a cube it is the
/// same count on every axis.
pub fn make_box_partition(region: &AxisBox, delta: f64, max_cells: usize) -> Result<Partition> {
    if !(delta > 0.0 && delta.is_finite()) {
        bail!(Domain, "partition Delta must be positive, got {delta}");
    }
    let sides: Vec<f64> = region.sides().collect();
    let mut counts = vec![1usize; sides.len()];
    loop {
        let cell: Vec<f64> = sides.iter().zip(&counts).map(|(s, n)| s / *n as f64).collect();
        let diam = cell.iter().map(|s| s * s).sum::<f64>().sqrt();
        let meas: f64 = cell.iter().product();
        if diam <= delta && meas <= delta {
            break;
        }
        let mut axis = 0;
        for (j, s) in cell.iter().enumerate() {
            if *s > cell[axis] {
                axis = j;
            }
        }
        counts[axis] += 1;
        let total = counts.iter().try_fold(1usize, |acc, n| acc.checked_mul(*n));
        if total.is_none_or(|t| t > max_cells) {
            bail!(
                Capacity,
                "partition with Delta = {delta} needs more than max_cells = {max_cells} cells"
            );
        }
    }
    Ok(Partition::uniform(region.clone(), delta, counts))
}

impl Partition {
    fn uniform(region: AxisBox, delta: f64, counts: Vec<usize>) -> Self {
        let breaks: Vec<Vec<f64>> = (0..region.dim())
            .map(|j| {
                let (lo, hi) = (region.lower[j], region.upper[j]);
                let n = counts[j];
                (0..=n)
                    .map(|i| {
                        if i == n {
                            hi
                        } else {
                            lo + (hi - lo) * i as f64 / n as f64
                        }
                    })
                    .collect()
            })
            .collect();
        let total: usize = counts.iter().product();
        let d = region.dim();
        let mut cells = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let lower: Vec<f64> = (0..d).map(|j| breaks[j][idx[j]]).collect();
            let upper: Vec<f64> = (0..d).map(|j| breaks[j][idx[j] + 1]).collect();
            let measure = lower.iter().zip(&upper).map(|(l, u)| u - l).product();
            let diameter = crate::distance(&lower, &upper);
            let representative = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect();
            cells.push(PartitionCell {
                lower,
                upper,
                measure,
                diameter,
                representative,
            });
            for j in (0..d).rev() {
                idx[j] += 1;
                if idx[j] < counts[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        Self {
            region,
            delta,
            counts,
            breaks,
            cells,
        }
    }

    /// Splits every cell into `factor` pieces along each axis. The result
    /// refines `self` and is a `Δ/factor`-partition.
    pub fn subdivide(&self, factor: usize, max_cells: usize) -> Result<Partition> {
        if factor == 0 {
            bail!(Argument, "subdivision factor must be positive");
        }
        let counts: Vec<usize> = self.counts.iter().map(|n| n * factor).collect();
        let total = counts.iter().try_fold(1usize, |acc, n| acc.checked_mul(*n));
        if total.is_none_or(|t| t > max_cells) {
            bail!(
                Capacity,
                "subdividing by {factor} needs more than max_cells = {max_cells} cells"
            );
        }
        Ok(Partition::uniform(self.region.clone(), self.delta / factor as f64, counts))
    }

    pub fn region(&self) -> &AxisBox {
        &self.region
    }

    /// The Δ the partition was built for.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Subdivision count per axis.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn cells(&self) -> &[PartitionCell] {
        &self.cells
    }

    pub fn cell(&self, j: usize) -> &PartitionCell {
        &self.cells[j]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    pub fn measures(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells.iter().map(|c| c.measure)
    }

    pub fn max_diameter(&self) -> f64 {
        self.cells.iter().map(|c| c.diameter).fold(0.0, f64::max)
    }

    /// Cell centers, in cell order.
    pub fn representatives(&self) -> crate::PointSet {
        crate::PointSet::from_points(self.dim(), self.cells.iter().map(|c| &c.representative))
    }

    /// Index of the cell containing `point` (half-open cells, closed at the
    /// upper boundary of the box).
    pub fn locate(&self, point: &[f64]) -> Option<usize> {
        if point.len() != self.dim() || !self.region.contains(point) {
            return None;
        }
        let mut flat = 0usize;
        for (j, x) in point.iter().enumerate() {
            let b = &self.breaks[j];
            let n = self.counts[j];
            let guess = ((x - b[0]) / (b[n] - b[0]) * n as f64).floor();
            let mut i = (guess.max(0.0) as usize).min(n - 1);
            while i > 0 && *x < b[i] {
                i -= 1;
            }
            while i + 1 < n && *x >= b[i + 1] {
                i += 1;
            }
            flat = flat * n + i;
        }
        Some(flat)
    }

    /// For a partition `self` refining `coarse`, the index of the coarse cell
    /// containing each fine cell.
    pub fn parent_map(&self, coarse: &Partition) -> Result<Vec<usize>> {
        let tol = |x: f64| 1e-12 * x.abs().max(1.0);
        let same_region = self.dim() == coarse.dim()
            && self
                .region
                .lower
                .iter()
                .chain(&self.region.upper)
                .zip(coarse.region.lower.iter().chain(&coarse.region.upper))
                .all(|(a, b)| (a - b).abs() <= tol(*b));
        if !same_region {
            bail!(Argument, "fine and coarse partitions cover different boxes");
        }
        self.cells
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                let parent = coarse
                    .locate(&cell.representative)
                    .expect("representative lies in the box");
                let pc = &coarse.cells[parent];
                let nested = (0..self.dim()).all(|j| {
                    cell.lower[j] >= pc.lower[j] - tol(pc.lower[j])
                        && cell.upper[j] <= pc.upper[j] + tol(pc.upper[j])
                });
                if nested {
                    Ok(parent)
                } else {
                    Err(crate::Error::Argument(alloc::format!(
                        "fine cell {i} is not contained in a single coarse cell"
                    )))
                }
            })
            .collect()
    }
}

/// Uniform grid `0 = w₀ < w₁ < … < w_q = γ`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MagnitudeGrid {
    gamma: f64,
    q: usize,
    delta: f64,
    values: Vec<f64>,
}

/// Builds the grid with `q = ⌈γ/δ⌉` (bumped if rounding makes a gap exceed
/// `requested_delta`), so the realized step never exceeds the request.
pub fn make_magnitude_grid(gamma: f64, requested_delta: f64) -> Result<MagnitudeGrid> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        bail!(Domain, "magnitude grid gamma must be positive, got {gamma}");
    }
    if !(requested_delta > 0.0 && requested_delta.is_finite()) {
        bail!(Domain, "magnitude step delta must be positive, got {requested_delta}");
    }
    let mut q = (gamma / requested_delta).ceil().max(1.0) as usize;
    loop {
        let grid = MagnitudeGrid::uniform(gamma, q);
        if grid.delta <= requested_delta {
            return Ok(grid);
        }
        q += 1;
    }
}

impl MagnitudeGrid {
    /// `q + 1` equally spaced values on `[0, γ]`.
    pub fn uniform(gamma: f64, q: usize) -> Self {
        assert!(q >= 1 && gamma > 0.0);
        let mut values: Vec<f64> = (0..=q).map(|i| gamma * i as f64 / q as f64).collect();
        values[q] = gamma;
        let delta = values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Self {
            gamma,
            q,
            delta,
            values,
        }
    }

    /// The one-point grid `{0}`; its family holds only the zero input.
    pub fn zero() -> Self {
        Self {
            gamma: 0.0,
            q: 0,
            delta: 0.0,
            values: vec![0.0],
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Realized step: the largest spacing between consecutive values, so
    /// rounding never makes a gap exceed it.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Largest `λ` with `w_λ ≤ magnitude` (clamped to the grid).
    pub fn floor_index(&self, magnitude: f64) -> usize {
        if self.q == 0 || magnitude <= 0.0 {
            return 0;
        }
        let mut i = ((magnitude / self.delta).floor().max(0.0) as usize).min(self.q);
        while i > 0 && self.values[i] > magnitude {
            i -= 1;
        }
        while i < self.q && self.values[i + 1] <= magnitude {
            i += 1;
        }
        i
    }

    /// Index of the grid value within `rtol·max(γ, 1)` of `magnitude`.
    pub fn index_of(&self, magnitude: f64, rtol: f64) -> Option<usize> {
        let tol = rtol * self.gamma.max(1.0);
        let below = self.floor_index(magnitude);
        [below, (below + 1).min(self.q)]
            .into_iter()
            .find(|&i| (self.values[i] - magnitude).abs() <= tol)
    }
}

/// Finite subset of the unit sphere `S ⊂ ℝᵐ` within σ of every sphere point.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereNet {
    dim: usize,
    sigma: f64,
    spacing: f64,
    certified_radius: f64,
    points: Vec<f64>,
}

/// Construction options for [`make_sphere_net_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetOptions {
    pub max_points: usize,
    /// Directions sampled for the covering certificate.
    pub certificate_samples: usize,
    pub seed: u64,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self {
            max_points: 1 << 20,
            certificate_samples: 10_000,
            seed: 0x0005_eed0_f5e7,
        }
    }
}

/// σ-net with default certificate settings and the given point cap.
pub fn make_sphere_net(m: usize, sigma: f64, max_points: usize) -> Result<SphereNet> {
    make_sphere_net_with(
        m,
        sigma,
        &NetOptions {
            max_points,
            ..NetOptions::default()
        },
    )
}

/// Builds a σ-net on the unit sphere of `ℝᵐ`.
///
/// `m = 1` gives `{+1, −1}`. For `m ≥ 2` the net is a latitude–longitude
/// grid in hyperspherical coordinates with angular spacing θ chosen so that
/// `2·sin(θ/2)·√(m−1) ≤ σ`; at polar angle φ the sub-sphere grid uses
/// spacing `θ / sin φ`. The covering radius is then certified on random
/// directions, and θ is shrunk until the certificate passes.
pub fn make_sphere_net_with(m: usize, sigma: f64, opts: &NetOptions) -> Result<SphereNet> {
    if m == 0 {
        bail!(Domain, "sphere dimension m must be at least 1");
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        bail!(Domain, "net fineness sigma must be positive, got {sigma}");
    }
    if m == 1 {
        return Ok(SphereNet {
            dim: 1,
            sigma,
            spacing: PI,
            certified_radius: 0.0,
            points: vec![1.0, -1.0],
        });
    }
    let ratio = (sigma / (2.0 * ((m - 1) as f64).sqrt())).min(1.0);
    let mut theta = 2.0 * ratio.asin();
    for _ in 0..64 {
        let mut points = Vec::new();
        angular_grid(m, theta, &mut points, opts.max_points)?;
        let mut net = SphereNet {
            dim: m,
            sigma,
            spacing: theta,
            certified_radius: 0.0,
            points,
        };
        net.certified_radius = net.sampled_covering_radius(opts.certificate_samples, opts.seed);
        if net.certified_radius <= sigma {
            return Ok(net);
        }
        theta *= 0.9;
    }
    bail!(Capacity, "could not certify a sigma-net for m = {m}, sigma = {sigma}")
}

fn angular_grid(d: usize, theta: f64, out: &mut Vec<f64>, cap: usize) -> Result<()> {
    let count = |out: &Vec<f64>, dim: usize| out.len() / dim;
    match d {
        1 => out.extend_from_slice(&[1.0, -1.0]),
        2 => {
            let n = ((2.0 * PI / theta).ceil() as usize).max(2);
            if n > cap {
                bail!(Capacity, "sigma-net needs {n} points, above max_points = {cap}");
            }
            for i in 0..n {
                let a = 2.0 * PI * i as f64 / n as f64;
                out.extend_from_slice(&[a.cos(), a.sin()]);
            }
        }
        _ => {
            let k = ((PI / theta).ceil() as usize).max(1);
            let mut sub = Vec::new();
            for i in 0..=k {
                let phi = PI * i as f64 / k as f64;
                if i == 0 || i == k {
                    out.push(if i == 0 { 1.0 } else { -1.0 });
                    out.extend(core::iter::repeat_n(0.0, d - 1));
                } else {
                    let (sin, cos) = phi.sin_cos();
                    sub.clear();
                    angular_grid(d - 1, (theta / sin).min(2.0 * PI), &mut sub, cap)?;
                    for u in sub.chunks_exact(d - 1) {
                        out.push(cos);
                        out.extend(u.iter().map(|v| sin * v));
                    }
                }
                if count(out, d) > cap {
                    bail!(Capacity, "sigma-net exceeds max_points = {cap}");
                }
            }
        }
    }
    Ok(())
}

impl SphereNet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The requested fineness σ.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Angular spacing θ of the underlying grid.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Largest distance to the net seen by the construction certificate.
    pub fn certified_radius(&self) -> f64 {
        self.certified_radius
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    /// Nearest net point to `direction`; ties go to the lowest index.
    pub fn nearest(&self, direction: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, b) in self.points().enumerate() {
            let d = crate::distance(direction, b);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Maximum over `samples` uniform random directions of the distance to
    /// the net. Deterministic in `seed`.
    pub fn sampled_covering_radius(&self, samples: usize, seed: u64) -> f64 {
        let chunk = 1024;
        let chunks = samples.div_ceil(chunk);
        crate::par::map_range(chunks, |c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut dir = vec![0.0; self.dim];
            let n = chunk.min(samples - c * chunk);
            (0..n)
                .map(|_| {
                    sample_unit_vector(&mut rng, &mut dir);
                    self.nearest(&dir).1
                })
                .fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Fills `out` with a direction uniform on the unit sphere.
pub fn sample_unit_vector<R: rand::Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        for v in out.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        let n = crate::norm(out);
        if n > 1e-300 {
            out.iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}
