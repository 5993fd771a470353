//! Image ensembles, sections and funnel clouds of the finite input family,
//! Hausdorff distances between finite sets, and the checks that compare the
//! approximation with the true image set.
//!
//! Two metrics are used. Sections and funnel clouds are finite subsets of
//! `ℝⁿ` and `ℝ^{b+n}` with the Euclidean distance. Whole images are compared
//! in the sup norm over the grid of E-representatives.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::domain::{
    make_box_partition, make_magnitude_grid, make_sphere_net, sample_unit_vector, AxisBox, MagnitudeGrid,
    Partition, SphereNet,
};
use crate::error::{bail, Result};
use crate::inputs::{
    cell_average, cell_cost, project_directions, project_magnitudes, truncate_to_gamma, InputFamily,
    PiecewiseConstantInput, SampledInput,
};
use crate::kernel::{alpha_star, beta_star, BallSpec, KernelSpec, ParameterBudget};
use crate::operator::{ImageFunction, Operator, Rule};
use crate::PointSet;

/// Points closer than this are merged when forming sections.
pub const SECTION_DEDUP_TOL: f64 = 1e-12;

/// Relative slack for floating-point rounding in the bound checks.
pub const ROUNDING_RTOL: f64 = 1e-12;

/// Largest cell-integral table (entries) built for an ensemble; beyond it
/// images are evaluated directly.
pub const MAX_TABLE_ENTRIES: usize = 1 << 24;

/// Requested resolution of the discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Resolution {
    /// Magnitude cap γ.
    pub gamma: f64,
    /// Δ for both the Ω- and the E-partition.
    pub partition_delta: f64,
    /// Requested magnitude step δ.
    pub magnitude_step: f64,
    /// Net fineness σ.
    pub sigma: f64,
}

/// Size limits for the finite structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Caps {
    pub max_cells: usize,
    pub max_net_points: usize,
    pub max_inputs: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_cells: 1 << 16,
            max_net_points: 1 << 16,
            max_inputs: 2_000_000,
        }
    }
}

/// The realized discretization parameters attached to every ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Provenance {
    pub gamma: f64,
    pub partition_delta: f64,
    pub omega_max_diameter: f64,
    pub e_max_diameter: f64,
    pub magnitude_step: f64,
    pub sigma: f64,
    pub net_covering_radius: f64,
    pub p: f64,
    pub r: f64,
    /// `M`, number of Ω-cells.
    pub omega_cells: usize,
    /// `N`, number of E-cells.
    pub e_cells: usize,
    pub q: usize,
    /// `g`, number of net points.
    pub g: usize,
}

/// Partitions, magnitude grid and net for one run.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub omega: Partition,
    pub e: Partition,
    pub grid: MagnitudeGrid,
    pub net: SphereNet,
    pub ball: BallSpec,
    pub resolution: Resolution,
}

impl Discretization {
    /// Builds all structures for input values in `ℝᵐ`.
    pub fn build(
        omega: &AxisBox,
        e: &AxisBox,
        ball: BallSpec,
        m: usize,
        resolution: Resolution,
        caps: &Caps,
    ) -> Result<Self> {
        let omega_p = make_box_partition(omega, resolution.partition_delta, caps.max_cells)?;
        let e_p = make_box_partition(e, resolution.partition_delta, caps.max_cells)?;
        let grid = make_magnitude_grid(resolution.gamma, resolution.magnitude_step)?;
        let net = make_sphere_net(m, resolution.sigma, caps.max_net_points)?;
        Ok(Self {
            omega: omega_p,
            e: e_p,
            grid,
            net,
            ball,
            resolution,
        })
    }

    pub fn family(&self) -> InputFamily {
        InputFamily::new(&self.omega, &self.grid, &self.net, &self.ball)
    }

    /// E-cell representatives, the grid on which images are sampled.
    pub fn xi_grid(&self) -> PointSet {
        self.e.representatives()
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            gamma: self.grid.gamma(),
            partition_delta: self.resolution.partition_delta,
            omega_max_diameter: self.omega.max_diameter(),
            e_max_diameter: self.e.max_diameter(),
            magnitude_step: self.grid.delta(),
            sigma: self.net.sigma(),
            net_covering_radius: self.net.certified_radius(),
            p: self.ball.p(),
            r: self.ball.r(),
            omega_cells: self.omega.len(),
            e_cells: self.e.len(),
            q: self.grid.q(),
            g: self.net.len(),
        }
    }
}

/// Images of a list of inputs on a shared ξ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageEnsemble {
    grid: PointSet,
    dim: usize,
    images: Vec<ImageFunction>,
    provenance: Option<Provenance>,
}

impl ImageEnsemble {
    /// Wraps precomputed images.
    pub fn from_images(grid: PointSet, images: Vec<ImageFunction>) -> Result<Self> {
        let Some(first) = images.first() else {
            bail!(Argument, "an ensemble needs at least one image");
        };
        let dim = first.dim();
        if images.iter().any(|y| y.dim() != dim || y.len() != grid.len()) {
            bail!(Argument, "images must share the output dimension and the grid length");
        }
        Ok(Self {
            grid,
            dim,
            images,
            provenance: None,
        })
    }

    /// Images of arbitrary piecewise-constant inputs over `op`'s partition.
    /// Input ids are positions in `inputs`.
    pub fn from_sampled(op: &Operator, inputs: &[SampledInput], xi_grid: &PointSet) -> Result<Self> {
        if inputs.is_empty() {
            bail!(Argument, "input list is empty");
        }
        let images = crate::par::map_range(inputs.len(), |i| op.sample_image(&inputs[i], xi_grid, i));
        Self::from_images(xi_grid.clone(), images.into_iter().collect::<Result<_>>()?)
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn grid(&self) -> &PointSet {
        &self.grid
    }

    /// Output dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[ImageFunction] {
        &self.images
    }

    pub fn image(&self, i: usize) -> &ImageFunction {
        &self.images[i]
    }

    /// Largest quadrature error estimate over the ensemble.
    pub fn max_quad_error(&self) -> f64 {
        self.images.iter().map(|y| y.quad_error_estimate).fold(0.0, f64::max)
    }
}

/// Cell integrals for every (ξ, cell, distinct cell value), both rules.
struct CellTable {
    cells: usize,
    values: usize,
    n: usize,
    primary: Vec<f64>,
    reference: Vec<f64>,
}

impl CellTable {
    fn build(op: &Operator, disc: &Discretization, xi_grid: &PointSet) -> Self {
        let (cells, g, q) = (disc.omega.len(), disc.net.len(), disc.grid.q());
        let values = 1 + q * g;
        let n = op.kernel().dims().output;
        let m = disc.net.dim();
        let per_xi = crate::par::map_range(xi_grid.len(), |a| {
            let xi = xi_grid.get(a);
            let mut prim = vec![0.0; cells * values * n];
            let mut refr = vec![0.0; cells * values * n];
            let mut v = vec![0.0; m];
            for j in 0..cells {
                for id in 0..values {
                    let (l, i) = if id == 0 { (0, 0) } else { (1 + (id - 1) / g, (id - 1) % g) };
                    let w = disc.grid.value(l);
                    v.iter_mut().zip(disc.net.point(i)).for_each(|(o, b)| *o = w * b);
                    let at = (j * values + id) * n;
                    op.cell_integral(Rule::Primary, xi, j, &v, &mut prim[at..at + n]);
                    op.cell_integral(Rule::Reference, xi, j, &v, &mut refr[at..at + n]);
                }
            }
            (prim, refr)
        });
        let mut primary = Vec::with_capacity(xi_grid.len() * cells * values * n);
        let mut reference = Vec::with_capacity(primary.capacity());
        for (p, r) in per_xi {
            primary.extend(p);
            reference.extend(r);
        }
        Self {
            cells,
            values,
            n,
            primary,
            reference,
        }
    }

    fn image(&self, x: &PiecewiseConstantInput, g: usize, xi_count: usize, input_id: usize) -> ImageFunction {
        let n = self.n;
        let mut values = vec![0.0; xi_count * n];
        let mut fine = vec![0.0; n];
        let mut err = 0.0f64;
        for (a, out) in values.chunks_exact_mut(n).enumerate() {
            fine.fill(0.0);
            for (j, l, i) in x.triples() {
                let id = if l == 0 { 0 } else { 1 + (l - 1) * g + i };
                let at = ((a * self.cells + j) * self.values + id) * n;
                out.iter_mut().zip(&self.primary[at..at + n]).for_each(|(o, c)| *o += c);
                fine.iter_mut().zip(&self.reference[at..at + n]).for_each(|(o, c)| *o += c);
            }
            err = err.max(crate::distance(out, &fine));
        }
        ImageFunction::new(input_id, n, values, err)
    }
}

/// Images of enumerated inputs on the E-representatives of `disc`.
///
/// Cell integrals are tabulated once per distinct cell value; the result is
/// bit-identical to evaluating each input directly.
pub fn build_image_ensemble(
    op: &Operator,
    disc: &Discretization,
    inputs: &[PiecewiseConstantInput],
) -> Result<ImageEnsemble> {
    if inputs.is_empty() {
        bail!(Argument, "input list is empty");
    }
    if op.partition().len() != disc.omega.len() || op.kernel().dims().input != disc.net.dim() {
        bail!(Argument, "operator partition or kernel input dimension does not match the discretization");
    }
    if let Some(bad) = inputs.iter().position(|x| x.cells() != disc.omega.len()) {
        bail!(Argument, "input {bad} does not have one index per Omega-cell");
    }
    let xi_grid = disc.xi_grid();
    let (cells, g) = (disc.omega.len(), disc.net.len());
    let entries = xi_grid.len() * cells * (1 + disc.grid.q() * g);
    let images = if entries <= MAX_TABLE_ENTRIES {
        let table = CellTable::build(op, disc, &xi_grid);
        crate::par::map_range(inputs.len(), |i| table.image(&inputs[i], g, xi_grid.len(), i))
    } else {
        let sampled = crate::par::map_range(inputs.len(), |i| {
            op.sample_image(&inputs[i].to_sampled(&disc.grid, &disc.net), &xi_grid, i)
        });
        sampled.into_iter().collect::<Result<_>>()?
    };
    Ok(ImageEnsemble::from_images(xi_grid, images)?.with_provenance(disc.provenance()))
}

/// Distinct values of an ensemble at one grid point, sorted
/// lexicographically, each tagged with the smallest input id producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub points: PointSet,
    pub input_ids: Vec<usize>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// The section of the ensemble at grid index `i`, with points closer than
/// [`SECTION_DEDUP_TOL`] merged.
pub fn section(ensemble: &ImageEnsemble, i: usize) -> Result<Section> {
    if i >= ensemble.grid.len() {
        bail!(Argument, "grid index {i} out of range (grid has {} points)", ensemble.grid.len());
    }
    let mut order: Vec<usize> = (0..ensemble.len()).collect();
    order.sort_by(|&a, &b| {
        lex_cmp(ensemble.images[a].value(i), ensemble.images[b].value(i)).then(a.cmp(&b))
    });
    let n = ensemble.dim;
    let mut points = PointSet::new(n);
    let mut ids: Vec<usize> = Vec::new();
    for k in order {
        let y = ensemble.images[k].value(i);
        let id = ensemble.images[k].input_id;
        // kept points are sorted by first coordinate; only a short tail can be close
        let mut merged = false;
        for j in (0..points.len()).rev() {
            let z = points.get(j);
            if y[0] - z[0] > SECTION_DEDUP_TOL {
                break;
            }
            if crate::distance(y, z) <= SECTION_DEDUP_TOL {
                ids[j] = ids[j].min(id);
                merged = true;
                break;
            }
        }
        if !merged {
            points.push(y);
            ids.push(id);
        }
    }
    Ok(Section {
        points,
        input_ids: ids,
    })
}

/// Finite approximation of the integral funnel: points `(ξ_i, y)` in
/// `ℝ^{b+n}` for each grid point and each section value.
#[derive(Debug, Clone, PartialEq)]
pub struct FunnelCloud {
    pub xi_dim: usize,
    pub y_dim: usize,
    pub points: PointSet,
    pub input_ids: Vec<usize>,
    pub provenance: Option<Provenance>,
}

impl FunnelCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Assembles the funnel cloud; grid points in E-cell order, section values
/// in lexicographic order.
pub fn build_funnel(ensemble: &ImageEnsemble, e_partition: &Partition) -> Result<FunnelCloud> {
    let reps = e_partition.representatives();
    if reps != ensemble.grid {
        bail!(Argument, "ensemble grid differs from the E-partition representatives");
    }
    let (b, n) = (reps.dim(), ensemble.dim);
    let mut points = PointSet::new(b + n);
    let mut input_ids = Vec::new();
    let mut row = vec![0.0; b + n];
    for i in 0..reps.len() {
        row[..b].copy_from_slice(reps.get(i));
        let s = section(ensemble, i)?;
        for (y, id) in s.points.iter().zip(s.input_ids) {
            row[b..].copy_from_slice(y);
            points.push(&row);
            input_ids.push(id);
        }
    }
    Ok(FunnelCloud {
        xi_dim: b,
        y_dim: n,
        points,
        input_ids,
        provenance: ensemble.provenance,
    })
}

fn check_pair(a: &PointSet, b: &PointSet) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        bail!(Argument, "Hausdorff distance needs nonempty sets");
    }
    if a.dim() != b.dim() {
        bail!(Argument, "point sets live in R^{} and R^{}", a.dim(), b.dim());
    }
    Ok(())
}

fn nearest_distance(x: &[f64], b: &PointSet) -> f64 {
    b.iter().map(|y| crate::distance(x, y)).fold(f64::INFINITY, f64::min)
}

/// `max_{a ∈ A} min_{b ∈ B} ‖a − b‖` by brute force.
pub fn directed_hausdorff(a: &PointSet, b: &PointSet) -> Result<f64> {
    check_pair(a, b)?;
    Ok(crate::par::map_range(a.len(), |i| nearest_distance(a.get(i), b))
        .into_iter()
        .fold(0.0, f64::max))
}

/// Hausdorff distance between finite point sets.
pub fn hausdorff_finite(a: &PointSet, b: &PointSet) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// Sup-grid distance, abandoning the scan once it reaches `stop`.
fn sup_distance_until(a: &ImageFunction, b: &ImageFunction, stop: f64) -> f64 {
    let mut d = 0.0f64;
    for (x, y) in a.values().zip(b.values()) {
        d = d.max(crate::distance(x, y));
        if d >= stop {
            break;
        }
    }
    d
}

fn nearest_image(y: &ImageFunction, set: &ImageEnsemble) -> f64 {
    set.images.iter().fold(f64::INFINITY, |best, z| best.min(sup_distance_until(y, z, best)))
}

fn check_grids(w: &ImageEnsemble, y: &ImageEnsemble) -> Result<()> {
    if w.grid != y.grid || w.dim != y.dim {
        bail!(Argument, "ensembles are sampled on different grids or have different output dimensions");
    }
    Ok(())
}

/// Directed distance from `w` to `y` under `max_i ‖w(ξ_i) − y(ξ_i)‖`.
pub fn directed_sup_grid(w: &ImageEnsemble, y: &ImageEnsemble) -> Result<f64> {
    check_grids(w, y)?;
    Ok(crate::par::map_range(w.len(), |i| nearest_image(&w.images[i], y))
        .into_iter()
        .fold(0.0, f64::max))
}

/// Hausdorff distance between two image sets in the sup-grid metric.
pub fn hausdorff_sup_grid(w: &ImageEnsemble, y: &ImageEnsemble) -> Result<f64> {
    Ok(directed_sup_grid(w, y)?.max(directed_sup_grid(y, w)?))
}

/// Outcome of checking one inequality over many instances.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InvariantCheck {
    pub checked: u64,
    pub violations: u64,
    /// Largest `lhs − rhs` seen (negative when every instance has slack).
    pub worst_margin: f64,
}

impl InvariantCheck {
    fn new() -> Self {
        Self {
            checked: 0,
            violations: 0,
            worst_margin: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64) {
        self.checked += 1;
        let allowed = rhs + ROUNDING_RTOL * (1.0 + rhs.abs());
        if lhs > allowed {
            self.violations += 1;
        }
        self.worst_margin = self.worst_margin.max(lhs - rhs);
    }

    fn merge(mut self, other: Self) -> Self {
        self.checked += other.checked;
        self.violations += other.violations;
        self.worst_margin = self.worst_margin.max(other.worst_margin);
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks the uniform bound `‖y(ξ_i)‖ ≤ α* + e_y` and the modulus bound
/// `‖y(ξ_i) − y(ξ_j)‖ ≤ β*·φ(‖ξ_i − ξ_j‖) + 2·e_y` for every image, where
/// `e_y` is the image's quadrature error estimate.
pub fn check_propositions(
    ensemble: &ImageEnsemble,
    kernel: &KernelSpec,
    ball: &BallSpec,
    measure_omega: f64,
) -> Result<(InvariantCheck, InvariantCheck)> {
    let alpha = alpha_star(kernel, ball, measure_omega)?;
    let beta = beta_star(kernel, ball, measure_omega)?;
    let grid = &ensemble.grid;
    let npts = grid.len();
    let mut moduli = vec![0.0; npts * npts];
    for i in 0..npts {
        for j in 0..npts {
            moduli[i * npts + j] = beta * kernel.phi.eval(crate::distance(grid.get(i), grid.get(j)));
        }
    }
    let per_image = crate::par::map_range(ensemble.len(), |k| {
        let y = &ensemble.images[k];
        let e = y.quad_error_estimate;
        let (mut p1, mut p2) = (InvariantCheck::new(), InvariantCheck::new());
        for i in 0..npts {
            p1.record(crate::norm(y.value(i)), alpha + e);
            for j in i + 1..npts {
                p2.record(crate::distance(y.value(i), y.value(j)), moduli[i * npts + j] + 2.0 * e);
            }
        }
        (p1, p2)
    });
    Ok(per_image
        .into_iter()
        .fold((InvariantCheck::new(), InvariantCheck::new()), |(a, b), (c, d)| (a.merge(c), b.merge(d))))
}

/// Random inputs of the true ball, piecewise constant on a fine partition.
///
/// Sample `i` draws a budget split `t ~ Dirichlet(1, …, 1)` over the cells, a
/// uniform direction per cell and a radius fraction `ρ ~ U[0, 1]`, and sets
/// `μ_j ‖x_j‖^p = t_j (ρ r)^p`. Each sample uses its own ChaCha stream, so
/// results do not depend on evaluation order.
#[derive(Debug, Clone)]
pub struct Sampler {
    ball: BallSpec,
    dim: usize,
    partition: Partition,
    seed: u64,
}

impl Sampler {
    pub fn new(ball: BallSpec, dim: usize, partition: Partition, seed: u64) -> Self {
        Self {
            ball,
            dim,
            partition,
            seed,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn sample(&self, i: u64) -> SampledInput {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i);
        let cells = self.partition.len();
        let p = self.ball.p();
        let weights: Vec<f64> = (0..cells).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = weights.iter().sum();
        let rho: f64 = rng.random();
        let level = (rho * self.ball.r()).powf(p);
        let mut values = vec![0.0; cells * self.dim];
        for ((chunk, w), mu) in values.chunks_exact_mut(self.dim).zip(&weights).zip(self.partition.measures()) {
            sample_unit_vector(&mut rng, chunk);
            let magnitude = (level * w / total / mu).powf(p.recip());
            chunk.iter_mut().for_each(|v| *v *= magnitude);
        }
        let mut x = SampledInput::new(self.dim, values);
        let mut scale = 1.0;
        while x.budget(&self.partition, p) > self.ball.budget() {
            scale = f64::next_down(scale);
            let v = x.as_flat().iter().map(|v| v * scale).collect();
            x = SampledInput::new(self.dim, v);
        }
        x
    }
}

/// Monte-Carlo comparison of sampled true images with the approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GapSummary {
    pub samples: usize,
    /// Sampled images to ensemble, sup-grid metric.
    pub image_gap: f64,
    pub image_hausdorff: f64,
    /// Largest over grid points of the directed distance from the sampled
    /// section to the ensemble section.
    pub section_gap: f64,
    pub section_hausdorff: f64,
    /// Sampled graph points to the funnel cloud, in `ℝ^{b+n}`.
    pub funnel_gap: f64,
    pub funnel_hausdorff: f64,
    /// Largest quadrature error estimate among the sampled images.
    pub sample_quad_error: f64,
}

/// Gaps between an ensemble of reference images (for example sampled true
/// images) and the approximating ensemble and funnel.
pub fn compare_ensembles(
    sampled: &ImageEnsemble,
    ensemble: &ImageEnsemble,
    funnel: &FunnelCloud,
    e_partition: &Partition,
) -> Result<GapSummary> {
    check_grids(sampled, ensemble)?;
    let image_gap = directed_sup_grid(sampled, ensemble)?;
    let image_hausdorff = image_gap.max(directed_sup_grid(ensemble, sampled)?);
    let (mut section_gap, mut section_hausdorff) = (0.0f64, 0.0f64);
    for i in 0..ensemble.grid.len() {
        let a = section(sampled, i)?.points;
        let b = section(ensemble, i)?.points;
        let d = directed_hausdorff(&a, &b)?;
        section_gap = section_gap.max(d);
        section_hausdorff = section_hausdorff.max(d.max(directed_hausdorff(&b, &a)?));
    }
    let sampled_funnel = build_funnel(sampled, e_partition)?;
    let funnel_gap = directed_hausdorff(&sampled_funnel.points, &funnel.points)?;
    let funnel_hausdorff = funnel_gap.max(directed_hausdorff(&funnel.points, &sampled_funnel.points)?);
    Ok(GapSummary {
        samples: sampled.len(),
        image_gap,
        image_hausdorff,
        section_gap,
        section_hausdorff,
        funnel_gap,
        funnel_hausdorff,
        sample_quad_error: sampled.max_quad_error(),
    })
}

/// Draws `n` sampler inputs and their images on `xi_grid`.
pub fn sample_images(
    op: &Operator,
    sampler: &Sampler,
    n: usize,
    xi_grid: &PointSet,
) -> Result<(Vec<SampledInput>, ImageEnsemble)> {
    if n == 0 {
        bail!(Argument, "Monte-Carlo sample count must be at least 1");
    }
    if op.partition().len() != sampler.partition.len() {
        bail!(Argument, "sampler and operator use different partitions");
    }
    let inputs = crate::par::map_range(n, |i| sampler.sample(i as u64));
    let ensemble = ImageEnsemble::from_sampled(op, &inputs, xi_grid)?;
    Ok((inputs, ensemble))
}

/// Largest, over `n_samples` random inputs of the ball on `fine_partition`,
/// sup-grid distance from the input's image to the nearest ensemble image.
pub fn monte_carlo_gap(
    kernel: &KernelSpec,
    ball: &BallSpec,
    ensemble: &ImageEnsemble,
    n_samples: usize,
    seed: u64,
    fine_partition: &Partition,
    order: usize,
) -> Result<f64> {
    let op = Operator::new(kernel.clone(), fine_partition.clone(), order)?;
    let sampler = Sampler::new(*ball, kernel.dims().input, fine_partition.clone(), seed);
    let (_, sampled) = sample_images(&op, &sampler, n_samples, &ensemble.grid)?;
    directed_sup_grid(&sampled, ensemble)
}

/// Maps an input of the ball (on a refinement of the Ω-partition) to a
/// member of the enumerated family: truncation at γ, averaging over Ω-cells,
/// magnitude projection, direction projection.
pub fn chain_projection(x: &SampledInput, fine: &Partition, disc: &Discretization) -> Result<PiecewiseConstantInput> {
    let t = truncate_to_gamma(x, disc.grid.gamma())?;
    let a = cell_average(&t, fine, &disc.omega, disc.ball.p())?;
    let m = project_magnitudes(&a, &disc.grid)?;
    project_directions(&m, &disc.grid, &disc.net)
}

/// `l₀ · ∫_Ω ‖x(s) − z(s)‖ ds` for `x` on `fine` and `z` on the Ω-partition,
/// which bounds `sup_ξ ‖U(x)(ξ) − U(z)(ξ)‖`.
pub fn chain_bound(
    l0: f64,
    x: &SampledInput,
    fine: &Partition,
    z: &SampledInput,
    parents: &[usize],
) -> f64 {
    let integral = fine
        .measures()
        .zip(x.iter())
        .zip(parents)
        .fold(0.0, |acc, ((mu, v), c)| acc + mu * crate::distance(v, z.value(*c)));
    l0 * integral
}

/// Per-sample comparison of the measured gap with the constructive chain
/// bound.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChainSummary {
    /// Largest chain bound over the samples.
    pub max_bound: f64,
    /// Samples whose image gap exceeds bound plus quadrature errors.
    pub violations: u64,
    /// Samples whose projection was not admissible (only possible through
    /// rounding in the cell average).
    pub inadmissible: u64,
    /// Largest `gap − bound − quadrature errors`.
    pub worst_margin: f64,
}

fn chain_summary(
    inputs: &[SampledInput],
    sampled: &ImageEnsemble,
    ensemble: &ImageEnsemble,
    fine: &Partition,
    disc: &Discretization,
    l0: f64,
) -> Result<ChainSummary> {
    let parents = fine.parent_map(&disc.omega)?;
    let family = disc.family();
    let per = crate::par::map_range(inputs.len(), |s| -> Result<(f64, f64, bool)> {
        let z = chain_projection(&inputs[s], fine, disc)?;
        let zs = z.to_sampled(&disc.grid, &disc.net);
        let bound = chain_bound(l0, &inputs[s], fine, &zs, &parents);
        let y = sampled.image(s);
        let gap = nearest_image(y, ensemble);
        let slack = bound + y.quad_error_estimate + ensemble.max_quad_error();
        Ok((bound, gap - slack, family.is_admissible(&z)))
    });
    let mut out = ChainSummary {
        max_bound: 0.0,
        violations: 0,
        inadmissible: 0,
        worst_margin: f64::NEG_INFINITY,
    };
    for r in per {
        let (bound, margin, admissible) = r?;
        out.max_bound = out.max_bound.max(bound);
        out.worst_margin = out.worst_margin.max(margin);
        if margin > ROUNDING_RTOL * (1.0 + bound) {
            out.violations += 1;
        }
        if !admissible {
            out.inadmissible += 1;
        }
    }
    Ok(out)
}

/// Monte-Carlo settings for [`gap_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MonteCarloOptions {
    pub samples: usize,
    pub seed: u64,
    /// Each Ω-cell is split into `refinement` pieces per axis for sampling.
    pub refinement: usize,
}

/// Everything measured about one approximation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GapReport {
    pub alpha_star: f64,
    pub beta_star: f64,
    pub proposition1: InvariantCheck,
    pub proposition2: InvariantCheck,
    /// Largest quadrature error estimate in the ensemble.
    pub quad_error: f64,
    /// `2·β*·φ(Δ_E)`: how far the sup over E can exceed the max over the
    /// representatives.
    pub coarseness: f64,
    pub monte_carlo: Option<GapSummary>,
    pub chain: Option<ChainSummary>,
    /// Target accuracy when the run was sized from a budget.
    pub epsilon: Option<f64>,
}

/// Invariant checks and, when requested, Monte-Carlo gaps and chain bounds.
pub fn gap_report(
    op: &Operator,
    disc: &Discretization,
    ensemble: &ImageEnsemble,
    funnel: &FunnelCloud,
    mc: Option<&MonteCarloOptions>,
) -> Result<GapReport> {
    let kernel = op.kernel();
    let mu = disc.omega.region().measure();
    let (p1, p2) = check_propositions(ensemble, kernel, &disc.ball, mu)?;
    let beta = beta_star(kernel, &disc.ball, mu)?;
    let (monte_carlo, chain) = match mc {
        None => (None, None),
        Some(opts) => {
            let fine = disc.omega.subdivide(opts.refinement, usize::MAX)?;
            let fine_op = op.with_partition(fine.clone())?;
            let sampler = Sampler::new(disc.ball, disc.net.dim(), fine.clone(), opts.seed);
            let (inputs, sampled) = sample_images(&fine_op, &sampler, opts.samples, &ensemble.grid)?;
            let gaps = compare_ensembles(&sampled, ensemble, funnel, &disc.e)?;
            let chain = chain_summary(&inputs, &sampled, ensemble, &fine, disc, kernel.l0)?;
            (Some(gaps), Some(chain))
        }
    };
    Ok(GapReport {
        alpha_star: alpha_star(kernel, &disc.ball, mu)?,
        beta_star: beta,
        proposition1: p1,
        proposition2: p2,
        quad_error: ensemble.max_quad_error(),
        coarseness: 2.0 * beta * kernel.phi.eval(disc.e.max_diameter()),
        monte_carlo,
        chain,
        epsilon: None,
    })
}

/// Parameters of `disc` that exceed the budget, as `name value > limit`.
pub fn budget_violations(disc: &Discretization, budget: &ParameterBudget) -> Vec<String> {
    let mut out = Vec::new();
    let checks = [
        ("Delta", disc.resolution.partition_delta, budget.partition_delta_star),
        ("delta", disc.grid.delta(), budget.delta_star),
        ("sigma", disc.net.sigma(), budget.sigma_star),
    ];
    for (name, value, limit) in checks {
        if value > limit {
            out.push(format!("{name} = {value} > {limit}"));
        }
    }
    out
}

/// [`gap_report`] for a discretization sized from a parameter budget;
/// refuses parameters coarser than the budget allows.
pub fn check_theorem_bounds(
    op: &Operator,
    disc: &Discretization,
    ensemble: &ImageEnsemble,
    funnel: &FunnelCloud,
    budget: &ParameterBudget,
    mc: Option<&MonteCarloOptions>,
) -> Result<GapReport> {
    let bad = budget_violations(disc, budget);
    if !bad.is_empty() {
        bail!(Precondition, "discretization exceeds the budget: {}", bad.join(", "));
    }
    let mut report = gap_report(op, disc, ensemble, funnel, mc)?;
    report.epsilon = Some(budget.epsilon);
    Ok(report)
}

/// Left-to-right `Σ_j μ_j w_j^p` of an enumerated input, as used for
/// admissibility.
pub fn input_budget(input: &PiecewiseConstantInput, disc: &Discretization) -> f64 {
    input
        .triples()
        .zip(disc.omega.measures())
        .fold(0.0, |acc, ((_, l, _), mu)| acc + cell_cost(mu, disc.grid.value(l), disc.ball.p()))
}
