//! Hermite collocation: expand `y ≈ Σ wₙ H̃ₙ`, enforce a linear operator
//! equation at Hermite roots, append boundary rows, and solve for the weights
//! in the least-squares sense.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hermite::{eval_basis, eval_derivative_basis, eval_second_derivative_basis, hermite_roots, MAX_DEGREE};
use crate::problems::{Problem, ProblemKind, WaveModel};

/// Systems whose condition estimate exceeds this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// A point on the line or in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Line(f64),
    Plane(f64, f64),
}

impl Point {
    fn dim(&self) -> Dim {
        match self {
            Point::Line(_) => Dim::One,
            Point::Plane(..) => Dim::Two,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Two,
}

/// Affine change of variable `s = (x − center) · scale` from physical
/// coordinates to the natural Hermite coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisMap {
    pub center: f64,
    pub scale: f64,
}

impl AxisMap {
    pub const IDENTITY: AxisMap = AxisMap { center: 0.0, scale: 1.0 };

    /// Map that spreads `roots` over `[lo, hi]`, keeping half a mean node
    /// spacing clear of each end (the layout of cell centres).
    pub fn fit_roots(roots: &[f64], lo: f64, hi: f64) -> Self {
        let n = roots.len();
        let center = 0.5 * (lo + hi);
        if n < 2 {
            return AxisMap { center, scale: 1.0 };
        }
        let span = roots[n - 1] - roots[0];
        let target = (hi - lo) * (1.0 - 1.0 / n as f64);
        AxisMap { center, scale: span / target }
    }

    pub fn to_natural(&self, x: f64) -> f64 {
        (x - self.center) * self.scale
    }

    pub fn to_physical(&self, s: f64) -> f64 {
        self.center + s / self.scale
    }
}

/// A Dirichlet-type condition `y(point) = value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub point: Point,
    pub value: f64,
}

/// Hermite-root collocation nodes in physical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    pub dim: Dim,
    pub map: AxisMap,
    /// Roots of `H_{M+1}`, mapped and ascending.
    pub nodes_1d: Vec<f64>,
    /// Tensor square of `nodes_1d` (x-major); empty in 1D.
    pub nodes_2d: Vec<(f64, f64)>,
    pub boundary: Vec<BoundaryCondition>,
}

impl CollocationGrid {
    pub fn interior_points(&self) -> Vec<Point> {
        match self.dim {
            Dim::One => self.nodes_1d.iter().map(|&x| Point::Line(x)).collect(),
            Dim::Two => self.nodes_2d.iter().map(|&(x, y)| Point::Plane(x, y)).collect(),
        }
    }

    pub fn boundary_points(&self) -> Vec<Point> {
        self.boundary.iter().map(|b| b.point).collect()
    }

    pub fn boundary_values(&self) -> Vec<f64> {
        self.boundary.iter().map(|b| b.value).collect()
    }
}

/// Nodes at the roots of `H_{M+1}` in natural coordinates.
pub fn build_grid(basis_size: usize, dim: Dim, boundary: Vec<BoundaryCondition>) -> Result<CollocationGrid> {
    build_mapped_grid(basis_size, dim, AxisMap::IDENTITY, boundary)
}

/// Like [`build_grid`] but with nodes placed through `map`.
pub fn build_mapped_grid(
    basis_size: usize,
    dim: Dim,
    map: AxisMap,
    boundary: Vec<BoundaryCondition>,
) -> Result<CollocationGrid> {
    if !(1..MAX_DEGREE).contains(&basis_size) {
        return Err(Error::config(format!("basis size must lie in 1..{MAX_DEGREE}, got {basis_size}")));
    }
    if !(map.scale.is_finite() && map.scale > 0.0) {
        return Err(Error::config("axis map scale must be positive"));
    }
    let nodes_1d: Vec<f64> = hermite_roots(basis_size + 1)?.into_iter().map(|s| map.to_physical(s)).collect();
    let nodes_2d = match dim {
        Dim::One => Vec::new(),
        Dim::Two => nodes_1d.iter().flat_map(|&x| nodes_1d.iter().map(move |&y| (x, y))).collect(),
    };
    let grid = CollocationGrid { dim, map, nodes_1d, nodes_2d, boundary };

    let interior = grid.interior_points();
    for b in &grid.boundary {
        if b.point.dim() != dim {
            return Err(Error::config("boundary point dimension does not match the grid"));
        }
        if interior.contains(&b.point) {
            return Err(Error::config(format!("boundary point {:?} coincides with a collocation node", b.point)));
        }
    }
    Ok(grid)
}

/// Tensor grid of mapped Hermite roots that fills a box problem's domain, or
/// the plain roots for the oscillator.
pub fn problem_grid(problem: &Problem, basis_size: usize) -> Result<CollocationGrid> {
    let map = problem_axis_map(problem, basis_size)?;
    build_mapped_grid(basis_size, Dim::Two, map, Vec::new())
}

/// The affine map used to place training and collocation nodes for `problem`.
pub fn problem_axis_map(problem: &Problem, basis_size: usize) -> Result<AxisMap> {
    match problem.kind {
        ProblemKind::Oscillator => Ok(AxisMap::IDENTITY),
        ProblemKind::Box => {
            let roots = hermite_roots(basis_size + 1)?;
            let d = problem.domain;
            Ok(AxisMap::fit_roots(&roots, d.x_min, d.x_max))
        }
    }
}

/// Natural-coordinate half-width that box domains are squeezed into before
/// expanding in Hermite functions. Wider windows force the expansion to track
/// `e^{s²/2}` growth and lose accuracy; narrower ones lose conditioning.
pub const BOX_BASIS_HALF_WIDTH: f64 = 1.0;

/// Coordinates in which [`solve_problem`] expands the wave function.
pub fn problem_basis_map(problem: &Problem) -> AxisMap {
    match problem.kind {
        ProblemKind::Oscillator => AxisMap::IDENTITY,
        ProblemKind::Box => {
            let d = problem.domain;
            AxisMap { center: 0.5 * (d.x_min + d.x_max), scale: 2.0 * BOX_BASIS_HALF_WIDTH / (d.x_max - d.x_min) }
        }
    }
}

/// Coefficient function of a linear operator.
#[derive(Clone)]
pub enum Coefficient {
    Zero,
    Constant(f64),
    Function(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

impl Coefficient {
    fn at(&self, p: Point) -> f64 {
        match self {
            Coefficient::Zero => 0.0,
            Coefficient::Constant(c) => *c,
            Coefficient::Function(f) => f(p),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Zero)
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Zero => write!(f, "Zero"),
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// `c₀ u + c_x ∂ₓu + c_y ∂ᵧu + c₂ ∇²u`. In 1D, `∇²u = u″` and `c_y` is unused.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    pub value: Coefficient,
    pub dx: Coefficient,
    pub dy: Coefficient,
    pub laplacian: Coefficient,
}

impl LinearOperator {
    pub fn identity() -> Self {
        Self {
            value: Coefficient::Constant(1.0),
            dx: Coefficient::Zero,
            dy: Coefficient::Zero,
            laplacian: Coefficient::Zero,
        }
    }

    /// `u″` (or `∇²u` in 2D).
    pub fn second_derivative() -> Self {
        Self {
            value: Coefficient::Zero,
            dx: Coefficient::Zero,
            dy: Coefficient::Zero,
            laplacian: Coefficient::Constant(1.0),
        }
    }

    /// `−(ħ²/2m) ∇² + V − E` for the problem's reference energy.
    pub fn schrodinger(problem: &Problem) -> Self {
        let p = problem.clone();
        let energy = problem.energy();
        Self {
            value: Coefficient::Function(Arc::new(move |pt| match pt {
                Point::Plane(x, y) => p.potential(x, y) - energy,
                Point::Line(x) => p.potential(x, 0.0) - energy,
            })),
            dx: Coefficient::Zero,
            dy: Coefficient::Zero,
            laplacian: Coefficient::Constant(-problem.kinetic_factor()),
        }
    }
}

/// Dense collocation system `A W = b`: operator rows first, then boundary rows.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub interior_rows: usize,
    pub dim: Dim,
    pub degree: usize,
    pub map: AxisMap,
}

/// Per-axis basis values and derivatives in physical coordinates.
struct AxisBasis {
    value: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl AxisBasis {
    fn at(degree: usize, map: &AxisMap, x: f64) -> Self {
        let s = map.to_natural(x);
        let k = map.scale;
        Self {
            value: eval_basis(degree, s),
            first: eval_derivative_basis(degree, s).into_iter().map(|d| d * k).collect(),
            second: eval_second_derivative_basis(degree, s).into_iter().map(|d| d * k * k).collect(),
        }
    }
}

fn n_columns(dim: Dim, degree: usize) -> usize {
    match dim {
        Dim::One => degree + 1,
        Dim::Two => (degree + 1) * (degree + 1),
    }
}

fn operator_row(op: &LinearOperator, p: Point, degree: usize, map: &AxisMap) -> Vec<f64> {
    let c0 = op.value.at(p);
    let cx = op.dx.at(p);
    let c2 = op.laplacian.at(p);
    match p {
        Point::Line(x) => {
            let b = AxisBasis::at(degree, map, x);
            (0..=degree).map(|n| c0 * b.value[n] + cx * b.first[n] + c2 * b.second[n]).collect()
        }
        Point::Plane(x, y) => {
            let cy = op.dy.at(p);
            let bx = AxisBasis::at(degree, map, x);
            let by = AxisBasis::at(degree, map, y);
            let mut row = Vec::with_capacity(n_columns(Dim::Two, degree));
            for n in 0..=degree {
                for m in 0..=degree {
                    let u = bx.value[n] * by.value[m];
                    let ux = bx.first[n] * by.value[m];
                    let uy = bx.value[n] * by.first[m];
                    let lap = bx.second[n] * by.value[m] + bx.value[n] * by.second[m];
                    row.push(c0 * u + cx * ux + cy * uy + c2 * lap);
                }
            }
            row
        }
    }
}

fn value_row(p: Point, degree: usize, map: &AxisMap) -> Vec<f64> {
    match p {
        Point::Line(x) => eval_basis(degree, map.to_natural(x)),
        Point::Plane(x, y) => {
            let bx = eval_basis(degree, map.to_natural(x));
            let by = eval_basis(degree, map.to_natural(y));
            bx.iter().flat_map(|&a| by.iter().map(move |&b| a * b)).collect()
        }
    }
}

/// Build the collocation matrix for `L y = f` at the grid's nodes, followed by
/// one value row per boundary condition carrying `boundary_values`.
pub fn assemble_system(
    op: &LinearOperator,
    grid: &CollocationGrid,
    degree: usize,
    source: impl Fn(Point) -> f64,
    boundary_values: &[f64],
) -> Result<LinearSystem> {
    assemble_system_with_basis(op, grid, degree, grid.map, source, boundary_values)
}

/// [`assemble_system`] with the expansion expressed in coordinates given by
/// `basis_map` rather than the map that placed the nodes.
pub fn assemble_system_with_basis(
    op: &LinearOperator,
    grid: &CollocationGrid,
    degree: usize,
    basis_map: AxisMap,
    source: impl Fn(Point) -> f64,
    boundary_values: &[f64],
) -> Result<LinearSystem> {
    if boundary_values.len() != grid.boundary.len() {
        return Err(Error::config(format!(
            "{} boundary values supplied for {} boundary points",
            boundary_values.len(),
            grid.boundary.len()
        )));
    }
    if grid.dim == Dim::One && !op.dy.is_zero() {
        return Err(Error::config("y-derivative coefficient given for a 1D grid"));
    }
    let interior = grid.interior_points();
    let cols = n_columns(grid.dim, degree);
    let rows = interior.len() + grid.boundary.len();
    let mut matrix = DMatrix::zeros(rows, cols);
    let mut rhs = DVector::zeros(rows);

    for (i, &p) in interior.iter().enumerate() {
        for (j, v) in operator_row(op, p, degree, &basis_map).into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
        rhs[i] = source(p);
    }
    for (k, (b, &alpha)) in grid.boundary.iter().zip(boundary_values).enumerate() {
        let i = interior.len() + k;
        for (j, v) in value_row(b.point, degree, &basis_map).into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
        rhs[i] = alpha;
    }

    if matrix.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("collocation system has non-finite entries".into()));
    }
    Ok(LinearSystem { matrix, rhs, interior_rows: interior.len(), dim: grid.dim, degree, map: basis_map })
}

/// Least-squares solution of a collocation system.
#[derive(Debug, Clone)]
pub struct Solution {
    pub expansion: HermiteExpansion,
    /// `‖A W − b‖₂`.
    pub residual_norm: f64,
    /// Ratio of extreme singular values of `A`.
    pub condition: f64,
}

impl Solution {
    pub fn weights(&self) -> &[f64] {
        &self.expansion.weights
    }
}

/// Minimise `‖A W − b‖₂` by Householder QR; rejects systems with a condition
/// estimate above [`CONDITION_LIMIT`].
pub fn solve_weights(system: &LinearSystem) -> Result<Solution> {
    let a = &system.matrix;
    let (rows, cols) = a.shape();
    if rows < cols {
        return Err(Error::config(format!("underdetermined system: {rows} rows for {cols} unknowns")));
    }
    let singular = a.clone().singular_values();
    let (smax, smin) = singular.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::RankDeficient { condition, limit: CONDITION_LIMIT });
    }

    let qr = a.clone().qr();
    let qtb = qr.q().transpose() * &system.rhs;
    let w = qr.r().solve_upper_triangular(&qtb).ok_or(Error::RankDeficient { condition, limit: CONDITION_LIMIT })?;
    let residual_norm = (a * &w - &system.rhs).norm();

    Ok(Solution {
        expansion: HermiteExpansion {
            weights: w.iter().copied().collect(),
            degree: system.degree,
            dim: system.dim,
            map: system.map,
        },
        residual_norm,
        condition,
    })
}

/// `Σ wₙ H̃ₙ(s)` in 1D or `Σ wₙₘ H̃ₙ(s_x) H̃ₘ(s_y)` in 2D, with `s` the mapped coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    pub weights: Vec<f64>,
    pub degree: usize,
    pub dim: Dim,
    pub map: AxisMap,
}

impl HermiteExpansion {
    pub fn new(weights: Vec<f64>, dim: Dim, map: AxisMap) -> Result<Self> {
        let degree = match dim {
            Dim::One => weights.len().checked_sub(1),
            Dim::Two => {
                let side = (weights.len() as f64).sqrt().round() as usize;
                (side * side == weights.len()).then(|| side.wrapping_sub(1)).filter(|_| side > 0)
            }
        }
        .ok_or_else(|| Error::config(format!("{} weights do not form a {dim:?} expansion", weights.len())))?;
        Ok(Self { weights, degree, dim, map })
    }

    pub fn eval(&self, p: Point) -> Result<f64> {
        if p.dim() != self.dim {
            return Err(Error::config("point dimension does not match the expansion"));
        }
        let row = value_row(p, self.degree, &self.map);
        Ok(row.iter().zip(&self.weights).map(|(a, w)| a * w).sum())
    }

    /// Apply a linear operator to the expansion at one point.
    pub fn apply(&self, op: &LinearOperator, p: Point) -> f64 {
        let row = operator_row(op, p, self.degree, &self.map);
        row.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }
}

impl WaveModel for HermiteExpansion {
    fn value(&self, x: f64, y: f64) -> f64 {
        let row = value_row(Point::Plane(x, y), self.degree, &self.map);
        row.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    fn laplacian(&self, x: f64, y: f64) -> Option<f64> {
        (self.dim == Dim::Two).then(|| self.apply(&LinearOperator::second_derivative(), Point::Plane(x, y)))
    }
}

/// Evaluate an unmapped expansion: 1D for `Point::Line`, tensor-product for `Point::Plane`.
pub fn evaluate_expansion(weights: &[f64], p: Point) -> Result<f64> {
    HermiteExpansion::new(weights.to_vec(), p.dim(), AxisMap::IDENTITY)?.eval(p)
}

/// A point near the domain centre that is not a collocation node.
fn pin_point(grid: &CollocationGrid, center: (f64, f64)) -> Point {
    let (cx, cy) = center;
    let on_node = grid.nodes_1d.iter().any(|&x| (x - cx).abs() < 1e-12);
    if !on_node {
        return Point::Plane(cx, cy);
    }
    let next = grid.nodes_1d.iter().copied().find(|&x| x > cx + 1e-12).unwrap_or(cx + 1.0);
    Point::Plane(0.5 * (cx + next), cy)
}

/// Collocate the problem's Schrödinger operator on its Hermite grid.
///
/// The eigen-equation is homogeneous, so one extra row pins the value at a
/// point near the centre to the analytic reference. Box problems add zero
/// Dirichlet rows at the projections of the 1D nodes onto the walls and at
/// the corners.
pub fn solve_problem(problem: &Problem, basis_size: usize, degree: usize) -> Result<Solution> {
    let basis_map = problem_basis_map(problem);
    let mut grid = problem_grid(problem, basis_size)?;
    let d = problem.domain;
    let mut boundary = Vec::new();
    if problem.kind == ProblemKind::Box {
        for &t in &grid.nodes_1d {
            for p in
                [Point::Plane(t, d.y_min), Point::Plane(t, d.y_max), Point::Plane(d.x_min, t), Point::Plane(d.x_max, t)]
            {
                boundary.push(BoundaryCondition { point: p, value: 0.0 });
            }
        }
        for (x, y) in [(d.x_min, d.y_min), (d.x_min, d.y_max), (d.x_max, d.y_min), (d.x_max, d.y_max)] {
            boundary.push(BoundaryCondition { point: Point::Plane(x, y), value: 0.0 });
        }
    }
    let pin = pin_point(&grid, d.center());
    let Point::Plane(px, py) = pin else { unreachable!() };
    boundary.push(BoundaryCondition { point: pin, value: problem.analytic_psi(px, py) });
    grid.boundary = boundary;

    let op = LinearOperator::schrodinger(problem);
    let alpha = grid.boundary_values();
    let system = assemble_system_with_basis(&op, &grid, degree, basis_map, |_| 0.0, &alpha)?;
    solve_weights(&system)
}
