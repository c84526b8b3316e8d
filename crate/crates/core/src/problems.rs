//! Benchmark Schrödinger problems with closed-form eigenstates.
//!
//! Two problems are provided: the isotropic 2D harmonic oscillator on a
//! truncated square and the particle in a 2D box with hard walls. Both carry
//! their analytic wave function and energy so trained models can be scored
//! against them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hermite::{eval_basis, eval_second_derivative_basis};

/// Step used by the finite-difference Laplacian.
pub const FD_STEP: f64 = 1e-3;

/// Fourth-order central second-difference weights on offsets `-2h..=2h`,
/// to be divided by `12 h²`.
pub(crate) const FD_WEIGHTS: [(f64, f64); 5] = [(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)];

/// Half-width of the oscillator's evaluation square.
pub const OSCILLATOR_HALF_WIDTH: f64 = 5.0;

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Domain {
    pub fn square(min: f64, max: f64) -> Self {
        Self { x_min: min, x_max: max, y_min: min, y_max: max }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// True when a square of half-width `margin` around the point fits inside.
    pub fn contains_with_margin(&self, x: f64, y: f64, margin: f64) -> bool {
        x - margin >= self.x_min && x + margin <= self.x_max && y - margin >= self.y_min && y + margin <= self.y_max
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }
}

/// Physical constants, with `ħ`, `m` in natural units by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub mass: f64,
    pub hbar: f64,
    pub omega: f64,
    pub v0: f64,
    pub length: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { mass: 1.0, hbar: 1.0, omega: 1.0, v0: 1.0, length: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Oscillator,
    Box,
}

/// A 2D time-independent Schrödinger eigenproblem with a known solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub kind: ProblemKind,
    pub domain: Domain,
    pub constants: Constants,
    /// Quantum numbers `(n_x, n_y)` of the reference state.
    pub modes: (usize, usize),
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::config(format!("{name} must be positive and finite, got {value}")));
    }
    Ok(())
}

/// `(n + ½) ħω`, the 1D oscillator ladder.
pub fn oscillator_energy_1d(level: usize, hbar: f64, omega: f64) -> f64 {
    (level as f64 + 0.5) * hbar * omega
}

/// Ground state of `V(x, y) = V₀ + ½ m ω² (x² + y²)` on `[-5, 5]²`.
pub fn oscillator_problem(mass: f64, hbar: f64, omega: f64, v0: f64) -> Result<Problem> {
    oscillator_state(mass, hbar, omega, v0, 0, 0)
}

/// Oscillator eigenstate `(n_x, n_y)`.
pub fn oscillator_state(mass: f64, hbar: f64, omega: f64, v0: f64, nx: usize, ny: usize) -> Result<Problem> {
    require_positive("m", mass)?;
    require_positive("hbar", hbar)?;
    require_positive("omega", omega)?;
    require_positive("v0", v0)?;
    Ok(Problem {
        kind: ProblemKind::Oscillator,
        domain: Domain::square(-OSCILLATOR_HALF_WIDTH, OSCILLATOR_HALF_WIDTH),
        constants: Constants { mass, hbar, omega, v0, length: 2.0 * OSCILLATOR_HALF_WIDTH },
        modes: (nx, ny),
    })
}

/// Particle in `[0, L]²` with `m = ħ = 1`.
pub fn box_problem(length: f64, nx: usize, ny: usize) -> Result<Problem> {
    box_problem_with_units(length, nx, ny, 1.0, 1.0)
}

pub fn box_problem_with_units(length: f64, nx: usize, ny: usize, mass: f64, hbar: f64) -> Result<Problem> {
    require_positive("L", length)?;
    require_positive("m", mass)?;
    require_positive("hbar", hbar)?;
    if nx == 0 || ny == 0 {
        return Err(Error::config("box quantum numbers must be at least 1"));
    }
    Ok(Problem {
        kind: ProblemKind::Box,
        domain: Domain::square(0.0, length),
        constants: Constants { mass, hbar, omega: 1.0, v0: 0.0, length },
        modes: (nx, ny),
    })
}

impl Problem {
    pub fn name(&self) -> &'static str {
        match self.kind {
            ProblemKind::Oscillator => "oscillator",
            ProblemKind::Box => "box",
        }
    }

    /// `√(mω/ħ)`, the inverse oscillator length.
    fn oscillator_scale(&self) -> f64 {
        let c = &self.constants;
        (c.mass * c.omega / c.hbar).sqrt()
    }

    pub fn potential(&self, x: f64, y: f64) -> f64 {
        let c = &self.constants;
        match self.kind {
            ProblemKind::Oscillator => c.v0 + 0.5 * c.mass * c.omega * c.omega * (x * x + y * y),
            ProblemKind::Box => 0.0,
        }
    }

    pub fn energy(&self) -> f64 {
        let c = &self.constants;
        let (nx, ny) = self.modes;
        match self.kind {
            ProblemKind::Oscillator => (nx + ny + 1) as f64 * c.hbar * c.omega + c.v0,
            ProblemKind::Box => {
                let n2 = (nx * nx + ny * ny) as f64;
                c.hbar * c.hbar * PI * PI * n2 / (2.0 * c.mass * c.length * c.length)
            }
        }
    }

    pub fn analytic_psi(&self, x: f64, y: f64) -> f64 {
        let (nx, ny) = self.modes;
        match self.kind {
            ProblemKind::Oscillator => {
                let s = self.oscillator_scale();
                let norm = s / PI.sqrt();
                norm * (eval_basis(nx, s * x)[nx] * eval_basis(ny, s * y)[ny])
            }
            ProblemKind::Box => {
                let l = self.constants.length;
                (2.0 / l) * (nx as f64 * PI * x / l).sin() * (ny as f64 * PI * y / l).sin()
            }
        }
    }

    /// Exact `∇²ψ` of the reference state.
    pub fn analytic_laplacian(&self, x: f64, y: f64) -> f64 {
        let (nx, ny) = self.modes;
        match self.kind {
            ProblemKind::Oscillator => {
                let s = self.oscillator_scale();
                let norm = s / PI.sqrt();
                let (u, v) = (s * x, s * y);
                let hx = eval_basis(nx, u)[nx];
                let hy = eval_basis(ny, v)[ny];
                let hxx = eval_second_derivative_basis(nx, u)[nx];
                let hyy = eval_second_derivative_basis(ny, v)[ny];
                norm * s * s * (hxx * hy + hx * hyy)
            }
            ProblemKind::Box => {
                let l = self.constants.length;
                let k2 = PI * PI * ((nx * nx + ny * ny) as f64) / (l * l);
                -k2 * self.analytic_psi(x, y)
            }
        }
    }

    /// `h₂`, the factor multiplying the raw network output.
    pub fn envelope(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            ProblemKind::Oscillator => (-0.5 * (x * x + y * y)).exp(),
            ProblemKind::Box => {
                let l = self.constants.length;
                let half = 0.5 * l;
                x * (l - x) * y * (l - y) / half.powi(4)
            }
        }
    }

    /// `h₁`, the part of the trial solution that carries boundary data.
    pub fn offset(&self, _x: f64, _y: f64) -> f64 {
        0.0
    }

    /// `ħ² / 2m`.
    pub fn kinetic_factor(&self) -> f64 {
        let c = &self.constants;
        c.hbar * c.hbar / (2.0 * c.mass)
    }

    pub fn analytic_model(&self) -> AnalyticState<'_> {
        AnalyticState(self)
    }
}

/// Something that can be evaluated as a real wave function on the plane.
pub trait WaveModel {
    fn value(&self, x: f64, y: f64) -> f64;

    /// Exact Laplacian, when the model has one.
    fn laplacian(&self, _x: f64, _y: f64) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64, f64) -> f64> WaveModel for F {
    fn value(&self, x: f64, y: f64) -> f64 {
        self(x, y)
    }
}

/// The problem's reference eigenstate as a [`WaveModel`].
#[derive(Debug, Clone, Copy)]
pub struct AnalyticState<'a>(&'a Problem);

impl WaveModel for AnalyticState<'_> {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.0.analytic_psi(x, y)
    }

    fn laplacian(&self, x: f64, y: f64) -> Option<f64> {
        Some(self.0.analytic_laplacian(x, y))
    }
}

/// How [`schrodinger_residual`] obtains the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianMode {
    /// Use [`WaveModel::laplacian`]; models without one are rejected.
    Analytic,
    /// Fourth-order central differences with step [`FD_STEP`].
    FiniteDifference,
}

/// Fourth-order central-difference Laplacian.
pub fn fd_laplacian<M: WaveModel + ?Sized>(model: &M, x: f64, y: f64) -> f64 {
    let h = FD_STEP;
    let mut acc = 0.0;
    for &(k, w) in &FD_WEIGHTS {
        acc += w * (model.value(x + k * h, y) + model.value(x, y + k * h));
    }
    acc / (12.0 * h * h)
}

/// Margin the finite-difference stencil needs around a point.
pub fn fd_margin() -> f64 {
    2.0 * FD_STEP
}

/// `−(ħ²/2m) ∇²ψ + V ψ − E ψ` at one point.
pub fn schrodinger_residual<M: WaveModel + ?Sized>(
    model: &M,
    problem: &Problem,
    x: f64,
    y: f64,
    mode: LaplacianMode,
) -> Result<f64> {
    let laplacian = match mode {
        LaplacianMode::Analytic => {
            if !problem.domain.contains(x, y) {
                return Err(Error::config(format!("point ({x}, {y}) lies outside the domain")));
            }
            model.laplacian(x, y).ok_or_else(|| Error::config("model has no analytic Laplacian"))?
        }
        LaplacianMode::FiniteDifference => {
            if !problem.domain.contains_with_margin(x, y, fd_margin()) {
                return Err(Error::config(format!("finite-difference stencil at ({x}, {y}) leaves the domain")));
            }
            fd_laplacian(model, x, y)
        }
    };
    let psi = model.value(x, y);
    Ok(-problem.kinetic_factor() * laplacian + (problem.potential(x, y) - problem.energy()) * psi)
}

/// `h₁ + h₂ · model`.
pub fn trial_solution<M: WaveModel + ?Sized>(model: &M, problem: &Problem, x: f64, y: f64) -> f64 {
    problem.offset(x, y) + problem.envelope(x, y) * model.value(x, y)
}
