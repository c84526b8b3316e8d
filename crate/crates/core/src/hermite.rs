//! Normalized Hermite functions `H̃ₙ(x) = (2ⁿ n!)^{-1/2} e^{-x²/2} Hₙ(x)`.
//!
//! Everything here runs the three-term recurrence on the normalized functions
//! themselves, so values stay bounded for every degree up to [`MAX_DEGREE`]
//! instead of overflowing the way raw `Hₙ` does. The family is orthogonal on
//! the real line with `∫ H̃ₙ H̃ₘ = √π δₙₘ`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest degree for which roots and quadrature weights are offered.
pub const MAX_DEGREE: usize = 64;

/// Values `H̃₀(x) ..= H̃_N(x)`.
pub fn eval_basis(max_degree: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_degree + 1);
    let h0 = (-0.5 * x * x).exp();
    out.push(h0);
    if max_degree == 0 {
        return out;
    }
    out.push(SQRT_2 * x * h0);
    for n in 1..max_degree {
        let nf = n as f64;
        let next = x * (2.0 / (nf + 1.0)).sqrt() * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// First derivatives `H̃′₀(x) ..= H̃′_N(x)` via `H̃′ₙ = √(2n) H̃ₙ₋₁ − x H̃ₙ`.
pub fn eval_derivative_basis(max_degree: usize, x: f64) -> Vec<f64> {
    let values = eval_basis(max_degree, x);
    derivatives_from_values(&values, x)
}

fn derivatives_from_values(values: &[f64], x: f64) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(n, &h)| {
            let lower = if n == 0 { 0.0 } else { (2.0 * n as f64).sqrt() * values[n - 1] };
            lower - x * h
        })
        .collect()
}

/// Second derivatives, from applying the first-derivative identity twice:
/// `H̃″ₙ = √(2n) H̃′ₙ₋₁ − H̃ₙ − x H̃′ₙ`.
pub fn eval_second_derivative_basis(max_degree: usize, x: f64) -> Vec<f64> {
    let values = eval_basis(max_degree, x);
    let first = derivatives_from_values(&values, x);
    (0..=max_degree)
        .map(|n| {
            let lower = if n == 0 { 0.0 } else { (2.0 * n as f64).sqrt() * first[n - 1] };
            lower - values[n] - x * first[n]
        })
        .collect()
}

/// `(H̃_d(x), H̃′_d(x))` for a single degree.
pub fn hermite_value_and_derivative(degree: usize, x: f64) -> (f64, f64) {
    let h0 = (-0.5 * x * x).exp();
    if degree == 0 {
        return (h0, -x * h0);
    }
    let (mut prev, mut cur) = (h0, SQRT_2 * x * h0);
    for n in 1..degree {
        let nf = n as f64;
        let next = x * (2.0 / (nf + 1.0)).sqrt() * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, (2.0 * degree as f64).sqrt() * prev - x * cur)
}

fn check_degree(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::UnsupportedDegree { degree: n, max: MAX_DEGREE });
    }
    Ok(())
}

/// The `n` roots of `Hₙ`, ascending and exactly symmetric about zero.
///
/// Eigenvalues of the Jacobi matrix (zero diagonal, off-diagonal `√(k/2)`),
/// followed by one Newton step on `H̃ₙ`.
pub fn hermite_roots(n: usize) -> Result<Vec<f64>> {
    check_degree(n)?;
    if n == 1 {
        return Ok(vec![0.0]);
    }

    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let eigen =
        SymmetricEigen::try_new(jacobi, f64::EPSILON, 10_000).ok_or(Error::RootsDidNotConverge { degree: n })?;
    let mut roots: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    if roots.iter().any(|r| !r.is_finite()) {
        return Err(Error::RootsDidNotConverge { degree: n });
    }
    roots.sort_by(f64::total_cmp);

    for r in roots.iter_mut() {
        let (value, slope) = hermite_value_and_derivative(n, *r);
        if slope != 0.0 && slope.is_finite() {
            *r -= value / slope;
        }
    }

    // Fold onto exact ± pairs.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let half = 0.5 * (roots[j] - roots[i]);
        roots[i] = -half;
        roots[j] = half;
    }
    if n % 2 == 1 {
        roots[n / 2] = 0.0;
    }

    if roots.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::RootsDidNotConverge { degree: n });
    }
    Ok(roots)
}

/// Modified Gauss–Hermite weights `w̃ᵢ = √π / (n H̃ₙ₋₁(xᵢ)²)` for the roots of `Hₙ`.
///
/// `Σ w̃ᵢ f(xᵢ)` integrates `f = e^{-x²} p(x)` exactly for `deg p ≤ 2n − 1`,
/// which covers products `H̃ⱼ H̃ₖ` with `j + k ≤ 2n − 1`.
pub fn quad_weights(n: usize) -> Result<Vec<f64>> {
    let roots = hermite_roots(n)?;
    Ok(weights_for_roots(n, &roots))
}

fn weights_for_roots(n: usize, roots: &[f64]) -> Vec<f64> {
    let sqrt_pi = PI.sqrt();
    roots
        .iter()
        .map(|&x| {
            let (h, _) = hermite_value_and_derivative(n - 1, x);
            sqrt_pi / (n as f64 * h * h)
        })
        .collect()
}

/// Closed form of `∫ H̃′ₙ H̃′ₘ dx`.
pub fn deriv_inner_product(n: usize, m: usize) -> f64 {
    let sqrt_pi = PI.sqrt();
    let nf = n as f64;
    if m == n {
        (nf + 0.5) * sqrt_pi
    } else if n >= 2 && m == n - 2 {
        -(nf * PI * (nf - 1.0)).sqrt() / 2.0
    } else if m == n + 2 {
        -(PI * (nf + 1.0) * (nf + 2.0)).sqrt() / 2.0
    } else {
        0.0
    }
}

/// Hermite functions up to a fixed degree together with cached roots and
/// quadrature weights for every degree `1..=max_degree`.
///
/// The span of `H̃₀ ..= H̃_N` is the set of functions `e^{-x²/2} ν(x)` with
/// `ν` a polynomial of degree at most `N`.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    max_degree: usize,
    roots: BTreeMap<usize, Vec<f64>>,
    weights: BTreeMap<usize, Vec<f64>>,
}

impl HermiteBasis {
    pub fn new(max_degree: usize) -> Result<Self> {
        if max_degree > MAX_DEGREE {
            return Err(Error::UnsupportedDegree { degree: max_degree, max: MAX_DEGREE });
        }
        let mut roots = BTreeMap::new();
        let mut weights = BTreeMap::new();
        for n in 1..=max_degree {
            let r = hermite_roots(n)?;
            weights.insert(n, weights_for_roots(n, &r));
            roots.insert(n, r);
        }
        Ok(Self { max_degree, roots, weights })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn values(&self, x: f64) -> Vec<f64> {
        eval_basis(self.max_degree, x)
    }

    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        eval_derivative_basis(self.max_degree, x)
    }

    /// Cached roots of `Hₙ`, or `None` if `n` is 0 or above `max_degree`.
    pub fn roots(&self, n: usize) -> Option<&[f64]> {
        self.roots.get(&n).map(Vec::as_slice)
    }

    pub fn weights(&self, n: usize) -> Option<&[f64]> {
        self.weights.get(&n).map(Vec::as_slice)
    }

    /// `Σ w̃ᵢ f(xᵢ)` on the `n`-point rule.
    pub fn integrate(&self, n: usize, f: impl Fn(f64) -> f64) -> Option<f64> {
        let roots = self.roots(n)?;
        let weights = self.weights(n)?;
        Some(roots.iter().zip(weights).map(|(&x, &w)| w * f(x)).sum())
    }
}
