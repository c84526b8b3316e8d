//! Fully connected network `(x, y) ↦ ψ̄` with explicit forward and backward
//! passes.
//!
//! Hidden layers apply a scalar activation per neuron; the output layer is
//! affine. With the Hermite activation, neuron `j` of every hidden layer uses
//! `H̃_d` with `d = j mod (D + 1)`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::hermite::hermite_value_and_derivative;

/// Standard deviation of the initial weights.
pub const INIT_STD: f64 = 0.1;

/// Default highest Hermite degree used by the activation.
pub const DEFAULT_HERMITE_DEGREE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// `H̃_d` with `d` cycling through `0..=max_degree` across a layer.
    Hermite {
        max_degree: usize,
    },
    Sigmoid,
}

impl Activation {
    /// Hermite degree assigned to neuron `j` of a hidden layer.
    pub fn degree_for(&self, neuron: usize) -> Option<usize> {
        match *self {
            Activation::Hermite { max_degree } => Some(neuron % (max_degree + 1)),
            Activation::Sigmoid => None,
        }
    }

    /// `(φ(z), φ′(z))` for neuron `j`.
    pub fn eval(&self, neuron: usize, z: f64) -> (f64, f64) {
        match self.degree_for(neuron) {
            Some(d) => hermite_activation(d, z),
            None => sigmoid(z),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Hermite { .. } => "hermite",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

/// `(H̃_d(z), H̃′_d(z))`.
pub fn hermite_activation(degree: usize, z: f64) -> (f64, f64) {
    hermite_value_and_derivative(degree, z)
}

/// `(σ(z), σ(z)(1 − σ(z)))`.
pub fn sigmoid(z: f64) -> (f64, f64) {
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    (s, s * (1.0 - s))
}

/// One affine map `z = W a + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out × in`.
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { weights: DMatrix::zeros(outputs, inputs), bias: DVector::zeros(outputs) }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }
}

/// Weights, biases and activation of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub layers: Vec<Layer>,
    pub activation: Activation,
    pub seed: u64,
}

/// Gaussian(0, [`INIT_STD`]) weights and zero biases for `arch = [2, h₁, …, 1]`.
pub fn init_params(arch: &[usize], activation: Activation, seed: u64) -> Result<NetworkParams> {
    validate_arch(arch)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, INIT_STD).expect("positive standard deviation");
    let layers = arch
        .windows(2)
        .map(|w| {
            let (inputs, outputs) = (w[0], w[1]);
            let mut layer = Layer::zeros(inputs, outputs);
            for r in 0..outputs {
                for c in 0..inputs {
                    layer.weights[(r, c)] = normal.sample(&mut rng);
                }
            }
            layer
        })
        .collect();
    Ok(NetworkParams { layers, activation, seed })
}

fn validate_arch(arch: &[usize]) -> Result<()> {
    if arch.len() < 2 {
        return Err(Error::config("architecture needs at least an input and an output layer"));
    }
    if arch[0] != 2 || arch[arch.len() - 1] != 1 {
        return Err(Error::config(format!(
            "architecture must start with 2 inputs and end with 1 output, got {arch:?}"
        )));
    }
    if arch.contains(&0) {
        return Err(Error::config("layer sizes must be positive"));
    }
    Ok(())
}

impl NetworkParams {
    /// Layer sizes, input first.
    pub fn arch(&self) -> Vec<usize> {
        let mut arch = vec![self.layers[0].inputs()];
        arch.extend(self.layers.iter().map(Layer::outputs));
        arch
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters, layer by layer: weights row-major, then biases.
    pub fn flatten(&self) -> Vec<f64> {
        flatten_layers(&self.layers)
    }

    /// Inverse of [`flatten`](Self::flatten).
    pub fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::config(format!("expected {} parameters, got {}", self.num_params(), flat.len())));
        }
        let mut it = flat.iter().copied();
        for layer in &mut self.layers {
            for r in 0..layer.outputs() {
                for c in 0..layer.inputs() {
                    layer.weights[(r, c)] = it.next().unwrap();
                }
            }
            for b in layer.bias.iter_mut() {
                *b = it.next().unwrap();
            }
        }
        Ok(())
    }

    /// Snapshot as `layer,row,col,value` lines. Biases sit in column `in`,
    /// i.e. each layer is written as the augmented matrix `[W | b]`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,row,col,value\n");
        for (l, layer) in self.layers.iter().enumerate() {
            for r in 0..layer.outputs() {
                for c in 0..layer.inputs() {
                    let _ = writeln!(out, "{l},{r},{c},{:.16e}", layer.weights[(r, c)]);
                }
                let _ = writeln!(out, "{l},{r},{},{:.16e}", layer.inputs(), layer.bias[r]);
            }
        }
        out
    }

    /// Read values written by [`to_csv`](Self::to_csv) into parameters of the same shape.
    pub fn load_csv(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let bad = || Error::config(format!("malformed parameter line {}", lineno + 1));
            if fields.len() != 4 {
                return Err(bad());
            }
            let l: usize = fields[0].parse().map_err(|_| bad())?;
            let r: usize = fields[1].parse().map_err(|_| bad())?;
            let c: usize = fields[2].parse().map_err(|_| bad())?;
            let v: f64 = fields[3].parse().map_err(|_| bad())?;
            let layer = self.layers.get_mut(l).ok_or_else(bad)?;
            if r >= layer.outputs() || c > layer.inputs() {
                return Err(bad());
            }
            if c == layer.inputs() {
                layer.bias[r] = v;
            } else {
                layer.weights[(r, c)] = v;
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }
}

fn flatten_layers(layers: &[Layer]) -> Vec<f64> {
    let mut flat = Vec::with_capacity(layers.iter().map(|l| l.weights.len() + l.bias.len()).sum());
    for layer in layers {
        for r in 0..layer.outputs() {
            for c in 0..layer.inputs() {
                flat.push(layer.weights[(r, c)]);
            }
        }
        flat.extend(layer.bias.iter());
    }
    flat
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// `z_l` for every layer, output layer last.
    pub pre_activations: Vec<DVector<f64>>,
    /// Layer inputs `a_{l−1}`: the point itself, then each hidden activation.
    pub activations: Vec<DVector<f64>>,
    /// `φ′(z_l)` for hidden layers.
    pub slopes: Vec<DVector<f64>>,
    pub output: f64,
}

pub fn forward(params: &NetworkParams, x: f64, y: f64) -> Result<ForwardTrace> {
    let n = params.layers.len();
    let mut pre_activations = Vec::with_capacity(n);
    let mut activations = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n.saturating_sub(1));
    let mut a = DVector::from_vec(vec![x, y]);

    for (l, layer) in params.layers.iter().enumerate() {
        let z = &layer.weights * &a + &layer.bias;
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("layer {l} pre-activation at ({x}, {y})")));
        }
        activations.push(a);
        if l + 1 < n {
            let mut value = DVector::zeros(z.len());
            let mut slope = DVector::zeros(z.len());
            for (j, &zj) in z.iter().enumerate() {
                let (v, d) = params.activation.eval(j, zj);
                value[j] = v;
                slope[j] = d;
            }
            slopes.push(slope);
            a = value;
        } else {
            a = DVector::zeros(0);
        }
        pre_activations.push(z);
    }
    let output = pre_activations[n - 1][0];
    Ok(ForwardTrace { pre_activations, activations, slopes, output })
}

/// `∂loss/∂W_l` and `∂loss/∂b_l`, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        Self { layers: params.layers.iter().map(|l| Layer::zeros(l.inputs(), l.outputs())).collect() }
    }

    pub fn flatten(&self) -> Vec<f64> {
        flatten_layers(&self.layers)
    }

    /// `self += scale · other`.
    pub fn accumulate(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.weights += &b.weights * scale;
            a.bias += &b.bias * scale;
        }
    }
}

/// Gradients of `(ψ − ψ̄)²`. The output delta is `−2(ψ − ψ̄)`, the direction
/// that makes `w ← w − λ ∇` a descent step.
pub fn backward(params: &NetworkParams, trace: &ForwardTrace, target: f64) -> Result<Gradients> {
    backward_from_output(params, trace, -2.0 * (target - trace.output))
}

/// Back-propagate an arbitrary `∂loss/∂ψ̄`.
pub fn backward_from_output(params: &NetworkParams, trace: &ForwardTrace, d_output: f64) -> Result<Gradients> {
    check_trace(params, trace)?;
    let n = params.layers.len();
    let mut grads = Gradients::zeros_like(params);
    let mut delta = DVector::from_element(1, d_output);
    for l in (0..n).rev() {
        let g = &mut grads.layers[l];
        g.weights = &delta * trace.activations[l].transpose();
        g.bias.copy_from(&delta);
        if l > 0 {
            let back = params.layers[l].weights.tr_mul(&delta);
            delta = back.component_mul(&trace.slopes[l - 1]);
        }
    }
    Ok(grads)
}

fn check_trace(params: &NetworkParams, trace: &ForwardTrace) -> Result<()> {
    let n = params.layers.len();
    let shapes_match = trace.pre_activations.len() == n
        && trace.activations.len() == n
        && trace.slopes.len() + 1 == n
        && params.layers.iter().enumerate().all(|(l, layer)| {
            trace.pre_activations[l].len() == layer.outputs() && trace.activations[l].len() == layer.inputs()
        });
    if !shapes_match {
        return Err(Error::config("forward trace does not match the network shape"));
    }
    Ok(())
}
