//! `key = value` experiment configuration.

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use hermite_nn::network::DEFAULT_HERMITE_DEGREE;
use hermite_nn::problems::{box_problem_with_units, oscillator_state, Problem};
use hermite_nn::train::{AdamParams, Batch, LossMode, Optimizer, TrainingConfig};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemChoice {
    Oscillator,
    Box,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    HermiteNn,
    Pinn,
    Collocation,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::HermiteNn => "hermite_nn",
            Method::Pinn => "pinn",
            Method::Collocation => "collocation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorChoice {
    Schrodinger,
    Identity,
}

/// Everything an experiment needs. Fields left as `None` take a
/// problem-dependent default, see the accessor of the same name.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemChoice,
    pub mass: f64,
    pub hbar: f64,
    pub omega: f64,
    pub v0: f64,
    pub length: f64,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub method: Method,
    pub hermite_hidden: Option<Vec<usize>>,
    pub pinn_hidden: Option<Vec<usize>>,
    pub hermite_degree: usize,
    pub iterations: Option<usize>,
    pub learning_rate: Option<f64>,
    pub optimizer: Optimizer,
    pub adam: AdamParams,
    pub batch: Batch,
    pub loss_mode: LossMode,
    pub stop_tol: f64,
    pub seed: u64,
    pub basis_size: usize,
    pub expansion_degree: Option<usize>,
    pub resolution: usize,
    pub heatmap: bool,
    pub output: PathBuf,
    pub operator: OperatorChoice,
    pub planted_degree: usize,
    pub seeds: Vec<u64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemChoice::Box,
            mass: 1.0,
            hbar: 1.0,
            omega: 1.0,
            v0: 1.0,
            length: 1.0,
            nx: None,
            ny: None,
            method: Method::HermiteNn,
            hermite_hidden: None,
            pinn_hidden: None,
            hermite_degree: DEFAULT_HERMITE_DEGREE,
            iterations: None,
            learning_rate: None,
            optimizer: Optimizer::Adam,
            adam: AdamParams::default(),
            batch: Batch::Full,
            loss_mode: LossMode::Supervised,
            stop_tol: 0.0,
            seed: 42,
            basis_size: 9,
            expansion_degree: None,
            resolution: 20,
            heatmap: true,
            output: PathBuf::from("out"),
            operator: OperatorChoice::Schrodinger,
            planted_degree: 2,
            seeds: vec![1, 2, 3, 4, 5],
        }
    }
}

impl ExperimentConfig {
    /// Quantum numbers; ground state for the oscillator, `(1, 1)` for the box.
    pub fn modes(&self) -> (usize, usize) {
        let d = match self.problem {
            ProblemChoice::Oscillator => 0,
            ProblemChoice::Box => 1,
        };
        (self.nx.unwrap_or(d), self.ny.unwrap_or(d))
    }

    pub fn build_problem(&self) -> Result<Problem, CliError> {
        let (nx, ny) = self.modes();
        let p = match self.problem {
            ProblemChoice::Oscillator => oscillator_state(self.mass, self.hbar, self.omega, self.v0, nx, ny)?,
            ProblemChoice::Box => box_problem_with_units(self.length, nx, ny, self.mass, self.hbar)?,
        };
        Ok(p)
    }

    /// Hidden-layer widths for a network method.
    pub fn hidden(&self, method: Method) -> Vec<usize> {
        let explicit = match method {
            Method::HermiteNn => &self.hermite_hidden,
            Method::Pinn => &self.pinn_hidden,
            Method::Collocation => &None,
        };
        if let Some(h) = explicit {
            return h.clone();
        }
        match (self.problem, method) {
            (ProblemChoice::Oscillator, Method::Pinn) => vec![5; 10],
            (ProblemChoice::Oscillator, _) => vec![10; 15],
            (ProblemChoice::Box, Method::Pinn) => vec![18; 5],
            (ProblemChoice::Box, _) => vec![15; 5],
        }
    }

    pub fn architecture(&self, method: Method) -> Vec<usize> {
        let mut arch = vec![2];
        arch.extend(self.hidden(method));
        arch.push(1);
        arch
    }

    pub fn iterations(&self) -> usize {
        self.iterations.unwrap_or(match self.problem {
            ProblemChoice::Oscillator => 100,
            ProblemChoice::Box => 1000,
        })
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate.unwrap_or(self.optimizer.default_learning_rate())
    }

    /// Collocation expansion degree `N`; defaults to the basis size (square system).
    pub fn expansion_degree(&self) -> usize {
        self.expansion_degree.unwrap_or(self.basis_size)
    }

    pub fn training_config(&self, seed: u64) -> TrainingConfig {
        TrainingConfig {
            iterations: self.iterations(),
            learning_rate: self.learning_rate(),
            optimizer: self.optimizer,
            adam: self.adam,
            batch: self.batch,
            loss_mode: self.loss_mode,
            seed,
            stop_tol: self.stop_tol,
        }
    }
}

fn parse_num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse `{v}`"))
}

fn positive(v: &str) -> Result<f64, String> {
    let x: f64 = parse_num(v)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{v}` must be a positive number"))
    }
}

fn open_unit(v: &str) -> Result<f64, String> {
    let x: f64 = parse_num(v)?;
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(format!("`{v}` must lie strictly between 0 and 1"))
    }
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
    let items: Vec<T> = v.split(',').map(|s| parse_num(s.trim())).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn widths(v: &str) -> Result<Vec<usize>, String> {
    let w: Vec<usize> = list(v)?;
    if w.contains(&0) {
        return Err("layer widths must be positive".into());
    }
    Ok(w)
}

fn boolean(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("`{v}` is not a boolean")),
    }
}

fn apply(cfg: &mut ExperimentConfig, key: &str, v: &str) -> Result<(), String> {
    match key {
        "problem" => {
            cfg.problem = match v {
                "box" => ProblemChoice::Box,
                "oscillator" => ProblemChoice::Oscillator,
                _ => return Err(format!("unknown problem `{v}` (box | oscillator)")),
            }
        }
        "m" => cfg.mass = positive(v)?,
        "hbar" => cfg.hbar = positive(v)?,
        "omega" => cfg.omega = positive(v)?,
        "v0" => cfg.v0 = parse_num(v)?,
        "L" => cfg.length = positive(v)?,
        "nx" => cfg.nx = Some(parse_num(v)?),
        "ny" => cfg.ny = Some(parse_num(v)?),
        "method" => {
            cfg.method = match v {
                "hermite_nn" => Method::HermiteNn,
                "pinn" => Method::Pinn,
                "collocation" => Method::Collocation,
                _ => return Err(format!("unknown method `{v}` (hermite_nn | pinn | collocation)")),
            }
        }
        "hermite_hidden" => cfg.hermite_hidden = Some(widths(v)?),
        "pinn_hidden" => cfg.pinn_hidden = Some(widths(v)?),
        "hermite_degree" => {
            let d: usize = parse_num(v)?;
            if d > hermite_nn::hermite::MAX_DEGREE {
                return Err(format!("hermite_degree above {}", hermite_nn::hermite::MAX_DEGREE));
            }
            cfg.hermite_degree = d;
        }
        "iterations" => cfg.iterations = Some(parse_num(v)?),
        "learning_rate" => cfg.learning_rate = Some(positive(v)?),
        "optimizer" => {
            cfg.optimizer = match v {
                "adam" => Optimizer::Adam,
                "sgd" => Optimizer::Sgd,
                _ => return Err(format!("unknown optimizer `{v}` (adam | sgd)")),
            }
        }
        "beta1" => cfg.adam.beta1 = open_unit(v)?,
        "beta2" => cfg.adam.beta2 = open_unit(v)?,
        "epsilon" => cfg.adam.epsilon = positive(v)?,
        "batch" => {
            cfg.batch = match v {
                "full" => Batch::Full,
                n => match parse_num::<usize>(n) {
                    Ok(k) if k > 0 => Batch::Stochastic(k),
                    _ => return Err(format!("batch must be `full` or a positive size, got `{v}`")),
                },
            }
        }
        "loss_mode" => {
            cfg.loss_mode = match v {
                "supervised" => LossMode::Supervised,
                "residual" => LossMode::Residual,
                _ => return Err(format!("unknown loss_mode `{v}` (supervised | residual)")),
            }
        }
        "stop_tol" => {
            let t: f64 = parse_num(v)?;
            if !(t >= 0.0) {
                return Err("stop_tol must be non-negative".into());
            }
            cfg.stop_tol = t;
        }
        "seed" => cfg.seed = parse_num(v)?,
        "basis_size" => {
            let m: usize = parse_num(v)?;
            if m == 0 || m >= hermite_nn::hermite::MAX_DEGREE {
                return Err(format!("basis_size must be in 1..{}", hermite_nn::hermite::MAX_DEGREE));
            }
            cfg.basis_size = m;
        }
        "expansion_degree" => cfg.expansion_degree = Some(parse_num(v)?),
        "resolution" => {
            let r: usize = parse_num(v)?;
            if r == 0 {
                return Err("resolution must be positive".into());
            }
            cfg.resolution = r;
        }
        "heatmap" => cfg.heatmap = boolean(v)?,
        "output" => cfg.output = PathBuf::from(v),
        "operator" => {
            cfg.operator = match v {
                "schrodinger" => OperatorChoice::Schrodinger,
                "identity" => OperatorChoice::Identity,
                _ => return Err(format!("unknown operator `{v}` (schrodinger | identity)")),
            }
        }
        "planted_degree" => cfg.planted_degree = parse_num(v)?,
        "seeds" => cfg.seeds = list(v)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

/// Parse configuration text. Later duplicates override earlier ones with a
/// warning on stderr.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| CliError::config_at(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        apply(&mut cfg, key, value).map_err(|m| CliError::config_at(line, m))?;
        if let Some(prev) = seen.insert(key.to_string(), line) {
            eprintln!("warning: line {line}: `{key}` overrides the value from line {prev}");
        }
    }
    check_cross_fields(&cfg, &seen)?;
    Ok(cfg)
}

fn check_cross_fields(cfg: &ExperimentConfig, lines: &HashMap<String, usize>) -> Result<(), CliError> {
    let at = |key: &str| lines.get(key).copied().unwrap_or(0);
    let n_points = (cfg.basis_size + 1) * (cfg.basis_size + 1);
    if let Batch::Stochastic(k) = cfg.batch {
        if k > n_points {
            return Err(CliError::config_at(at("batch"), format!("batch {k} exceeds the {n_points} training points")));
        }
    }
    if cfg.method == Method::Collocation || cfg.operator == OperatorChoice::Identity {
        let n = cfg.expansion_degree();
        if n >= hermite_nn::hermite::MAX_DEGREE {
            return Err(CliError::config_at(at("expansion_degree"), "expansion_degree too large"));
        }
        if cfg.operator == OperatorChoice::Identity && cfg.planted_degree > n {
            return Err(CliError::config_at(
                at("planted_degree"),
                format!("planted_degree {} exceeds expansion_degree {n}", cfg.planted_degree),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.method, Method::HermiteNn);
        assert_eq!(c.problem, ProblemChoice::Box);
        assert_eq!(c.seed, 42);
        assert_eq!(c.iterations(), 1000);
        assert_eq!(c.architecture(Method::HermiteNn), vec![2, 15, 15, 15, 15, 15, 1]);
        assert_eq!(c.architecture(Method::Pinn), vec![2, 18, 18, 18, 18, 18, 1]);
    }

    #[test]
    fn overrides_apply() {
        let c = parse_config("iterations = 1000\nproblem = oscillator").unwrap();
        assert_eq!(c.iterations, Some(1000));
        assert_eq!(c.problem, ProblemChoice::Oscillator);
        assert_eq!(c.modes(), (0, 0));
        assert_eq!(c.hidden(Method::HermiteNn), vec![10; 15]);
        assert_eq!(c.hidden(Method::Pinn), vec![5; 10]);
    }

    #[test]
    fn bad_value_names_line() {
        let e = parse_config("iterations = banana").unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("line 1"), "{e}");
        let e = parse_config("# header\n\nseed = 3\ncolour = red").unwrap_err();
        assert!(e.to_string().contains("line 4"), "{e}");
        assert!(parse_config("beta1 = 1.0").is_err());
        assert!(parse_config("just some words").is_err());
    }

    #[test]
    fn comments_duplicates_and_lists() {
        let c = parse_config("seed = 1 # first\nseed = 7\nhermite_hidden = 15, 15\nseeds = 3,4\nbatch = 12").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.hermite_hidden, Some(vec![15, 15]));
        assert_eq!(c.seeds, vec![3, 4]);
        assert_eq!(c.batch, Batch::Stochastic(12));
    }

    #[test]
    fn cross_field_ranges() {
        let e = parse_config("basis_size = 3\nbatch = 17").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(parse_config("operator = identity\nexpansion_degree = 1\nplanted_degree = 2").is_err());
    }
}
