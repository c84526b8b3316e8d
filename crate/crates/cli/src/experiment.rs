//! Training, collocation and comparison runs, and the files they leave behind.

use std::path::{Path, PathBuf};
use std::thread;
use std::time::Instant;

use hermite_nn::collocation::{
    assemble_system, build_grid, problem_grid, solve_problem, solve_weights, Dim, HermiteExpansion, LinearOperator,
    Point,
};
use hermite_nn::hermite::{eval_basis, eval_derivative_basis, hermite_roots, quad_weights};
use hermite_nn::network::{forward, init_params, Activation, NetworkParams};
use hermite_nn::problems::{trial_solution, Domain, Problem};
use hermite_nn::train::{mse, train, LossMode, Optimizer};
use hermite_nn::Error;

use crate::config::{ExperimentConfig, Method, OperatorChoice};
use crate::heatmap::{emit_heatmap, HeatmapGrid};
use crate::output::{csv, fmt_f64, indexed_csv, write_atomic};
use crate::CliError;

/// Outcome of one method on one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub method: Method,
    pub seed: u64,
    /// Layer sizes; empty for collocation.
    pub architecture: Vec<usize>,
    pub loss_history: Vec<f64>,
    /// Last entry of `loss_history`.
    pub final_loss: Option<f64>,
    /// Mean squared error against the analytic reference on the R×R evaluation grid.
    pub eval_mse: f64,
    pub wall_time: f64,
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub problem: String,
    pub runs: Vec<RunSummary>,
    /// Median evaluation MSE per method, in method order.
    pub median_eval_mse: Vec<(Method, f64)>,
    pub median_final_loss: Vec<(Method, Option<f64>)>,
    /// Hermite median ≤ sigmoid median; `None` unless both methods ran.
    pub claim_holds: Option<bool>,
    pub report_path: PathBuf,
}

/// Cell centres of an R×R grid over `domain`, x-major.
pub fn evaluation_points(domain: &Domain, r: usize) -> Vec<(f64, f64)> {
    let hx = (domain.x_max - domain.x_min) / r as f64;
    let hy = (domain.y_max - domain.y_min) / r as f64;
    let mut pts = Vec::with_capacity(r * r);
    for i in 0..r {
        for j in 0..r {
            pts.push((domain.x_min + (i as f64 + 0.5) * hx, domain.y_min + (j as f64 + 0.5) * hy));
        }
    }
    pts
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn arch_string(arch: &[usize]) -> String {
    arch.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

fn opt_loss(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "none".into())
}

fn write_text(path: &Path, text: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes())?;
    files.push(path.to_path_buf());
    Ok(())
}

fn wavefunction_csv(points: &[(f64, f64)], actual: &[f64], predicted: &[f64]) -> String {
    csv(
        &["x", "y", "actual", "predicted"],
        points
            .iter()
            .zip(actual.iter().zip(predicted))
            .map(|(&(x, y), (&a, &p))| vec![fmt_f64(x), fmt_f64(y), fmt_f64(a), fmt_f64(p)]),
    )
}

fn history_csv(history: &[f64]) -> String {
    csv(&["iteration", "loss"], history.iter().enumerate().map(|(i, &l)| vec![i.to_string(), fmt_f64(l)]))
}

fn heatmap_grid(problem: &Problem, r: usize, values: Vec<f64>, title: String) -> HeatmapGrid {
    let d = problem.domain;
    HeatmapGrid { resolution: r, values, x_range: (d.x_min, d.x_max), y_range: (d.y_min, d.y_max), title }
}

fn problem_line(problem: &Problem) -> String {
    let (nx, ny) = problem.modes;
    format!("problem: {} (nx={nx}, ny={ny}, E={})", problem.name(), fmt_f64(problem.energy()))
}

fn activation_for(cfg: &ExperimentConfig, method: Method) -> Activation {
    match method {
        Method::Pinn => Activation::Sigmoid,
        _ => Activation::Hermite { max_degree: cfg.hermite_degree },
    }
}

/// Predictions of the trial solution built on `params`.
pub fn predict(params: &NetworkParams, problem: &Problem, points: &[(f64, f64)]) -> Result<Vec<f64>, CliError> {
    let net = |x: f64, y: f64| forward(params, x, y).map(|t| t.output).unwrap_or(f64::NAN);
    let out: Vec<f64> = points.iter().map(|&(x, y)| trial_solution(&net, problem, x, y)).collect();
    if let Some(k) = out.iter().position(|v| !v.is_finite()) {
        let (x, y) = points[k];
        return Err(CliError::Numerical(format!("non-finite prediction at ({x}, {y})")));
    }
    Ok(out)
}

/// Train one network method with one seed, writing its artifacts into `dir`.
pub fn train_run(cfg: &ExperimentConfig, method: Method, seed: u64, dir: &Path) -> Result<RunSummary, CliError> {
    let problem = cfg.build_problem()?;
    let grid = problem_grid(&problem, cfg.basis_size)?;
    let arch = cfg.architecture(method);
    let activation = activation_for(cfg, method);
    let params = init_params(&arch, activation, seed)?;
    let tc = cfg.training_config(seed);

    let mut header = vec![
        problem_line(&problem),
        format!("method: {}", method.name()),
        format!("seed: {seed}"),
        format!("architecture: {}", arch_string(&arch)),
        format!(
            "activation: {}",
            match activation {
                Activation::Hermite { max_degree } => format!("hermite (D={max_degree})"),
                Activation::Sigmoid => "sigmoid".into(),
            }
        ),
        format!(
            "optimizer: {} (learning_rate={})",
            match tc.optimizer {
                Optimizer::Adam => "adam",
                Optimizer::Sgd => "sgd",
            },
            fmt_f64(tc.learning_rate)
        ),
        format!(
            "loss_mode: {}",
            match tc.loss_mode {
                LossMode::Supervised => "supervised",
                LossMode::Residual => "residual",
            }
        ),
        format!("training_grid: {0}x{0} Hermite roots", cfg.basis_size + 1),
        format!("iterations: {}", tc.iterations),
    ];

    let start = Instant::now();
    let trace = match train(&problem, params, &tc, &grid) {
        Ok(t) => t,
        Err(e) => {
            if let Error::NonFiniteLoss { iteration } = e {
                header.push(format!("status: numerical failure at iteration {iteration}"));
                let mut files = Vec::new();
                write_text(&dir.join("report.txt"), &(header.join("\n") + "\n"), &mut files)?;
            }
            return Err(e.into());
        }
    };
    let wall_time = start.elapsed().as_secs_f64();

    let points = evaluation_points(&problem.domain, cfg.resolution);
    let actual: Vec<f64> = points.iter().map(|&(x, y)| problem.analytic_psi(x, y)).collect();
    let predicted = predict(&trace.final_params, &problem, &points)?;
    let eval_mse = mse(&predicted, &actual)?;
    let final_loss = trace.final_loss();

    let mut files = Vec::new();
    write_text(&dir.join("mse_history.csv"), &history_csv(&trace.loss_history), &mut files)?;
    write_text(&dir.join("wavefunction.csv"), &wavefunction_csv(&points, &actual, &predicted), &mut files)?;
    write_text(&dir.join("params.csv"), &trace.final_params.to_csv(), &mut files)?;
    if cfg.heatmap {
        let title = format!("{} {} prediction, seed {seed}", problem.name(), method.name());
        let path = dir.join("heatmap.svg");
        emit_heatmap(&heatmap_grid(&problem, cfg.resolution, predicted.clone(), title), &path)?;
        files.push(path);
    }

    header.push("status: ok".into());
    header.push(format!("iterations_run: {}", trace.loss_history.len()));
    header.push(format!("final_loss: {}", opt_loss(final_loss)));
    header.push(format!("eval_mse: {} ({1}x{1} grid)", fmt_f64(eval_mse), cfg.resolution));
    let names: Vec<String> =
        files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect();
    header.push(format!("files: {} report.txt", names.join(" ")));
    write_text(&dir.join("report.txt"), &(header.join("\n") + "\n"), &mut files)?;

    Ok(RunSummary {
        method,
        seed,
        architecture: arch,
        loss_history: trace.loss_history,
        final_loss,
        eval_mse,
        wall_time,
        dir: dir.to_path_buf(),
        files,
    })
}

/// Collocation solve: planted-function recovery under the identity operator,
/// or the problem's Schrödinger operator.
pub fn solve_run(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    let m = cfg.basis_size;
    let n = cfg.expansion_degree();
    let r = cfg.resolution;
    let mut files = Vec::new();
    let mut lines = vec![format!("method: collocation"), format!("basis_size: {m}"), format!("expansion_degree: {n}")];

    let eval_mse = match cfg.operator {
        OperatorChoice::Identity => {
            let p = cfg.planted_degree;
            if p > n {
                return Err(CliError::Config(format!("planted_degree {p} exceeds expansion_degree {n}")));
            }
            let grid = build_grid(m, Dim::One, vec![])?;
            let planted = |s: f64| eval_basis(p, s)[p];
            let source = |pt: Point| match pt {
                Point::Line(s) => planted(s),
                Point::Plane(..) => f64::NAN,
            };
            let system = assemble_system(&LinearOperator::identity(), &grid, n, source, &[])?;
            let sol = solve_weights(&system)?;
            let coeff_err = sol
                .weights()
                .iter()
                .enumerate()
                .map(|(k, &w)| (w - if k == p { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);

            let (lo, hi) = (grid.nodes_1d[0], grid.nodes_1d[grid.nodes_1d.len() - 1]);
            let xs: Vec<f64> = (0..r)
                .map(|i| if r == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (r - 1) as f64 })
                .collect();
            let values: Vec<f64> = xs.iter().map(|&x| sol.expansion.eval(Point::Line(x))).collect::<Result<_, _>>()?;
            let truth: Vec<f64> = xs.iter().map(|&x| planted(x)).collect();
            write_text(&dir.join("weights.csv"), &indexed_csv(sol.weights()), &mut files)?;
            write_text(
                &dir.join("expansion_grid.csv"),
                &csv(&["x", "value"], xs.iter().zip(&values).map(|(&x, &v)| vec![fmt_f64(x), fmt_f64(v)])),
                &mut files,
            )?;
            lines.push("operator: identity".into());
            lines.push(format!("planted_degree: {p}"));
            lines.push(format!("condition: {}", fmt_f64(sol.condition)));
            lines.push(format!("residual_norm: {}", fmt_f64(sol.residual_norm)));
            lines.push(format!("max_coefficient_error: {}", fmt_f64(coeff_err)));
            mse(&values, &truth)?
        }
        OperatorChoice::Schrodinger => {
            let problem = cfg.build_problem()?;
            let sol = solve_problem(&problem, m, n)?;
            let points = evaluation_points(&problem.domain, r);
            let exp: &HermiteExpansion = &sol.expansion;
            let values: Vec<f64> =
                points.iter().map(|&(x, y)| exp.eval(Point::Plane(x, y))).collect::<Result<_, _>>()?;
            let truth: Vec<f64> = points.iter().map(|&(x, y)| problem.analytic_psi(x, y)).collect();
            write_text(&dir.join("weights.csv"), &indexed_csv(sol.weights()), &mut files)?;
            write_text(
                &dir.join("expansion_grid.csv"),
                &csv(
                    &["x", "y", "value"],
                    points.iter().zip(&values).map(|(&(x, y), &v)| vec![fmt_f64(x), fmt_f64(y), fmt_f64(v)]),
                ),
                &mut files,
            )?;
            if cfg.heatmap {
                let path = dir.join("heatmap.svg");
                let title = format!("{} collocation, N={n}", problem.name());
                emit_heatmap(&heatmap_grid(&problem, r, values.clone(), title), &path)?;
                files.push(path);
            }
            lines.insert(0, problem_line(&problem));
            lines.push("operator: schrodinger".into());
            lines.push(format!("condition: {}", fmt_f64(sol.condition)));
            lines.push(format!("residual_norm: {}", fmt_f64(sol.residual_norm)));
            mse(&values, &truth)?
        }
    };
    lines.push(format!("eval_mse: {}", fmt_f64(eval_mse)));
    write_text(&dir.join("report.txt"), &(lines.join("\n") + "\n"), &mut files)?;

    Ok(RunSummary {
        method: Method::Collocation,
        seed: cfg.seed,
        architecture: vec![],
        loss_history: vec![],
        final_loss: None,
        eval_mse,
        wall_time: start.elapsed().as_secs_f64(),
        dir: dir.to_path_buf(),
        files,
    })
}

fn summarize(problem: &Problem, runs: Vec<RunSummary>, report_path: PathBuf) -> ComparisonReport {
    let mut methods: Vec<Method> = runs.iter().map(|r| r.method).collect();
    methods.sort();
    methods.dedup();
    let mut median_eval_mse = Vec::new();
    let mut median_final_loss = Vec::new();
    for &m in &methods {
        let mut evals: Vec<f64> = runs.iter().filter(|r| r.method == m).map(|r| r.eval_mse).collect();
        median_eval_mse.push((m, median(&mut evals)));
        let mut finals: Vec<f64> = runs.iter().filter(|r| r.method == m).filter_map(|r| r.final_loss).collect();
        median_final_loss.push((m, (!finals.is_empty()).then(|| median(&mut finals))));
    }
    let get = |m: Method| median_eval_mse.iter().find(|(k, _)| *k == m).map(|&(_, v)| v);
    let claim_holds = match (get(Method::HermiteNn), get(Method::Pinn)) {
        (Some(h), Some(p)) => Some(h <= p),
        _ => None,
    };
    ComparisonReport {
        problem: problem.name().to_string(),
        runs,
        median_eval_mse,
        median_final_loss,
        claim_holds,
        report_path,
    }
}

/// Run the configured method once, with `cfg.seed`, into `cfg.output`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ComparisonReport, CliError> {
    let problem = cfg.build_problem()?;
    let dir = cfg.output.clone();
    let run = match cfg.method {
        Method::Collocation => solve_run(cfg, &dir)?,
        m => train_run(cfg, m, cfg.seed, &dir)?,
    };
    Ok(summarize(&problem, vec![run], dir.join("report.txt")))
}

/// Hermite network against the sigmoid baseline over `cfg.seeds`, with equal
/// iteration budgets and the same training grid. Seeds run in parallel.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<ComparisonReport, CliError> {
    let problem = cfg.build_problem()?;
    let out = cfg.output.clone();
    let methods = [Method::HermiteNn, Method::Pinn];

    let results: Vec<Vec<Result<RunSummary, CliError>>> = thread::scope(|s| {
        let handles: Vec<_> = cfg
            .seeds
            .iter()
            .map(|&seed| {
                let out = &out;
                s.spawn(move || {
                    methods
                        .iter()
                        .map(|&m| train_run(cfg, m, seed, &out.join(format!("seed_{seed}")).join(m.name())))
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect()
    });

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (seed, per_seed) in cfg.seeds.iter().zip(results) {
        for (m, r) in methods.iter().zip(per_seed) {
            match r {
                Ok(run) => runs.push(run),
                Err(e) => failures.push((*seed, *m, e)),
            }
        }
    }

    let report_path = out.join("report.txt");
    let mut lines = vec![
        problem_line(&problem),
        format!("iterations: {}", cfg.iterations()),
        format!("training_grid: {0}x{0} Hermite roots", cfg.basis_size + 1),
        format!("seeds: {}", cfg.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")),
    ];
    for m in methods {
        lines.push(format!("architecture {}: {}", m.name(), arch_string(&cfg.architecture(m))));
    }
    if let Some((seed, m, e)) = failures.into_iter().next() {
        lines.push(format!("status: {} seed {seed} failed: {e}", m.name()));
        let mut files = Vec::new();
        write_text(&report_path, &(lines.join("\n") + "\n"), &mut files)?;
        return Err(e);
    }

    let mut files = Vec::new();
    write_text(&out.join("mse_history.csv"), &side_by_side(&runs), &mut files)?;
    let report = summarize(&problem, runs, report_path.clone());
    for run in &report.runs {
        lines.push(format!(
            "seed {} {}: final_loss {} eval_mse {} history {}",
            run.seed,
            run.method.name(),
            opt_loss(run.final_loss),
            fmt_f64(run.eval_mse),
            run.dir.join("mse_history.csv").strip_prefix(&out).unwrap_or(&run.dir).display()
        ));
    }
    for ((m, e), (_, f)) in report.median_eval_mse.iter().zip(&report.median_final_loss) {
        lines.push(format!("median {}: final_loss {} eval_mse {}", m.name(), opt_loss(*f), fmt_f64(*e)));
    }
    lines.push(format!(
        "claim hermite_nn median eval_mse <= pinn median eval_mse: {}",
        match report.claim_holds {
            Some(true) => "holds",
            Some(false) => "does not hold",
            None => "not evaluated",
        }
    ));
    write_text(&report_path, &(lines.join("\n") + "\n"), &mut files)?;
    Ok(report)
}

/// Every run's loss history in one table, blank where a run stopped early.
fn side_by_side(runs: &[RunSummary]) -> String {
    let mut ordered: Vec<&RunSummary> = runs.iter().collect();
    ordered.sort_by_key(|r| (r.method, r.seed));
    let names: Vec<String> = ordered.iter().map(|r| format!("{}_seed{}", r.method.name(), r.seed)).collect();
    let mut header = vec!["iteration"];
    header.extend(names.iter().map(String::as_str));
    let len = ordered.iter().map(|r| r.loss_history.len()).max().unwrap_or(0);
    csv(
        &header,
        (0..len).map(|i| {
            let mut row = vec![i.to_string()];
            row.extend(ordered.iter().map(|r| r.loss_history.get(i).map(|&v| fmt_f64(v)).unwrap_or_default()));
            row
        }),
    )
}

/// Dump `H̃ₖ(x)` and `H̃ₖ'(x)` for `k ≤ degree`, plus the roots and modified
/// weights of `H_degree`.
pub fn run_basis(degree: usize, x: f64, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    write_text(&out.join("values.csv"), &indexed_csv(&eval_basis(degree, x)), &mut files)?;
    write_text(&out.join("derivatives.csv"), &indexed_csv(&eval_derivative_basis(degree, x)), &mut files)?;
    if degree >= 1 {
        write_text(&out.join("roots.csv"), &indexed_csv(&hermite_roots(degree)?), &mut files)?;
        write_text(&out.join("weights.csv"), &indexed_csv(&quad_weights(degree)?), &mut files)?;
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn evaluation_grid_is_cell_centred() {
        let pts = evaluation_points(&Domain::square(0.0, 1.0), 2);
        assert_eq!(pts, vec![(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]);
    }

    #[test]
    fn side_by_side_pads_short_histories() {
        let run = |method, seed, h: Vec<f64>| RunSummary {
            method,
            seed,
            architecture: vec![],
            final_loss: h.last().copied(),
            loss_history: h,
            eval_mse: 0.0,
            wall_time: 0.0,
            dir: PathBuf::new(),
            files: vec![],
        };
        let text = side_by_side(&[run(Method::Pinn, 1, vec![1.0]), run(Method::HermiteNn, 1, vec![2.0, 0.5])]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,hermite_nn_seed1,pinn_seed1");
        assert!(lines[2].ends_with(','));
    }
}
