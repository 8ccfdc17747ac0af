use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;

use super::{ExperimentConfig, ExperimentRecord};
use crate::pdelab::{reference_values, Manifold, ManifoldSolver, Problem, RightHandSide, Setting};
use crate::qestimate::{
    auto_refinement, partition_cells, qmean_estimator, weighted_integral_estimator, IntegrationProblem, LeafBackend,
};
use crate::qsingular::leafquad::LeafRule;
use crate::qsingular::{multilevel_estimator, power_kernel, InputFunction, Potential};
use crate::quad::{gauss, integrate_region, CellRule, Region};
use crate::rng::{Rng, SeedPath};
use crate::{Error, Result};

/// Per-trial errors and measured cost at one budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRun {
    pub n: u64,
    /// Largest query count over the trials.
    pub queries: u64,
    pub errors: Vec<f64>,
    pub ok: Vec<bool>,
    pub wall_ms: u64,
}

/// `ceil((1 - theta) trials)`-th order statistic.
pub fn error_quantile(errors: &[f64], theta: f64) -> f64 {
    let mut e = errors.to_vec();
    e.sort_by(f64::total_cmp);
    let k = ((1.0 - theta) * e.len() as f64 - 1e-9).ceil().max(1.0) as usize;
    e[k.min(e.len()) - 1]
}

fn backend(setting: &str) -> Result<LeafBackend> {
    setting.parse()
}

/// Radius of the circle manifold.
pub const CIRCLE_RADIUS: f64 = 0.5;

pub fn manifold(cfg: &ExperimentConfig, problem: Problem) -> Result<Manifold> {
    match cfg.manifold.as_str() {
        "point" => Ok(Manifold::Point(vec![0.0; problem.d()])),
        "circle" => Ok(Manifold::Circle { radius: CIRCLE_RADIUS }),
        "domain" => Ok(Manifold::Domain),
        m => Err(Error::Config(format!("unknown manifold '{m}'"))),
    }
}

pub fn right_hand_side(cfg: &ExperimentConfig, problem: Problem, n: u64) -> Result<RightHandSide> {
    match cfg.rhs.as_str() {
        "hard" | "default" => Ok(RightHandSide::hard_instance(problem, n)),
        "manufactured" => Ok(RightHandSide::manufactured(problem)),
        "one" => Ok(RightHandSide::Constant(1.0)),
        "zero" => Ok(RightHandSide::Zero),
        r => Err(Error::Config(format!("unknown right-hand side '{r}'"))),
    }
}

fn trial_rng(cfg: &ExperimentConfig, idx: usize, t: usize) -> Rng {
    SeedPath::root(cfg.seed).child(idx as u64).child(t as u64).rng()
}

/// Runs every trial of budget `cfg.budgets[idx]`.
pub fn run_budget(cfg: &ExperimentConfig, idx: usize) -> Result<BudgetRun> {
    let n = *cfg.budgets.get(idx).ok_or_else(|| Error::Input(format!("no budget {idx}")))?;
    let trials = if cfg.is_stochastic() { cfg.trials } else { 1 };
    let start = Instant::now();
    let out: Vec<(f64, u64, bool)> = match cfg.problem.as_str() {
        "mean" => mean_trials(cfg, idx, n, trials)?,
        "integrate" => integrate_trials(cfg, idx, n, trials)?,
        "singular" => singular_trials(cfg, idx, n, trials)?,
        p => pde_trials(cfg, p.parse()?, idx, n, trials)?,
    };
    let wall_ms = if cfg.wall_time { start.elapsed().as_millis() as u64 } else { 0 };
    Ok(BudgetRun {
        n,
        queries: out.iter().map(|o| o.1).max().unwrap_or(0),
        errors: out.iter().map(|o| o.0).collect(),
        ok: out.iter().map(|o| o.2).collect(),
        wall_ms,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let label = if cfg.is_pde() { format!("{}/{}", cfg.problem, cfg.manifold) } else { cfg.problem.clone() };
    let mut records = Vec::with_capacity(cfg.budgets.len());
    for idx in 0..cfg.budgets.len() {
        let run = run_budget(cfg, idx)?;
        let rec = ExperimentRecord {
            problem: label.clone(),
            setting: cfg.setting.clone(),
            n_queries: run.queries,
            err_q75: error_quantile(&run.errors, cfg.theta),
            trials: run.errors.len(),
            seed: cfg.seed,
            wall_ms: run.wall_ms,
        };
        eprintln!("{label} {} n={} queries={} err={:.3e}", cfg.setting, run.n, rec.n_queries, rec.err_q75);
        records.push(rec);
    }
    Ok(records)
}

/// Uniform random values in `[-1, 1]`, redrawn per trial.
fn mean_trials(cfg: &ExperimentConfig, idx: usize, n: u64, trials: usize) -> Result<Vec<(f64, u64, bool)>> {
    let b = backend(&cfg.setting)?;
    let len = cfg.length;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg, idx, t);
            let f: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let mean = f.iter().sum::<f64>() / len as f64;
            let est = qmean_estimator(&f, n, b)?;
            let draw = est.draw(&mut rng);
            Ok(((draw.value - mean).abs(), est.queries(), draw.ok))
        })
        .collect()
}

fn inv_sqrt_norm(y: &[f64]) -> f64 {
    let r2: f64 = y.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        0.0
    } else {
        r2.powf(-0.25)
    }
}

/// `int_{[0,1]^2} |y|^{-1/2} f(y) dy` in polar coordinates about the origin,
/// `r = u^2` removing the singularity; each half of the square is a smooth
/// tensor domain in `(theta, u)`.
pub fn inv_sqrt_square_integral(f: &dyn Fn(&[f64]) -> f64) -> f64 {
    let gl = gauss(48);
    let quarter = std::f64::consts::FRAC_PI_4;
    let mut sum = 0.0;
    for half in 0..2 {
        for (ti, tw) in gl.nodes.iter().zip(&gl.weights) {
            let theta = quarter * (0.5 * (ti + 1.0) + half as f64);
            let (sn, cs) = theta.sin_cos();
            let reach = 1.0 / if half == 0 { cs } else { sn };
            let umax = reach.sqrt();
            let mut inner = 0.0;
            for (ui, uw) in gl.nodes.iter().zip(&gl.weights) {
                let u = 0.5 * umax * (ui + 1.0);
                let r = u * u;
                // r^{-1/2} r dr = 2 u^2 du
                inner += uw * 2.0 * u * u * f(&[r * cs, r * sn]);
            }
            sum += tw * 0.5 * quarter * 0.5 * umax * inner;
        }
    }
    sum
}

/// Weight `|y|^{-1/2}` on the unit cube; `f = 1/2 + 2/5 sin(a.y + c)` with
/// random `a` and `c` per trial.
fn integrate_trials(cfg: &ExperimentConfig, idx: usize, n: u64, trials: usize) -> Result<Vec<(f64, u64, bool)>> {
    let b = backend(&cfg.setting)?;
    let d = cfg.d;
    let origin = vec![0.0; d];
    let problem = IntegrationProblem { region: Region::unit_cube(d), weight: &inv_sqrt_norm, singular: Some(origin.clone()), rule: CellRule::WEIGHTS };
    let k = auto_refinement(5.0, n, (d as f64).sqrt(), d);
    let cells = partition_cells(&problem, k, false)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg, idx, t);
            let a: Vec<f64> = (0..d).map(|_| rng.random_range(1.0..4.0)).collect();
            let c: f64 = rng.random_range(0.0..6.3);
            let f = move |y: &[f64]| 0.5 + 0.4 * (y.iter().zip(&a).map(|(u, v)| u * v).sum::<f64>() + c).sin();
            let exact = if d == 2 {
                inv_sqrt_square_integral(&f)
            } else {
                integrate_region(|y: &[f64]| inv_sqrt_norm(y) * f(y), &problem.region, Some(&origin), 8, &CellRule::ACCURATE)
            };
            let est = weighted_integral_estimator(&cells, &f, n, b)?;
            let draw = est.draw(&mut rng);
            Ok(((draw.value - exact).abs(), est.queries(), draw.ok))
        })
        .collect()
}

/// Probe points of a singular operator target: a uniform grid.
pub fn singular_probes(d1: usize) -> Vec<Vec<f64>> {
    let per: usize = match d1 {
        0 => return vec![vec![]],
        1 => 65,
        _ => 17,
    };
    let count = per.pow(d1 as u32);
    (0..count)
        .map(|mut i| {
            (0..d1)
                .map(|_| {
                    let j = i % per;
                    i /= per;
                    j as f64 / (per - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// `T_k f` for `k = |x - y|^sigma` with a fixed smooth input.
fn singular_trials(cfg: &ExperimentConfig, idx: usize, n: u64, trials: usize) -> Result<Vec<(f64, u64, bool)>> {
    let b = backend(&cfg.setting)?;
    let k = power_kernel(cfg.sigma, cfg.s, cfg.d, cfg.d1)?;
    let f = match cfg.rhs.as_str() {
        "one" => InputFunction::constant(1.0),
        "sin" | "default" => InputFunction::new(|p| 0.5 * (3.0 * p[0]).sin() * (1.0 - p[p.len() - 1])).with_breaks(vec![]),
        r => return Err(Error::Config(format!("unknown singular input '{r}'"))),
    };
    let probes = singular_probes(cfg.d1);
    let pot = Potential::new(&k, &f, LeafRule::STANDARD)?;
    let reference: Vec<f64> = probes.par_iter().map(|x| pot.at(x)).collect();
    let est = multilevel_estimator(&k, &f, n, b)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg, idx, t);
            let out = est.draw(&mut rng);
            let err = probes.iter().zip(&reference).map(|(x, r)| (out.eval(x) - r).abs()).fold(0.0, f64::max);
            Ok((err, out.queries, out.ok))
        })
        .collect()
}

fn pde_trials(cfg: &ExperimentConfig, problem: Problem, idx: usize, n: u64, trials: usize) -> Result<Vec<(f64, u64, bool)>> {
    let setting: Setting = cfg.setting.parse()?;
    let m = manifold(cfg, problem)?;
    let rhs = right_hand_side(cfg, problem, n)?;
    let solver = ManifoldSolver::new(problem, &rhs, &m, cfg.r, n, setting)?;
    let reference = reference_values(problem, &rhs, &m, solver.points())?;
    Ok((0..trials)
        .into_par_iter()
        .map(|t| {
            let sol = solver.draw(&mut trial_rng(cfg, idx, t));
            (sol.max_error(&reference), sol.queries, sol.ok)
        })
        .collect())
}
