use std::str::FromStr;

use super::{green_kernel, Manifold, PolarChart, Problem, RightHandSide};
use crate::classical::DetInterpolant;
use crate::qestimate::LeafBackend;
use crate::qsingular::leafquad::LeafRule;
use crate::qsingular::{default_cells, multilevel_estimator, smooth_estimator, MultilevelEstimator, Potential, SmoothEstimator};
use crate::rng::{derive_rng, Rng};
use crate::{Error, Result};

/// Information model of the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Setting {
    /// Point values and quadrature only.
    Deterministic,
    /// Monte Carlo leaves.
    Randomized,
    /// Amplitude-estimation leaves.
    Quantum,
}

impl Setting {
    pub fn name(&self) -> &'static str {
        match self {
            Setting::Deterministic => "det",
            Setting::Randomized => "ran",
            Setting::Quantum => "q",
        }
    }
}

impl FromStr for Setting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det" | "deterministic" => Ok(Setting::Deterministic),
            "ran" | "randomized" => Ok(Setting::Randomized),
            "q" | "quantum" => Ok(Setting::Quantum),
            other => Err(Error::Config(format!("unknown setting '{other}'"))),
        }
    }
}

/// Solution values at the probe points of `M`.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Chart coordinates of the probe points.
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub queries: u64,
    pub ok: bool,
}

impl Solution {
    pub fn max_error(&self, reference: &[f64]) -> f64 {
        self.values.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

enum Stochastic {
    None,
    Smooth(SmoothEstimator),
    Integral(MultilevelEstimator),
}

/// Solver for one `(problem, f, M, n, setting)`, reusable across trials.
pub struct ManifoldSolver {
    pub chart: PolarChart,
    points: Vec<Vec<f64>>,
    det: Vec<Vec<f64>>,
    est: Stochastic,
    queries: u64,
}

impl ManifoldSolver {
    pub fn new(problem: Problem, rhs: &RightHandSide, manifold: &Manifold, r: usize, n: u64, setting: Setting) -> Result<Self> {
        let chart = PolarChart::new(problem, manifold.clone())?;
        let k = green_kernel(problem, manifold)?;
        let f = rhs.input(problem);
        let points = chart.probe_points();
        let d = problem.d();
        let backend = match setting {
            Setting::Deterministic => {
                let det = DetInterpolant::with_cells(&|p| f.at(p), r, d, 2 * default_cells(n, r, d))?;
                let input = det.to_input();
                let pot = Potential::new(&k, &input, LeafRule::STANDARD)?;
                let values = points.iter().map(|x| pot.at(x)).collect();
                let queries = det.samples();
                return Ok(ManifoldSolver { chart, points, det: vec![values], est: Stochastic::None, queries });
            }
            Setting::Randomized => LeafBackend::Classical,
            Setting::Quantum => LeafBackend::Quantum,
        };
        if k.d1() == 0 {
            let est = multilevel_estimator(&k, &f, n, backend)?;
            let queries = est.queries();
            return Ok(ManifoldSolver { chart, points, det: Vec::new(), est: Stochastic::Integral(est), queries });
        }
        let est = smooth_estimator(&k, &f, r, n, backend)?;
        let det = est.det_values(&points)?;
        let queries = est.queries();
        Ok(ManifoldSolver { chart, points, det, est: Stochastic::Smooth(est), queries })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn draw(&self, rng: &mut Rng) -> Solution {
        let points = self.points.clone();
        match &self.est {
            Stochastic::None => Solution { points, values: self.det[0].clone(), queries: self.queries, ok: true },
            Stochastic::Integral(est) => {
                let out = est.draw(rng);
                let values = points.iter().map(|x| out.eval(x)).collect();
                Solution { points, values, queries: self.queries, ok: out.ok }
            }
            Stochastic::Smooth(est) => {
                let out = est.draw(&self.det, &points, rng);
                Solution { points, values: out.values, queries: self.queries, ok: out.ok }
            }
        }
    }
}

/// One solve of `-Δu = f` with `u` sampled on the probe points of `M`.
pub fn solve_on_manifold(
    problem: Problem,
    rhs: &RightHandSide,
    manifold: &Manifold,
    n: u64,
    setting: Setting,
    seed: u64,
) -> Result<Solution> {
    let solver = ManifoldSolver::new(problem, rhs, manifold, 1, n, setting)?;
    Ok(solver.draw(&mut derive_rng(seed, 0)))
}
