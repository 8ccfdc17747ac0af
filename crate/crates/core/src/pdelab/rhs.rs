use super::{dot, green_kernel, Manifold, PolarChart, Problem};
use crate::qsingular::leafquad::LeafRule;
use crate::qsingular::{default_cells, InputFunction, Potential};
use crate::{Error, Result};

/// Largest slope of `t^2 (1 - t)^2` on `[0, 1]`.
const PSI_SLOPE: f64 = 0.192_450_089_729_875_25;

fn psi(t: f64) -> f64 {
    t * t * (1.0 - t) * (1.0 - t)
}

/// Registered right-hand sides, as functions of the polar parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RightHandSide {
    Zero,
    Constant(f64),
    /// `scale * (-Δ)(1 - |x|^2)^2`.
    Manufactured { scale: f64 },
    /// The manufactured input plus `amplitude h prod 16 psi` bumps on a grid
    /// of `cells` boxes of side `h` per parameter axis, in the boxes whose
    /// radial centre is at least `1/4`. The bumps vanish on every node of
    /// that grid.
    Bumps { scale: f64, amplitude: f64, cells: usize },
}

impl RightHandSide {
    /// Manufactured input with unit `C^1` norm in the parameters.
    pub fn manufactured(problem: Problem) -> Self {
        RightHandSide::Manufactured { scale: 1.0 / slope(problem) }
    }

    /// The manufactured input with a bump train on twice the interpolation
    /// grid used at budget `n`, so that no point-value method below that
    /// resolution can see the bumps.
    pub fn hard_instance(problem: Problem, n: u64) -> Self {
        let scale = 0.25 / slope(problem);
        RightHandSide::Bumps {
            scale,
            amplitude: 0.75 / (16.0 * PSI_SLOPE),
            cells: 2 * default_cells(n, 1, problem.d()),
        }
    }

    /// Bound on `max(sup|f|, max_k sup|d_k f|)` in the parameters.
    pub fn c1_bound(&self, problem: Problem) -> f64 {
        let d = problem.d() as f64;
        match *self {
            RightHandSide::Zero => 0.0,
            RightHandSide::Constant(c) => c.abs(),
            RightHandSide::Manufactured { scale } => scale.abs() * slope(problem).max(4.0 * d),
            RightHandSide::Bumps { scale, amplitude, .. } => {
                (scale.abs() * slope(problem) + amplitude.abs() * 16.0 * PSI_SLOPE).max(scale.abs() * 4.0 * d + amplitude.abs())
            }
        }
    }

    fn manufactured_at(problem: Problem, scale: f64, rho: f64) -> f64 {
        let d = problem.d() as f64;
        scale * (4.0 * d - 4.0 * (d + 2.0) * rho * rho)
    }

    fn bump_at(amplitude: f64, cells: usize, p: &[f64]) -> f64 {
        let c = cells as f64;
        let rc = ((p[0] * c).floor().min(c - 1.0) + 0.5) / c;
        if rc < 0.25 {
            return 0.0;
        }
        let prod: f64 = p.iter().map(|v| {
            let s = v * c;
            16.0 * psi(s - s.floor().min(c - 1.0))
        }).product();
        amplitude * prod / c
    }

    /// The input as a function of the polar parameters.
    pub fn input(&self, problem: Problem) -> InputFunction {
        match *self {
            RightHandSide::Zero => InputFunction::constant(0.0),
            RightHandSide::Constant(c) => InputFunction::constant(c),
            RightHandSide::Manufactured { scale } => {
                InputFunction::new(move |p| Self::manufactured_at(problem, scale, p[0]))
            }
            RightHandSide::Bumps { scale, amplitude, cells } => {
                let grid: Vec<f64> = (1..cells).map(|i| i as f64 / cells as f64).collect();
                InputFunction::new(move |p| Self::manufactured_at(problem, scale, p[0]) + Self::bump_at(amplitude, cells, p))
                    .with_breaks(vec![grid; problem.d()])
            }
        }
    }
}

/// Radial slope bound of the unscaled manufactured input.
fn slope(problem: Problem) -> f64 {
    8.0 * (problem.d() as f64 + 2.0)
}

/// Closed-form solution at a physical point.
pub fn exact_solution(problem: Problem, rhs: &RightHandSide, x: &[f64]) -> Result<f64> {
    let w = 1.0 - dot(x, x);
    match *rhs {
        RightHandSide::Zero => Ok(0.0),
        RightHandSide::Constant(c) => Ok(c * w / (2.0 * problem.d() as f64)),
        RightHandSide::Manufactured { scale } => Ok(scale * w * w),
        RightHandSide::Bumps { .. } => Err(Error::Unsupported("the bump train has no closed-form solution".into())),
    }
}

/// Reference solution at chart points of `M`: the closed form, plus a
/// quadrature of the Green's representation for the bump train.
pub fn reference_values(problem: Problem, rhs: &RightHandSide, manifold: &Manifold, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let chart = PolarChart::new(problem, manifold.clone())?;
    let (smooth, bumps) = match *rhs {
        RightHandSide::Bumps { scale, amplitude, cells } => {
            (RightHandSide::Manufactured { scale }, Some(RightHandSide::Bumps { scale: 0.0, amplitude, cells }))
        }
        other => (other, None),
    };
    let mut out: Vec<f64> = points.iter().map(|x| exact_solution(problem, &smooth, &chart.x_phys(x))).collect::<Result<_>>()?;
    if let Some(b) = bumps {
        let k = green_kernel(problem, manifold)?;
        let input = b.input(problem);
        let pot = Potential::new(&k, &input, LeafRule::STANDARD)?;
        for (v, x) in out.iter_mut().zip(points) {
            *v += pot.at(x);
        }
    }
    Ok(out)
}
