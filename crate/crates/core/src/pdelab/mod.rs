//! Poisson problems on the unit disk and ball, posed through their
//! Dirichlet Green's functions, and the solution operator restricted to a
//! point, a circle or the whole domain.

mod chart;
mod rhs;
mod solve;

pub use chart::{Manifold, PolarChart};
pub use rhs::{exact_solution, reference_values, RightHandSide};
pub use solve::{solve_on_manifold, ManifoldSolver, Setting, Solution};

use std::str::FromStr;
use std::sync::Arc;

use crate::qsingular::Kernel;
use crate::{Error, Result};

/// Registered problems `-Δu = f` in the unit ball of `R^d`, `u = 0` on the
/// boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    PoissonDisk,
    PoissonBall,
}

impl Problem {
    pub fn d(&self) -> usize {
        match self {
            Problem::PoissonDisk => 2,
            Problem::PoissonBall => 3,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Problem::PoissonDisk => "poisson-disk",
            Problem::PoissonBall => "poisson-ball",
        }
    }

    /// Singularity exponent `2 - d` of the Green's function.
    pub fn sigma(&self) -> f64 {
        2.0 - self.d() as f64
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson-disk" => Ok(Problem::PoissonDisk),
            "poisson-ball" => Ok(Problem::PoissonBall),
            _ => Err(Error::Unsupported(format!("problem '{s}'"))),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dirichlet Green's function of the unit ball at physical points, by the
/// method of images. Zero on the diagonal and outside the closed ball.
pub fn green(problem: Problem, x: &[f64], y: &[f64]) -> f64 {
    let (xx, yy, xy) = (dot(x, x), dot(y, y), dot(x, y));
    if xx > 1.0 || yy > 1.0 {
        return 0.0;
    }
    let r2 = (xx - 2.0 * xy + yy).max(0.0);
    if r2 == 0.0 {
        return 0.0;
    }
    // |y| |x - y*|, squared
    let image2 = (xx * yy - 2.0 * xy + 1.0).max(r2);
    match problem {
        Problem::PoissonDisk => -(r2 / image2).ln() / (4.0 * std::f64::consts::PI),
        Problem::PoissonBall => (1.0 / r2.sqrt() - 1.0 / image2.sqrt()) / (4.0 * std::f64::consts::PI),
    }
}

/// The Green's function pulled back to `chart x parameter cube`, including
/// the volume factor of the polar parameterization.
pub fn green_kernel(problem: Problem, manifold: &Manifold) -> Result<Kernel> {
    let chart = Arc::new(PolarChart::new(problem, manifold.clone())?);
    let c = chart.clone();
    let lip = chart.x_lipschitz();
    Kernel::new(
        move |x, p| {
            let j = c.volume(p);
            if j == 0.0 {
                return 0.0;
            }
            green(problem, &c.x_phys(x), &c.y_phys(p)) * j
        },
        2,
        problem.sigma(),
        lip.max(1.0).powi(2),
        chart,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interior(rng: &mut impl rand::Rng, d: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            if dot(&v, &v) < 0.98 {
                return v;
            }
        }
    }

    #[test]
    fn disk_green_at_origin_is_the_free_log() {
        for y in [[0.3, 0.1], [-0.5, 0.7], [0.01, 0.0]] {
            let want = -(dot(&y, &y).sqrt()).ln() / (2.0 * std::f64::consts::PI);
            assert!((green(Problem::PoissonDisk, &[0.0, 0.0], &y) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn green_vanishes_on_the_boundary() {
        let mut rng = crate::rng::derive_rng(5, 0);
        for problem in [Problem::PoissonDisk, Problem::PoissonBall] {
            let d = problem.d();
            for _ in 0..100 {
                let x = interior(&mut rng, d);
                let mut y = interior(&mut rng, d);
                let norm = dot(&y, &y).sqrt();
                y.iter_mut().for_each(|v| *v /= norm);
                assert!(green(problem, &x, &y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn green_is_symmetric() {
        let mut rng = crate::rng::derive_rng(6, 0);
        for problem in [Problem::PoissonDisk, Problem::PoissonBall] {
            for _ in 0..100 {
                let x = interior(&mut rng, problem.d());
                let y = interior(&mut rng, problem.d());
                let (a, b) = (green(problem, &x, &y), green(problem, &y, &x));
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn registry_round_trips() {
        for p in [Problem::PoissonDisk, Problem::PoissonBall] {
            assert_eq!(p.id().parse::<Problem>().unwrap(), p);
        }
        assert!(matches!("poisson-square".parse::<Problem>(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn kernels_respect_their_envelope() {
        for problem in [Problem::PoissonDisk, Problem::PoissonBall] {
            for m in [Manifold::Point(vec![0.0; problem.d()]), Manifold::Circle { radius: 0.5 }, Manifold::Domain] {
                let k = green_kernel(problem, &m).unwrap();
                assert!(k.spot_check(2000, 9) <= k.norm_bound, "{problem:?} {m:?}");
            }
        }
    }
}
