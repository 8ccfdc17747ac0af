use std::f64::consts::PI;

use super::{dot, Problem};
use crate::qsingular::{Bbox, Geometry};
use crate::{Error, Result};

/// The set `M` on which the solution is wanted.
#[derive(Debug, Clone, PartialEq)]
pub enum Manifold {
    /// One interior point.
    Point(Vec<f64>),
    /// Centred circle in the first coordinate plane, chart `t -> r e(2 pi t)`.
    Circle { radius: f64 },
    /// The whole domain, through the bounding-box chart `x -> 2x - 1`.
    Domain,
}

impl Manifold {
    pub fn d1(&self, d: usize) -> usize {
        match self {
            Manifold::Point(_) => 0,
            Manifold::Circle { .. } => 1,
            Manifold::Domain => d,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Manifold::Point(_) => "point",
            Manifold::Circle { .. } => "circle",
            Manifold::Domain => "domain",
        }
    }
}

/// Chart points of `M` and polar parameters of the ball.
///
/// Parameters are `(rho, theta)` in the disk and `(rho, t, phi)` in the
/// ball, all scaled to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct PolarChart {
    pub problem: Problem,
    pub manifold: Manifold,
}

fn wrap(v: f64) -> f64 {
    v - v.floor()
}

impl PolarChart {
    pub fn new(problem: Problem, manifold: Manifold) -> Result<Self> {
        match &manifold {
            Manifold::Point(x) if x.len() != problem.d() || dot(x, x) >= 1.0 => {
                return Err(Error::Input("the point must lie inside the domain".into()))
            }
            Manifold::Circle { radius } if !(*radius > 0.0 && *radius < 1.0) => {
                return Err(Error::Input("circle radius must lie in (0, 1)".into()))
            }
            _ => {}
        }
        Ok(PolarChart { problem, manifold })
    }

    pub fn x_phys(&self, x: &[f64]) -> Vec<f64> {
        let d = self.problem.d();
        match &self.manifold {
            Manifold::Point(p) => p.clone(),
            Manifold::Circle { radius } => {
                let mut v = vec![0.0; d];
                v[0] = radius * (2.0 * PI * x[0]).cos();
                v[1] = radius * (2.0 * PI * x[0]).sin();
                v
            }
            Manifold::Domain => x.iter().map(|v| 2.0 * v - 1.0).collect(),
        }
    }

    pub fn y_phys(&self, p: &[f64]) -> Vec<f64> {
        let rho = p[0];
        if self.problem.d() == 2 {
            let a = 2.0 * PI * p[1];
            vec![rho * a.cos(), rho * a.sin()]
        } else {
            let (t, a) = (PI * p[1], 2.0 * PI * p[2]);
            vec![rho * t.sin() * a.cos(), rho * t.sin() * a.sin(), rho * t.cos()]
        }
    }

    /// Volume factor of the polar parameterization.
    pub fn volume(&self, p: &[f64]) -> f64 {
        if self.problem.d() == 2 {
            2.0 * PI * p[0]
        } else {
            2.0 * PI * PI * p[0] * p[0] * (PI * p[1]).sin()
        }
    }

    /// Polar parameters of a physical point.
    pub fn to_param(&self, y: &[f64]) -> Vec<f64> {
        let rho = dot(y, y).sqrt();
        let phi = wrap(y[1].atan2(y[0]) / (2.0 * PI));
        if self.problem.d() == 2 {
            vec![rho, phi]
        } else {
            let t = if rho > 0.0 { (y[2] / rho).clamp(-1.0, 1.0).acos() / PI } else { 0.0 };
            vec![rho, t, phi]
        }
    }

    pub fn x_lipschitz(&self) -> f64 {
        match &self.manifold {
            Manifold::Point(_) => 0.0,
            Manifold::Circle { radius } => 2.0 * PI * radius,
            Manifold::Domain => 2.0,
        }
    }

    /// Evaluation points of `M`, in chart coordinates: the point itself,
    /// 128 equispaced circle points, or the grid points with `|x| <= 0.8`.
    pub fn probe_points(&self) -> Vec<Vec<f64>> {
        match &self.manifold {
            Manifold::Point(_) => vec![Vec::new()],
            Manifold::Circle { .. } => (0..128).map(|j| vec![j as f64 / 128.0]).collect(),
            Manifold::Domain => {
                let d = self.problem.d();
                let per: usize = if d == 2 { 25 } else { 9 };
                let total = per.pow(d as u32);
                (0..total)
                    .map(|mut i| {
                        let mut x = vec![0.0; d];
                        for k in (0..d).rev() {
                            x[k] = (i % per) as f64 / (per - 1) as f64;
                            i /= per;
                        }
                        x
                    })
                    .filter(|x| {
                        let p = self.x_phys(x);
                        dot(&p, &p) <= 0.64 + 1e-12
                    })
                    .collect()
            }
        }
    }
}

impl Geometry for PolarChart {
    fn d(&self) -> usize {
        self.problem.d()
    }
    fn d1(&self) -> usize {
        self.manifold.d1(self.problem.d())
    }
    fn x_point(&self, x: &[f64]) -> Vec<f64> {
        self.x_phys(x)
    }
    fn y_point(&self, p: &[f64]) -> Vec<f64> {
        self.y_phys(p)
    }
    fn jacobian(&self, p: &[f64]) -> f64 {
        self.volume(p)
    }
    /// The image point and its copies one period away in the azimuth. The
    /// origin maps to a whole face, where the volume factor already cancels
    /// the singularity, and is not listed.
    fn loci(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let xp = self.x_phys(x);
        let r2 = dot(&xp, &xp);
        if r2 >= 1.0 {
            return Vec::new();
        }
        if r2 == 0.0 {
            let d = self.problem.d();
            return (0..=8).map(|j| {
                let mut q = vec![0.0; d];
                q[d - 1] = j as f64 / 8.0;
                q
            }).collect();
        }
        let p = self.to_param(&xp);
        let last = p.len() - 1;
        [-1.0, 0.0, 1.0]
            .iter()
            .map(|s| {
                let mut q = p.clone();
                q[last] += s;
                q
            })
            .collect()
    }
    fn near_boxes(&self, x: &[f64], radius: f64) -> Vec<Bbox> {
        let xp = self.x_phys(x);
        let rho = dot(&xp, &xp).sqrt();
        if rho - radius >= 1.0 {
            return Vec::new();
        }
        let d = self.problem.d();
        let (r_lo, r_hi) = ((rho - radius).max(0.0), (rho + radius).min(1.0));
        let mut lo = vec![0.0; d];
        let mut hi = vec![1.0; d];
        lo[0] = r_lo;
        hi[0] = r_hi;
        if radius >= rho {
            return vec![(lo, hi)];
        }
        let p = self.to_param(&xp);
        let half = (radius / rho).asin();
        if d == 3 {
            lo[1] = (p[1] - half / PI).max(0.0);
            hi[1] = (p[1] + half / PI).min(1.0);
            return vec![(lo, hi)];
        }
        let w = half / (2.0 * PI);
        let (a, b) = (p[1] - w, p[1] + w);
        let band = |t0: f64, t1: f64| (vec![r_lo, t0], vec![r_hi, t1]);
        if a < 0.0 {
            vec![band(0.0, b), band(a + 1.0, 1.0)]
        } else if b > 1.0 {
            vec![band(0.0, b - 1.0), band(a, 1.0)]
        } else {
            vec![band(a, b)]
        }
    }
    fn chart_lipschitz(&self) -> f64 {
        self.x_lipschitz().max(1.0)
    }
}
