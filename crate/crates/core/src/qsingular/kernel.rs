use std::sync::Arc;

use rand::Rng as _;

use crate::rng::derive_rng;
use crate::{Error, Result};

/// Axis-aligned box `(lo, hi)`.
pub type Bbox = (Vec<f64>, Vec<f64>);

/// How the chart cube `Q1 = [0,1]^d1` and the parameter cube of `Q2`
/// sit in physical space.
pub trait Geometry: Send + Sync {
    fn d(&self) -> usize;
    fn d1(&self) -> usize;
    /// Physical position of a chart point.
    fn x_point(&self, x: &[f64]) -> Vec<f64>;
    /// Physical position of a parameter point of `Q2`.
    fn y_point(&self, p: &[f64]) -> Vec<f64>;
    /// Volume factor of the parameterization of `Q2`.
    fn jacobian(&self, _p: &[f64]) -> f64 {
        1.0
    }
    /// Parameter points where `k(x, .)` is singular. Periodic charts may
    /// list images just outside the cube.
    fn loci(&self, x: &[f64]) -> Vec<Vec<f64>>;
    /// Disjoint boxes of the parameter cube covering every parameter
    /// point within physical distance `radius` of `x_point(x)`.
    fn near_boxes(&self, x: &[f64], radius: f64) -> Vec<Bbox>;
    /// Lipschitz constant of the chart.
    fn chart_lipschitz(&self) -> f64 {
        1.0
    }
}

/// `Q1 = [0,1]^d1` embedded as `(x, 0)` into `Q2 = [0,1]^d`.
#[derive(Debug, Clone, Copy)]
pub struct Euclidean {
    pub d: usize,
    pub d1: usize,
}

impl Geometry for Euclidean {
    fn d(&self) -> usize {
        self.d
    }
    fn d1(&self) -> usize {
        self.d1
    }
    fn x_point(&self, x: &[f64]) -> Vec<f64> {
        let mut p = x.to_vec();
        p.resize(self.d, 0.0);
        p
    }
    fn y_point(&self, p: &[f64]) -> Vec<f64> {
        p.to_vec()
    }
    fn loci(&self, x: &[f64]) -> Vec<Vec<f64>> {
        vec![self.x_point(x)]
    }
    fn near_boxes(&self, x: &[f64], radius: f64) -> Vec<Bbox> {
        let c = self.x_point(x);
        let lo = c.iter().map(|v| (v - radius).max(0.0)).collect();
        let hi = c.iter().map(|v| (v + radius).min(1.0)).collect();
        vec![(lo, hi)]
    }
}

pub type KernelFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// A kernel `k(x, p)` on chart points times parameter points, which
/// includes the volume factor of the parameterization.
#[derive(Clone)]
pub struct Kernel {
    eval: Arc<KernelFn>,
    /// Smoothness order in `x`.
    pub s: u32,
    /// Singularity exponent.
    pub sigma: f64,
    /// Estimate of the class norm.
    pub norm_bound: f64,
    pub geometry: Arc<dyn Geometry>,
    /// Whether `k(x, .)` has a singular point at all.
    pub singular: bool,
}

impl std::fmt::Debug for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Kernel")
            .field("s", &self.s)
            .field("sigma", &self.sigma)
            .field("d", &self.d())
            .field("d1", &self.d1())
            .finish()
    }
}

impl Kernel {
    pub fn new(
        eval: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        s: u32,
        sigma: f64,
        norm_bound: f64,
        geometry: Arc<dyn Geometry>,
    ) -> Result<Self> {
        let d = geometry.d() as f64;
        if s == 0 {
            return Err(Error::Input("smoothness order must be at least 1".into()));
        }
        if !(sigma > -d) {
            return Err(Error::Input(format!("singularity exponent {sigma} must exceed -{d}")));
        }
        if geometry.d1() > geometry.d() {
            return Err(Error::Input("d1 must not exceed d".into()));
        }
        Ok(Kernel { eval: Arc::new(eval), s, sigma, norm_bound, geometry, singular: true })
    }

    pub fn smooth(mut self) -> Self {
        self.singular = false;
        self
    }

    #[inline]
    pub fn eval(&self, x: &[f64], p: &[f64]) -> f64 {
        (self.eval)(x, p)
    }

    pub fn d(&self) -> usize {
        self.geometry.d()
    }

    pub fn d1(&self) -> usize {
        self.geometry.d1()
    }

    /// Coordinate degree of the interpolation operators.
    pub fn degree(&self) -> usize {
        (self.s as usize).saturating_sub(1).max(1)
    }

    pub fn loci(&self, x: &[f64]) -> Vec<Vec<f64>> {
        if self.singular {
            self.geometry.loci(x)
        } else {
            Vec::new()
        }
    }

    /// Growth envelope `|x-y|^sigma + 1` (or `|ln|x-y|| + 1`).
    pub fn envelope(&self, r: f64) -> f64 {
        if self.sigma == 0.0 {
            r.ln().abs() + 1.0
        } else {
            r.powf(self.sigma) + 1.0
        }
    }

    /// Largest ratio `|k(x,p)| / (jacobian * envelope)` over random pairs.
    pub fn spot_check(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = derive_rng(seed, 0x5107);
        let (d, d1) = (self.d(), self.d1());
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x: Vec<f64> = (0..d1).map(|_| rng.random()).collect();
            let p: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            let (xp, yp) = (self.geometry.x_point(&x), self.geometry.y_point(&p));
            let r = xp.iter().zip(&yp).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if r == 0.0 {
                continue;
            }
            let j = self.geometry.jacobian(&p);
            if j == 0.0 {
                continue;
            }
            worst = worst.max(self.eval(&x, &p).abs() / (j * self.envelope(r)));
        }
        worst
    }
}

/// `|x - y|^sigma`, or `ln|x - y|` for `sigma = 0`, with `Q1` embedded in
/// `Q2 = [0,1]^d`.
pub fn power_kernel(sigma: f64, s: u32, d: usize, d1: usize) -> Result<Kernel> {
    let geometry = Arc::new(Euclidean { d, d1 });
    let g = geometry.clone();
    Kernel::new(
        move |x, p| {
            let xp = g.x_point(x);
            let r2: f64 = xp.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
            if sigma == 0.0 {
                0.5 * r2.ln()
            } else {
                r2.powf(0.5 * sigma)
            }
        },
        s,
        sigma,
        1.0,
        geometry,
    )
}

/// The constant kernel `k = 1` on `[0,1]^d1 x [0,1]^d`.
pub fn unit_kernel(d: usize, d1: usize) -> Result<Kernel> {
    Ok(Kernel::new(|_, _| 1.0, 2, 0.0, 1.0, Arc::new(Euclidean { d, d1 }))?.smooth())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_family_respects_envelope() {
        for sigma in [-1.0, 0.0, 1.0] {
            let k = power_kernel(sigma, 2, 2, 1).unwrap();
            assert!(k.spot_check(2000, 3) <= k.norm_bound + 1e-12, "sigma={sigma}");
        }
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(power_kernel(-2.0, 2, 2, 1).is_err());
        assert!(power_kernel(-1.0, 0, 2, 1).is_err());
    }

    #[test]
    fn near_box_is_clipped() {
        let g = Euclidean { d: 2, d1: 1 };
        let b = g.near_boxes(&[0.1], 0.25);
        assert_eq!(b, vec![(vec![0.0, 0.0], vec![0.35, 0.25])]);
    }
}
