//! Classical baselines: piecewise tensor-Lagrange interpolation from point
//! values and the Monte Carlo version of the multilevel pipeline.

use crate::pdelab::{solve_on_manifold, Manifold, Problem, RightHandSide, Setting, Solution};
use crate::qestimate::LeafBackend;
use crate::qsingular::interp::{lebesgue_constant, tensor_interp, unrank};
use crate::qsingular::{smooth_apply, InputFunction, Kernel, SmoothOutput};
use crate::{Error, Result};

/// `T_k f` through the multilevel tree with Monte Carlo leaves, budgets
/// selected for leaf rate `1/2`.
pub fn randomized_operator(k: &Kernel, f: &InputFunction, r: usize, n: u64, seed: u64, points: &[Vec<f64>]) -> Result<SmoothOutput> {
    smooth_apply(k, f, r, n, LeafBackend::Classical, seed, points)
}

/// The randomized setting of [`solve_on_manifold`].
pub fn randomized_pipeline(problem: Problem, rhs: &RightHandSide, manifold: &Manifold, n: u64, seed: u64) -> Result<Solution> {
    solve_on_manifold(problem, rhs, manifold, n, Setting::Randomized, seed)
}

/// Piecewise tensor-Lagrange interpolant of degree `r` on a uniform grid of
/// boxes covering `prod [0, extent[k]]`, with `cells[k]` boxes along axis `k`.
#[derive(Debug, Clone)]
pub struct DetInterpolant {
    pub d: usize,
    pub r: usize,
    pub cells: Vec<usize>,
    pub extent: Vec<f64>,
    /// Samples on the tensor grid with `r cells[k] + 1` points per axis,
    /// first axis most significant.
    pub values: Vec<f64>,
}

/// Interpolant from at most `n1` point values.
pub fn det_interp(f: &dyn Fn(&[f64]) -> f64, r: usize, d: usize, n1: u64) -> Result<DetInterpolant> {
    if r == 0 || d == 0 {
        return Err(Error::Input("degree and dimension must be positive".into()));
    }
    if n1 < ((r + 1) as u64).pow(d as u32) {
        return Err(Error::Input(format!("{n1} samples cannot support degree {r} in dimension {d}")));
    }
    let mut per = (n1 as f64).powf(1.0 / d as f64).floor() as usize;
    while ((per + 1) as u64).pow(d as u32) <= n1 {
        per += 1;
    }
    while (per as u64).pow(d as u32) > n1 {
        per -= 1;
    }
    DetInterpolant::with_cells(f, r, d, (per - 1) / r)
}

impl DetInterpolant {
    pub fn with_cells(f: &dyn Fn(&[f64]) -> f64, r: usize, d: usize, cells: usize) -> Result<Self> {
        Self::with_axis_cells(f, r, vec![cells; d])
    }

    pub fn with_axis_cells(f: &dyn Fn(&[f64]) -> f64, r: usize, cells: Vec<usize>) -> Result<Self> {
        let extent = vec![1.0; cells.len()];
        Self::on_box(f, r, cells, extent)
    }

    pub fn on_box(f: &dyn Fn(&[f64]) -> f64, r: usize, cells: Vec<usize>, extent: Vec<f64>) -> Result<Self> {
        if r == 0 || cells.is_empty() || cells.contains(&0) {
            return Err(Error::Input("at least one cell per axis is needed".into()));
        }
        if extent.len() != cells.len() || extent.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Input("box extents must be positive, one per axis".into()));
        }
        let d = cells.len();
        let per: Vec<usize> = cells.iter().map(|c| r * c + 1).collect();
        let total: usize = per.iter().product();
        let mut x = vec![0.0; d];
        let values = (0..total)
            .map(|mut i| {
                for k in (0..d).rev() {
                    x[k] = extent[k] * (i % per[k]) as f64 / (per[k] - 1) as f64;
                    i /= per[k];
                }
                f(&x)
            })
            .collect();
        Ok(DetInterpolant { d, r, cells, extent, values })
    }

    pub fn samples(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let (d, r) = (self.d, self.r);
        let mut cell = vec![0; d];
        let mut t = vec![0.0; d];
        for k in 0..d {
            let c = self.cells[k];
            let s = (x[k] / self.extent[k]).clamp(0.0, 1.0) * c as f64;
            cell[k] = (s.floor() as usize).min(c - 1);
            t[k] = s - cell[k] as f64;
        }
        let local: Vec<f64> = (0..(r + 1).pow(d as u32))
            .map(|a| {
                let b = unrank(a, r + 1, d);
                let idx = (0..d).fold(0, |acc, k| acc * (r * self.cells[k] + 1) + r * cell[k] + b[k]);
                self.values[idx]
            })
            .collect();
        tensor_interp(r, &local, &t)
    }

    /// Cell boundaries on every axis.
    pub fn breaks(&self) -> Vec<Vec<f64>> {
        self.cells
            .iter()
            .zip(&self.extent)
            .map(|(&c, &e)| (1..=c).map(|i| e * i as f64 / c as f64).filter(|&v| v < 1.0).collect())
            .collect()
    }

    /// Bound on `sup |f - P f|` for `f` in the unit ball of `C^r`. Degree
    /// one uses the convexity of the multilinear weights; higher degrees a
    /// Taylor polynomial of degree `r - 1` at the cell centre.
    pub fn residual_bound(&self) -> f64 {
        let r = self.r;
        let half: f64 = (0..self.d).map(|k| self.extent[k] / self.cells[k] as f64 / 2.0).sum();
        if r == 1 {
            return half;
        }
        let lambda = lebesgue_constant(r, 512).powi(self.d as i32);
        let fact: f64 = (1..=r).map(|i| i as f64).product();
        (1.0 + lambda) * half.powi(r as i32) / fact
    }

    /// The interpolant as an input function with its kinks declared.
    pub fn to_input(&self) -> InputFunction {
        let me = self.clone();
        let breaks = self.breaks();
        InputFunction::new(move |x| me.eval(x)).with_breaks(breaks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_low_degree_polynomials() {
        for r in 1..=3 {
            let f = move |x: &[f64]| x[0].powi(r as i32) - 2.0 * x[1] + x[0] * x[1];
            let p = det_interp(&f, r, 2, 400).unwrap();
            for x in [[0.13, 0.77], [0.5, 0.5], [0.99, 0.01]] {
                assert!((p.eval(&x) - f(&x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sample_count_respects_budget() {
        for n1 in [4u64, 9, 50, 1000, 4096] {
            let p = det_interp(&|x: &[f64]| x[0], 1, 2, n1).unwrap();
            assert!(p.samples() <= n1);
        }
        assert!(det_interp(&|x: &[f64]| x[0], 2, 2, 8).is_err());
    }

    #[test]
    fn anisotropic_grid_interpolates() {
        let f = |x: &[f64]| 2.0 * x[0] - x[1] + 0.5;
        let p = DetInterpolant::with_axis_cells(&f, 1, vec![8, 2]).unwrap();
        assert_eq!(p.samples(), 27);
        assert!((p.eval(&[0.3, 0.9]) - f(&[0.3, 0.9])).abs() < 1e-12);
        assert_eq!(p.breaks()[1], vec![0.5]);
        let q = DetInterpolant::on_box(&f, 1, vec![4, 2], vec![1.0, 0.25]).unwrap();
        assert!((q.eval(&[0.3, 0.2]) - f(&[0.3, 0.2])).abs() < 1e-12);
        assert_eq!(q.breaks()[1], vec![0.125, 0.25]);
        assert!((q.residual_bound() - (0.125 + 0.0625)).abs() < 1e-15);
    }

    #[test]
    fn residual_bound_holds_for_unit_c1_functions() {
        let f = |x: &[f64]| (x[0] * 0.9).sin() * (x[1] * 0.9).cos() * 0.5 + 0.3 * (x[1] - 0.5).abs();
        let p = det_interp(&f, 1, 2, 100).unwrap();
        let b = p.residual_bound();
        for i in 0..=60 {
            for j in 0..=60 {
                let x = [i as f64 / 60.0, j as f64 / 60.0];
                assert!((f(&x) - p.eval(&x)).abs() <= b);
            }
        }
    }

    fn probe_error(f: &dyn Fn(&[f64]) -> f64, p: &DetInterpolant) -> f64 {
        let per = 4 * p.cells[0] * p.r + 1;
        let mut worst: f64 = 0.0;
        for i in 0..per {
            for j in 0..per {
                let x = [i as f64 / (per - 1) as f64, j as f64 / (per - 1) as f64];
                worst = worst.max((f(&x) - p.eval(&x)).abs());
            }
        }
        worst
    }

    fn slope(xs: &[f64], ys: &[f64]) -> f64 {
        let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
        let n = lx.len() as f64;
        let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
        let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
        sxy / sxx
    }

    #[test]
    fn smooth_inputs_converge_at_the_second_order_rate() {
        // cos is smoother than the class, so linear interpolation gains h^2.
        let f = |x: &[f64]| (2.0 * std::f64::consts::PI * x[0]).cos();
        let (mut ns, mut es) = (Vec::new(), Vec::new());
        for c in [8usize, 16, 32, 64, 128] {
            let p = DetInterpolant::with_cells(&f, 1, 2, c).unwrap();
            ns.push(p.samples() as f64);
            es.push(probe_error(&f, &p));
        }
        for w in es.windows(2) {
            assert!((w[0] / w[1] - 4.0).abs() < 0.6, "{es:?}");
        }
        let s = slope(&ns, &es);
        assert!((s + 1.0).abs() < 0.1, "{s}");
    }

    #[test]
    fn unit_c1_bumps_converge_at_the_class_rate() {
        // bumps of height ~h between the nodes of the next coarser grid
        let (mut ns, mut es) = (Vec::new(), Vec::new());
        for c in [4usize, 8, 16, 32, 64] {
            let h = 1.0 / (2 * c) as f64;
            let f = move |x: &[f64]| {
                let t = (x[0] / h).fract();
                let u = (x[1] / h).fract();
                0.3 * h * 16.0 * t * t * (1.0 - t) * (1.0 - t) * 16.0 * u * u * (1.0 - u) * (1.0 - u)
            };
            let p = DetInterpolant::with_cells(&f, 1, 2, c).unwrap();
            ns.push(p.samples() as f64);
            es.push(probe_error(&f, &p));
        }
        let s = slope(&ns, &es);
        assert!((s + 0.5).abs() < 0.1, "{s} {es:?}");
    }

    #[test]
    fn constants_and_linear_inputs_have_zero_residual() {
        let p = det_interp(&|_| 0.7, 1, 3, 200).unwrap();
        assert!((p.eval(&[0.2, 0.9, 0.4]) - 0.7).abs() < 1e-15);
        let f = |x: &[f64]| x.iter().sum::<f64>();
        let p = det_interp(&f, 1, 3, 200).unwrap();
        assert!((p.eval(&[0.2, 0.9, 0.4]) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn uniform_importance_sampling_is_plain_monte_carlo() {
        use crate::qestimate::weighted_mean_estimator;
        use crate::rng::derive_rng;
        let f: Vec<f64> = (0..64).map(|i| ((i * 37 % 64) as f64 / 63.0) * 2.0 - 1.0).collect();
        let g = vec![1.0; 64];
        let mean = f.iter().sum::<f64>() / 64.0;
        let var = f.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 64.0;
        let per = 10u64;
        let est = weighted_mean_estimator(&g, &f, per, LeafBackend::Classical).unwrap();
        assert_eq!(est.queries(), per);
        let mut rng = derive_rng(11, 0);
        let draws: Vec<f64> = (0..10_000).map(|_| est.draw(&mut rng).value).collect();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        let v = draws.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (draws.len() - 1) as f64;
        let want = var / per as f64;
        assert!((v / want - 1.0).abs() < 0.05, "{v} vs {want}");
    }

    #[test]
    fn randomized_pipeline_of_zero_is_zero() {
        let s = randomized_pipeline(Problem::PoissonDisk, &RightHandSide::Zero, &Manifold::Domain, 64, 2).unwrap();
        assert!(s.values.iter().all(|v| *v == 0.0));
    }
}
