use rand::Rng as _;

use super::mean::{check_bounded, draw_once, weighted_mean_estimator, Estimate, LeafBackend};
use crate::qcore::estimator::{Draw, MeanEstimator};
use crate::quad::{integrate_cell, CellRule, Cover, Region};
use crate::rng::{derive_rng, Rng};
use crate::{Error, Result};

/// Largest total dyadic refinement `d * k` allowed for cell partitions.
pub const MAX_TOTAL_REFINEMENT: usize = 22;

/// A weighted integral `I_{Q,g} f = ∫_Q g f` over a region.
pub struct IntegrationProblem<'a> {
    pub region: Region,
    pub weight: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    /// Point where the weight may be singular.
    pub singular: Option<Vec<f64>>,
    pub rule: CellRule,
}

/// Cells of positive measure of a uniform partition of the bounding cube.
#[derive(Debug, Clone)]
pub struct CellPartition {
    pub cells_per_axis: usize,
    /// Barycenter of each cell intersected with the region.
    pub points: Vec<Vec<f64>>,
    /// `∫_{Q_i} g`.
    pub weights: Vec<f64>,
    /// `∫ |g|` over the region, accumulated over the cells.
    pub l1_norm: f64,
    /// Relative change of `∫ g` under one more level of refinement, if checked.
    pub refinement_gap: Option<f64>,
}

impl CellPartition {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `h(i) = N ∫_{Q_i} g`.
    pub fn h(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.weights.iter().map(|w| n * w).collect()
    }

    /// `sum_i f(x_i) ∫_{Q_i} g`, the integral of `g` times the piecewise
    /// constant interpolant of `f`.
    pub fn interpolated_integral(&self, f: &dyn Fn(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Refinement `k` with `2^{-k} L diam <= 1/n`, capped.
pub fn auto_refinement(lipschitz: f64, n: u64, diam: f64, dim: usize) -> usize {
    let want = (n as f64 * lipschitz * diam).max(2.0).log2().ceil() as usize;
    want.clamp(1, MAX_TOTAL_REFINEMENT / dim.max(1))
}

/// Lipschitz constant probed by finite differences on a coarse grid.
/// This is a heuristic lower estimate of the true constant.
pub fn probe_lipschitz(f: &dyn Fn(&[f64]) -> f64, region: &Region, per_axis: usize) -> f64 {
    let (lo, hi) = region.bbox();
    let d = lo.len();
    let h: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / per_axis as f64).collect();
    let mut best: f64 = 0.0;
    let mut idx = vec![0usize; d];
    loop {
        let x: Vec<f64> = (0..d).map(|k| lo[k] + (idx[k] as f64 + 0.5) * h[k]).collect();
        if region.contains(&x) {
            let fx = f(&x);
            for k in 0..d {
                let mut y = x.clone();
                y[k] += h[k];
                if region.contains(&y) {
                    best = best.max((f(&y) - fx).abs() / h[k]);
                }
            }
        }
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            return best;
        }
    }
}

fn cell_pass(problem: &IntegrationProblem, per_axis: usize) -> (Vec<Vec<f64>>, Vec<f64>, f64) {
    let (lo, hi) = problem.region.bbox();
    let d = lo.len();
    let h: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / per_axis as f64).collect();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut l1 = 0.0;
    let mut idx = vec![0usize; d];
    let mut acc = vec![0.0; d + 3];
    loop {
        let clo: Vec<f64> = (0..d).map(|k| lo[k] + idx[k] as f64 * h[k]).collect();
        let chi: Vec<f64> = (0..d).map(|k| lo[k] + (idx[k] + 1) as f64 * h[k]).collect();
        if problem.region.classify(&clo, &chi) != Cover::Outside {
            acc.iter_mut().for_each(|a| *a = 0.0);
            let mut integrand = |y: &[f64], w: f64, a: &mut [f64]| {
                let g = (problem.weight)(y);
                a[0] += w * g;
                a[1] += w * g.abs();
                a[2] += w;
                for k in 0..y.len() {
                    a[3 + k] += w * y[k];
                }
            };
            integrate_cell(&mut integrand, &problem.region, &clo, &chi, problem.singular.as_deref(), &problem.rule, &mut acc);
            let cell_vol: f64 = h.iter().product();
            if acc[2] > 1e-14 * cell_vol {
                points.push((0..d).map(|k| acc[3 + k] / acc[2]).collect());
                weights.push(acc[0]);
                l1 += acc[1];
            }
        }
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            return (points, weights, l1);
        }
    }
}

/// Partitions the bounding cube into `2^{dk}` cells and integrates the
/// weight over each cell of positive measure.
pub fn partition_cells(problem: &IntegrationProblem, k: usize, check_refinement: bool) -> Result<CellPartition> {
    let d = problem.region.dim();
    if d == 0 || d * k > MAX_TOTAL_REFINEMENT {
        return Err(Error::Input(format!("refinement {k} in dimension {d} exceeds the cap")));
    }
    let per_axis = 1usize << k;
    let (points, weights, l1_norm) = cell_pass(problem, per_axis);
    if weights.is_empty() {
        return Err(Error::Input("region has zero measure".into()));
    }
    let refinement_gap = if check_refinement && d * (k + 1) <= MAX_TOTAL_REFINEMENT {
        let coarse: f64 = weights.iter().sum();
        let (_, fine, _) = cell_pass(problem, 2 * per_axis);
        let fine: f64 = fine.iter().sum();
        Some((coarse - fine).abs() / fine.abs().max(1e-300))
    } else {
        None
    };
    Ok(CellPartition { cells_per_axis: per_axis, points, weights, l1_norm, refinement_gap })
}

/// Estimator of `∫_Q g f` built on a cell partition.
pub fn weighted_integral_estimator(
    cells: &CellPartition,
    f: &dyn Fn(&[f64]) -> f64,
    n: u64,
    backend: LeafBackend,
) -> Result<Box<dyn MeanEstimator>> {
    let values: Vec<f64> = cells.points.iter().map(|x| f(x)).collect();
    check_bounded(&values)?;
    weighted_mean_estimator(&cells.h(), &values, n, backend)
}

/// One draw of the weighted integration estimator with refinement `k`.
pub fn weighted_integral(
    problem: &IntegrationProblem,
    f: &dyn Fn(&[f64]) -> f64,
    n: u64,
    k: usize,
    backend: LeafBackend,
    seed: u64,
) -> Result<Estimate> {
    let cells = partition_cells(problem, k, false)?;
    let est = weighted_integral_estimator(&cells, f, n, backend)?;
    Ok(draw_once(est.as_ref(), &mut derive_rng(seed, 0)))
}

/// Classical importance sampling for `∫ g f` with points drawn from the
/// density `|g| / ‖g‖_1`. The sampler returns a point and `sign g` there.
pub struct DensityMc<'a> {
    pub sampler: &'a (dyn Fn(&mut Rng) -> (Vec<f64>, f64) + Sync),
    pub f: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    pub l1_norm: f64,
    pub samples: u64,
}

impl MeanEstimator for DensityMc<'_> {
    fn draw(&self, rng: &mut Rng) -> Draw {
        if self.samples == 0 {
            return Draw { value: 0.0, ok: true };
        }
        let s: f64 = (0..self.samples)
            .map(|_| {
                let (y, sign) = (self.sampler)(rng);
                sign * (self.f)(&y)
            })
            .sum();
        Draw { value: self.l1_norm * s / self.samples as f64, ok: true }
    }
    fn queries(&self) -> u64 {
        self.samples
    }
}

/// Sampler for the density `(1-p) y^{-p}` on `[0,1]`, `0 <= p < 1`, by inverse CDF.
pub fn power_density_sampler(p: f64) -> impl Fn(&mut Rng) -> (Vec<f64>, f64) + Sync {
    move |rng: &mut Rng| {
        let u: f64 = rng.random();
        (vec![u.powf(1.0 / (1.0 - p))], 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(_: &[f64]) -> f64 {
        1.0
    }

    #[test]
    fn unit_square_examples() {
        let p = IntegrationProblem { region: Region::unit_cube(2), weight: &unit, singular: None, rule: CellRule::WEIGHTS };
        let one = weighted_integral(&p, &unit, 64, 3, LeafBackend::Exact, 0).unwrap();
        assert!((one.value - 1.0).abs() < 1e-12);
        let x1 = weighted_integral(&p, &|x: &[f64]| x[0], 64, 3, LeafBackend::Exact, 0).unwrap();
        assert!((x1.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn log_weight_on_disk() {
        let g = |y: &[f64]| -(y[0].hypot(y[1])).ln() / (2.0 * std::f64::consts::PI);
        let p = IntegrationProblem {
            region: Region::Ball { center: vec![0.0, 0.0], radius: 1.0 },
            weight: &g,
            singular: Some(vec![0.0, 0.0]),
            rule: CellRule::WEIGHTS,
        };
        let cells = partition_cells(&p, 4, true).unwrap();
        let total: f64 = cells.weights.iter().sum();
        assert!((total - 0.25).abs() < 2e-3, "{total}");
        assert!(cells.refinement_gap.unwrap() < 1e-2);
        // h has L1^N norm at most that of g
        let n = cells.len() as f64;
        assert!(cells.h().iter().map(|v| v.abs()).sum::<f64>() / n <= cells.l1_norm + 1e-12);
    }

    #[test]
    fn zero_measure_region_is_rejected() {
        let empty = Region::Intersection(vec![
            Region::Cube { lo: vec![0.0, 0.0], hi: vec![0.2, 0.2] },
            Region::Cube { lo: vec![0.5, 0.5], hi: vec![1.0, 1.0] },
        ]);
        let p = IntegrationProblem { region: empty, weight: &unit, singular: None, rule: CellRule::WEIGHTS };
        assert!(matches!(partition_cells(&p, 2, false), Err(Error::Input(_))));
    }

    #[test]
    fn density_sampler_integrates_power_weight() {
        let s = power_density_sampler(0.5);
        let mc = DensityMc { sampler: &s, f: &unit, l1_norm: 2.0, samples: 100 };
        let mut rng = derive_rng(4, 0);
        assert_eq!(mc.draw(&mut rng).value, 2.0);
    }
}
