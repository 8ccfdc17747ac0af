//! Operators applied to smooth inputs: a classical interpolant carries the
//! bulk of `f` and the multilevel estimator only sees the scaled residual.

use super::kernel::Kernel;
use super::leafquad::LeafRule;
use super::multilevel::{plan_for, MultilevelEstimator, MultilevelOutput};
use super::tables::{InputFunction, Potential};
use crate::classical::DetInterpolant;
use crate::qestimate::LeafBackend;
use crate::rng::{derive_rng, Rng};
use crate::{Error, Result};

/// One `T_k (P f) + B T_k ((f - P f) / B)` term.
pub struct SmoothPart {
    pub kernel: Kernel,
    pub det: DetInterpolant,
    /// Bound `B` on the interpolation residual.
    pub scale: f64,
    pub residual: Option<MultilevelEstimator>,
}

impl SmoothPart {
    /// `T_k (P f)` at chart points, by quadrature.
    pub fn det_values(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        let input = self.det.to_input();
        let pot = Potential::new(&self.kernel, &input, LeafRule::STANDARD)?;
        Ok(points.iter().map(|x| pot.at(x)).collect())
    }

    pub fn queries(&self) -> u64 {
        self.det.samples() + self.residual.as_ref().map_or(0, |r| r.queries())
    }
}

/// Sum of [`SmoothPart`]s approximating `T_k f`.
pub struct SmoothEstimator {
    pub parts: Vec<SmoothPart>,
}

/// One sampled output of a [`SmoothEstimator`] on fixed points.
#[derive(Debug, Clone)]
pub struct SmoothOutput {
    pub values: Vec<f64>,
    pub queries: u64,
    pub ok: bool,
}

fn merge_breaks(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = a.len().max(b.len());
    (0..d)
        .map(|k| {
            let mut v: Vec<f64> = a.get(k).into_iter().chain(b.get(k)).flatten().copied().collect();
            v.sort_by(f64::total_cmp);
            v.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
            v
        })
        .collect()
}

impl SmoothPart {
    pub fn new(kernel: &Kernel, f: &InputFunction, det: DetInterpolant, scale: f64, n: u64, backend: LeafBackend) -> Result<Self> {
        Self::with_extra_repeats(kernel, f, det, scale, n, backend, 0)
    }

    /// As [`Self::new`] with `extra` more repetitions for every boosted leaf.
    pub fn with_extra_repeats(
        kernel: &Kernel,
        f: &InputFunction,
        det: DetInterpolant,
        scale: f64,
        n: u64,
        backend: LeafBackend,
        extra: usize,
    ) -> Result<Self> {
        let residual = if scale > 0.0 {
            let (fe, pe) = (f.clone(), det.clone());
            let input = InputFunction::new(move |p| ((fe.at(p) - pe.eval(p)) / scale).clamp(-1.0, 1.0))
                .with_breaks(merge_breaks(&f.breaks, &det.breaks()));
            let mut plan = plan_for(kernel, n, backend)?;
            if plan.nu0 > 1 {
                plan.nu0 += extra;
            }
            for lv in plan.levels.iter_mut().filter(|lv| lv.repeats > 1) {
                lv.repeats += extra;
            }
            Some(MultilevelEstimator::with_plan(kernel, &input, plan, backend, &LeafRule::STANDARD)?)
        } else {
            None
        };
        Ok(SmoothPart { kernel: kernel.clone(), det, scale, residual })
    }
}

impl SmoothEstimator {
    /// Deterministic parts at `points`, computed once and reused by every draw.
    pub fn det_values(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.parts.iter().map(|p| p.det_values(points)).collect()
    }

    pub fn queries(&self) -> u64 {
        self.parts.iter().map(SmoothPart::queries).sum()
    }

    pub fn draw(&self, det: &[Vec<f64>], points: &[Vec<f64>], rng: &mut Rng) -> SmoothOutput {
        let mut values = vec![0.0; points.len()];
        let mut ok = true;
        for (part, dv) in self.parts.iter().zip(det) {
            for (v, d) in values.iter_mut().zip(dv) {
                *v += d;
            }
            if let Some(res) = &part.residual {
                let out: MultilevelOutput = res.draw(rng);
                ok &= out.ok;
                for (v, x) in values.iter_mut().zip(points) {
                    *v += part.scale * out.eval(x);
                }
            }
        }
        SmoothOutput { values, queries: self.queries(), ok }
    }
}

/// Interpolation cells per axis when the budget `n` is shared between
/// point values and the residual estimate.
pub fn default_cells(n: u64, r: usize, d: usize) -> usize {
    let per = (n as f64).powf(1.0 / d as f64);
    (((per - 1.0) / (2 * r) as f64).floor() as usize).max(1)
}

/// Builds the estimator of `T_k f` for `f` in the unit ball of `C^r`.
pub fn smooth_estimator(k: &Kernel, f: &InputFunction, r: usize, n: u64, backend: LeafBackend) -> Result<SmoothEstimator> {
    let (d, d1) = (k.d() as f64, k.d1() as f64);
    if r == 0 {
        return Err(Error::Input("smoothness r must be at least 1".into()));
    }
    if d + k.sigma < d1 && d1 < d {
        return slab_estimator(k, f, r, n, backend);
    }
    let det = DetInterpolant::with_cells(&|p| f.at(p), r, k.d(), default_cells(n, r, k.d()))?;
    let scale = det.residual_bound();
    Ok(SmoothEstimator { parts: vec![SmoothPart::new(k, f, det, scale, n, backend)?] })
}

/// One draw of [`smooth_estimator`] at `points`.
pub fn smooth_apply(
    k: &Kernel,
    f: &InputFunction,
    r: usize,
    n: u64,
    backend: LeafBackend,
    seed: u64,
    points: &[Vec<f64>],
) -> Result<SmoothOutput> {
    let est = smooth_estimator(k, f, r, n, backend)?;
    let det = est.det_values(points)?;
    Ok(est.draw(&det, points, &mut derive_rng(seed, 0)))
}

/// One slab of the decomposition of `[0,1]^d` along the transverse axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    pub l: usize,
    pub p: u64,
    /// Quantum budget `2^{d1 (l+1)} p^d`.
    pub n: u64,
    pub repeats: usize,
}

/// Slabs `H_l` at distance about `2^{-l}` from `[0,1]^{d1} x {0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabDecomposition {
    pub m: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub slabs: Vec<Slab>,
}

/// Used in the log-power bookkeeping of the balanced case.
pub const SLAB_EPS0: f64 = 0.1;

pub fn slab_decomposition(n: u64, r: usize, d: usize, d1: usize, sigma: f64) -> Result<SlabDecomposition> {
    if d1 == 0 || d1 >= d || !(d as f64 + sigma < d1 as f64) {
        return Err(Error::Input("slab decomposition needs d + sigma < d1 < d".into()));
    }
    let (r, df, d1f) = (r as f64, d as f64, d1 as f64);
    let m = ((n as f64).log2() / d1f).ceil().max(1.0) as usize;
    let gap = (r + df) * d1f / df - (r + df + sigma);
    let (delta1, delta2) = if gap > 1e-12 {
        (gap / (2.0 * (r + df)), 0.0)
    } else if gap < -1e-12 {
        (0.0, -gap / (2.0 * (r + df)))
    } else {
        (0.0, 0.0)
    };
    let slabs = (0..=m)
        .map(|l| {
            let e = (d1f / df - delta1) * (m - l) as f64 - delta2 * l as f64;
            let p = 2f64.powf(e).ceil() as u64;
            let repeats = (8.0 * (2.0 * ((m - l + 1) as f64).ln() + 8f64.ln())).ceil() as usize;
            Slab { l, p, n: (1u64 << (d1 * (l + 1))) * p.pow(d as u32), repeats }
        })
        .collect();
    Ok(SlabDecomposition { m, delta1, delta2, slabs })
}

fn slab_estimator(k: &Kernel, f: &InputFunction, r: usize, n: u64, backend: LeafBackend) -> Result<SmoothEstimator> {
    let (d, d1) = (k.d(), k.d1());
    let dec = slab_decomposition(n, r, d, d1, k.sigma)?;
    let sigma1 = d1 as f64 - d as f64;
    let mut parts = Vec::with_capacity(dec.slabs.len());
    for slab in &dec.slabs {
        let last = slab.l == dec.m;
        let outer = 0.5f64.powi(slab.l as i32);
        let inner_edge = if last { 0.0 } else { outer / 2.0 };
        let inside = move |y: &[f64]| y[d1..].iter().all(|&v| v <= outer) && !y[d1..].iter().all(|&v| v < inner_edge);
        let kc = k.clone();
        let eval = move |x: &[f64], y: &[f64]| if inside(y) { kc.eval(x, y) } else { 0.0 };
        let gain = 2f64.powf((sigma1 - k.sigma) * slab.l as f64);
        let mut kl = Kernel::new(eval, k.s, if last { k.sigma } else { sigma1 }, k.norm_bound * gain, k.geometry.clone())?;
        if !last {
            kl = kl.smooth();
        }
        let mut breaks: Vec<Vec<f64>> = (0..d).map(|a| f.breaks.get(a).cloned().unwrap_or_default()).collect();
        for b in breaks.iter_mut().skip(d1) {
            b.push(outer);
            if !last {
                b.push(inner_edge);
            }
        }
        let fl = f.clone().with_breaks(breaks);
        let p = slab.p as usize;
        let cells: Vec<usize> = (0..d).map(|a| if a < d1 { (1 << (slab.l + 1)) * p } else { 2 * p }).collect();
        let extent: Vec<f64> = (0..d).map(|a| if a < d1 { 1.0 } else { outer }).collect();
        let det = DetInterpolant::on_box(&|y| f.at(y), r, cells, extent)?;
        let scale = det.residual_bound();
        // failure e^{-nu_l/8} for this slab instead of 1/4
        let extra = (slab.repeats as f64 - 8.0 * 4f64.ln()).max(0.0).ceil() as usize;
        parts.push(SmoothPart::with_extra_repeats(&kl, &fl, det, scale, slab.n, backend, extra)?);
    }
    Ok(SmoothEstimator { parts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsingular::kernel::power_kernel;

    #[test]
    fn linear_input_is_handled_by_the_deterministic_part() {
        let k = power_kernel(0.0, 2, 2, 1).unwrap();
        let f = InputFunction::new(|p| 0.4 * p[0] - 0.3 * p[1]);
        let pts: Vec<Vec<f64>> = [0.0, 0.3, 0.8].iter().map(|&x| vec![x]).collect();
        let out = smooth_apply(&k, &f, 1, 256, LeafBackend::Quantum, 1, &pts).unwrap();
        let pot = Potential::new(&k, &f, LeafRule::STANDARD).unwrap();
        for (x, v) in pts.iter().zip(&out.values) {
            assert!((pot.at(x) - v).abs() < 1e-9, "{} vs {v}", pot.at(x));
        }
    }

    #[test]
    fn slab_budgets_follow_the_schedule() {
        let dec = slab_decomposition(1 << 10, 1, 2, 1, -1.9).unwrap();
        assert_eq!(dec.m, 10);
        assert!(dec.delta1 > 0.0 && dec.delta2 == 0.0);
        let last = dec.slabs.last().unwrap();
        assert_eq!(last.p, 1);
        for s in &dec.slabs {
            assert_eq!(s.n, (1u64 << (s.l + 1)) * s.p * s.p);
            assert!(s.n >= 2);
        }
        let fail: f64 = dec.slabs.iter().map(|s| (-(s.repeats as f64) / 8.0).exp()).sum();
        assert!(fail < 0.25);
        assert!(slab_decomposition(1 << 10, 1, 2, 1, -0.5).is_err());
        // the balanced and the smooth-input sub-cases
        let dec = slab_decomposition(1 << 10, 1, 2, 1, -1.5).unwrap();
        assert!(dec.delta1 == 0.0 && dec.delta2 == 0.0);
        let dec = slab_decomposition(1 << 10, 2, 2, 1, -1.5).unwrap();
        assert!(dec.delta1 == 0.0 && dec.delta2 > 0.0);
    }

    #[test]
    fn slabs_partition_the_operator() {
        let k = power_kernel(-1.5, 2, 2, 1).unwrap();
        let f = InputFunction::new(|p| 0.5 - 0.25 * p[0] + 0.2 * p[1]);
        let est = smooth_estimator(&k, &f, 1, 64, LeafBackend::Exact).unwrap();
        assert_eq!(est.parts.len(), 7);
        let pts = vec![vec![0.25], vec![0.6]];
        let det = est.det_values(&pts).unwrap();
        let pot = Potential::new(&k, &f, LeafRule::STANDARD).unwrap();
        for (i, x) in pts.iter().enumerate() {
            let sum: f64 = det.iter().map(|d| d[i]).sum();
            assert!((sum - pot.at(x)).abs() < 1e-6, "{sum} vs {}", pot.at(x));
        }
    }
}
