//! Accurate integrals of `k(x, .) f` used as leaf targets.

use std::sync::Arc;

use super::kernel::{Bbox, Kernel};
use super::leafquad::{aligned_cells, integrate_box, integrate_cell, LeafRule};
use crate::quad::{box_dist, dist, gauss};
use crate::{Error, Result};

pub type InputFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// An input function on the parameter cube of `Q2` with `|f| <= 1`,
/// together with the per-axis coordinates where it may fail to be smooth.
#[derive(Clone)]
pub struct InputFunction {
    pub eval: Arc<InputFn>,
    pub breaks: Vec<Vec<f64>>,
}

impl InputFunction {
    pub fn new(eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        InputFunction { eval: Arc::new(eval), breaks: Vec::new() }
    }

    pub fn with_breaks(mut self, breaks: Vec<Vec<f64>>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c)
    }

    #[inline]
    pub fn at(&self, p: &[f64]) -> f64 {
        (self.eval)(p)
    }
}

/// `[int g f, int |g f|, int |g|]` over `boxes` for `g = k(x, .)`.
pub fn kernel_moments(k: &Kernel, x: &[f64], f: &InputFunction, boxes: &[Bbox], rule: &LeafRule) -> [f64; 3] {
    let singular = k.loci(x);
    let mut acc = [0.0; 3];
    let mut g = |y: &[f64], w: f64, a: &mut [f64]| {
        let kv = k.eval(x, y);
        let fv = f.at(y);
        a[0] += w * kv * fv;
        a[1] += w * (kv * fv).abs();
        a[2] += w * kv.abs();
    };
    for (lo, hi) in boxes {
        integrate_box(&mut g, lo, hi, &f.breaks, &singular, rule, &mut acc);
    }
    acc
}

/// `T f (x) = int k(x, p) f(p) dp` over the whole parameter cube for many
/// chart points, reusing function values at the regular nodes.
pub struct Potential<'a> {
    kernel: &'a Kernel,
    f: &'a InputFunction,
    rule: LeafRule,
    cells: Vec<Bbox>,
    diam: Vec<f64>,
    /// Node coordinates, `d` per node.
    nodes: Vec<f64>,
    /// Weight times function value per node.
    wf: Vec<f64>,
    /// Start of each cell's nodes.
    offsets: Vec<usize>,
}

impl<'a> Potential<'a> {
    pub fn new(kernel: &'a Kernel, f: &'a InputFunction, rule: LeafRule) -> Result<Self> {
        let d = kernel.d();
        let cells = aligned_cells(&vec![0.0; d], &vec![1.0; d], &f.breaks, rule.max_side);
        let gl = gauss(rule.order);
        let mut nodes = Vec::new();
        let mut wf = Vec::new();
        let mut offsets = Vec::with_capacity(cells.len() + 1);
        let mut diam = Vec::with_capacity(cells.len());
        let mut y = vec![0.0; d];
        for (lo, hi) in &cells {
            offsets.push(wf.len());
            diam.push(dist(lo, hi));
            let count = rule.order.pow(d as u32);
            for idx in 0..count {
                let mut rest = idx;
                let mut w = 1.0;
                for k in 0..d {
                    let j = rest % rule.order;
                    rest /= rule.order;
                    let half = 0.5 * (hi[k] - lo[k]);
                    y[k] = lo[k] + half * (1.0 + gl.nodes[j]);
                    w *= half * gl.weights[j];
                }
                let fv = f.at(&y);
                if !(fv.abs() <= 1.0 + 1e-12) {
                    return Err(Error::Contract(format!("input value {fv} exceeds 1 in modulus")));
                }
                nodes.extend_from_slice(&y);
                wf.push(w * fv);
            }
        }
        offsets.push(wf.len());
        Ok(Potential { kernel, f, rule, cells, diam, nodes, wf, offsets })
    }

    pub fn at(&self, x: &[f64]) -> f64 {
        let d = self.kernel.d();
        let loci = self.kernel.loci(x);
        let mut sum = 0.0;
        for (c, (lo, hi)) in self.cells.iter().enumerate() {
            let near = loci.iter().any(|p| box_dist(lo, hi, p) < self.rule.near_ratio * self.diam[c]);
            if near {
                let singular = &loci;
                let mut acc = [0.0];
                let mut g = |y: &[f64], w: f64, a: &mut [f64]| a[0] += w * self.kernel.eval(x, y) * self.f.at(y);
                integrate_cell(&mut g, lo, hi, singular, &self.rule, &mut acc);
                sum += acc[0];
            } else {
                for j in self.offsets[c]..self.offsets[c + 1] {
                    let wf = self.wf[j];
                    if wf != 0.0 {
                        sum += wf * self.kernel.eval(x, &self.nodes[j * d..(j + 1) * d]);
                    }
                }
            }
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsingular::kernel::power_kernel;

    /// Integral of `1/|y - (x, 0)|` over the unit square.
    pub(crate) fn inverse_distance_closed_form(x: f64) -> f64 {
        // integral over [0,a]x[0,b] of 1/|y| is a asinh(b/a) + b asinh(a/b)
        let corner = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (b / a).asinh() + b * (a / b).asinh() };
        corner(x, 1.0) + corner(1.0 - x, 1.0)
    }

    #[test]
    fn potential_matches_closed_form() {
        let k = power_kernel(-1.0, 2, 2, 1).unwrap();
        let f = InputFunction::constant(1.0);
        let pot = Potential::new(&k, &f, LeafRule::STANDARD).unwrap();
        for x in [0.0, 0.3, 0.5, 0.875] {
            let exact = inverse_distance_closed_form(x);
            assert!((pot.at(&[x]) - exact).abs() < 1e-8, "x={x}: {} vs {exact}", pot.at(&[x]));
        }
    }

    #[test]
    fn strongly_singular_potential_matches_polar_reference() {
        // polar integration about (0.25, 0) with the radial part in closed form
        let reference = 2.3731267361530635;
        let k = power_kernel(-1.5, 2, 2, 1).unwrap();
        let f = InputFunction::new(|p| 0.5 - 0.25 * p[0] + 0.2 * p[1]);
        let pot = Potential::new(&k, &f, LeafRule::STANDARD).unwrap();
        assert!((pot.at(&[0.25]) - reference).abs() < 1e-8, "{}", pot.at(&[0.25]));
    }

    #[test]
    fn moments_split_sign() {
        let k = power_kernel(0.0, 2, 2, 1).unwrap();
        let f = InputFunction::new(|p| if p[0] < 0.5 { 1.0 } else { -1.0 }).with_breaks(vec![vec![0.5]]);
        let m = kernel_moments(&k, &[0.25], &f, &[(vec![0.0, 0.0], vec![1.0, 1.0])], &LeafRule::STANDARD);
        assert!((m[1] - m[2]).abs() < 1e-10);
        let pot = Potential::new(&k, &f, LeafRule::STANDARD).unwrap();
        assert!((pot.at(&[0.25]) - m[0]).abs() < 1e-9);
    }
}
