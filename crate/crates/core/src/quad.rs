//! Quadrature on boxes: tensor Gauss–Legendre, corner-singular (Duffy)
//! rules, and adaptive integration over regions described by signed
//! distance functions.
//!
//! Integrands are written as accumulators `FnMut(y, w, acc)` that add
//! `w * value(y)` into `acc`, so one pass can integrate several outputs
//! that share quadrature points.

use std::sync::OnceLock;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const MAX_CACHED: usize = 32;

/// Cached rule of order `n` (1..=32).
pub fn gauss(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Vec<GaussLegendre>> = OnceLock::new();
    let rules = CACHE.get_or_init(|| (1..=MAX_CACHED).map(GaussLegendre::new).collect());
    &rules[n.clamp(1, MAX_CACHED) - 1]
}

/// Tensor Gauss rule of `order` points per axis on the box `[lo, hi]`.
pub fn tensor_box<F>(f: &mut F, lo: &[f64], hi: &[f64], order: usize, acc: &mut [f64])
where
    F: FnMut(&[f64], f64, &mut [f64]) + ?Sized,
{
    let d = lo.len();
    let rule = gauss(order);
    let mut vol = 1.0;
    for k in 0..d {
        vol *= 0.5 * (hi[k] - lo[k]);
    }
    if vol == 0.0 {
        return;
    }
    let mut idx = vec![0usize; d];
    let mut y = vec![0.0; d];
    loop {
        let mut w = vol;
        for k in 0..d {
            let t = rule.nodes[idx[k]];
            y[k] = 0.5 * (lo[k] + hi[k]) + 0.5 * (hi[k] - lo[k]) * t;
            w *= rule.weights[idx[k]];
        }
        f(&y, w, acc);
        let mut k = 0;
        loop {
            if k == d {
                return;
            }
            idx[k] += 1;
            if idx[k] < order {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Integrates over the box spanned by `corner` and `far` where the
/// integrand may be singular at `corner`. The box is split into `d`
/// pyramids with apex at the corner; each is mapped to the unit cube by a
/// Duffy transform and integrated with geometric grading towards the apex.
pub fn duffy_corner<F>(f: &mut F, corner: &[f64], far: &[f64], order: usize, levels: usize, acc: &mut [f64])
where
    F: FnMut(&[f64], f64, &mut [f64]) + ?Sized,
{
    let d = corner.len();
    let a: Vec<f64> = (0..d).map(|k| far[k] - corner[k]).collect();
    let jac_box: f64 = a.iter().map(|v| v.abs()).product();
    if jac_box == 0.0 {
        return;
    }
    let rule = gauss(order);
    // u-grading: [0, 2^-levels], [2^-levels, 2^-(levels-1)], ..., [1/2, 1]
    let mut u_pts: Vec<(f64, f64)> = Vec::new();
    let mut hi_u = 1.0;
    for lvl in 0..=levels {
        if lvl == levels {
            // u = hi s^2 smooths the algebraic singularity left at the apex
            for q in 0..order {
                let sq = 0.5 + 0.5 * rule.nodes[q];
                u_pts.push((hi_u * sq * sq, hi_u * sq * rule.weights[q]));
            }
            break;
        }
        let lo_u = hi_u * 0.5;
        for q in 0..order {
            let t = rule.nodes[q];
            let u = 0.5 * (lo_u + hi_u) + 0.5 * (hi_u - lo_u) * t;
            u_pts.push((u, 0.5 * (hi_u - lo_u) * rule.weights[q]));
        }
        hi_u = lo_u;
    }
    let mut y = vec![0.0; d];
    let mut vidx = vec![0usize; d.saturating_sub(1)];
    for apex_dir in 0..d {
        for &(u, wu) in &u_pts {
            let ju = u.powi(d as i32 - 1) * wu * jac_box;
            vidx.iter_mut().for_each(|v| *v = 0);
            loop {
                let mut w = ju;
                let mut j = 0;
                for k in 0..d {
                    if k == apex_dir {
                        y[k] = corner[k] + a[k] * u;
                    } else {
                        let t = 0.5 + 0.5 * rule.nodes[vidx[j]];
                        w *= 0.5 * rule.weights[vidx[j]];
                        y[k] = corner[k] + a[k] * u * t;
                        j += 1;
                    }
                }
                f(&y, w, acc);
                let mut k = 0;
                loop {
                    if k == d - 1 {
                        break;
                    }
                    vidx[k] += 1;
                    if vidx[k] < order {
                        break;
                    }
                    vidx[k] = 0;
                    k += 1;
                }
                if k == d - 1 {
                    break;
                }
            }
        }
    }
}

/// Integrates over `[lo, hi]` with a point singularity at `p` inside the
/// closed box: the box is split at `p` into corner-singular sub-boxes.
pub fn singular_box<F>(f: &mut F, lo: &[f64], hi: &[f64], p: &[f64], order: usize, levels: usize, acc: &mut [f64])
where
    F: FnMut(&[f64], f64, &mut [f64]) + ?Sized,
{
    let d = lo.len();
    let pc: Vec<f64> = (0..d).map(|k| p[k].clamp(lo[k], hi[k])).collect();
    for mask in 0..(1usize << d) {
        let far: Vec<f64> = (0..d).map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] }).collect();
        if (0..d).any(|k| far[k] == pc[k]) {
            continue;
        }
        corner_graded(f, &pc, &far, order, levels, acc);
    }
}

/// Corner-singular box of arbitrary aspect ratio: a Duffy rule on the
/// near-cubic piece at the corner, adaptive subdivision for the rest.
fn corner_graded<F>(f: &mut F, corner: &[f64], far: &[f64], order: usize, levels: usize, acc: &mut [f64])
where
    F: FnMut(&[f64], f64, &mut [f64]) + ?Sized,
{
    let d = corner.len();
    let ext: Vec<f64> = (0..d).map(|k| (far[k] - corner[k]).abs()).collect();
    let s = ext.iter().cloned().fold(f64::INFINITY, f64::min);
    let cap = 2.0 * s;
    let toward = |k: usize, t: f64| corner[k] + (far[k] - corner[k]).signum() * t;
    let inner: Vec<f64> = (0..d).map(|k| toward(k, ext[k].min(cap))).collect();
    duffy_corner(f, corner, &inner, order, levels, acc);
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for k in (0..d).filter(|&k| ext[k] > cap) {
        for j in 0..d {
            let (a, b) = if j == k {
                (cap, ext[j])
            } else if j < k {
                (0.0, ext[j].min(cap))
            } else {
                (0.0, ext[j])
            };
            let (x, y) = (toward(j, a), toward(j, b));
            lo[j] = x.min(y);
            hi[j] = x.max(y);
        }
        near_box(f, &lo, &hi, corner, order, 0, acc);
    }
}

/// Regular rule on boxes bisected until they are one diameter away from `p`.
fn near_box<F>(f: &mut F, lo: &[f64], hi: &[f64], p: &[f64], order: usize, depth: usize, acc: &mut [f64])
where
    F: FnMut(&[f64], f64, &mut [f64]) + ?Sized,
{
    if box_dist(lo, hi, p) < dist(lo, hi) && depth < 40 {
        for_children(lo, hi, |clo, chi| near_box(f, clo, chi, p, order, depth + 1, acc));
    } else {
        tensor_box(f, lo, hi, order, acc);
    }
}

/// Region given by a signed distance bound (negative inside).
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Cube { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Intersection(Vec<Region>),
    Difference(Box<Region>, Box<Region>),
}

/// Position of a box relative to a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cover {
    Inside,
    Outside,
    Boundary,
}

impl Region {
    pub fn unit_cube(d: usize) -> Self {
        Region::Cube { lo: vec![0.0; d], hi: vec![1.0; d] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Cube { lo, .. } => lo.len(),
            Region::Ball { center, .. } => center.len(),
            Region::Intersection(v) => v[0].dim(),
            Region::Difference(a, _) => a.dim(),
        }
    }

    /// Lower bound on distance to the boundary with the sign of the side.
    pub fn sdf(&self, y: &[f64]) -> f64 {
        match self {
            Region::Cube { lo, hi } => {
                let mut outside = 0.0f64;
                let mut inside = f64::NEG_INFINITY;
                for k in 0..y.len() {
                    let q = (lo[k] - y[k]).max(y[k] - hi[k]);
                    outside += q.max(0.0).powi(2);
                    inside = inside.max(q);
                }
                if outside > 0.0 {
                    outside.sqrt()
                } else {
                    inside
                }
            }
            Region::Ball { center, radius } => dist(y, center) - radius,
            Region::Intersection(v) => v.iter().map(|r| r.sdf(y)).fold(f64::NEG_INFINITY, f64::max),
            Region::Difference(a, b) => a.sdf(y).max(-b.sdf(y)),
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        self.sdf(y) <= 0.0
    }

    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Cube { lo, hi } => (lo.clone(), hi.clone()),
            Region::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Region::Intersection(v) => {
                let (mut lo, mut hi) = v[0].bbox();
                for r in &v[1..] {
                    let (l2, h2) = r.bbox();
                    for k in 0..lo.len() {
                        lo[k] = lo[k].max(l2[k]);
                        hi[k] = hi[k].min(h2[k]);
                    }
                }
                for k in 0..lo.len() {
                    if hi[k] < lo[k] {
                        hi[k] = lo[k];
                    }
                }
                (lo, hi)
            }
            Region::Difference(a, _) => a.bbox(),
        }
    }

    pub fn classify(&self, lo: &[f64], hi: &[f64]) -> Cover {
        let c: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let half_diag = 0.5 * dist(lo, hi);
        let s = self.sdf(&c);
        if s <= -half_diag {
            Cover::Inside
        } else if s >= half_diag {
            Cover::Outside
        } else {
            Cover::Boundary
        }
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance from `p` to the closed box.
pub fn box_dist(lo: &[f64], hi: &[f64], p: &[f64]) -> f64 {
    (0..p.len())
        .map(|k| {
            let q = (lo[k] - p[k]).max(p[k] - hi[k]).max(0.0);
            q * q
        })
        .sum::<f64>()
        .sqrt()
}

/// Controls for [`integrate_cell`].
#[derive(Debug, Clone, Copy)]
pub struct CellRule {
    /// Gauss order for boxes well separated from singular points.
    pub far_order: usize,
    /// Gauss order for boxes close to a singular point.
    pub near_order: usize,
    /// Ratio distance/diameter below which a box counts as near.
    pub near_ratio: f64,
    /// Ratio distance/diameter below which a box is split towards the singularity.
    pub split_ratio: f64,
    /// Subdivision depth for region boundaries.
    pub boundary_depth: usize,
    /// Order and grading levels of the corner-singular rule.
    pub singular_order: usize,
    pub singular_levels: usize,
}

impl CellRule {
    /// Cheap rule used to build estimator weights.
    pub const WEIGHTS: CellRule = CellRule {
        far_order: 2,
        near_order: 6,
        near_ratio: 1.5,
        split_ratio: 0.5,
        boundary_depth: 3,
        singular_order: 6,
        singular_levels: 8,
    };

    /// Accurate rule used by reference solutions.
    pub const ACCURATE: CellRule = CellRule {
        far_order: 6,
        near_order: 12,
        near_ratio: 3.0,
        split_ratio: 1.0,
        boundary_depth: 7,
        singular_order: 10,
        singular_levels: 24,
    };
}

/// Integrates the accumulator `f` over `[lo, hi] ∩ region`, where `f` may
/// have a point singularity at `singular`.
pub fn integrate_cell<F>(
    f: &mut F,
    region: &Region,
    lo: &[f64],
    hi: &[f64],
    singular: Option<&[f64]>,
    rule: &CellRule,
    acc: &mut [f64],
) where
    F: FnMut(&[f64], f64, &mut [f64]) + ?Sized,
{
    cell_rec(f, region, lo, hi, singular, rule, 0, 0, acc);
}

#[allow(clippy::too_many_arguments)]
fn cell_rec<F>(
    f: &mut F,
    region: &Region,
    lo: &[f64],
    hi: &[f64],
    singular: Option<&[f64]>,
    rule: &CellRule,
    bdepth: usize,
    sdepth: usize,
    acc: &mut [f64],
) where
    F: FnMut(&[f64], f64, &mut [f64]) + ?Sized,
{
    let cover = region.classify(lo, hi);
    if cover == Cover::Outside {
        return;
    }
    if cover == Cover::Boundary && bdepth < rule.boundary_depth {
        for_children(lo, hi, |clo, chi| cell_rec(f, region, clo, chi, singular, rule, bdepth + 1, sdepth, acc));
        return;
    }
    let diam = dist(lo, hi);
    let masked = cover == Cover::Boundary;
    let mut g = |y: &[f64], w: f64, a: &mut [f64]| {
        if !masked || region.contains(y) {
            f(y, w, a)
        }
    };
    if let Some(p) = singular {
        let dp = box_dist(lo, hi, p);
        if dp <= 1e-14 * diam.max(1e-300) {
            singular_box(&mut g, lo, hi, p, rule.singular_order, rule.singular_levels, acc);
            return;
        }
        if dp < rule.split_ratio * diam && sdepth < 12 {
            // a nearly touching singularity: split towards it
            for_children(lo, hi, |clo, chi| cell_rec(f, region, clo, chi, singular, rule, bdepth, sdepth + 1, acc));
            return;
        }
        let order = if dp < rule.near_ratio * diam { rule.near_order } else { rule.far_order };
        tensor_box(&mut g, lo, hi, order, acc);
        return;
    }
    tensor_box(&mut g, lo, hi, rule.far_order, acc);
}

/// Visits the halves of `[lo, hi]` along every axis at least half as long
/// as the longest one, so thin boxes do not multiply across their width.
pub(crate) fn for_children(lo: &[f64], hi: &[f64], mut visit: impl FnMut(&[f64], &[f64])) {
    let d = lo.len();
    let longest = (0..d).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    let axes: Vec<usize> = (0..d).filter(|&k| 2.0 * (hi[k] - lo[k]) >= longest).collect();
    let mut clo = lo.to_vec();
    let mut chi = hi.to_vec();
    for mask in 0..(1usize << axes.len()) {
        for (b, &k) in axes.iter().enumerate() {
            let mid = 0.5 * (lo[k] + hi[k]);
            if mask >> b & 1 == 1 {
                clo[k] = mid;
                chi[k] = hi[k];
            } else {
                clo[k] = lo[k];
                chi[k] = mid;
            }
        }
        visit(&clo, &chi);
    }
}

/// Accurate scalar integral of `g` over `region`, using a uniform grid of
/// `cells_per_axis^d` boxes over the region's bounding box.
pub fn integrate_region<G>(g: G, region: &Region, singular: Option<&[f64]>, cells_per_axis: usize, rule: &CellRule) -> f64
where
    G: Fn(&[f64]) -> f64,
{
    let (blo, bhi) = region.bbox();
    let d = blo.len();
    let n = cells_per_axis.max(1);
    let mut acc = [0.0];
    let mut f = |y: &[f64], w: f64, a: &mut [f64]| a[0] += w * g(y);
    let mut idx = vec![0usize; d];
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    loop {
        for k in 0..d {
            let h = (bhi[k] - blo[k]) / n as f64;
            lo[k] = blo[k] + h * idx[k] as f64;
            hi[k] = if idx[k] + 1 == n { bhi[k] } else { blo[k] + h * (idx[k] + 1) as f64 };
        }
        integrate_cell(&mut f, region, &lo, &hi, singular, rule, &mut acc);
        let mut k = 0;
        loop {
            if k == d {
                return acc[0];
            }
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let r = gauss(n);
            for p in 0..(2 * n) {
                let q: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} p={p} q={q}");
            }
        }
    }

    #[test]
    fn duffy_handles_inverse_distance() {
        // ∫_{[0,1]^2} 1/|y| dy = 2 ln(1+√2)
        let mut acc = [0.0];
        let mut f = |y: &[f64], w: f64, a: &mut [f64]| a[0] += w / (y[0].hypot(y[1]));
        duffy_corner(&mut f, &[0.0, 0.0], &[1.0, 1.0], 10, 20, &mut acc);
        let exact = 2.0 * (1.0 + 2f64.sqrt()).ln();
        assert!((acc[0] - exact).abs() < 1e-11, "{}", acc[0]);
    }

    #[test]
    fn singular_box_log_at_interior_point() {
        let p = [0.3, 0.6];
        let g = |y: &[f64]| -((y[0] - p[0]).hypot(y[1] - p[1])).ln();
        let reg = Region::unit_cube(2);
        let coarse = integrate_region(g, &reg, Some(&p), 2, &CellRule::ACCURATE);
        let fine = integrate_region(g, &reg, Some(&p), 7, &CellRule::ACCURATE);
        // closed form from the antiderivative of ln(x^2 + y^2) on rectangles
        let exact = 0.982_868_440_834_206_8;
        assert!((coarse - exact).abs() < 1e-10, "{coarse}");
        assert!((fine - exact).abs() < 1e-10, "{fine}");
    }

    #[test]
    fn disk_area_via_boundary_refinement() {
        let reg = Region::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        let a = integrate_region(|_| 1.0, &reg, None, 16, &CellRule::ACCURATE);
        assert!((a - std::f64::consts::PI).abs() < 2e-4, "{a}");
    }

    #[test]
    fn log_weight_on_disk_is_one_quarter() {
        let reg = Region::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        let g = |y: &[f64]| -(y[0].hypot(y[1])).ln() / (2.0 * std::f64::consts::PI);
        let v = integrate_region(g, &reg, Some(&[0.0, 0.0]), 16, &CellRule::ACCURATE);
        assert!((v - 0.25).abs() < 1e-4, "{v}");
    }
}
