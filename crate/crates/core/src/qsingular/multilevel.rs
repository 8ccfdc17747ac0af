use rand::Rng as _;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use super::interp::{coarse_value, fine_value, lagrange_basis, rank, tensor_interp, unrank, DyadicLevel};
use super::kernel::{Bbox, Kernel};
use super::leafquad::{aligned_cells, box_difference, integrate_box, integrate_cell, LeafRule};
use super::plan::{select_budgets, select_budgets_for_rate, MultilevelPlan};
use super::tables::{kernel_moments, InputFunction, Potential};
use crate::qcore::estimator::{Boosted, Constant, Draw, MeanEstimator};
use crate::qestimate::mean::signed_ae;
use crate::qestimate::LeafBackend;
use crate::rng::{derive_rng, Rng};
use crate::{Error, Result};

/// Piecewise tensor polynomial of coordinate degree `q` on the `2^{m d1}`
/// cubes of level `m`, stored as values at the `(q+1)^d1` local nodes of
/// every cube (the pieces need not agree on shared faces).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    pub m: usize,
    pub q: usize,
    pub d1: usize,
    pub values: Vec<f64>,
}

impl PiecewisePoly {
    pub fn local_nodes(&self) -> usize {
        (self.q + 1).pow(self.d1 as u32)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let per = 1usize << self.m;
        let mut cell = vec![0; self.d1];
        let mut t = vec![0.0; self.d1];
        for k in 0..self.d1 {
            let s = x[k].clamp(0.0, 1.0) * per as f64;
            cell[k] = (s.floor() as usize).min(per - 1);
            t[k] = s - cell[k] as f64;
        }
        let c = rank(&cell, per);
        let nodes = self.local_nodes();
        tensor_interp(self.q, &self.values[c * nodes..(c + 1) * nodes], &t)
    }
}

/// One sampled output of the multilevel estimator.
#[derive(Debug, Clone)]
pub struct MultilevelOutput {
    pub poly: PiecewisePoly,
    pub queries: u64,
    /// Whether every leaf met its accuracy check.
    pub ok: bool,
}

impl MultilevelOutput {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.poly.eval(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafKind {
    Base,
    Near,
    Far,
}

/// Where a leaf sits and what it estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafInfo {
    pub kind: LeafKind,
    pub l: usize,
    pub cell: usize,
    pub local: usize,
    pub target: f64,
    /// `L1` norm of the leaf integrand.
    pub norm: f64,
}

struct Leaf {
    info: LeafInfo,
    est: Box<dyn MeanEstimator>,
}

/// Linear map from leaf data of one level to nodal values on level `m`.
struct LevelMap {
    /// `weights[rel][b * width + a]`.
    weights: Vec<Vec<f64>>,
    width: usize,
}

/// Sampling-ready multilevel estimator of `T_k f` for one input.
pub struct MultilevelEstimator {
    pub plan: MultilevelPlan,
    leaves: Vec<Leaf>,
    base_map: LevelMap,
    level_maps: Vec<LevelMap>,
}

/// The leaf integrand `k(x, .) - sum_z L_z(x) k(z, .)` (or just `k(x, .)`).
#[derive(Clone)]
struct Integrand {
    kernel: Kernel,
    x: Vec<f64>,
    terms: Vec<(Vec<f64>, f64)>,
}

impl Integrand {
    #[inline]
    fn at(&self, p: &[f64]) -> f64 {
        let mut v = self.kernel.eval(&self.x, p);
        for (z, w) in &self.terms {
            v -= w * self.kernel.eval(z, p);
        }
        v
    }

    fn loci(&self) -> Vec<Vec<f64>> {
        std::iter::once(&self.x).chain(self.terms.iter().map(|(z, _)| z)).flat_map(|x| self.kernel.loci(x)).collect()
    }
}

/// Importance-sampling leaf over a fixed cell proposal.
struct McLeaf {
    g: Integrand,
    f: InputFunction,
    cells: Vec<Bbox>,
    ratio: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
    samples: u64,
}

impl McLeaf {
    fn new(g: Integrand, f: InputFunction, region: &[Bbox]) -> Result<Option<(Self, f64)>> {
        let loci = g.loci();
        let mut cells = Vec::new();
        let mut mass = Vec::new();
        for (lo, hi) in region {
            let side = (0..lo.len()).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
            for (clo, chi) in aligned_cells(lo, hi, &[], side / 4.0) {
                let mut acc = [0.0];
                let mut h = |y: &[f64], w: f64, a: &mut [f64]| a[0] += w * g.at(y).abs();
                integrate_cell(&mut h, &clo, &chi, &loci, &LeafRule::COARSE, &mut acc);
                if acc[0] > 0.0 {
                    cells.push((clo, chi));
                    mass.push(acc[0]);
                }
            }
        }
        let total: f64 = mass.iter().sum();
        if total == 0.0 {
            return Ok(None);
        }
        let ratio = cells
            .iter()
            .zip(&mass)
            .map(|((lo, hi), &w)| total * (0..lo.len()).map(|k| hi[k] - lo[k]).product::<f64>() / w)
            .collect();
        let alias = WeightedAliasIndex::new(mass).map_err(|e| Error::Input(format!("bad proposal: {e}")))?;
        Ok(Some((McLeaf { g, f, cells, ratio, alias, samples: 0 }, total)))
    }
}

impl MeanEstimator for McLeaf {
    fn draw(&self, rng: &mut Rng) -> Draw {
        let d = self.g.kernel.d();
        let mut y = vec![0.0; d];
        let mut sum = 0.0;
        for _ in 0..self.samples {
            let c = self.alias.sample(rng);
            let (lo, hi) = &self.cells[c];
            for k in 0..d {
                y[k] = lo[k] + (hi[k] - lo[k]) * rng.random::<f64>();
            }
            sum += self.g.at(&y) * self.f.at(&y) * self.ratio[c];
        }
        Draw { value: sum / self.samples.max(1) as f64, ok: true }
    }
    fn queries(&self) -> u64 {
        self.samples
    }
}

fn quantum_leaf(target: f64, abs: f64, norm: f64, budget: u64, repeats: usize) -> Result<Box<dyn MeanEstimator>> {
    let g = norm.max(target.abs());
    if g == 0.0 {
        return Ok(Box::new(Constant(0.0)));
    }
    // masses of the positive and negative parts of the integrand times f
    let a = abs.clamp(target.abs(), g);
    let law = signed_ae((a + target) / (2.0 * g), (a - target) / (2.0 * g), budget, g)?;
    Ok(if repeats > 1 { Box::new(Boosted::new(law, repeats)?) } else { Box::new(law) })
}

fn active(backend: LeafBackend, budget: u64) -> bool {
    match backend {
        LeafBackend::Exact => true,
        LeafBackend::Classical => budget >= 1,
        _ => budget / 2 >= 2,
    }
}

fn unit_cube(d: usize) -> Bbox {
    (vec![0.0; d], vec![1.0; d])
}

fn basis_weights(q: usize, t: &[f64]) -> Vec<f64> {
    let per = q + 1;
    let mut b = vec![0.0; per * t.len()];
    for (k, &tk) in t.iter().enumerate() {
        lagrange_basis(q, tk, &mut b[k * per..(k + 1) * per]);
    }
    (0..per.pow(t.len() as u32))
        .map(|i| unrank(i, per, t.len()).iter().enumerate().map(|(k, &a)| b[k * per + a]).product())
        .collect()
}

/// Leaf targets computed from one shared table of `T f` on grid points.
struct Targets<'a> {
    potential: Potential<'a>,
    top: DyadicLevel,
    table: std::collections::HashMap<Vec<usize>, f64>,
}

impl Targets<'_> {
    fn t(&mut self, j: &[usize]) -> f64 {
        if let Some(&v) = self.table.get(j) {
            return v;
        }
        let v = self.potential.at(&self.top.point(j));
        self.table.insert(j.to_vec(), v);
        v
    }
}

/// A leaf whose target and norm are known but whose budget is not yet set.
struct Pending {
    info: LeafInfo,
    moments: Option<[f64; 3]>,
    mc: Option<McLeaf>,
}

fn prepare(
    backend: LeafBackend,
    info: LeafInfo,
    moments: Option<[f64; 3]>,
    g: Integrand,
    f: &InputFunction,
    region: &[Bbox],
) -> Result<Pending> {
    let mut info = info;
    match backend {
        LeafBackend::StateVector { .. } => {
            return Err(Error::Unsupported("state-vector leaves in the multilevel estimator".into()));
        }
        LeafBackend::Classical => {
            let mc = McLeaf::new(g, f.clone(), region)?;
            info.target = f64::NAN;
            info.norm = mc.as_ref().map_or(0.0, |(_, w)| *w);
            return Ok(Pending { info, moments, mc: mc.map(|(leaf, _)| leaf) });
        }
        _ => {}
    }
    let [i, _, norm] = moments.expect("targets computed for quantum and exact leaves");
    info.target = i;
    info.norm = norm;
    Ok(Pending { info, moments, mc: None })
}

fn finish(p: Pending, backend: LeafBackend, budget: u64, repeats: usize) -> Result<Leaf> {
    let est: Box<dyn MeanEstimator> = match (backend, p.mc) {
        (LeafBackend::Classical, Some(mut leaf)) => {
            leaf.samples = budget;
            Box::new(leaf)
        }
        (LeafBackend::Classical, None) => Box::new(Constant(0.0)),
        (LeafBackend::Exact, _) => Box::new(Constant(p.info.target)),
        _ => {
            let [i, a, norm] = p.moments.expect("moments computed");
            quantum_leaf(i, a, norm, budget, repeats)?
        }
    };
    Ok(Leaf { info: p.info, est })
}

/// `[int h f, int |h f|, int |h|]` over `region` with the coarse rule.
fn coarse_moments(g: &Integrand, f: &InputFunction, region: &[Bbox]) -> [f64; 3] {
    let loci = g.loci();
    let mut acc = [0.0; 3];
    let mut h = |y: &[f64], w: f64, a: &mut [f64]| {
        let hv = g.at(y);
        let fv = f.at(y);
        a[0] += w * hv * fv;
        a[1] += w * (hv * fv).abs();
        a[2] += w * hv.abs();
    };
    for (lo, hi) in region {
        integrate_box(&mut h, lo, hi, &[], &loci, &LeafRule::COARSE, &mut acc);
    }
    acc
}

/// Plan for `backend`: amplitude estimation leaves follow the quantum
/// schedule, Monte Carlo leaves the schedule for square-root leaf rates
/// without boosting.
pub fn plan_for(k: &Kernel, n: u64, backend: LeafBackend) -> Result<MultilevelPlan> {
    match backend {
        LeafBackend::Classical => select_budgets_for_rate(n, k.s, k.sigma, k.d(), k.d1(), 0.5, false),
        _ => select_budgets(n, k.s, k.sigma, k.d(), k.d1()),
    }
}

/// Builds the estimator tree for `T_k f` with budget `n`.
pub fn multilevel_estimator(k: &Kernel, f: &InputFunction, n: u64, backend: LeafBackend) -> Result<MultilevelEstimator> {
    MultilevelEstimator::with_plan(k, f, plan_for(k, n, backend)?, backend, &LeafRule::STANDARD)
}

/// One draw of [`multilevel_estimator`] seeded from `seed`.
pub fn multilevel_apply(k: &Kernel, f: &InputFunction, n: u64, backend: LeafBackend, seed: u64) -> Result<MultilevelOutput> {
    let est = multilevel_estimator(k, f, n, backend)?;
    Ok(est.draw(&mut derive_rng(seed, 0)))
}

/// Largest near and far leaf `L1` norms on one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelNorms {
    pub l: usize,
    pub near: f64,
    pub far: f64,
}

/// Leaf norms of levels `0..levels` for `f = 1`.
pub fn level_norms(k: &Kernel, levels: usize) -> Result<Vec<LevelNorms>> {
    let mut n = 4u64;
    let mut plan = select_budgets(n, k.s, k.sigma, k.d(), k.d1())?;
    while plan.m < levels {
        n *= 2;
        plan = select_budgets(n, k.s, k.sigma, k.d(), k.d1())?;
    }
    let est = MultilevelEstimator::with_plan(k, &InputFunction::constant(1.0), plan, LeafBackend::Exact, &LeafRule::STANDARD)?;
    let mut out: Vec<LevelNorms> = (0..levels).map(|l| LevelNorms { l, near: 0.0, far: 0.0 }).collect();
    for info in est.leaves().filter(|i| i.kind != LeafKind::Base && i.l < levels) {
        let slot = &mut out[info.l];
        match info.kind {
            LeafKind::Near => slot.near = slot.near.max(info.norm),
            _ => slot.far = slot.far.max(info.norm),
        }
    }
    Ok(out)
}

impl MultilevelEstimator {
    pub fn with_plan(k: &Kernel, f: &InputFunction, plan: MultilevelPlan, backend: LeafBackend, rule: &LeafRule) -> Result<Self> {
        let (d, d1, q, m) = (k.d(), plan.d1, plan.q, plan.m);
        if d1 != k.d1() || d != k.d() {
            return Err(Error::Contract("plan and kernel dimensions differ".into()));
        }
        if q != k.degree() {
            return Err(Error::Contract("plan and kernel degrees differ".into()));
        }
        let top = DyadicLevel::new(m, d1, q);
        let needs_targets = backend != LeafBackend::Classical;
        let mut targets = if needs_targets {
            Some(Targets { potential: Potential::new(k, f, *rule)?, top, table: Default::default() })
        } else {
            None
        };
        let cube = unit_cube(d);
        let mut leaves = Vec::new();

        let base_count = (q + 1).pow(d1 as u32);
        let info = |kind, l, cell, local| LeafInfo { kind, l, cell, local, target: 0.0, norm: 0.0 };
        let mut pending = Vec::new();
        for a in 0..base_count {
            let b = unrank(a, q + 1, d1);
            let x: Vec<f64> = b.iter().map(|&v| v as f64 / q as f64).collect();
            let g = Integrand { kernel: k.clone(), x: x.clone(), terms: Vec::new() };
            let moments = needs_targets.then(|| kernel_moments(k, &x, f, std::slice::from_ref(&cube), rule));
            pending.push(prepare(backend, info(LeafKind::Base, 0, 0, a), moments, g, f, std::slice::from_ref(&cube))?);
        }
        for p in pending {
            leaves.push(finish(p, backend, plan.n0, plan.nu0)?);
        }

        let lip = k.geometry.chart_lipschitz();
        for lv in &plan.levels {
            if !active(backend, lv.budget) {
                continue;
            }
            let level = DyadicLevel::new(lv.l, d1, q);
            let width = level.fine_local_count();
            let mut pending = Vec::new();
            for ci in 0..level.cell_count() {
                let c = level.cell(ci);
                let near_region = k.geometry.near_boxes(&level.center(&c), 2.0 * level.radius() * lip);
                let far_region = box_difference(&cube, &near_region);
                let idx: Vec<Vec<usize>> = (0..width).map(|a| level.fine_index(&c, &unrank(a, 2 * q + 1, d1), m)).collect();
                let pts: Vec<Vec<f64>> = idx.iter().map(|j| top.point(j)).collect();
                let mut near_moments = Vec::with_capacity(width);
                for a in 0..width {
                    let g = Integrand { kernel: k.clone(), x: pts[a].clone(), terms: Vec::new() };
                    let moments = needs_targets.then(|| kernel_moments(k, &pts[a], f, &near_region, rule));
                    near_moments.push(moments);
                    pending.push(prepare(backend, info(LeafKind::Near, lv.l, ci, a), moments, g, f, &near_region)?);
                }
                for a in 0..width {
                    let digits = unrank(a, 2 * q + 1, d1);
                    if digits.iter().all(|v| v % 2 == 0) {
                        // the far integrand vanishes on the coarse grid
                        continue;
                    }
                    let t: Vec<f64> = digits.iter().map(|&v| v as f64 / (2 * q) as f64).collect();
                    let coarse: Vec<(usize, f64)> = basis_weights(q, &t)
                        .into_iter()
                        .enumerate()
                        .filter(|(_, w)| *w != 0.0)
                        .map(|(bi, w)| {
                            let b2: Vec<usize> = unrank(bi, q + 1, d1).iter().map(|v| 2 * v).collect();
                            (rank(&b2, 2 * q + 1), w)
                        })
                        .collect();
                    let g = Integrand {
                        kernel: k.clone(),
                        x: pts[a].clone(),
                        terms: coarse.iter().map(|&(z, w)| (pts[z].clone(), w)).collect(),
                    };
                    let moments = match targets.as_mut() {
                        Some(tg) => {
                            let near = |z: usize| near_moments[z].unwrap()[0];
                            let mut i = tg.t(&idx[a]) - near(a);
                            for &(z, w) in &coarse {
                                i -= w * (tg.t(&idx[z]) - near(z));
                            }
                            let [_, abs, norm] = coarse_moments(&g, f, &far_region);
                            Some([i, abs, norm])
                        }
                        None => None,
                    };
                    pending.push(prepare(backend, info(LeafKind::Far, lv.l, ci, a), moments, g, f, &far_region)?);
                }
            }
            for p in pending {
                leaves.push(finish(p, backend, lv.budget, lv.repeats)?);
            }
        }

        let base_map = LevelMap::base(m, d1, q);
        let level_maps = (0..m).map(|l| LevelMap::detail(l, m, d1, q)).collect();
        Ok(MultilevelEstimator { plan, leaves, base_map, level_maps })
    }

    pub fn leaves(&self) -> impl Iterator<Item = &LeafInfo> {
        self.leaves.iter().map(|l| &l.info)
    }

    pub fn queries(&self) -> u64 {
        self.leaves.iter().map(|l| l.est.queries()).sum()
    }

    /// Output computed from given leaf values, in the order of [`Self::leaves`].
    pub fn assemble(&self, values: &[f64]) -> PiecewisePoly {
        let (d1, q, m) = (self.plan.d1, self.plan.q, self.plan.m);
        let mut z0 = vec![0.0; self.base_map.width];
        let mut zl: Vec<Vec<f64>> =
            (0..m).map(|l| vec![0.0; DyadicLevel::new(l, d1, q).cell_count() * self.level_maps[l].width]).collect();
        for (leaf, &v) in self.leaves.iter().zip(values) {
            let info = &leaf.info;
            match info.kind {
                LeafKind::Base => z0[info.local] += v,
                _ => zl[info.l][info.cell * self.level_maps[info.l].width + info.local] += v,
            }
        }
        let per = 1usize << m;
        let nodes = (q + 1).pow(d1 as u32);
        let cells = per.pow(d1 as u32);
        let mut out = vec![0.0; cells * nodes];
        for j in 0..cells {
            let jm = unrank(j, per, d1);
            let w0 = &self.base_map.weights[j];
            for b in 0..nodes {
                let row = &w0[b * self.base_map.width..(b + 1) * self.base_map.width];
                out[j * nodes + b] = row.iter().zip(&z0).map(|(w, z)| w * z).sum();
            }
            for (l, map) in self.level_maps.iter().enumerate() {
                let s = m - l;
                let c: Vec<usize> = jm.iter().map(|&v| v >> s).collect();
                let rel: Vec<usize> = jm.iter().map(|&v| v & ((1 << s) - 1)).collect();
                let zc = &zl[l][rank(&c, 1 << l) * map.width..(rank(&c, 1 << l) + 1) * map.width];
                if zc.iter().all(|&v| v == 0.0) {
                    continue;
                }
                let wr = &map.weights[rank(&rel, 1 << s)];
                for b in 0..nodes {
                    let row = &wr[b * map.width..(b + 1) * map.width];
                    out[j * nodes + b] += row.iter().zip(zc).map(|(w, z)| w * z).sum::<f64>();
                }
            }
        }
        PiecewisePoly { m, q, d1, values: out }
    }

    /// One value per leaf, in the order of [`Self::leaves`], and whether
    /// every leaf met its check.
    pub fn draw_values(&self, rng: &mut Rng) -> (Vec<f64>, bool) {
        let mut ok = true;
        let values = self
            .leaves
            .iter()
            .map(|leaf| {
                let dr = leaf.est.draw(rng);
                ok &= dr.ok;
                dr.value
            })
            .collect();
        (values, ok)
    }

    pub fn draw(&self, rng: &mut Rng) -> MultilevelOutput {
        let (values, ok) = self.draw_values(rng);
        MultilevelOutput { poly: self.assemble(&values), queries: self.queries(), ok }
    }

    /// Output with every leaf at its target.
    pub fn exact(&self) -> PiecewisePoly {
        let values: Vec<f64> = self.leaves.iter().map(|l| l.info.target).collect();
        self.assemble(&values)
    }
}

impl LevelMap {
    fn base(m: usize, d1: usize, q: usize) -> Self {
        let per = 1usize << m;
        let nodes = (q + 1).pow(d1 as u32);
        let weights = (0..per.pow(d1 as u32))
            .map(|j| {
                let jm = unrank(j, per, d1);
                (0..nodes)
                    .flat_map(|b| {
                        let bm = unrank(b, q + 1, d1);
                        let x: Vec<f64> = (0..d1).map(|k| (jm[k] as f64 + bm[k] as f64 / q as f64) / per as f64).collect();
                        basis_weights(q, &x)
                    })
                    .collect()
            })
            .collect();
        LevelMap { weights, width: nodes }
    }

    fn detail(l: usize, m: usize, d1: usize, q: usize) -> Self {
        let s = m - l;
        let per = 1usize << s;
        let nodes = (q + 1).pow(d1 as u32);
        let width = (2 * q + 1).pow(d1 as u32);
        let unit: Vec<Vec<f64>> = (0..width).map(|a| (0..width).map(|i| f64::from(u8::from(i == a))).collect()).collect();
        let weights = (0..per.pow(d1 as u32))
            .map(|r| {
                let rm = unrank(r, per, d1);
                let child: Vec<usize> = rm.iter().map(|&v| v >> (s - 1)).collect();
                let mut row = Vec::with_capacity(nodes * width);
                for b in 0..nodes {
                    let bm = unrank(b, q + 1, d1);
                    let t: Vec<f64> = (0..d1).map(|k| (rm[k] as f64 + bm[k] as f64 / q as f64) / per as f64).collect();
                    for e in &unit {
                        row.push(fine_value(q, e, &t, &child) - coarse_value(q, e, &t));
                    }
                }
                row
            })
            .collect();
        LevelMap { weights, width }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsingular::kernel::{power_kernel, unit_kernel};

    fn input() -> InputFunction {
        InputFunction::new(|p| 0.5 * (3.0 * p[0]).sin() * (1.0 - p[1])).with_breaks(vec![])
    }

    #[test]
    fn exact_leaves_telescope_to_the_fine_interpolant() {
        let k = power_kernel(-1.0, 2, 2, 1).unwrap();
        let f = input();
        let est = multilevel_estimator(&k, &f, 1 << 10, LeafBackend::Exact).unwrap();
        let pot = Potential::new(&k, &f, LeafRule::STANDARD).unwrap();
        let poly = est.exact();
        let m = est.plan.m;
        assert!(m >= 3);
        for j in 0..=(1usize << m) {
            let x = j as f64 / (1usize << m) as f64;
            let (u, v) = (poly.eval(&[x]), pot.at(&[x]));
            assert!((u - v).abs() < 1e-7, "x={x}: {u} vs {v}");
        }
    }

    #[test]
    fn far_targets_match_direct_quadrature() {
        let k = power_kernel(-1.0, 2, 2, 1).unwrap();
        let f = input();
        let plan = plan_for(&k, 1 << 8, LeafBackend::Exact).unwrap();
        let est = MultilevelEstimator::with_plan(&k, &f, plan, LeafBackend::Exact, &LeafRule::STANDARD).unwrap();
        let far: Vec<&LeafInfo> = est.leaves().filter(|l| l.kind == LeafKind::Far && l.l == 2).collect();
        assert!(!far.is_empty());
        let level = DyadicLevel::new(2, 1, 1);
        for info in far {
            let c = level.cell(info.cell);
            let x = level.center(&c);
            let near = k.geometry.near_boxes(&x, 2.0 * level.radius());
            let region = box_difference(&unit_cube(2), &near);
            let lo = level.cube(&c).0[0];
            let hi = lo + level.side();
            let g = Integrand { kernel: k.clone(), x: x.clone(), terms: vec![(vec![lo], 0.5), (vec![hi], 0.5)] };
            let loci = g.loci();
            let mut acc = [0.0];
            let mut h = |y: &[f64], w: f64, a: &mut [f64]| a[0] += w * g.at(y) * f.at(y);
            for (blo, bhi) in &region {
                integrate_box(&mut h, blo, bhi, &[], &loci, &LeafRule::STANDARD, &mut acc);
            }
            assert!((acc[0] - info.target).abs() < 1e-9, "{} vs {}", acc[0], info.target);
        }
    }

    #[test]
    fn single_integral_for_a_point_target() {
        let k = unit_kernel(2, 0).unwrap();
        let f = InputFunction::constant(0.5);
        let est = multilevel_estimator(&k, &f, 4096, LeafBackend::Quantum).unwrap();
        assert_eq!(est.leaves().count(), 1);
        let out = est.draw(&mut derive_rng(1, 0));
        assert!((out.eval(&[]) - 0.5).abs() < 0.01);
        assert!(out.queries <= 4096);
    }

    #[test]
    fn quantum_leaves_stay_within_budget_order() {
        let k = power_kernel(-1.0, 2, 2, 1).unwrap();
        let f = input();
        let n = 1 << 12;
        let est = multilevel_estimator(&k, &f, n, LeafBackend::Quantum).unwrap();
        let out = est.draw(&mut derive_rng(7, 0));
        assert!(out.queries as f64 <= 16.0 * n as f64 * (n as f64).log2());
        let exact = est.exact();
        let err = (0..=32).map(|j| (out.eval(&[j as f64 / 32.0]) - exact.eval(&[j as f64 / 32.0])).abs()).fold(0.0, f64::max);
        assert!(err < 0.3, "err={err}");
    }
}
