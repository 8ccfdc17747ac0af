//! Quadrature of leaf integrals over boxes of the parameter cube.

use crate::quad::{box_dist, dist, for_children, singular_box, tensor_box};

/// Controls for [`integrate_box`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafRule {
    /// Gauss order away from singular points.
    pub order: usize,
    /// Gauss order for boxes within `near_ratio` diameters of one.
    pub near_order: usize,
    pub near_ratio: f64,
    /// Boxes closer than `split_ratio` diameters to a singular point are bisected.
    pub split_ratio: f64,
    pub singular_order: usize,
    pub singular_levels: usize,
    /// Largest box side before the rule is applied.
    pub max_side: f64,
}

impl LeafRule {
    pub const STANDARD: LeafRule = LeafRule {
        order: 4,
        near_order: 8,
        near_ratio: 3.0,
        split_ratio: 1.0,
        singular_order: 8,
        singular_levels: 18,
        max_side: 0.125,
    };

    /// Cheap rule for norms and sampling proposals.
    pub const COARSE: LeafRule = LeafRule {
        order: 3,
        near_order: 5,
        near_ratio: 2.0,
        split_ratio: 0.5,
        singular_order: 5,
        singular_levels: 10,
        max_side: 0.25,
    };
}

const MAX_DEPTH: usize = 30;

/// Per-axis cut points inside `(lo, hi)`: the given breaks plus a uniform
/// refinement to side at most `max_side`.
fn axis_cuts(lo: f64, hi: f64, breaks: Option<&Vec<f64>>, max_side: f64) -> Vec<f64> {
    let mut cuts = vec![lo];
    if let Some(b) = breaks {
        cuts.extend(b.iter().copied().filter(|&v| v > lo && v < hi));
    }
    cuts.push(hi);
    let mut out = vec![lo];
    for w in cuts.windows(2) {
        let pieces = ((w[1] - w[0]) / max_side).ceil().max(1.0) as usize;
        for j in 1..=pieces {
            out.push(if j == pieces { w[1] } else { w[0] + (w[1] - w[0]) * j as f64 / pieces as f64 });
        }
    }
    out
}

/// Cells of the box `[lo, hi]` aligned with `breaks`, as `(lo, hi)` pairs.
pub fn aligned_cells(lo: &[f64], hi: &[f64], breaks: &[Vec<f64>], max_side: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let d = lo.len();
    let cuts: Vec<Vec<f64>> = (0..d).map(|k| axis_cuts(lo[k], hi[k], breaks.get(k), max_side)).collect();
    let counts: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
    let total: usize = counts.iter().product();
    let mut cells = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let clo = (0..d).map(|k| cuts[k][idx[k]]).collect();
        let chi = (0..d).map(|k| cuts[k][idx[k] + 1]).collect();
        cells.push((clo, chi));
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < counts[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    cells
}

fn inside(lo: &[f64], hi: &[f64], p: &[f64]) -> bool {
    (0..p.len()).all(|k| p[k] >= lo[k] && p[k] <= hi[k])
}

/// Integrates over one cell that is smooth except at the `singular` points.
pub fn integrate_cell<F>(f: &mut F, lo: &[f64], hi: &[f64], singular: &[Vec<f64>], rule: &LeafRule, acc: &mut [f64])
where
    F: FnMut(&[f64], f64, &mut [f64]) + ?Sized,
{
    cell_rec(f, lo, hi, singular, rule, 0, acc);
}

fn cell_rec<F>(f: &mut F, lo: &[f64], hi: &[f64], singular: &[Vec<f64>], rule: &LeafRule, depth: usize, acc: &mut [f64])
where
    F: FnMut(&[f64], f64, &mut [f64]) + ?Sized,
{
    let diam = dist(lo, hi);
    if diam == 0.0 {
        return;
    }
    let inner: Vec<&Vec<f64>> = singular.iter().filter(|p| inside(lo, hi, p)).collect();
    if depth < MAX_DEPTH && inner.len() > 1 {
        for_children(lo, hi, |a, b| cell_rec(f, a, b, singular, rule, depth + 1, acc));
        return;
    }
    if let Some(p) = inner.first() {
        singular_box(f, lo, hi, p, rule.singular_order, rule.singular_levels, acc);
        return;
    }
    let near = singular.iter().map(|p| box_dist(lo, hi, p)).fold(f64::INFINITY, f64::min);
    if depth < MAX_DEPTH && near < rule.split_ratio * diam {
        for_children(lo, hi, |a, b| cell_rec(f, a, b, singular, rule, depth + 1, acc));
    } else if near < rule.near_ratio * diam {
        tensor_box(f, lo, hi, rule.near_order, acc);
    } else {
        tensor_box(f, lo, hi, rule.order, acc);
    }
}

/// Integrates over `[lo, hi]`, aligned with `breaks`, with point
/// singularities at `singular`.
pub fn integrate_box<F>(f: &mut F, lo: &[f64], hi: &[f64], breaks: &[Vec<f64>], singular: &[Vec<f64>], rule: &LeafRule, acc: &mut [f64])
where
    F: FnMut(&[f64], f64, &mut [f64]) + ?Sized,
{
    if (0..lo.len()).any(|k| hi[k] <= lo[k]) {
        return;
    }
    for (clo, chi) in aligned_cells(lo, hi, breaks, rule.max_side) {
        integrate_cell(f, &clo, &chi, singular, rule, acc);
    }
}

/// Splits `outer` minus the union of disjoint `holes` into disjoint boxes.
pub fn box_difference(outer: &(Vec<f64>, Vec<f64>), holes: &[(Vec<f64>, Vec<f64>)]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut pieces = vec![outer.clone()];
    for hole in holes {
        let mut next = Vec::new();
        for piece in pieces {
            subtract(&piece, hole, &mut next);
        }
        pieces = next;
    }
    pieces
}

fn subtract(piece: &(Vec<f64>, Vec<f64>), hole: &(Vec<f64>, Vec<f64>), out: &mut Vec<(Vec<f64>, Vec<f64>)>) {
    let d = piece.0.len();
    let (mut lo, mut hi) = piece.clone();
    let overlaps = (0..d).all(|k| hole.0[k] < hi[k] && hole.1[k] > lo[k]);
    if !overlaps {
        out.push(piece.clone());
        return;
    }
    for k in 0..d {
        if hole.0[k] > lo[k] {
            let mut h = hi.clone();
            h[k] = hole.0[k];
            out.push((lo.clone(), h));
            lo[k] = hole.0[k];
        }
        if hole.1[k] < hi[k] {
            let mut l = lo.clone();
            l[k] = hole.1[k];
            out.push((l, hi.clone()));
            hi[k] = hole.1[k];
        }
    }
}
