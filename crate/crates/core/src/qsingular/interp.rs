//! Dyadic cubes, grids and tensor Lagrange interpolation on `[0,1]^d1`.

/// Lagrange basis for nodes `j/q`, `j = 0..=q`, evaluated at `t`.
pub fn lagrange_basis(q: usize, t: f64, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate().take(q + 1) {
        let mut v = 1.0;
        for i in 0..=q {
            if i != j {
                v *= (t * q as f64 - i as f64) / (j as f64 - i as f64);
            }
        }
        *o = v;
    }
}

/// Sup over `[0,1]` of the sum of absolute basis values, sampled.
pub fn lebesgue_constant(q: usize, samples: usize) -> f64 {
    let mut b = vec![0.0; q + 1];
    (0..=samples)
        .map(|i| {
            lagrange_basis(q, i as f64 / samples as f64, &mut b);
            b.iter().map(|v| v.abs()).sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Digits of `idx` in base `base`, first axis most significant.
pub fn unrank(mut idx: usize, base: usize, dim: usize) -> Vec<usize> {
    let mut out = vec![0; dim];
    for k in (0..dim).rev() {
        out[k] = idx % base;
        idx /= base;
    }
    out
}

pub fn rank(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * base + d)
}

/// Tensor interpolant on `[0,1]^dim` from values at the nodes
/// `(j_1/q, ..., j_dim/q)`, stored with the last axis fastest.
pub fn tensor_interp(q: usize, data: &[f64], t: &[f64]) -> f64 {
    let dim = t.len();
    let per = q + 1;
    let mut basis = vec![0.0; per * dim];
    for (k, &tk) in t.iter().enumerate() {
        lagrange_basis(q, tk, &mut basis[k * per..(k + 1) * per]);
    }
    let mut sum = 0.0;
    for (idx, &v) in data.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let mut w = 1.0;
        let mut rest = idx;
        for k in (0..dim).rev() {
            w *= basis[k * per + rest % per];
            rest /= per;
        }
        sum += w * v;
    }
    sum
}

/// Level `l` of the dyadic hierarchy on `[0,1]^d1` with coordinate degree `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicLevel {
    pub l: usize,
    pub d1: usize,
    pub q: usize,
}

impl DyadicLevel {
    pub fn new(l: usize, d1: usize, q: usize) -> Self {
        DyadicLevel { l, d1, q }
    }

    pub fn side(&self) -> f64 {
        (0.5f64).powi(self.l as i32)
    }

    pub fn cells_per_axis(&self) -> usize {
        1 << self.l
    }

    /// Number of subcubes.
    pub fn cell_count(&self) -> usize {
        self.cells_per_axis().pow(self.d1 as u32)
    }

    pub fn mesh(&self) -> f64 {
        self.side() / self.q as f64
    }

    pub fn points_per_axis(&self) -> usize {
        self.q * self.cells_per_axis() + 1
    }

    pub fn point_count(&self) -> usize {
        self.points_per_axis().pow(self.d1 as u32)
    }

    pub fn cell(&self, i: usize) -> Vec<usize> {
        unrank(i, self.cells_per_axis(), self.d1)
    }

    /// Bounds of the subcube with multi-index `c`.
    pub fn cube(&self, c: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let h = self.side();
        (c.iter().map(|&v| v as f64 * h).collect(), c.iter().map(|&v| (v + 1) as f64 * h).collect())
    }

    pub fn center(&self, c: &[usize]) -> Vec<f64> {
        let h = self.side();
        c.iter().map(|&v| (v as f64 + 0.5) * h).collect()
    }

    /// Radius `rho_l` of the subcubes.
    pub fn radius(&self) -> f64 {
        (self.d1 as f64).sqrt() * 0.5 * self.side()
    }

    /// Grid point with per-axis index `j` on this level.
    pub fn point(&self, j: &[usize]) -> Vec<f64> {
        let h = self.mesh();
        j.iter().map(|&v| v as f64 * h).collect()
    }

    /// Per-axis indices on the grid of level `m >= l` of the point with
    /// local index `a` (in `0..=2q`) of the next-level grid inside cell `c`.
    pub fn fine_index(&self, c: &[usize], a: &[usize], m: usize) -> Vec<usize> {
        let shift = m - self.l - 1;
        c.iter().zip(a).map(|(&ck, &ak)| (2 * self.q * ck + ak) << shift).collect()
    }

    /// Number of points of the next-level grid in one subcube.
    pub fn fine_local_count(&self) -> usize {
        (2 * self.q + 1).pow(self.d1 as u32)
    }

    pub fn coarse_local_count(&self) -> usize {
        (self.q + 1).pow(self.d1 as u32)
    }
}

/// Value at local coordinates `t in [0,1]^d1` of `P z` over one cell, with
/// `fine` the data on the `(2q+1)^d1` next-level local points; only the
/// even-indexed points are used.
pub fn coarse_value(q: usize, fine: &[f64], t: &[f64]) -> f64 {
    let dim = t.len();
    let coarse: Vec<f64> = (0..(q + 1).pow(dim as u32))
        .map(|i| {
            let a: Vec<usize> = unrank(i, q + 1, dim).iter().map(|v| 2 * v).collect();
            fine[rank(&a, 2 * q + 1)]
        })
        .collect();
    tensor_interp(q, &coarse, t)
}

/// Value of the refined interpolant `P^ z` at local coordinates `t`, in the
/// child selected by `child` (per axis 0 or 1).
pub fn fine_value(q: usize, fine: &[f64], t: &[f64], child: &[usize]) -> f64 {
    let dim = t.len();
    let sub: Vec<f64> = (0..(q + 1).pow(dim as u32))
        .map(|i| {
            let b = unrank(i, q + 1, dim);
            let a: Vec<usize> = b.iter().zip(child).map(|(&bk, &h)| q * h + bk).collect();
            fine[rank(&a, 2 * q + 1)]
        })
        .collect();
    let local: Vec<f64> = t.iter().zip(child).map(|(&tk, &h)| 2.0 * tk - h as f64).collect();
    tensor_interp(q, &sub, &local)
}

/// Default child containing `t` (the upper child on the midplane).
pub fn child_of(t: &[f64]) -> Vec<usize> {
    t.iter().map(|&v| usize::from(v >= 0.5)).collect()
}

/// `(P^ - P) z` evaluated back on the local next-level points.
pub fn detail_on_grid(q: usize, dim: usize, fine: &[f64]) -> Vec<f64> {
    let per = 2 * q + 1;
    (0..per.pow(dim as u32))
        .map(|i| {
            let a = unrank(i, per, dim);
            let t: Vec<f64> = a.iter().map(|&v| v as f64 / (2 * q) as f64).collect();
            // on shared child faces both children interpolate the same data
            let child: Vec<usize> = a.iter().map(|&v| usize::from(v > q)).collect();
            fine_value(q, fine, &t, &child) - coarse_value(q, fine, &t)
        })
        .collect()
}
