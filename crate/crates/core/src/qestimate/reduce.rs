use crate::{Error, Result};

/// Integer replication of nonnegative weights: index `i` is repeated
/// `h(i) = floor(n g(i))` times.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightReduction {
    pub n: u64,
    pub h: Vec<u64>,
    /// `m_cum[i] = h(0) + ... + h(i-1)`, with `N + 1` entries.
    pub m_cum: Vec<u64>,
    /// Total length `M` of the replicated sequence.
    pub total: u64,
}

impl WeightReduction {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn g_tilde(&self) -> Vec<f64> {
        self.h.iter().map(|&v| v as f64 / self.n as f64).collect()
    }

    /// The unique `i` with `m_i <= j < m_{i+1}`.
    pub fn eta(&self, j: u64) -> usize {
        assert!(j < self.total, "index {j} outside the replicated range");
        self.m_cum.partition_point(|&m| m <= j) - 1
    }

    /// `S_M(R f)`: mean of `f(eta(j))` over `j < M`.
    pub fn replicated_mean(&self, f: &[f64]) -> f64 {
        let s: f64 = self.h.iter().zip(f).map(|(&h, &v)| h as f64 * v).sum();
        s / self.total as f64
    }

    /// `S_{N, g~} f = (1/N) sum g~(i) f(i)`.
    pub fn truncated_mean(&self, f: &[f64]) -> f64 {
        let s: f64 = self.h.iter().zip(f).map(|(&h, &v)| h as f64 * v).sum();
        s / (self.n as f64 * self.len() as f64)
    }

    /// Ratio `n N / M` linking the two means.
    pub fn ratio(&self) -> f64 {
        self.n as f64 * self.len() as f64 / self.total as f64
    }

    /// The replicated sequence `(R f)(j) = f(eta(j))`.
    pub fn replicate(&self, f: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.total as usize);
        for (&h, &v) in self.h.iter().zip(f) {
            out.extend(std::iter::repeat_n(v, h as usize));
        }
        out
    }
}

/// Reduces weights `g >= 0` with `(1/N) sum g <= 1`.
pub fn reduce_weights(g: &[f64], n: u64) -> Result<WeightReduction> {
    if g.is_empty() || n == 0 {
        return Err(Error::Input("need nonempty weights and n >= 1".into()));
    }
    if let Some(bad) = g.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::Input(format!("weight {bad} is not a finite nonnegative number")));
    }
    let norm = g.iter().sum::<f64>() / g.len() as f64;
    if norm > 1.0 + 1e-9 {
        return Err(Error::Input(format!("weights have L1 norm {norm} > 1")));
    }
    let h: Vec<u64> = g.iter().map(|&v| (n as f64 * v).floor() as u64).collect();
    let mut m_cum = Vec::with_capacity(h.len() + 1);
    let mut acc = 0u64;
    m_cum.push(0);
    for &v in &h {
        acc += v;
        m_cum.push(acc);
    }
    if acc == 0 {
        return Err(Error::ZeroReduction);
    }
    Ok(WeightReduction { n, h, m_cum, total: acc })
}
