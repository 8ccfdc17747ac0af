use num_complex::Complex64;

use crate::{Error, Result};

/// Source of information values `f(λ)`, addressed by functional id.
pub trait InfoOracle {
    fn value(&self, functional: usize) -> Option<f64>;
}

impl InfoOracle for [f64] {
    fn value(&self, functional: usize) -> Option<f64> {
        self.get(functional).copied()
    }
}

impl InfoOracle for Vec<f64> {
    fn value(&self, functional: usize) -> Option<f64> {
        self.get(functional).copied()
    }
}

impl<F: Fn(usize) -> Option<f64>> InfoOracle for F {
    fn value(&self, functional: usize) -> Option<f64> {
        self(functional)
    }
}

/// Fixed-point encoding of `[lo, hi]` into `bits`-bit integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    pub bits: u32,
    pub lo: f64,
    pub hi: f64,
}

impl Quantizer {
    pub fn new(bits: u32, lo: f64, hi: f64) -> Self {
        assert!((1..=52).contains(&bits) && hi > lo);
        Quantizer { bits, lo, hi }
    }

    /// Unit interval with `bits` bits; `0` and `1` are both exact.
    pub fn unit(bits: u32) -> Self {
        Quantizer::new(bits, 0.0, 1.0)
    }

    pub fn levels(&self) -> u64 {
        1u64 << self.bits
    }

    pub fn encode(&self, v: f64) -> u64 {
        let top = (self.levels() - 1) as f64;
        let t = ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        (t * top).round() as u64
    }

    pub fn decode(&self, code: u64) -> f64 {
        let top = (self.levels() - 1) as f64;
        self.lo + (self.hi - self.lo) * (code as f64 / top)
    }

    pub fn quantize(&self, v: f64) -> f64 {
        self.decode(self.encode(v))
    }

    /// Worst-case rounding error on the encoded range.
    pub fn resolution(&self) -> f64 {
        0.5 * (self.hi - self.lo) / (self.levels() - 1) as f64
    }
}

/// A query `Q = (m, m', m'', Z, τ, β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub m: usize,
    pub m_prime: usize,
    pub m_dprime: usize,
    /// Queried index set, sorted ascending.
    pub z: Vec<usize>,
    /// `tau[k]` is the functional queried for index `z[k]`.
    pub tau: Vec<usize>,
    pub beta: Quantizer,
}

impl QuerySpec {
    pub fn new(m: usize, m_prime: usize, m_dprime: usize, z: Vec<usize>, tau: Vec<usize>, beta: Quantizer) -> Result<Self> {
        if m_prime == 0 || m_dprime == 0 || m_prime + m_dprime > m {
            return Err(Error::Input(format!("need m'+m'' <= m with m',m'' >= 1, got {m_prime}+{m_dprime} > {m}")));
        }
        if z.is_empty() {
            return Err(Error::Input("Z must be nonempty".into()));
        }
        if z.len() != tau.len() {
            return Err(Error::Input("tau must be total on Z".into()));
        }
        if z.windows(2).any(|w| w[0] >= w[1]) || *z.last().unwrap() >= 1usize << m_prime {
            return Err(Error::Input("Z must be a sorted subset of Z[0, 2^m')".into()));
        }
        if beta.bits as usize > m_dprime {
            return Err(Error::Input("beta range exceeds the value register".into()));
        }
        Ok(QuerySpec { m, m_prime, m_dprime, z, tau, beta })
    }

    /// Query on `n` indices `0..n` with `tau(i) = i`.
    pub fn dense(n: usize, m_dprime: usize, extra: usize, beta: Quantizer) -> Result<Self> {
        let m_prime = (usize::BITS - (n.max(2) - 1).leading_zeros()) as usize;
        QuerySpec::new(m_prime + m_dprime + extra, m_prime, m_dprime, (0..n).collect(), (0..n).collect(), beta)
    }

    pub fn dim(&self) -> usize {
        1usize << self.m
    }

    /// The basis permutation `Q_f` as an index map, `perm[src] = dst`.
    pub fn permutation(&self, oracle: &dyn InfoOracle) -> Result<Vec<usize>> {
        let rest = self.m - self.m_prime - self.m_dprime;
        let vmask = (1usize << self.m_dprime) - 1;
        let mut shift_by = vec![None; 1usize << self.m_prime];
        for (&i, &lam) in self.z.iter().zip(&self.tau) {
            let v = oracle.value(lam).ok_or_else(|| Error::Input(format!("functional {lam} is undefined")))?;
            shift_by[i] = Some(self.beta.encode(v) as usize);
        }
        Ok((0..self.dim())
            .map(|idx| {
                let i = idx >> (self.m_dprime + rest);
                match shift_by[i] {
                    None => idx,
                    Some(b) => {
                        let x = (idx >> rest) & vmask;
                        let nx = (x + b) & vmask;
                        (idx & !(vmask << rest)) | (nx << rest)
                    }
                }
            })
            .collect())
    }
}

/// Applies `Q_f` to a state of dimension `2^m`.
pub fn apply_query_unitary(query: &QuerySpec, oracle: &dyn InfoOracle, state: &[Complex64]) -> Result<Vec<Complex64>> {
    if state.len() != query.dim() {
        return Err(Error::Contract(format!("state dimension {} != 2^{}", state.len(), query.m)));
    }
    let perm = query.permutation(oracle)?;
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    for (src, &dst) in perm.iter().enumerate() {
        out[dst] = state[src];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn basis(dim: usize, k: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[k] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn zero_oracle_is_identity() {
        let q = QuerySpec::new(4, 2, 2, vec![0, 1, 2, 3], vec![0, 1, 2, 3], Quantizer::new(2, 0.0, 3.0)).unwrap();
        let f = vec![0.0; 4];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut s: Vec<Complex64> = (0..16).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let n: f64 = s.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        s.iter_mut().for_each(|c| *c /= n);
        assert_eq!(apply_query_unitary(&q, &f, &s).unwrap(), s);
    }

    #[test]
    fn single_controlled_increment() {
        // m=2, m'=m''=1, Z={0}, beta(f(tau(0)))=1: |00> -> |01>
        let q = QuerySpec::new(2, 1, 1, vec![0], vec![0], Quantizer::new(1, 0.0, 1.0)).unwrap();
        let out = apply_query_unitary(&q, &vec![1.0], &basis(4, 0b00)).unwrap();
        assert_eq!(out, basis(4, 0b01));
    }

    #[test]
    fn query_is_permutation_of_order_dividing_value_range() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let beta = Quantizer::new(2, 0.0, 3.0);
        let q = QuerySpec::new(5, 2, 2, vec![0, 1, 2, 3], vec![0, 1, 2, 3], beta).unwrap();
        let f: Vec<f64> = (0..4).map(|_| rng.random_range(0..4) as f64).collect();
        // brute-force matrix
        let dim = q.dim();
        let mut mat = vec![vec![0u8; dim]; dim];
        for col in 0..dim {
            let out = apply_query_unitary(&q, &f, &basis(dim, col)).unwrap();
            for (row, c) in out.iter().enumerate() {
                assert!(c.im == 0.0 && (c.re == 0.0 || c.re == 1.0));
                mat[row][col] = c.re as u8;
            }
        }
        for r in 0..dim {
            assert_eq!(mat[r].iter().map(|&v| v as usize).sum::<usize>(), 1);
            assert_eq!((0..dim).map(|c| mat[c][r] as usize).sum::<usize>(), 1);
        }
        for i in 0..4 {
            let start = basis(dim, i << 3);
            let mut s = start.clone();
            for _ in 0..4 {
                s = apply_query_unitary(&q, &f, &s).unwrap();
            }
            assert_eq!(s, start);
        }
    }

    #[test]
    fn errors() {
        let q = QuerySpec::new(2, 1, 1, vec![0], vec![5], Quantizer::new(1, 0.0, 1.0)).unwrap();
        assert!(matches!(apply_query_unitary(&q, &vec![1.0], &basis(4, 0)), Err(Error::Input(_))));
        assert!(matches!(apply_query_unitary(&q, &vec![1.0; 6], &basis(8, 0)), Err(Error::Contract(_))));
        assert!(QuerySpec::new(2, 2, 1, vec![0], vec![0], Quantizer::new(1, 0.0, 1.0)).is_err());
    }

    #[test]
    fn quantizer_endpoints_exact() {
        let b = Quantizer::unit(32);
        assert_eq!(b.quantize(0.0), 0.0);
        assert_eq!(b.quantize(1.0), 1.0);
        assert!((b.quantize(0.3) - 0.3).abs() <= b.resolution());
    }
}
