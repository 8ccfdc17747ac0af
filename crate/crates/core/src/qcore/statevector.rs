//! Dense state-vector simulation of amplitude estimation.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::query::{InfoOracle, Quantizer, QuerySpec};
use crate::{Error, Result};

type C = Complex64;

/// Applies a 2x2 unitary to qubit `bit` (counted from the least significant end).
pub fn apply_single_qubit(state: &mut [C], bit: usize, u: [[C; 2]; 2]) {
    let stride = 1usize << bit;
    for base in 0..state.len() {
        if base & stride != 0 {
            continue;
        }
        let (a, b) = (state[base], state[base | stride]);
        state[base] = u[0][0] * a + u[0][1] * b;
        state[base | stride] = u[1][0] * a + u[1][1] * b;
    }
}

pub fn hadamard() -> [[C; 2]; 2] {
    let h = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn ry(angle: f64) -> [[C; 2]; 2] {
    let (s, c) = (0.5 * angle).sin_cos();
    [[C::new(c, 0.0), C::new(-s, 0.0)], [C::new(s, 0.0), C::new(c, 0.0)]]
}

/// State preparation `A` whose good subspace is "lowest work qubit = 1".
#[derive(Debug, Clone)]
pub enum StatePrep {
    /// One qubit rotated so the good amplitude squared is `a`; no queries.
    Rotation { a: f64 },
    /// Uniform superposition over indices, a query writing the encoded value,
    /// a value-controlled rotation of an ancilla and an uncomputing query.
    MeanOracle { query: QuerySpec, values: Vec<f64> },
}

impl StatePrep {
    pub fn mean_oracle(values: &[f64], value_bits: u32) -> Result<Self> {
        if !values.len().is_power_of_two() {
            return Err(Error::Input("number of values must be a power of two".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Input("values must lie in [0,1]".into()));
        }
        let query = QuerySpec::dense(values.len(), value_bits as usize, 1, Quantizer::unit(value_bits))?;
        Ok(StatePrep::MeanOracle { query, values: values.to_vec() })
    }

    pub fn work_qubits(&self) -> usize {
        match self {
            StatePrep::Rotation { .. } => 1,
            StatePrep::MeanOracle { query, .. } => query.m,
        }
    }

    /// Exact good-subspace probability of `A|0>`.
    pub fn amplitude(&self) -> f64 {
        match self {
            StatePrep::Rotation { a } => *a,
            StatePrep::MeanOracle { query, values } => {
                values.iter().map(|&v| query.beta.quantize(v)).sum::<f64>() / values.len() as f64
            }
        }
    }

    pub fn queries_per_application(&self) -> u64 {
        match self {
            StatePrep::Rotation { .. } => 0,
            StatePrep::MeanOracle { .. } => 2,
        }
    }
}

/// `A` or `A^{-1}` compiled against a fixed oracle.
struct Compiled<'a> {
    prep: &'a StatePrep,
    perm: Vec<usize>,
    inv_perm: Vec<usize>,
    queries: u64,
}

impl<'a> Compiled<'a> {
    fn new(prep: &'a StatePrep) -> Result<Self> {
        let (perm, inv_perm) = match prep {
            StatePrep::Rotation { .. } => (Vec::new(), Vec::new()),
            StatePrep::MeanOracle { query, values } => {
                let perm = query.permutation(values as &dyn InfoOracle)?;
                let mut inv = vec![0; perm.len()];
                for (s, &d) in perm.iter().enumerate() {
                    inv[d] = s;
                }
                (perm, inv)
            }
        };
        Ok(Compiled { prep, perm, inv_perm, queries: 0 })
    }

    fn permute(state: &mut [C], map: &[usize], scratch: &mut Vec<C>) {
        scratch.clear();
        scratch.resize(state.len(), C::new(0.0, 0.0));
        for (s, &d) in map.iter().enumerate() {
            scratch[d] = state[s];
        }
        state.copy_from_slice(scratch);
    }

    fn value_rotation(&self, state: &mut [C], sign: f64) {
        let StatePrep::MeanOracle { query, .. } = self.prep else { return };
        let vmask = (1usize << query.m_dprime) - 1;
        for base in (0..state.len()).step_by(2) {
            let x = (base >> 1) & vmask;
            let v = query.beta.decode(x as u64).clamp(0.0, 1.0);
            let u = ry(sign * 2.0 * v.sqrt().asin());
            let (a, b) = (state[base], state[base | 1]);
            state[base] = u[0][0] * a + u[0][1] * b;
            state[base | 1] = u[1][0] * a + u[1][1] * b;
        }
    }

    fn apply(&mut self, state: &mut [C], inverse: bool, scratch: &mut Vec<C>) {
        match self.prep {
            StatePrep::Rotation { a } => {
                let angle = 2.0 * a.clamp(0.0, 1.0).sqrt().asin();
                apply_single_qubit(state, 0, ry(if inverse { -angle } else { angle }));
            }
            StatePrep::MeanOracle { query, .. } => {
                let low = query.m - query.m_prime;
                let hadamards = |state: &mut [C]| {
                    for q in 0..query.m_prime {
                        apply_single_qubit(state, low + q, hadamard());
                    }
                };
                // A = Q^{-1} R Q H, all factors but H are real and Q^{-1} is the inverse permutation
                if inverse {
                    Self::permute(state, &self.perm, scratch);
                    self.value_rotation(state, -1.0);
                    Self::permute(state, &self.inv_perm, scratch);
                    hadamards(state);
                } else {
                    hadamards(state);
                    Self::permute(state, &self.perm, scratch);
                    self.value_rotation(state, 1.0);
                    Self::permute(state, &self.inv_perm, scratch);
                }
                self.queries += 2;
            }
        }
    }

    /// `G = -A S_0 A^{-1} S_chi`.
    fn grover(&mut self, state: &mut [C], scratch: &mut Vec<C>) {
        for (i, amp) in state.iter_mut().enumerate() {
            if i & 1 == 1 {
                *amp = -*amp;
            }
        }
        self.apply(state, true, scratch);
        state[0] = -state[0];
        self.apply(state, false, scratch);
        state.iter_mut().for_each(|a| *a = -*a);
    }
}

/// Result of a simulated amplitude estimation run.
#[derive(Debug, Clone)]
pub struct AeSimulation {
    /// Probability of each phase register outcome `y in 0..2^t`.
    pub phase_probs: Vec<f64>,
    pub queries: u64,
}

/// Simulates amplitude estimation with `t` phase bits on top of `prep`.
pub fn simulate_ae(prep: &StatePrep, t: u32, qubit_cap: usize) -> Result<AeSimulation> {
    let w = prep.work_qubits();
    let total = t as usize + w;
    if total > qubit_cap {
        return Err(Error::Capacity { qubits: total, cap: qubit_cap });
    }
    let wd = 1usize << w;
    let md = 1usize << t;
    let mut op = Compiled::new(prep)?;
    let mut scratch = Vec::new();

    let mut work = vec![C::new(0.0, 0.0); wd];
    work[0] = C::new(1.0, 0.0);
    op.apply(&mut work, false, &mut scratch);

    let mut state = vec![C::new(0.0, 0.0); md * wd];
    state[..wd].copy_from_slice(&work);
    for q in 0..t as usize {
        apply_single_qubit(&mut state, w + q, hadamard());
    }
    for j in 0..t as usize {
        for y in (0..md).filter(|y| y >> j & 1 == 1) {
            let slice = &mut state[y * wd..(y + 1) * wd];
            for _ in 0..1usize << j {
                op.grover(slice, &mut scratch);
            }
        }
    }
    // queries are counted once per controlled power, not once per simulated slice
    let slices_counted: u64 = (0..t).map(|j| (md as u64 / 2) * (1u64 << j)).sum();
    let per_g = 2 * prep.queries_per_application();
    let queries = prep.queries_per_application() + per_g * ((1u64 << t) - 1);
    debug_assert_eq!(op.queries, prep.queries_per_application() + per_g * slices_counted);

    // inverse Fourier transform on the phase register
    let mut probs = vec![0.0; md];
    let twiddle: Vec<C> = (0..md).map(|k| C::from_polar(1.0 / md as f64, -2.0 * PI * k as f64 / md as f64)).collect();
    let mut col = vec![C::new(0.0, 0.0); md];
    for x in 0..wd {
        for (y, c) in col.iter_mut().enumerate() {
            *c = state[y * wd + x];
        }
        for (k, p) in probs.iter_mut().enumerate() {
            let mut acc = C::new(0.0, 0.0);
            for (y, c) in col.iter().enumerate() {
                acc += *c * twiddle[(y * k) % md];
            }
            *p += acc.norm_sqr() * md as f64;
        }
    }
    Ok(AeSimulation { phase_probs: probs, queries })
}
