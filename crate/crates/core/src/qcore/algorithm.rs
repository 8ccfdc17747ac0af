//! Multi-stage quantum query algorithms with intermediate measurements.

use num_complex::Complex64;
use rand::Rng as _;

use super::distribution::OutputDistribution;
use super::query::{apply_query_unitary, InfoOracle, QuerySpec};
use super::statevector::apply_single_qubit;
use super::DEFAULT_QUBIT_CAP;
use crate::rng::Rng;
use crate::{Error, Result};

type C = Complex64;

/// An oracle-independent unitary on one stage's register.
#[derive(Debug, Clone)]
pub enum Unitary {
    Identity,
    /// Row-major dense matrix.
    Dense(Vec<Vec<C>>),
    Gate { bit: usize, matrix: [[C; 2]; 2] },
    Sequence(Vec<Unitary>),
    /// Basis permutation, `perm[src] = dst`.
    Permutation(Vec<usize>),
}

impl Unitary {
    fn check(&self, dim: usize) -> Result<()> {
        match self {
            Unitary::Identity => Ok(()),
            Unitary::Gate { bit, matrix } => {
                if (1usize << bit) >= dim {
                    return Err(Error::Input(format!("gate on qubit {bit} outside register")));
                }
                check_unitary(&matrix.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            }
            Unitary::Sequence(us) => us.iter().try_for_each(|u| u.check(dim)),
            Unitary::Dense(m) => {
                if m.len() != dim || m.iter().any(|r| r.len() != dim) {
                    return Err(Error::Input(format!("dense unitary must be {dim}x{dim}")));
                }
                check_unitary(m)
            }
            Unitary::Permutation(p) => {
                let mut seen = vec![false; dim];
                if p.len() != dim || p.iter().any(|&d| d >= dim || std::mem::replace(&mut seen[d], true)) {
                    return Err(Error::Input("not a permutation of the basis".into()));
                }
                Ok(())
            }
        }
    }

    fn apply(&self, state: &mut Vec<C>) {
        match self {
            Unitary::Identity => {}
            Unitary::Gate { bit, matrix } => apply_single_qubit(state, *bit, *matrix),
            Unitary::Sequence(us) => us.iter().for_each(|u| u.apply(state)),
            Unitary::Dense(m) => {
                *state = m.iter().map(|row| row.iter().zip(state.iter()).map(|(a, b)| a * b).sum()).collect();
            }
            Unitary::Permutation(p) => {
                let mut out = vec![C::new(0.0, 0.0); state.len()];
                for (s, &d) in p.iter().enumerate() {
                    out[d] = state[s];
                }
                *state = out;
            }
        }
    }
}

fn check_unitary(m: &[Vec<C>]) -> Result<()> {
    let n = m.len();
    for i in 0..n {
        for j in 0..n {
            let dot: C = (0..n).map(|k| m[k][i].conj() * m[k][j]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            if (dot - want).norm() > 1e-10 {
                return Err(Error::Input("matrix is not unitary to 1e-10".into()));
            }
        }
    }
    Ok(())
}

/// Initial basis state of a stage as a function of earlier outcomes.
pub enum Start {
    Fixed(usize),
    Branch(Box<dyn Fn(&[usize]) -> usize + Send + Sync>),
}

/// One measured stage `U_n Q_f U_{n-1} ... Q_f U_0` followed by a full measurement.
pub struct Stage {
    pub query: QuerySpec,
    /// `n + 1` unitaries for `n` queries.
    pub unitaries: Vec<Unitary>,
    pub start: Start,
}

impl Stage {
    pub fn queries(&self) -> u64 {
        self.unitaries.len().saturating_sub(1) as u64
    }

    fn run(&self, oracle: &dyn InfoOracle, earlier: &[usize]) -> Result<Vec<f64>> {
        let dim = self.query.dim();
        let start = match &self.start {
            Start::Fixed(s) => *s,
            Start::Branch(b) => b(earlier),
        };
        if start >= dim {
            return Err(Error::Contract(format!("start state {start} outside register")));
        }
        let mut state = vec![C::new(0.0, 0.0); dim];
        state[start] = C::new(1.0, 0.0);
        for (k, u) in self.unitaries.iter().enumerate() {
            if k > 0 {
                state = apply_query_unitary(&self.query, oracle, &state)?;
            }
            u.apply(&mut state);
        }
        Ok(state.iter().map(|a| a.norm_sqr()).collect())
    }
}

/// A measured algorithm with output map over the tuple of stage outcomes.
pub struct AlgorithmSpec {
    pub stages: Vec<Stage>,
    pub output: Box<dyn Fn(&[usize]) -> f64 + Send + Sync>,
    /// Closed-form output law, if known.
    pub analytic: Option<Box<dyn Fn(&dyn InfoOracle) -> Result<OutputDistribution> + Send + Sync>>,
}

impl AlgorithmSpec {
    pub fn queries(&self) -> u64 {
        self.stages.iter().map(Stage::queries).sum()
    }

    fn validate(&self, cap: usize) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Input("algorithm has no stages".into()));
        }
        for s in &self.stages {
            if s.query.m > cap {
                return Err(Error::Capacity { qubits: s.query.m, cap });
            }
            if s.unitaries.is_empty() {
                return Err(Error::Input("stage needs at least one unitary".into()));
            }
            s.unitaries.iter().try_for_each(|u| u.check(s.query.dim()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    StateVector { qubit_cap: usize },
    Analytic,
}

impl Default for Backend {
    fn default() -> Self {
        Backend::StateVector { qubit_cap: DEFAULT_QUBIT_CAP }
    }
}

/// Exact output law of `spec` applied to `oracle`.
pub fn run_algorithm(spec: &AlgorithmSpec, oracle: &dyn InfoOracle, backend: Backend) -> Result<OutputDistribution> {
    match backend {
        Backend::Analytic => match &spec.analytic {
            Some(law) => law(oracle),
            None => Err(Error::Unsupported("no analytic law for this algorithm".into())),
        },
        Backend::StateVector { qubit_cap } => {
            spec.validate(qubit_cap)?;
            let mut support = Vec::new();
            let mut probs = Vec::new();
            let mut prefix = Vec::new();
            enumerate(spec, oracle, &mut prefix, 1.0, &mut support, &mut probs)?;
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);
            Ok(OutputDistribution::new(support, probs)?.normalized())
        }
    }
}

fn enumerate(
    spec: &AlgorithmSpec,
    oracle: &dyn InfoOracle,
    prefix: &mut Vec<usize>,
    weight: f64,
    support: &mut Vec<f64>,
    probs: &mut Vec<f64>,
) -> Result<()> {
    if prefix.len() == spec.stages.len() {
        support.push((spec.output)(prefix));
        probs.push(weight);
        return Ok(());
    }
    let p = spec.stages[prefix.len()].run(oracle, prefix)?;
    for (outcome, &q) in p.iter().enumerate() {
        if q * weight < 1e-300 {
            continue;
        }
        prefix.push(outcome);
        enumerate(spec, oracle, prefix, weight * q, support, probs)?;
        prefix.pop();
    }
    Ok(())
}

/// One sampled run of `spec`, measuring stage by stage.
pub fn sample_algorithm(spec: &AlgorithmSpec, oracle: &dyn InfoOracle, rng: &mut Rng, qubit_cap: usize) -> Result<f64> {
    spec.validate(qubit_cap)?;
    let mut outcomes = Vec::with_capacity(spec.stages.len());
    for stage in &spec.stages {
        let p = stage.run(oracle, &outcomes)?;
        let u: f64 = rng.random();
        let mut c = 0.0;
        let mut pick = p.len() - 1;
        for (i, q) in p.iter().enumerate() {
            c += q;
            if u < c {
                pick = i;
                break;
            }
        }
        outcomes.push(pick);
    }
    Ok((spec.output)(&outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::query::Quantizer;
    use crate::qcore::statevector::hadamard;

    /// Deutsch-style stage: H on the index, one query, H on the index.
    fn deutsch_stage() -> Stage {
        let q = QuerySpec::dense(2, 1, 0, Quantizer::unit(1)).unwrap();
        // phase kickback from the value register in |->
        let minus = Unitary::Sequence(vec![
            Unitary::Permutation(vec![1, 0, 3, 2]),
            Unitary::Gate { bit: 0, matrix: hadamard() },
            Unitary::Gate { bit: 1, matrix: hadamard() },
        ]);
        let close = Unitary::Gate { bit: 1, matrix: hadamard() };
        Stage { query: q, unitaries: vec![minus, close], start: Start::Fixed(0) }
    }

    #[test]
    fn deutsch_distinguishes_constant_from_balanced() {
        let spec = AlgorithmSpec { stages: vec![deutsch_stage()], output: Box::new(|o| (o[0] >> 1) as f64), analytic: None };
        let constant = run_algorithm(&spec, &vec![1.0, 1.0], Backend::default()).unwrap();
        let balanced = run_algorithm(&spec, &vec![0.0, 1.0], Backend::default()).unwrap();
        assert_eq!(constant.support, vec![0.0]);
        assert_eq!(balanced.support, vec![1.0]);
        assert_eq!(spec.queries(), 1);
    }

    #[test]
    fn branching_uses_earlier_outcomes() {
        let q = QuerySpec::dense(2, 1, 0, Quantizer::unit(1)).unwrap();
        let first = Stage { query: q.clone(), unitaries: vec![Unitary::Gate { bit: 0, matrix: hadamard() }], start: Start::Fixed(0) };
        let second = Stage { query: q, unitaries: vec![Unitary::Identity], start: Start::Branch(Box::new(|o| o[0] ^ 3)) };
        let spec = AlgorithmSpec { stages: vec![first, second], output: Box::new(|o| o[1] as f64), analytic: None };
        let d = run_algorithm(&spec, &vec![0.0, 0.0], Backend::default()).unwrap();
        assert_eq!(d.support, vec![2.0, 3.0]);
        assert!((d.probs[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn capacity_and_backend_errors() {
        let spec = AlgorithmSpec { stages: vec![deutsch_stage()], output: Box::new(|_| 0.0), analytic: None };
        assert!(matches!(run_algorithm(&spec, &vec![0.0, 0.0], Backend::StateVector { qubit_cap: 1 }), Err(Error::Capacity { .. })));
        assert!(matches!(run_algorithm(&spec, &vec![0.0, 0.0], Backend::Analytic), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rejects_non_unitary() {
        let q = QuerySpec::dense(2, 1, 0, Quantizer::unit(1)).unwrap();
        let bad = Unitary::Dense(vec![vec![C::new(1.0, 0.0); 4]; 4]);
        let spec = AlgorithmSpec {
            stages: vec![Stage { query: q, unitaries: vec![bad], start: Start::Fixed(0) }],
            output: Box::new(|_| 0.0),
            analytic: None,
        };
        assert!(matches!(run_algorithm(&spec, &vec![0.0, 0.0], Backend::default()), Err(Error::Input(_))));
    }
}
