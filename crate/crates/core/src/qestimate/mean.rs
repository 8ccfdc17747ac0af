use std::str::FromStr;

use num_complex::Complex64;

use super::reduce::reduce_weights;
use crate::qcore::ae::{ae_bits_for_budget, AeLaw};
use crate::qcore::estimator::{AeComponent, Boosted, Constant, McEstimator, MeanEstimator, TabulatedLaw};
use crate::qcore::query::Quantizer;
use crate::qcore::statevector::{simulate_ae, StatePrep};
use crate::qcore::estimator::repeats_for_parts;
use crate::rng::{derive_rng, Rng};
use crate::{Error, Result};

/// How leaf means are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeafBackend {
    /// Amplitude estimation through its closed-form outcome law.
    #[default]
    Quantum,
    /// Amplitude estimation through state-vector simulation.
    StateVector { qubit_cap: usize },
    /// Classical (importance sampling) Monte Carlo.
    Classical,
    /// Exact value, zero queries; for testing.
    Exact,
}

impl FromStr for LeafBackend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" | "analytic" | "q" => Ok(LeafBackend::Quantum),
            "statevector" => Ok(LeafBackend::StateVector { qubit_cap: crate::qcore::DEFAULT_QUBIT_CAP }),
            "classical" | "mc" | "ran" => Ok(LeafBackend::Classical),
            "exact" => Ok(LeafBackend::Exact),
            other => Err(Error::Config(format!("unknown backend '{other}'"))),
        }
    }
}

/// A single sampled estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub queries: u64,
    pub ok: bool,
}

/// Fixed-point bits used for function values by the closed-form backend.
pub const VALUE_BITS: u32 = 40;
/// Value register size used by the state-vector backend.
pub const STATEVECTOR_VALUE_BITS: u32 = 6;

pub(crate) fn check_bounded(f: &[f64]) -> Result<()> {
    match f.iter().find(|v| !(v.abs() <= 1.0 + 1e-12)) {
        Some(bad) => Err(Error::Contract(format!("function value {bad} exceeds 1 in modulus"))),
        None => Ok(()),
    }
}

/// Check width used for each half of a sign-split estimate: with `k = 5`
/// each half holds with probability at least 7/8, so both hold with
/// probability at least 3/4.
pub const SPLIT_SLACK: f64 = 5.0;

/// Estimator of `scale * (a_pos - a_neg)` from two amplitude estimations
/// sharing the budget `n` equally.
pub fn signed_ae(a_pos: f64, a_neg: f64, n: u64, scale: f64) -> Result<TabulatedLaw> {
    let half = n / 2;
    let pos = AeComponent::new(a_pos.clamp(0.0, 1.0), half, scale, 0.0)?.with_slack(SPLIT_SLACK);
    let neg = AeComponent::new(a_neg.clamp(0.0, 1.0), half, scale, 0.0)?.with_slack(SPLIT_SLACK);
    TabulatedLaw::difference(&TabulatedLaw::from_component(&pos), &TabulatedLaw::from_component(&neg))
}

fn simulated_part(seq: &[f64], n: u64, scale: f64, qubit_cap: usize) -> Result<AeComponent> {
    let prep = StatePrep::mean_oracle(seq, STATEVECTOR_VALUE_BITS)?;
    let a = prep.amplitude();
    let law = match ae_bits_for_budget(n) {
        Some(t) => {
            let sim = simulate_ae(&prep, t, qubit_cap)?;
            AeLaw::from_phase_distribution(a, t, &sim.phase_probs, sim.queries)?
        }
        None => AeLaw::for_budget(a, n)?,
    };
    Ok(AeComponent::from_law(law, scale, 0.0).with_slack(SPLIT_SLACK))
}

/// Amplitude estimation of the mean of `values` (replicated `reps[i]`
/// times), split into positive and negative parts, returned as an
/// estimator of `scale` times that mean.
fn ae_mean(values: &[f64], reps: Option<&[u64]>, n: u64, scale: f64, backend: LeafBackend) -> Result<TabulatedLaw> {
    let pos = |v: f64| v.clamp(0.0, 1.0);
    let neg = |v: f64| (-v).clamp(0.0, 1.0);
    match backend {
        LeafBackend::StateVector { qubit_cap } => {
            let seq: Vec<f64> = match reps {
                None => values.to_vec(),
                Some(h) => h.iter().zip(values).flat_map(|(&r, &v)| std::iter::repeat_n(v, r as usize)).collect(),
            };
            if !seq.len().is_power_of_two() {
                return Err(Error::Unsupported(format!("state-vector mean needs a power-of-two length, got {}", seq.len())));
            }
            let p: Vec<f64> = seq.iter().map(|&v| pos(v)).collect();
            let m: Vec<f64> = seq.iter().map(|&v| neg(v)).collect();
            let a = simulated_part(&p, n / 2, scale, qubit_cap)?;
            let b = simulated_part(&m, n / 2, scale, qubit_cap)?;
            TabulatedLaw::difference(&TabulatedLaw::from_component(&a), &TabulatedLaw::from_component(&b))
        }
        _ => {
            let q = Quantizer::unit(VALUE_BITS);
            let (mut sp, mut sn, mut total) = (0.0, 0.0, 0.0);
            for (i, &v) in values.iter().enumerate() {
                let r = reps.map_or(1.0, |h| h[i] as f64);
                sp += r * q.quantize(pos(v));
                sn += r * q.quantize(neg(v));
                total += r;
            }
            signed_ae(sp / total, sn / total, n, scale)
        }
    }
}

/// Estimator of `S_N f = (1/N) sum f(i)` for `|f| <= 1` using at most `n` queries.
pub fn qmean_estimator(f: &[f64], n: u64, backend: LeafBackend) -> Result<Box<dyn MeanEstimator>> {
    if f.is_empty() {
        return Err(Error::Input("empty sequence".into()));
    }
    check_bounded(f)?;
    Ok(match backend {
        LeafBackend::Exact => Box::new(Constant(f.iter().sum::<f64>() / f.len() as f64)),
        LeafBackend::Classical => Box::new(McEstimator::new(f.to_vec(), vec![1.0; f.len()], n, 1.0)?),
        _ => Box::new(ae_mean(f, None, n, 1.0, backend)?),
    })
}

/// One draw of [`qmean_estimator`] seeded from `seed`.
pub fn qmean(f: &[f64], n: u64, backend: LeafBackend, seed: u64) -> Result<Estimate> {
    let est = qmean_estimator(f, n, backend)?;
    Ok(draw_once(est.as_ref(), &mut derive_rng(seed, 0)))
}

pub(crate) fn draw_once(est: &dyn MeanEstimator, rng: &mut Rng) -> Estimate {
    let d = est.draw(rng);
    Estimate { value: d.value, queries: est.queries(), ok: d.ok }
}

/// Estimator of `S_{N,g} f = (1/N) sum g(i) f(i)` for real, possibly signed
/// weights. The sign of `g(i)` is folded into the queried value so one
/// nonnegative reduction serves both signs.
pub fn weighted_mean_estimator(g: &[f64], f: &[f64], n: u64, backend: LeafBackend) -> Result<Box<dyn MeanEstimator>> {
    if g.len() != f.len() || g.is_empty() {
        return Err(Error::Input("weights and values must be nonempty and of equal length".into()));
    }
    check_bounded(f)?;
    if let Some(bad) = g.iter().find(|v| !v.is_finite()) {
        return Err(Error::Input(format!("weight {bad} is not finite")));
    }
    let big_n = g.len() as f64;
    let norm = g.iter().map(|v| v.abs()).sum::<f64>() / big_n;
    if norm == 0.0 {
        return Ok(Box::new(Constant(0.0)));
    }
    let w: Vec<f64> = g.iter().map(|v| v.abs() / norm).collect();
    let v: Vec<f64> = g.iter().zip(f).map(|(gi, fi)| if *gi < 0.0 { -fi } else { *fi }).collect();
    Ok(match backend {
        LeafBackend::Exact => Box::new(Constant(g.iter().zip(f).map(|(a, b)| a * b).sum::<f64>() / big_n)),
        LeafBackend::Classical => Box::new(McEstimator::new(v, w, n, norm)?),
        _ => match reduce_weights(&w, n.max(1)) {
            Err(Error::ZeroReduction) => Box::new(Constant(0.0)),
            Err(e) => return Err(e),
            Ok(red) => Box::new(ae_mean(&v, Some(&red.h), n, norm / red.ratio(), backend)?),
        },
    })
}

pub fn weighted_mean(g: &[f64], f: &[f64], n: u64, backend: LeafBackend, seed: u64) -> Result<Estimate> {
    let est = weighted_mean_estimator(g, f, n, backend)?;
    Ok(draw_once(est.as_ref(), &mut derive_rng(seed, 0)))
}

/// Classical importance-sampling estimate of `S_{N,g} f` with `n` samples.
pub fn mc_mean(g: &[f64], f: &[f64], n: u64, seed: u64) -> Result<Estimate> {
    weighted_mean(g, f, n, LeafBackend::Classical, seed)
}

/// Estimator of a complex weighted mean as two boosted real estimators.
pub struct ComplexEstimator {
    pub re: Box<dyn MeanEstimator>,
    pub im: Box<dyn MeanEstimator>,
}

impl ComplexEstimator {
    pub fn draw(&self, rng: &mut Rng) -> (Complex64, bool) {
        let a = self.re.draw(rng);
        let b = self.im.draw(rng);
        (Complex64::new(a.value, b.value), a.ok && b.ok)
    }

    pub fn queries(&self) -> u64 {
        self.re.queries() + self.im.queries()
    }
}

/// Complex `g = g1 + i g2`, `f = f1 + i f2` with `|f| <= 1`. Real and
/// imaginary parts are weighted means over the doubled index set
/// `(g1, g2)` with values `(f1, -f2)` and `(f2, f1)`.
pub fn weighted_mean_complex(g: &[Complex64], f: &[Complex64], n: u64, backend: LeafBackend) -> Result<ComplexEstimator> {
    if g.len() != f.len() || g.is_empty() {
        return Err(Error::Input("weights and values must be nonempty and of equal length".into()));
    }
    if let Some(bad) = f.iter().find(|v| !(v.norm() <= 1.0 + 1e-12)) {
        return Err(Error::Contract(format!("function value {bad} exceeds 1 in modulus")));
    }
    let weights: Vec<f64> = g.iter().map(|z| 2.0 * z.re).chain(g.iter().map(|z| 2.0 * z.im)).collect();
    let re_vals: Vec<f64> = f.iter().map(|z| z.re).chain(f.iter().map(|z| -z.im)).collect();
    let im_vals: Vec<f64> = f.iter().map(|z| z.im).chain(f.iter().map(|z| z.re)).collect();
    let nu = match backend {
        LeafBackend::Quantum | LeafBackend::StateVector { .. } => repeats_for_parts(2, 0.25),
        _ => 1,
    };
    let per_run = n / 2 / nu as u64;
    let part = |vals: &[f64]| -> Result<Box<dyn MeanEstimator>> {
        let inner = weighted_mean_estimator(&weights, vals, per_run, backend)?;
        Ok(if nu > 1 { Box::new(Boosted::new(inner, nu)?) } else { inner })
    };
    Ok(ComplexEstimator { re: part(&re_vals)?, im: part(&im_vals)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function_gives_zero() {
        let e = qmean(&[0.0; 16], 64, LeafBackend::Quantum, 3).unwrap();
        // a = 1/2 is exact for t >= 2 at this budget
        assert!(e.value.abs() < 1e-12);
        assert!(e.queries <= 64);
    }

    #[test]
    fn half_indicator_is_exact_in_state_vector() {
        let f = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        // indicator of half the points in [0,1] encodes to a = 1/2, i.e. f in {+1, -1} with mean 0
        for seed in 0..5 {
            let e = qmean(&f, 62, LeafBackend::StateVector { qubit_cap: 24 }, seed).unwrap();
            assert!(e.value.abs() < 1e-9, "{}", e.value);
        }
    }

    #[test]
    fn contract_violation() {
        assert!(matches!(qmean(&[1.5], 10, LeafBackend::Quantum, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn exact_weighted_examples() {
        let e = weighted_mean(&[1.5, 0.9, 0.6], &[1.0, -1.0, 1.0], 10, LeafBackend::Exact, 0).unwrap();
        assert!((e.value - 0.4).abs() < 1e-15);
        assert_eq!(e.queries, 0);
        let z = weighted_mean(&[0.0; 4], &[1.0; 4], 10, LeafBackend::Quantum, 0).unwrap();
        assert_eq!(z.value, 0.0);
        let one = weighted_mean(&[1.0; 8], &[1.0; 8], 100, LeafBackend::Exact, 0).unwrap();
        assert_eq!(one.value, 1.0);
    }

    #[test]
    fn complex_exact_recombination() {
        let g = [Complex64::new(0.5, -1.0), Complex64::new(2.0, 0.25), Complex64::new(-0.75, 0.5)];
        let f = [Complex64::new(0.6, 0.2), Complex64::new(-0.1, 0.9), Complex64::new(0.0, -0.7)];
        let want: Complex64 = g.iter().zip(&f).map(|(a, b)| a * b).sum::<Complex64>() / 3.0;
        let est = weighted_mean_complex(&g, &f, 100, LeafBackend::Exact).unwrap();
        let (got, ok) = est.draw(&mut derive_rng(0, 0));
        assert!(ok && (got - want).norm() < 1e-12);
    }
}
