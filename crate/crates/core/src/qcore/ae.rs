use std::f64::consts::PI;

use rand::Rng as _;

use super::distribution::OutputDistribution;
use crate::rng::Rng;
use crate::{Error, Result};

/// Largest number of phase bits whose outcome law is tabulated.
pub const MAX_PHASE_BITS: u32 = 20;

/// Queries used by amplitude estimation with `t` phase bits when the state
/// preparation costs two queries (compute and uncompute).
pub fn ae_queries(t: u32) -> u64 {
    (1u64 << (t + 2)) - 2
}

/// Largest `t` with `ae_queries(t) <= n`, capped at [`MAX_PHASE_BITS`].
pub fn ae_bits_for_budget(n: u64) -> Option<u32> {
    if n < ae_queries(1) {
        return None;
    }
    let mut t = 1;
    while t < MAX_PHASE_BITS && ae_queries(t + 1) <= n {
        t += 1;
    }
    Some(t)
}

/// Fejer kernel `sin^2(M pi d) / (M^2 sin^2(pi d))`.
fn fejer(m: f64, delta: f64) -> f64 {
    let d = delta - delta.round();
    if d.abs() < 1e-15 {
        return 1.0;
    }
    let num = (m * PI * d).sin();
    let den = m * (PI * d).sin();
    (num / den).powi(2)
}

fn omega(a: f64) -> f64 {
    a.clamp(0.0, 1.0).sqrt().asin() / PI
}

/// Law of the measured phase register `y in 0..2^t`.
pub fn ae_phase_distribution(a: f64, t: u32) -> Result<Vec<f64>> {
    check_amplitude(a)?;
    let m = (1u64 << t) as f64;
    let w = omega(a);
    let size = 1usize << t;
    let mut p: Vec<f64> = (0..size)
        .map(|y| {
            let x = y as f64 / m;
            0.5 * (fejer(m, x - w) + fejer(m, x + w))
        })
        .collect();
    // the two eigencomponents coincide at a = 0 and a = 1
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Ok(p)
}

/// Estimate produced by phase outcome `y`.
pub fn ae_estimate(y: u64, t: u32) -> f64 {
    let m = (1u64 << t) as f64;
    (PI * y as f64 / m).sin().powi(2)
}

/// Law of the estimate, with `y` and `M - y` merged onto `j = 0..=M/2`.
pub fn ae_outcome_distribution(a: f64, t: u32) -> Result<OutputDistribution> {
    let p = ae_phase_distribution(a, t)?;
    let m = p.len();
    let half = m / 2;
    let mut support = Vec::with_capacity(half + 1);
    let mut probs = Vec::with_capacity(half + 1);
    for j in 0..=half {
        let mass = if j == 0 || j == half { p[j] } else { p[j] + p[m - j] };
        support.push(ae_estimate(j as u64, t));
        probs.push(mass);
    }
    OutputDistribution::new(support, probs)
}

/// Error bound that holds with probability at least `8/pi^2`.
pub fn ae_error_bound(a: f64, t: u32) -> f64 {
    ae_error_bound_k(a, t, 1.0)
}

/// Widened bound `2 pi k sqrt(a(1-a))/M + (pi k/M)^2`; see [`ae_confidence`].
pub fn ae_error_bound_k(a: f64, t: u32, k: f64) -> f64 {
    let m = (1u64 << t) as f64;
    2.0 * PI * k * (a * (1.0 - a)).max(0.0).sqrt() / m + (PI * k / m).powi(2)
}

/// Probability with which [`ae_error_bound_k`] holds.
pub fn ae_confidence(k: f64) -> f64 {
    if k < 2.0 {
        8.0 / (PI * PI)
    } else {
        1.0 - 1.0 / (2.0 * (k - 1.0))
    }
}

fn check_amplitude(a: f64) -> Result<()> {
    if !(-1e-12..=1.0 + 1e-12).contains(&a) || a.is_nan() {
        return Err(Error::Input(format!("amplitude {a} outside [0,1]")));
    }
    Ok(())
}

/// Tabulated outcome law of the estimator of `a` for a given query budget.
///
/// Budgets too small for one phase bit fall back to averaging single
/// measurements of the prepared state (two queries each); below two
/// queries the estimate is zero.
#[derive(Debug, Clone)]
pub struct AeLaw {
    pub a: f64,
    pub queries: u64,
    pub bits: Option<u32>,
    support: Vec<f64>,
    cdf: Vec<f64>,
}

impl AeLaw {
    pub fn with_bits(a: f64, t: u32) -> Result<Self> {
        if t == 0 || t > MAX_PHASE_BITS {
            return Err(Error::Input(format!("phase bits {t} outside 1..={MAX_PHASE_BITS}")));
        }
        let d = ae_outcome_distribution(a, t)?;
        Ok(Self::from_distribution(a, ae_queries(t), Some(t), d))
    }

    pub fn for_budget(a: f64, n: u64) -> Result<Self> {
        check_amplitude(a)?;
        if let Some(t) = ae_bits_for_budget(n) {
            return Self::with_bits(a, t);
        }
        let k = (n / 2) as usize;
        if k == 0 {
            return Ok(Self::from_distribution(a, 0, None, OutputDistribution::point(0.0)));
        }
        let a = a.clamp(0.0, 1.0);
        let support: Vec<f64> = (0..=k).map(|j| j as f64 / k as f64).collect();
        let probs: Vec<f64> = (0..=k)
            .map(|j| binomial(k as u64, j as u64) * a.powi(j as i32) * (1.0 - a).powi((k - j) as i32))
            .collect();
        let d = OutputDistribution::new(support, probs)?;
        Ok(Self::from_distribution(a, 2 * k as u64, None, d))
    }

    /// Law built from a phase-register distribution, e.g. one obtained by
    /// state-vector simulation.
    pub fn from_phase_distribution(a: f64, t: u32, phase: &[f64], queries: u64) -> Result<Self> {
        let m = 1usize << t;
        if phase.len() != m {
            return Err(Error::Contract(format!("phase law has {} entries, expected {m}", phase.len())));
        }
        let half = m / 2;
        let support = (0..=half).map(|j| ae_estimate(j as u64, t)).collect();
        let probs = (0..=half).map(|j| if j == 0 || j == half { phase[j] } else { phase[j] + phase[m - j] }).collect();
        let d = OutputDistribution::new(support, probs)?;
        Ok(Self::from_distribution(a, queries, Some(t), d))
    }

    fn from_distribution(a: f64, queries: u64, bits: Option<u32>, d: OutputDistribution) -> Self {
        let mut acc = 0.0;
        let cdf = d.probs.iter().map(|p| {
            acc += p;
            acc
        });
        let mut cdf: Vec<f64> = cdf.collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        AeLaw { a, queries, bits, support: d.support, cdf }
    }

    /// Smallest outcome whose cumulative mass reaches `u`.
    pub fn quantile(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < u);
        self.support[i.min(self.support.len() - 1)]
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        self.quantile(rng.random())
    }

    pub fn distribution(&self) -> OutputDistribution {
        let mut prev = 0.0;
        let probs = self
            .cdf
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect();
        OutputDistribution { support: self.support.clone(), probs }
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
