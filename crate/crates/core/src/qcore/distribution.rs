use std::fmt::Write as _;

use rand::Rng as _;

use crate::rng::Rng;
use crate::{Error, Result};

/// A finite output law.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputDistribution {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

impl OutputDistribution {
    /// Builds a law, clamping tiny negative masses and checking the total.
    pub fn new(support: Vec<f64>, mut probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() || support.is_empty() {
            return Err(Error::Contract("support and probabilities must be nonempty and equal length".into()));
        }
        for p in probs.iter_mut() {
            if *p < -1e-15 {
                return Err(Error::Contract(format!("negative probability {p}")));
            }
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!("probabilities sum to {total}")));
        }
        Ok(OutputDistribution { support, probs })
    }

    pub fn point(v: f64) -> Self {
        OutputDistribution { support: vec![v], probs: vec![1.0] }
    }

    /// Merges equal support points and sorts by value.
    pub fn normalized(&self) -> Self {
        let mut pairs: Vec<(f64, f64)> = self.support.iter().copied().zip(self.probs.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        for (v, p) in pairs {
            if let Some(last) = support.last() {
                if *last == v {
                    *probs.last_mut().unwrap() += p;
                    continue;
                }
            }
            support.push(v);
            probs.push(p);
        }
        OutputDistribution { support, probs }
    }

    /// Total variation distance, matching support points exactly.
    pub fn total_variation(&self, other: &Self) -> f64 {
        let a = self.normalized();
        let b = other.normalized();
        let (mut i, mut j, mut s) = (0, 0, 0.0);
        while i < a.support.len() || j < b.support.len() {
            let va = a.support.get(i).copied().unwrap_or(f64::INFINITY);
            let vb = b.support.get(j).copied().unwrap_or(f64::INFINITY);
            if va == vb {
                s += (a.probs[i] - b.probs[j]).abs();
                i += 1;
                j += 1;
            } else if va < vb {
                s += a.probs[i];
                i += 1;
            } else {
                s += b.probs[j];
                j += 1;
            }
        }
        0.5 * s
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probs).map(|(v, p)| v * p).sum()
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        let u: f64 = rng.random();
        let mut c = 0.0;
        for (v, p) in self.support.iter().zip(&self.probs) {
            c += p;
            if u < c {
                return *v;
            }
        }
        *self.support.last().unwrap()
    }

    /// Pushforward under `map`.
    pub fn map(&self, map: impl Fn(f64) -> f64) -> Self {
        OutputDistribution { support: self.support.iter().map(|&v| map(v)).collect(), probs: self.probs.clone() }.normalized()
    }

    /// Debug dump with columns `outcome,probability`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("outcome,probability\n");
        for (v, p) in self.support.iter().zip(&self.probs) {
            let _ = writeln!(s, "{v:e},{p:e}");
        }
        s
    }
}

/// Empirical error at failure probability `theta` over a set of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub theta: f64,
    pub eps: f64,
    pub n_trials: usize,
}

impl ErrorReport {
    /// Smallest level `eps` among the observed errors such that the
    /// fraction of trials with error strictly above it is at most `theta`.
    pub fn from_errors(errors: &[f64], theta: f64) -> Result<Self> {
        if errors.is_empty() || !(0.0..1.0).contains(&theta) {
            return Err(Error::Input("need at least one trial and theta in [0,1)".into()));
        }
        let mut e = errors.to_vec();
        e.sort_by(f64::total_cmp);
        let n = e.len();
        let k = ((1.0 - theta) * n as f64 - 1e-9).ceil().max(1.0) as usize;
        Ok(ErrorReport { theta, eps: e[k - 1], n_trials: n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_mass() {
        assert!(OutputDistribution::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(OutputDistribution::new(vec![0.0, 1.0], vec![1.0 + 1e-16, -1e-16]).is_ok());
    }

    #[test]
    fn total_variation_of_disjoint_laws_is_one() {
        let a = OutputDistribution::point(0.0);
        let b = OutputDistribution::point(1.0);
        assert_eq!(a.total_variation(&b), 1.0);
        assert_eq!(a.total_variation(&a), 0.0);
    }

    #[test]
    fn error_report_is_order_statistic() {
        let errs: Vec<f64> = (1..=8).map(|v| v as f64).collect();
        let r = ErrorReport::from_errors(&errs, 0.25).unwrap();
        assert_eq!(r.eps, 6.0);
        let above = errs.iter().filter(|&&e| e > r.eps).count();
        assert!(above as f64 <= 0.25 * 8.0);
        let below = errs.iter().filter(|&&e| e > 5.0).count();
        assert!(below as f64 > 0.25 * 8.0);
    }

    #[test]
    fn csv_dump_has_header() {
        let s = OutputDistribution::point(0.5).to_csv();
        assert!(s.starts_with("outcome,probability\n"));
    }
}
