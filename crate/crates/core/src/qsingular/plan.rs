use std::fmt::Write as _;

use crate::{Error, Result};

const TIE: f64 = 1e-12;

/// How the smoothness compares with the dimension `d1` of the output cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `d1 = 0`: a single weighted integral.
    Point,
    Deep,
    Critical,
    Shallow,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Point => "point",
            Regime::Deep => "deep",
            Regime::Critical => "critical",
            Regime::Shallow => "shallow",
        }
    }
}

/// Budget and repeat count shared by all leaves of one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelBudget {
    pub l: usize,
    pub budget: u64,
    pub repeats: usize,
}

/// Level count, budgets and repeat counts of the multilevel estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilevelPlan {
    pub n: u64,
    pub s: u32,
    pub sigma: f64,
    pub d: usize,
    pub d1: usize,
    pub q: usize,
    /// Leaf error exponent in the budget: 1 for amplitude estimation,
    /// 1/2 for Monte Carlo.
    pub leaf_rate: f64,
    pub regime: Regime,
    pub tau: f64,
    pub m: usize,
    pub n0: u64,
    pub nu0: usize,
    pub levels: Vec<LevelBudget>,
}

/// `min(s, d + sigma, d)`.
pub fn effective_smoothness(s: u32, sigma: f64, d: usize) -> f64 {
    (s as f64).min(d as f64 + sigma).min(d as f64)
}

fn check(n: u64, s: u32, sigma: f64, d: usize, d1: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Input(format!("budget {n} must be at least 2")));
    }
    if s == 0 {
        return Err(Error::Input("smoothness order must be at least 1".into()));
    }
    if !(sigma > -(d as f64)) {
        return Err(Error::Input(format!("singularity exponent {sigma} must exceed -{d}")));
    }
    if d1 > d || d == 0 {
        return Err(Error::Input(format!("need 0 <= d1 <= d and d >= 1, got d1={d1}, d={d}")));
    }
    Ok(())
}

/// Budgets for amplitude-estimation leaves.
pub fn select_budgets(n: u64, s: u32, sigma: f64, d: usize, d1: usize) -> Result<MultilevelPlan> {
    select_budgets_for_rate(n, s, sigma, d, d1, 1.0, true)
}

/// Budgets for leaves whose error decays like `budget^-leaf_rate`; the
/// regime thresholds compare `min(s, d+sigma, d) / leaf_rate` with `d1`.
/// Without `boosted`, every repeat count is 1.
pub fn select_budgets_for_rate(
    n: u64,
    s: u32,
    sigma: f64,
    d: usize,
    d1: usize,
    leaf_rate: f64,
    boosted: bool,
) -> Result<MultilevelPlan> {
    check(n, s, sigma, d, d1)?;
    if !(leaf_rate > 0.0 && leaf_rate <= 1.0) {
        return Err(Error::Input(format!("leaf rate {leaf_rate} outside (0, 1]")));
    }
    let q = (s as usize).saturating_sub(1).max(1);
    let mut plan = MultilevelPlan {
        n,
        s,
        sigma,
        d,
        d1,
        q,
        leaf_rate,
        regime: Regime::Point,
        tau: 0.0,
        m: 0,
        n0: n,
        nu0: 1,
        levels: Vec::new(),
    };
    if d1 == 0 {
        return Ok(plan);
    }
    let log_n = (n as f64).log2();
    let g = effective_smoothness(s, sigma, d) / leaf_rate;
    let gs = (s as f64).min(d as f64 + sigma) / leaf_rate;
    let dd = d1 as f64;
    let budgets: Vec<u64>;
    if g > dd + TIE {
        plan.regime = Regime::Deep;
        plan.tau = (g - dd) / 2.0;
        plan.m = (log_n / (dd + plan.tau)).ceil().max(1.0) as usize;
        budgets = (0..plan.m).map(|l| (n as f64 * (-(dd + plan.tau) * l as f64).exp2()).ceil() as u64).collect();
    } else if (g - dd).abs() <= TIE {
        plan.regime = Regime::Critical;
        plan.m = (log_n / dd).ceil().max(1.0) as usize;
        let m = plan.m as f64;
        budgets = (0..plan.m).map(|l| (n as f64 / m * (-dd * l as f64).exp2()).ceil() as u64).collect();
    } else {
        plan.regime = Regime::Shallow;
        plan.tau = (dd - gs) / 2.0;
        plan.m = (log_n / dd).ceil().max(1.0) as usize;
        let m = plan.m as f64;
        budgets = (0..plan.m)
            .map(|l| {
                let l = l as f64;
                (n as f64 * (-dd * l - plan.tau * (m - l)).exp2()).ceil() as u64
            })
            .collect();
    }
    let gamma0 = ((q + 1) as f64).powi(d1 as i32);
    let hat = ((2 * q + 1) as f64).powi(d1 as i32);
    if boosted {
        // smallest nu with |Gamma_0| e^{-nu/8} <= 1/8
        plan.nu0 = (8.0 * (8.0 * gamma0).ln()).ceil().max(1.0) as usize;
    }
    plan.levels = budgets
        .into_iter()
        .enumerate()
        .map(|(l, budget)| {
            let repeats = if boosted {
                // smallest nu with 2 n_l |Gamma^_li| e^{-nu/8} <= 2^{-(l+4)}
                let cells = (d1 * l) as f64;
                let lhs = (1.0 + cells + l as f64 + 4.0) * std::f64::consts::LN_2 + hat.ln();
                (8.0 * lhs).ceil() as usize
            } else {
                1
            };
            LevelBudget { l, budget, repeats }
        })
        .collect();
    Ok(plan)
}

impl MultilevelPlan {
    pub fn cells(&self, l: usize) -> u64 {
        1u64 << (self.d1 * l)
    }

    pub fn base_points(&self) -> usize {
        (self.q + 1).pow(self.d1 as u32)
    }

    pub fn local_points(&self) -> usize {
        (2 * self.q + 1).pow(self.d1 as u32)
    }

    /// Query bound `nu0 N0 |Gamma_0| + 2 sum_l nu_l N_l n_l |Gamma^_li|`.
    pub fn planned_queries(&self) -> u64 {
        let base = self.nu0 as u64 * self.n0 * self.base_points() as u64;
        let levels: u64 = self
            .levels
            .iter()
            .map(|lv| 2 * lv.repeats as u64 * lv.budget * self.cells(lv.l) * self.local_points() as u64)
            .sum();
        base + levels
    }

    /// `N0 + sum_l (l+1) 2^{d1 l} N_l`, the order of the query count.
    pub fn query_scale(&self) -> f64 {
        self.n0 as f64
            + self.levels.iter().map(|lv| (lv.l + 1) as f64 * self.cells(lv.l) as f64 * lv.budget as f64).sum::<f64>()
    }

    /// Predicted error exponent `min(s/d1, (d+sigma)/d1, 1) * leaf_rate`.
    pub fn predicted_exponent(&self) -> f64 {
        if self.d1 == 0 {
            return self.leaf_rate;
        }
        let g = (self.s as f64).min(self.d as f64 + self.sigma) / self.d1 as f64;
        (g * self.leaf_rate).min(self.leaf_rate)
    }

    /// Plan as CSV: `key=value` comment lines, then one row per level.
    pub fn to_csv(&self) -> String {
        let ex = RateExponents::new(self.s, self.sigma, self.d, self.d1);
        let mut out = String::new();
        let _ = writeln!(out, "# regime={} tau={} m={} q={} leaf_rate={}", self.regime.name(), self.tau, self.m, self.q, self.leaf_rate);
        let _ = writeln!(out, "# predicted_exponent={} beta={} planned_queries={}", self.predicted_exponent(), ex.beta, self.planned_queries());
        out.push_str("level,cells,budget,repeats\n");
        let _ = writeln!(out, "base,1,{},{}", self.n0, self.nu0);
        for lv in &self.levels {
            let _ = writeln!(out, "{},{},{},{}", lv.l, self.cells(lv.l), lv.budget, lv.repeats);
        }
        out
    }
}

/// Exponents of the logarithmic factors in the error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateExponents {
    pub s: u32,
    pub sigma: f64,
    pub d: usize,
    pub d1: usize,
    /// Log power of the multilevel estimator.
    pub beta: f64,
    /// 1 when `s = d + sigma`, else 0.
    pub alpha0: f64,
    /// 4 when `d1 = d`, else 0.
    pub alpha1: f64,
}

impl RateExponents {
    pub fn new(s: u32, sigma: f64, d: usize, d1: usize) -> Self {
        let (sf, dd, d1f) = (s as f64, d as f64, d1 as f64);
        let g = effective_smoothness(s, sigma, d);
        let gs = sf.min(dd + sigma);
        let alpha0 = if (sf - (dd + sigma)).abs() <= TIE { 1.0 } else { 0.0 };
        let beta = if d1 == 0 || g > d1f + TIE {
            0.0
        } else if (g - d1f).abs() <= TIE {
            4.0
        } else {
            gs / d1f + alpha0
        };
        RateExponents { s, sigma, d, d1, beta, alpha0, alpha1: if d1 == d { 4.0 } else { 0.0 } }
    }

    /// Log power of the smooth-input estimator for `C^r` inputs.
    pub fn kappa(&self, r: u32, eps0: f64) -> f64 {
        let (dd, d1f, rf) = (self.d as f64, self.d1 as f64, r as f64);
        let ds = dd + self.sigma;
        if self.d1 > 0 && ds < d1f - TIE && self.d1 < self.d {
            let lhs = (rf + ds) / d1f;
            let rhs = rf / dd + 1.0;
            if lhs < rhs - TIE {
                4.0
            } else if (lhs - rhs).abs() <= TIE {
                rf / dd + 6.0 + eps0
            } else {
                4.0 + eps0
            }
        } else if ds.min(dd) > d1f + TIE {
            0.0
        } else if (ds.min(dd) - d1f).abs() <= TIE {
            4.0
        } else {
            ds / d1f
        }
    }

    /// Error exponent `min((r+d+sigma)/d1, r/d + 1)`.
    pub fn smooth_exponent(&self, r: u32) -> f64 {
        let rf = r as f64;
        let cap = rf / self.d as f64 + 1.0;
        if self.d1 == 0 {
            cap
        } else {
            ((rf + self.d as f64 + self.sigma) / self.d1 as f64).min(cap)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deep_example() {
        let p = select_budgets(1024, 3, 0.0, 2, 1).unwrap();
        assert_eq!(p.regime, Regime::Deep);
        assert_eq!(p.tau, 0.5);
        assert_eq!(p.m, 7);
        assert_eq!(p.n0, 1024);
        for lv in &p.levels {
            assert_eq!(lv.budget, (1024.0 * (-1.5 * lv.l as f64).exp2()).ceil() as u64);
        }
    }

    #[test]
    fn shallow_example() {
        let p = select_budgets(4096, 1, 0.0, 2, 2).unwrap();
        assert_eq!(p.regime, Regime::Shallow);
        assert_eq!(p.tau, 0.5);
        assert_eq!(p.m, 6);
        assert_eq!(p.levels[0].budget, (4096.0 * (-0.5 * 6.0f64).exp2()).ceil() as u64);
    }

    #[test]
    fn point_plan() {
        let p = select_budgets(100, 2, 0.0, 2, 0).unwrap();
        assert_eq!(p.regime, Regime::Point);
        assert!(p.levels.is_empty());
        assert_eq!(p.n0, 100);
    }

    #[test]
    fn repeats_satisfy_union_bound() {
        let p = select_budgets(4096, 2, -1.0, 2, 1).unwrap();
        assert_eq!(p.regime, Regime::Critical);
        let g0 = p.base_points() as f64;
        assert!(g0 * (-(p.nu0 as f64) / 8.0).exp() <= 0.125);
        assert!(g0 * (-((p.nu0 - 1) as f64) / 8.0).exp() > 0.125);
        let mut total = g0 * (-(p.nu0 as f64) / 8.0).exp();
        for lv in &p.levels {
            let lhs = |nu: usize| 2.0 * p.cells(lv.l) as f64 * p.local_points() as f64 * (-(nu as f64) / 8.0).exp();
            let rhs = (-((lv.l + 4) as f64)).exp2();
            assert!(lhs(lv.repeats) <= rhs * (1.0 + 1e-12));
            assert!(lhs(lv.repeats - 1) > rhs);
            assert!(lv.repeats <= 40 * (lv.l + 1));
            total += lhs(lv.repeats);
        }
        assert!(total <= 0.25);
    }

    #[test]
    fn log_powers() {
        assert_eq!(RateExponents::new(2, -1.0, 2, 1).beta, 4.0);
        assert_eq!(RateExponents::new(3, 0.0, 2, 1).beta, 0.0);
        let e = RateExponents::new(1, 0.0, 2, 2);
        assert_eq!(e.beta, 0.5);
        assert_eq!(RateExponents::new(2, 0.0, 2, 2).alpha0, 1.0);
        assert_eq!(RateExponents::new(2, 0.0, 2, 2).beta, 4.0);
        let k = RateExponents::new(2, -1.5, 2, 1);
        assert!((k.smooth_exponent(1) - 1.5).abs() < 1e-15);
        assert!((k.kappa(1, 0.1) - (0.5 + 6.1)).abs() < 1e-12);
    }

    #[test]
    fn query_orders() {
        for n in [256u64, 1024, 4096] {
            let deep = select_budgets(n, 3, 0.0, 2, 1).unwrap();
            assert!(deep.query_scale() <= 16.0 * n as f64);
            let crit = select_budgets(n, 2, -1.0, 2, 1).unwrap();
            assert!(crit.query_scale() <= 4.0 * n as f64 * (n as f64).log2());
        }
    }
}
