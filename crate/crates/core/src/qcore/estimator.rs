use rand::Rng as _;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Beta, Distribution};

use super::ae::{ae_error_bound_k, AeLaw};
use crate::rng::Rng;
use crate::{Error, Result};

/// One sampled output of a randomized estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub value: f64,
    /// Whether the draw met the component's own accuracy guarantee.
    pub ok: bool,
}

/// A randomized scalar estimator with a fixed query cost.
pub trait MeanEstimator: Send + Sync {
    fn draw(&self, rng: &mut Rng) -> Draw;
    fn queries(&self) -> u64;
    /// Inverse CDF of the output, when available in closed form.
    fn quantile(&self, _u: f64) -> Option<f64> {
        None
    }
    fn check(&self, _value: f64) -> bool {
        true
    }
}

/// Deterministic value at no cost.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl MeanEstimator for Constant {
    fn draw(&self, _rng: &mut Rng) -> Draw {
        Draw { value: self.0, ok: true }
    }
    fn queries(&self) -> u64 {
        0
    }
    fn quantile(&self, _u: f64) -> Option<f64> {
        Some(self.0)
    }
}

/// `offset + scale * a~` where `a~` follows an amplitude estimation law.
#[derive(Debug, Clone)]
pub struct AeComponent {
    pub law: AeLaw,
    pub scale: f64,
    pub offset: f64,
    /// Width factor `k` of the accuracy check.
    pub slack: f64,
}

impl AeComponent {
    pub fn new(a: f64, budget: u64, scale: f64, offset: f64) -> Result<Self> {
        Ok(Self::from_law(AeLaw::for_budget(a, budget)?, scale, offset))
    }

    pub fn from_law(law: AeLaw, scale: f64, offset: f64) -> Self {
        AeComponent { law, scale, offset, slack: 1.0 }
    }

    pub fn with_slack(mut self, slack: f64) -> Self {
        self.slack = slack;
        self
    }

    /// Half-width of the accuracy check, if the law has one.
    pub fn tolerance(&self) -> Option<f64> {
        self.law.bits.map(|t| self.scale.abs() * ae_error_bound_k(self.law.a, t, self.slack) + 1e-12)
    }

    /// Exact value being estimated.
    pub fn target(&self) -> f64 {
        self.offset + self.scale * self.law.a
    }
}

impl MeanEstimator for AeComponent {
    fn draw(&self, rng: &mut Rng) -> Draw {
        let value = self.quantile(rng.random()).unwrap();
        Draw { value, ok: self.check(value) }
    }
    fn queries(&self) -> u64 {
        self.law.queries
    }
    fn quantile(&self, u: f64) -> Option<f64> {
        let v = if self.scale >= 0.0 { self.law.quantile(u) } else { self.law.quantile(1.0 - u) };
        Some(self.offset + self.scale * v)
    }
    fn check(&self, value: f64) -> bool {
        match self.tolerance() {
            Some(tol) => (value - self.target()).abs() <= tol,
            None => true,
        }
    }
}

/// Median of `repeats` independent runs (lower median for even counts).
pub struct Boosted<E> {
    pub inner: E,
    pub repeats: usize,
}

impl<E: MeanEstimator> Boosted<E> {
    pub fn new(inner: E, repeats: usize) -> Result<Self> {
        if repeats == 0 {
            return Err(Error::Input("repeat count must be positive".into()));
        }
        Ok(Boosted { inner, repeats })
    }

    fn rank(&self) -> usize {
        self.repeats.div_ceil(2)
    }
}

/// Number of repeats for failure probability at most `delta` after
/// taking the median of runs that each fail with probability at most 1/4.
pub fn repeats_for_failure(delta: f64) -> usize {
    (8.0 * (1.0 / delta).ln()).ceil().max(1.0) as usize
}

/// Exact probability that the median of `repeats` runs, each failing
/// independently with probability `p`, lies outside the success interval:
/// this needs at least `ceil(repeats/2)` failed runs.
pub fn median_failure(repeats: usize, p: f64) -> f64 {
    let k = repeats.div_ceil(2);
    (k..=repeats)
        .map(|j| {
            let c: f64 = (0..j).fold(1.0, |acc, i| acc * (repeats - i) as f64 / (i + 1) as f64);
            c * p.powi(j as i32) * (1.0 - p).powi((repeats - j) as i32)
        })
        .sum()
}

/// Failure probability of one amplitude estimation run.
pub const AE_FAILURE: f64 = 1.0 - 8.0 / (std::f64::consts::PI * std::f64::consts::PI);

/// Smallest odd repeat count such that `parts` boosted components fail
/// together with probability at most 1/4 (union bound).
pub fn repeats_for_parts(parts: usize, p: f64) -> usize {
    let mut nu = 1;
    while parts as f64 * median_failure(nu, p) > 0.25 {
        nu += 2;
    }
    nu
}

impl<E: MeanEstimator> MeanEstimator for Boosted<E> {
    fn draw(&self, rng: &mut Rng) -> Draw {
        let k = self.rank();
        let value = if self.repeats == 1 {
            self.inner.draw(rng).value
        } else if self.inner.quantile(0.5).is_some() {
            // the k-th order statistic of iid draws is F^{-1}(U) with U ~ Beta(k, n-k+1)
            let beta = Beta::new(k as f64, (self.repeats - k + 1) as f64).unwrap();
            let u: f64 = beta.sample(rng);
            self.inner.quantile(u).unwrap()
        } else {
            let mut vals: Vec<f64> = (0..self.repeats).map(|_| self.inner.draw(rng).value).collect();
            vals.sort_by(f64::total_cmp);
            vals[k - 1]
        };
        Draw { value, ok: self.inner.check(value) }
    }
    fn queries(&self) -> u64 {
        self.repeats as u64 * self.inner.queries()
    }
    fn check(&self, value: f64) -> bool {
        self.inner.check(value)
    }
}

/// Constant plus a sum of independent estimators.
pub struct Composite {
    pub offset: f64,
    pub parts: Vec<Box<dyn MeanEstimator>>,
}

pub fn compose_linear(offset: f64, parts: Vec<Box<dyn MeanEstimator>>) -> Composite {
    Composite { offset, parts }
}

impl MeanEstimator for Composite {
    fn draw(&self, rng: &mut Rng) -> Draw {
        let mut value = self.offset;
        let mut ok = true;
        for p in &self.parts {
            let d = p.draw(rng);
            value += d.value;
            ok &= d.ok;
        }
        Draw { value, ok }
    }
    fn queries(&self) -> u64 {
        self.parts.iter().map(|p| p.queries()).sum()
    }
    fn quantile(&self, u: f64) -> Option<f64> {
        match self.parts.len() {
            0 => Some(self.offset),
            1 => self.parts[0].quantile(u).map(|v| v + self.offset),
            _ => None,
        }
    }
}

/// `scale` times the average of `samples` draws from a finite law.
pub struct McEstimator {
    values: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
    pub samples: u64,
    pub scale: f64,
}

impl McEstimator {
    pub fn new(values: Vec<f64>, weights: Vec<f64>, samples: u64, scale: f64) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::Contract("values and weights differ in length".into()));
        }
        let alias = WeightedAliasIndex::new(weights).map_err(|e| Error::Input(format!("bad sampling weights: {e}")))?;
        Ok(McEstimator { values, alias, samples, scale })
    }
}

impl MeanEstimator for McEstimator {
    fn draw(&self, rng: &mut Rng) -> Draw {
        if self.samples == 0 {
            return Draw { value: 0.0, ok: true };
        }
        let s: f64 = (0..self.samples).map(|_| self.values[self.alias.sample(rng)]).sum();
        Draw { value: self.scale * s / self.samples as f64, ok: true }
    }
    fn queries(&self) -> u64 {
        self.samples
    }
}

/// Largest support a [`TabulatedLaw::difference`] may produce.
pub const MAX_TABULATED_SUPPORT: usize = 1 << 22;

/// A finite output law kept as sorted support and cumulative masses.
#[derive(Debug, Clone)]
pub struct TabulatedLaw {
    support: Vec<f64>,
    cdf: Vec<f64>,
    pub queries: u64,
    pub target: f64,
    /// Accepted distance from `target`; `None` accepts everything.
    pub tolerance: Option<f64>,
}

impl TabulatedLaw {
    fn from_pairs(mut pairs: Vec<(f64, f64)>, queries: u64, target: f64, tolerance: Option<f64>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut mass: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, p) in pairs {
            if p <= 0.0 {
                continue;
            }
            match support.last() {
                Some(&last) if last == x => *mass.last_mut().unwrap() += p,
                _ => {
                    support.push(x);
                    mass.push(p);
                }
            }
        }
        if support.is_empty() {
            support.push(target);
            mass.push(1.0);
        }
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = mass
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        *cdf.last_mut().unwrap() = 1.0;
        TabulatedLaw { support, cdf, queries, target, tolerance }
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        let mut prev = 0.0;
        self.support
            .iter()
            .zip(&self.cdf)
            .map(|(&x, &c)| {
                let p = c - prev;
                prev = c;
                (x, p)
            })
            .collect()
    }

    pub fn from_component(c: &AeComponent) -> Self {
        let d = c.law.distribution();
        let pairs = d.support.iter().zip(&d.probs).map(|(&y, &p)| (c.offset + c.scale * y, p)).collect();
        Self::from_pairs(pairs, c.queries(), c.target(), c.tolerance())
    }

    /// Law of `X - Y` for independent `X`, `Y`. The tolerance is the sum
    /// of both, so the check holds whenever both checks hold.
    pub fn difference(x: &TabulatedLaw, y: &TabulatedLaw) -> Result<Self> {
        let (px, py) = (x.pairs(), y.pairs());
        if px.len().saturating_mul(py.len()) > MAX_TABULATED_SUPPORT {
            return Err(Error::Capacity { qubits: px.len() * py.len(), cap: MAX_TABULATED_SUPPORT });
        }
        let mut pairs = Vec::with_capacity(px.len() * py.len());
        for &(a, p) in &px {
            for &(b, q) in &py {
                pairs.push((a - b, p * q));
            }
        }
        let tolerance = match (x.tolerance, y.tolerance) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or(0.0) + b.unwrap_or(0.0)),
        };
        Ok(Self::from_pairs(pairs, x.queries + y.queries, x.target - y.target, tolerance))
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn distribution(&self) -> super::distribution::OutputDistribution {
        let (support, probs) = self.pairs().into_iter().unzip();
        super::distribution::OutputDistribution::new(support, probs).expect("normalized by construction")
    }
}

impl MeanEstimator for TabulatedLaw {
    fn draw(&self, rng: &mut Rng) -> Draw {
        let value = self.quantile(rng.random()).unwrap();
        Draw { value, ok: self.check(value) }
    }
    fn queries(&self) -> u64 {
        self.queries
    }
    fn quantile(&self, u: f64) -> Option<f64> {
        let i = self.cdf.partition_point(|&c| c < u);
        Some(self.support[i.min(self.support.len() - 1)])
    }
    fn check(&self, value: f64) -> bool {
        match self.tolerance {
            Some(tol) => (value - self.target).abs() <= tol,
            None => true,
        }
    }
}

impl MeanEstimator for Box<dyn MeanEstimator> {
    fn draw(&self, rng: &mut Rng) -> Draw {
        (**self).draw(rng)
    }
    fn queries(&self) -> u64 {
        (**self).queries()
    }
    fn quantile(&self, u: f64) -> Option<f64> {
        (**self).quantile(u)
    }
    fn check(&self, value: f64) -> bool {
        (**self).check(value)
    }
}

/// Median of independent runs of an arbitrary estimator.
pub fn boost_median(draws: &mut [f64]) -> f64 {
    draws.sort_by(f64::total_cmp);
    draws[(draws.len() - 1) / 2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;

    /// Generic median path, used to cross-check the order-statistic shortcut.
    struct NoQuantile(AeComponent);

    impl MeanEstimator for NoQuantile {
        fn draw(&self, rng: &mut Rng) -> Draw {
            self.0.draw(rng)
        }
        fn queries(&self) -> u64 {
            self.0.queries()
        }
    }

    #[test]
    fn fast_median_matches_direct_median_in_law() {
        let comp = AeComponent::new(0.31, 30, 1.0, 0.0).unwrap();
        let fast = Boosted::new(comp.clone(), 5).unwrap();
        let slow = Boosted::new(NoQuantile(comp), 5).unwrap();
        let mut rng = derive_rng(7, 1);
        let n = 40_000;
        let mut a: Vec<f64> = (0..n).map(|_| fast.draw(&mut rng).value).collect();
        let mut b: Vec<f64> = (0..n).map(|_| slow.draw(&mut rng).value).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        // Kolmogorov distance on the merged sample points
        let mut worst: f64 = 0.0;
        for &x in a.iter().chain(&b).step_by(97) {
            let fa = a.partition_point(|&v| v <= x) as f64 / n as f64;
            let fb = b.partition_point(|&v| v <= x) as f64 / n as f64;
            worst = worst.max((fa - fb).abs());
        }
        assert!(worst < 0.02, "ks={worst}");
        assert_eq!(fast.queries(), 5 * 30);
    }

    #[test]
    fn negative_scale_reverses() {
        let c = AeComponent::new(0.2, 62, -2.0, 1.0).unwrap();
        assert!(c.quantile(0.01).unwrap() <= c.quantile(0.99).unwrap());
        assert!((c.target() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn mc_estimator_is_unbiased() {
        let mc = McEstimator::new(vec![0.0, 1.0], vec![3.0, 1.0], 400, 2.0).unwrap();
        let mut rng = derive_rng(1, 2);
        let m: f64 = (0..500).map(|_| mc.draw(&mut rng).value).sum::<f64>() / 500.0;
        assert!((m - 0.5).abs() < 0.01);
    }

    #[test]
    fn exact_tails() {
        assert_eq!(repeats_for_parts(1, AE_FAILURE), 1);
        assert_eq!(repeats_for_parts(2, AE_FAILURE), 3);
        assert!((median_failure(3, 0.5) - 0.5).abs() < 1e-15);
        assert!((median_failure(1, 0.2) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn difference_law_is_a_convolution() {
        let x = TabulatedLaw::from_component(&AeComponent::new(0.3, 30, 1.0, 0.0).unwrap());
        let y = TabulatedLaw::from_component(&AeComponent::new(0.1, 14, 1.0, 0.0).unwrap());
        let z = TabulatedLaw::difference(&x, &y).unwrap();
        let (dx, dy, dz) = (x.distribution(), y.distribution(), z.distribution());
        assert!((dz.mean() - (dx.mean() - dy.mean())).abs() < 1e-12);
        assert!((z.target - 0.2).abs() < 1e-15);
        assert_eq!(z.queries, 44);
        assert!((z.tolerance.unwrap() - x.tolerance.unwrap() - y.tolerance.unwrap()).abs() < 1e-15);
    }

    #[test]
    fn repeat_count() {
        assert_eq!(repeats_for_failure((-1.0f64).exp()), 8);
        assert!(Boosted::new(Constant(1.0), 0).is_err());
    }
}
