use std::path::{Path, PathBuf};

use crate::{Error, Result};

/// One experiment: a problem family, an information setting and a ladder
/// of budgets, parsed from a flat `key = value` file.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// `mean`, `integrate`, `singular`, `poisson-disk` or `poisson-ball`.
    pub problem: String,
    /// `q`, `ran`, `det`, `exact` or `statevector`.
    pub setting: String,
    /// `point`, `circle` or `domain` for the Poisson problems.
    pub manifold: String,
    /// `hard`, `manufactured`, `one` or `zero` for the Poisson problems;
    /// `one` or `sin` for `singular`. `default` picks `hard` and `sin`.
    pub rhs: String,
    pub r: usize,
    pub d: usize,
    pub d1: usize,
    pub s: u32,
    pub sigma: f64,
    pub budgets: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    /// Failure probability of the reported error quantile.
    pub theta: f64,
    /// Allowed distance of the fitted slope from the predicted one.
    pub tolerance: f64,
    /// Sequence length for `mean`.
    pub length: usize,
    /// Record wall time; off by default so that output is reproducible.
    pub wall_time: bool,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: "mean".into(),
            setting: "q".into(),
            manifold: "circle".into(),
            rhs: "default".into(),
            r: 1,
            d: 2,
            d1: 1,
            s: 2,
            sigma: -1.0,
            budgets: vec![16, 32, 64, 128, 256, 512],
            trials: 200,
            seed: 1,
            theta: 0.25,
            tolerance: 0.15,
            length: 1024,
            wall_time: false,
            out: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn parse_budget(v: &str) -> Result<u64> {
    match v.split_once('^') {
        Some((b, e)) => {
            let b: u64 = parse_num("budgets", b.trim())?;
            let e: u32 = parse_num("budgets", e.trim())?;
            b.checked_pow(e).ok_or_else(|| Error::Config(format!("budgets: {v} overflows")))
        }
        None => parse_num("budgets", v),
    }
}

/// `64, 128, 256` or a doubling ladder `2^6..2^12`.
fn parse_budgets(v: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = v.split_once("..") {
        let (mut n, hi) = (parse_budget(a.trim())?, parse_budget(b.trim())?);
        let mut out = Vec::new();
        while n <= hi && n > 0 {
            out.push(n);
            n *= 2;
        }
        return Ok(out);
    }
    v.split(',').map(|t| parse_budget(t.trim())).collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let (key, v) = (key.trim(), value.trim());
            match key {
                "problem" => c.problem = v.into(),
                "setting" => c.setting = v.into(),
                "manifold" => c.manifold = v.into(),
                "rhs" => c.rhs = v.into(),
                "r" => c.r = parse_num(key, v)?,
                "d" => c.d = parse_num(key, v)?,
                "d1" => c.d1 = parse_num(key, v)?,
                "s" => c.s = parse_num(key, v)?,
                "sigma" => c.sigma = parse_num(key, v)?,
                "budgets" => c.budgets = parse_budgets(v)?,
                "trials" => c.trials = parse_num(key, v)?,
                "seed" => c.seed = parse_num(key, v)?,
                "theta" => c.theta = parse_num(key, v)?,
                "tolerance" => c.tolerance = parse_num(key, v)?,
                "length" => c.length = parse_num(key, v)?,
                "wall_time" => c.wall_time = parse_num(key, v)?,
                "out" => c.out = Some(PathBuf::from(v)),
                _ => return Err(Error::Config(format!("line {}: unknown key '{key}'", i + 1))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn is_pde(&self) -> bool {
        self.problem.starts_with("poisson-")
    }

    /// Whether repeated trials can differ.
    pub fn is_stochastic(&self) -> bool {
        !matches!(self.setting.as_str(), "det" | "exact")
    }

    pub fn validate(&self) -> Result<()> {
        if self.budgets.is_empty() {
            return Err(Error::Config("budgets: at least one budget is needed".into()));
        }
        if self.budgets.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("budgets must be strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        if self.is_stochastic() && self.trials < 50 {
            return Err(Error::Config(format!("{} trials are too few for a quantile estimate; use at least 50", self.trials)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Config("theta must lie in (0, 1)".into()));
        }
        Ok(())
    }
}
