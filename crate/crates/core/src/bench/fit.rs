use super::{ExperimentConfig, ExperimentRecord};
use crate::{Error, Result};

/// Least-squares fit of `log2 err` against `log2 n_queries`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residuals.
    pub stderr: f64,
    /// Predicted decay exponent; the slope should be close to `-exponent`.
    pub exponent: f64,
    pub tolerance: f64,
    pub verdict: bool,
    /// Records dropped because their error was not positive.
    pub excluded: usize,
}

pub fn fit_rate(records: &[ExperimentRecord], exponent: f64, tolerance: f64) -> Result<RateFit> {
    if records.len() < 4 {
        return Err(Error::Input(format!("rate fit needs at least 4 records, got {}", records.len())));
    }
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.err_q75 > 0.0 && r.err_q75.is_finite() && r.n_queries > 0)
        .map(|r| ((r.n_queries as f64).log2(), r.err_q75.log2()))
        .collect();
    let excluded = records.len() - pts.len();
    if excluded > 0 {
        eprintln!("warning: {excluded} record(s) with non-positive error excluded from the rate fit");
    }
    if pts.len() < 2 {
        return Err(Error::Input("rate fit: fewer than 2 usable records".into()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Input("rate fit: all query counts are equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if pts.len() > 2 {
        let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        (rss / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(RateFit { slope, intercept, stderr, exponent, tolerance, verdict: (slope + exponent).abs() <= tolerance, excluded })
}

/// Predicted decay exponent of the error in the number of queries.
pub fn predicted_exponent(cfg: &ExperimentConfig) -> Result<f64> {
    let (r, d, d1, s) = (cfg.r as f64, cfg.d as f64, cfg.d1 as f64, cfg.s as f64);
    let quantum = matches!(cfg.setting.as_str(), "q" | "exact" | "statevector");
    let stoch = if quantum { 1.0 } else { 0.5 };
    let e = match cfg.problem.as_str() {
        "mean" | "integrate" => {
            if cfg.setting == "det" {
                return Err(Error::Unsupported(format!("{}: no deterministic setting", cfg.problem)));
            }
            stoch
        }
        "singular" => {
            if cfg.setting == "det" {
                return Err(Error::Unsupported("singular: no deterministic setting".into()));
            }
            if cfg.d1 == 0 {
                stoch
            } else {
                (s / d1).min((d + cfg.sigma) / d1).min(stoch)
            }
        }
        "poisson-disk" | "poisson-ball" => {
            // Second-order operator: the kernel gains two orders.
            let geom = if cfg.d1 == 0 { f64::INFINITY } else { (r + 2.0) / d1 };
            match cfg.setting.as_str() {
                "det" => r / d,
                _ => geom.min(r / d + stoch),
            }
        }
        p => return Err(Error::Unsupported(format!("unknown problem '{p}'"))),
    };
    Ok(e)
}
