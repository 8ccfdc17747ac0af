use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsolve::bench::{emit_plot, fit_rate, predicted_exponent, run_experiment, to_csv_string, write_csv, ExperimentConfig};
use qsolve::Error;

#[derive(Parser)]
#[command(name = "qsolve", version, about = "Query/error experiments for quantum and classical solvers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment file in `key = value` format.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Setting: q, ran, det, exact or statevector.
    #[arg(long)]
    backend: Option<String>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Single budget, overrides the ladder.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mean of a random sequence in [-1, 1].
    Mean(Common),
    /// Weighted integral with weight |y|^{-1/2} on the unit cube.
    Integrate(Common),
    /// Operator with kernel |x - y|^sigma.
    Singular(Common),
    /// Poisson problem on the disk or ball.
    Pde {
        #[command(flatten)]
        common: Common,
        /// poisson-disk or poisson-ball.
        #[arg(long, default_value = "poisson-disk")]
        problem: String,
        /// point, circle or domain.
        #[arg(long)]
        manifold: Option<String>,
    },
    /// Full experiment from a config file, with a rate fit.
    Bench(Common),
    /// SVG chart from CSV files.
    Plot {
        csv: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(c: &Common, problem: Option<&str>) -> qsolve::Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = problem {
        cfg.problem = p.into();
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(b) = &c.backend {
        cfg.setting = b.clone();
    }
    if let Some(n) = c.n {
        cfg.budgets = vec![n];
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(cfg: &ExperimentConfig, fit: bool) -> qsolve::Result<()> {
    let records = run_experiment(cfg)?;
    match &cfg.out {
        Some(p) => write_csv(p, &records)?,
        None => print!("{}", to_csv_string(&records)?),
    }
    if fit && records.len() >= 4 {
        let e = predicted_exponent(cfg)?;
        let f = fit_rate(&records, e, cfg.tolerance)?;
        eprintln!(
            "slope {:.3} +- {:.3}, predicted {:.3} +- {:.2}: {}",
            f.slope,
            f.stderr,
            -e,
            cfg.tolerance,
            if f.verdict { "pass" } else { "fail" }
        );
    }
    Ok(())
}

fn run(cli: Cli) -> qsolve::Result<()> {
    match cli.cmd {
        Cmd::Mean(c) => emit(&load(&c, Some("mean"))?, false),
        Cmd::Integrate(c) => emit(&load(&c, Some("integrate"))?, false),
        Cmd::Singular(c) => emit(&load(&c, Some("singular"))?, false),
        Cmd::Pde { common, problem, manifold } => {
            let mut cfg = load(&common, Some(&problem))?;
            if let Some(m) = manifold {
                cfg.manifold = m;
            }
            emit(&cfg, false)
        }
        Cmd::Bench(c) => {
            if c.config.is_none() {
                return Err(Error::Config("bench needs --config".into()));
            }
            emit(&load(&c, None)?, true)
        }
        Cmd::Plot { csv, out } => {
            let paths: Vec<&Path> = csv.iter().map(|p| p.as_path()).collect();
            emit_plot(&paths, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qsolve: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
