mod config;
mod fit;
mod plot;
mod record;
mod run;

pub use config::ExperimentConfig;
pub use fit::{fit_rate, predicted_exponent, RateFit};
pub use plot::{emit_plot, render_svg};
pub use record::{parse_csv, read_csv, to_csv_string, write_csv, ExperimentRecord};
pub use run::{error_quantile, manifold, right_hand_side, run_budget, run_experiment, singular_probes, BudgetRun, CIRCLE_RADIUS};
