//! Command-line front end: configuration, run orchestration, fitting and
//! file output.

pub mod check;
pub mod config;
pub mod fit;
pub mod output;
pub mod run;

pub use check::{run_checks, CheckReport};
pub use config::{load_config, parse_config, RunConfig, UvCoeff};
pub use fit::fit_exponential;
pub use run::{calibrate, resolve_uv_coeff, run_single, run_sweep, simulate, SingleRun, SweepRun};
