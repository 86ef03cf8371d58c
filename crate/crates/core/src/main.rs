use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vortex_tunneling::cli::output;
use vortex_tunneling::cli::{
    calibrate, load_config, resolve_uv_coeff, run_checks, run_single, run_sweep, RunConfig,
};
use vortex_tunneling::Error;

#[derive(Parser)]
#[command(name = "vortex", version, about = "Induced vortex tunneling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; defaults reproduce the reference setup.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.directory`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Mass override: the run mass, the calibration mass, or a one-point sweep.
    #[arg(long, global = true)]
    m0: Option<f64>,
    /// Worker threads for sweeps. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write matplotlib scripts for the figures.
    #[arg(long, global = true)]
    emit_plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Single run at M0 for every configured k_y.
    Run,
    /// M0 sweep with exponential fit.
    Sweep,
    /// Derive the UV coefficient at the calibration mass.
    Calibrate,
    /// Validate the config and run the quick invariant suite.
    Check,
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        config.output.directory = dir.clone();
    }
    if cli.emit_plots {
        config.output.emit_plot_scripts = true;
    }
    if let Some(m0) = cli.m0 {
        match cli.command {
            Command::Sweep => config.sweep = vec![m0],
            Command::Calibrate => config.calibration_mass = m0,
            Command::Run | Command::Check => config.pulse.m0 = m0,
        }
    }
    config.validate()?;
    Ok(config)
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let config = load(cli)?;
    let dir = config.output.directory.clone();
    match cli.command {
        Command::Run => {
            let (uv, _) = resolve_uv_coeff(&config)?;
            println!("M0,m_y,Q,N_final,N_peak,dt_used,wronskian_drift");
            for &m_y in &config.grid.m_y {
                let run = run_single(&config, config.pulse.m0, m_y, uv)?;
                println!(
                    "{:e},{},{:e},{:e},{:e},{:e},{:e}",
                    run.m0, m_y, run.q, run.n_final, run.n_peak, run.dt_used, run.wronskian_drift
                );
                report_written(&output::write_run(&dir, &run)?);
            }
        }
        Command::Sweep => {
            let (uv, cal) = resolve_uv_coeff(&config)?;
            if let Some(cal) = &cal {
                report_written(&output::write_calibration(&dir, cal)?);
            }
            match run_sweep(&config, uv, cli.threads) {
                Ok(sweeps) => {
                    report_written(&output::write_sweep(&dir, &sweeps)?);
                    for s in &sweeps {
                        print!("{}", output::sweep_csv(&s.result));
                        match (&s.result.fit, &s.fit_error) {
                            (Some(fit), _) => print!("{}", output::fit_csv(fit)),
                            (None, Some(e)) => eprintln!("no fit for m_y = {}: {e}", s.result.m_y),
                            (None, None) => {}
                        }
                    }
                }
                Err(failure) => {
                    report_written(&output::write_partial(&dir, &failure.completed)?);
                    eprintln!("{failure}");
                    return Err(failure.error);
                }
            }
        }
        Command::Calibrate => {
            let cal = calibrate(&config, config.grid.m_y[0])?;
            print!("{}", output::calibration_csv(&cal));
            report_written(&output::write_calibration(&dir, &cal)?);
        }
        Command::Check => {
            let report = run_checks(&config)?;
            for item in &report.items {
                let status = if item.passed { "ok  " } else { "FAIL" };
                println!("{status} {:<18} {}", item.name, item.detail);
            }
            if !report.passed() {
                return Err(Error::Domain("invariant check failed".into()));
            }
        }
    }
    if config.output.emit_plot_scripts && !matches!(cli.command, Command::Check) {
        report_written(&output::write_plot_scripts(&dir)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
