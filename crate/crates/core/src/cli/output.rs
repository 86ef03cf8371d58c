//! CSV and plot-script emission.
//!
//! Numbers use Rust's shortest round-trip formatting (`{:e}`), which is
//! locale-independent; lines end in `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::run::{Calibration, SingleRun, SweepRun};
use crate::error::{Error, Result};
use crate::observables::{ExpFit, SweepResult, TimeSeriesRecord};

pub const TIMESERIES_HEADER: &str = "t,E_tilde,q_reg,N_total";
pub const SWEEP_HEADER: &str = "M0,Q,N_final,dt_used,wronskian_drift";
pub const FIT_HEADER: &str = "amplitude,rate,residual";
pub const MODES_HEADER: &str = "t,k_x,abs_f_sq,n_k";
pub const CALIBRATION_HEADER: &str = "M_cal,Q_raw,uv_coeff,dt_used,wronskian_drift";

pub fn timeseries_name(m0: f64, m_y: i64) -> String {
    format!("timeseries_M{m0}_ky{m_y}.csv")
}

pub fn modes_name(m0: f64, m_y: i64) -> String {
    format!("modes_M{m0}_ky{m_y}.csv")
}

/// `stem.csv` for a single k_y, `stem_ky{m}.csv` otherwise.
fn summary_name(stem: &str, m_y: i64, multi: bool) -> String {
    if multi {
        format!("{stem}_ky{m_y}.csv")
    } else {
        format!("{stem}.csv")
    }
}

pub fn timeseries_csv(records: &[TimeSeriesRecord]) -> String {
    let mut s = String::with_capacity(80 * (records.len() + 1));
    s.push_str(TIMESERIES_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{:e},{:e},{:e},{:e}", r.t, r.e_tilde, r.q_reg, r.n_total);
    }
    s
}

/// Long format, one row per (t, mode); `None` when no per-mode data was kept.
pub fn modes_csv(records: &[TimeSeriesRecord]) -> Option<String> {
    let mut s = String::new();
    s.push_str(MODES_HEADER);
    s.push('\n');
    for r in records {
        for m in r.per_mode.as_ref()? {
            let _ = writeln!(s, "{:e},{:e},{:e},{:e}", r.t, m.k_x, m.abs_f_sq, m.n_k);
        }
    }
    Some(s)
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut s = String::new();
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for e in &result.entries {
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e}",
            e.m0, e.q, e.n_final, e.dt_used, e.wronskian_max_drift
        );
    }
    s
}

pub fn fit_csv(fit: &ExpFit) -> String {
    format!("{FIT_HEADER}\n{:e},{:e},{:e}\n", fit.amplitude, fit.rate, fit.residual)
}

pub fn calibration_csv(cal: &Calibration) -> String {
    format!(
        "{CALIBRATION_HEADER}\n{:e},{:e},{:e},{:e},{:e}\n",
        cal.mass, cal.run.q, cal.coeff, cal.run.dt_used, cal.run.wronskian_drift
    )
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes the time series (and per-mode data, if recorded) of one run.
pub fn write_run(dir: &Path, run: &SingleRun) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    write(dir, &timeseries_name(run.m0, run.m_y), &timeseries_csv(&run.records), &mut written)?;
    if let Some(modes) = modes_csv(&run.records) {
        write(dir, &modes_name(run.m0, run.m_y), &modes, &mut written)?;
    }
    Ok(written)
}

/// Writes every time series, then the sweep table and fit per k_y.
pub fn write_sweep(dir: &Path, sweeps: &[SweepRun]) -> Result<Vec<PathBuf>> {
    let multi = sweeps.len() > 1;
    let mut written = Vec::new();
    for sweep in sweeps {
        for run in &sweep.runs {
            written.extend(write_run(dir, run)?);
        }
        let m_y = sweep.result.m_y;
        write(dir, &summary_name("sweep", m_y, multi), &sweep_csv(&sweep.result), &mut written)?;
        if let Some(fit) = &sweep.result.fit {
            write(dir, &summary_name("fit", m_y, multi), &fit_csv(fit), &mut written)?;
        }
    }
    Ok(written)
}

/// Writes whatever runs finished before a sweep failed.
pub fn write_partial(dir: &Path, runs: &[SingleRun]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for run in runs {
        written.extend(write_run(dir, run)?);
    }
    Ok(written)
}

pub fn write_calibration(dir: &Path, cal: &Calibration) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = write_run(dir, &cal.run)?;
    write(dir, "calibration.csv", &calibration_csv(cal), &mut written)?;
    Ok(written)
}

const PLOT_SWEEP: &str = r#"#!/usr/bin/env python3
"""Transport Q against M0 on a log scale, with the exponential fit."""
import csv
import math
import sys
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
sweep = sys.argv[1] if len(sys.argv) > 1 else "sweep.csv"
fit = sys.argv[2] if len(sys.argv) > 2 else "fit.csv"

with open(here / sweep, newline="") as fh:
    rows = list(csv.DictReader(fh))
m0 = [float(r["M0"]) for r in rows]
q = [abs(float(r["Q"])) for r in rows]

fig, ax = plt.subplots(figsize=(5, 4))
ax.semilogy(m0, q, "o", label="|Q|")
if (here / fit).exists():
    with open(here / fit, newline="") as fh:
        f = next(csv.DictReader(fh))
    a, rate = abs(float(f["amplitude"])), float(f["rate"])
    xs = [m0[0] + i * (m0[-1] - m0[0]) / 100 for i in range(101)]
    ax.semilogy(xs, [a * math.exp(-rate * x) for x in xs], "-",
                label=f"{a:.3g} exp(-{rate:.3f} M0)")
ax.set_xlabel("M0")
ax.set_ylabel("|Q|")
ax.legend()
fig.tight_layout()
fig.savefig(here / (Path(sweep).stem + ".png"), dpi=150)
"#;

const PLOT_TIMESERIES: &str = r#"#!/usr/bin/env python3
"""Total occupation N(t) for every time series in this directory."""
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
files = [Path(p) for p in sys.argv[1:]] or sorted(here.glob("timeseries_M*_ky*.csv"))

fig, ax = plt.subplots(figsize=(6, 4))
for path in files:
    with open(here / path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    t = [float(r["t"]) for r in rows]
    n = [float(r["N_total"]) for r in rows]
    ax.plot(t, n, label=path.stem.removeprefix("timeseries_"))
ax.set_xlabel("t")
ax.set_ylabel("N")
ax.legend()
fig.tight_layout()
fig.savefig(here / "timeseries.png", dpi=150)
"#;

/// Writes `plot_sweep.py` and `plot_timeseries.py` (matplotlib).
pub fn write_plot_scripts(dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    write(dir, "plot_sweep.py", PLOT_SWEEP, &mut written)?;
    write(dir, "plot_timeseries.py", PLOT_TIMESERIES, &mut written)?;
    Ok(written)
}
