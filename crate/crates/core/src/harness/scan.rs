//! Parameter scans over `α` or the initial amplitude.
//!
//! Each value runs as an independent simulation; rows may execute
//! concurrently and write only to their own subdirectory. `t_star_proxy` is
//! the first sampled time at which the proxy fired. It is a grid-level
//! surrogate for the lifespan, bounded by resolution, and is reported as
//! such.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::diagnostics::lifespan_estimate;
use crate::harness::config::SimConfig;
use crate::numerics::{linear_fit, LinearFit};
use crate::transport::{run, RunStatus};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanVariable {
    Alpha,
    Amplitude,
}

impl ScanVariable {
    pub fn name(self) -> &'static str {
        match self {
            ScanVariable::Alpha => "alpha",
            ScanVariable::Amplitude => "amplitude",
        }
    }
}

impl FromStr for ScanVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(ScanVariable::Alpha),
            "amplitude" => Ok(ScanVariable::Amplitude),
            other => Err(Error::InvalidScan(format!(
                "unknown scan variable `{other}` (expected alpha or amplitude)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub base: SimConfig,
    pub variable: ScanVariable,
    pub values: Vec<f64>,
    /// Rows run concurrently; 0 means one per available core.
    pub workers: usize,
}

impl ScanSpec {
    /// The configuration of the row for `value`, writing under
    /// `{base.output.dir}/{variable}_{value}` when an output directory is set.
    pub fn row_config(&self, value: f64) -> SimConfig {
        let mut c = self.base.clone();
        match self.variable {
            ScanVariable::Alpha => c.alpha = value,
            ScanVariable::Amplitude => c.initial.amplitude = value,
        }
        if let Some(dir) = &self.base.output.dir {
            c.output.dir = Some(dir.join(format!("{}_{value:?}", self.variable.name())));
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Finished(RunStatus),
    Failed(String),
}

impl RowOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            RowOutcome::Finished(s) => s.label(),
            RowOutcome::Failed(_) => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub value: f64,
    pub outcome: RowOutcome,
    pub t_star_proxy: Option<f64>,
    /// Criterion integrals at the last sample.
    pub int_v_at_stop: f64,
    pub int_dir_crit_at_stop: f64,
    pub final_l2: f64,
    pub final_linf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanTable {
    pub variable: ScanVariable,
    pub rows: Vec<ScanRow>,
    /// Alpha scans: fit of `t_star_proxy` against `log(1 + 1/(1−α))` over
    /// fired rows with `α < 1`.
    pub alpha_fit: Option<LinearFit>,
    /// Amplitude scans: `max/min` of `t_star_proxy · amplitude` over fired
    /// rows.
    pub amplitude_spread: Option<f64>,
}

/// Abscissa of the alpha fit.
pub fn alpha_fit_abscissa(alpha: f64) -> f64 {
    (1.0 + 1.0 / (1.0 - alpha)).ln()
}

fn run_row(spec: &ScanSpec, value: f64) -> ScanRow {
    let failed = |msg: String| ScanRow {
        value,
        outcome: RowOutcome::Failed(msg),
        t_star_proxy: None,
        int_v_at_stop: f64::NAN,
        int_dir_crit_at_stop: f64::NAN,
        final_l2: f64::NAN,
        final_linf: f64::NAN,
    };
    let config = spec.row_config(value);
    match run(&config) {
        Ok(outcome) => {
            let last = outcome.series.last();
            ScanRow {
                value,
                outcome: RowOutcome::Finished(outcome.status),
                t_star_proxy: lifespan_estimate(&outcome.series).t_star_proxy,
                int_v_at_stop: last.map_or(f64::NAN, |r| r.int_v),
                int_dir_crit_at_stop: last.map_or(f64::NAN, |r| r.int_dir_crit),
                final_l2: outcome.final_state.rho.l2(),
                final_linf: outcome.final_state.rho.linf(),
            }
        }
        Err(e) => {
            log::warn!("scan row {} = {value}: {e}", spec.variable.name());
            failed(e.to_string())
        }
    }
}

/// Runs every row and aggregates the lifespan table. Rows keep the order of
/// `spec.values`; a failing row is recorded and the scan continues. Writes
/// `scan.csv` and `scan_summary.txt` when an output directory is set.
pub fn run_scan(spec: &ScanSpec) -> Result<ScanTable> {
    if spec.values.is_empty() {
        return Err(Error::InvalidScan("no scan values".into()));
    }
    if let Some(v) = spec.values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidScan(format!("non-finite scan value {v}")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::InvalidScan(e.to_string()))?;
    let rows: Vec<ScanRow> =
        pool.install(|| spec.values.par_iter().map(|&v| run_row(spec, v)).collect());
    let table = aggregate(spec.variable, rows);
    if let Some(dir) = &spec.base.output.dir {
        table.write_files(dir)?;
    }
    Ok(table)
}

pub fn aggregate(variable: ScanVariable, rows: Vec<ScanRow>) -> ScanTable {
    let fired: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.t_star_proxy.map(|t| (r.value, t)))
        .collect();
    let (alpha_fit, amplitude_spread) = match variable {
        ScanVariable::Alpha => {
            let (x, y): (Vec<f64>, Vec<f64>) = fired
                .iter()
                .filter(|(a, _)| *a < 1.0)
                .map(|&(a, t)| (alpha_fit_abscissa(a), t))
                .unzip();
            (linear_fit(&x, &y), None)
        }
        ScanVariable::Amplitude => {
            let products: Vec<f64> = fired.iter().map(|&(a, t)| a.abs() * t).collect();
            let spread = if products.len() >= 2 {
                let max = products.iter().copied().fold(f64::MIN, f64::max);
                let min = products.iter().copied().fold(f64::MAX, f64::min);
                Some(max / min)
            } else {
                None
            };
            (None, spread)
        }
    };
    ScanTable {
        variable,
        rows,
        alpha_fit,
        amplitude_spread,
    }
}

impl ScanTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "value,status,t_star_proxy,int_V_at_stop,int_dircrit_at_stop")?;
        let fmt = |v: f64| format!("{v:.16e}");
        for r in &self.rows {
            let t = r.t_star_proxy.map_or_else(|| "completed".to_string(), fmt);
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt(r.value),
                r.outcome.label(),
                t,
                fmt(r.int_v_at_stop),
                fmt(r.int_dir_crit_at_stop)
            )?;
        }
        Ok(())
    }

    fn write_files(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.write_csv(std::io::BufWriter::new(fs::File::create(dir.join("scan.csv"))?))?;
        fs::write(dir.join("scan_summary.txt"), self.to_string())?;
        Ok(())
    }
}

impl fmt::Display for ScanTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scan over {} ({} rows)", self.variable.name(), self.rows.len())?;
        for r in &self.rows {
            let t = r
                .t_star_proxy
                .map_or_else(|| "-".to_string(), |t| format!("{t:.6}"));
            write!(
                f,
                "  {} = {:<8} {:<13} t_star_proxy = {t:<10} final L2 = {:.6e}, Linf = {:.6e}",
                self.variable.name(),
                r.value,
                r.outcome.label(),
                r.final_l2,
                r.final_linf
            )?;
            if let RowOutcome::Failed(msg) = &r.outcome {
                write!(f, " ({})", msg.replace('\n', " "))?;
            }
            writeln!(f)?;
        }
        match self.variable {
            ScanVariable::Alpha => match self.alpha_fit {
                Some(fit) => writeln!(
                    f,
                    "fit t_star_proxy ~ a + b log(1 + 1/(1 - alpha)): b = {:.6e}, a = {:.6e}, R^2 = {:.4}",
                    fit.slope, fit.intercept, fit.r_squared
                )?,
                None => writeln!(f, "fit unavailable (fewer than two fired rows with alpha < 1)")?,
            },
            ScanVariable::Amplitude => match self.amplitude_spread {
                Some(s) => writeln!(f, "spread of t_star_proxy * amplitude: {s:.4}")?,
                None => writeln!(f, "spread unavailable (fewer than two fired rows)")?,
            },
        }
        write!(
            f,
            "t_star_proxy is the first sampled proxy firing on a fixed grid, a resolution-bounded surrogate for the lifespan"
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    fn row(value: f64, t: Option<f64>) -> ScanRow {
        ScanRow {
            value,
            outcome: RowOutcome::Finished(if t.is_some() {
                RunStatus::BlowupProxy
            } else {
                RunStatus::Completed
            }),
            t_star_proxy: t,
            int_v_at_stop: 1.0,
            int_dir_crit_at_stop: 2.0,
            final_l2: 1.0,
            final_linf: 1.0,
        }
    }

    #[test]
    fn alpha_fit_recovers_a_line() {
        let alphas = [0.5, 0.6, 0.7, 0.8, 0.9];
        let rows = alphas
            .iter()
            .map(|&a| row(a, Some(2.0 + 3.0 * alpha_fit_abscissa(a))))
            .chain([row(0.95, None), row(1.5, Some(0.1))])
            .collect();
        let table = aggregate(ScanVariable::Alpha, rows);
        let fit = table.alpha_fit.unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_spread() {
        let rows = vec![row(0.5, Some(4.0)), row(1.0, Some(2.5)), row(2.0, Some(1.0)), row(4.0, None)];
        let table = aggregate(ScanVariable::Amplitude, rows);
        assert_eq!(table.amplitude_spread, Some(2.5 / 2.0));
    }

    #[test]
    fn csv_layout() {
        let table = aggregate(ScanVariable::Alpha, vec![row(0.5, Some(1.25)), row(1.0, None)]);
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "value,status,t_star_proxy,int_V_at_stop,int_dircrit_at_stop");
        assert!(lines[1].starts_with("5.0000000000000000e-1,blowup_proxy,1.2500000000000000e0,"));
        assert!(lines[2].contains(",completed,completed,"));
    }

    #[test]
    fn failures_are_recorded_per_row() {
        let base = SimConfig::new(Grid::new(2, 16).unwrap(), 0.5, 0.05);
        let spec = ScanSpec {
            base,
            variable: ScanVariable::Alpha,
            values: vec![0.5, 3.0],
            workers: 2,
        };
        let table = run_scan(&spec).unwrap();
        assert_eq!(table.rows[0].outcome, RowOutcome::Finished(RunStatus::Completed));
        assert!(matches!(&table.rows[1].outcome, RowOutcome::Failed(m) if m.contains("alpha must lie")));
    }

    #[test]
    fn empty_scan_is_rejected() {
        let spec = ScanSpec {
            base: SimConfig::new(Grid::new(2, 16).unwrap(), 0.5, 0.05),
            variable: ScanVariable::Amplitude,
            values: vec![],
            workers: 1,
        };
        assert!(matches!(run_scan(&spec), Err(Error::InvalidScan(_))));
        assert!("beta".parse::<ScanVariable>().is_err());
    }
}
