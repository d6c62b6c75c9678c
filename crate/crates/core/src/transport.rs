//! Time integration of `∂_t ρ + div(ρu) = 0`.
//!
//! The semi-discretization is the dealiased divergence form from
//! [`StokesOperator`], advanced by the classical four-stage Runge-Kutta
//! scheme. The divergence form keeps the mean of `ρ` fixed exactly.

use std::fs;
use std::path::PathBuf;

use crate::diagnostics::{sample, DiagnosticsSeries, ProxyState};
use crate::harness::config::SimConfig;
use crate::harness::presets::preset_initial_datum;
use crate::littlewood_paley::{vector_linf, DyadicFilterBank};
use crate::spectral::{
    dealias, derivative_spectral, forward_unchecked, inverse_transform, snapshot_name,
    write_snapshot, RealField, SpectralField,
};
use crate::velocity::{EquilibriumProfile, Regularization, StokesOperator};
use crate::{Error, Result};

/// Floor on `max |u|` in the CFL rule, so `u = 0` gives a finite step.
pub const CFL_VELOCITY_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub rho: RealField,
    pub step_count: u64,
    /// Size of the last step taken (0 before the first step).
    pub dt: f64,
    /// Target Courant number.
    pub cfl: f64,
    /// Time at which a stage produced non-finite values.
    pub diverged_at: Option<f64>,
}

impl SolverState {
    pub fn new(rho: RealField, cfl: f64) -> Self {
        Self {
            t: 0.0,
            rho,
            step_count: 0,
            dt: 0.0,
            cfl,
            diverged_at: None,
        }
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtRule {
    Fixed(f64),
    /// `dt = c·h / max(‖u‖_∞, ε)` with `h = 2π/n`.
    CflAdaptive(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub dt_rule: DtRule,
    pub regularization: Regularization,
    /// When set, `ρ` is a perturbation of this profile and the source
    /// `−∂_d R · u_d` is added.
    pub equilibrium: Option<EquilibriumProfile>,
}

impl SchemeConfig {
    pub fn new(dt_rule: DtRule) -> Self {
        Self {
            dt_rule,
            regularization: Regularization::None,
            equilibrium: None,
        }
    }

    pub fn cfl_target(&self) -> f64 {
        match self.dt_rule {
            DtRule::CflAdaptive(c) => c,
            DtRule::Fixed(_) => 0.0,
        }
    }
}

/// Right-hand side and the largest velocity of the truncated state.
fn evaluate(rho: &RealField, scheme: &SchemeConfig, op: &StokesOperator) -> (RealField, f64) {
    let hat = forward_unchecked(rho);
    let (div, u) = op.flux_divergence(&hat);
    let mut out: SpectralField = div;
    for c in out.coeffs_mut() {
        *c = -*c;
    }
    if let Some(eq) = &scheme.equilibrium {
        let last = u.len() - 1;
        let source = dealias(&forward_unchecked(&eq.derivative().mul(&u[last])));
        for (o, s) in out.coeffs_mut().iter_mut().zip(source.coeffs()) {
            *o -= s;
        }
    }
    let out = op.project(&out);
    (inverse_transform(&out), vector_linf(&u))
}

/// `−div(ρu) [− ∂_d R · u_d]`, with `A_n` applied last in Friedrichs mode.
pub fn rhs(state: &SolverState, scheme: &SchemeConfig, op: &StokesOperator) -> Result<RealField> {
    if let Some(t) = state.diverged_at {
        return Err(Error::Diverged(t));
    }
    Ok(evaluate(&state.rho, scheme, op).0)
}

/// One classical RK4 step given the first stage.
fn rk4_from_first_stage(
    rho: &RealField,
    dt: f64,
    k1: RealField,
    f: impl Fn(&RealField) -> RealField,
) -> RealField {
    let mut y = rho.clone();
    y.axpy(0.5 * dt, &k1);
    let k2 = f(&y);
    let mut y = rho.clone();
    y.axpy(0.5 * dt, &k2);
    let k3 = f(&y);
    let mut y = rho.clone();
    y.axpy(dt, &k3);
    let k4 = f(&y);
    let mut out = rho.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    out
}

/// Classical RK4 step for an arbitrary autonomous right-hand side.
pub fn rk4_step(rho: &RealField, dt: f64, f: impl Fn(&RealField) -> RealField) -> RealField {
    let k1 = f(rho);
    rk4_from_first_stage(rho, dt, k1, f)
}

/// `−div(ρu)` for a prescribed velocity, dealiased like the active case.
pub fn passive_rhs(rho: &RealField, u: &[RealField]) -> RealField {
    let trunc = inverse_transform(&dealias(&forward_unchecked(rho)));
    let mut acc = SpectralField::zeros(rho.grid());
    for (axis, comp) in u.iter().enumerate() {
        let flux = forward_unchecked(&trunc.mul(comp));
        acc = acc.add(&derivative_spectral(&flux, axis));
    }
    let mut out = dealias(&acc);
    for c in out.coeffs_mut() {
        *c = -*c;
    }
    inverse_transform(&out)
}

pub fn step(state: &SolverState, scheme: &SchemeConfig, op: &StokesOperator) -> SolverState {
    step_capped(state, scheme, op, f64::INFINITY)
}

/// A step whose size never exceeds `max_dt`; a step clipped to exactly
/// `max_dt` lands on `state.t + max_dt`.
pub fn step_capped(
    state: &SolverState,
    scheme: &SchemeConfig,
    op: &StokesOperator,
    max_dt: f64,
) -> SolverState {
    let mut next = state.clone();
    if state.is_diverged() {
        return next;
    }
    let (k1, umax) = evaluate(&state.rho, scheme, op);
    let dt = match scheme.dt_rule {
        DtRule::Fixed(dt) => dt,
        DtRule::CflAdaptive(c) => c * op.grid().spacing() / umax.max(CFL_VELOCITY_FLOOR),
    }
    .min(max_dt);
    if !k1.is_finite() {
        next.diverged_at = Some(state.t);
        return next;
    }
    let rho = rk4_from_first_stage(&state.rho, dt, k1, |y| evaluate(y, scheme, op).0);
    next.dt = dt;
    next.t = state.t + dt;
    next.step_count += 1;
    if rho.is_finite() {
        next.rho = rho;
    } else {
        next.diverged_at = Some(next.t);
    }
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    BlowupProxy,
    Diverged,
}

impl RunStatus {
    pub fn label(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BlowupProxy => "blowup_proxy",
            RunStatus::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub series: DiagnosticsSeries,
    pub final_state: SolverState,
    pub initial: RealField,
    pub snapshots: Vec<PathBuf>,
}

/// Integrates a validated configuration from `t = 0` to `t_end`, stopping
/// early when the proxy fires or a step diverges. Writes the diagnostics
/// CSV, snapshots and the resolved configuration when an output directory
/// is configured.
pub fn run(config: &SimConfig) -> Result<RunOutcome> {
    config.validate()?;
    let grid = config.grid;
    let op = StokesOperator::new(grid, config.alpha, config.scheme.regularization)?;
    let bank = DyadicFilterBank::new(grid);
    let scheme = config.scheme_config()?;
    let mut rho0 = preset_initial_datum(&config.initial, grid, config.seed)?;
    if let Regularization::Friedrichs { .. } = config.scheme.regularization {
        rho0 = inverse_transform(&op.project(&forward_unchecked(&rho0)));
    }
    rho0.check_finite()?;
    run_from(config, &op, &bank, &scheme, rho0)
}

/// [`run`] with an explicit initial field and prebuilt operators.
pub fn run_from(
    config: &SimConfig,
    op: &StokesOperator,
    bank: &DyadicFilterBank,
    scheme: &SchemeConfig,
    rho0: RealField,
) -> Result<RunOutcome> {
    let out_dir = config.output.dir.clone();
    if let Some(dir) = &out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.resolved"), config.serialize())?;
    }
    let mut targets: Vec<f64> = config
        .output
        .snapshots
        .iter()
        .copied()
        .filter(|&t| t <= config.t_end)
        .collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let mut next_target = 0;
    let mut snapshots = Vec::new();
    let save = |state: &SolverState, snapshots: &mut Vec<PathBuf>| -> Result<()> {
        if let Some(dir) = &out_dir {
            let path = dir.join(snapshot_name(state.t));
            write_snapshot(&path, &state.rho)?;
            snapshots.push(path);
        }
        Ok(())
    };

    let mut state = SolverState::new(rho0.clone(), scheme.cfl_target());
    let mut series = DiagnosticsSeries::new(&config.diagnostics);
    let cadence = config.diagnostics.cadence.max(1) as u64;
    let mut status = RunStatus::Completed;

    if series.push(sample(&state, op, bank, &config.diagnostics)).fired() {
        status = RunStatus::BlowupProxy;
    }
    while next_target < targets.len() && targets[next_target] <= 0.0 {
        save(&state, &mut snapshots)?;
        next_target += 1;
    }

    while status == RunStatus::Completed && state.t < config.t_end {
        let target = targets
            .get(next_target)
            .copied()
            .unwrap_or(config.t_end)
            .min(config.t_end);
        let cap = target - state.t;
        let mut next = step_capped(&state, scheme, op, cap);
        if next.is_diverged() {
            let t = next.diverged_at.unwrap_or(next.t).max(state.t + f64::EPSILON);
            series.push_diverged(t, next.dt);
            status = RunStatus::Diverged;
            state = next;
            break;
        }
        if next.dt >= cap {
            next.t = target;
        }
        state = next;
        let reached_end = state.t >= config.t_end;
        if state.step_count % cadence == 0 || reached_end {
            match series.push(sample(&state, op, bank, &config.diagnostics)) {
                ProxyState::Ok => {}
                ProxyState::Diverged => status = RunStatus::Diverged,
                _ => status = RunStatus::BlowupProxy,
            }
        }
        while next_target < targets.len() && targets[next_target] <= state.t {
            save(&state, &mut snapshots)?;
            next_target += 1;
        }
    }

    if let Some(dir) = &out_dir {
        let file = fs::File::create(dir.join("diagnostics.csv"))?;
        series.write_csv(std::io::BufWriter::new(file))?;
    }
    Ok(RunOutcome {
        status,
        series,
        final_state: state,
        initial: rho0,
        snapshots,
    })
}
