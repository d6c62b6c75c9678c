//! Time-sampled norms, continuation-criterion integrands and the blow-up
//! proxy.
//!
//! Each sample records Lebesgue and Besov norms of `ρ`, the quantity
//! `V = ‖∇u‖_∞` (plus `‖∇ρ‖_∞` when the tracked regularity is at least 1),
//! the directional quantity `‖∂_d ρ‖_{B^{−α}_{∞,1}}`, and the fraction of
//! fluctuation energy beyond `|k| = n/3`. Running trapezoid integrals of
//! `V` and of the directional quantity are kept alongside.
//!
//! The proxy fires when `‖ρ‖_{B^{1−α}_{∞,1}}` exceeds `M` times its initial
//! value, or when the spectral tail fraction exceeds `τ`. It is a grid-level
//! surrogate for loss of regularity and is always reported as such.

use std::fmt;
use std::io::Write;

use crate::littlewood_paley::{vector_linf, BesovParams, DyadicFilterBank};
use crate::numerics::pairwise_sum_by;
use crate::spectral::{
    derivative_spectral, forward_unchecked, inverse_transform, norm_sq, RealField, SpectralField,
};
use crate::transport::SolverState;
use crate::velocity::StokesOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupProxyConfig {
    pub norm_factor: f64,
    pub tail_threshold: f64,
}

impl Default for BlowupProxyConfig {
    fn default() -> Self {
        Self {
            norm_factor: 100.0,
            tail_threshold: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsConfig {
    /// Extra Lebesgue exponents reported as `lp:{p}` columns.
    pub lp: Vec<f64>,
    /// Inhomogeneous Besov norms reported as `besov:{s}_{p}_{r}` columns.
    pub besov: Vec<BesovParams>,
    /// Steps between samples.
    pub cadence: usize,
    /// Regularity index the run is tracked in; `None` means `1 − α`.
    pub regularity: Option<f64>,
    pub proxy: BlowupProxyConfig,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            lp: vec![4.0],
            besov: vec![BesovParams::new(0.0, f64::INFINITY, 1.0)],
            cadence: 10,
            regularity: None,
            proxy: BlowupProxyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxyState {
    Ok,
    /// Norm growth past `M` times the initial value.
    FiredNorm,
    /// Spectral tail fraction past `τ`.
    FiredTail,
    Diverged,
}

impl ProxyState {
    pub fn fired(self) -> bool {
        self != ProxyState::Ok
    }

    pub fn label(self) -> &'static str {
        match self {
            ProxyState::Ok => "ok",
            ProxyState::FiredNorm => "fired_norm",
            ProxyState::FiredTail => "fired_tail",
            ProxyState::Diverged => "diverged",
        }
    }
}

impl fmt::Display for ProxyState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub time: f64,
    pub dt: f64,
    pub l2: f64,
    pub linf: f64,
    pub lp: Vec<f64>,
    pub besov: Vec<f64>,
    pub v: f64,
    pub int_v: f64,
    pub dir_crit: f64,
    pub int_dir_crit: f64,
    pub tail_frac: f64,
    /// `‖ρ‖_{B^{1−α}_{∞,1}}`, the norm watched by the proxy.
    pub proxy_norm: f64,
    pub u_linf: f64,
    pub grad_u_linf: f64,
    pub proxy_state: ProxyState,
}

impl Record {
    fn all_finite(&self) -> bool {
        [
            self.l2,
            self.linf,
            self.v,
            self.dir_crit,
            self.tail_frac,
            self.proxy_norm,
        ]
        .iter()
        .chain(&self.lp)
        .chain(&self.besov)
        .all(|v| v.is_finite())
    }
}

/// Fraction of non-mean energy carried by modes with `|k| > n/3`.
pub fn spectral_tail_fraction(hat: &SpectralField) -> f64 {
    let grid = hat.grid();
    let cut2 = (grid.n() as f64 / 3.0).powi(2);
    let coeffs = hat.coeffs();
    let idx: Vec<usize> = (1..coeffs.len()).collect();
    let total = pairwise_sum_by(&idx, &|&i| coeffs[i].norm_sqr());
    if total == 0.0 {
        return 0.0;
    }
    let tail = pairwise_sum_by(&idx, &|&i| {
        if norm_sq(&grid.wavevector(i)) > cut2 {
            coeffs[i].norm_sqr()
        } else {
            0.0
        }
    });
    tail / total
}

/// Pointwise Frobenius norm of `∇u`, maximized over the grid.
fn gradient_linf(u_hat: &[SpectralField]) -> f64 {
    let dim = u_hat.len();
    let entries: Vec<RealField> = u_hat
        .iter()
        .flat_map(|c| (0..dim).map(move |axis| inverse_transform(&derivative_spectral(c, axis))))
        .collect();
    vector_linf(&entries)
}

/// One fully populated record; integrals and proxy state are filled in by
/// [`DiagnosticsSeries::push`].
pub fn sample(
    state: &SolverState,
    op: &StokesOperator,
    bank: &DyadicFilterBank,
    config: &DiagnosticsConfig,
) -> Record {
    let rho = &state.rho;
    let grid = rho.grid();
    let alpha = op.alpha();
    let hat = forward_unchecked(rho);
    let blocks = bank.blocks_of_spectrum(&hat);

    let u_hat = op.velocity_spectrum(&hat);
    let u: Vec<RealField> = u_hat.iter().map(inverse_transform).collect();
    let grad_u_linf = gradient_linf(&u_hat);
    let regularity = config.regularity.unwrap_or(1.0 - alpha);
    let v = if regularity >= 1.0 {
        let grad_rho: Vec<RealField> = (0..grid.dim())
            .map(|axis| inverse_transform(&derivative_spectral(&hat, axis)))
            .collect();
        grad_u_linf + vector_linf(&grad_rho)
    } else {
        grad_u_linf
    };

    let dd = derivative_spectral(&hat, grid.dim() - 1);
    let dir_crit = bank.besov_from_blocks(
        &BesovParams::new(-alpha, f64::INFINITY, 1.0),
        &bank.blocks_of_spectrum(&dd),
    );
    let proxy_norm =
        bank.besov_from_blocks(&BesovParams::new(1.0 - alpha, f64::INFINITY, 1.0), &blocks);

    Record {
        time: state.t,
        dt: state.dt,
        l2: rho.l2(),
        linf: rho.linf(),
        lp: config.lp.iter().map(|&p| rho.lp_norm(p)).collect(),
        besov: config
            .besov
            .iter()
            .map(|b| bank.besov_from_blocks(b, &blocks))
            .collect(),
        v,
        int_v: 0.0,
        dir_crit,
        int_dir_crit: 0.0,
        tail_frac: spectral_tail_fraction(&hat),
        proxy_norm,
        u_linf: vector_linf(&u),
        grad_u_linf,
        proxy_state: ProxyState::Ok,
    }
}

/// Ordered diagnostics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSeries {
    lp: Vec<f64>,
    besov: Vec<BesovParams>,
    proxy: BlowupProxyConfig,
    records: Vec<Record>,
}

impl DiagnosticsSeries {
    pub fn new(config: &DiagnosticsConfig) -> Self {
        Self {
            lp: config.lp.clone(),
            besov: config.besov.clone(),
            proxy: config.proxy,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends a sample, accumulating the trapezoid integrals and
    /// evaluating the proxy against the first sample. Returns the
    /// resulting proxy state.
    ///
    /// # Panics
    /// If `record.time` does not exceed the previous sample time.
    pub fn push(&mut self, mut record: Record) -> ProxyState {
        if let Some(prev) = self.records.last() {
            assert!(
                record.time > prev.time,
                "sample times must increase ({} after {})",
                record.time,
                prev.time
            );
            let h = record.time - prev.time;
            if record.all_finite() {
                record.int_v = prev.int_v + 0.5 * h * (prev.v + record.v);
                record.int_dir_crit = prev.int_dir_crit + 0.5 * h * (prev.dir_crit + record.dir_crit);
            } else {
                record.int_v = prev.int_v;
                record.int_dir_crit = prev.int_dir_crit;
            }
        }
        let reference = self.records.first().map_or(record.proxy_norm, |r| r.proxy_norm);
        record.proxy_state = if !record.all_finite() {
            ProxyState::Diverged
        } else if reference > 0.0 && record.proxy_norm > self.proxy.norm_factor * reference {
            ProxyState::FiredNorm
        } else if record.tail_frac > self.proxy.tail_threshold {
            ProxyState::FiredTail
        } else {
            ProxyState::Ok
        };
        let state = record.proxy_state;
        self.records.push(record);
        state
    }

    /// Records a step that produced non-finite values at time `t`.
    pub fn push_diverged(&mut self, t: f64, dt: f64) -> ProxyState {
        let nan = f64::NAN;
        let record = Record {
            time: t,
            dt,
            l2: nan,
            linf: nan,
            lp: vec![nan; self.lp.len()],
            besov: vec![nan; self.besov.len()],
            v: nan,
            int_v: 0.0,
            dir_crit: nan,
            int_dir_crit: 0.0,
            tail_frac: nan,
            proxy_norm: nan,
            u_linf: nan,
            grad_u_linf: nan,
            proxy_state: ProxyState::Diverged,
        };
        self.push(record)
    }

    pub fn csv_header(&self) -> String {
        let mut cols = vec!["time".to_string(), "dt".into(), "l2".into(), "linf".into()];
        cols.extend(self.lp.iter().map(|p| format!("lp:{p}")));
        cols.extend(self.besov.iter().map(BesovParams::label));
        cols.extend(
            ["V", "int_V", "dir_crit", "int_dir_crit", "tail_frac", "proxy_state"]
                .iter()
                .map(|s| s.to_string()),
        );
        cols.join(",")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.csv_header())?;
        let fmt = |v: f64| format!("{v:.16e}");
        for r in &self.records {
            let mut cells = vec![fmt(r.time), fmt(r.dt), fmt(r.l2), fmt(r.linf)];
            cells.extend(r.lp.iter().map(|&v| fmt(v)));
            cells.extend(r.besov.iter().map(|&v| fmt(v)));
            cells.extend([
                fmt(r.v),
                fmt(r.int_v),
                fmt(r.dir_crit),
                fmt(r.int_dir_crit),
                fmt(r.tail_frac),
                r.proxy_state.label().to_string(),
            ]);
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lifespan {
    pub t_star_proxy: Option<f64>,
    pub trigger: Option<ProxyState>,
}

/// First sampled time at which the proxy fired (no interpolation between
/// samples), or `None` for a run that never fired.
pub fn lifespan_estimate(series: &DiagnosticsSeries) -> Lifespan {
    match series.records.iter().find(|r| r.proxy_state.fired()) {
        Some(r) => Lifespan {
            t_star_proxy: Some(r.time),
            trigger: Some(r.proxy_state),
        },
        None => Lifespan {
            t_star_proxy: None,
            trigger: None,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionPoint {
    pub time: f64,
    pub int_v: f64,
    pub int_dir_crit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub points: Vec<CriterionPoint>,
    /// Both integrals at the first proxy firing, if any.
    pub at_fire: Option<CriterionPoint>,
}

pub fn criterion_report(series: &DiagnosticsSeries) -> CriterionReport {
    let point = |r: &Record| CriterionPoint {
        time: r.time,
        int_v: r.int_v,
        int_dir_crit: r.int_dir_crit,
    };
    CriterionReport {
        points: series.records.iter().map(point).collect(),
        at_fire: series
            .records
            .iter()
            .find(|r| r.proxy_state.fired())
            .map(point),
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.at_fire, self.points.last()) {
            (Some(p), _) => write!(
                f,
                "proxy fired at t = {:.6}: int_V = {:.6e}, int_dir_crit = {:.6e}",
                p.time, p.int_v, p.int_dir_crit
            ),
            (None, Some(p)) => write!(
                f,
                "no proxy fire up to t = {:.6}: int_V = {:.6e}, int_dir_crit = {:.6e}",
                p.time, p.int_v, p.int_dir_crit
            ),
            (None, None) => write!(f, "empty series"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets::band_limited_noise;
    use crate::spectral::{forward_transform, Grid};
    use crate::velocity::Regularization;

    fn grid() -> Grid {
        Grid::new(2, 32).unwrap()
    }

    fn setup(alpha: f64) -> (StokesOperator, DyadicFilterBank) {
        (
            StokesOperator::new(grid(), alpha, Regularization::None).unwrap(),
            DyadicFilterBank::new(grid()),
        )
    }

    fn state(rho: RealField) -> SolverState {
        SolverState::new(rho, 0.5)
    }

    #[test]
    fn shear_sample() {
        let (op, bank) = setup(0.5);
        let rho = RealField::from_fn(grid(), |x| x[0].sin());
        let r = sample(&state(rho), &op, &bank, &DiagnosticsConfig::default());
        assert!((r.v - 1.0).abs() < 1e-13);
        assert!(r.dir_crit < 1e-13);
        assert!((r.u_linf - 1.0).abs() < 1e-13);
    }

    #[test]
    fn stratified_sample() {
        for alpha in [0.0, 0.5, 1.0] {
            let (op, bank) = setup(alpha);
            let rho = RealField::from_fn(grid(), |x| x[1].sin());
            let r = sample(&state(rho), &op, &bank, &DiagnosticsConfig::default());
            // u = 0; at α = 0 the tracked regularity is 1 and ‖∇ρ‖_∞ = 1 enters
            let expected_v = if alpha == 0.0 { 1.0 } else { 0.0 };
            assert!((r.v - expected_v).abs() < 1e-13);
            // ∂_d ρ = cos(x_d) sits in Δ_{−1}, weighted by 2^{α}
            assert!((r.dir_crit - 2f64.powf(alpha)).abs() < 1e-13);
        }
    }

    #[test]
    fn regularity_one_adds_density_gradient() {
        let (op, bank) = setup(0.5);
        let rho = RealField::from_fn(grid(), |x| (2.0 * x[1]).sin());
        let cfg = DiagnosticsConfig {
            regularity: Some(1.0),
            ..DiagnosticsConfig::default()
        };
        let r = sample(&state(rho), &op, &bank, &cfg);
        assert!((r.v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn zero_density_sample() {
        let (op, bank) = setup(0.5);
        let r = sample(&state(RealField::zeros(grid())), &op, &bank, &DiagnosticsConfig::default());
        assert_eq!((r.l2, r.linf, r.v, r.dir_crit, r.tail_frac), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(r.besov.iter().chain(&r.lp).all(|&v| v == 0.0));
    }

    #[test]
    fn dir_crit_vanishes_iff_vertical_derivative_does() {
        let (op, bank) = setup(0.5);
        let cfg = DiagnosticsConfig::default();
        let flat = RealField::from_fn(grid(), |x| (3.0 * x[0]).cos() + x[0].sin());
        assert!(sample(&state(flat), &op, &bank, &cfg).dir_crit < 1e-12);
        for seed in 0..10 {
            let rho = band_limited_noise(grid(), 10, seed);
            assert!(sample(&state(rho), &op, &bank, &cfg).dir_crit > 1e-3);
        }
    }

    #[test]
    fn dir_crit_bounded_by_proxy_norm() {
        let bank = DyadicFilterBank::new(grid());
        let mut worst = 0.0f64;
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let op = StokesOperator::new(grid(), alpha, Regularization::None).unwrap();
            for seed in 0..10 {
                let rho = band_limited_noise(grid(), 10, seed);
                let r = sample(&state(rho), &op, &bank, &DiagnosticsConfig::default());
                worst = worst.max(r.dir_crit / r.proxy_norm);
            }
        }
        assert!(worst <= 10.0, "{worst}");
    }

    #[test]
    fn tail_fraction_counts_corner_modes() {
        let g = grid();
        let mut hat = forward_transform(&RealField::constant(g, 5.0)).unwrap();
        assert_eq!(spectral_tail_fraction(&hat), 0.0);
        hat.set_coeff(&[1, 0, 0], 1.0.into());
        hat.set_coeff(&[10, 10, 0], 1.0.into());
        assert!((spectral_tail_fraction(&hat) - 0.5).abs() < 1e-15);
    }

    fn synthetic(time: f64, v: f64, norm: f64) -> Record {
        Record {
            time,
            dt: 0.1,
            l2: 1.0,
            linf: 1.0,
            lp: vec![],
            besov: vec![],
            v,
            int_v: 0.0,
            dir_crit: 2.0 * v,
            int_dir_crit: 0.0,
            tail_frac: 0.0,
            proxy_norm: norm,
            u_linf: 1.0,
            grad_u_linf: v,
            proxy_state: ProxyState::Ok,
        }
    }

    #[test]
    fn lifespan_uses_first_sampled_crossing() {
        let cfg = DiagnosticsConfig {
            lp: vec![],
            besov: vec![],
            ..DiagnosticsConfig::default()
        };
        let mut s = DiagnosticsSeries::new(&cfg);
        s.push(synthetic(0.0, 1.0, 1.0));
        s.push(synthetic(0.5, 1.0, 50.0));
        assert_eq!(lifespan_estimate(&s).t_star_proxy, None);
        assert_eq!(s.push(synthetic(1.0, 1.0, 150.0)), ProxyState::FiredNorm);
        s.push(synthetic(1.5, 1.0, 300.0));
        let l = lifespan_estimate(&s);
        assert_eq!(l.t_star_proxy, Some(1.0));
        assert_eq!(l.trigger, Some(ProxyState::FiredNorm));
        let rep = criterion_report(&s);
        assert_eq!(rep.at_fire.unwrap().int_v, 1.0);
        assert_eq!(rep.at_fire.unwrap().int_dir_crit, 2.0);
    }

    #[test]
    fn integrals_are_trapezoidal_and_csv_is_well_formed() {
        let mut s = DiagnosticsSeries::new(&DiagnosticsConfig {
            lp: vec![4.0],
            besov: vec![BesovParams::new(0.5, f64::INFINITY, 1.0)],
            ..DiagnosticsConfig::default()
        });
        for (i, v) in [1.0, 3.0, 2.0].iter().enumerate() {
            let mut r = synthetic(i as f64, *v, 1.0);
            r.lp = vec![1.0];
            r.besov = vec![1.0];
            s.push(r);
        }
        let ints: Vec<f64> = s.records().iter().map(|r| r.int_v).collect();
        assert_eq!(ints, vec![0.0, 2.0, 4.5]);
        s.push_diverged(3.0, 0.1);
        assert_eq!(s.last().unwrap().int_v, 4.5);
        assert_eq!(lifespan_estimate(&s).trigger, Some(ProxyState::Diverged));

        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "time,dt,l2,linf,lp:4,besov:0.5_inf_1,V,int_V,dir_crit,int_dir_crit,tail_frac,proxy_state"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 12);
        assert_eq!(row[0], "0.0000000000000000e0");
        assert_eq!(row[11], "ok");
    }

    #[test]
    fn trapezoid_is_second_order_on_smooth_samples() {
        let cfg = DiagnosticsConfig {
            lp: vec![],
            besov: vec![],
            ..DiagnosticsConfig::default()
        };
        let error = |steps: usize| {
            let mut s = DiagnosticsSeries::new(&cfg);
            for i in 0..=steps {
                let t = i as f64 / steps as f64;
                let mut r = synthetic(t, t.exp(), 1.0);
                r.dir_crit = t.cos();
                s.push(r);
            }
            let last = s.last().unwrap();
            (
                (last.int_v - (1f64.exp() - 1.0)).abs(),
                (last.int_dir_crit - 1f64.sin()).abs(),
            )
        };
        for steps in [8, 16, 32] {
            let (coarse, fine) = (error(steps), error(2 * steps));
            assert!((3.9..4.1).contains(&(coarse.0 / fine.0)));
            assert!((3.9..4.1).contains(&(coarse.1 / fine.1)));
        }
    }

    #[test]
    #[should_panic(expected = "sample times must increase")]
    fn non_increasing_time_panics() {
        let mut s = DiagnosticsSeries::new(&DiagnosticsConfig::default());
        let mut r = synthetic(1.0, 1.0, 1.0);
        r.lp = vec![1.0];
        r.besov = vec![1.0];
        s.push(r.clone());
        s.push(r);
    }
}
