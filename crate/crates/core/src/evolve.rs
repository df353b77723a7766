//! Method-of-lines evolution of one azimuthal mode of the transformed wave
//! equation on the (t, r*, theta) grid with classical RK4.
//!
//! The semi-discrete system is `N^-2 u_tt = -K u - i m B u_t` with K
//! symmetric (staggered radial differences, flux-form angular operator) and
//! B real diagonal, so the discrete energy of d_t is conserved exactly
//! before time discretisation. The first and last radial rows are frozen.

use std::sync::Arc;

use crate::energy::{EnergyLedger, LedgerRecorder, LedgerOptions};
use crate::error::{KerrError, Result};
use crate::exec::{self, ExecPolicy};
use crate::geometry::{KerrParams, RadialMap};
use crate::symmetry::{angular_row, ModeField, ModeGrid, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Writes d_t v into `out` for the state (u, v).
pub fn acceleration_into(grid: &ModeGrid, u: &[C64], v: &[C64], out: &mut [C64], policy: ExecPolicy) {
    let nt = grid.n_theta();
    let nr = grid.n_r();
    let m = grid.m();
    let (a, mass) = (grid.params().spin(), grid.params().mass());
    let inv_dr2 = 1.0 / (grid.dr_star * grid.dr_star);
    let mf = m as f64;
    exec::for_each_row(policy, out, nt, |i, row| {
        if i == 0 || i + 1 == nr {
            row.fill(ZERO);
            return;
        }
        let (lo, mid, hi) = ((i - 1) * nt, i * nt, (i + 1) * nt);
        angular_row(grid, m, &u[mid..mid + nt], row);
        let p2 = grid.p[i] * grid.p[i];
        let drag = C64::new(0.0, 4.0 * a * mass * grid.r[i] * mf / p2);
        let pot = mf * mf * (grid.delta[i] - a * a) / p2 + grid.v_pot[i];
        let vq = grid.v_q[i];
        for j in 0..nt {
            let k = mid + j;
            let d2 = (u[hi + j] - u[k] * 2.0 + u[lo + j]) * inv_dr2;
            let acc = d2 - drag * v[k] + row[j] * vq - u[k] * pot;
            row[j] = acc / grid.n_inv_sq[k];
        }
    });
}

/// d_t v for the state (u, v).
pub fn acceleration(grid: &ModeGrid, u: &[C64], v: &[C64], policy: ExecPolicy) -> Result<Vec<C64>> {
    for len in [u.len(), v.len()] {
        if len != grid.len() {
            return Err(KerrError::Shape { expected: grid.len(), got: len });
        }
    }
    let mut out = vec![ZERO; grid.len()];
    acceleration_into(grid, u, v, &mut out, policy);
    Ok(out)
}

/// Right-hand side (d_t u, d_t v) of the first-order system.
pub fn rhs(field: &ModeField, policy: ExecPolicy) -> Result<(Vec<C64>, Vec<C64>)> {
    let dv = acceleration(&field.grid, &field.u, &field.v, policy)?;
    if dv.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(KerrError::NonFinite("rhs"));
    }
    Ok((field.v.clone(), dv))
}

/// Largest stable step for Courant factor `cfl`: the smaller of dr* and the
/// angular limit (r^2 + a^2) dtheta / sqrt(Delta N^2 (1 + m^2)).
pub fn stable_dt(grid: &ModeGrid, cfl: f64) -> f64 {
    let nt = grid.n_theta();
    let stiff = (1.0 + (grid.m() * grid.m()) as f64).sqrt();
    let mut best = grid.dr_star;
    for i in 0..grid.n_r() {
        for j in 0..nt {
            let n2 = 1.0 / grid.n_inv_sq[i * nt + j];
            let speed = (grid.delta[i] * n2).sqrt() * stiff;
            if speed > 0.0 {
                best = best.min(grid.p[i] * grid.dtheta / speed);
            }
        }
    }
    cfl * best
}

/// Classical four-stage Runge-Kutta with preallocated stage buffers.
#[derive(Debug)]
pub struct Rk4 {
    grid: Arc<ModeGrid>,
    policy: ExecPolicy,
    ut: Vec<C64>,
    vt: Vec<C64>,
    acc: [Vec<C64>; 4],
    vs: [Vec<C64>; 3],
}

impl Rk4 {
    pub fn new(grid: Arc<ModeGrid>, policy: ExecPolicy) -> Self {
        let n = grid.len();
        Self {
            grid,
            policy,
            ut: vec![ZERO; n],
            vt: vec![ZERO; n],
            acc: [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]],
            vs: [vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]],
        }
    }

    /// Advances (u, v) by dt in place.
    pub fn step(&mut self, u: &mut [C64], v: &mut [C64], dt: f64) {
        let g = &*self.grid;
        let p = self.policy;
        let nt = g.n_theta();
        acceleration_into(g, u, v, &mut self.acc[0], p);
        for stage in 0..3 {
            let c = if stage == 2 { dt } else { 0.5 * dt };
            let (vprev, aprev): (&[C64], &[C64]) = if stage == 0 { (v, &self.acc[0]) } else { (&self.vs[stage - 1], &self.acc[stage]) };
            exec::for_each_row2(p, &mut self.ut, &mut self.vt, nt, |i, ru, rv| {
                let base = i * nt;
                for j in 0..nt {
                    let k = base + j;
                    ru[j] = u[k] + vprev[k] * c;
                    rv[j] = v[k] + aprev[k] * c;
                }
            });
            self.vs[stage].copy_from_slice(&self.vt);
            acceleration_into(g, &self.ut, &self.vt, &mut self.acc[stage + 1], p);
        }
        let w = dt / 6.0;
        let (a, vs) = (&self.acc, &self.vs);
        exec::for_each_row2(p, u, v, nt, |i, ru, rv| {
            let base = i * nt;
            for j in 0..nt {
                let k = base + j;
                ru[j] += (rv[j] + (vs[0][k] + vs[1][k]) * 2.0 + vs[2][k]) * w;
                rv[j] += (a[0][k] + (a[1][k] + a[2][k]) * 2.0 + a[3][k]) * w;
            }
        });
    }
}

/// One RK4 step of a field.
pub fn step_rk4(field: &ModeField, dt: f64, policy: ExecPolicy) -> ModeField {
    let mut out = field.clone();
    Rk4::new(field.grid.clone(), policy).step(&mut out.u, &mut out.v, dt);
    out
}

/// A point at which the field is sampled every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observer {
    pub r: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub params: KerrParams,
    pub m: i32,
    pub r_star_min: f64,
    pub r_star_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub observers: Vec<Observer>,
    /// Spacing of energy samples.
    pub sample_dt: f64,
}

/// Margin between the causal reach of the boundaries and any observer.
pub const ISOLATION_MARGIN: f64 = 10.0;

impl EvolutionConfig {
    /// Checks the Courant factor, times and causal isolation of every
    /// observer from both radial boundaries.
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(KerrError::InvalidArgument(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(KerrError::InvalidArgument("t_end must be finite and >= 0".into()));
        }
        if !(self.sample_dt > 0.0) {
            return Err(KerrError::InvalidArgument("sample_dt must be positive".into()));
        }
        let map = RadialMap::new(self.params);
        let m = self.params.mass();
        for o in &self.observers {
            if !(o.theta > 0.0 && o.theta < std::f64::consts::PI) {
                return Err(KerrError::InvalidArgument(format!("observer theta {} outside (0, pi)", o.theta)));
            }
            let rs = map.tortoise(o.r)?;
            let reach = self.t_end + ISOLATION_MARGIN * m;
            if self.r_star_min > rs - reach || self.r_star_max < rs + reach {
                return Err(KerrError::InvalidArgument(format!(
                    "observer at r = {} is not causally isolated: need r* in [{}, {}] inside the grid",
                    o.r,
                    rs - reach,
                    rs + reach
                )));
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<ModeGrid> {
        ModeGrid::new(self.params, self.m, self.r_star_min, self.r_star_max, self.n_r, self.n_theta)
    }
}

/// Associated Legendre function P_l^m(x) for 0 <= m <= l.
pub fn assoc_legendre(l: u32, m: u32, x: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for k in 0..m {
        pmm *= -(2.0 * k as f64 + 1.0) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2.0 * m as f64 + 1.0) * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut p = 0.0;
    for ll in (m + 2)..=l {
        p = (x * (2.0 * ll as f64 - 1.0) * pm1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pm1;
        pm1 = p;
    }
    p
}

/// Kind of time derivative given to Gaussian data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Launch {
    /// v = 0.
    #[default]
    TimeSymmetric,
    /// v = d_{r*} u, a packet moving towards the horizon.
    Ingoing,
}

/// `u = A exp(-(r* - r*_0)^2 / (2 sigma^2)) Y(theta)` where Y is
/// P_l^|m|(cos theta) scaled to unit maximum over the theta nodes.
pub fn gaussian_initial_data(
    grid: &Arc<ModeGrid>,
    center: f64,
    sigma: f64,
    amplitude: f64,
    l: u32,
    launch: Launch,
) -> Result<ModeField> {
    let am = grid.m().unsigned_abs();
    if l < am {
        return Err(KerrError::InvalidArgument(format!("need l >= |m|, got l = {l}, m = {}", grid.m())));
    }
    if !(sigma > 0.0) {
        return Err(KerrError::InvalidArgument("sigma must be positive".into()));
    }
    let ang: Vec<f64> = grid.theta.iter().map(|t| assoc_legendre(l, am, t.cos())).collect();
    let peak = ang.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let nt = grid.n_theta();
    let mut u = Vec::with_capacity(grid.len());
    let mut v = Vec::with_capacity(grid.len());
    for &rs in &grid.r_star {
        let y = (rs - center) / sigma;
        let g = amplitude * (-0.5 * y * y).exp();
        let dg = -g * y / sigma;
        for a in ang.iter().take(nt) {
            u.push(C64::new(g * a / peak, 0.0));
            v.push(match launch {
                Launch::TimeSymmetric => ZERO,
                Launch::Ingoing => C64::new(dg * a / peak, 0.0),
            });
        }
    }
    ModeField::new(grid.clone(), u, v)
}

/// Observer samples; `u[k][s]` is observer k at time `t[s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub observers: Vec<Observer>,
    pub r_star: Vec<f64>,
    /// sqrt(r^2 + a^2) at each observer.
    pub psi_scale: Vec<f64>,
    pub t: Vec<f64>,
    pub u: Vec<Vec<C64>>,
}

impl TimeSeries {
    pub fn abs_psi(&self, k: usize) -> Vec<f64> {
        self.u[k].iter().map(|z| z.norm() / self.psi_scale[k]).collect()
    }
}

/// Bilinear interpolation weights for a point of the grid.
#[derive(Debug, Clone, Copy)]
struct Stencil {
    i: usize,
    j: usize,
    wr: f64,
    wt: f64,
}

fn stencil(grid: &ModeGrid, r_star: f64, theta: f64) -> Stencil {
    let nr = grid.n_r();
    let nt = grid.n_theta();
    let fr = ((r_star - grid.r_star[0]) / grid.dr_star).clamp(0.0, (nr - 1) as f64);
    let i = (fr.floor() as usize).min(nr - 2);
    let ft = (theta / grid.dtheta - 0.5).clamp(0.0, (nt - 1) as f64);
    let j = (ft.floor() as usize).min(nt - 2);
    Stencil { i, j, wr: fr - i as f64, wt: ft - j as f64 }
}

fn interpolate(grid: &ModeGrid, u: &[C64], s: Stencil) -> C64 {
    let nt = grid.n_theta();
    let at = |i: usize, j: usize| u[i * nt + j];
    let lo = at(s.i, s.j) * (1.0 - s.wt) + at(s.i, s.j + 1) * s.wt;
    let hi = at(s.i + 1, s.j) * (1.0 - s.wt) + at(s.i + 1, s.j + 1) * s.wt;
    lo * (1.0 - s.wr) + hi * s.wr
}

#[derive(Debug, Clone)]
pub struct EvolutionOutput {
    pub series: TimeSeries,
    pub ledger: EnergyLedger,
    pub final_field: ModeField,
    pub dt: f64,
    pub steps: usize,
}

/// A run stopped by a non-finite value.
#[derive(Debug, Clone)]
pub struct Aborted {
    pub t: f64,
    pub reason: String,
    pub last_good: ModeField,
}

#[derive(Debug, Clone)]
pub enum EvolveError {
    Invalid(KerrError),
    Aborted(Box<Aborted>),
}

impl std::fmt::Display for EvolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvolveError::Invalid(e) => write!(f, "{e}"),
            EvolveError::Aborted(a) => write!(f, "evolution aborted at t = {}: {}", a.t, a.reason),
        }
    }
}

impl std::error::Error for EvolveError {}

impl From<KerrError> for EvolveError {
    fn from(e: KerrError) -> Self {
        EvolveError::Invalid(e)
    }
}

fn all_finite(x: &[C64]) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Marches `init` to `t_end`, sampling observers every step and the energy
/// ledger every `sample_dt`.
pub fn evolve(
    config: &EvolutionConfig,
    init: ModeField,
    options: &LedgerOptions,
    policy: ExecPolicy,
) -> std::result::Result<EvolutionOutput, EvolveError> {
    config.validate()?;
    let grid = init.grid.clone();
    if grid.n_r() != config.n_r || grid.n_theta() != config.n_theta || grid.m() != config.m || *grid.params() != config.params {
        return Err(KerrError::InvalidArgument("initial data grid does not match the configuration".into()).into());
    }
    let dt_max = stable_dt(&grid, config.cfl);
    let steps = if config.t_end == 0.0 { 0 } else { (config.t_end / dt_max).ceil() as usize };
    let dt = if steps == 0 { 0.0 } else { config.t_end / steps as f64 };
    let stride = if dt == 0.0 { 1 } else { ((config.sample_dt / dt).round() as usize).max(1) };

    let map = RadialMap::new(config.params);
    let a2 = config.params.spin().powi(2);
    let mut obs_rs = Vec::new();
    let mut stencils = Vec::new();
    for o in &config.observers {
        let rs = map.tortoise(o.r)?;
        obs_rs.push(rs);
        stencils.push(stencil(&grid, rs, o.theta));
    }
    let mut series = TimeSeries {
        observers: config.observers.clone(),
        r_star: obs_rs,
        psi_scale: config.observers.iter().map(|o| (o.r * o.r + a2).sqrt()).collect(),
        t: Vec::with_capacity(steps + 1),
        u: vec![Vec::with_capacity(steps + 1); config.observers.len()],
    };
    let mut recorder = LedgerRecorder::new(grid.clone(), options.clone(), policy)?;

    let mut field = init;
    let mut last_good = field.clone();
    let mut rk = Rk4::new(grid.clone(), policy);
    let sample = |series: &mut TimeSeries, t: f64, u: &[C64]| {
        series.t.push(t);
        for (k, s) in stencils.iter().enumerate() {
            series.u[k].push(interpolate(&grid, u, *s));
        }
    };
    sample(&mut series, 0.0, &field.u);
    recorder.record(0.0, &field)?;
    for n in 1..=steps {
        rk.step(&mut field.u, &mut field.v, dt);
        let t = dt * n as f64;
        let check = n % stride == 0 || n == steps;
        if check {
            if !(all_finite(&field.u) && all_finite(&field.v)) {
                return Err(EvolveError::Aborted(Box::new(Aborted {
                    t,
                    reason: "non-finite field values".into(),
                    last_good,
                })));
            }
            recorder.record(t, &field)?;
            last_good = field.clone();
        }
        sample(&mut series, t, &field.u);
    }
    if series.u.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(EvolveError::Aborted(Box::new(Aborted {
            t: config.t_end,
            reason: "non-finite observer samples".into(),
            last_good,
        })));
    }
    Ok(EvolutionOutput { series, ledger: recorder.finish(), final_field: field, dt, steps })
}
