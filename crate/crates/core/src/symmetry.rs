//! Discrete symmetry operators for one azimuthal mode on the (r*, theta)
//! grid: the angular part of the Carter operator, the full Carter operator
//! per mode, the coefficients of the radial operator, and the family of
//! fields obtained by applying the generators of order at most two.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{KerrError, Result};
use crate::evolve;
use crate::exec::{self, ExecPolicy};
use crate::geometry::{KerrParams, RadialMap};

pub type C64 = Complex64;

/// Uniform r* nodes, cell-centred theta nodes and cached background data.
/// Arrays over the grid are row-major with one row per r* node.
#[derive(Debug, Clone)]
pub struct ModeGrid {
    params: KerrParams,
    m: i32,
    pub r_star: Vec<f64>,
    pub theta: Vec<f64>,
    pub dr_star: f64,
    pub dtheta: f64,
    // per radial node
    pub r: Vec<f64>,
    pub delta: Vec<f64>,
    /// r^2 + a^2.
    pub p: Vec<f64>,
    pub v_pot: Vec<f64>,
    pub v_q: Vec<f64>,
    // per theta node and face
    pub sin_c: Vec<f64>,
    pub sin_f: Vec<f64>,
    pub cot2: Vec<f64>,
    // per grid node
    /// 1 - a^2 sin^2 theta V_Q.
    pub n_inv_sq: Vec<f64>,
    pub omega_perp: Vec<f64>,
    pub h_phiphi: Vec<f64>,
}

impl ModeGrid {
    pub fn new(params: KerrParams, m: i32, r_star_min: f64, r_star_max: f64, n_r: usize, n_theta: usize) -> Result<Self> {
        if !(r_star_min.is_finite() && r_star_max.is_finite() && r_star_max > r_star_min) {
            return Err(KerrError::InvalidArgument("need finite r*_min < r*_max".into()));
        }
        if n_r < 3 {
            return Err(KerrError::InvalidArgument("need at least 3 radial nodes".into()));
        }
        if n_theta < 8 {
            return Err(KerrError::InvalidArgument("need at least 8 theta nodes".into()));
        }
        let map = RadialMap::new(params);
        let a2 = params.spin() * params.spin();
        let gap = params.r_plus() - params.r_minus();
        let dr_star = (r_star_max - r_star_min) / (n_r - 1) as f64;
        let r_star: Vec<f64> = (0..n_r).map(|i| r_star_min + dr_star * i as f64).collect();
        let mut r = Vec::with_capacity(n_r);
        let mut delta = Vec::with_capacity(n_r);
        for &rs in &r_star {
            let x = map.inverse_tortoise_offset(rs)?;
            r.push(params.r_plus() + x);
            delta.push(x * (x + gap));
        }
        let p: Vec<f64> = r.iter().map(|&r| r * r + a2).collect();
        let v_q: Vec<f64> = delta.iter().zip(&p).map(|(d, p)| d / (p * p)).collect();
        let v_pot: Vec<f64> = (0..n_r)
            .map(|i| {
                let (m_, ri) = (params.mass(), r[i]);
                delta[i] * (2.0 * m_ * ri.powi(3) + ri * ri * a2 - 4.0 * m_ * ri * a2 + a2 * a2) / p[i].powi(4)
            })
            .collect();
        let dtheta = std::f64::consts::PI / n_theta as f64;
        let theta: Vec<f64> = (0..n_theta).map(|j| (j as f64 + 0.5) * dtheta).collect();
        let sin_c: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
        let sin_f: Vec<f64> = (0..=n_theta)
            .map(|k| if k == 0 || k == n_theta { 0.0 } else { (k as f64 * dtheta).sin() })
            .collect();
        let cot2: Vec<f64> = theta.iter().map(|t| (t.cos() / t.sin()).powi(2)).collect();
        let mut n_inv_sq = Vec::with_capacity(n_r * n_theta);
        let mut omega_perp = Vec::with_capacity(n_r * n_theta);
        let mut h_phiphi = Vec::with_capacity(n_r * n_theta);
        for i in 0..n_r {
            for (j, &th) in theta.iter().enumerate() {
                let s2 = sin_c[j] * sin_c[j];
                n_inv_sq.push(1.0 - a2 * s2 * v_q[i]);
                let pi = p[i] * p[i] - a2 * s2 * delta[i];
                omega_perp.push(2.0 * params.spin() * params.mass() * r[i] / pi);
                let corr = a2 * s2 * (r[i] * r[i] + 2.0 * params.mass() * r[i] + a2 * th.cos().powi(2)) / pi;
                h_phiphi.push(v_q[i] * (1.0 - corr) / s2);
            }
        }
        Ok(Self {
            params,
            m,
            r_star,
            theta,
            dr_star,
            dtheta,
            r,
            delta,
            p,
            v_pot,
            v_q,
            sin_c,
            sin_f,
            cot2,
            n_inv_sq,
            omega_perp,
            h_phiphi,
        })
    }

    pub fn params(&self) -> &KerrParams {
        &self.params
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn n_r(&self) -> usize {
        self.r_star.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn len(&self) -> usize {
        self.n_r() * self.n_theta()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same grid for another azimuthal mode.
    pub fn with_mode(&self, m: i32) -> Self {
        Self { m, ..self.clone() }
    }

    /// Coefficient of the phi-phi derivative in the radial operator divided
    /// by (r^2 + a^2)^2, including the cot^2 part of the Carter operator:
    /// (Delta - a^2)/(r^2 + a^2)^2 + V_Q cot^2 theta.
    pub fn g_phiphi(&self, i: usize, j: usize) -> f64 {
        let a2 = self.params.spin().powi(2);
        (self.delta[i] - a2) / (self.p[i] * self.p[i]) + self.v_q[i] * self.cot2[j]
    }
}

/// Complex field and its time derivative on a grid.
#[derive(Debug, Clone)]
pub struct ModeField {
    pub grid: Arc<ModeGrid>,
    pub u: Vec<C64>,
    pub v: Vec<C64>,
}

impl ModeField {
    pub fn new(grid: Arc<ModeGrid>, u: Vec<C64>, v: Vec<C64>) -> Result<Self> {
        let n = grid.len();
        for len in [u.len(), v.len()] {
            if len != n {
                return Err(KerrError::Shape { expected: n, got: len });
            }
        }
        if u.iter().chain(&v).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(KerrError::NonFinite("mode field"));
        }
        Ok(Self { grid, u, v })
    }

    pub fn zeros(grid: Arc<ModeGrid>) -> Self {
        let n = grid.len();
        Self { grid, u: vec![C64::new(0.0, 0.0); n], v: vec![C64::new(0.0, 0.0); n] }
    }

    /// psi = u / sqrt(r^2 + a^2) at node (i, j).
    pub fn psi(&self, i: usize, j: usize) -> C64 {
        self.u[i * self.grid.n_theta() + j] / self.grid.p[i].sqrt()
    }
}

/// Applies the per-mode angular operator
/// `(1/sin) d/dtheta (sin d/dtheta) - m^2 cot^2` to one theta row.
///
/// The flux form puts sin(0) = sin(pi) = 0 on the pole faces, so the parity
/// ghost values u(-theta) = (-1)^m u(theta) enter with zero weight.
pub fn angular_row(grid: &ModeGrid, m: i32, u: &[C64], out: &mut [C64]) {
    let n = grid.n_theta();
    let inv = 1.0 / (grid.dtheta * grid.dtheta);
    let m2 = (m * m) as f64;
    for j in 0..n {
        let up = if j + 1 < n { u[j + 1] - u[j] } else { C64::new(0.0, 0.0) };
        let dn = if j > 0 { u[j] - u[j - 1] } else { C64::new(0.0, 0.0) };
        out[j] = (up * grid.sin_f[j + 1] - dn * grid.sin_f[j]) * (inv / grid.sin_c[j]) - u[j] * (m2 * grid.cot2[j]);
    }
}

/// The angular operator over the whole grid.
pub fn angular_operator(grid: &ModeGrid, u: &[C64], policy: ExecPolicy) -> Result<Vec<C64>> {
    if u.len() != grid.len() {
        return Err(KerrError::Shape { expected: grid.len(), got: u.len() });
    }
    let nt = grid.n_theta();
    let mut out = vec![C64::new(0.0, 0.0); u.len()];
    exec::for_each_row(policy, &mut out, nt, |i, row| angular_row(grid, grid.m(), &u[i * nt..(i + 1) * nt], row));
    Ok(out)
}

/// Carter operator for one mode: the angular operator plus
/// `a^2 sin^2 theta` times the supplied second time derivative.
pub fn carter_apply(grid: &ModeGrid, u: &[C64], dtt: &[C64], policy: ExecPolicy) -> Result<Vec<C64>> {
    if dtt.len() != grid.len() {
        return Err(KerrError::Shape { expected: grid.len(), got: dtt.len() });
    }
    let mut out = angular_operator(grid, u, policy)?;
    let a2 = grid.params().spin().powi(2);
    let nt = grid.n_theta();
    for (k, o) in out.iter_mut().enumerate() {
        let s = grid.sin_c[k % nt];
        *o += dtt[k] * (a2 * s * s);
    }
    Ok(out)
}

/// Coefficients of the radial operator over the second-order generators
/// (d_t^2, d_t d_phi, d_phi^2, Q).
pub fn curly_r_coefficients(params: &KerrParams, r: f64) -> Result<[f64; 4]> {
    params.check_exterior(r)?;
    let (m, a) = (params.mass(), params.spin());
    let p = r * r + a * a;
    let d = params.delta(r);
    Ok([-p * p, -4.0 * a * m * r, d - a * a, d])
}

/// The generators of order at most two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymmetryOp {
    Identity,
    Dt,
    Dphi,
    Dtt,
    DtDphi,
    Dphiphi,
    Carter,
}

impl SymmetryOp {
    pub const ALL: [SymmetryOp; 7] = [
        SymmetryOp::Identity,
        SymmetryOp::Dt,
        SymmetryOp::Dphi,
        SymmetryOp::Dtt,
        SymmetryOp::DtDphi,
        SymmetryOp::Dphiphi,
        SymmetryOp::Carter,
    ];

    pub fn order(self) -> usize {
        match self {
            SymmetryOp::Identity => 0,
            SymmetryOp::Dt | SymmetryOp::Dphi => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SymmetryOp::Identity => "id",
            SymmetryOp::Dt => "dt",
            SymmetryOp::Dphi => "dphi",
            SymmetryOp::Dtt => "dtt",
            SymmetryOp::DtDphi => "dtdphi",
            SymmetryOp::Dphiphi => "dphiphi",
            SymmetryOp::Carter => "Q",
        }
    }
}

/// Applies every generator of order <= 2 to the data, returning each image
/// as independent data (S u, S v). Time derivatives come from the equation.
pub fn build_symmetry_family(field: &ModeField, policy: ExecPolicy) -> Result<Vec<(SymmetryOp, ModeField)>> {
    let grid = &field.grid;
    let (u, v) = (&field.u, &field.v);
    let w = evolve::acceleration(grid, u, v, policy)?;
    let w3 = evolve::acceleration(grid, v, &w, policy)?;
    let im = C64::new(0.0, grid.m() as f64);
    let m2 = (grid.m() * grid.m()) as f64;
    let scale = |x: &[C64], k: C64| -> Vec<C64> { x.iter().map(|z| z * k).collect() };
    let q_u = carter_apply(grid, u, &w, policy)?;
    let q_v = carter_apply(grid, v, &w3, policy)?;
    let mk = |a: Vec<C64>, b: Vec<C64>| ModeField { grid: grid.clone(), u: a, v: b };
    Ok(vec![
        (SymmetryOp::Identity, field.clone()),
        (SymmetryOp::Dt, mk(v.clone(), w.clone())),
        (SymmetryOp::Dphi, mk(scale(u, im), scale(v, im))),
        (SymmetryOp::Dtt, mk(w.clone(), w3.clone())),
        (SymmetryOp::DtDphi, mk(scale(v, im), scale(&w, im))),
        (SymmetryOp::Dphiphi, mk(scale(u, C64::new(-m2, 0.0)), scale(v, C64::new(-m2, 0.0)))),
        (SymmetryOp::Carter, mk(q_u, q_v)),
    ])
}

/// Operator combination `eps d_t^2 + d_phi^2 + Q` applied through the family;
/// `eps = 1` gives `d_t^2 + d_phi^2 + Q`.
pub fn l_eps(family: &[(SymmetryOp, ModeField)], eps: f64) -> Result<Vec<C64>> {
    let get = |op: SymmetryOp| {
        family
            .iter()
            .find(|(o, _)| *o == op)
            .map(|(_, f)| &f.u)
            .ok_or_else(|| KerrError::InvalidArgument(format!("family lacks {}", op.name())))
    };
    let (dtt, dpp, q) = (get(SymmetryOp::Dtt)?, get(SymmetryOp::Dphiphi)?, get(SymmetryOp::Carter)?);
    Ok((0..dtt.len()).map(|k| dtt[k] * eps + dpp[k] + q[k]).collect())
}
