//! Energies and spacetime-integrated diagnostics of mode fields: the
//! canonical energies of d_t, T_perp, T_chi and the K field (with its
//! q-correction), the higher-order energies over the symmetry family, and the
//! Morawetz and light-cone-localised bulk integrands.
//!
//! Gradient terms use staggered differences averaged onto nodes, which makes
//! the energy of d_t an exact invariant of the semi-discrete system.

use std::sync::Arc;

use crate::error::{KerrError, Result};
use crate::exec::{self, ExecPolicy};
use crate::geodesics::{photon_orbit_band_with, PhotonBand};
use crate::geometry::{omega_h, smooth_step, BlendProfile};
use crate::symmetry::{build_symmetry_family, ModeField, ModeGrid, SymmetryOp, C64};

use std::f64::consts::PI;

/// The multiplier whose canonical energy is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyKind {
    /// d_t.
    Dt,
    /// T_perp = d_t + omega_perp d_phi.
    TPerp,
    /// T_chi = d_t + chi omega_H d_phi.
    TChi(BlendProfile),
    /// (t^2 + r*^2 + 1) T_chi + 2 t r* N^2 d_{r*}, at time t.
    K { t: f64, blend: BlendProfile },
}

struct NodeData {
    u: C64,
    t_perp: C64,
    n_inv_sq: f64,
    lagrangian: f64,
    du: C64,
}

/// |d_{r*} u|^2 and |d_theta u|^2 from face differences averaged onto the
/// node, plus the centred r* derivative.
fn gradients(grid: &ModeGrid, u: &[C64], i: usize, j: usize) -> (f64, f64, C64) {
    let nt = grid.n_theta();
    let nr = grid.n_r();
    let k = i * nt + j;
    let up = if i + 1 < nr { (u[k + nt] - u[k]).norm_sqr() } else { 0.0 };
    let dn = if i > 0 { (u[k] - u[k - nt]).norm_sqr() } else { 0.0 };
    let gr = 0.5 * (up + dn) / (grid.dr_star * grid.dr_star);
    let tp = if j + 1 < nt { grid.sin_f[j + 1] * (u[k + 1] - u[k]).norm_sqr() } else { 0.0 };
    let tn = if j > 0 { grid.sin_f[j] * (u[k] - u[k - 1]).norm_sqr() } else { 0.0 };
    let gt = 0.5 * (tp + tn) / (grid.dtheta * grid.dtheta * grid.sin_c[j]);
    let du = match (i > 0, i + 1 < nr) {
        (true, true) => (u[k + nt] - u[k - nt]) / (2.0 * grid.dr_star),
        (false, true) => (u[k + nt] - u[k]) / grid.dr_star,
        (true, false) => (u[k] - u[k - nt]) / grid.dr_star,
        _ => C64::new(0.0, 0.0),
    };
    (gr, gt, du)
}

fn node(grid: &ModeGrid, f: &ModeField, i: usize, j: usize) -> NodeData {
    let k = i * grid.n_theta() + j;
    let m = grid.m() as f64;
    let u = f.u[k];
    let t_perp = f.v[k] + C64::new(0.0, m * grid.omega_perp[k]) * u;
    let (gr, gt, du) = gradients(grid, &f.u, i, j);
    let n_inv_sq = grid.n_inv_sq[k];
    let lagrangian = 0.5
        * (-n_inv_sq * t_perp.norm_sqr()
            + gr
            + grid.v_q[i] * gt
            + grid.h_phiphi[k] * m * m * u.norm_sqr()
            + grid.v_pot[i] * u.norm_sqr());
    NodeData { u, t_perp, n_inv_sq, lagrangian, du }
}

fn cell_weight(grid: &ModeGrid, j: usize) -> f64 {
    2.0 * PI * grid.dr_star * grid.dtheta * grid.sin_c[j]
}

/// Pointwise energy density (and q-correction density for K) at node (i, j).
fn densities(grid: &ModeGrid, f: &ModeField, kind: &EnergyKind, i: usize, j: usize) -> (f64, f64) {
    let d = node(grid, f, i, j);
    let k = i * grid.n_theta() + j;
    let m = grid.m() as f64;
    let om_h = omega_h(grid.params());
    let v = f.v[k];
    let x_of = |omega: f64| v + C64::new(0.0, m * omega) * d.u;
    match kind {
        EnergyKind::Dt => (d.n_inv_sq * (d.t_perp.conj() * v).re + d.lagrangian, 0.0),
        EnergyKind::TPerp => (d.n_inv_sq * d.t_perp.norm_sqr() + d.lagrangian, 0.0),
        EnergyKind::TChi(blend) => {
            let chi = blend.eval(grid.r[i]).0;
            (d.n_inv_sq * (d.t_perp.conj() * x_of(chi * om_h)).re + d.lagrangian, 0.0)
        }
        EnergyKind::K { t, blend } => {
            let chi = blend.eval(grid.r[i]).0;
            let rs = grid.r_star[i];
            let kt = t * t + rs * rs + 1.0;
            let n2 = 1.0 / d.n_inv_sq;
            let ku = x_of(chi * om_h) * kt + d.du * (2.0 * t * rs * n2);
            let vec = d.n_inv_sq * (d.t_perp.conj() * ku).re + kt * d.lagrangian;
            let q = t * (n2 - 1.0);
            let qd = d.n_inv_sq * (q * (d.t_perp.conj() * d.u).re - 0.5 * (n2 - 1.0) * d.u.norm_sqr());
            (vec, qd)
        }
    }
}

/// Energy density of `kind` over the whole grid.
pub fn energy_density(f: &ModeField, kind: &EnergyKind, policy: ExecPolicy) -> Vec<f64> {
    let g = &*f.grid;
    let nt = g.n_theta();
    let mut out = vec![0.0; g.len()];
    exec::for_each_row(policy, &mut out, nt, |i, row| {
        for (j, o) in row.iter_mut().enumerate() {
            *o = densities(g, f, kind, i, j).0;
        }
    });
    out
}

/// Integrated energy and q-correction: sum over nodes with weight
/// 2 pi dr* dtheta sin(theta).
pub fn energy_parts(f: &ModeField, kind: &EnergyKind, policy: ExecPolicy) -> (f64, f64) {
    let g = &*f.grid;
    let nt = g.n_theta();
    let rows = exec::map_indices(policy, g.n_r(), |i| {
        let (mut a, mut b) = (0.0, 0.0);
        for j in 0..nt {
            let (x, y) = densities(g, f, kind, i, j);
            let w = cell_weight(g, j);
            a += w * x;
            b += w * y;
        }
        (a, b)
    });
    let a: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.1).collect();
    (exec::pairwise_sum(&a), exec::pairwise_sum(&b))
}

pub fn energy(f: &ModeField, kind: &EnergyKind, policy: ExecPolicy) -> f64 {
    energy_parts(f, kind, policy).0
}

pub fn energy_t_perp(f: &ModeField, policy: ExecPolicy) -> f64 {
    energy(f, &EnergyKind::TPerp, policy)
}

pub fn energy_t_chi(f: &ModeField, blend: BlendProfile, policy: ExecPolicy) -> f64 {
    energy(f, &EnergyKind::TChi(blend), policy)
}

/// (vector-field part, q-correction part) of the K energy at time t.
pub fn energy_k(f: &ModeField, t: f64, blend: BlendProfile, policy: ExecPolicy) -> (f64, f64) {
    energy_parts(f, &EnergyKind::K { t, blend }, policy)
}

/// Sum of the energy over the family members of order below `n`; n = 1 is
/// the field itself and n = 3 uses every generator of order <= 2.
pub fn higher_energy(family: &[(SymmetryOp, ModeField)], kind: &EnergyKind, n: usize, policy: ExecPolicy) -> Result<f64> {
    if !(1..=3).contains(&n) {
        return Err(KerrError::InvalidArgument(format!("order must be 1, 2 or 3, got {n}")));
    }
    let mut total = 0.0;
    for op in SymmetryOp::ALL.iter().filter(|op| op.order() < n) {
        let (_, f) = family
            .iter()
            .find(|(o, _)| o == op)
            .ok_or_else(|| KerrError::InvalidArgument(format!("family lacks {}", op.name())))?;
        let (a, b) = energy_parts(f, kind, policy);
        total += a + b;
    }
    Ok(total)
}

/// Smooth cut-off equal to 1 on |x| < 1/2 and 0 on |x| > 3/4.
pub fn chi_light_cone(x: f64) -> f64 {
    1.0 - smooth_step((x.abs() - 0.5) * 4.0).0
}

/// Morawetz bulk integrand summed over the family, integrated over space
/// with measure dr sin(theta) dtheta dphi, in psi = u / sqrt(r^2 + a^2).
/// `weight(i)` multiplies row i.
fn bulk_with<W: Fn(usize) -> f64 + Sync + Send>(
    family: &[(SymmetryOp, ModeField)],
    band: &PhotonBand,
    weight: W,
    policy: ExecPolicy,
) -> f64 {
    let Some((_, first)) = family.first() else {
        return 0.0;
    };
    let g = &*first.grid;
    let nt = g.n_theta();
    let m2 = (g.m() * g.m()) as f64;
    let rows = exec::map_indices(policy, g.n_r(), |i| {
        let w_row = weight(i);
        if w_row == 0.0 {
            return 0.0;
        }
        let (r, p, d) = (g.r[i], g.p[i], g.delta[i]);
        let sp = p.sqrt();
        let outside = !band.contains(r);
        let mut acc = 0.0;
        for (_, f) in family {
            for j in 0..nt {
                let k = i * nt + j;
                let (_, gt, du) = gradients(g, &f.u, i, j);
                let psi = f.u[k] / sp;
                let dpsi = du / sp - f.u[k] * (r * d / (p * p * sp));
                let mut dens = (p * d / r.powi(4)) * dpsi.norm_sqr() + (d / p) * psi.norm_sqr() / (r * r);
                if outside {
                    let ang = gt / p + m2 * psi.norm_sqr() / (g.sin_c[j] * g.sin_c[j]);
                    dens += (d / p) / r * ((f.v[k] / sp).norm_sqr() + ang / (r * r));
                }
                acc += cell_weight(g, j) * dens;
            }
        }
        w_row * acc
    });
    exec::pairwise_sum(&rows)
}

pub fn morawetz_bulk(family: &[(SymmetryOp, ModeField)], band: &PhotonBand, policy: ExecPolicy) -> f64 {
    bulk_with(family, band, |_| 1.0, policy)
}

/// The Morawetz integrand times t^p chi_LC(r*/t).
pub fn lightcone_weighted_bulk(
    family: &[(SymmetryOp, ModeField)],
    band: &PhotonBand,
    p: u32,
    t: f64,
    policy: ExecPolicy,
) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let Some((_, first)) = family.first() else {
        return 0.0;
    };
    let grid = first.grid.clone();
    let tp = t.powi(p as i32);
    bulk_with(family, band, move |i| tp * chi_light_cone(grid.r_star[i] / t), policy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerOptions {
    pub blend: BlendProfile,
    /// Half-width added on each side of the photon band.
    pub band_margin: f64,
    pub morawetz: bool,
    pub lightcone_p: Option<u32>,
    /// Skip the family-based quantities entirely.
    pub base_only: bool,
}

impl LedgerOptions {
    pub fn standard(mass: f64) -> Self {
        Self { blend: BlendProfile::standard(mass), band_margin: 0.5 * mass, morawetz: true, lightcone_p: None, base_only: false }
    }
}

/// Energy time series. Third-order quantities sum over the generators of
/// order <= 2; the K energies include their q-corrections.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    pub t: Vec<f64>,
    pub e_tperp: Vec<f64>,
    pub e_tchi: Vec<f64>,
    pub e3_tchi: Vec<f64>,
    pub e_k: Vec<f64>,
    pub e_qk: Vec<f64>,
    pub e3_k: Vec<f64>,
    pub mor_bulk: Vec<f64>,
    pub mor_cum: Vec<f64>,
    pub lc_bulk: Vec<f64>,
    pub lc_cum: Vec<f64>,
}

impl EnergyLedger {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Accumulates an [`EnergyLedger`] sample by sample.
#[derive(Debug)]
pub struct LedgerRecorder {
    grid: Arc<ModeGrid>,
    options: LedgerOptions,
    policy: ExecPolicy,
    band: PhotonBand,
    ledger: EnergyLedger,
}

impl LedgerRecorder {
    pub fn new(grid: Arc<ModeGrid>, options: LedgerOptions, policy: ExecPolicy) -> Result<Self> {
        let band = photon_orbit_band_with(grid.params(), 1e-3 * grid.params().mass(), policy)?.widened(options.band_margin);
        Ok(Self { grid, options, policy, band, ledger: EnergyLedger::default() })
    }

    pub fn band(&self) -> PhotonBand {
        self.band
    }

    pub fn record(&mut self, t: f64, f: &ModeField) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &f.grid) && self.grid.len() != f.grid.len() {
            return Err(KerrError::Shape { expected: self.grid.len(), got: f.grid.len() });
        }
        if let Some(&last) = self.ledger.t.last() {
            if t <= last {
                return Err(KerrError::InvalidArgument("ledger times must increase".into()));
            }
        }
        let p = self.policy;
        let blend = self.options.blend;
        let l = &mut self.ledger;
        l.t.push(t);
        l.e_tperp.push(energy_t_perp(f, p));
        l.e_tchi.push(energy_t_chi(f, blend, p));
        let (ek, eq) = energy_k(f, t, blend, p);
        l.e_k.push(ek);
        l.e_qk.push(eq);
        if self.options.base_only {
            for s in [&mut l.e3_tchi, &mut l.e3_k, &mut l.mor_bulk, &mut l.lc_bulk] {
                s.push(f64::NAN);
            }
        } else {
            let fam = build_symmetry_family(f, p)?;
            l.e3_tchi.push(higher_energy(&fam, &EnergyKind::TChi(blend), 3, p)?);
            l.e3_k.push(higher_energy(&fam, &EnergyKind::K { t, blend }, 3, p)?);
            l.mor_bulk.push(if self.options.morawetz { morawetz_bulk(&fam, &self.band, p) } else { f64::NAN });
            l.lc_bulk.push(match self.options.lightcone_p {
                Some(q) => lightcone_weighted_bulk(&fam, &self.band, q, t, p),
                None => f64::NAN,
            });
        }
        let n = l.t.len();
        for (bulk, cum) in [(&l.mor_bulk, &mut l.mor_cum), (&l.lc_bulk, &mut l.lc_cum)] {
            let next = if n == 1 { 0.0 } else { cum[n - 2] + 0.5 * (bulk[n - 1] + bulk[n - 2]) * (l.t[n - 1] - l.t[n - 2]) };
            cum.push(next);
        }
        Ok(())
    }

    pub fn finish(self) -> EnergyLedger {
        self.ledger
    }
}
