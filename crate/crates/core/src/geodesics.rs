//! Null geodesic radial potential and spherical photon orbits.
//!
//! The Carter quantity here is the non-negative one, `Q = Q_carter + a^2 E^2`,
//! and the radial potential carries the sign for which allowed motion needs
//! `R <= 0`.

use crate::error::{KerrError, Result};
use crate::exec::{self, ExecPolicy};
use crate::geometry::KerrParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedSet {
    pub e: f64,
    pub lz: f64,
    pub q: f64,
}

/// Returns (R, dR/dr, d2R/dr2).
pub fn radial_potential(params: &KerrParams, cons: &ConservedSet, r: f64) -> (f64, f64, f64) {
    let (m, a) = (params.mass(), params.spin());
    let ConservedSet { e, lz, q } = *cons;
    let p = r * r + a * a;
    let delta = params.delta(r);
    let big_r = -p * p * e * e - 4.0 * a * m * r * e * lz + (delta - a * a) * lz * lz + delta * q;
    let d_r = -4.0 * r * p * e * e - 4.0 * a * m * e * lz + (2.0 * r - 2.0 * m) * (lz * lz + q);
    let d2_r = -(12.0 * r * r + 4.0 * a * a) * e * e + 2.0 * (lz * lz + q);
    (big_r, d_r, d2_r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonOrbit {
    pub r_orbit: f64,
    pub lz_over_e: f64,
    pub q_over_e2: f64,
    pub d2r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Unstable,
    Stable,
    Indeterminate,
}

pub const DEFAULT_STABILITY_TOL: f64 = 1e-10;

pub fn instability_certificate(orbit: &PhotonOrbit, tol: f64) -> Stability {
    if orbit.d2r < -tol {
        Stability::Unstable
    } else if orbit.d2r > tol {
        Stability::Stable
    } else {
        Stability::Indeterminate
    }
}

/// Solutions (L/E, Q/E^2) of R = R' = 0 at radius r, with E = 1.
///
/// Eliminating Q between the two equations leaves a quadratic in L.
pub fn orbit_candidates(params: &KerrParams, r: f64) -> Vec<(f64, f64)> {
    let (m, a) = (params.mass(), params.spin());
    let p = r * r + a * a;
    let delta = params.delta(r);
    if a == 0.0 {
        // Only the photon sphere survives; Q + L^2 = 27 M^2 is split equatorially.
        if (r - 3.0 * m).abs() <= 1e-12 * m {
            return vec![(27f64.sqrt() * m, 0.0)];
        }
        return Vec::new();
    }
    let qa = 2.0 * a * a * (r - m);
    let qb = 4.0 * a * m * (r * r - a * a);
    let qc = -2.0 * p * (r * r * r - 3.0 * m * r * r + a * a * r + m * a * a);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 || qa == 0.0 {
        return Vec::new();
    }
    let w = -0.5 * (qb + qb.signum() * disc.sqrt());
    let mut roots = Vec::with_capacity(2);
    if w != 0.0 {
        roots.push(w / qa);
        roots.push(qc / w);
    } else {
        roots.push(0.0);
    }
    roots
        .into_iter()
        .map(|l| {
            let q = (p * p + 4.0 * a * m * r * l - (delta - a * a) * l * l) / delta;
            (l, q)
        })
        .collect()
}

/// Non-negative exactly when some colatitude has Theta(theta) >= 0.
///
/// With the standard Carter constant C = Q - a^2 this is C >= 0, or
/// |L| < |a| together with C + (|a| - |L|)^2 >= 0.
pub fn theta_margin(params: &KerrParams, lz: f64, q: f64) -> f64 {
    let a = params.spin();
    let carter = q - a * a;
    let gap = (a.abs() - lz.abs()).max(0.0);
    carter + gap * gap
}

fn best_candidate(params: &KerrParams, r: f64) -> Option<(f64, f64, f64)> {
    orbit_candidates(params, r)
        .into_iter()
        .map(|(l, q)| (theta_margin(params, l, q), l, q))
        .filter(|c| c.0.is_finite())
        .fold(None, |acc: Option<(f64, f64, f64)>, c| match acc {
            Some(b) if b.0 >= c.0 => Some(b),
            _ => Some(c),
        })
}

/// Admissibility margin at radius r; the band is where it is non-negative.
pub fn admissibility(params: &KerrParams, r: f64) -> f64 {
    best_candidate(params, r).map_or(f64::NEG_INFINITY, |c| c.0)
}

/// Margin below which a candidate counts as admissible despite rounding.
const ADMISSIBLE_SLACK: f64 = 1e-10;

pub fn spherical_photon_orbit(params: &KerrParams, r: f64) -> Option<PhotonOrbit> {
    if params.check_exterior(r).is_err() {
        return None;
    }
    let (margin, l, q) = best_candidate(params, r)?;
    if margin < -ADMISSIBLE_SLACK {
        return None;
    }
    let cons = ConservedSet { e: 1.0, lz: l, q };
    let (big_r, d_r, d2_r) = radial_potential(params, &cons, r);
    let scale = r.powi(4).max(1.0);
    if big_r.abs() > 1e-10 * scale || d_r.abs() > 1e-10 * scale {
        return None;
    }
    Some(PhotonOrbit { r_orbit: r, lz_over_e: l, q_over_e2: q, d2r: d2_r })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonBand {
    pub r_min: f64,
    pub r_max: f64,
}

impl PhotonBand {
    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min && r <= self.r_max
    }

    pub fn widened(&self, margin: f64) -> PhotonBand {
        PhotonBand { r_min: self.r_min - margin, r_max: self.r_max + margin }
    }
}

fn bisect_edge(params: &KerrParams, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if admissibility(params, mid) >= 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Endpoints of the photon-orbit band.
///
/// A coarse scan with step `resolution` brackets the edges, which are then
/// bisected down to floating-point resolution.
pub fn photon_orbit_band(params: &KerrParams, resolution: f64) -> Result<PhotonBand> {
    photon_orbit_band_with(params, resolution, ExecPolicy::default())
}

pub fn photon_orbit_band_with(
    params: &KerrParams,
    resolution: f64,
    policy: ExecPolicy,
) -> Result<PhotonBand> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(KerrError::InvalidArgument(format!("scan resolution must be positive, got {resolution}")));
    }
    let m = params.mass();
    if params.spin() == 0.0 {
        return Ok(PhotonBand { r_min: 3.0 * m, r_max: 3.0 * m });
    }
    let lo = params.r_plus() * (1.0 + 1e-12);
    let hi = 4.0 * m + 2.0 * resolution;
    let n = ((hi - lo) / resolution).ceil() as usize + 1;
    let n = n.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let ok = exec::map_indices(policy, n, |i| admissibility(params, grid[i]) >= 0.0);

    let seed = 3.0 * m;
    if admissibility(params, seed) < 0.0 {
        return Err(KerrError::Numerical("photon sphere radius is not admissible".into()));
    }
    let first = ok.iter().position(|&b| b);
    let last = ok.iter().rposition(|&b| b);
    let (inner_lo, inner_hi) = match (first, last) {
        (Some(f), Some(l)) => (grid[f].min(seed), grid[l].max(seed)),
        _ => (seed, seed),
    };
    let below = grid.iter().rev().find(|&&r| r < inner_lo && admissibility(params, r) < 0.0);
    let above = grid.iter().find(|&&r| r > inner_hi && admissibility(params, r) < 0.0);
    let (Some(&below), Some(&above)) = (below, above) else {
        return Err(KerrError::Numerical("photon band edge not bracketed".into()));
    };
    Ok(PhotonBand {
        r_min: bisect_edge(params, inner_lo, below),
        r_max: bisect_edge(params, inner_hi, above),
    })
}

/// Orbits sampled uniformly across the band (a single orbit when a = 0).
pub fn band_orbits(params: &KerrParams, band: &PhotonBand, n: usize) -> Vec<PhotonOrbit> {
    if band.r_max <= band.r_min || n < 2 {
        return spherical_photon_orbit(params, band.r_min).into_iter().collect();
    }
    (0..n)
        .filter_map(|i| {
            let r = band.r_min + (band.r_max - band.r_min) * i as f64 / (n - 1) as f64;
            spherical_photon_orbit(params, r)
        })
        .collect()
}
