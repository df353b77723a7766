//! Power-law fits of observer tails and energy growth.

use serde::{Deserialize, Serialize};

use crate::error::{KerrError, Result};
use crate::evolve::TimeSeries;

/// Where an observer sits, which fixes the abscissa used for its fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// |psi| against t.
    Stationary,
    /// |psi| against u+ = t + r*.
    Near,
    /// r |psi| against u- = t - r*, restricted to r > t / 2.
    Far,
}

impl Region {
    /// Inside the photon sphere is near, beyond 50M is far.
    pub fn classify(r: f64, mass: f64) -> Region {
        if r < 3.0 * mass {
            Region::Near
        } else if r >= 50.0 * mass {
            Region::Far
        } else {
            Region::Stationary
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFitOptions {
    pub t_min: f64,
    /// Each window spans [x / ratio, x] in the abscissa.
    pub window_ratio: f64,
    /// Relative to the series peak.
    pub noise_floor: f64,
    /// Trailing fraction of windows averaged into the plateau value.
    pub plateau_fraction: f64,
}

impl Default for DecayFitOptions {
    fn default() -> Self {
        Self { t_min: 50.0, window_ratio: 1.5, noise_floor: 1e-13, plateau_fraction: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub observer: usize,
    pub region: Region,
    /// Time span [t1, t2] of the samples that entered the fit.
    pub window: [f64; 2],
    /// Start and end times of each window, and its local exponent
    /// p = -d ln|psi| / d ln x.
    pub t_start: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub plateau_p: f64,
    /// Set when the tail hit the noise floor and the fit was cut short.
    pub truncated: bool,
}

impl DecayFit {
    /// Smallest local exponent over windows lying entirely after `t_from`.
    pub fn min_p_after(&self, t_from: f64) -> Option<f64> {
        self.t_start.iter().zip(&self.p).filter(|(t, _)| **t >= t_from).map(|(_, p)| *p).reduce(f64::min)
    }
}

/// Least-squares slope of y against x.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Sliding-window decay exponents of one sampled amplitude.
///
/// `amp` is |psi| at times `t`; `r` and `r_star` locate the observer.
pub fn fit_decay_samples(
    observer: usize,
    t: &[f64],
    amp: &[f64],
    r: f64,
    r_star: f64,
    region: Region,
    opts: &DecayFitOptions,
) -> Result<DecayFit> {
    if t.len() != amp.len() {
        return Err(KerrError::Shape { expected: t.len(), got: amp.len() });
    }
    if !(opts.window_ratio > 1.0) || !(opts.plateau_fraction > 0.0 && opts.plateau_fraction <= 1.0) {
        return Err(KerrError::InvalidArgument("window ratio must exceed 1 and plateau fraction lie in (0, 1]".into()));
    }
    let peak = amp.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(KerrError::InvalidArgument("amplitude series has no positive finite peak".into()));
    }
    let cut = 10.0 * opts.noise_floor * peak;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ts = Vec::new();
    let mut truncated = false;
    let mut arrived = false;
    for (&ti, &ai) in t.iter().zip(amp) {
        if ti < opts.t_min {
            continue;
        }
        if region == Region::Far && r <= ti / 2.0 {
            break;
        }
        if ai <= cut && !arrived {
            // signal has not reached the observer yet
            continue;
        }
        arrived = true;
        if ai <= cut {
            truncated = true;
            log::warn!("observer {observer}: tail reached the noise floor at t = {ti}, fit truncated");
            break;
        }
        let (x, y) = match region {
            Region::Stationary => (ti, ai),
            Region::Near => (ti + r_star, ai),
            Region::Far => (ti - r_star, r * ai),
        };
        if x <= 0.0 {
            continue;
        }
        xs.push(x.ln());
        ys.push(y.ln());
        ts.push(ti);
    }
    let lr = opts.window_ratio.ln();
    let mut ws = Vec::new();
    let mut wt = Vec::new();
    let mut wp = Vec::new();
    let mut lo = 0;
    for hi in 0..xs.len() {
        if xs[hi] - xs[0] < lr {
            continue;
        }
        while xs[hi] - xs[lo] > lr {
            lo += 1;
        }
        if hi - lo < 2 {
            continue;
        }
        let p = -slope(&xs[lo..=hi], &ys[lo..=hi]);
        if p.is_finite() {
            ws.push(ts[lo]);
            wt.push(ts[hi]);
            wp.push(p);
        }
    }
    if wp.is_empty() {
        return Err(KerrError::InvalidArgument(format!(
            "observer {observer}: not enough samples above the noise floor after t = {}",
            opts.t_min
        )));
    }
    let n_tail = ((wp.len() as f64 * opts.plateau_fraction).ceil() as usize).max(1);
    let plateau_p = wp[wp.len() - n_tail..].iter().sum::<f64>() / n_tail as f64;
    Ok(DecayFit {
        observer,
        region,
        window: [ts[0], *ts.last().unwrap()],
        t_start: ws,
        t: wt,
        p: wp,
        plateau_p,
        truncated,
    })
}

/// Fits observer `k` of an evolution time series.
pub fn fit_decay(series: &TimeSeries, k: usize, r_star: f64, region: Region, opts: &DecayFitOptions) -> Result<DecayFit> {
    if k >= series.observers.len() {
        return Err(KerrError::InvalidArgument(format!("no observer {k}")));
    }
    let amp = series.abs_psi(k);
    fit_decay_samples(k, &series.t, &amp, series.observers[k].r, r_star, region, opts)
}

/// Least-squares kappa in E ~ (1 + t)^kappa over t >= t_min.
pub fn growth_exponent(t: &[f64], e: &[f64], t_min: f64) -> Result<f64> {
    if t.len() != e.len() {
        return Err(KerrError::Shape { expected: t.len(), got: e.len() });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&ti, &ei) in t.iter().zip(e) {
        if ti < t_min {
            continue;
        }
        if !(ei > 0.0 && ei.is_finite()) {
            return Err(KerrError::InvalidArgument(format!("energy {ei} at t = {ti} is not positive")));
        }
        xs.push((1.0 + ti).ln());
        ys.push(ei.ln());
    }
    if xs.len() < 2 {
        return Err(KerrError::InvalidArgument(format!("fewer than two samples after t = {t_min}")));
    }
    Ok(slope(&xs, &ys))
}
