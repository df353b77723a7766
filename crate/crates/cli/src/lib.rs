//! Command-line front end: run configuration, orchestration and output
//! files for the Kerr wave laboratory.

pub mod config;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use kerr_core::commutator::{commutator_sequence, CommutatorReport, TestFn, DEFAULT_POINT, TEST_FUNCTIONS};
use kerr_core::decay::{fit_decay, fit_decay_samples, growth_exponent, DecayFit, DecayFitOptions, Region};
use kerr_core::energy::EnergyLedger;
use kerr_core::evolve::{evolve, gaussian_initial_data, EvolveError, EvolutionOutput, TimeSeries};
use kerr_core::geodesics::{band_orbits, photon_orbit_band};
use kerr_core::hardy::{
    geometric_grid, perturbed_coefficients, positive_solution_for, random_bumps, verify_weighted_hardy, HardyPotential,
    HypergeometricParams, NormalForm, DEFAULT_RESIDUAL_TOL,
};
use kerr_core::{ExecPolicy, KerrError, KerrParams, RadialMap};
use serde::Serialize;

pub use config::RunConfig;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        }
    }
}

impl From<KerrError> for CliError {
    fn from(e: KerrError) -> Self {
        match e {
            KerrError::Numerical(_) | KerrError::NonFinite(_) => CliError::Numerical(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EvolveError> for CliError {
    fn from(e: EvolveError) -> Self {
        match e {
            EvolveError::Invalid(k) => k.into(),
            EvolveError::Aborted(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// 17 significant digits, enough to round-trip any binary64 value.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

pub fn write_observers_csv(path: &Path, series: &TimeSeries) -> Result<(), CliError> {
    let mut w = create(path)?;
    writeln!(w, "t,r_obs,theta_obs,re_u,im_u,abs_u,abs_psi")?;
    for (s, &t) in series.t.iter().enumerate() {
        for (k, o) in series.observers.iter().enumerate() {
            let u = series.u[k][s];
            let row = [t, o.r, o.theta, u.re, u.im, u.norm(), u.norm() / series.psi_scale[k]];
            writeln!(w, "{}", row.map(fmt17).join(","))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_energies_csv(path: &Path, l: &EnergyLedger) -> Result<(), CliError> {
    let mut w = create(path)?;
    writeln!(w, "t,E_Tperp,E_Tchi,E3_Tchi,E_K,E_qK,E3_K,mor_bulk,mor_cum")?;
    for i in 0..l.len() {
        let row = [l.t[i], l.e_tperp[i], l.e_tchi[i], l.e3_tchi[i], l.e_k[i], l.e_qk[i], l.e3_k[i], l.mor_bulk[i], l.mor_cum[i]];
        writeln!(w, "{}", row.map(fmt17).join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn write_lightcone_csv(path: &Path, l: &EnergyLedger) -> Result<(), CliError> {
    let mut w = create(path)?;
    writeln!(w, "t,lc_bulk,lc_cum")?;
    for i in 0..l.len() {
        writeln!(w, "{}", [l.t[i], l.lc_bulk[i], l.lc_cum[i]].map(fmt17).join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// One entry of fits.json.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub observer: usize,
    pub r: f64,
    pub theta: f64,
    pub region: Region,
    pub plateau_p: Option<f64>,
    pub window: Option<[f64; 2]>,
    /// Smallest local exponent over late windows (see [`late_start`]).
    pub min_late_p: Option<f64>,
    /// Whether every late window meets the rate bound less `RATE_SLACK`;
    /// null when the run has no late windows.
    pub theorem_consistent: Option<bool>,
    pub truncated: bool,
    pub error: Option<String>,
}

/// Start of the "late" windows checked against the decay lower bounds.
pub const LATE_TIME: f64 = 100.0;
/// Allowance for the unknown C|a| loss in the decay rates.
pub const RATE_SLACK: f64 = 0.5;

/// The decay rate the estimates guarantee for a region (before the loss).
pub fn rate_lower_bound(region: Region) -> f64 {
    match region {
        Region::Stationary | Region::Near => 1.0,
        Region::Far => 0.5,
    }
}

/// Time after which a window counts as late: the region's own abscissa
/// (t, u+ or u-) must exceed `LATE_TIME`.
pub fn late_start(region: Region, r_star: f64, mass: f64) -> f64 {
    let late = LATE_TIME * mass;
    match region {
        Region::Stationary => late,
        Region::Near => late - r_star,
        Region::Far => late + r_star,
    }
}

fn fit_record(k: usize, obs: (f64, f64, f64), region: Region, fit: Result<DecayFit, KerrError>, mass: f64) -> FitRecord {
    let (r, theta, r_star) = obs;
    match fit {
        Ok(f) => {
            let min_late = f.min_p_after(late_start(region, r_star, mass));
            let bound = rate_lower_bound(region) - RATE_SLACK;
            FitRecord {
                observer: k,
                r,
                theta,
                region,
                plateau_p: Some(f.plateau_p),
                window: Some(f.window),
                min_late_p: min_late,
                theorem_consistent: min_late.map(|p| p >= bound),
                truncated: f.truncated,
                error: None,
            }
        }
        Err(e) => FitRecord {
            observer: k,
            r,
            theta,
            region,
            plateau_p: None,
            window: None,
            min_late_p: None,
            theorem_consistent: None,
            truncated: false,
            error: Some(e.to_string()),
        },
    }
}

/// Growth exponents and Lemma-style ratios written to summary.json.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub steps: usize,
    pub dt: f64,
    pub kappa_e3_tchi: Option<f64>,
    pub kappa_e3_k: Option<f64>,
    pub max_e3_tchi_ratio: Option<f64>,
    pub max_qk_ratio: f64,
    pub tperp_drift: f64,
}

fn finite_series(xs: &[f64]) -> bool {
    !xs.is_empty() && xs.iter().all(|x| x.is_finite())
}

/// Growth fits start here (in M).
pub const GROWTH_T_MIN: f64 = 50.0;

pub fn summarize(out: &EvolutionOutput, mass: f64) -> RunSummary {
    let l = &out.ledger;
    let kappa = |e: &[f64]| {
        if finite_series(e) {
            growth_exponent(&l.t, e, GROWTH_T_MIN * mass).ok()
        } else {
            None
        }
    };
    let max_e3 = if finite_series(&l.e3_tchi) && l.e3_tchi[0] > 0.0 {
        Some(l.e3_tchi.iter().cloned().fold(f64::MIN, f64::max) / l.e3_tchi[0])
    } else {
        None
    };
    let max_qk_ratio = l
        .e_k
        .iter()
        .zip(&l.e_qk)
        .map(|(k, q)| if *k > 0.0 { q.abs() / k } else { 0.0 })
        .fold(0.0, f64::max);
    let e0 = l.e_tperp.first().copied().unwrap_or(0.0);
    let tperp_drift = if e0 > 0.0 {
        l.e_tperp.iter().map(|e| ((e - e0) / e0).abs()).fold(0.0, f64::max)
    } else {
        0.0
    };
    RunSummary {
        steps: out.steps,
        dt: out.dt,
        kappa_e3_tchi: kappa(&l.e3_tchi),
        kappa_e3_k: kappa(&l.e3_k),
        max_e3_tchi_ratio: max_e3,
        max_qk_ratio,
        tperp_drift,
    }
}

/// Decay fits for every observer of a finished run.
pub fn fit_observers(series: &TimeSeries, params: &KerrParams) -> Vec<FitRecord> {
    let m = params.mass();
    let opts = DecayFitOptions { t_min: GROWTH_T_MIN * m, ..Default::default() };
    series
        .observers
        .iter()
        .enumerate()
        .map(|(k, o)| {
            let region = Region::classify(o.r, m);
            let fit = fit_decay(series, k, series.r_star[k], region, &opts);
            fit_record(k, (o.r, o.theta, series.r_star[k]), region, fit, m)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub output: EvolutionOutput,
    pub fits: Vec<FitRecord>,
    pub summary: RunSummary,
}

/// Runs the evolution without touching the file system.
pub fn run_evolution(cfg: &RunConfig, policy: ExecPolicy) -> Result<EvolveResult, CliError> {
    cfg.validate()?;
    let ec = cfg.evolution_config()?;
    let grid = Arc::new(ec.build_grid()?);
    let config::InitialDataSpec::Gaussian { center, width, amplitude, l, .. } = cfg.initial_data;
    let init = gaussian_initial_data(&grid, center, width, amplitude, l, cfg.launch())?;
    let output = evolve(&ec, init, &cfg.ledger_options(), policy)?;
    let fits = fit_observers(&output.series, &ec.params);
    let summary = summarize(&output, ec.params.mass());
    Ok(EvolveResult { output, fits, summary })
}

/// `evolve`: runs and writes observers.csv, energies.csv, fits.json and
/// summary.json (plus lightcone.csv when requested) to the output directory.
pub fn cmd_evolve(cfg: &RunConfig, policy: ExecPolicy) -> Result<EvolveResult, CliError> {
    if (cfg.diagnostics.energies || cfg.diagnostics.morawetz) && !cfg.pulse_stays_inside() {
        log::warn!("the initial pulse can reach the grid edges before t_end; energy integrals will include boundary error");
    }
    let res = run_evolution(cfg, policy)?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    write_observers_csv(&dir.join("observers.csv"), &res.output.series)?;
    write_energies_csv(&dir.join("energies.csv"), &res.output.ledger)?;
    if cfg.diagnostics.lightcone_p.is_some() && cfg.diagnostics.energies {
        write_lightcone_csv(&dir.join("lightcone.csv"), &res.output.ledger)?;
    }
    let json = |v: &dyn erased::Json| v.to_json();
    std::fs::write(dir.join("fits.json"), json(&res.fits))?;
    std::fs::write(dir.join("summary.json"), json(&res.summary))?;
    Ok(res)
}

mod erased {
    pub trait Json {
        fn to_json(&self) -> String;
    }
    impl<T: serde::Serialize> Json for T {
        fn to_json(&self) -> String {
            let mut s = serde_json::to_string_pretty(self).expect("serialisable");
            s.push('\n');
            s
        }
    }
}

/// `photon-orbits`: band endpoints, then one CSV row per sampled orbit.
pub fn cmd_photon_orbits(params: &KerrParams, n: usize) -> Result<String, CliError> {
    let band = photon_orbit_band(params, 1e-3 * params.mass())?;
    let mut s = String::new();
    writeln!(s, "band_r_min,band_r_max").unwrap();
    writeln!(s, "{},{}", fmt17(band.r_min), fmt17(band.r_max)).unwrap();
    writeln!(s, "r,lz_over_e,q_over_e2,d2R").unwrap();
    for o in band_orbits(params, &band, n) {
        writeln!(s, "{}", [o.r_orbit, o.lz_over_e, o.q_over_e2, o.d2r].map(fmt17).join(",")).unwrap();
    }
    Ok(s)
}

/// `tortoise-table`: r* at one radius (shortest round-trip form), or a
/// CSV table on a geometric grid.
pub fn cmd_tortoise_single(params: &KerrParams, r: f64) -> Result<String, CliError> {
    let rs = RadialMap::new(*params).tortoise(r)?;
    Ok(format!("{rs}\n"))
}

pub fn cmd_tortoise_table(params: &KerrParams, r_min: f64, r_max: f64, n: usize) -> Result<String, CliError> {
    let rows = RadialMap::new(*params).tabulate(r_min, r_max, n)?;
    let mut s = String::from("r,r_star\n");
    for (r, rs) in rows {
        writeln!(s, "{},{}", fmt17(r), fmt17(rs)).unwrap();
    }
    Ok(s)
}

pub fn commutator_function(name: &str) -> Result<TestFn, CliError> {
    kerr_core::commutator::test_function(name).ok_or_else(|| {
        let names: Vec<&str> = TEST_FUNCTIONS.iter().map(|(n, _)| *n).collect();
        CliError::Validation(format!("unknown test function `{name}`; choose one of {names:?}"))
    })
}

fn commutator_csv(s: &mut String, rep: &CommutatorReport) {
    writeln!(s, "h,residual,observed_order").unwrap();
    for x in &rep.samples {
        let q = x.observed_order.map(fmt17).unwrap_or_default();
        writeln!(s, "{},{},{}", fmt17(x.h), fmt17(x.residual), q).unwrap();
    }
}

/// `commutator-check`: residual table for one test function, or for all
/// of them with a `# name` line before each block.
pub fn cmd_commutator(params: &KerrParams, function: Option<&str>, h0: f64, levels: usize) -> Result<String, CliError> {
    let mut s = String::new();
    match function {
        Some(name) => {
            let f = commutator_function(name)?;
            let rep = commutator_sequence(params, f, DEFAULT_POINT, h0, levels)?;
            commutator_csv(&mut s, &rep);
            if rep.non_monotone {
                log::warn!("residual not monotone under refinement: step too small for double precision");
            }
        }
        None => {
            for (name, f) in TEST_FUNCTIONS {
                let rep = commutator_sequence(params, f, DEFAULT_POINT, h0, levels)?;
                writeln!(s, "# {name}").unwrap();
                commutator_csv(&mut s, &rep);
            }
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperJson {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyReportJson {
    pub params: HyperJson,
    pub ordering_ok: bool,
    pub max_residual: f64,
    pub positivity_ok: bool,
    pub empirical_epsilon: f64,
    pub epsilon: f64,
    pub holds: bool,
    pub n_tests: usize,
}

/// Strength of the subtraction used to build the positive solution when
/// a != 0.
pub const CONSTRUCTION_EPSILON: f64 = 0.01;

/// `hardy-verify`.
pub fn cmd_hardy(params: &KerrParams, epsilon: f64, n_tests: usize, seed: u64, policy: ExecPolicy) -> Result<HardyReportJson, CliError> {
    let m = params.mass();
    let (hyper, w, ordering_ok) = if params.spin() == 0.0 {
        let h = HypergeometricParams::schwarzschild(m);
        (h, HardyPotential::new(*params).normal_form(), h.fine_ordering_ok())
    } else {
        let (c1, c2, c3, c4, d) = perturbed_coefficients(params, CONSTRUCTION_EPSILON);
        let h = HypergeometricParams::from_coefficients(c1, c2, c3, c4, d)?;
        (h, NormalForm::from_coefficients(c1, c2, c3, c4, d), h.ordering_ok())
    };
    let xs = geometric_grid(1e-3 * m, 100.0 * m, 400);
    let sol = positive_solution_for(hyper, &w, &xs, None, DEFAULT_RESIDUAL_TOL, policy)?;
    let tests = random_bumps(params, n_tests, seed);
    let rep = verify_weighted_hardy(params, &tests, epsilon, policy)?;
    Ok(HardyReportJson {
        params: HyperJson { alpha: hyper.alpha, beta: hyper.beta, a: hyper.a_h, b: hyper.b_h, c: hyper.c_h },
        ordering_ok,
        max_residual: sol.max_residual,
        positivity_ok: sol.positive,
        empirical_epsilon: rep.max_epsilon,
        epsilon,
        holds: rep.holds,
        n_tests,
    })
}

/// `fit-decay`: fits every observer found in an observers.csv file.
pub fn cmd_fit_decay(params: &KerrParams, csv_path: &Path, t_min: f64) -> Result<Vec<FitRecord>, CliError> {
    let mut rdr = csv::Reader::from_path(csv_path).map_err(|e| CliError::Validation(format!("{}: {e}", csv_path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::Validation(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Validation(format!("missing column `{name}`")))
    };
    let (ct, cr, cth, cpsi) = (col("t")?, col("r_obs")?, col("theta_obs")?, col("abs_psi")?);
    // observers in order of first appearance
    let mut keys: Vec<(u64, u64)> = Vec::new();
    let mut data: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Validation(e.to_string()))?;
        let num = |c: usize| -> Result<f64, CliError> {
            rec[c].trim().parse::<f64>().map_err(|e| CliError::Validation(format!("bad number `{}`: {e}", &rec[c])))
        };
        let (t, r, th, psi) = (num(ct)?, num(cr)?, num(cth)?, num(cpsi)?);
        let key = (r.to_bits(), th.to_bits());
        let k = match keys.iter().position(|x| *x == key) {
            Some(k) => k,
            None => {
                keys.push(key);
                data.push((Vec::new(), Vec::new()));
                keys.len() - 1
            }
        };
        data[k].0.push(t);
        data[k].1.push(psi);
    }
    let map = RadialMap::new(*params);
    let m = params.mass();
    let opts = DecayFitOptions { t_min, ..Default::default() };
    let mut out = Vec::new();
    for (k, ((rb, thb), (t, psi))) in keys.iter().zip(&data).enumerate() {
        let (r, th) = (f64::from_bits(*rb), f64::from_bits(*thb));
        let region = Region::classify(r, m);
        let rs = map.tortoise(r)?;
        let fit = fit_decay_samples(k, t, psi, r, rs, region, &opts);
        out.push(fit_record(k, (r, th, rs), region, fit, m));
    }
    Ok(out)
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    erased::Json::to_json(v)
}
