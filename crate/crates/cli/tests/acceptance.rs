//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria run one at a time behind a lock so that their wall-clock
//! budgets are measured without interference.

use std::path::PathBuf;
use std::process::Command;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use kerr_cli::config::{DiagnosticsSpec, GridSpec, InitialDataSpec, LaunchSpec, ObserverSpec, ParamsSpec, TimeSpec};
use kerr_cli::{run_evolution, EvolveResult, RunConfig};
use kerr_core::commutator::{commutator_sequence, test_function, DEFAULT_POINT};
use kerr_core::decay::{fit_decay_samples, growth_exponent, DecayFitOptions, Region};
use kerr_core::geodesics::{band_orbits, instability_certificate, photon_orbit_band, Stability, DEFAULT_STABILITY_TOL};
use kerr_core::hardy::{
    geometric_grid, positive_solution, random_bumps, verify_weighted_hardy, HypergeometricParams,
};
use kerr_core::{ExecPolicy, KerrParams, RadialMap};

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

struct Check {
    lines: Vec<String>,
    ok: bool,
}

impl Check {
    fn new() -> Self {
        Self { lines: Vec::new(), ok: true }
    }

    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.lines.push(format!("    [{}] {what}", if ok { "ok" } else { "FAILED" }));
        self.ok &= ok;
    }

    fn finish(self, n: u32, title: &str, elapsed: Duration) {
        println!("criterion {n:>2} {}: {title} ({:.1} s)", if self.ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
        for l in &self.lines {
            println!("{l}");
        }
        assert!(self.ok, "criterion {n} failed");
    }
}

fn kp(a: f64) -> KerrParams {
    KerrParams::new(1.0, a).unwrap()
}

struct RunSpec {
    spin: f64,
    mode: i32,
    l: u32,
    launch: LaunchSpec,
    r_star: (f64, f64),
    n_r: usize,
    n_theta: usize,
    t_end: f64,
    observers: Vec<f64>,
    energies: bool,
}

fn config(s: &RunSpec) -> RunConfig {
    RunConfig {
        params: ParamsSpec { mass: 1.0, spin: s.spin },
        mode: s.mode,
        initial_data: InitialDataSpec::Gaussian { center: 20.0, width: 3.0, amplitude: 1.0, l: s.l, launch: s.launch },
        grid: GridSpec { r_star_min: s.r_star.0, r_star_max: s.r_star.1, n_r: s.n_r, n_theta: s.n_theta },
        time: TimeSpec { cfl: 0.4, t_end: s.t_end, sample_dt: 1.0 },
        observers: s.observers.iter().map(|&r| ObserverSpec { r, theta: 1.0 }).collect(),
        diagnostics: DiagnosticsSpec { energies: s.energies, morawetz: s.energies, lightcone_p: None },
        output_dir: PathBuf::from("unused"),
        morawetz_epsilon: kerr_core::morawetz::DEFAULT_EPSILON,
        band_margin: 0.5,
    }
}

fn run(s: &RunSpec) -> EvolveResult {
    run_evolution(&config(s), ExecPolicy::Parallel).expect("evolution runs")
}

#[test]
fn criterion_01_geometry() {
    let _g = serial();
    let start = Instant::now();
    let mut c = Check::new();
    for a in [0.0, 0.3, 0.9] {
        let map = RadialMap::new(kp(a));
        let lo = kp(a).r_plus() + 1e-6;
        let n = 20_000;
        let mut worst = 0.0f64;
        let mut bad = 0;
        for k in 0..=n {
            let r = lo * (1e4 / lo).powf(k as f64 / n as f64);
            let back = map.inverse_tortoise(map.tortoise(r).unwrap()).unwrap();
            let err = (back - r).abs();
            worst = worst.max(err);
            if !(err < 1e-12) {
                bad += 1;
            }
        }
        c.expect(bad == 0, format!("a = {a}: |r(r*(r)) - r| worst {worst:.2e} over {} radii, {bad} above 1e-12", n + 1));
    }
    let rs3 = RadialMap::new(kp(0.0)).tortoise(3.0).unwrap();
    c.expect(rs3 == 0.0, format!("r*(3M) = {rs3}"));
    let el = start.elapsed();
    c.expect(el < Duration::from_secs(1), "runtime < 1 s");
    c.finish(1, "tortoise round trip and normalisation", el);
}

#[test]
fn criterion_02_photon_orbits() {
    let _g = serial();
    let start = Instant::now();
    let mut c = Check::new();
    let b0 = photon_orbit_band(&kp(0.0), 1e-3).unwrap();
    c.expect(
        (b0.r_min - 3.0).abs() < 1e-8 && (b0.r_max - 3.0).abs() < 1e-8,
        format!("a = 0 band [{}, {}]", b0.r_min, b0.r_max),
    );
    let p = kp(0.5);
    let b = photon_orbit_band(&p, 1e-3).unwrap();
    // equatorial photon radii 2M(1 + cos(2/3 arccos(-+a/M)))
    let pro = 2.0 * (1.0 + ((2.0 / 3.0) * (-0.5f64).acos()).cos());
    let retro = 2.0 * (1.0 + ((2.0 / 3.0) * (0.5f64).acos()).cos());
    c.expect((pro - 2.3472964).abs() < 1e-7 && (retro - 3.5320889).abs() < 1e-7, "closed forms 2.3472964 / 3.5320889");
    c.expect(
        (b.r_min - pro).abs() < 1e-8 && (b.r_max - retro).abs() < 1e-8,
        format!("a = 0.5 band [{:.10}, {:.10}]", b.r_min, b.r_max),
    );
    let mut all_unstable = true;
    let mut count = 0;
    for a in [0.0, 0.1, 0.5, 0.9] {
        let p = kp(a);
        let band = photon_orbit_band(&p, 1e-3).unwrap();
        for o in band_orbits(&p, &band, 101) {
            count += 1;
            all_unstable &= instability_certificate(&o, DEFAULT_STABILITY_TOL) == Stability::Unstable && o.q_over_e2 >= 0.0;
        }
    }
    c.expect(all_unstable && count > 0, format!("d2R/dr2 < 0 on all {count} sampled orbits"));
    let el = start.elapsed();
    c.expect(el < Duration::from_secs(5), "runtime < 5 s");
    c.finish(2, "photon-orbit band", el);
}

#[test]
fn criterion_03_hidden_symmetry() {
    let _g = serial();
    let start = Instant::now();
    let mut c = Check::new();
    let names = [
        "r^2 cos(th)",
        "exp(-t) sin(r) cos(th) cos(ph)",
        "sin(t-r) sin^2(th) cos(2ph)",
        "exp(-(r-4)^2/4) cos(t) cos^3(th) sin(ph+1/2)",
        "cos(t+ph) sin(th) / r",
        "(t^2+r) sin(th) cos(th) exp(ph/3)",
    ];
    for a in [0.0, 0.4, 0.7] {
        let mut passed = 0;
        let mut orders = Vec::new();
        for name in names {
            let rep = commutator_sequence(&kp(a), test_function(name).unwrap(), DEFAULT_POINT, 0.1, 5).unwrap();
            match rep.final_order() {
                Some(q) => {
                    orders.push(format!("{q:.3}"));
                    if (1.8..=2.2).contains(&q) {
                        passed += 1;
                    }
                }
                None => orders.push("exact".into()),
            }
        }
        c.expect(passed >= 5, format!("a = {a}: observed orders {} ({passed} in [1.8, 2.2])", orders.join(", ")));
    }
    let el = start.elapsed();
    c.expect(el < Duration::from_secs(10), "runtime < 10 s");
    c.finish(3, "[Q, Box] residual converges at second order", el);
}

#[test]
fn criterion_04_conservation() {
    let _g = serial();
    let start = Instant::now();
    let mut c = Check::new();
    let spec = |n_r| RunSpec {
        spin: 0.0,
        mode: 0,
        l: 2,
        launch: LaunchSpec::TimeSymmetric,
        r_star: (-240.0, 260.0),
        n_r,
        n_theta: 32,
        t_end: 200.0,
        observers: vec![10.0],
        energies: false,
    };
    let cfg = config(&spec(4001));
    c.expect(cfg.pulse_stays_inside(), "pulse stays inside the grid");
    let coarse = run(&spec(4001)).summary.tperp_drift;
    let t_coarse = start.elapsed();
    c.expect(coarse < 1e-6, format!("N_r = 4001, N_theta = 32: drift {coarse:.3e}"));
    let fine = run(&spec(8001)).summary.tperp_drift;
    c.expect(coarse / fine >= 3.5, format!("N_r = 8001: drift {fine:.3e}, ratio {:.1}", coarse / fine));
    let el = start.elapsed();
    c.expect(el < Duration::from_secs(300), format!("runtime < 5 min (base grid alone {:.1} s)", t_coarse.as_secs_f64()));
    c.finish(4, "E_Tperp conservation at a = 0", el);
}

struct EnergyRun {
    spin: f64,
    mode: i32,
    res: EvolveResult,
}

struct EnergyRuns {
    runs: Vec<EnergyRun>,
    elapsed: Duration,
}

/// Runs shared by criteria 5 to 7.
fn energy_runs() -> &'static EnergyRuns {
    static RUNS: OnceLock<EnergyRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let start = Instant::now();
        let cases = [(0.1, 0), (0.1, 1), (0.2, 0), (0.2, 1), (0.0, 1), (0.05, 1)];
        let runs = cases
            .iter()
            .map(|&(spin, mode)| {
                let res = run(&RunSpec {
                    spin,
                    mode,
                    l: 1,
                    launch: LaunchSpec::TimeSymmetric,
                    r_star: (-225.0, 255.0),
                    n_r: 4801,
                    n_theta: 16,
                    t_end: 200.0,
                    observers: vec![10.0],
                    energies: true,
                });
                EnergyRun { spin, mode, res }
            })
            .collect();
        EnergyRuns { runs, elapsed: start.elapsed() }
    })
}

fn fit_window(res: &EvolveResult, e: &[f64]) -> f64 {
    let l = &res.output.ledger;
    let (t, e): (Vec<f64>, Vec<f64>) = l.t.iter().zip(e).filter(|(t, _)| **t <= 200.0).map(|(t, e)| (*t, *e)).unzip();
    growth_exponent(&t, &e, 50.0).unwrap_or(f64::NAN)
}

#[test]
fn criterion_05_uniform_bound() {
    let _g = serial();
    let start = Instant::now();
    let mut c = Check::new();
    let runs = energy_runs();
    for r in runs.runs.iter().filter(|r| r.spin == 0.1 || r.spin == 0.2) {
        let l = &r.res.output.ledger;
        let kappa = fit_window(&r.res, &l.e3_tchi);
        let max_ratio = l.e3_tchi.iter().cloned().fold(f64::MIN, f64::max) / l.e3_tchi[0];
        c.expect(
            kappa.abs() < 0.02 && max_ratio < 1.2,
            format!("a = {}, m = {}: kappa(E3_Tchi) = {kappa:.2e}, max E3/E3(0) = {max_ratio:.5}", r.spin, r.mode),
        );
    }
    c.expect(runs.elapsed < Duration::from_secs(900), format!("shared runs took {:.0} s (< 15 min)", runs.elapsed.as_secs_f64()));
    c.finish(5, "third-order T_chi energy stays bounded", start.elapsed());
}

#[test]
fn criterion_06_morawetz() {
    let _g = serial();
    let start = Instant::now();
    let mut c = Check::new();
    for r in energy_runs().runs.iter().filter(|r| r.spin == 0.1 || r.spin == 0.2) {
        let l = &r.res.output.ledger;
        let increasing = l.mor_cum.windows(2).all(|w| w[1] >= w[0]) && l.mor_bulk.iter().all(|b| *b >= 0.0);
        let at = |t: f64| l.t.iter().position(|x| (*x - t).abs() < 1e-9).map(|i| l.mor_cum[i]);
        let (m150, m200) = (at(150.0).unwrap(), at(200.0).unwrap());
        let growth = (m200 - m150) / m150;
        c.expect(
            increasing && growth < 0.02,
            format!("a = {}, m = {}: cumulative bulk increasing = {increasing}, growth over [150, 200] = {:.3}%", r.spin, r.mode, 100.0 * growth),
        );
    }
    c.finish(6, "integrated Morawetz bulk plateaus", start.elapsed());
}

#[test]
fn criterion_07_k_energy() {
    let _g = serial();
    let start = Instant::now();
    let mut c = Check::new();
    let runs = energy_runs();
    let kappa = |spin: f64| {
        let r = runs.runs.iter().find(|r| r.spin == spin && r.mode == 1).unwrap();
        fit_window(&r.res, &r.res.output.ledger.e3_k)
    };
    let (k0, k05, k1) = (kappa(0.0), kappa(0.05), kappa(0.1));
    c.expect(k1 < 0.2, format!("a = 0.1: kappa(E3_K) = {k1:.4}"));
    c.expect(k0 <= 0.05, format!("a = 0: kappa(E3_K) = {k0:.4}; a = 0.05: {k05:.4}"));
    for r in runs.runs.iter().filter(|r| r.spin == 0.1) {
        let q = r.res.summary.max_qk_ratio;
        c.expect(q < 0.05, format!("a = 0.1, m = {}: max |E_qK| / E_K = {q:.2e}", r.mode));
    }
    c.finish(7, "K-energy growth and q-term smallness", start.elapsed());
}

/// Independent 1D Regge-Wheeler solver for a = 0, l = 0 with the same
/// data, used as the decay oracle. Returns |psi| at r = 10M every step.
fn regge_wheeler_oracle(r_star_min: f64, r_star_max: f64, n: usize, dt: f64, t_end: f64, r_obs: f64) -> (Vec<f64>, Vec<f64>) {
    let c0 = 3.0 - 2.0 * 2f64.ln();
    let tortoise = |r: f64| r + 2.0 * (r / 2.0 - 1.0).ln() - c0;
    // r = 2 + e^y, solved by Newton in y
    let radius = |rs: f64| {
        let mut y: f64 = if rs > 4.0 { (rs - 2.0).ln() } else { ((rs + c0 - 2.0) / 2.0).min(0.0) + 2f64.ln() };
        for _ in 0..100 {
            let g = 2.0 + y.exp() + 2.0 * (y - 2f64.ln()) - c0 - rs;
            let step = g / (y.exp() + 2.0);
            y -= step;
            if step.abs() < 1e-15 * y.abs().max(1.0) {
                break;
            }
        }
        2.0 + y.exp()
    };
    let h = (r_star_max - r_star_min) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| r_star_min + h * i as f64).collect();
    let pot: Vec<f64> = xs.iter().map(|&x| {
        let r = radius(x);
        (1.0 - 2.0 / r) * 2.0 / r.powi(3)
    }).collect();
    let mut u: Vec<f64> = xs.iter().map(|&x| (-(x - 20.0).powi(2) / 18.0).exp()).collect();
    let mut v: Vec<f64> = xs.iter().zip(&u).map(|(&x, &u)| -u * (x - 20.0) / 9.0).collect();
    let accel = |u: &[f64], out: &mut [f64]| {
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for i in 1..n - 1 {
            out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h) - pot[i] * u[i];
        }
    };
    let rs_obs = tortoise(r_obs);
    let j = ((rs_obs - r_star_min) / h).floor() as usize;
    let w = (rs_obs - xs[j]) / h;
    let steps = (t_end / dt).round() as usize;
    let mut ts = vec![0.0];
    let mut amp = vec![((1.0 - w) * u[j] + w * u[j + 1]).abs() / r_obs];
    let (mut k1u, mut k1v, mut k2u, mut k2v, mut k3u, mut k3v, mut k4u, mut k4v) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tu = vec![0.0; n];
    for s in 1..=steps {
        k1u.copy_from_slice(&v);
        accel(&u, &mut k1v);
        for i in 0..n {
            tu[i] = u[i] + 0.5 * dt * k1u[i];
            k2u[i] = v[i] + 0.5 * dt * k1v[i];
        }
        accel(&tu, &mut k2v);
        for i in 0..n {
            tu[i] = u[i] + 0.5 * dt * k2u[i];
            k3u[i] = v[i] + 0.5 * dt * k2v[i];
        }
        accel(&tu, &mut k3v);
        for i in 0..n {
            tu[i] = u[i] + dt * k3u[i];
            k4u[i] = v[i] + dt * k3v[i];
        }
        accel(&tu, &mut k4v);
        for i in 0..n {
            u[i] += dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        ts.push(dt * s as f64);
        amp.push(((1.0 - w) * u[j] + w * u[j + 1]).abs() / r_obs);
    }
    (ts, amp)
}

#[test]
fn criterion_08_decay() {
    let _g = serial();
    let start = Instant::now();
    let mut c = Check::new();
    let domain = (-315.0, 400.0);
    let a0 = run(&RunSpec {
        spin: 0.0,
        mode: 0,
        l: 0,
        launch: LaunchSpec::Ingoing,
        r_star: domain,
        n_r: 3576,
        n_theta: 8,
        t_end: 300.0,
        observers: vec![10.0, 2.5],
        energies: false,
    });
    let a2 = run(&RunSpec {
        spin: 0.2,
        mode: 1,
        l: 1,
        launch: LaunchSpec::Ingoing,
        r_star: domain,
        n_r: 3576,
        n_theta: 16,
        t_end: 300.0,
        observers: vec![10.0, 2.5],
        energies: false,
    });
    let far = run(&RunSpec {
        spin: 0.0,
        mode: 0,
        l: 0,
        launch: LaunchSpec::Ingoing,
        r_star: (-515.0, 820.0),
        n_r: 6676,
        n_theta: 8,
        t_end: 500.0,
        observers: vec![300.0],
        energies: false,
    });

    let stat0 = &a0.fits[0];
    let p0 = stat0.plateau_p.unwrap_or(f64::NAN);
    c.expect(stat0.region == Region::Stationary && (2.5..=3.5).contains(&p0), format!("a = 0, l = 0, r = 10M: plateau p = {p0:.3}"));

    let (t1, amp1) = regge_wheeler_oracle(domain.0, domain.1, 3576, a0.output.dt, 300.0, 10.0);
    let oracle = fit_decay_samples(0, &t1, &amp1, 10.0, 0.0, Region::Stationary, &DecayFitOptions::default()).unwrap();
    c.expect(
        (oracle.plateau_p - p0).abs() < 0.02,
        format!("independent 1D solver: plateau p = {:.3} (difference {:.1e})", oracle.plateau_p, (oracle.plateau_p - p0).abs()),
    );

    let stat2 = &a2.fits[0];
    let near2 = &a2.fits[1];
    let ps2 = stat2.plateau_p.unwrap_or(f64::NAN);
    let pn2 = near2.plateau_p.unwrap_or(f64::NAN);
    c.expect(ps2 >= 1.0, format!("a = 0.2, m = 1, r = 10M: plateau p = {ps2:.3}"));
    c.expect(near2.region == Region::Near && pn2 >= 0.5, format!("a = 0.2, m = 1, r = 2.5M: plateau p in u+ = {pn2:.3}"));

    for (label, res) in [("a = 0", &a0), ("a = 0.2", &a2), ("far", &far)] {
        for f in &res.fits {
            c.expect(
                f.error.is_none() && f.theorem_consistent == Some(true),
                format!(
                    "{label}, r = {}M ({:?}): min late p = {}, consistent = {:?}",
                    f.r,
                    f.region,
                    f.min_late_p.map_or("none".into(), |p| format!("{p:.3}")),
                    f.theorem_consistent
                ),
            );
        }
    }
    let el = start.elapsed();
    c.expect(el < Duration::from_secs(1200), "runtime < 20 min");
    c.finish(8, "decay rates consistent with the bounds", el);
}

#[test]
fn criterion_09_hardy() {
    let _g = serial();
    let start = Instant::now();
    let mut c = Check::new();
    let h = HypergeometricParams::schwarzschild(1.0);
    c.expect(h.fine_ordering_ok(), format!("a_h = {:.7} < -2.5 < 0 < .1 < b_h = {:.7} < .2 < 1.8 < c = {:.7}", h.a_h, h.b_h, h.c_h));
    c.expect(
        (h.c_h - 1.8164966).abs() < 1e-6 && (h.a_h + 2.5359477).abs() < 1e-6 && (h.b_h - 0.1098036).abs() < 1e-6,
        "parameter values to 1e-6",
    );
    let xs = geometric_grid(1e-3, 100.0, 2000);
    match positive_solution(1.0, &xs) {
        Ok(sol) => {
            c.expect(sol.max_residual < 1e-6, format!("ODE relative residual {:.2e}", sol.max_residual));
            c.expect(sol.positive, "positive on the whole grid");
        }
        Err(e) => c.expect(false, format!("positive solution: {e}")),
    }
    for a in [0.0, 0.1] {
        let p = kp(a);
        let tests = random_bumps(&p, 200, 2024);
        match verify_weighted_hardy(&p, &tests, 0.01, ExecPolicy::Parallel) {
            Ok(rep) => c.expect(
                rep.holds && rep.samples.len() == 200,
                format!("a = {a}: weighted inequality on {} functions, smallest ratio {:.4}", rep.samples.len(), rep.max_epsilon),
            ),
            Err(e) => c.expect(false, format!("a = {a}: {e}")),
        }
    }
    let el = start.elapsed();
    c.expect(el < Duration::from_secs(30), "runtime < 30 s");
    c.finish(9, "hypergeometric Hardy construction", el);
}

fn kerrlab(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_kerrlab")).args(args).output().expect("binary runs");
    assert!(out.status.success(), "kerrlab {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn criterion_10_determinism() {
    let _g = serial();
    let start = Instant::now();
    let mut c = Check::new();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(&RunSpec {
        spin: 0.2,
        mode: 1,
        l: 2,
        launch: LaunchSpec::Ingoing,
        r_star: (-80.0, 100.0),
        n_r: 721,
        n_theta: 16,
        t_end: 60.0,
        observers: vec![2.5, 10.0, 20.0],
        energies: true,
    });
    cfg.diagnostics.lightcone_p = Some(2);
    let cfg_path = dir.path().join("run.json");
    cfg.save(&cfg_path).unwrap();
    let files = ["observers.csv", "energies.csv", "lightcone.csv", "fits.json", "summary.json"];
    let mut evolve_out: Vec<Vec<Vec<u8>>> = Vec::new();
    let mut stdout: Vec<Vec<Vec<u8>>> = Vec::new();
    for threads in ["1", "4", "8"] {
        let out = dir.path().join(format!("t{threads}"));
        let cfg_s = cfg_path.to_str().unwrap();
        let out_s = out.to_str().unwrap();
        kerrlab(&["--threads", threads, "evolve", "--config", cfg_s, "--output", out_s]);
        evolve_out.push(files.iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect());
        stdout.push(vec![
            kerrlab(&["--threads", threads, "tortoise-table", "--spin", "0.3", "--n", "200"]),
            kerrlab(&["--threads", threads, "photon-orbits", "--spin", "0.5", "--samples", "41"]),
            kerrlab(&["--threads", threads, "commutator-check", "--spin", "0.4"]),
            kerrlab(&["--threads", threads, "hardy-verify", "--spin", "0.1", "--tests", "200"]),
        ]);
    }
    for (k, f) in files.iter().enumerate() {
        let same = evolve_out.iter().all(|o| o[k] == evolve_out[0][k]);
        c.expect(same && !evolve_out[0][k].is_empty(), format!("evolve {f}: identical for --threads 1, 4, 8"));
    }
    for (k, name) in ["tortoise-table", "photon-orbits", "commutator-check", "hardy-verify"].iter().enumerate() {
        let same = stdout.iter().all(|o| o[k] == stdout[0][k]);
        c.expect(same, format!("{name}: identical output for --threads 1, 4, 8"));
    }
    c.finish(10, "byte-identical output across thread counts", start.elapsed());
}
