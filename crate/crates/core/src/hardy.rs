//! Weighted Hardy estimate on the exterior: normal-form reduction, the
//! explicit hypergeometric positive solution, and quadrature checks of the
//! weighted inequality and two auxiliary one-dimensional Hardy estimates.
//!
//! Radial functions are written in `x = r - r_+`. The weight and potential
//! are
//!
//! ```text
//! A = Delta^2 / (r^2 (r^2 + a^2)),   V = (9 r^2 - 46 M r + 54 M^2) / (6 r^4)
//! ```
//!
//! and the normal form `W = V/A + A''/(2A) - (A')^2/(4A^2)` turns
//! `-(A u')' + V u = 0` into `-v'' + W v = 0` with `v = A^(1/2) u`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KerrError, Result};
use crate::exec::{self, ExecPolicy};
use crate::geometry::{smooth_step, KerrParams};
use crate::quadrature::{GaussLegendre, TanhSinh};
use crate::rational::{same_fraction, Expr, Poly};
use crate::special::ln_gamma;

/// Rational function `num / den` in x.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub num: Poly,
    pub den: Poly,
}

impl NormalForm {
    pub fn eval(&self, x: f64) -> f64 {
        self.num.eval(x) / self.den.eval(x)
    }

    /// `(C1 x^2 + C2 x + C3) / (C4 x^2 (x + d)^2)`.
    pub fn from_coefficients(c1: f64, c2: f64, c3: f64, c4: f64, d: f64) -> Self {
        let xd = Poly::new(vec![0.0, d, 1.0]);
        Self { num: Poly::new(vec![c3, c2, c1]), den: (&xd * &xd).scale(c4) }
    }

    /// The closed form expected at a = 0.
    pub fn schwarzschild(mass: f64) -> Self {
        Self::from_coefficients(9.0, -34.0 * mass, -2.0 * mass * mass, 6.0, 2.0 * mass)
    }

    pub fn same_as(&self, other: &NormalForm, rel_tol: f64) -> bool {
        same_fraction(&self.num, &self.den, &other.num, &other.den, rel_tol)
    }
}

/// Weight and potential of the Hardy lemma for one black hole.
#[derive(Debug, Clone)]
pub struct HardyPotential {
    params: KerrParams,
    weight: Expr,
    potential: Expr,
}

impl HardyPotential {
    pub fn new(params: KerrParams) -> Self {
        let m = params.mass();
        let rp = params.r_plus();
        let a2 = params.spin() * params.spin();
        let d = rp - params.r_minus();
        let r = Poly::new(vec![rp, 1.0]);
        let p = &(&r * &r) + &Poly::constant(a2);
        let basis = Expr::new_basis(vec![r.clone(), p, Poly::x(), Poly::new(vec![d, 1.0])]);
        let weight = Expr::monomial(&basis, 1.0, &[-4, -2, 4, 4]);
        let vpoly = &(&(&r * &r).scale(9.0) - &r.scale(46.0 * m)) + &Poly::constant(54.0 * m * m);
        let potential = &Expr::poly(&basis, vpoly.scale(1.0 / 6.0)) * &Expr::factor(&basis, 0, -8);
        Self { params, weight, potential }
    }

    pub fn params(&self) -> &KerrParams {
        &self.params
    }

    /// A at areal radius r.
    pub fn weight(&self, r: f64) -> f64 {
        self.weight.eval(r - self.params.r_plus())
    }

    /// d ln A / dr.
    pub fn log_weight_deriv(&self, r: f64) -> f64 {
        let x = r - self.params.r_plus();
        let d = self.params.r_plus() - self.params.r_minus();
        let p = r * r + self.params.spin().powi(2);
        2.0 / x + 2.0 / (x + d) - 2.0 / r - 2.0 * r / p
    }

    /// V at areal radius r.
    pub fn potential(&self, r: f64) -> f64 {
        self.potential.eval(r - self.params.r_plus())
    }

    /// W by exact rational differentiation in x.
    pub fn normal_form(&self) -> NormalForm {
        let basis: &Arc<Vec<Poly>> = self.weight.basis();
        let inv = Expr::monomial(basis, 1.0, &[4, 2, -4, -4]);
        let d1 = self.weight.deriv();
        let d2 = d1.deriv();
        let w = &(&(&self.potential * &inv) + &(&d2 * &inv).scale(0.5))
            - &(&(&d1 * &d1) * &(&inv * &inv)).scale(0.25);
        let (num, den) = w.to_fraction().expect("integer exponents throughout");
        NormalForm { num, den }
    }
}

/// Exponents and hypergeometric parameters of the positive solution
/// `v = x^alpha (x + d)^beta F(a_h, b_h; c_h; -x/d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeometricParams {
    pub alpha: f64,
    pub beta: f64,
    pub a_h: f64,
    pub b_h: f64,
    pub c_h: f64,
    pub d: f64,
}

impl HypergeometricParams {
    /// Closed forms at a = 0.
    pub fn schwarzschild(mass: f64) -> Self {
        let (s2, s6, s7) = (2f64.sqrt(), 6f64.sqrt(), 7f64.sqrt());
        let mid = 0.5 - 1.5 * s2 + s6 / 6.0;
        Self {
            alpha: 0.5 + s6 / 6.0,
            beta: 0.5 - 1.5 * s2,
            a_h: mid - 0.5 * s7,
            b_h: mid + 0.5 * s7,
            c_h: 1.0 + s6 / 3.0,
            d: 2.0 * mass,
        }
    }

    /// Solves the indicial equations at x = 0, x = -d and infinity for the
    /// potential `(C1 x^2 + C2 x + C3) / (C4 x^2 (x + d)^2)`. Takes the larger
    /// root at 0 and the smaller at -d.
    pub fn from_coefficients(c1: f64, c2: f64, c3: f64, c4: f64, d: f64) -> Result<Self> {
        if !(d > 0.0 && c4 != 0.0) {
            return Err(KerrError::InvalidArgument("need d > 0 and C4 != 0".into()));
        }
        let w0 = c3 / (c4 * d * d);
        let w1 = (c1 * d * d - c2 * d + c3) / (c4 * d * d);
        let winf = c1 / c4;
        let root = |w: f64, what: &str| {
            let disc = 0.25 + w;
            if disc <= 0.0 {
                Err(KerrError::Numerical(format!("complex exponents at {what}")))
            } else {
                Ok(disc.sqrt())
            }
        };
        let alpha = 0.5 + root(w0, "x = 0")?;
        let beta = 0.5 - root(w1, "x = -d")?;
        let s = root(winf, "infinity")?;
        let mid = alpha + beta - 0.5;
        Ok(Self { alpha, beta, a_h: mid - s, b_h: mid + s, c_h: 2.0 * alpha, d })
    }

    /// Parameters for the a = 0 potential with `eps (M + x)^2 / (x^2 (x + d)^2)`
    /// subtracted and `d = r_+ - r_-`.
    pub fn perturbed(params: &KerrParams, eps: f64) -> Result<Self> {
        let (c1, c2, c3, c4, d) = perturbed_coefficients(params, eps);
        Self::from_coefficients(c1, c2, c3, c4, d)
    }

    pub fn ordering_ok(&self) -> bool {
        self.a_h < 0.0 && 0.0 < self.b_h && self.b_h < self.c_h
    }

    /// The finer ordering `a < -2.5 < 0 < 0.1 < b < 0.2 < 1.8 < c`.
    pub fn fine_ordering_ok(&self) -> bool {
        self.a_h < -2.5 && 0.1 < self.b_h && self.b_h < 0.2 && 1.8 < self.c_h
    }
}

/// (C1, C2, C3, C4, d) of the perturbed potential.
pub fn perturbed_coefficients(params: &KerrParams, eps: f64) -> (f64, f64, f64, f64, f64) {
    let m = params.mass();
    (
        9.0 - 6.0 * eps,
        -34.0 * m - 12.0 * eps * m,
        -2.0 * m * m - 6.0 * eps * m * m,
        6.0,
        params.r_plus() - params.r_minus(),
    )
}

/// Largest sampled spin in [0, M) for which the perturbed parameters keep
/// `a_h < 0 < b_h < c_h`, scanning `steps` equally spaced spins.
pub fn ordering_threshold(mass: f64, eps: f64, steps: usize) -> f64 {
    let mut last = 0.0;
    for k in 0..steps {
        let a = mass * k as f64 / steps as f64;
        let ok = KerrParams::new(mass, a)
            .and_then(|p| HypergeometricParams::perturbed(&p, eps))
            .map(|h| h.ordering_ok())
            .unwrap_or(false);
        if !ok {
            break;
        }
        last = a;
    }
    last
}

/// Gauss hypergeometric F(a, b; c; z) from the Euler integral, valid for
/// `a < 0 < b < c` and `z <= 0`.
pub fn hypergeometric_f(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a < 0.0 && 0.0 < b && b < c) {
        return Err(KerrError::InvalidArgument(format!("need a < 0 < b < c, got ({a}, {b}, {c})")));
    }
    if !(z <= 0.0) || !z.is_finite() {
        return Err(KerrError::InvalidArgument(format!("need finite z <= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let pref = (ln_gamma(c) - ln_gamma(b) - ln_gamma(c - b)).exp();
    let integral = TanhSinh::default().beta_weighted(b, c - b, |t| (1.0 - t * z).powf(-a));
    Ok(pref * integral)
}

/// The explicit solution of `-v'' + W v = 0` built from hypergeometric
/// parameters.
#[derive(Debug, Clone, Copy)]
pub struct PositiveSolution {
    pub hyper: HypergeometricParams,
}

impl PositiveSolution {
    pub fn new(hyper: HypergeometricParams) -> Result<Self> {
        if !hyper.ordering_ok() {
            return Err(KerrError::InvalidArgument("hypergeometric parameters out of order".into()));
        }
        Ok(Self { hyper })
    }

    pub fn v(&self, x: f64) -> f64 {
        let h = &self.hyper;
        let f = hypergeometric_f(h.a_h, h.b_h, h.c_h, -x / h.d).unwrap_or(f64::NAN);
        x.powf(h.alpha) * (x + h.d).powf(h.beta) * f
    }

    /// v'(x), using F' = (ab/c) F(a+1, b+1; c+1).
    pub fn dv(&self, x: f64) -> f64 {
        let h = &self.hyper;
        let z = -x / h.d;
        let f = hypergeometric_f(h.a_h, h.b_h, h.c_h, z).unwrap_or(f64::NAN);
        let df = if h.a_h + 1.0 < 0.0 {
            h.a_h * h.b_h / h.c_h * hypergeometric_f(h.a_h + 1.0, h.b_h + 1.0, h.c_h + 1.0, z).unwrap_or(f64::NAN)
        } else {
            let e = 1e-6 * h.d.max(x);
            let fp = hypergeometric_f(h.a_h, h.b_h, h.c_h, -(x + e) / h.d).unwrap_or(f64::NAN);
            let fm = hypergeometric_f(h.a_h, h.b_h, h.c_h, -(x - e).max(0.0) / h.d).unwrap_or(f64::NAN);
            -(fp - fm) / (2.0 * e) * h.d
        };
        let pre = x.powf(h.alpha) * (x + h.d).powf(h.beta);
        pre * (f * (h.alpha / x + h.beta / (x + h.d)) - df / h.d)
    }
}

/// Tabulated positive solution with its ODE residual.
#[derive(Debug, Clone)]
pub struct HardySolution {
    pub hyper: HypergeometricParams,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// `u = A^(-1/2) v` at r = x + r_+, when a weight was supplied.
    pub u: Vec<f64>,
    /// Largest `|-v'' + W v| / (|v''| + |W v| + |v| / (x (x + d)))` over the
    /// grid. The last term keeps the ratio finite where W changes sign.
    pub max_residual: f64,
    pub positive: bool,
}

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;

/// Sixth-order stencil for v'' at x with step 0.03 x.
fn second_derivative(sol: &PositiveSolution, x: f64) -> f64 {
    const W7: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];
    let h = 0.03 * x;
    let mut s = 0.0;
    for (k, w) in W7.iter().enumerate() {
        s += w * sol.v(x + (k as f64 - 3.0) * h);
    }
    s / (180.0 * h * h)
}

/// Builds the solution for potential `w` on the grid and certifies
/// positivity and the ODE residual. `weight` supplies A(x) for u.
pub fn positive_solution_for(
    hyper: HypergeometricParams,
    w: &NormalForm,
    xs: &[f64],
    weight: Option<&dyn Fn(f64) -> f64>,
    tol: f64,
    policy: ExecPolicy,
) -> Result<HardySolution> {
    if xs.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(KerrError::InvalidArgument("x grid must lie in (0, inf)".into()));
    }
    let sol = PositiveSolution::new(hyper)?;
    let rows: Vec<(f64, f64)> = exec::map_indices(policy, xs.len(), |i| {
        let x = xs[i];
        let v = sol.v(x);
        let wv = w.eval(x) * v;
        let d2 = second_derivative(&sol, x);
        let scale = d2.abs() + wv.abs() + v.abs() / (x * (x + hyper.d));
        (v, (wv - d2).abs() / scale)
    });
    let v: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let max_residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let positive = v.iter().all(|&x| x > 0.0);
    let u = match weight {
        Some(a) => xs.iter().zip(&v).map(|(&x, &v)| v / a(x).sqrt()).collect(),
        None => Vec::new(),
    };
    if !max_residual.is_finite() || max_residual > tol {
        return Err(KerrError::Numerical(format!("ODE residual {max_residual:e} above {tol:e}")));
    }
    Ok(HardySolution { hyper, x: xs.to_vec(), v, u, max_residual, positive })
}

/// Positive solution for the a = 0 problem of the given mass.
pub fn positive_solution(mass: f64, xs: &[f64]) -> Result<HardySolution> {
    let pot = HardyPotential::new(KerrParams::schwarzschild(mass)?);
    let w = pot.normal_form();
    let rp = pot.params().r_plus();
    let weight = move |x: f64| pot.weight(x + rp);
    positive_solution_for(
        HypergeometricParams::schwarzschild(mass),
        &w,
        xs,
        Some(&weight),
        DEFAULT_RESIDUAL_TOL,
        ExecPolicy::default(),
    )
}

/// Geometric grid of n points on [lo, hi].
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let q = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|k| if k == n - 1 { hi } else { lo * (q * k as f64).exp() }).collect()
}

/// A test function phi(r) with its derivative, plus quadrature hints.
pub struct TestFunction {
    pub label: String,
    eval: Box<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
    /// Integration runs over x in [0, x_end].
    pub x_end: f64,
    /// Smallest feature size, sets the panel width.
    pub scale: f64,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction").field("label", &self.label).field("x_end", &self.x_end).finish()
    }
}

/// Gaussian bump `amp * exp(-(r - center)^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub amp: f64,
    pub center: f64,
    pub width: f64,
}

impl TestFunction {
    pub fn new<F>(label: impl Into<String>, x_end: f64, scale: f64, eval: F) -> Self
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        Self { label: label.into(), eval: Box::new(eval), x_end, scale }
    }

    pub fn eval(&self, r: f64) -> (f64, f64) {
        (self.eval)(r)
    }

    pub fn zero() -> Self {
        Self::new("zero", 1.0, 1.0, |_| (0.0, 0.0))
    }

    pub fn bumps(r_plus: f64, bumps: Vec<Bump>) -> Self {
        let x_end = bumps.iter().map(|b| b.center + 10.0 * b.width - r_plus).fold(1.0, f64::max);
        let scale = bumps.iter().map(|b| b.width).fold(f64::INFINITY, f64::min);
        let label = format!("bumps{}", bumps.len());
        Self::new(label, x_end, scale, move |r| {
            let mut v = 0.0;
            let mut dv = 0.0;
            for b in &bumps {
                let y = (r - b.center) / b.width;
                let g = b.amp * (-0.5 * y * y).exp();
                v += g;
                dv -= g * y / b.width;
            }
            (v, dv)
        })
    }

    /// `u = A^(-1/2) v` times a smooth cut-off from 1 to 0 on
    /// [r_cut, r_cut + width].
    pub fn solution_cutoff(pot: HardyPotential, sol: PositiveSolution, r_cut: f64, width: f64) -> Self {
        let rp = pot.params().r_plus();
        let x_end = r_cut + width - rp;
        Self::new("cut-off solution", x_end, width.min(1.0), move |r| {
            let x = r - rp;
            let (s, ds) = smooth_step((r - r_cut) / width);
            let eta = 1.0 - s;
            if eta == 0.0 {
                return (0.0, 0.0);
            }
            let a = pot.weight(r);
            let v = sol.v(x);
            let u = v / a.sqrt();
            let du = (sol.dv(x) - 0.5 * pot.log_weight_deriv(r) * v) / a.sqrt();
            (u * eta, du * eta - u * ds / width)
        })
    }
}

/// Seeded random sums of one to three Gaussian bumps with centres in
/// [r_+, r_+ + 20M] and widths in [0.1M, 4M].
pub fn random_bumps(params: &KerrParams, n: usize, seed: u64) -> Vec<TestFunction> {
    let m = params.mass();
    let rp = params.r_plus();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            let bumps = (0..k)
                .map(|_| {
                    let mut amp: f64 = rng.gen_range(-1.0..1.0);
                    if amp.abs() < 1e-3 {
                        amp = 1.0;
                    }
                    Bump { amp, center: rp + 20.0 * m * rng.gen::<f64>(), width: m * rng.gen_range(0.1..4.0) }
                })
                .collect();
            TestFunction::bumps(rp, bumps)
        })
        .collect()
}

const GL_ORDER: usize = 20;

/// Integrates `f(x)` over [0, x_end]: a graded first panel `x = x0 s^4`
/// followed by uniform panels of width about `scale / 2`. Returns the value
/// from the doubled rule and the difference from the single rule.
fn integrate_profile<F: Fn(f64) -> [f64; 2]>(f: F, x_end: f64, scale: f64) -> ([f64; 2], f64) {
    let gl = GaussLegendre::new(GL_ORDER);
    let x0 = (0.5 * scale).min(x_end);
    let run = |refine: usize| -> [f64; 2] {
        let mut acc = [Vec::new(), Vec::new()];
        let graded = 4 * refine;
        for k in 0..graded {
            let (s0, s1) = (k as f64 / graded as f64, (k + 1) as f64 / graded as f64);
            let mut part = [0.0; 2];
            let (c, h) = (0.5 * (s0 + s1), 0.5 * (s1 - s0));
            for (t, w) in gl.nodes().iter().zip(gl.weights()) {
                let s = c + h * t;
                let jac = 4.0 * x0 * s * s * s;
                let v = f(x0 * s.powi(4));
                part[0] += w * h * jac * v[0];
                part[1] += w * h * jac * v[1];
            }
            acc[0].push(part[0]);
            acc[1].push(part[1]);
        }
        if x_end > x0 {
            let panels = (((x_end - x0) / (0.5 * scale)).ceil() as usize).max(1) * refine;
            let width = (x_end - x0) / panels as f64;
            for k in 0..panels {
                let a = x0 + width * k as f64;
                let (c, h) = (a + 0.5 * width, 0.5 * width);
                let mut part = [0.0; 2];
                for (t, w) in gl.nodes().iter().zip(gl.weights()) {
                    let v = f(c + h * t);
                    part[0] += w * h * v[0];
                    part[1] += w * h * v[1];
                }
                acc[0].push(part[0]);
                acc[1].push(part[1]);
            }
        }
        [exec::pairwise_sum(&acc[0]), exec::pairwise_sum(&acc[1])]
    };
    let coarse = run(1);
    let fine = run(2);
    let err = (fine[0] - coarse[0]).abs().max((fine[1] - coarse[1]).abs());
    (fine, err)
}

/// Outcome of the weighted inequality on one test function.
#[derive(Debug, Clone, PartialEq)]
pub struct HardySample {
    pub label: String,
    /// `int A phi'^2 + V phi^2`.
    pub lhs: f64,
    /// `int A phi'^2 + phi^2 / r^2`.
    pub rhs: f64,
    pub quad_error: f64,
}

impl HardySample {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedHardyReport {
    pub holds: bool,
    /// Smallest lhs/rhs over the non-trivial samples.
    pub max_epsilon: f64,
    pub samples: Vec<HardySample>,
}

/// Relative quadrature self-estimate above which a test function counts as
/// unresolved.
pub const QUAD_REL_TOL: f64 = 1e-8;

pub fn hardy_sample(pot: &HardyPotential, phi: &TestFunction) -> Result<HardySample> {
    let rp = pot.params().r_plus();
    let ([lhs, rhs], err) = integrate_profile(
        |x| {
            let r = x + rp;
            let (p, dp) = phi.eval(r);
            let kin = pot.weight(r) * dp * dp;
            [kin + pot.potential(r) * p * p, kin + p * p / (r * r)]
        },
        phi.x_end,
        phi.scale,
    );
    if !(lhs.is_finite() && rhs.is_finite()) {
        return Err(KerrError::NonFinite("hardy quadrature"));
    }
    if err > QUAD_REL_TOL * (lhs.abs() + rhs.abs()) + f64::MIN_POSITIVE {
        return Err(KerrError::Numerical(format!("test function `{}` unresolved (error {err:e})", phi.label)));
    }
    Ok(HardySample { label: phi.label.clone(), lhs, rhs, quad_error: err })
}

/// Checks `int A phi'^2 + V phi^2 >= eps int A phi'^2 + phi^2 / r^2` on each
/// test function. Identically zero functions are skipped.
pub fn verify_weighted_hardy(
    params: &KerrParams,
    tests: &[TestFunction],
    eps: f64,
    policy: ExecPolicy,
) -> Result<WeightedHardyReport> {
    let pot = HardyPotential::new(*params);
    let results = exec::map_indices(policy, tests.len(), |i| hardy_sample(&pot, &tests[i]));
    let mut samples = Vec::with_capacity(tests.len());
    for r in results {
        let s = r?;
        if s.rhs > 0.0 {
            samples.push(s);
        }
    }
    let max_epsilon = samples.iter().map(HardySample::ratio).fold(f64::INFINITY, f64::min);
    Ok(WeightedHardyReport { holds: samples.iter().all(|s| s.lhs >= eps * s.rhs), max_epsilon, samples })
}

/// Quadratic form `int A phi'^2 + V phi^2 dx` over [lo, hi] for arbitrary
/// weight and potential, by composite Gauss-Legendre.
pub fn quadratic_form<A, V, P>(a: A, v: V, phi: P, lo: f64, hi: f64, panels: usize) -> f64
where
    A: Fn(f64) -> f64,
    V: Fn(f64) -> f64,
    P: Fn(f64) -> (f64, f64),
{
    GaussLegendre::new(GL_ORDER).composite(
        |x| {
            let (p, dp) = phi(x);
            a(x) * dp * dp + v(x) * p * p
        },
        lo,
        hi,
        panels,
    )
}

/// Both sides of an auxiliary one-dimensional Hardy estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicHardyReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BasicHardyReport {
    pub fn constant(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// The sharp constant in `int_0^inf psi^2 <= C int_0^inf x^2 psi'^2`.
pub const HARDY_X2_CONSTANT: f64 = 4.0;

/// `int_0^X psi^2 <= 4 int_0^X x^2 psi'^2` for psi decaying at X. Rejects
/// psi whose boundary term `X psi(X)^2` is not negligible.
pub fn verify_hardy_x2<P: Fn(f64) -> (f64, f64)>(psi: P, x_end: f64, scale: f64) -> Result<BasicHardyReport> {
    let ([lhs, rhs], err) = integrate_profile(
        |x| {
            let (p, dp) = psi(x);
            [p * p, x * x * dp * dp]
        },
        x_end,
        scale,
    );
    let tail = x_end * psi(x_end).0.powi(2);
    if tail > 1e-10 * lhs.max(f64::MIN_POSITIVE) {
        return Err(KerrError::InvalidArgument(format!("test function does not decay (boundary term {tail:e})")));
    }
    if err > QUAD_REL_TOL * (lhs + rhs) + f64::MIN_POSITIVE {
        return Err(KerrError::Numerical("test function unresolved".into()));
    }
    Ok(BasicHardyReport { lhs, rhs, holds: lhs <= HARDY_X2_CONSTANT * rhs * (1.0 + 1e-12) })
}

/// Fixed bump at the origin: 1 on |x| <= 1/2, 0 on |x| >= 1.
pub fn origin_bump(x: f64) -> f64 {
    1.0 - smooth_step(2.0 * x.abs() - 1.0).0
}

/// `int (1 + x^2)^(-1) phi^2 <= C (int phi'^2 + chi phi^2)` on [x1, x2].
/// `holds` is true when the reported constant is at most `c_max`.
pub fn verify_hardy_bump<P: Fn(f64) -> (f64, f64)>(
    phi: P,
    x1: f64,
    x2: f64,
    panels: usize,
    c_max: f64,
) -> Result<BasicHardyReport> {
    if !(x1 < -1.0 && x2 > 1.0) {
        return Err(KerrError::InvalidArgument("need x1 < -1 < 1 < x2".into()));
    }
    let gl = GaussLegendre::new(GL_ORDER);
    let (lhs, e1) = gl.composite_checked(|x| phi(x).0.powi(2) / (1.0 + x * x), x1, x2, panels);
    let (rhs, e2) = gl.composite_checked(
        |x| {
            let (p, dp) = phi(x);
            dp * dp + origin_bump(x) * p * p
        },
        x1,
        x2,
        panels,
    );
    if e1.max(e2) > QUAD_REL_TOL * (lhs + rhs) + f64::MIN_POSITIVE {
        return Err(KerrError::Numerical("test function unresolved".into()));
    }
    Ok(BasicHardyReport { lhs, rhs, holds: lhs <= c_max * rhs })
}
