//! Pointwise check that the Carter operator commutes with the rescaled wave
//! operator Sigma Box_g in Boyer-Lindquist coordinates (t, r, theta, phi).
//!
//! The inner operator is applied exactly through second-order jets of the
//! test function; the outer one by centred differences of step h. The
//! residual |Q[S f] - S[Q f]| is therefore pure truncation error, O(h^2).

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{KerrError, Result};
use crate::geometry::KerrParams;

/// Value, gradient and Hessian of a function of (t, r, theta, phi).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; 4],
    pub h: [[f64; 4]; 4],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Self { v, g: [0.0; 4], h: [[0.0; 4]; 4] }
    }

    /// The coordinate function x_k evaluated at `v`.
    pub fn var(k: usize, v: f64) -> Self {
        let mut j = Self::constant(v);
        j.g[k] = 1.0;
        j
    }

    /// Coordinates seeded at a point.
    pub fn vars(x: [f64; 4]) -> [Jet2; 4] {
        [Self::var(0, x[0]), Self::var(1, x[1]), Self::var(2, x[2]), Self::var(3, x[3])]
    }

    fn chain(self, f: f64, df: f64, d2f: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..4 {
            out.g[i] = df * self.g[i];
            for j in 0..4 {
                out.h[i][j] = d2f * self.g[i] * self.g[j] + df * self.h[i][j];
            }
        }
        out
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn powi(self, n: i32) -> Self {
        let nf = n as f64;
        self.chain(self.v.powi(n), nf * self.v.powi(n - 1), nf * (nf - 1.0) * self.v.powi(n - 2))
    }

    pub fn scale(self, k: f64) -> Self {
        self.chain(k * self.v, k, 0.0)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, o: Jet2) -> Jet2 {
        self.v += o.v;
        for i in 0..4 {
            self.g[i] += o.g[i];
            for j in 0..4 {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v * o.v);
        for i in 0..4 {
            out.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..4 {
                out.h[i][j] = self.h[i][j] * o.v
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i]
                    + self.v * o.h[i][j];
            }
        }
        out
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, k: f64) -> Jet2 {
        self.v += k;
        self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, k: f64) -> Jet2 {
        self.scale(k)
    }
}

/// A smooth test function of (t, r, theta, phi).
pub type TestFn = fn(&[Jet2; 4]) -> Jet2;

const T: usize = 0;
const R: usize = 1;
const TH: usize = 2;
const PH: usize = 3;

/// Carter operator: (1/sin) d_th(sin d_th) + cot^2 d_phi^2 + a^2 sin^2 d_t^2.
pub fn carter_exact(params: &KerrParams, x: [f64; 4], j: &Jet2) -> f64 {
    let (s, c) = x[TH].sin_cos();
    let a2 = params.spin().powi(2);
    j.h[TH][TH] + c / s * j.g[TH] + (c * c) / (s * s) * j.h[PH][PH] + a2 * s * s * j.h[T][T]
}

/// Sigma Box_g: d_r Delta d_r + Delta^{-1}(-(r^2+a^2)^2 d_t^2 - 4aMr d_t d_phi
/// + (Delta - a^2) d_phi^2) + Q.
pub fn sigma_box_exact(params: &KerrParams, x: [f64; 4], j: &Jet2) -> f64 {
    let (m, a) = (params.mass(), params.spin());
    let r = x[R];
    let d = params.delta(r);
    let p = r * r + a * a;
    d * j.h[R][R] + 2.0 * (r - m) * j.g[R]
        + (-p * p * j.h[T][T] - 4.0 * a * m * r * j.h[T][PH] + (d - a * a) * j.h[PH][PH]) / d
        + carter_exact(params, x, j)
}

fn shifted(x: [f64; 4], k: usize, dk: f64, l: usize, dl: f64) -> [f64; 4] {
    let mut y = x;
    y[k] += dk;
    y[l] += dl;
    y
}

/// Value, first and second centred differences of `g` needed by both
/// operators: returns (g, dg[4], d2g[4][4]).
fn stencil(g: &dyn Fn([f64; 4]) -> f64, x: [f64; 4], h: f64) -> (f64, [f64; 4], [[f64; 4]; 4]) {
    let g0 = g(x);
    let mut d1 = [0.0; 4];
    let mut d2 = [[0.0; 4]; 4];
    for k in 0..4 {
        let gp = g(shifted(x, k, h, k, 0.0));
        let gm = g(shifted(x, k, -h, k, 0.0));
        d1[k] = (gp - gm) / (2.0 * h);
        d2[k][k] = (gp - 2.0 * g0 + gm) / (h * h);
    }
    let (k, l) = (T, PH);
    let mixed = (g(shifted(x, k, h, l, h)) - g(shifted(x, k, h, l, -h)) - g(shifted(x, k, -h, l, h))
        + g(shifted(x, k, -h, l, -h)))
        / (4.0 * h * h);
    d2[k][l] = mixed;
    d2[l][k] = mixed;
    (g0, d1, d2)
}

fn as_jet(v: f64, g: [f64; 4], h: [[f64; 4]; 4]) -> Jet2 {
    Jet2 { v, g, h }
}

fn check_point(params: &KerrParams, x: [f64; 4], h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(KerrError::InvalidArgument(format!("step must be positive, got {h}")));
    }
    params.check_exterior(x[R] - h)?;
    let (lo, hi) = (x[TH] - h, x[TH] + h);
    if lo <= 1e-3 || hi >= std::f64::consts::PI - 1e-3 {
        return Err(KerrError::InvalidArgument(format!("theta = {} too close to a pole for step {h}", x[TH])));
    }
    Ok(())
}

/// |Q[Sigma Box f] - Sigma Box[Q f]| at `x` with outer step `h`.
pub fn commutator_residual(params: &KerrParams, f: TestFn, x: [f64; 4], h: f64) -> Result<f64> {
    check_point(params, x, h)?;
    let sbox_f = |y: [f64; 4]| sigma_box_exact(params, y, &f(&Jet2::vars(y)));
    let q_f = |y: [f64; 4]| carter_exact(params, y, &f(&Jet2::vars(y)));
    let (v, g, hh) = stencil(&sbox_f, x, h);
    let outer_q = carter_exact(params, x, &as_jet(v, g, hh));
    let (v, g, hh) = stencil(&q_f, x, h);
    let outer_box = sigma_box_exact(params, x, &as_jet(v, g, hh));
    let res = (outer_q - outer_box).abs();
    if !res.is_finite() {
        return Err(KerrError::NonFinite("commutator residual"));
    }
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorSample {
    pub h: f64,
    pub residual: f64,
    /// log2 of the ratio to the previous (twice larger) step.
    pub observed_order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorReport {
    pub samples: Vec<CommutatorSample>,
    /// Set when a residual failed to decrease under refinement, the sign
    /// that round-off has overtaken truncation error.
    pub non_monotone: bool,
    /// The residual vanished identically at every step.
    pub exact_zero: bool,
}

impl CommutatorReport {
    /// Order from the finest pair of steps.
    pub fn final_order(&self) -> Option<f64> {
        self.samples.last().and_then(|s| s.observed_order)
    }
}

/// Residuals at h0, h0/2, ..., h0/2^(levels-1).
pub fn commutator_sequence(params: &KerrParams, f: TestFn, x: [f64; 4], h0: f64, levels: usize) -> Result<CommutatorReport> {
    if levels == 0 {
        return Err(KerrError::InvalidArgument("need at least one level".into()));
    }
    let mut samples: Vec<CommutatorSample> = Vec::with_capacity(levels);
    let mut non_monotone = false;
    for k in 0..levels {
        let h = h0 / 2f64.powi(k as i32);
        let residual = commutator_residual(params, f, x, h)?;
        let observed_order = samples.last().and_then(|prev| {
            if residual > 0.0 && prev.residual > 0.0 {
                Some((prev.residual / residual).log2())
            } else {
                None
            }
        });
        if let Some(prev) = samples.last() {
            if residual > 0.0 && residual >= prev.residual {
                non_monotone = true;
            }
        }
        samples.push(CommutatorSample { h, residual, observed_order });
    }
    let exact_zero = samples.iter().all(|s| s.residual == 0.0);
    Ok(CommutatorReport { samples, non_monotone, exact_zero })
}

fn f_linear_t(x: &[Jet2; 4]) -> Jet2 {
    x[T]
}

fn f_r2_cos(x: &[Jet2; 4]) -> Jet2 {
    x[R].powi(2) * x[TH].cos()
}

fn f_damped(x: &[Jet2; 4]) -> Jet2 {
    (-x[T]).exp() * x[R].sin() * x[TH].cos() * x[PH].cos()
}

fn f_wave(x: &[Jet2; 4]) -> Jet2 {
    (x[T] - x[R]).sin() * x[TH].sin().powi(2) * (x[PH] * 2.0).cos()
}

fn f_packet(x: &[Jet2; 4]) -> Jet2 {
    let z = x[R] + (-4.0);
    (z * z * (-0.25)).exp() * x[T].cos() * x[TH].cos().powi(3) * (x[PH] + 0.5).sin()
}

fn f_inverse(x: &[Jet2; 4]) -> Jet2 {
    x[R].powi(-1) * (x[T] + x[PH]).cos() * x[TH].sin()
}

fn f_mixed(x: &[Jet2; 4]) -> Jet2 {
    (x[T] * x[T] + x[R]) * x[TH].sin() * x[TH].cos() * (x[PH] * (1.0 / 3.0)).exp()
}

/// Named test functions; the first is the trivial f = t.
pub const TEST_FUNCTIONS: [(&str, TestFn); 7] = [
    ("t", f_linear_t),
    ("r^2 cos(th)", f_r2_cos),
    ("exp(-t) sin(r) cos(th) cos(ph)", f_damped),
    ("sin(t-r) sin^2(th) cos(2ph)", f_wave),
    ("exp(-(r-4)^2/4) cos(t) cos^3(th) sin(ph+1/2)", f_packet),
    ("cos(t+ph) sin(th) / r", f_inverse),
    ("(t^2+r) sin(th) cos(th) exp(ph/3)", f_mixed),
];

/// Default evaluation point (t, r, theta, phi).
pub const DEFAULT_POINT: [f64; 4] = [0.0, 5.0, 1.0, 0.0];

pub fn test_function(name: &str) -> Option<TestFn> {
    TEST_FUNCTIONS.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kp(a: f64) -> KerrParams {
        KerrParams::new(1.0, a).unwrap()
    }

    #[test]
    fn jet_matches_closed_form() {
        let x = [0.3, 5.0, 1.0, 0.2];
        let j = f_damped(&Jet2::vars(x));
        let (t, r, th, ph) = (x[0], x[1], x[2], x[3]);
        let val = (-t).exp() * r.sin() * th.cos() * ph.cos();
        assert!((j.v - val).abs() < 1e-15);
        assert!((j.g[R] - (-t).exp() * r.cos() * th.cos() * ph.cos()).abs() < 1e-15);
        assert!((j.h[T][T] - val).abs() < 1e-15);
        assert!((j.h[TH][PH] - (-t).exp() * r.sin() * th.sin() * ph.sin()).abs() < 1e-15);
        assert_eq!(j.h[R][TH], j.h[TH][R]);
    }

    #[test]
    fn flat_limit_of_box() {
        // M = 0 is outside KerrParams, so check a = 0 against the
        // Schwarzschild operator on f = r^2 cos(th): S f = (6r^2 - 8r - 2r^2) cos(th)
        let p = kp(0.0);
        let x = DEFAULT_POINT;
        let j = f_r2_cos(&Jet2::vars(x));
        let r = x[R];
        let expected = (2.0 * (r * r - 2.0 * r) + 2.0 * (r - 1.0) * 2.0 * r - 2.0 * r * r) * x[TH].cos();
        assert!((sigma_box_exact(&p, x, &j) - expected).abs() < 1e-12);
    }

    #[test]
    fn linear_t_is_exactly_zero() {
        for a in [0.0, 0.4, 0.7] {
            let rep = commutator_sequence(&kp(a), f_linear_t, DEFAULT_POINT, 0.1, 4).unwrap();
            assert!(rep.exact_zero);
            assert_eq!(rep.final_order(), None);
        }
    }

    #[test]
    fn second_order_convergence() {
        for a in [0.0, 0.4, 0.7] {
            for (name, f) in &TEST_FUNCTIONS[1..] {
                let rep = commutator_sequence(&kp(a), *f, DEFAULT_POINT, 0.1, 5).unwrap();
                let q = rep.final_order().unwrap();
                assert!((1.8..=2.2).contains(&q), "a={a} {name}: order {q} {:?}", rep.samples);
                assert!(!rep.non_monotone);
            }
        }
    }

    #[test]
    fn small_step_value() {
        let res = commutator_residual(&kp(0.7), f_damped, DEFAULT_POINT, 1e-3).unwrap();
        assert!(res < 1e-4, "{res}");
    }

    #[test]
    fn non_commuting_operator_is_detected() {
        // d_r does not commute with Sigma Box; the same harness must see an O(1) residual
        let p = kp(0.4);
        let x = DEFAULT_POINT;
        let f = f_r2_cos;
        let h = 1e-3;
        let inner = |y: [f64; 4]| sigma_box_exact(&p, y, &f(&Jet2::vars(y)));
        let outer = (inner(shifted(x, R, h, R, 0.0)) - inner(shifted(x, R, -h, R, 0.0))) / (2.0 * h);
        let dr_f = |y: [f64; 4]| f(&Jet2::vars(y)).g[R];
        let (v, g, hh) = stencil(&dr_f, x, h);
        let other = sigma_box_exact(&p, x, &as_jet(v, g, hh));
        assert!((outer - other).abs() > 1e-2, "{}", (outer - other).abs());
    }

    #[test]
    fn rejects_bad_points() {
        assert!(commutator_residual(&kp(0.4), f_r2_cos, [0.0, 5.0, 0.05, 0.0], 0.1).is_err());
        assert!(commutator_residual(&kp(0.4), f_r2_cos, [0.0, 1.5, 1.0, 0.0], 0.1).is_err());
        assert!(commutator_residual(&kp(0.4), f_r2_cos, DEFAULT_POINT, 0.0).is_err());
        assert!(test_function("t").is_some() && test_function("nope").is_none());
    }
}
