//! Radial weights of the Morawetz multiplier and the coefficient functions
//! they generate, differentiated exactly as rational functions of r.
//!
//! Components are indexed like the radial operator: (d_t^2, d_t d_phi,
//! d_phi^2, Q).

use crate::error::{KerrError, Result};
use crate::geometry::KerrParams;
use crate::rational::{Expr, Poly};

/// Default strength of the d_t^2 turn-on term in f_a.
pub const DEFAULT_EPSILON: f64 = 0.05;

// Basis factors, in order: Delta, r^2 + a^2, 3r^2 - a^2, r, (r^2 + a^2)^2 - eps Delta.
const DELTA: usize = 0;

/// Weight values and derived coefficients at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorawetzWeights {
    pub r: f64,
    pub epsilon: f64,
    pub f_a: f64,
    pub f_b: f64,
    pub r_tilde: [f64; 4],
    pub r_tilde_prime: [f64; 4],
    pub r_tilde_tilde_pp: [f64; 4],
    pub a_coef: [f64; 4],
    pub v_coef: [f64; 4],
    /// The scalar used for axisymmetric fields, f = d_r f_a.
    pub f_classical: f64,
    pub a_classical: f64,
    pub v_classical: f64,
}

/// Symbolic weights for fixed (M, a, epsilon), evaluated on demand.
#[derive(Debug, Clone)]
pub struct MorawetzProfile {
    params: KerrParams,
    epsilon: f64,
    f_a: Expr,
    f_b: Expr,
    r_tilde: [Expr; 4],
    r_tilde_prime: [Expr; 4],
    r_tilde_tilde_pp: [Expr; 4],
    a_coef: [Expr; 4],
    v_coef: [Expr; 4],
    a_classical: Expr,
}

impl MorawetzProfile {
    pub fn new(params: KerrParams, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(KerrError::InvalidArgument(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        let (m, a) = (params.mass(), params.spin());
        let a2 = a * a;
        let delta = Poly::new(vec![a2, -2.0 * m, 1.0]);
        let p = Poly::new(vec![a2, 0.0, 1.0]);
        let g = &p.powi(2) - &delta.scale(epsilon);
        let basis = Expr::new_basis(vec![delta.clone(), p.clone(), Poly::new(vec![-a2, 0.0, 3.0]), Poly::x(), g]);
        let mono = |coef: f64, h: [i32; 5]| Expr::monomial(&basis, coef, &h);

        // f_a = Delta g / P^4, f_b = P^4 / (2 r (3r^2 - a^2))
        let f_a = mono(1.0, [2, -8, 0, 0, 2]);
        let f_b = mono(0.5, [0, 8, -2, -2, 0]);
        let sqrt_fa_over_delta = mono(1.0, [0, -4, 0, 0, 1]);
        let g_over_p4 = mono(1.0, [0, -8, 0, 0, 2]);
        let delta_e = Expr::factor(&basis, DELTA, 2);

        let curly = [
            Expr::poly(&basis, -&p.powi(2)),
            Expr::poly(&basis, Poly::new(vec![0.0, -4.0 * a * m])),
            Expr::poly(&basis, &delta - &Poly::constant(a2)),
            Expr::poly(&basis, delta.clone()),
        ];
        let r_tilde = curly.map(|c| &g_over_p4 * &c);
        let r_tilde_prime = r_tilde.clone().map(|e| e.deriv());
        let r_tilde_tilde_pp = r_tilde_prime.clone().map(|e| (&(&f_b * &sqrt_fa_over_delta) * &e).deriv());
        // sqrt(f_a) Delta^(3/2) = Delta^2 sqrt(g) / P^2
        let a_pref = mono(-1.0, [4, -4, 0, 0, 1]);
        let a_coef = r_tilde_tilde_pp.clone().map(|e| &a_pref * &e);
        let v_coef = r_tilde_prime
            .clone()
            .map(|e| (&delta_e * &(&f_a * &(&f_b * &e).deriv()).deriv()).deriv().scale(0.25));
        let a_classical = a_coef[3].scale(0.5);
        Ok(Self { params, epsilon, f_a, f_b, r_tilde, r_tilde_prime, r_tilde_tilde_pp, a_coef, v_coef, a_classical })
    }

    pub fn params(&self) -> &KerrParams {
        &self.params
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn r_tilde_expr(&self, k: usize) -> &Expr {
        &self.r_tilde[k]
    }

    pub fn r_tilde_prime_expr(&self, k: usize) -> &Expr {
        &self.r_tilde_prime[k]
    }

    pub fn v_expr(&self, k: usize) -> &Expr {
        &self.v_coef[k]
    }

    pub fn at(&self, r: f64) -> Result<MorawetzWeights> {
        self.params.check_exterior(r)?;
        let ev = |e: &[Expr; 4]| [e[0].eval(r), e[1].eval(r), e[2].eval(r), e[3].eval(r)];
        let rtp = ev(&self.r_tilde_prime);
        let v = ev(&self.v_coef);
        Ok(MorawetzWeights {
            r,
            epsilon: self.epsilon,
            f_a: self.f_a.eval(r),
            f_b: self.f_b.eval(r),
            r_tilde: ev(&self.r_tilde),
            r_tilde_prime: rtp,
            r_tilde_tilde_pp: ev(&self.r_tilde_tilde_pp),
            a_coef: ev(&self.a_coef),
            v_coef: v,
            f_classical: rtp[3],
            a_classical: self.a_classical.eval(r),
            v_classical: v[3],
        })
    }
}

/// One-shot evaluation of the weights at `r`.
pub fn morawetz_weights(params: &KerrParams, epsilon: f64, r: f64) -> Result<MorawetzWeights> {
    MorawetzProfile::new(*params, epsilon)?.at(r)
}

/// Supremum of epsilon for which f_a stays positive: the minimum of
/// (r^2 + a^2)^2 / Delta over the exterior.
pub fn epsilon_threshold(params: &KerrParams) -> f64 {
    let a2 = params.spin().powi(2);
    let h = |r: f64| params.delta(r) / (r * r + a2).powi(2);
    // Delta / P^2 has a single interior maximum; golden-section search.
    let (mut lo, mut hi) = (params.r_plus(), 20.0 * params.mass());
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if h(x1) < h(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    1.0 / h(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert, proptest};

    fn kp(a: f64) -> KerrParams {
        KerrParams::new(1.0, a).unwrap()
    }

    #[test]
    fn schwarzschild_closed_forms() {
        let prof = MorawetzProfile::new(kp(0.0), 0.0).unwrap();
        for r in [2.1, 2.5, 3.0, 4.0, 7.3, 20.0, 150.0] {
            let w = prof.at(r).unwrap();
            let d = r * r - 2.0 * r;
            let tol = 1e-12 / r.powi(2);
            assert!((w.r_tilde_prime[3] + 2.0 * (r - 3.0) / r.powi(4)).abs() < tol);
            assert!((w.a_coef[3] - d * d / r.powi(4)).abs() < 1e-12 * (d * d / r.powi(4)));
            let v = (9.0 * r * r - 46.0 * r + 54.0) / (6.0 * r.powi(4));
            assert!((w.v_coef[3] - v).abs() < 1e-12, "r={r}: {} vs {v}", w.v_coef[3]);
            assert!((w.a_classical - 0.5 * d * d / r.powi(4)).abs() < 1e-12 * d * d / r.powi(4));
            assert!((w.f_a - d / r.powi(4)).abs() < 1e-15);
            assert!((w.f_b - r.powi(5) / 6.0).abs() < 1e-10 * r.powi(5));
        }
        assert_eq!(prof.at(3.0).unwrap().r_tilde_prime[3], 0.0);
    }

    #[test]
    fn v_positive_beyond_largest_root() {
        // roots of 9r^2 - 46r + 54
        let disc: f64 = 46.0 * 46.0 - 4.0 * 9.0 * 54.0;
        assert_eq!(disc, 172.0);
        let hi = (46.0 + disc.sqrt()) / 18.0;
        let lo = (46.0 - disc.sqrt()) / 18.0;
        assert!((hi - 3.284).abs() < 1e-3 && (lo - 1.827).abs() < 1e-3);
        let prof = MorawetzProfile::new(kp(0.0), 0.0).unwrap();
        assert!(prof.at(hi + 1e-6).unwrap().v_coef[3] > 0.0);
        assert!(prof.at(hi - 1e-3).unwrap().v_coef[3] < 0.0);
        assert!(prof.at(100.0).unwrap().v_coef[3] > 0.0);
    }

    #[test]
    fn a_positive_for_slow_rotation() {
        for a in [0.0, 0.025, 0.05, 0.075, 0.1] {
            let p = kp(a);
            let prof = MorawetzProfile::new(p, DEFAULT_EPSILON).unwrap();
            let rp = p.r_plus();
            for k in 1..=2000 {
                let r = rp + (100.0 - rp) * (k as f64 / 2000.0).powi(2);
                let w = prof.at(r).unwrap();
                assert!(w.a_coef[3] > 0.0, "a={a} r={r}");
                assert!(w.f_a > 0.0 && w.f_b > 0.0);
            }
        }
    }

    #[test]
    fn derivative_consistency_second_order() {
        let prof = MorawetzProfile::new(kp(0.3), DEFAULT_EPSILON).unwrap();
        for k in 0..4 {
            let e = prof.r_tilde_expr(k);
            let d = prof.r_tilde_prime_expr(k);
            let r = 4.2;
            let err = |h: f64| ((e.eval(r + h) - e.eval(r - h)) / (2.0 * h) - d.eval(r)).abs();
            let (e1, e2) = (err(0.02), err(0.01));
            let ratio = e1 / e2;
            assert!((3.5..4.5).contains(&ratio), "component {k}: ratio {ratio}");
        }
    }

    #[test]
    fn epsilon_threshold_schwarzschild() {
        // Delta / r^4 peaks at r = 3M with value 1/27
        assert!((epsilon_threshold(&kp(0.0)) - 27.0).abs() < 1e-9);
        assert!(MorawetzProfile::new(kp(0.0), -1.0).is_err());
        assert!(morawetz_weights(&kp(0.0), 0.0, 1.9).is_err());
    }

    proptest! {
        #[test]
        fn fa_positive_below_threshold(a in 0.0f64..0.9, frac in 0.0f64..0.99, x in 1e-3f64..80.0) {
            let p = kp(a);
            let eps = frac * epsilon_threshold(&p);
            let w = morawetz_weights(&p, eps, p.r_plus() + x).unwrap();
            prop_assert!(w.f_a > 0.0 && w.f_b > 0.0);
        }
    }
}
