//! Small exact calculus for products of polynomial powers.
//!
//! An [`Expr`] is a sum of terms `c(x) * prod_k f_k(x)^(h_k / 2)` over a
//! fixed basis of factor polynomials `f_k`, with integer half-exponents
//! `h_k`. Differentiation is done term by term with the product rule, and
//! terms whose exponents agree modulo two are merged onto a common factor so
//! cancellations happen in the polynomial coefficients rather than at
//! evaluation time.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

/// Real polynomial with coefficients in ascending order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    c: Vec<f64>,
}

impl Poly {
    pub fn new(mut c: Vec<f64>) -> Self {
        while c.last() == Some(&0.0) {
            c.pop();
        }
        Self { c }
    }

    pub fn zero() -> Self {
        Self { c: Vec::new() }
    }

    pub fn constant(k: f64) -> Self {
        Self::new(vec![k])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    pub fn deriv(&self) -> Self {
        Self::new(self.c.iter().enumerate().skip(1).map(|(i, &k)| i as f64 * k).collect())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.c.iter().map(|&v| v * k).collect())
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Poly::constant(1.0);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// p(x + s).
    pub fn shift(&self, s: f64) -> Self {
        let lin = Poly::new(vec![s, 1.0]);
        self.c.iter().rev().fold(Poly::zero(), |acc, &k| &(&acc * &lin) + &Poly::constant(k))
    }

    /// Largest coefficient magnitude, used for relative comparisons.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.c.get(i).unwrap_or(&0.0) + o.c.get(i).unwrap_or(&0.0)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|i| self.c.get(i).unwrap_or(&0.0) - o.c.get(i).unwrap_or(&0.0)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0.0; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Term {
    coef: Poly,
    half: Vec<i32>,
}

/// Sum of `poly * prod f_k^(h_k/2)` terms over a shared factor basis.
#[derive(Debug, Clone)]
pub struct Expr {
    basis: Arc<Vec<Poly>>,
    terms: Vec<Term>,
}

fn pow_half(f: f64, h: i32) -> f64 {
    if h % 2 == 0 {
        f.powi(h / 2)
    } else {
        f.sqrt().powi(h)
    }
}

impl Expr {
    pub fn new_basis(factors: Vec<Poly>) -> Arc<Vec<Poly>> {
        Arc::new(factors)
    }

    pub fn poly(basis: &Arc<Vec<Poly>>, p: Poly) -> Self {
        let mut e = Self { basis: basis.clone(), terms: Vec::new() };
        if !p.is_zero() {
            e.terms.push(Term { coef: p, half: vec![0; basis.len()] });
        }
        e
    }

    pub fn constant(basis: &Arc<Vec<Poly>>, k: f64) -> Self {
        Self::poly(basis, Poly::constant(k))
    }

    /// `f_k^(half / 2)` for basis factor `k`.
    pub fn factor(basis: &Arc<Vec<Poly>>, k: usize, half: i32) -> Self {
        let mut h = vec![0; basis.len()];
        h[k] = half;
        Self { basis: basis.clone(), terms: vec![Term { coef: Poly::constant(1.0), half: h }] }
    }

    /// Monomial of basis factors with the given half-exponents.
    pub fn monomial(basis: &Arc<Vec<Poly>>, coef: f64, half: &[i32]) -> Self {
        assert_eq!(half.len(), basis.len());
        let mut e = Self { basis: basis.clone(), terms: Vec::new() };
        if coef != 0.0 {
            e.terms.push(Term { coef: Poly::constant(coef), half: half.to_vec() });
        }
        e
    }

    pub fn basis(&self) -> &Arc<Vec<Poly>> {
        &self.basis
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn with_terms(&self, terms: Vec<Term>) -> Self {
        let mut e = Self { basis: self.basis.clone(), terms };
        e.normalize();
        e
    }

    /// Merges terms whose exponents agree modulo 2 onto their common factor.
    fn normalize(&mut self) {
        let mut groups: BTreeMap<Vec<i32>, Vec<Term>> = BTreeMap::new();
        for t in self.terms.drain(..) {
            if t.coef.is_zero() {
                continue;
            }
            let key: Vec<i32> = t.half.iter().map(|h| h.rem_euclid(2)).collect();
            groups.entry(key).or_default().push(t);
        }
        let mut out = Vec::new();
        for (_, ts) in groups {
            let k = self.basis.len();
            let lo: Vec<i32> = (0..k).map(|i| ts.iter().map(|t| t.half[i]).min().unwrap()).collect();
            let mut acc = Poly::zero();
            for t in &ts {
                let mut c = t.coef.clone();
                for i in 0..k {
                    let extra = (t.half[i] - lo[i]) / 2;
                    if extra > 0 {
                        c = &c * &self.basis[i].powi(extra as u32);
                    }
                }
                acc = &acc + &c;
            }
            if !acc.is_zero() {
                out.push(Term { coef: acc, half: lo });
            }
        }
        self.terms = out;
    }

    pub fn scale(&self, k: f64) -> Self {
        self.with_terms(self.terms.iter().map(|t| Term { coef: t.coef.scale(k), half: t.half.clone() }).collect())
    }

    pub fn deriv(&self) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            out.push(Term { coef: t.coef.deriv(), half: t.half.clone() });
            for (k, &h) in t.half.iter().enumerate() {
                if h == 0 {
                    continue;
                }
                let fk = &self.basis[k];
                let mut half = t.half.clone();
                half[k] -= 2;
                out.push(Term { coef: (&t.coef * &fk.deriv()).scale(h as f64 / 2.0), half });
            }
        }
        self.with_terms(out)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let fv: Vec<f64> = self.basis.iter().map(|f| f.eval(x)).collect();
        let mut s = 0.0;
        for t in &self.terms {
            let mut v = t.coef.eval(x);
            for (k, &h) in t.half.iter().enumerate() {
                if h != 0 {
                    v *= pow_half(fv[k], h);
                }
            }
            s += v;
        }
        s
    }

    /// Numerator and denominator when every exponent is an integer.
    pub fn to_fraction(&self) -> Option<(Poly, Poly)> {
        if self.terms.iter().any(|t| t.half.iter().any(|h| h % 2 != 0)) {
            return None;
        }
        let k = self.basis.len();
        let lo: Vec<i32> = (0..k)
            .map(|i| self.terms.iter().map(|t| t.half[i]).min().unwrap_or(0).min(0))
            .collect();
        let mut num = Poly::zero();
        for t in &self.terms {
            let mut c = t.coef.clone();
            for i in 0..k {
                let e = (t.half[i] - lo[i]) / 2;
                if e > 0 {
                    c = &c * &self.basis[i].powi(e as u32);
                }
            }
            num = &num + &c;
        }
        let mut den = Poly::constant(1.0);
        for i in 0..k {
            if lo[i] < 0 {
                den = &den * &self.basis[i].powi((-lo[i] / 2) as u32);
            }
        }
        Some((num, den))
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, o: &Expr) -> Expr {
        assert!(Arc::ptr_eq(&self.basis, &o.basis), "expressions over different bases");
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        self.with_terms(terms)
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, o: &Expr) -> Expr {
        self + &o.scale(-1.0)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, o: &Expr) -> Expr {
        assert!(Arc::ptr_eq(&self.basis, &o.basis), "expressions over different bases");
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for a in &self.terms {
            for b in &o.terms {
                terms.push(Term {
                    coef: &a.coef * &b.coef,
                    half: a.half.iter().zip(&b.half).map(|(x, y)| x + y).collect(),
                });
            }
        }
        self.with_terms(terms)
    }
}

/// True when p1/q1 and p2/q2 agree as rational functions, up to a relative
/// tolerance on the cross-multiplied coefficients.
pub fn same_fraction(p1: &Poly, q1: &Poly, p2: &Poly, q2: &Poly, rel_tol: f64) -> bool {
    let lhs = p1 * q2;
    let rhs = p2 * q1;
    let scale = lhs.max_abs().max(rhs.max_abs()).max(f64::MIN_POSITIVE);
    (&lhs - &rhs).max_abs() <= rel_tol * scale
}
