//! Quadrature rules: a double-exponential rule for endpoint-singular Euler
//! integrals and composite Gauss-Legendre for smooth integrands.

use std::f64::consts::PI;

/// Double-exponential (tanh-sinh) rule for
/// `int_0^1 t^(p-1) (1-t)^(q-1) g(t) dt` with p, q > 0.
///
/// The algebraic endpoint factors are folded into the exponent in log form,
/// so nodes that round to 0 or 1 never produce inf * 0.
#[derive(Debug, Clone)]
pub struct TanhSinh {
    step: f64,
    u_max: f64,
}

impl Default for TanhSinh {
    fn default() -> Self {
        Self { step: 1.0 / 32.0, u_max: 8.0 }
    }
}

impl TanhSinh {
    pub fn new(step: f64, u_max: f64) -> Self {
        Self { step, u_max }
    }

    pub fn beta_weighted<F: Fn(f64) -> f64>(&self, p: f64, q: f64, g: F) -> f64 {
        let n = (self.u_max / self.step).ceil() as i64;
        let mut sum = 0.0;
        for k in -n..=n {
            let u = k as f64 * self.step;
            let sigma = PI * u.sinh();
            // ln t and ln(1 - t) for t = 1 / (1 + exp(-sigma))
            let (ln_t, ln_tc) = if sigma >= 0.0 {
                let e = (-sigma).exp();
                (-e.ln_1p(), -sigma - e.ln_1p())
            } else {
                let e = sigma.exp();
                (sigma - e.ln_1p(), -e.ln_1p())
            };
            let log_w = p * ln_t + q * ln_tc + (PI * u.cosh()).ln();
            if log_w < -745.0 {
                continue;
            }
            let t = ln_t.exp();
            sum += log_w.exp() * g(t);
        }
        sum * self.step
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn composite<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, panels: usize) -> f64 {
        let panels = panels.max(1);
        let w = (b - a) / panels as f64;
        let parts: Vec<f64> =
            (0..panels).map(|k| self.integrate(&f, a + w * k as f64, a + w * (k + 1) as f64)).collect();
        crate::exec::pairwise_sum(&parts)
    }

    /// Composite rule at `panels` and `2 * panels`; returns (fine value,
    /// absolute difference) as a self-estimate of the error.
    pub fn composite_checked<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, panels: usize) -> (f64, f64) {
        let coarse = self.composite(&f, a, b, panels);
        let fine = self.composite(&f, a, b, 2 * panels);
        (fine, (fine - coarse).abs())
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
