//! Moving-average kernel of the fractional Lévy process,
//! `f(t,s) = ((t−s)_+^{H−1/2} − (−s)_+^{H−1/2}) / Γ(H+1/2)`, and the integrals
//! `∫ f(t,s)^n ds` that turn driver cumulants into process cumulants.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlpKernel {
    hurst: f64,
    exponent: f64,
    norm: f64,
}

impl FlpKernel {
    /// `hurst` must lie in `(1/2, 1)`.
    pub fn new(hurst: f64) -> Self {
        Self {
            hurst,
            exponent: hurst - 0.5,
            norm: gamma(hurst + 0.5),
        }
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// `H − 1/2`.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// `Γ(H + 1/2)`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// `u_+^{H−1/2}`.
    #[inline]
    pub fn power(&self, u: f64) -> f64 {
        if u > 0.0 {
            u.powf(self.exponent)
        } else {
            0.0
        }
    }

    #[inline]
    pub fn weight(&self, t: f64, s: f64) -> f64 {
        (self.power(t - s) - self.power(-s)) / self.norm
    }

    /// `(1+u)^a − u^a` without cancellation for large `u`.
    fn past_difference(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 1.0;
        }
        let a = self.exponent;
        u.powf(a) * (a * (1.0 / u).ln_1p()).exp_m1()
    }

    /// `∫_{−∞}^{1} f(1,s)^n ds`; scaling gives
    /// `∫ f(t,s)^n ds = t^{(H−1/2)n+1} · moment_integral(n)`.
    pub fn moment_integral(&self, n: usize) -> f64 {
        self.present_part(n) + self.past_part(n, f64::INFINITY)
    }

    /// Same integral restricted to `s ∈ [−window, t]`, evaluated at time `t`.
    pub fn truncated_moment_integral(&self, n: usize, t: f64, window: f64) -> f64 {
        let scale = t.powf(self.exponent * n as f64 + 1.0);
        scale * (self.present_part(n) + self.past_part(n, window / t))
    }

    /// Relative shortfall of `Var X(t)` caused by cutting the integral at `−window`.
    pub fn truncation_deficit(&self, t: f64, window: f64) -> f64 {
        let full = t.powf(2.0 * self.hurst) * self.moment_integral(2);
        1.0 - self.truncated_moment_integral(2, t, window) / full
    }

    /// Closed form of `∫ f(1,s)^2 ds`: `1 / (Γ(2H+1) · sin(πH))`.
    pub fn variance_constant(&self) -> f64 {
        1.0 / (gamma(2.0 * self.hurst + 1.0) * (PI * self.hurst).sin())
    }

    // s ∈ [0, 1]: f(1,s) = (1−s)^a / Γ
    fn present_part(&self, n: usize) -> f64 {
        1.0 / ((self.exponent * n as f64 + 1.0) * self.norm.powi(n as i32))
    }

    // s = −u, u ∈ [0, limit]
    fn past_part(&self, n: usize, limit: f64) -> f64 {
        let ni = n as i32;
        let a = self.exponent;
        let g = |u: f64| self.past_difference(u).powi(ni);
        let head = quadrature::integrate(g, 0.0, limit.min(1.0), QUAD_TOL).integral;
        let tail = if limit > 1.0 {
            // u = x^{−k} on [1, limit]; k makes the integrand tend to k·a^n at x = 0
            let k = 1.0 / (n as f64 * (1.0 - a) - 1.0);
            let lower = if limit.is_finite() { limit.powf(-1.0 / k) } else { 0.0 };
            let h = |x: f64| {
                let ln_u = -k * x.ln();
                if ln_u > 600.0 {
                    return k * a.powi(ni);
                }
                let u = ln_u.exp();
                k * g(u) * u / x
            };
            quadrature::integrate(h, lower, 1.0, QUAD_TOL).integral
        } else {
            0.0
        };
        (head + tail) / self.norm.powi(ni)
    }
}
