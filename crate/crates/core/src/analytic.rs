//! Exact CDFs and PDFs of the contact distance R_C and the nearest-neighbor
//! distance R_N, and the two limit laws in the cluster radius.
//!
//! With `a = |r - r_d|`, `b = r + r_d` and `β = min(r, r_d)` the void
//! exponent of the ball B(o, r) is
//!
//! ```text
//! E(r) = v_n λ_p [ (1 − e^{−λ_d v_n β^n}) a^n + n ∫_a^b (1 − e^{−λ_d A(r, r_d, x)}) x^{n−1} dx ]
//! ```
//!
//! and `F_C(r) = 1 − e^{−E(r)}`. On `[0, a]` the lens volume is the constant
//! `v_n β^n`, so only the lens regime is integrated numerically. All inner
//! integrals use [`Tolerance::INNER`](crate::Tolerance::INNER).

use crate::error::{Error, Result};
use crate::geometry::{lens_volume, lens_volume_derivative_r};
use crate::math::{exp_neg, expm1, one_minus_exp_neg, powi};
use crate::params::McpParams;
use crate::quadrature::integrate_inner;

/// Lens geometry with the process parameters folded in.
#[derive(Clone, Copy)]
pub(crate) struct Kernel {
    pub(crate) n: u32,
    pub(crate) v_n: f64,
    pub(crate) r_d: f64,
    pub(crate) lambda_d: f64,
    pub(crate) lambda_p: f64,
}

impl Kernel {
    pub(crate) fn new(p: &McpParams) -> Self {
        Self {
            n: p.n(),
            v_n: p.v_n(),
            r_d: p.r_d(),
            lambda_d: p.lambda_d(),
            lambda_p: p.lambda_p(),
        }
    }

    fn lens(&self, r: f64, x: f64) -> f64 {
        lens_volume(self.n, self.v_n, r, self.r_d, x)
    }

    fn lens_dr(&self, r: f64, x: f64) -> f64 {
        lens_volume_derivative_r(self.n, self.v_n, r, self.r_d, x)
    }

    fn xpow(&self, x: f64) -> f64 {
        powi(x, self.n - 1)
    }

    /// λ_d v_n β^n, the mean daughter count of a cluster inside B(o, r) when
    /// the cluster ball and B(o, r) are nested.
    pub(crate) fn kappa(&self, r: f64) -> f64 {
        self.lambda_d * self.v_n * powi(r.min(self.r_d), self.n)
    }

    /// `∫_lo^hi (1 − e^{−λ_d A(r, r_d, x)}) x^{n−1} dx` over part of the lens regime.
    fn hit_integral(&self, r: f64, lo: f64, hi: f64) -> Result<f64> {
        integrate_inner(
            |x| one_minus_exp_neg(self.lambda_d * self.lens(r, x)) * self.xpow(x),
            lo,
            hi,
        )
    }

    /// `∫_lo^hi ∂A/∂r e^{−λ_d A} x^{n−1} dx` plus the closed-form part where the
    /// sphere of radius `r` lies inside the cluster ball.
    fn flux_integral(&self, r: f64, lo: f64, hi: f64) -> Result<f64> {
        let inside = if r < self.r_d {
            self.v_n * powi(r, self.n - 1) * exp_neg(self.kappa(r)) * powi(self.r_d - r, self.n)
        } else {
            0.0
        };
        let lens = integrate_inner(
            |x| self.lens_dr(r, x) * exp_neg(self.lambda_d * self.lens(r, x)) * self.xpow(x),
            lo,
            hi,
        )?;
        Ok(inside + lens)
    }

    /// Void exponent E(r) = −ln(1 − F_C(r)).
    pub(crate) fn void_exponent(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let a = (r - self.r_d).abs();
        let b = r + self.r_d;
        let nested = one_minus_exp_neg(self.kappa(r)) * powi(a, self.n);
        let lens = self.hit_integral(r, a, b)?;
        Ok(self.v_n * self.lambda_p * (nested + f64::from(self.n) * lens))
    }

    /// Probability that a typical point's own cluster puts a sibling inside
    /// B(o, r), for `r < 2 r_d`.
    pub(crate) fn sibling_hit(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let a = (r - self.r_d).abs();
        let nested = one_minus_exp_neg(self.kappa(r)) * powi(a / self.r_d, self.n);
        let lens = self.hit_integral(r, a, self.r_d)?;
        Ok((nested + f64::from(self.n) * lens / powi(self.r_d, self.n)).clamp(0.0, 1.0))
    }

    fn contact_pdf(&self, r: f64, exponent: f64) -> Result<f64> {
        let flux = self.flux_integral(r, (r - self.r_d).abs(), r + self.r_d)?;
        Ok(f64::from(self.n) * self.v_n * self.lambda_p * self.lambda_d * exp_neg(exponent) * flux)
    }
}

fn check_radius(op: &'static str, r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, "radius must be finite and nonnegative"))
    }
}

/// Void exponent `−ln(1 − F_C(r))` of the ball B(o, r).
pub fn contact_void_exponent(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("contact_void_exponent", r)?;
    Kernel::new(p).void_exponent(r)
}

/// CDF of the contact distance, F_C(r).
pub fn contact_cdf(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("contact_cdf", r)?;
    Kernel::new(p).void_exponent(r).map(one_minus_exp_neg)
}

/// Closed-form contact-distance CDF on the line (`n = 1`).
///
/// Uses `A = min(r + r_d − x, 2β)`, which integrates to
/// `E = 2 λ_p (r + r_d − a e^{−2λ_d β} + (e^{−2λ_d β} − 1) / λ_d)`; the sum is
/// regrouped so that no two large terms cancel.
pub fn contact_cdf_1d(p: &McpParams, r: f64) -> Result<f64> {
    if p.n() != 1 {
        return Err(Error::domain("contact_cdf_1d", "requires n = 1"));
    }
    check_radius("contact_cdf_1d", r)?;
    let lambda_d = p.lambda_d();
    let a = (r - p.r_d()).abs();
    let u = 2.0 * lambda_d * p.beta(r);
    let exponent = 2.0 * p.lambda_p() * (a * one_minus_exp_neg(u) + u_minus_hit(u) / lambda_d);
    Ok(one_minus_exp_neg(exponent))
}

/// `u − (1 − e^{−u})` without cancellation near zero.
fn u_minus_hit(u: f64) -> f64 {
    if u < 0.1 {
        // u²/2 − u³/6 + u⁴/24 − …
        let mut term = u * u / 2.0;
        let mut sum = term;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs() {
            k += 1.0;
            term *= -u / k;
            sum += term;
        }
        sum
    } else {
        u + expm1(-u)
    }
}

/// PDF of the contact distance, f_C(r) = dF_C/dr.
pub fn contact_pdf(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("contact_pdf", r)?;
    let k = Kernel::new(p);
    let e = k.void_exponent(r)?;
    k.contact_pdf(r, e)
}

/// CDF of the nearest-neighbor distance, F_N(r).
///
/// For `r < 2 r_d`, `1 − F_N = (1 − F_C) (n / r_d^n) ∫₀^{r_d} e^{−λ_d A} x^{n−1} dx`;
/// from `r = 2 r_d` on, the cluster ball is always covered and
/// `1 − F_N = (1 − F_C) e^{−m}`.
pub fn nnd_cdf(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("nnd_cdf", r)?;
    let k = Kernel::new(p);
    let e = k.void_exponent(r)?;
    if r >= 2.0 * p.r_d() {
        return Ok(one_minus_exp_neg(e + p.m()));
    }
    let q = k.sibling_hit(r)?;
    let f_c = one_minus_exp_neg(e);
    Ok((f_c + q * exp_neg(e)).min(1.0))
}

/// PDF of the nearest-neighbor distance, f_N(r) = dF_N/dr.
pub fn nnd_pdf(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("nnd_pdf", r)?;
    let k = Kernel::new(p);
    let e = k.void_exponent(r)?;
    let f_c = k.contact_pdf(r, e)?;
    if r >= 2.0 * p.r_d() {
        return Ok(f_c * exp_neg(p.m()));
    }
    let q = k.sibling_hit(r)?;
    let flux = k.flux_integral(r, (r - p.r_d()).abs(), p.r_d())?;
    let own = f64::from(p.n()) * p.lambda_d() / powi(p.r_d(), p.n()) * flux;
    Ok(f_c * (1.0 - q) + exp_neg(e) * own)
}

/// Limit of F_C as `r_d → 0` at fixed `m`: a PPP of intensity `λ_p (1 − e^{−m})`.
pub fn limit_cdf_rd_zero(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("limit_cdf_rd_zero", r)?;
    let e = p.v_n() * p.lambda_p() * powi(r, p.n()) * one_minus_exp_neg(p.m());
    Ok(one_minus_exp_neg(e))
}

/// Limit of F_C as `r_d → ∞` at fixed `m`: a PPP of intensity `m λ_p`.
pub fn limit_cdf_rd_inf(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("limit_cdf_rd_inf", r)?;
    Ok(one_minus_exp_neg(
        p.m() * p.v_n() * p.lambda_p() * powi(r, p.n()),
    ))
}
