//! Special functions used by the bound formulas and the n-ball cap volumes.
//!
//! | Function | Value |
//! |----------|-------|
//! | [`ln_gamma`] | ln Γ(s) |
//! | [`gamma`] | Γ(s) |
//! | [`lower_incomplete_gamma`] | γ(s, x) = ∫₀ˣ t^{s−1} e^{−t} dt |
//! | [`upper_incomplete_gamma`] | Γ(s, x) = Γ(s) − γ(s, x) |
//! | [`regularized_incomplete_beta`] | I_x(a, b) |
//! | [`binomial`] | C(n, k) |
//!
//! γ uses the power series below `x = s + 1` and the Legendre continued
//! fraction for Γ(s, x) above it. The prefactor `x^s e^{−x}` is formed in
//! log-space.

use crate::error::{Error, Result};
use crate::math::{exp, ln, ln_1p, PI};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const SERIES_MAX_ITER: usize = 10_000;
const CF_MAX_ITER: usize = 10_000;

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(s) for `s > 0`.
pub fn ln_gamma(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(
            "ln_gamma",
            "argument must be positive and finite",
        ));
    }
    Ok(ln_gamma_unchecked(s))
}

pub(crate) fn ln_gamma_unchecked(s: f64) -> f64 {
    if s < 0.5 {
        // Γ(s) = Γ(s + 1) / s keeps the Lanczos sum away from its poles.
        return lanczos(s + 1.0) - ln(s);
    }
    lanczos(s)
}

fn lanczos(s: f64) -> f64 {
    let z = s - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * ln(2.0 * PI) + (z + 0.5) * ln(t) - t + ln(acc)
}

/// Γ(s) for `s > 0`.
pub fn gamma(s: f64) -> Result<f64> {
    ln_gamma(s).map(exp)
}

/// Lower incomplete gamma function γ(s, x) = ∫₀ˣ t^{s−1} e^{−t} dt.
pub fn lower_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    check_gamma_args("lower_incomplete_gamma", s, x)?;
    Ok(lower_incomplete_gamma_unchecked(s, x))
}

pub(crate) fn lower_incomplete_gamma_unchecked(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return exp(ln_gamma_unchecked(s));
    }
    if x < s + 1.0 {
        gamma_series(s, x)
    } else {
        let full = exp(ln_gamma_unchecked(s));
        (full - gamma_continued_fraction(s, x, CF_MAX_ITER)).max(0.0)
    }
}

/// Upper incomplete gamma function Γ(s, x) = ∫ₓ^∞ t^{s−1} e^{−t} dt.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    check_gamma_args("upper_incomplete_gamma", s, x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    let full = exp(ln_gamma_unchecked(s));
    if x < s + 1.0 {
        Ok((full - gamma_series(s, x)).max(0.0))
    } else {
        Ok(gamma_continued_fraction(s, x, CF_MAX_ITER))
    }
}

fn check_gamma_args(op: &'static str, s: f64, x: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(op, "shape must be positive and finite"));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(op, "upper limit must be nonnegative"));
    }
    Ok(())
}

/// γ(s, x) by the series x^s e^{−x} Σ x^k / (s (s+1) … (s+k)).
pub(crate) fn gamma_series(s: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut denom = s;
    let mut term = 1.0 / s;
    let mut sum = term;
    for _ in 0..SERIES_MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * exp(s * ln(x) - x)
}

/// Γ(s, x) by the modified-Lentz evaluation of the Legendre continued fraction.
pub(crate) fn gamma_continued_fraction(s: f64, x: f64, max_iter: usize) -> f64 {
    let mut b = x + 1.0 - s;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / if b.abs() < FPMIN { FPMIN } else { b };
    let mut h = d;
    for i in 1..=max_iter {
        let i = i as f64;
        let an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    exp(s * ln(x) - x) * h
}

/// Regularized incomplete beta function I_x(a, b).
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(
            "regularized_incomplete_beta",
            "x must lie in [0, 1]",
        ));
    }
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(
            "regularized_incomplete_beta",
            "shape parameters must be positive and finite",
        ));
    }
    Ok(incomplete_beta_unchecked(x, a, b))
}

pub(crate) fn incomplete_beta_unchecked(x: f64, a: f64, b: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let ln_beta = ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b);
    let front = exp(a * ln(x) + b * ln_1p(-x) - ln_beta);
    if x < (a + 1.0) / (a + b + 2.0) {
        (front * beta_continued_fraction(x, a, b) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b).clamp(0.0, 1.0)
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Exact binomial coefficient C(n, k) for `k <= n <= 64`.
pub fn binomial(n: u32, k: u32) -> Result<u64> {
    if n > 64 {
        return Err(Error::domain("binomial", "n must not exceed 64"));
    }
    if k > n {
        return Err(Error::domain("binomial", "k must not exceed n"));
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // Exact at every step: c * (n - i) is divisible by (i + 1).
        c = c * u128::from(n - i) / u128::from(i + 1);
    }
    Ok(c as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    // Composite Simpson on [lo, hi] with 2n panels; test-only oracle.
    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / (2 * n) as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..2 * n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(ln_gamma(2.0).unwrap().abs() < 1e-14);
        assert!((ln_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-13);
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.0).is_err());
    }

    #[test]
    fn ln_gamma_relative_accuracy() {
        // mpmath.loggamma at 30 digits
        #[allow(clippy::excessive_precision)]
        let cases = [
            (0.1, 2.252_712_651_734_206),
            (0.3, 1.095_797_994_818_075_6),
            (3.7, 1.428_072_326_665_388_1),
            (10.5, 13.940_625_219_403_763),
            (57.25, 173.361_912_830_627_24),
            (200.0, 857.933_669_825_857_4),
        ];
        for (s, want) in cases {
            let got = ln_gamma(s).unwrap();
            assert!(rel(got, want) < 1e-12, "s={s}: {got} vs {want}");
        }
    }

    #[test]
    fn lower_gamma_closed_forms() {
        for x in [0.0, 1e-8, 0.3, 1.0, 2.5, 10.0, 40.0] {
            let got = lower_incomplete_gamma(1.0, x).unwrap();
            let want = -libm::expm1(-x);
            assert!(
                (got - want).abs() <= 1e-14 * want.max(1e-300) + 1e-300,
                "x={x}"
            );
        }
        assert_eq!(lower_incomplete_gamma(0.7, 0.0).unwrap(), 0.0);
        assert!(lower_incomplete_gamma(0.0, 1.0).is_err());
        assert!(lower_incomplete_gamma(1.0, -1.0).is_err());
    }

    #[test]
    fn lower_gamma_half_matches_simpson_oracle() {
        // γ(1/2, 1) = ∫₀¹ t^{-1/2} e^{-t} dt = 2 ∫₀¹ e^{-u²} du.
        let oracle = 2.0 * simpson(|u| libm::exp(-u * u), 0.0, 1.0, 20_000);
        let got = lower_incomplete_gamma(0.5, 1.0).unwrap();
        assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
        assert!((got - 1.493_648_265_624_854).abs() < 1e-13);
    }

    #[test]
    fn lower_gamma_tends_to_gamma() {
        for s in [0.25, 0.5, 1.0, 3.0] {
            let g = gamma(s).unwrap();
            let got = lower_incomplete_gamma(s, 200.0).unwrap();
            assert!(rel(got, g) < 1e-13);
            assert!(rel(lower_incomplete_gamma(s, f64::INFINITY).unwrap(), g) < 1e-15);
        }
    }

    #[test]
    fn series_and_continued_fraction_complement() {
        // Each route on its own domain, the other side from direct quadrature.
        use crate::math::powf;
        let tol = crate::quadrature::Tolerance::new(1e-300, 1e-12).unwrap();
        let quad = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
            crate::quadrature::integrate_between(f, lo, hi, &[], tol)
                .unwrap()
                .value
        };
        let mut s = 0.1;
        while s <= 20.0 {
            let full = exp(ln_gamma_unchecked(s));
            for &x in &[0.0, 0.05, 0.5, 1.0, 3.0, 7.5, 15.0, 25.0, 50.0] {
                // below s = 1, t = u^{1/s} removes the endpoint singularity at 0
                let part = |lo: f64, hi: f64| {
                    if s < 1.0 {
                        quad(&|u| exp(-powf(u, 1.0 / s)), powf(lo, s), powf(hi, s)) / s
                    } else {
                        quad(&|t| powf(t, s - 1.0) * exp(-t), lo, hi)
                    }
                };
                let (lower, upper) = if x < s + 1.0 {
                    (gamma_series(s, x), part(x, x + s + 200.0))
                } else {
                    (part(0.0, x), gamma_continued_fraction(s, x, CF_MAX_ITER))
                };
                assert!(
                    rel(lower + upper, full) < 1e-10,
                    "s={s} x={x}: {lower} + {upper} vs {full}"
                );
            }
            s += 0.7;
        }
    }

    #[test]
    fn incomplete_beta_endpoints_and_domain() {
        assert_eq!(regularized_incomplete_beta(0.0, 2.0, 3.0).unwrap(), 0.0);
        assert_eq!(regularized_incomplete_beta(1.0, 2.0, 3.0).unwrap(), 1.0);
        assert!(regularized_incomplete_beta(1.5, 2.0, 3.0).is_err());
        assert!(regularized_incomplete_beta(0.5, 0.0, 3.0).is_err());
    }

    #[test]
    fn incomplete_beta_matches_quadrature_oracle() {
        // ∫₀^0.3 t^{1/2} (1-t)^{-1/2} dt / B(3/2, 1/2), with t = u².
        let b = exp(ln_gamma_unchecked(1.5) + ln_gamma_unchecked(0.5) - ln_gamma_unchecked(2.0));
        let hi = libm::sqrt(0.3);
        let oracle = simpson(|u| 2.0 * u * u / libm::sqrt(1.0 - u * u), 0.0, hi, 20_000) / b;
        let got = regularized_incomplete_beta(0.3, 1.5, 0.5).unwrap();
        assert!((got - oracle).abs() < 1e-11, "{got} vs {oracle}");
        assert!((got - 0.077_274_289_987_545_6).abs() < 1e-13);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 0).unwrap(), 1);
        assert_eq!(binomial(5, 5).unwrap(), 1);
        assert_eq!(binomial(6, 2).unwrap(), 15);
        assert_eq!(binomial(64, 32).unwrap(), 1_832_624_140_942_590_534);
        assert!(binomial(3, 4).is_err());
    }

    #[test]
    fn binomial_pascal_rule() {
        for n in 1..=64u32 {
            for k in 1..n {
                let lhs = binomial(n, k).unwrap();
                let rhs = binomial(n - 1, k - 1).unwrap() + binomial(n - 1, k).unwrap();
                assert_eq!(lhs, rhs, "C({n},{k})");
            }
        }
    }

    proptest! {
        #[test]
        fn incomplete_beta_symmetry(x in 0.0f64..=1.0, a in 0.05f64..30.0, b in 0.05f64..30.0) {
            let lhs = regularized_incomplete_beta(x, a, b).unwrap();
            let rhs = 1.0 - regularized_incomplete_beta(1.0 - x, b, a).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12, "{} vs {}", lhs, rhs);
        }

        #[test]
        fn lower_gamma_monotone_in_x(s in 0.1f64..20.0, x in 0.0f64..50.0, dx in 0.0f64..5.0) {
            let a = lower_incomplete_gamma(s, x).unwrap();
            let b = lower_incomplete_gamma(s, x + dx).unwrap();
            prop_assert!(b >= a * (1.0 - 1e-14));
        }
    }
}
