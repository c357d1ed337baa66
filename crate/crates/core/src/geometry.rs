//! Volumes of n-balls, their caps and pairwise intersections.
//!
//! The intersection ("lens") of a ball of radius `r` and a ball of radius
//! `r_d` whose centers are `x` apart is written A(r, r_d, x). In the open
//! lens regime `|r - r_d| < x < r + r_d` it is the sum of the two caps cut
//! off by the radical hyperplane, which sits at distance
//! `c = (x² + r² - r_d²) / (2x)` from the center of the `r`-ball.

use crate::error::{Error, Result};
use crate::math::{acos, asin, powi, sin, sqrt, PI};
use crate::special::incomplete_beta_unchecked;

/// Two balls in `n` dimensions: radii `r` and `r_d`, centers `x` apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensGeometry {
    n: u32,
    r: f64,
    r_d: f64,
    x: f64,
}

impl LensGeometry {
    /// Validates `n >= 1`, `r >= 0`, `r_d > 0`, `x >= 0`.
    pub fn new(n: u32, r: f64, r_d: f64, x: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain(
                "LensGeometry",
                "dimension must be at least 1",
            ));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::domain(
                "LensGeometry",
                "r must be finite and nonnegative",
            ));
        }
        if !(r_d > 0.0 && r_d.is_finite()) {
            return Err(Error::domain(
                "LensGeometry",
                "r_d must be finite and positive",
            ));
        }
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::domain(
                "LensGeometry",
                "x must be finite and nonnegative",
            ));
        }
        Ok(Self { n, r, r_d, x })
    }

    /// Dimension.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Radius of the first ball.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Radius of the second ball.
    pub fn r_d(&self) -> f64 {
        self.r_d
    }

    /// Center separation.
    pub fn x(&self) -> f64 {
        self.x
    }

    /// β = min(r, r_d).
    pub fn beta(&self) -> f64 {
        self.r.min(self.r_d)
    }

    /// True when `|r - r_d| <= x <= r + r_d`.
    pub fn in_lens_regime(&self) -> bool {
        (self.r - self.r_d).abs() <= self.x && self.x <= self.r + self.r_d
    }
}

/// Volume of the unit ball, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain(
            "unit_ball_volume",
            "dimension must be at least 1",
        ));
    }
    Ok(unit_ball_volume_unchecked(n))
}

/// v_n through the recurrence v_n = 2π v_{n-2} / n, exact in the base cases.
pub(crate) fn unit_ball_volume_unchecked(n: u32) -> f64 {
    let (mut k, mut v) = if n % 2 == 0 { (0, 1.0) } else { (1, 2.0) };
    while k < n {
        k += 2;
        v *= 2.0 * PI / f64::from(k);
    }
    v
}

/// Volume of the cap of height `h` cut from an n-ball of radius `radius`.
pub fn cap_volume(n: u32, radius: f64, h: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("cap_volume", "dimension must be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(
            "cap_volume",
            "radius must be positive and finite",
        ));
    }
    if !(0.0..=2.0 * radius).contains(&h) {
        return Err(Error::domain("cap_volume", "height must lie in [0, 2R]"));
    }
    Ok(cap_volume_unchecked(
        n,
        unit_ball_volume_unchecked(n),
        radius,
        h,
    ))
}

pub(crate) fn cap_volume_unchecked(n: u32, v_n: f64, radius: f64, h: f64) -> f64 {
    let ball = v_n * powi(radius, n);
    if h <= 0.0 {
        return 0.0;
    }
    if h >= 2.0 * radius {
        return ball;
    }
    if h == radius {
        return 0.5 * ball;
    }
    if h > radius {
        return ball - cap_volume_unchecked(n, v_n, radius, 2.0 * radius - h);
    }
    match n {
        1 => h,
        2 => {
            // segment area R²(θ − sin θ)/2 with sin(θ/4) = √(h/2R)
            let theta = 4.0 * asin(sqrt(0.5 * h / radius));
            0.5 * radius * radius * theta_minus_sin(theta)
        }
        3 => PI * h * h * (3.0 * radius - h) / 3.0,
        _ => {
            let u = h / radius;
            0.5 * ball * beta_half(u * (2.0 - u), (1.0 - u) * (1.0 - u), 0.5 * f64::from(n + 1))
        }
    }
}

/// I_z(a, 1/2) given both `z` and `1 − z`, using whichever is accurate.
fn beta_half(z: f64, one_minus_z: f64, a: f64) -> f64 {
    if z <= 0.5 {
        incomplete_beta_unchecked(z, a, 0.5)
    } else {
        1.0 - incomplete_beta_unchecked(one_minus_z, 0.5, a)
    }
}

/// `θ − sin θ` without cancellation for small `θ`.
fn theta_minus_sin(theta: f64) -> f64 {
    if theta < 0.1 {
        let t2 = theta * theta;
        theta * t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0)))
    } else {
        theta - sin(theta)
    }
}

/// A(r, r_d, x) for a validated geometry.
pub fn intersection_volume(g: &LensGeometry) -> f64 {
    lens_volume(g.n, unit_ball_volume_unchecked(g.n), g.r, g.r_d, g.x)
}

pub(crate) fn lens_volume(n: u32, v_n: f64, r: f64, r_d: f64, x: f64) -> f64 {
    if r <= 0.0 || x >= r + r_d {
        return 0.0;
    }
    let small = v_n * powi(r.min(r_d), n);
    if x <= (r - r_d).abs() {
        return small;
    }
    let c1 = (x * x + (r - r_d) * (r + r_d)) / (2.0 * x);
    let h1 = (r - c1).clamp(0.0, 2.0 * r);
    let h2 = (r_d - (x - c1)).clamp(0.0, 2.0 * r_d);
    let v = cap_volume_unchecked(n, v_n, r, h1) + cap_volume_unchecked(n, v_n, r_d, h2);
    v.clamp(0.0, small)
}

/// One-dimensional overlap length `max(0, min(r + r_d - x, 2 min(r, r_d)))`.
pub fn intersection_volume_1d(r: f64, r_d: f64, x: f64) -> f64 {
    (r + r_d - x).min(2.0 * r.min(r_d)).max(0.0)
}

/// Area of the intersection of two discs, by the classical lens formula.
pub fn intersection_volume_2d(r: f64, r_d: f64, x: f64) -> f64 {
    if x >= r + r_d || r <= 0.0 {
        return 0.0;
    }
    let beta = r.min(r_d);
    if x <= (r - r_d).abs() {
        return PI * beta * beta;
    }
    let kite = (r_d + r - x) * (r_d + r + x) * (x - r_d + r) * (x + r_d - r);
    let v = r_d * r_d * acos((x * x + r_d * r_d - r * r) / (2.0 * x * r_d))
        + r * r * acos((x * x + r * r - r_d * r_d) / (2.0 * x * r))
        - 0.5 * sqrt(kite.max(0.0));
    v.clamp(0.0, PI * beta * beta)
}

/// ∂A/∂r: the (n−1)-measure of the part of the radius-`r` sphere lying inside
/// the `r_d`-ball.
///
/// At the junction `x = |r - r_d|` the one-sided value from the open lens
/// regime is returned; at `x = r + r_d` the result is 0. Both choices only
/// matter for `n = 1`, where A has corners there.
pub fn intersection_volume_derivative_r(g: &LensGeometry) -> f64 {
    lens_volume_derivative_r(g.n, unit_ball_volume_unchecked(g.n), g.r, g.r_d, g.x)
}

pub(crate) fn lens_volume_derivative_r(n: u32, v_n: f64, r: f64, r_d: f64, x: f64) -> f64 {
    let sphere = f64::from(n) * v_n * powi(r, n - 1);
    if r <= 0.0 {
        return if n == 1 && x < r_d { 2.0 } else { 0.0 };
    }
    if x >= r + r_d || x + r_d < r {
        return 0.0;
    }
    if x + r < r_d {
        return sphere;
    }
    if x == 0.0 {
        // r == r_d: the sphere is the boundary of the other ball.
        return 0.5 * sphere;
    }
    let t = ((x * x + (r - r_d) * (r + r_d)) / (2.0 * x * r)).clamp(-1.0, 1.0);
    sphere * sphere_cap_fraction(n, t)
}

/// Fraction of the unit sphere S^{n−1} with first coordinate at least `t`.
fn sphere_cap_fraction(n: u32, t: f64) -> f64 {
    match n {
        1 => 0.5,
        2 => acos(t) / PI,
        3 => 0.5 * (1.0 - t),
        _ => {
            let z = ((1.0 - t) * (1.0 + t)).max(0.0);
            let w = 0.5 * beta_half(z, t * t, 0.5 * f64::from(n - 1));
            if t >= 0.0 {
                w
            } else {
                1.0 - w
            }
        }
    }
}

fn check_lens_regime(op: &'static str, g: &LensGeometry) -> Result<()> {
    if g.in_lens_regime() {
        Ok(())
    } else {
        Err(Error::domain(
            op,
            "separation outside |r - r_d| <= x <= r + r_d",
        ))
    }
}

/// Volume of the box `(r + r_d - x) × (2β)^{n−1}` that contains the lens.
pub fn intersection_upper_bound(g: &LensGeometry) -> Result<f64> {
    check_lens_regime("intersection_upper_bound", g)?;
    Ok((g.r + g.r_d - g.x) * powi(2.0 * g.beta(), g.n - 1))
}

/// Volume of the ball of diameter `r + r_d - x` inscribed in the lens.
pub fn intersection_lower_bound(g: &LensGeometry) -> Result<f64> {
    check_lens_regime("intersection_lower_bound", g)?;
    Ok(unit_ball_volume_unchecked(g.n) * powi(0.5 * (g.r + g.r_d - g.x), g.n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LENS_2D_UNIT: f64 = 1.228_369_698_608_756_8; // 2π/3 − √3/2

    fn lens(n: u32, r: f64, r_d: f64, x: f64) -> LensGeometry {
        LensGeometry::new(n, r, r_d, x).unwrap()
    }

    #[test]
    fn unit_ball_volumes() {
        assert_eq!(unit_ball_volume(1).unwrap(), 2.0);
        assert!((unit_ball_volume(2).unwrap() - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-15);
        // π^{n/2} / Γ(n/2 + 1) for n = 7
        let v7 = libm::pow(PI, 3.5) / libm::tgamma(4.5);
        assert!((unit_ball_volume(7).unwrap() - v7).abs() < 1e-13 * v7);
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn cap_volume_endpoints() {
        for n in 1..=6 {
            let v = unit_ball_volume(n).unwrap();
            assert_eq!(cap_volume(n, 1.7, 0.0).unwrap(), 0.0);
            assert!((cap_volume(n, 1.7, 3.4).unwrap() - v * powi(1.7, n)).abs() < 1e-12);
            assert!((cap_volume(n, 1.7, 1.7).unwrap() - 0.5 * v * powi(1.7, n)).abs() < 1e-12);
        }
        assert!(cap_volume(2, 1.0, 2.5).is_err());
        assert!(cap_volume(2, 1.0, -0.1).is_err());
    }

    #[test]
    fn cap_volume_closed_forms_match_beta_route() {
        // n = 1 and n = 3 take closed-form paths; compare against the beta form.
        for &(n, h) in &[(1u32, 0.3), (1, 1.4), (3, 0.25), (3, 0.9), (3, 1.6)] {
            let v = unit_ball_volume(n).unwrap();
            let (hh, flip) = if h > 1.0 { (2.0 - h, true) } else { (h, false) };
            let z = hh * (2.0 - hh);
            let half = 0.5 * v * incomplete_beta_unchecked(z, 0.5 * f64::from(n + 1), 0.5);
            let want = if flip { v - half } else { half };
            assert!(
                (cap_volume(n, 1.0, h).unwrap() - want).abs() < 1e-12,
                "n={n} h={h}"
            );
        }
        // circular segment, R = 1, h = 0.5
        assert!((cap_volume(2, 1.0, 0.5).unwrap() - 0.614_184_849_304_378_4).abs() < 1e-12);
    }

    #[test]
    fn lens_boundary_regimes() {
        for n in 1..=5 {
            let v = unit_ball_volume(n).unwrap();
            let g = lens(n, 2.0, 0.7, 0.0);
            assert!((intersection_volume(&g) - v * powi(0.7, n)).abs() < 1e-13);
            assert_eq!(intersection_volume(&lens(n, 2.0, 0.7, 2.7)), 0.0);
        }
        assert!((intersection_volume(&lens(2, 1.0, 1.0, 1.0)) - LENS_2D_UNIT).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_overlap() {
        assert_eq!(intersection_volume_1d(1.0, 1.0, 0.5), 1.5);
        assert_eq!(intersection_volume_1d(1.0, 1.0, 2.0), 0.0);
        assert_eq!(intersection_volume_1d(2.0, 1.0, 0.5), 2.0);
    }

    #[test]
    fn two_dimensional_lens() {
        assert!((intersection_volume_2d(1.0, 1.0, 1.0) - LENS_2D_UNIT).abs() < 1e-12);
        assert!((intersection_volume_2d(3.0, 1.0, 1.0) - PI).abs() < 1e-15);
        assert_eq!(intersection_volume_2d(1.0, 1.0, 2.5), 0.0);
    }

    #[test]
    fn derivative_regimes() {
        for n in 1..=5u32 {
            let v = unit_ball_volume(n).unwrap();
            assert_eq!(
                intersection_volume_derivative_r(&lens(n, 1.0, 2.0, 3.0)),
                0.0
            );
            assert_eq!(
                intersection_volume_derivative_r(&lens(n, 1.0, 2.0, 3.5)),
                0.0
            );
            let inside = intersection_volume_derivative_r(&lens(n, 0.5, 2.0, 1.0));
            assert!((inside - f64::from(n) * v * powi(0.5, n - 1)).abs() < 1e-14);
            // r_d-ball strictly inside the r-ball: A is flat in r
            assert_eq!(
                intersection_volume_derivative_r(&lens(n, 3.0, 1.0, 1.5)),
                0.0
            );
        }
        // n = 1 junction returns the open-lens value
        assert_eq!(
            intersection_volume_derivative_r(&lens(1, 1.0, 2.0, 1.0)),
            1.0
        );
    }

    #[test]
    fn derivative_matches_finite_difference_unit_lens() {
        let h = 1e-6;
        let fd = (intersection_volume(&lens(2, 1.0 + h, 1.0, 1.0))
            - intersection_volume(&lens(2, 1.0 - h, 1.0, 1.0)))
            / (2.0 * h);
        let d = intersection_volume_derivative_r(&lens(2, 1.0, 1.0, 1.0));
        // arc of the unit circle inside the other unit disc: 2π/3
        assert!((d - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!((d - fd).abs() <= 1e-5 * d);
    }

    #[test]
    fn ball_bounds_examples() {
        for n in 1..=4 {
            let g = lens(n, 1.3, 0.8, 2.1);
            assert_eq!(intersection_upper_bound(&g).unwrap(), 0.0);
            assert_eq!(intersection_lower_bound(&g).unwrap(), 0.0);
        }
        let g = lens(1, 1.3, 0.8, 1.0);
        assert!((intersection_upper_bound(&g).unwrap() - 1.1).abs() < 1e-15);
        assert!((intersection_lower_bound(&g).unwrap() - 1.1).abs() < 1e-15);
        assert!((intersection_volume(&g) - 1.1).abs() < 1e-15);

        let g = lens(2, 1.0, 1.0, 1.0);
        assert_eq!(intersection_upper_bound(&g).unwrap(), 2.0);
        assert!((intersection_lower_bound(&g).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(intersection_upper_bound(&lens(2, 3.0, 1.0, 1.0)).is_err());
        assert!(intersection_lower_bound(&lens(2, 1.0, 1.0, 2.5)).is_err());
    }

    fn lens_regime() -> impl Strategy<Value = (u32, f64, f64, f64)> {
        (1u32..=5, 0.01f64..10.0, 0.01f64..10.0, 0.0f64..=1.0).prop_map(|(n, r, rd, t)| {
            let lo = (r - rd).abs();
            (n, r, rd, lo + t * (r + rd - lo))
        })
    }

    proptest! {
        #[test]
        fn lens_is_symmetric(n in 1u32..=6, r in 0.0f64..5.0, rd in 0.01f64..5.0, x in 0.0f64..11.0) {
            let a = intersection_volume(&lens(n, r, rd, x));
            let b = if r > 0.0 { intersection_volume(&lens(n, rd, r, x)) } else { 0.0 };
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{} vs {}", a, b);
        }

        #[test]
        fn lens_monotone_and_bounded(n in 1u32..=5, r in 0.01f64..5.0, rd in 0.01f64..5.0,
                                     x in 0.0f64..10.0, dx in 0.0f64..1.0, dr in 0.0f64..1.0) {
            let a = intersection_volume(&lens(n, r, rd, x));
            let tol = 1e-12 * a.max(1e-300) + 1e-300;
            prop_assert!(intersection_volume(&lens(n, r, rd, x + dx)) <= a + tol);
            prop_assert!(intersection_volume(&lens(n, r + dr, rd, x)) >= a - tol);
            let cap = unit_ball_volume(n).unwrap() * powi(r.min(rd), n);
            prop_assert!(a <= cap * (1.0 + 1e-14));
        }

        #[test]
        fn lens_sandwich((n, r, rd, x) in lens_regime()) {
            let g = lens(n, r, rd, x);
            let a = intersection_volume(&g);
            let ub = intersection_upper_bound(&g).unwrap();
            let lb = intersection_lower_bound(&g).unwrap();
            // r + r_d − x cancels; rounding scales with the radii, not the lens
            let tol = 1e-12 * ub + 1e-15 * powi(r + rd, n);
            prop_assert!(lb <= a + tol && a <= ub + tol, "{} <= {} <= {}", lb, a, ub);
        }

        #[test]
        fn low_dimension_specializations_agree(r in 0.01f64..5.0, rd in 0.01f64..5.0, x in 0.0f64..11.0) {
            let one = intersection_volume(&lens(1, r, rd, x));
            prop_assert!((one - intersection_volume_1d(r, rd, x)).abs() <= 1e-10);
            let two = intersection_volume(&lens(2, r, rd, x));
            prop_assert!((two - intersection_volume_2d(r, rd, x)).abs() <= 1e-10);
        }

        #[test]
        fn derivative_matches_finite_differences((n, r, rd, x) in lens_regime()) {
            let lo = (r - rd).abs();
            let h = 1e-6 * r.max(1.0);
            // stay clear of the junctions where A has a kink in r
            prop_assume!(r > 4.0 * h && x - lo > 1e-3 && r + rd - x > 1e-3);
            prop_assume!((x - (r + h - rd).abs()).abs() > 2.0 * h && (x - (r - h - rd).abs()).abs() > 2.0 * h);
            let fd = (intersection_volume(&lens(n, r + h, rd, x)) - intersection_volume(&lens(n, r - h, rd, x))) / (2.0 * h);
            let d = intersection_volume_derivative_r(&lens(n, r, rd, x));
            prop_assert!((d - fd).abs() <= 1e-5 * d.abs().max(1e-3), "d={} fd={}", d, fd);
        }
    }
}
