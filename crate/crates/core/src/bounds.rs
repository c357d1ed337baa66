//! Closed-form bounds on the contact and nearest-neighbor distance CDFs.
//!
//! Two substitutions for the lens volume drive everything here: the
//! enclosing box `A ≤ (b − x)(2β)^{n−1}` and the inscribed ball
//! `A ≥ v_n ((b − x)/2)^n`, both valid on the lens regime `a ≤ x ≤ b`.
//! The tight family integrates them in closed form; the simple family
//! replaces the whole lens regime by full or zero coverage.
//!
//! Every tight closed form is certified once per dimension against direct
//! quadrature of the same bounded integrand. A form that fails
//! certification, or whose alternating sum is ill-conditioned at a given
//! radius, is evaluated by that quadrature instead.

use core::sync::atomic::{AtomicU8, Ordering};

use crate::analytic::Kernel;
use crate::curve::{CurveKind, Target};
use crate::error::{Error, Result};
use crate::math::{exp_neg, one_minus_exp_neg, powf, powi, CompensatedSum};
use crate::params::McpParams;
use crate::quadrature::integrate_inner;
use crate::special::{binomial, lower_incomplete_gamma_unchecked};

/// Largest ratio of summed term magnitudes to the result that a closed form
/// may have before the quadrature reference takes over.
pub const CONDITION_LIMIT: f64 = 1e4;

/// Largest dimension whose closed forms are certified; higher dimensions
/// always use the quadrature reference.
pub const MAX_CERTIFIED_DIM: u32 = 8;

/// Agreement required between a closed form and its reference on the
/// certification grid, in CDF units.
pub const CERTIFICATION_TOLERANCE: f64 = 1e-8;

/// Upper or lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Upper bound.
    Upper,
    /// Lower bound.
    Lower,
}

/// Bound family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Box / inscribed-ball substitution integrated in closed form.
    Tight,
    /// Lens regime replaced by full or zero coverage (contact distance only).
    Simple,
    /// Own-cluster factor bounded by nested coverage (nearest-neighbor upper only).
    Extra,
}

/// A valid (target, side, family) combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundSelector {
    target: Target,
    side: Side,
    family: Family,
}

impl BoundSelector {
    /// Every valid selector, in a fixed order.
    pub const ALL: [BoundSelector; 7] = [
        BoundSelector {
            target: Target::Contact,
            side: Side::Upper,
            family: Family::Tight,
        },
        BoundSelector {
            target: Target::Contact,
            side: Side::Lower,
            family: Family::Tight,
        },
        BoundSelector {
            target: Target::Contact,
            side: Side::Upper,
            family: Family::Simple,
        },
        BoundSelector {
            target: Target::Contact,
            side: Side::Lower,
            family: Family::Simple,
        },
        BoundSelector {
            target: Target::NearestNeighbor,
            side: Side::Upper,
            family: Family::Tight,
        },
        BoundSelector {
            target: Target::NearestNeighbor,
            side: Side::Lower,
            family: Family::Tight,
        },
        BoundSelector {
            target: Target::NearestNeighbor,
            side: Side::Upper,
            family: Family::Extra,
        },
    ];

    /// Checks that the combination exists.
    pub fn new(target: Target, side: Side, family: Family) -> Result<Self> {
        let ok = match (target, family) {
            (_, Family::Tight) => true,
            (Target::Contact, Family::Simple) => true,
            (Target::NearestNeighbor, Family::Extra) => side == Side::Upper,
            _ => false,
        };
        if ok {
            Ok(Self {
                target,
                side,
                family,
            })
        } else {
            Err(Error::domain(
                "BoundSelector",
                "no such bound for this target",
            ))
        }
    }

    /// Distance the bound applies to.
    pub fn target(&self) -> Target {
        self.target
    }

    /// Upper or lower.
    pub fn side(&self) -> Side {
        self.side
    }

    /// Family.
    pub fn family(&self) -> Family {
        self.family
    }

    /// Curve tag for tabulations of this bound.
    pub fn kind(&self) -> CurveKind {
        match (self.family, self.side) {
            (Family::Tight, Side::Upper) => CurveKind::UpperTight,
            (Family::Tight, Side::Lower) => CurveKind::LowerTight,
            (Family::Simple, Side::Upper) => CurveKind::UpperSimple,
            (Family::Simple, Side::Lower) => CurveKind::LowerSimple,
            (Family::Extra, _) => CurveKind::NndExtraUpper,
        }
    }

    /// Evaluates the bound on the CDF at `r`.
    pub fn evaluate(&self, p: &McpParams, r: f64) -> Result<f64> {
        match (self.target, self.side, self.family) {
            (Target::Contact, Side::Upper, Family::Tight) => contact_cdf_ub_tight(p, r),
            (Target::Contact, Side::Lower, Family::Tight) => contact_cdf_lb_tight(p, r),
            (Target::Contact, Side::Upper, Family::Simple) => contact_cdf_ub_simple(p, r),
            (Target::Contact, Side::Lower, Family::Simple) => contact_cdf_lb_simple(p, r),
            (Target::NearestNeighbor, Side::Upper, Family::Tight) => nnd_cdf_ub_tight(p, r),
            (Target::NearestNeighbor, Side::Lower, Family::Tight) => nnd_cdf_lb_tight(p, r),
            (Target::NearestNeighbor, Side::Upper, Family::Extra) => nnd_cdf_ub_extra(p, r),
            _ => unreachable!("BoundSelector invariants"),
        }
    }
}

/// The four closed forms subject to certification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedForm {
    /// Box-bounded lens integral, contact distance.
    ContactUpper,
    /// Ball-bounded lens integral, contact distance.
    ContactLower,
    /// Box-bounded own-cluster integral, nearest-neighbor distance.
    NndUpper,
    /// Ball-bounded own-cluster integral, nearest-neighbor distance.
    NndLower,
}

impl ClosedForm {
    /// All forms.
    pub const ALL: [ClosedForm; 4] = [
        ClosedForm::ContactUpper,
        ClosedForm::ContactLower,
        ClosedForm::NndUpper,
        ClosedForm::NndLower,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

/// Outcome of certifying a closed form in one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Certification {
    /// The closed form matched its reference on every grid point.
    Certified,
    /// The closed form disagreed; the reference quadrature is used instead.
    Rejected {
        /// Largest CDF discrepancy seen.
        max_error: f64,
        /// Parameters and radius `(m, r_d, r)` where it was seen.
        at: (f64, f64, f64),
    },
    /// The dimension is above [`MAX_CERTIFIED_DIM`].
    NotAttempted,
}

const UNKNOWN: u8 = 0;
const CERTIFIED: u8 = 1;
const REJECTED: u8 = 2;

const SLOTS: usize = 4 * MAX_CERTIFIED_DIM as usize;
#[allow(clippy::declare_interior_mutable_const)]
const FRESH: AtomicU8 = AtomicU8::new(UNKNOWN);
static STATUS: [AtomicU8; SLOTS] = [FRESH; SLOTS];

/// Runs the certification sweep for a closed form, records the outcome for
/// later evaluations and returns it.
pub fn certification(form: ClosedForm, n: u32) -> Certification {
    if n == 0 || n > MAX_CERTIFIED_DIM {
        return Certification::NotAttempted;
    }
    let outcome = certify_with(form, n, |k, r| closed(form, k, r, 1.0));
    let slot = &STATUS[form.index() * MAX_CERTIFIED_DIM as usize + (n - 1) as usize];
    let code = if outcome == Certification::Certified {
        CERTIFIED
    } else {
        REJECTED
    };
    slot.store(code, Ordering::Relaxed);
    outcome
}

fn closed_form_usable(form: ClosedForm, n: u32) -> bool {
    if n > MAX_CERTIFIED_DIM {
        return false;
    }
    let slot = &STATUS[form.index() * MAX_CERTIFIED_DIM as usize + (n - 1) as usize];
    match slot.load(Ordering::Relaxed) {
        CERTIFIED => true,
        REJECTED => false,
        _ => certification(form, n) == Certification::Certified,
    }
}

const CERT_MEANS: [f64; 3] = [0.5, 5.0, 50.0];
const CERT_RADII: [f64; 3] = [0.1, 1.0, 10.0];
const CERT_FRACTIONS: [f64; 9] = [0.05, 0.3, 0.7, 0.999, 1.0, 1.3, 1.9, 2.5, 4.0];

/// Compares a candidate closed form against the reference on the fixed grid.
/// Points where the candidate reports itself ill-conditioned are skipped.
fn certify_with<F>(form: ClosedForm, n: u32, candidate: F) -> Certification
where
    F: Fn(&Kernel, f64) -> Option<(f64, f64)>,
{
    let mut worst = 0.0;
    let mut at = (0.0, 0.0, 0.0);
    for &m in &CERT_MEANS {
        for &r_d in &CERT_RADII {
            let Ok(p) = McpParams::with_mean_points(n, 1.0, m, r_d) else {
                continue;
            };
            let k = Kernel::new(&p);
            for &frac in &CERT_FRACTIONS {
                let r = frac * r_d;
                if matches!(form, ClosedForm::NndUpper | ClosedForm::NndLower) && r >= 2.0 * r_d {
                    continue;
                }
                let Some((value, cond)) = candidate(&k, r) else {
                    continue;
                };
                if cond > CONDITION_LIMIT {
                    continue;
                }
                let Ok(reference) = reference(form, &k, r) else {
                    return Certification::Rejected {
                        max_error: f64::INFINITY,
                        at: (m, r_d, r),
                    };
                };
                let err = (to_cdf(form, &k, value) - to_cdf(form, &k, reference)).abs();
                if !(err <= worst) {
                    worst = err;
                    at = (m, r_d, r);
                }
            }
        }
    }
    if worst <= CERTIFICATION_TOLERANCE {
        Certification::Certified
    } else {
        Certification::Rejected {
            max_error: worst,
            at,
        }
    }
}

/// Maps a lens-part value to the CDF it produces, so certification compares
/// in probability units.
fn to_cdf(form: ClosedForm, k: &Kernel, lens: f64) -> f64 {
    let f = match form {
        ClosedForm::ContactUpper | ClosedForm::ContactLower => {
            one_minus_exp_neg(k.v_n * k.lambda_p * f64::from(k.n) * lens)
        }
        ClosedForm::NndUpper | ClosedForm::NndLower => lens / powi(k.r_d, k.n),
    };
    f.clamp(0.0, 1.0)
}

/// Slopes and offsets shared by the closed forms at radius `r`.
struct Shape {
    n: u32,
    a: f64,
    b: f64,
    beta: f64,
    /// λ_d 2^{n−1} β^{n−1}: slope of the box bound in λ_d A.
    c: f64,
    /// λ_d v_n / 2^n: coefficient of the ball bound in λ_d A.
    delta: f64,
    kappa: f64,
}

impl Shape {
    fn new(k: &Kernel, r: f64) -> Self {
        let beta = r.min(k.r_d);
        Self {
            n: k.n,
            a: (r - k.r_d).abs(),
            b: r + k.r_d,
            beta,
            c: k.lambda_d * powi(2.0 * beta, k.n - 1),
            delta: k.lambda_d * k.v_n / powi(2.0, k.n),
            kappa: k.kappa(r),
        }
    }

    /// `n ∫_lo^hi e^{−c(b−x)} x^{n−1} dx` by repeated integration by parts,
    /// added into `acc` with weight `w`. `sign` flips the alternating factor
    /// (only used to show that the wrong sign fails certification).
    fn add_box_integral(&self, acc: &mut CompensatedSum, w: f64, lo: f64, hi: f64, sign: f64) {
        let n = self.n;
        let e_hi = exp_neg(self.c * (self.b - hi));
        let e_lo = exp_neg(self.c * (self.b - lo));
        // n!/k! built downward from k = n−1
        let mut fact = f64::from(n);
        for k in (0..n).rev() {
            let alt = if (n - 1 - k) % 2 == 0 { sign } else { -sign };
            let scale = w * alt * fact * powf(self.c, f64::from(k) - f64::from(n));
            acc.add(scale * e_hi * powi(hi, k));
            acc.add(-scale * e_lo * powi(lo, k));
            fact *= f64::from(k.max(1));
        }
    }

    /// `n ∫ e^{−δ(b−x)^n} x^{n−1} dx` for `b − x` running over `[t_lo, t_hi]`,
    /// via the binomial expansion of `x^{n−1} = (b − t)^{n−1}`.
    fn add_ball_integral(&self, acc: &mut CompensatedSum, w: f64, t_lo: f64, t_hi: f64) {
        let n = self.n;
        let u_lo = self.delta * powi(t_lo, n);
        let u_hi = self.delta * powi(t_hi, n);
        for i in 0..n {
            let s = f64::from(i + 1) / f64::from(n);
            let coef = binomial(n - 1, i).unwrap_or(0) as f64;
            let alt = if i % 2 == 0 { 1.0 } else { -1.0 };
            let scale = w * alt * coef * powi(self.b, n - 1 - i) * powf(self.delta, -s);
            acc.add(scale * lower_incomplete_gamma_unchecked(s, u_hi));
            if u_lo > 0.0 {
                acc.add(-scale * lower_incomplete_gamma_unchecked(s, u_lo));
            }
        }
    }
}

fn condition(acc: &CompensatedSum) -> f64 {
    let v = acc.value();
    if v == 0.0 {
        if acc.magnitude() == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        acc.magnitude() / v.abs()
    }
}

/// Closed form of the bounded lens part with its condition number, or `None`
/// when a parameter is degenerate.
///
/// For the contact forms the lens part is `∫_a^b (1 − e^{−λ_d A_bound}) x^{n−1} dx`
/// (times `n`); for the nearest-neighbor forms it is `r_d^n Q_bound` with
/// `Q` the probability that the own cluster hits B(o, r).
fn closed(form: ClosedForm, k: &Kernel, r: f64, sign: f64) -> Option<(f64, f64)> {
    if r <= 0.0 {
        return None;
    }
    let s = Shape::new(k, r);
    let n = s.n;
    let mut acc = CompensatedSum::default();
    match form {
        ClosedForm::ContactUpper => {
            if s.c <= 0.0 || !s.c.is_finite() {
                return None;
            }
            acc.add(powi(s.b, n));
            acc.add(-powi(s.a, n));
            s.add_box_integral(&mut acc, -1.0, s.a, s.b, sign);
        }
        ClosedForm::ContactLower => {
            acc.add(powi(s.b, n));
            acc.add(-powi(s.a, n));
            s.add_ball_integral(&mut acc, -1.0, 0.0, 2.0 * s.beta);
        }
        ClosedForm::NndUpper | ClosedForm::NndLower => {
            if r >= 2.0 * k.r_d || (form == ClosedForm::NndUpper && s.c <= 0.0) {
                return None;
            }
            acc.add(one_minus_exp_neg(s.kappa) * powi(s.a, n));
            acc.add(powi(k.r_d, n));
            acc.add(-powi(s.a, n));
            if form == ClosedForm::NndUpper {
                s.add_box_integral(&mut acc, -1.0, s.a, k.r_d, sign);
            } else {
                s.add_ball_integral(&mut acc, -1.0, r, 2.0 * s.beta);
            }
        }
    }
    let v = acc.value();
    v.is_finite().then(|| (v, condition(&acc)))
}

/// Direct quadrature of the same bounded integrand.
fn reference(form: ClosedForm, k: &Kernel, r: f64) -> Result<f64> {
    let s = Shape::new(k, r);
    let n = s.n;
    let xn = |x: f64| powi(x, n - 1);
    let box_hit = |x: f64| one_minus_exp_neg(s.c * (s.b - x)) * xn(x);
    let ball_hit = |x: f64| one_minus_exp_neg(s.delta * powi(s.b - x, n)) * xn(x);
    let nf = f64::from(n);
    Ok(match form {
        ClosedForm::ContactUpper => nf * integrate_inner(box_hit, s.a, s.b)?,
        ClosedForm::ContactLower => nf * integrate_inner(ball_hit, s.a, s.b)?,
        ClosedForm::NndUpper => {
            one_minus_exp_neg(s.kappa) * powi(s.a, n) + nf * integrate_inner(box_hit, s.a, k.r_d)?
        }
        ClosedForm::NndLower => {
            one_minus_exp_neg(s.kappa) * powi(s.a, n) + nf * integrate_inner(ball_hit, s.a, k.r_d)?
        }
    })
}

/// Certified closed form when well-conditioned, reference otherwise.
fn lens_part(form: ClosedForm, k: &Kernel, r: f64) -> Result<f64> {
    if closed_form_usable(form, k.n) {
        if let Some((v, cond)) = closed(form, k, r, 1.0) {
            if cond <= CONDITION_LIMIT {
                return Ok(v);
            }
        }
    }
    reference(form, k, r)
}

fn check_radius(op: &'static str, r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, "radius must be finite and nonnegative"))
    }
}

/// Bounded void exponent for the contact distance.
fn contact_exponent(k: &Kernel, r: f64, form: ClosedForm) -> Result<f64> {
    let s = Shape::new(k, r);
    let nested = one_minus_exp_neg(s.kappa) * powi(s.a, s.n);
    let lens = lens_part(form, k, r)?.max(0.0);
    Ok(k.v_n * k.lambda_p * (nested + lens))
}

/// Upper bound on F_C from the enclosing-box substitution. Exact for `n = 1`.
pub fn contact_cdf_ub_tight(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("contact_cdf_ub_tight", r)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    contact_exponent(&Kernel::new(p), r, ClosedForm::ContactUpper).map(one_minus_exp_neg)
}

/// Lower bound on F_C from the inscribed-ball substitution.
pub fn contact_cdf_lb_tight(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("contact_cdf_lb_tight", r)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    contact_exponent(&Kernel::new(p), r, ClosedForm::ContactLower).map(one_minus_exp_neg)
}

/// Upper bound on F_C with the lens regime treated as fully covered.
pub fn contact_cdf_ub_simple(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("contact_cdf_ub_simple", r)?;
    let k = Kernel::new(p);
    let e = p.v_n() * p.lambda_p() * powi(r + p.r_d(), p.n()) * one_minus_exp_neg(k.kappa(r));
    Ok(one_minus_exp_neg(e))
}

/// Lower bound on F_C with the lens regime dropped. Not monotone in `r`: it
/// dips to 0 at `r = r_d`.
pub fn contact_cdf_lb_simple(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("contact_cdf_lb_simple", r)?;
    let k = Kernel::new(p);
    let a = (r - p.r_d()).abs();
    let e = p.v_n() * p.lambda_p() * powi(a, p.n()) * one_minus_exp_neg(k.kappa(r));
    Ok(one_minus_exp_neg(e))
}

fn nnd_bound(p: &McpParams, r: f64, contact: ClosedForm, own: ClosedForm) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    let k = Kernel::new(p);
    let e = contact_exponent(&k, r, contact)?;
    if r >= 2.0 * p.r_d() {
        return Ok(one_minus_exp_neg(e + p.m()));
    }
    let q = (lens_part(own, &k, r)? / powi(p.r_d(), p.n())).clamp(0.0, 1.0);
    Ok((one_minus_exp_neg(e) + q * exp_neg(e)).min(1.0))
}

/// Upper bound on F_N: the box substitution in both the void factor and the
/// own-cluster factor.
pub fn nnd_cdf_ub_tight(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("nnd_cdf_ub_tight", r)?;
    nnd_bound(p, r, ClosedForm::ContactUpper, ClosedForm::NndUpper)
}

/// Lower bound on F_N: the inscribed-ball substitution in both factors.
pub fn nnd_cdf_lb_tight(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("nnd_cdf_lb_tight", r)?;
    nnd_bound(p, r, ClosedForm::ContactLower, ClosedForm::NndLower)
}

/// Upper bound on F_N from `Q ≤ 1 − e^{−λ_d v_n β^n}`:
/// `1 − (1 − F̄_C(r)) e^{−λ_d v_n β^n}`. For `r ≥ r_d` the own-cluster factor
/// is the constant `e^{−m}`.
pub fn nnd_cdf_ub_extra(p: &McpParams, r: f64) -> Result<f64> {
    check_radius("nnd_cdf_ub_extra", r)?;
    if r == 0.0 {
        return Ok(0.0);
    }
    let k = Kernel::new(p);
    let e = contact_exponent(&k, r, ClosedForm::ContactUpper)?;
    Ok(one_minus_exp_neg(e + k.kappa(r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{contact_cdf, contact_cdf_1d, nnd_cdf};

    #[test]
    fn selectors() {
        assert!(BoundSelector::new(Target::NearestNeighbor, Side::Upper, Family::Simple).is_err());
        assert!(BoundSelector::new(Target::NearestNeighbor, Side::Lower, Family::Extra).is_err());
        assert!(BoundSelector::new(Target::Contact, Side::Upper, Family::Extra).is_err());
        for s in BoundSelector::ALL {
            assert_eq!(
                BoundSelector::new(s.target(), s.side(), s.family()).unwrap(),
                s
            );
        }
    }

    #[test]
    fn closed_forms_certify_in_low_dimensions() {
        for n in 1..=MAX_CERTIFIED_DIM {
            for form in ClosedForm::ALL {
                assert_eq!(
                    certification(form, n),
                    Certification::Certified,
                    "{form:?} n={n}"
                );
            }
        }
        assert_eq!(
            certification(ClosedForm::NndUpper, 9),
            Certification::NotAttempted
        );
    }

    #[test]
    fn flipped_alternating_sign_is_rejected() {
        for n in 1..=4 {
            for form in [ClosedForm::ContactUpper, ClosedForm::NndUpper] {
                let outcome = certify_with(form, n, |k, r| closed(form, k, r, -1.0));
                assert!(
                    matches!(outcome, Certification::Rejected { .. }),
                    "{form:?} n={n}"
                );
            }
        }
    }

    #[test]
    fn zero_radius() {
        let p = McpParams::with_mean_points(3, 1.0, 5.0, 1.0).unwrap();
        for s in BoundSelector::ALL {
            assert_eq!(s.evaluate(&p, 0.0).unwrap(), 0.0, "{s:?}");
        }
    }

    #[test]
    fn box_bound_is_exact_on_the_line() {
        let p = McpParams::with_lambda_d(1, 0.05, 2.0, 1.0).unwrap();
        for i in 1..50 {
            let r = f64::from(i) * 0.1;
            let ub = contact_cdf_ub_tight(&p, r).unwrap();
            assert!((ub - contact_cdf_1d(&p, r).unwrap()).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn sandwich_spot_checks() {
        for n in 1..=3 {
            for &m in &[1.0, 10.0] {
                let p = McpParams::with_mean_points(n, 0.2, m, 1.5).unwrap();
                for i in 1..=40 {
                    let r = f64::from(i) * 0.1;
                    let f = contact_cdf(&p, r).unwrap();
                    let g = nnd_cdf(&p, r).unwrap();
                    assert!(contact_cdf_lb_tight(&p, r).unwrap() <= f + 1e-12);
                    assert!(contact_cdf_ub_tight(&p, r).unwrap() >= f - 1e-12);
                    assert!(contact_cdf_lb_simple(&p, r).unwrap() <= f + 1e-12);
                    assert!(contact_cdf_ub_simple(&p, r).unwrap() >= f - 1e-12);
                    assert!(nnd_cdf_lb_tight(&p, r).unwrap() <= g + 1e-12);
                    assert!(nnd_cdf_ub_tight(&p, r).unwrap() >= g - 1e-12);
                    assert!(nnd_cdf_ub_extra(&p, r).unwrap() >= g - 1e-12);
                }
            }
        }
    }

    #[test]
    fn nnd_regimes_meet() {
        let p = McpParams::with_mean_points(2, 1e-4, 10.0, 30.0).unwrap();
        let r = 60.0;
        for f in [nnd_cdf_ub_tight, nnd_cdf_lb_tight] {
            assert!((f(&p, r * (1.0 - 1e-13)).unwrap() - f(&p, r).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn extra_factor_is_constant_past_rd() {
        let p = McpParams::with_mean_points(2, 1e-3, 4.0, 5.0).unwrap();
        for r in [5.0, 7.0, 20.0] {
            let ub = contact_cdf_ub_tight(&p, r).unwrap();
            let want = 1.0 - (1.0 - ub) * libm::exp(-4.0);
            assert!((nnd_cdf_ub_extra(&p, r).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn ill_conditioned_sums_fall_back() {
        // tiny λ_d β makes the box sum cancel catastrophically
        let p = McpParams::with_mean_points(3, 1.0, 1e-6, 1.0).unwrap();
        let k = Kernel::new(&p);
        let (_, cond) = closed(ClosedForm::ContactUpper, &k, 0.5, 1.0).unwrap();
        assert!(cond > CONDITION_LIMIT);
        let via = lens_part(ClosedForm::ContactUpper, &k, 0.5).unwrap();
        let direct = reference(ClosedForm::ContactUpper, &k, 0.5).unwrap();
        assert_eq!(via, direct);
    }
}
