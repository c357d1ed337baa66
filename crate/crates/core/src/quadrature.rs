//! Globally adaptive Gauss-Kronrod (G10/K21) quadrature on finite intervals.
//!
//! The interval is first cut at the caller's breakpoints; the panel with the
//! largest error estimate is then bisected until the summed estimate meets
//! `max(abs, rel * |value|)`. Panel selection breaks ties by creation order,
//! so a fixed spec always produces bit-identical results.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::math::{powf, CompensatedSum};

/// Maximum number of panels before giving up.
pub const PANEL_BUDGET: usize = 100_000;
/// Maximum bisection depth of any panel.
pub const MAX_DEPTH: u32 = 60;

/// Absolute and relative accuracy targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Absolute error target.
    pub abs: f64,
    /// Relative error target.
    pub rel: f64,
}

impl Tolerance {
    /// `abs = 1e-10`, `rel = 1e-9`.
    pub const DEFAULT: Tolerance = Tolerance {
        abs: 1e-10,
        rel: 1e-9,
    };

    /// Scale-free target used for the integrals inside every CDF and PDF
    /// evaluation: relative `1e-12`, absolute floor at the smallest normal.
    pub const INNER: Tolerance = Tolerance {
        abs: f64::MIN_POSITIVE,
        rel: 1e-12,
    };

    /// Builds a tolerance; both parts must be positive.
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if abs > 0.0 && rel > 0.0 && abs.is_finite() && rel.is_finite() {
            Ok(Self { abs, rel })
        } else {
            Err(Error::domain(
                "Tolerance",
                "tolerances must be positive and finite",
            ))
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A definite integral to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationSpec {
    lower: f64,
    upper: f64,
    tol: Tolerance,
    breakpoints: Vec<f64>,
}

impl IntegrationSpec {
    /// Integral over `[lower, upper]` with the default tolerance.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower > upper {
            return Err(Error::domain(
                "IntegrationSpec",
                "need finite lower <= upper",
            ));
        }
        Ok(Self {
            lower,
            upper,
            tol: Tolerance::DEFAULT,
            breakpoints: Vec::new(),
        })
    }

    /// Replaces the tolerance.
    pub fn with_tolerance(mut self, tol: Tolerance) -> Self {
        self.tol = tol;
        self
    }

    /// Declares points where the integrand may have a kink. Points outside the
    /// open interval are dropped; the rest are sorted and deduplicated.
    pub fn with_breakpoints<I: IntoIterator<Item = f64>>(mut self, points: I) -> Self {
        self.breakpoints.extend(points);
        let (lo, hi) = (self.lower, self.upper);
        self.breakpoints.retain(|&p| p > lo && p < hi);
        self.breakpoints.sort_by(f64::total_cmp);
        self.breakpoints.dedup();
        self
    }

    /// Lower limit.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Upper limit.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Accuracy target.
    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    /// Interior breakpoints, strictly increasing.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

/// Result of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    /// Estimated value.
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// Number of panels in the final partition.
    pub panels: usize,
}

/// Integrates `f` as described by `spec`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, spec: &IntegrationSpec) -> Result<Integral> {
    integrate_between(f, spec.lower, spec.upper, &spec.breakpoints, spec.tol)
}

/// Subdivisions that fail to improve a panel before roundoff is declared.
const ROUNDOFF_STALLS: u32 = 20;

/// Relative error accepted from an integral that stopped on roundoff.
const ROUNDOFF_ACCEPT: f64 = 1e-6;

/// [`integrate_between`] at [`Tolerance::INNER`], returning only the value.
/// A run that stops on roundoff is accepted when its error bound is within
/// `1e-6` of the estimate; with separations near `r_d` and `r ≪ r_d` the
/// lens volume itself carries relative noise of order `ε r_d / r`.
///
/// The lens integrands behave like powers of `(x − a)^{1/2}` and
/// `(b − x)^{1/2}` at the ends of the lens regime in even dimensions, so the
/// interval is mapped through the cubic `x = lower + w u²(3 − 2u)`, whose
/// vanishing Jacobian at both ends smooths those singularities.
pub(crate) fn integrate_inner<F: FnMut(f64) -> f64>(
    mut f: F,
    lower: f64,
    upper: f64,
) -> Result<f64> {
    if upper <= lower {
        return Ok(0.0);
    }
    let w = upper - lower;
    let g = |u: f64| {
        let x = lower + w * u * u * (3.0 - 2.0 * u);
        f(x.min(upper)) * 6.0 * w * u * (1.0 - u)
    };
    match integrate_between(g, 0.0, 1.0, &[], Tolerance::INNER) {
        Ok(i) => Ok(i.value),
        Err(Error::NonConvergence { estimate, error })
            if estimate.is_finite() && error <= ROUNDOFF_ACCEPT * estimate.abs() =>
        {
            Ok(estimate)
        }
        Err(e) => Err(e),
    }
}

/// Same as [`integrate`] without building a spec. Breakpoints outside the open
/// interval are ignored; they need not be sorted.
pub(crate) fn integrate_between<F: FnMut(f64) -> f64>(
    mut f: F,
    lower: f64,
    upper: f64,
    breakpoints: &[f64],
    tol: Tolerance,
) -> Result<Integral> {
    if upper <= lower {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    cuts.push(lower);
    cuts.extend(
        breakpoints
            .iter()
            .copied()
            .filter(|&p| p > lower && p < upper),
    );
    cuts.push(upper);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut panels: Vec<Panel> = Vec::with_capacity(64);
    let mut heap = BinaryHeap::with_capacity(64);
    for w in cuts.windows(2) {
        let p = Panel::evaluate(&mut f, w[0], w[1], 0);
        heap.push(HeapEntry {
            error: p.error,
            id: panels.len(),
        });
        panels.push(p);
    }
    let mut live = panels.len();
    let (mut value, mut error) = totals(&panels);
    let mut stalled = 0u32;

    loop {
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NonConvergence {
                estimate: value,
                error,
            });
        }
        if error <= tol.target(value) {
            // Running sums drift; confirm on the exact totals.
            let (v, e) = totals(&panels);
            value = v;
            error = e;
            if error <= tol.target(value) {
                return Ok(Integral {
                    value,
                    error,
                    panels: live,
                });
            }
        }
        let Some(top) = heap.pop() else {
            return Err(Error::NonConvergence {
                estimate: value,
                error,
            });
        };
        let parent = panels[top.id];
        let mid = 0.5 * (parent.a + parent.b);
        if parent.depth >= MAX_DEPTH || mid <= parent.a || mid >= parent.b {
            // This panel cannot improve; the rest of the heap may still.
            continue;
        }
        if live >= PANEL_BUDGET {
            let (value, error) = totals(&panels);
            return Err(Error::NonConvergence {
                estimate: value,
                error,
            });
        }
        panels[top.id].live = false;
        let mut running = CompensatedSum::default();
        running.add(value);
        running.add(-parent.value);
        error -= parent.error;
        let (mut pair_value, mut pair_error) = (0.0, 0.0);
        for (a, b) in [(parent.a, mid), (mid, parent.b)] {
            let p = Panel::evaluate(&mut f, a, b, parent.depth + 1);
            running.add(p.value);
            error += p.error;
            pair_value += p.value;
            pair_error += p.error;
            heap.push(HeapEntry {
                error: p.error,
                id: panels.len(),
            });
            panels.push(p);
        }
        value = running.value();
        error = error.max(0.0);
        live += 1;
        // Roundoff detection: halving no longer moves the value nor shrinks the error.
        if (pair_value - parent.value).abs() <= 1e-5 * pair_value.abs()
            && pair_error >= 0.99 * parent.error
        {
            stalled += 1;
            if stalled >= ROUNDOFF_STALLS {
                let (value, error) = totals(&panels);
                return Err(Error::NonConvergence {
                    estimate: value,
                    error,
                });
            }
        }
    }
}

fn totals(panels: &[Panel]) -> (f64, f64) {
    let mut value = CompensatedSum::default();
    let mut error = 0.0;
    for p in panels.iter().filter(|p| p.live) {
        value.add(p.value);
        error += p.error;
    }
    (value.value(), error)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
    live: bool,
}

impl Panel {
    fn evaluate<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, depth: u32) -> Self {
        let (value, error) = kronrod21(f, a, b);
        Self {
            a,
            b,
            value,
            error,
            depth,
            live: true,
        }
    }
}

#[derive(Debug, PartialEq)]
struct HeapEntry {
    error: f64,
    id: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Kronrod abscissae; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_292_139_574,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One K21 panel with the QUADPACK error heuristic.
fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    #[allow(clippy::needless_range_loop)]
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0f64).min(powf(200.0 * err / res_asc, 1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sin;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn tight() -> Tolerance {
        Tolerance::new(1e-13, 1e-12).unwrap()
    }

    #[test]
    fn polynomial_and_sine() {
        let spec = IntegrationSpec::new(0.0, 1.0).unwrap();
        let r = integrate(|x| x * x, &spec).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        let spec = IntegrationSpec::new(0.0, PI).unwrap();
        let r = integrate(sin, &spec).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_with_breakpoints() {
        // ∫₀³ max(0, min(2 − x, 1)) dx = 1 + 1/2 = 1.5
        let f = |x: f64| (2.0 - x).clamp(0.0, 1.0);
        let spec = IntegrationSpec::new(0.0, 3.0)
            .unwrap()
            .with_breakpoints([1.0, 2.0]);
        let r = integrate(f, &spec).unwrap();
        assert!((r.value - 1.5).abs() < 1e-14);
        assert_eq!(r.panels, 3);
        // without breakpoints it still converges, just with more panels
        let spec = IntegrationSpec::new(0.0, 3.0).unwrap();
        let r = integrate(f, &spec).unwrap();
        assert!((r.value - 1.5).abs() < 1e-10);
    }

    #[test]
    fn breakpoints_are_sanitized() {
        let spec = IntegrationSpec::new(0.0, 1.0)
            .unwrap()
            .with_breakpoints([0.5, 0.0, 1.0, 2.0, 0.25, 0.5]);
        assert_eq!(spec.breakpoints(), &[0.25, 0.5]);
        assert!(IntegrationSpec::new(1.0, 0.0).is_err());
        assert!(Tolerance::new(0.0, 1e-9).is_err());
    }

    #[test]
    fn empty_interval() {
        let spec = IntegrationSpec::new(2.0, 2.0).unwrap();
        assert_eq!(integrate(|_| 1.0, &spec).unwrap().value, 0.0);
    }

    #[test]
    fn reports_non_convergence() {
        let spec = IntegrationSpec::new(0.0, 1.0)
            .unwrap()
            .with_tolerance(Tolerance::new(1e-300, 1e-300).unwrap());
        // 1/sqrt(x) singularity with an unreachable target
        match integrate(|x| if x > 0.0 { 1.0 / libm::sqrt(x) } else { 0.0 }, &spec) {
            Err(Error::NonConvergence { estimate, error }) => {
                assert!((estimate - 2.0).abs() < 1e-3);
                assert!(error > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let f = |x: f64| libm::exp(-x) * sin(7.0 * x) + libm::sqrt(x);
        let spec = IntegrationSpec::new(0.0, 9.0)
            .unwrap()
            .with_tolerance(tight());
        let a = integrate(f, &spec).unwrap();
        let b = integrate(f, &spec).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    fn poly(c: &[f64], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
    }

    fn poly_integral(c: &[f64], lo: f64, hi: f64) -> f64 {
        c.iter()
            .enumerate()
            .map(|(i, &k)| {
                let p = (i + 1) as i32;
                k * (libm::pow(hi, f64::from(p)) - libm::pow(lo, f64::from(p))) / f64::from(p)
            })
            .sum()
    }

    proptest! {
        #[test]
        fn linearity(cf in proptest::collection::vec(-5.0f64..5.0, 1..8),
                     cg in proptest::collection::vec(-5.0f64..5.0, 1..8),
                     a in -3.0f64..3.0, b in -3.0f64..3.0, hi in 0.1f64..4.0) {
            let spec = IntegrationSpec::new(0.0, hi).unwrap();
            let i_f = integrate(|x| poly(&cf, x), &spec).unwrap();
            let i_g = integrate(|x| poly(&cg, x), &spec).unwrap();
            let i_h = integrate(|x| a * poly(&cf, x) + b * poly(&cg, x), &spec).unwrap();
            let combined = a * i_f.value + b * i_g.value;
            let tol = a.abs() * i_f.error + b.abs() * i_g.error + i_h.error + 1e-12 * combined.abs().max(1.0);
            prop_assert!((i_h.value - combined).abs() <= tol);
        }

        #[test]
        fn error_estimate_covers_actual_error(c in proptest::collection::vec(-5.0f64..5.0, 1..12),
                                              lo in -2.0f64..0.0, hi in 0.1f64..3.0) {
            let spec = IntegrationSpec::new(lo, hi).unwrap();
            let r = integrate(|x| poly(&c, x), &spec).unwrap();
            let exact = poly_integral(&c, lo, hi);
            prop_assert!((r.value - exact).abs() <= r.error.max(1e-13 * exact.abs().max(1.0)));
        }

        #[test]
        fn kinked_family_split_at_breakpoints(k1 in 0.1f64..1.4, k2 in 1.6f64..2.9, s in 0.2f64..3.0) {
            // piecewise-linear tent: 0 before k1, rises with slope s to k2, flat after
            let f = |x: f64| if x < k1 { 0.0 } else if x < k2 { s * (x - k1) } else { s * (k2 - k1) };
            let exact = 0.5 * s * (k2 - k1) * (k2 - k1) + s * (k2 - k1) * (3.0 - k2);
            let spec = IntegrationSpec::new(0.0, 3.0).unwrap().with_breakpoints([k1, k2]);
            let r = integrate(f, &spec).unwrap();
            prop_assert!((r.value - exact).abs() <= 1e-10);
        }
    }
}
