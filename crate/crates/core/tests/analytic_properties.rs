//! Properties of the exact distributions that hold independently of how they
//! are evaluated.

use mcpdist_core::analytic::{contact_cdf, contact_cdf_1d, contact_pdf, nnd_cdf, nnd_pdf};
use mcpdist_core::metrics::{exact_quantile, TAIL_MASS};
use mcpdist_core::quadrature::{integrate, IntegrationSpec};
use mcpdist_core::{McpParams, Target, Tolerance};
use proptest::prelude::*;

type Eval = fn(&McpParams, f64) -> mcpdist_core::Result<f64>;

fn sets() -> Vec<McpParams> {
    vec![
        McpParams::with_mean_points(1, 0.05, 4.0, 1.0).unwrap(),
        McpParams::with_mean_points(2, 20e-6, 30.0, 40.0).unwrap(),
        McpParams::with_mean_points(3, 1e-3, 5.0, 3.0).unwrap(),
        McpParams::with_mean_points(4, 1.0, 3.0, 0.7).unwrap(),
    ]
}

fn pair(target: Target) -> (Eval, Eval) {
    match target {
        Target::Contact => (contact_cdf, contact_pdf),
        Target::NearestNeighbor => (nnd_cdf, nnd_pdf),
    }
}

#[test]
fn pdf_matches_finite_differences() {
    for p in sets() {
        for target in [Target::Contact, Target::NearestNeighbor] {
            let (cdf, pdf) = pair(target);
            let lo = exact_quantile(&p, target, 1e-3).unwrap();
            let hi = exact_quantile(&p, target, 0.999).unwrap();
            for i in 0..50 {
                let r = lo + (hi - lo) * f64::from(i) / 49.0;
                let h = (1e-5 * (hi - lo)).min(0.25 * r);
                if (r - p.r_d()).abs() < 2.0 * h || (r - 2.0 * p.r_d()).abs() < 2.0 * h {
                    continue;
                }
                let fd = (cdf(&p, r + h).unwrap() - cdf(&p, r - h).unwrap()) / (2.0 * h);
                let f = pdf(&p, r).unwrap();
                assert!(
                    (f - fd).abs() <= 1e-4 * f,
                    "n={} {:?} r={r}: {f} vs {fd}",
                    p.n(),
                    target
                );
            }
        }
    }
}

#[test]
fn pdfs_integrate_to_one() {
    for p in sets() {
        let upper = exact_quantile(&p, Target::Contact, 1.0 - TAIL_MASS).unwrap();
        for target in [Target::Contact, Target::NearestNeighbor] {
            let (_, pdf) = pair(target);
            let spec = IntegrationSpec::new(0.0, upper)
                .unwrap()
                .with_tolerance(Tolerance::new(1e-12, 1e-10).unwrap())
                .with_breakpoints([p.r_d(), 2.0 * p.r_d()]);
            let mass = integrate(|r| pdf(&p, r).unwrap(), &spec).unwrap().value;
            assert!(
                (mass - 1.0).abs() < 1e-6,
                "n={} {:?}: {mass}",
                p.n(),
                target
            );
        }
    }
}

#[test]
fn more_parents_means_shorter_distances() {
    let p = McpParams::with_mean_points(2, 1e-4, 10.0, 30.0).unwrap();
    let q = McpParams::with_mean_points(2, 2e-4, 10.0, 30.0).unwrap();
    for i in 1..40 {
        let r = f64::from(i) * 3.0;
        assert!(contact_cdf(&q, r).unwrap() >= contact_cdf(&p, r).unwrap());
        assert!(nnd_cdf(&q, r).unwrap() >= nnd_cdf(&p, r).unwrap());
    }
}

#[test]
fn denser_clusters_shorten_contact_distance() {
    let p = McpParams::with_lambda_d(3, 1e-3, 0.05, 4.0).unwrap();
    let q = McpParams::with_lambda_d(3, 1e-3, 0.1, 4.0).unwrap();
    for i in 1..40 {
        let r = f64::from(i) * 0.5;
        assert!(contact_cdf(&q, r).unwrap() >= contact_cdf(&p, r).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdfs_are_monotone_and_ordered(n in 1u32..=4, m in 0.5f64..40.0, r_d in 0.05f64..5.0,
                                     r in 0.0f64..8.0, dr in 0.0f64..1.0) {
        let p = McpParams::with_mean_points(n, 0.2, m, r_d).unwrap();
        let c0 = contact_cdf(&p, r).unwrap();
        let c1 = contact_cdf(&p, r + dr).unwrap();
        let n0 = nnd_cdf(&p, r).unwrap();
        let n1 = nnd_cdf(&p, r + dr).unwrap();
        prop_assert!((0.0..=1.0).contains(&c0) && (0.0..=1.0).contains(&n0));
        prop_assert!(c1 >= c0 - 1e-12 && n1 >= n0 - 1e-12);
        prop_assert!(n0 >= c0 - 1e-12);
        prop_assert!(contact_pdf(&p, r).unwrap() >= 0.0 && nnd_pdf(&p, r).unwrap() >= 0.0);
    }

    #[test]
    fn one_dimensional_closed_form_matches_quadrature(lp in 0.01f64..2.0, m in 0.1f64..50.0,
                                                     r_d in 0.01f64..10.0, t in 0.0f64..5.0) {
        let p = McpParams::with_mean_points(1, lp, m, r_d).unwrap();
        let r = t * r_d;
        let a = contact_cdf_1d(&p, r).unwrap();
        let b = contact_cdf(&p, r).unwrap();
        prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
    }
}
