//! Metric identities on synthetic and exact curves.

use mcpdist_core::bounds::BoundSelector;
use mcpdist_core::metrics::{
    avg_deviation, deviation_at_rd, exponential_pdf, kl_divergence, kl_divergence_fn, ks_distance,
    metric_grid, Metric, SweepOptions,
};
use mcpdist_core::quadrature::IntegrationSpec;
use mcpdist_core::{CurveKind, DistributionCurve, Grid, McpParams, Quantity, Target, Tolerance};

fn base() -> McpParams {
    McpParams::with_mean_points(2, 1e-4, 10.0, 30.0).unwrap()
}

fn tabulate(p: &McpParams, target: Target, q: Quantity, grid: &Grid) -> DistributionCurve {
    DistributionCurve::tabulate(p, target, CurveKind::Exact, q, grid.clone()).unwrap()
}

#[test]
fn metrics_vanish_on_identical_curves() {
    let p = base();
    for target in [Target::Contact, Target::NearestNeighbor] {
        let grid = metric_grid(&p, target, 400).unwrap();
        let f = tabulate(&p, target, Quantity::Cdf, &grid);
        let pdf = tabulate(&p, target, Quantity::Pdf, &grid);
        assert_eq!(ks_distance(&f, &f).unwrap(), 0.0);
        assert_eq!(avg_deviation(&f, &f, &pdf).unwrap(), 0.0);
        assert!(kl_divergence(&pdf, &pdf).unwrap().abs() <= 1e-12);
    }
}

#[test]
fn ks_is_symmetric_and_kl_is_not() {
    let p = base();
    let grid = metric_grid(&p, Target::Contact, 400).unwrap();
    let q = p.with_rd(60.0).unwrap();
    let a = tabulate(&p, Target::Contact, Quantity::Cdf, &grid);
    let b = tabulate(&q, Target::Contact, Quantity::Cdf, &grid);
    assert_eq!(ks_distance(&a, &b).unwrap(), ks_distance(&b, &a).unwrap());

    let spec = IntegrationSpec::new(0.0, 60.0)
        .unwrap()
        .with_tolerance(Tolerance::new(1e-14, 1e-12).unwrap());
    let ab = kl_divergence_fn(
        |r| exponential_pdf(1.0, r),
        |r| exponential_pdf(0.5, r),
        &spec,
    )
    .unwrap();
    let ba = kl_divergence_fn(
        |r| exponential_pdf(0.5, r),
        |r| exponential_pdf(1.0, r),
        &spec,
    )
    .unwrap();
    assert!((ab - (2f64.ln() - 0.5)).abs() < 1e-6);
    assert!((ab - ba).abs() > 1e-2);
}

#[test]
fn sweep_values_are_scale_free() {
    let p = base();
    let opts = SweepOptions {
        grid_points: 400,
        ..SweepOptions::default()
    };
    let k = 3.0;
    let q = p.scaled(k).unwrap();
    for s in [BoundSelector::ALL[0], BoundSelector::ALL[5]] {
        for metric in [Metric::Ks, Metric::Avg, Metric::Kl] {
            let a = deviation_at_rd(&p, s, metric, &opts).unwrap();
            let b = deviation_at_rd(&q, s, metric, &opts).unwrap();
            assert!((a - b).abs() <= 1e-9, "{s:?} {metric:?}: {a} vs {b}");
        }
    }
}
