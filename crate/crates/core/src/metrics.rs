//! Tightness metrics between exact distributions and their bounds, and the
//! sweep over the cluster radius.

use alloc::vec::Vec;

use crate::analytic;
use crate::bounds::{BoundSelector, Side};
use crate::curve::{CurveKind, DistributionCurve, Grid, Quantity, Target};
use crate::error::{Error, Result};
use crate::math::{exp, ln};
use crate::params::McpParams;
use crate::quadrature::{integrate, IntegrationSpec, Tolerance};

/// Densities below this are dropped from K-L sums.
pub const KL_P_CUTOFF: f64 = 1e-15;
/// Floor applied to the reference density in K-L sums.
pub const KL_Q_FLOOR: f64 = 1e-300;
/// Integrals over `r` stop where `1 − F` falls below this.
pub const TAIL_MASS: f64 = 1e-10;

/// Tightness metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Largest absolute CDF gap.
    Ks,
    /// CDF gap averaged against the exact density.
    Avg,
    /// Kullback-Leibler divergence of the bound law from the exact law.
    Kl,
}

impl Metric {
    /// Short tag used in file formats.
    pub fn tag(&self) -> &'static str {
        match self {
            Metric::Ks => "KS",
            Metric::Avg => "Avg",
            Metric::Kl => "KL",
        }
    }
}

fn same_grid(a: &DistributionCurve, b: &DistributionCurve) -> Result<()> {
    if a.grid() == b.grid() {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Largest absolute difference between two curves on their common grid.
pub fn ks_distance(a: &DistributionCurve, b: &DistributionCurve) -> Result<f64> {
    same_grid(a, b)?;
    Ok(a.values()
        .iter()
        .zip(b.values())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs())))
}

/// `∫ |F − F̂| f dr` by the trapezoid rule on the common grid.
pub fn avg_deviation(
    exact_cdf: &DistributionCurve,
    bound_cdf: &DistributionCurve,
    exact_pdf: &DistributionCurve,
) -> Result<f64> {
    same_grid(exact_cdf, bound_cdf)?;
    same_grid(exact_cdf, exact_pdf)?;
    if exact_pdf.values().iter().any(|v| *v < 0.0) {
        return Err(Error::domain("avg_deviation", "negative density"));
    }
    let g: Vec<f64> = exact_cdf
        .values()
        .iter()
        .zip(bound_cdf.values())
        .zip(exact_pdf.values())
        .map(|((f, b), d)| (f - b).abs() * d)
        .collect();
    Ok(trapezoid(exact_cdf.grid().points(), &g))
}

/// `∫ p ln(p/q) dr` by the trapezoid rule, with `q` floored at
/// [`KL_Q_FLOOR`] and points where `p <` [`KL_P_CUTOFF`] dropped.
pub fn kl_divergence(p: &DistributionCurve, q: &DistributionCurve) -> Result<f64> {
    same_grid(p, q)?;
    let g: Vec<f64> = p
        .values()
        .iter()
        .zip(q.values())
        .map(|(&a, &b)| kl_term(a, b))
        .collect();
    Ok(trapezoid(p.grid().points(), &g))
}

fn kl_term(p: f64, q: f64) -> f64 {
    if p < KL_P_CUTOFF {
        0.0
    } else {
        p * ln(p / q.max(KL_Q_FLOOR))
    }
}

/// `∫ p ln(p/q)` over an interval by adaptive quadrature, same floor rules.
pub fn kl_divergence_fn<P, Q>(mut p: P, mut q: Q, spec: &IntegrationSpec) -> Result<f64>
where
    P: FnMut(f64) -> f64,
    Q: FnMut(f64) -> f64,
{
    integrate(|r| kl_term(p(r), q(r)), spec).map(|i| i.value)
}

/// K-L divergence between two laws given by CDF values on a common grid
/// that starts at 0, using cell masses `F(r_{i+1}) − F(r_i)` plus the mass
/// beyond the last radius. On this partition the sum is a true divergence
/// between discrete laws, so it is nonnegative up to the cutoff rules.
pub fn kl_divergence_cells(p_cdf: &DistributionCurve, q_cdf: &DistributionCurve) -> Result<f64> {
    same_grid(p_cdf, q_cdf)?;
    let (p, q) = (p_cdf.values(), q_cdf.values());
    let mut acc = kl_term(p[0], q[0]);
    for i in 1..p.len() {
        acc += kl_term(p[i] - p[i - 1], q[i] - q[i - 1]);
    }
    let last = p.len() - 1;
    Ok(acc + kl_term(1.0 - p[last], 1.0 - q[last]))
}

/// Density of a CDF curve by central differences (one-sided at the ends),
/// clamped at 0.
pub fn density_by_differences(cdf: &DistributionCurve) -> Result<DistributionCurve> {
    if cdf.quantity() != Quantity::Cdf {
        return Err(Error::domain(
            "density_by_differences",
            "expects a CDF curve",
        ));
    }
    let r = cdf.grid().points();
    let f = cdf.values();
    let n = r.len();
    if n < 2 {
        return Err(Error::domain(
            "density_by_differences",
            "needs at least two points",
        ));
    }
    let values = (0..n)
        .map(|i| {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            ((f[hi] - f[lo]) / (r[hi] - r[lo])).max(0.0)
        })
        .collect();
    DistributionCurve::assemble(
        cdf.target(),
        cdf.kind(),
        Quantity::Pdf,
        cdf.grid().clone(),
        values,
        *cdf.params(),
    )
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Knobs of the per-`r_d` metric evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Points of the base `r` grid.
    pub grid_points: usize,
    /// Refinement stops once K-S moves by less than this.
    pub refine_tolerance: f64,
    /// Cap on grid doublings.
    pub max_refinements: u32,
    /// Tolerance of the outer integral in the average deviation.
    pub tolerance: Tolerance,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            grid_points: 2000,
            refine_tolerance: 1e-3,
            max_refinements: 3,
            tolerance: Tolerance::DEFAULT,
        }
    }
}

fn exact_cdf(p: &McpParams, target: Target, r: f64) -> Result<f64> {
    match target {
        Target::Contact => analytic::contact_cdf(p, r),
        Target::NearestNeighbor => analytic::nnd_cdf(p, r),
    }
}

fn exact_pdf(p: &McpParams, target: Target, r: f64) -> Result<f64> {
    match target {
        Target::Contact => analytic::contact_pdf(p, r),
        Target::NearestNeighbor => analytic::nnd_pdf(p, r),
    }
}

/// Smallest radius where the exact CDF reaches `level`, by bisection.
pub fn exact_quantile(p: &McpParams, target: Target, level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain("exact_quantile", "level must lie in (0, 1)"));
    }
    let mut lo = 0.0;
    let mut hi = p.r_d().min(p.parent_length());
    while exact_cdf(p, target, hi)? < level {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::domain("exact_quantile", "level not reached"));
        }
    }
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if exact_cdf(p, target, mid)? < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// The `r` grid used for the metrics: 0, a geometric lead-in below the
/// `1e-4` quantile, a linear body up to the `1 − 1e-6` quantile and a linear
/// tail out to where `1 − F_C <` [`TAIL_MASS`], with `r_d` and `2 r_d` added.
pub fn metric_grid(p: &McpParams, target: Target, points: usize) -> Result<Grid> {
    let points = points.max(20);
    let r_lo = exact_quantile(p, target, 1e-4)?;
    let r_hi = exact_quantile(p, target, 1.0 - 1e-6)?;
    let r_tail = exact_quantile(p, Target::Contact, 1.0 - TAIL_MASS)?.max(r_hi * (1.0 + 1e-9));
    let lead = points / 10;
    let tail = points / 10;
    let body = points - lead - tail;
    let mut r = Vec::with_capacity(points + 3);
    r.push(0.0);
    r.extend(Grid::geometric(r_lo * 1e-3, r_lo, lead)?.points());
    r.extend(Grid::linear(r_lo, r_hi, body)?.points());
    r.extend(Grid::linear(r_hi, r_tail, tail)?.points());
    r.push(p.r_d());
    r.push(2.0 * p.r_d());
    r.sort_by(f64::total_cmp);
    r.dedup();
    Grid::new(r)
}

/// One metric for one bound at the cluster radius in `p`.
pub fn deviation_at_rd(
    p: &McpParams,
    selector: BoundSelector,
    metric: Metric,
    opts: &SweepOptions,
) -> Result<f64> {
    let target = selector.target();
    match metric {
        Metric::Ks => {
            let mut grid = metric_grid(p, target, opts.grid_points)?;
            let mut ks = ks_on(p, selector, &grid)?;
            for _ in 0..opts.max_refinements {
                grid = grid.refined();
                let finer = ks_on(p, selector, &grid)?;
                let moved = (finer - ks).abs();
                ks = finer;
                if moved < opts.refine_tolerance {
                    break;
                }
            }
            Ok(ks)
        }
        Metric::Avg => avg_deviation_fn(p, selector, opts.tolerance),
        Metric::Kl => {
            let grid = metric_grid(p, target, opts.grid_points)?;
            let exact = DistributionCurve::tabulate(
                p,
                target,
                CurveKind::Exact,
                Quantity::Cdf,
                grid.clone(),
            )?;
            let bound = DistributionCurve::tabulate_bound(p, selector, grid)?;
            kl_divergence_cells(&exact, &bound)
        }
    }
}

fn ks_on(p: &McpParams, selector: BoundSelector, grid: &Grid) -> Result<f64> {
    let exact = DistributionCurve::tabulate(
        p,
        selector.target(),
        CurveKind::Exact,
        Quantity::Cdf,
        grid.clone(),
    )?;
    let bound = DistributionCurve::tabulate_bound(p, selector, grid.clone())?;
    ks_distance(&exact, &bound)
}

/// `∫₀^∞ |F − F̂| f dr` by adaptive quadrature of pointwise values, truncated
/// where `1 − F_C <` [`TAIL_MASS`], with breakpoints at `r_d` and `2 r_d`.
pub fn avg_deviation_fn(p: &McpParams, selector: BoundSelector, tol: Tolerance) -> Result<f64> {
    let target = selector.target();
    let upper = exact_quantile(p, Target::Contact, 1.0 - TAIL_MASS)?;
    let spec = IntegrationSpec::new(0.0, upper)?
        .with_tolerance(tol)
        .with_breakpoints([p.r_d(), 2.0 * p.r_d()]);
    let mut failure = None;
    let value = integrate(
        |r| {
            let eval = || -> Result<f64> {
                let f = exact_cdf(p, target, r)?;
                let b = selector.evaluate(p, r)?;
                Ok((f - b).abs() * exact_pdf(p, target, r)?)
            };
            eval().unwrap_or_else(|e| {
                failure.get_or_insert(e);
                0.0
            })
        },
        &spec,
    )?
    .value;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `count` cluster radii log-spaced over `[1e-2, 1e2] λ_p^{−1/n}`.
pub fn rd_sweep_grid(base: &McpParams, count: usize) -> Result<Grid> {
    let l = base.parent_length();
    Grid::geometric(1e-2 * l, 1e2 * l, count)
}

/// One metric for one bound across a range of cluster radii.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    bound: BoundSelector,
    metric: Metric,
    r_d_grid: Vec<f64>,
    values: Vec<f64>,
    params_base: McpParams,
    max_over_rd: f64,
}

impl DeviationReport {
    /// Wraps per-`r_d` values; they must be nonnegative (K-L down to `−1e-9`).
    pub fn new(
        bound: BoundSelector,
        metric: Metric,
        r_d_grid: Vec<f64>,
        values: Vec<f64>,
        params_base: McpParams,
    ) -> Result<Self> {
        if r_d_grid.len() != values.len() || values.is_empty() {
            return Err(Error::GridMismatch);
        }
        let floor = if metric == Metric::Kl { -1e-9 } else { 0.0 };
        if values.iter().any(|v| !(*v >= floor)) {
            return Err(Error::domain(
                "DeviationReport",
                "metric values must be nonnegative",
            ));
        }
        if metric == Metric::Ks && values.iter().any(|v| *v > 1.0) {
            return Err(Error::domain("DeviationReport", "K-S distance above 1"));
        }
        let max_over_rd = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            bound,
            metric,
            r_d_grid,
            values,
            params_base,
            max_over_rd,
        })
    }

    /// Distance the bound applies to.
    pub fn target(&self) -> Target {
        self.bound.target()
    }

    /// Upper or lower.
    pub fn side(&self) -> Side {
        self.bound.side()
    }

    /// Which bound.
    pub fn bound(&self) -> BoundSelector {
        self.bound
    }

    /// Which metric.
    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Cluster radii.
    pub fn r_d_grid(&self) -> &[f64] {
        &self.r_d_grid
    }

    /// Metric values, one per cluster radius.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `n`, `λ_p` and `m` of the sweep; its `r_d` is not meaningful.
    pub fn params_base(&self) -> &McpParams {
        &self.params_base
    }

    /// Largest value over the sweep.
    pub fn max_over_rd(&self) -> f64 {
        self.max_over_rd
    }
}

/// Evaluates every (bound, metric) pair over `r_d_grid`, serially.
pub fn deviation_sweep(
    base: &McpParams,
    r_d_grid: &Grid,
    bounds: &[BoundSelector],
    metrics: &[Metric],
    opts: &SweepOptions,
) -> Result<Vec<DeviationReport>> {
    if bounds.is_empty() || metrics.is_empty() {
        return Err(Error::domain("deviation_sweep", "nothing to sweep"));
    }
    let mut reports = Vec::with_capacity(bounds.len() * metrics.len());
    for &bound in bounds {
        for &metric in metrics {
            let values = r_d_grid
                .points()
                .iter()
                .map(|&r_d| deviation_at_rd(&base.with_rd(r_d)?, bound, metric, opts))
                .collect::<Result<Vec<_>>>()?;
            reports.push(DeviationReport::new(
                bound,
                metric,
                r_d_grid.points().to_vec(),
                values,
                *base,
            )?);
        }
    }
    Ok(reports)
}

/// PDF of an exponential law with the given rate, for metric oracles.
pub fn exponential_pdf(rate: f64, r: f64) -> f64 {
    if r < 0.0 {
        0.0
    } else {
        rate * exp(-rate * r)
    }
}
