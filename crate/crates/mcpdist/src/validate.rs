//! Acceptance suites behind `mcpdist validate`.
//!
//! Each suite returns named checks with the measured value, the limit it is
//! held to and the verdict. Reports contain no timings, so repeated runs
//! with the same seed give identical files.

use mcpdist_core::analytic::{self, contact_cdf, contact_cdf_1d, nnd_cdf};
use mcpdist_core::bounds::{BoundSelector, Family, Side};
use mcpdist_core::geometry::{intersection_volume, intersection_volume_2d, LensGeometry};
use mcpdist_core::metrics::{self, Metric, SweepOptions, TAIL_MASS};
use mcpdist_core::quadrature::{integrate, IntegrationSpec};
use mcpdist_core::{CurveKind, DistributionCurve, Grid, McpParams, Quantity, Target, Tolerance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::compute;
use crate::error::{AppError, AppResult};
use crate::simulate::{self, SimConfig};
use crate::table::{Cell, Table};

/// Suite names in criterion order.
pub const SUITES: [&str; 9] = [
    "sandwich",
    "deviation",
    "montecarlo",
    "scaling",
    "branches",
    "pdf",
    "asymptotics",
    "metrics",
    "determinism",
];

/// Tolerance on bound ordering.
pub const SANDWICH_SLACK: f64 = 1e-9;

/// One measured quantity and its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    /// Suite that produced it.
    pub suite: &'static str,
    /// What was measured; no commas.
    pub name: String,
    /// Measured value.
    pub value: f64,
    /// Limit it is compared against.
    pub limit: f64,
    /// Verdict.
    pub passed: bool,
}

impl Check {
    fn at_most(suite: &'static str, name: String, value: f64, limit: f64) -> Self {
        Self {
            suite,
            name,
            value,
            limit,
            passed: value <= limit,
        }
    }

    fn below(suite: &'static str, name: String, value: f64, limit: f64) -> Self {
        Self {
            suite,
            name,
            value,
            limit,
            passed: value < limit,
        }
    }

    fn at_least(suite: &'static str, name: String, value: f64, limit: f64) -> Self {
        Self {
            suite,
            name,
            value,
            limit,
            passed: value >= limit,
        }
    }
}

/// Runs one suite by name.
pub fn run_suite(name: &str, seed: u64) -> AppResult<Vec<Check>> {
    match name {
        "sandwich" => sandwich(),
        "deviation" => deviation(),
        "montecarlo" => monte_carlo(seed),
        "scaling" => scaling(seed),
        "branches" => branches(seed),
        "pdf" => pdf(),
        "asymptotics" => asymptotics(),
        "metrics" => metric_properties(),
        "determinism" => determinism(seed),
        _ => Err(AppError::Parameter(format!(
            "unknown suite {name:?}; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

/// Checks as a table with columns `suite, check, value, limit, result`.
pub fn report_table(checks: &[Check], seed: u64) -> Table {
    let columns = ["suite", "check", "value", "limit", "result"]
        .map(String::from)
        .to_vec();
    let mut t = Table::new("validate", None, columns);
    t.meta("seed", seed.to_string());
    t.meta(
        "passed",
        checks.iter().filter(|c| c.passed).count().to_string(),
    );
    t.meta(
        "failed",
        checks.iter().filter(|c| !c.passed).count().to_string(),
    );
    for c in checks {
        t.push(vec![
            c.suite.into(),
            Cell::Text(c.name.clone()),
            c.value.into(),
            c.limit.into(),
            c.passed.into(),
        ]);
    }
    t
}

fn params(n: u32, lambda_p: f64, m: f64, r_d: f64) -> AppResult<McpParams> {
    Ok(McpParams::with_mean_points(n, lambda_p, m, r_d)?)
}

fn exact(p: &McpParams, target: Target, r: f64) -> AppResult<f64> {
    compute::exact_cdf(p, target, r)
}

/// Worst signed slack `bound − exact` (upper) or `exact − bound` (lower)
/// over a 200-point grid.
fn worst_slack(p: &McpParams, target: Target) -> AppResult<Vec<(BoundSelector, f64)>> {
    let top = metrics::exact_quantile(p, target, 1.0 - 1e-6)?;
    let grid = Grid::linear(0.0, top, 200)?;
    let selectors: Vec<BoundSelector> = BoundSelector::ALL
        .iter()
        .copied()
        .filter(|s| s.target() == target)
        .collect();
    let mut worst = vec![f64::INFINITY; selectors.len()];
    for &r in grid.points() {
        let f = exact(p, target, r)?;
        for (w, s) in worst.iter_mut().zip(&selectors) {
            let b = s.evaluate(p, r)?;
            let slack = match s.side() {
                Side::Upper => b - f,
                Side::Lower => f - b,
            };
            *w = w.min(slack);
        }
    }
    Ok(selectors.into_iter().zip(worst).collect())
}

fn sandwich() -> AppResult<Vec<Check>> {
    let mut checks = Vec::new();
    for n in 1..=3u32 {
        let mut cells = Vec::new();
        for m in [1.0, 5.0, 10.0, 30.0] {
            for (target, lambda_p) in [(Target::Contact, 1e-6), (Target::NearestNeighbor, 1e-4)] {
                let base = params(n, lambda_p, m, 1.0)?;
                for &rd in metrics::rd_sweep_grid(&base, 30)?.points() {
                    cells.push((target, base.with_rd(rd)?));
                }
            }
        }
        let results = cells
            .par_iter()
            .map(|(t, p)| worst_slack(p, *t))
            .collect::<AppResult<Vec<_>>>()?;
        for s in BoundSelector::ALL {
            let worst = results
                .iter()
                .flatten()
                .filter(|(b, _)| *b == s)
                .map(|(_, w)| *w)
                .fold(f64::INFINITY, f64::min);
            let name = format!("n={n} {} worst slack", compute::bound_column(s));
            checks.push(Check::at_least("sandwich", name, worst, -SANDWICH_SLACK));
        }
    }
    Ok(checks)
}

fn tight(target: Target, side: Side) -> BoundSelector {
    BoundSelector::new(target, side, Family::Tight).expect("tight bounds exist for both targets")
}

fn deviation() -> AppResult<Vec<Check>> {
    let opts = SweepOptions::default();
    let mut checks = Vec::new();
    let cd = [
        tight(Target::Contact, Side::Upper),
        tight(Target::Contact, Side::Lower),
    ];
    for (m, ceiling) in [(1.0, 0.09), (10.0, 0.04), (30.0, 0.04)] {
        let base = params(2, 1e-6, m, 1.0)?;
        let grid = metrics::rd_sweep_grid(&base, 30)?;
        for r in compute::deviation_sweep_par(&base, &grid, &cd, &[Metric::Avg], &opts)? {
            let name = format!("m={m} max {}", compute::report_column(&r));
            checks.push(Check::below("deviation", name, r.max_over_rd(), ceiling));
        }
    }
    let nnd = [
        tight(Target::NearestNeighbor, Side::Upper),
        tight(Target::NearestNeighbor, Side::Lower),
    ];
    for m in [10.0, 30.0] {
        let base = params(2, 1e-4, m, 1.0)?;
        let grid = metrics::rd_sweep_grid(&base, 30)?;
        for r in
            compute::deviation_sweep_par(&base, &grid, &nnd, &[Metric::Ks, Metric::Avg], &opts)?
        {
            let ceiling = match (r.metric(), r.side()) {
                (Metric::Ks, Side::Upper) => 0.06,
                (Metric::Ks, Side::Lower) => 0.08,
                _ => 0.07,
            };
            let name = format!("m={m} max {}", compute::report_column(&r));
            checks.push(Check::below("deviation", name, r.max_over_rd(), ceiling));
        }
    }
    Ok(checks)
}

/// Parameter sets for the Monte Carlo comparison.
pub fn monte_carlo_sets() -> AppResult<Vec<McpParams>> {
    [
        (1, 0.05, 4.0, 1.0),
        (1, 1.0, 0.5, 2.0),
        (2, 20e-6, 30.0, 40.0),
        (2, 1e-4, 5.0, 100.0),
        (3, 1e-3, 5.0, 3.0),
        (3, 1e-3, 20.0, 15.0),
    ]
    .into_iter()
    .map(|(n, lp, m, rd)| params(n, lp, m, rd))
    .collect()
}

/// Monte Carlo samples per curve.
pub const MC_SAMPLES: u64 = 100_000;

/// Largest gap between the empirical and exact CDFs of one set, for the
/// contact and nearest-neighbor distances.
pub fn monte_carlo_gaps(p: &McpParams, seed: u64, samples: u64) -> AppResult<[f64; 2]> {
    let r_max = compute::default_r_max(p)?;
    let grid = Grid::linear(0.0, r_max, 200)?;
    let cfg = SimConfig::new(samples, seed, r_max, 1.0)?;
    let mut gaps = [0.0; 2];
    for (gap, target) in gaps
        .iter_mut()
        .zip([Target::Contact, Target::NearestNeighbor])
    {
        let curve = match target {
            Target::Contact => simulate::empirical_contact_cdf(p, &grid, &cfg)?,
            Target::NearestNeighbor => simulate::empirical_nnd_cdf(p, &grid, &cfg)?,
        };
        for (&r, &e) in grid.points().iter().zip(curve.values()) {
            *gap = f64::max(*gap, (e - exact(p, target, r)?).abs());
        }
    }
    Ok(gaps)
}

fn monte_carlo(seed: u64) -> AppResult<Vec<Check>> {
    let band = simulate::dkw_bound(MC_SAMPLES, 0.01);
    let mut checks = Vec::new();
    for (i, p) in monte_carlo_sets()?.iter().enumerate() {
        let gaps = monte_carlo_gaps(p, seed.wrapping_add(i as u64), MC_SAMPLES)?;
        for (gap, target) in gaps
            .into_iter()
            .zip([Target::Contact, Target::NearestNeighbor])
        {
            let name = format!(
                "n={} lambda_p={} m={} r_d={} {} sup gap",
                p.n(),
                p.lambda_p(),
                p.m(),
                p.r_d(),
                target.tag()
            );
            checks.push(Check::at_most("montecarlo", name, gap, band));
        }
    }
    Ok(checks)
}

type CdfOp = (
    &'static str,
    fn(&McpParams, f64) -> mcpdist_core::Result<f64>,
);

fn cdf_ops() -> Vec<CdfOp> {
    use mcpdist_core::bounds::*;
    vec![
        ("F_CD", contact_cdf),
        ("F_NND", nnd_cdf),
        ("F_CD_ub1", contact_cdf_ub_tight),
        ("F_CD_lb1", contact_cdf_lb_tight),
        ("F_CD_ub2", contact_cdf_ub_simple),
        ("F_CD_lb2", contact_cdf_lb_simple),
        ("F_NND_ub1", nnd_cdf_ub_tight),
        ("F_NND_lb1", nnd_cdf_lb_tight),
        ("F_NND_nnd_extra_ub", nnd_cdf_ub_extra),
        ("F_CD_limit_rd_zero", analytic::limit_cdf_rd_zero),
        ("F_CD_limit_rd_inf", analytic::limit_cdf_rd_inf),
    ]
}

fn random_point(rng: &mut ChaCha8Rng) -> AppResult<(McpParams, f64)> {
    let n = rng.random_range(1..=3u32);
    let lambda_p = 10f64.powf(rng.random_range(-6.0..0.0));
    let m = 10f64.powf(rng.random_range(-0.5..1.7));
    let l = lambda_p.powf(-1.0 / f64::from(n));
    let rd = l * 10f64.powf(rng.random_range(-2.0..2.0));
    let r = rng.random_range(0.0..3.0) * l.min(4.0 * rd);
    Ok((params(n, lambda_p, m, rd)?, r))
}

fn scaling(seed: u64) -> AppResult<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..100)
        .map(|_| random_point(&mut rng))
        .collect::<AppResult<Vec<_>>>()?;
    let mut checks = Vec::new();
    for k in [0.5, 2.0, 10.0] {
        for (name, op) in cdf_ops() {
            let worst = points
                .par_iter()
                .map(|(p, r)| -> AppResult<f64> {
                    Ok((op(p, *r)? - op(&p.scaled(k)?, r / k)?).abs())
                })
                .collect::<AppResult<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            checks.push(Check::at_most(
                "scaling",
                format!("k={k} {name} max change"),
                worst,
                1e-10,
            ));
        }
    }
    Ok(checks)
}

fn branches(seed: u64) -> AppResult<Vec<Check>> {
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for n in 1..=4u32 {
        for (m, rd) in [(0.5, 0.3), (5.0, 1.0), (30.0, 2.0)] {
            let p = params(n, 0.1, m, rd)?;
            let edge = 2.0 * rd;
            let below = nnd_cdf(&p, edge * (1.0 - 1e-13))?;
            let far = 1.0 - (1.0 - contact_cdf(&p, edge)?) * (-m).exp();
            worst = worst.max((below - far).abs());
        }
    }
    checks.push(Check::at_most(
        "branches",
        "NND continuity at 2r_d".into(),
        worst,
        1e-9,
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0b5e);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = params(
            1,
            10f64.powf(rng.random_range(-2.0..0.5)),
            rng.random_range(0.1..50.0),
            rng.random_range(0.01..10.0),
        )?;
        let r = rng.random_range(0.0..5.0) * p.r_d();
        worst = worst.max((contact_cdf_1d(&p, r)? - contact_cdf(&p, r)?).abs());
    }
    checks.push(Check::at_most(
        "branches",
        "1-D closed form vs quadrature".into(),
        worst,
        1e-8,
    ));

    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let r = rng.random_range(0.01..5.0);
        let rd = rng.random_range(0.01..5.0);
        let x = rng.random_range(0.0..1.1 * (r + rd));
        let cap = intersection_volume(&LensGeometry::new(2, r, rd, x)?);
        worst = worst.max((cap - intersection_volume_2d(r, rd, x)).abs());
    }
    checks.push(Check::at_most(
        "branches",
        "2-D lens formula vs cap decomposition".into(),
        worst,
        1e-10,
    ));
    Ok(checks)
}

/// Parameter sets for the PDF checks.
pub fn pdf_sets() -> AppResult<Vec<McpParams>> {
    [
        (1, 0.05, 4.0, 1.0),
        (2, 20e-6, 30.0, 40.0),
        (3, 1e-3, 5.0, 3.0),
        (4, 1.0, 3.0, 0.7),
    ]
    .into_iter()
    .map(|(n, lp, m, rd)| params(n, lp, m, rd))
    .collect()
}

fn pdf_of(p: &McpParams, target: Target, r: f64) -> AppResult<f64> {
    Ok(match target {
        Target::Contact => analytic::contact_pdf(p, r)?,
        Target::NearestNeighbor => analytic::nnd_pdf(p, r)?,
    })
}

fn pdf() -> AppResult<Vec<Check>> {
    let mut checks = Vec::new();
    for p in pdf_sets()? {
        let upper = metrics::exact_quantile(&p, Target::Contact, 1.0 - TAIL_MASS)?;
        for target in [Target::Contact, Target::NearestNeighbor] {
            let lo = metrics::exact_quantile(&p, target, 1e-3)?;
            let hi = metrics::exact_quantile(&p, target, 0.999)?;
            let mut worst: f64 = 0.0;
            for i in 0..50 {
                let r = lo + (hi - lo) * f64::from(i) / 49.0;
                let h = (1e-5 * (hi - lo)).min(0.25 * r);
                if (r - p.r_d()).abs() < 2.0 * h || (r - 2.0 * p.r_d()).abs() < 2.0 * h {
                    continue;
                }
                let fd = (exact(&p, target, r + h)? - exact(&p, target, r - h)?) / (2.0 * h);
                let f = pdf_of(&p, target, r)?;
                worst = worst.max((f - fd).abs() / f);
            }
            let label = format!("n={} {}", p.n(), target.tag());
            checks.push(Check::at_most(
                "pdf",
                format!("{label} finite-difference rel error"),
                worst,
                1e-4,
            ));

            let spec = IntegrationSpec::new(0.0, upper)?
                .with_tolerance(Tolerance::new(1e-12, 1e-10)?)
                .with_breakpoints([p.r_d(), 2.0 * p.r_d()]);
            let mut failure = None;
            let mass = integrate(
                |r| {
                    pdf_of(&p, target, r).unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        0.0
                    })
                },
                &spec,
            )?
            .value;
            if let Some(e) = failure {
                return Err(e);
            }
            checks.push(Check::at_most(
                "pdf",
                format!("{label} |mass - 1|"),
                (mass - 1.0).abs(),
                1e-6,
            ));
        }
    }
    Ok(checks)
}

fn sup_gap<F, G>(grid: &Grid, mut f: F, mut g: G) -> AppResult<f64>
where
    F: FnMut(f64) -> AppResult<f64>,
    G: FnMut(f64) -> AppResult<f64>,
{
    let mut worst: f64 = 0.0;
    for &r in grid.points() {
        worst = worst.max((f(r)? - g(r)?).abs());
    }
    Ok(worst)
}

fn asymptotics() -> AppResult<Vec<Check>> {
    let mut checks = Vec::new();
    for n in 1..=3u32 {
        for m in [1.0, 10.0] {
            let lambda_p: f64 = 1e-4;
            let l = lambda_p.powf(-1.0 / f64::from(n));
            let small = params(n, lambda_p, m, 1e-3 * l)?;
            let large = params(n, lambda_p, m, 1e3 * l)?;
            for (p, kind, limit, members) in [
                (
                    small,
                    CurveKind::LimitRdZero,
                    1e-3,
                    [("exact", None), ("ub1", Some(0)), ("lb1", Some(1))],
                ),
                (
                    large,
                    CurveKind::LimitRdInf,
                    1e-2,
                    [("exact", None), ("ub2", Some(2)), ("lb2", Some(3))],
                ),
            ] {
                let body = Grid::linear(
                    metrics::exact_quantile(&p, Target::Contact, 1e-3)?,
                    metrics::exact_quantile(&p, Target::Contact, 0.999)?,
                    200,
                )?;
                let g = |r| -> AppResult<f64> {
                    Ok(mcpdist_core::curve::point_value(
                        &p,
                        Target::Contact,
                        kind,
                        Quantity::Cdf,
                        r,
                    )?)
                };
                for (label, sel) in members {
                    let gap = match sel {
                        None => sup_gap(&body, |r| exact(&p, Target::Contact, r), g)?,
                        Some(i) => {
                            sup_gap(&body, |r| Ok(BoundSelector::ALL[i].evaluate(&p, r)?), g)?
                        }
                    };
                    let name = format!("n={n} m={m} r_d={:e} {label} vs {}", p.r_d(), kind.tag());
                    checks.push(Check::below("asymptotics", name, gap, limit));
                }
            }
        }
    }
    Ok(checks)
}

fn metric_properties() -> AppResult<Vec<Check>> {
    let mut checks = Vec::new();
    let p = params(2, 1e-4, 10.0, 30.0)?;
    for target in [Target::Contact, Target::NearestNeighbor] {
        let grid = metrics::metric_grid(&p, target, 2000)?;
        let cdf =
            DistributionCurve::tabulate(&p, target, CurveKind::Exact, Quantity::Cdf, grid.clone())?;
        let pdf = DistributionCurve::tabulate(&p, target, CurveKind::Exact, Quantity::Pdf, grid)?;
        let tag = target.tag();
        checks.push(Check::at_most(
            "metrics",
            format!("{tag} KS identical"),
            metrics::ks_distance(&cdf, &cdf)?,
            0.0,
        ));
        checks.push(Check::at_most(
            "metrics",
            format!("{tag} Avg identical"),
            metrics::avg_deviation(&cdf, &cdf, &pdf)?,
            0.0,
        ));
        checks.push(Check::at_most(
            "metrics",
            format!("{tag} KL identical"),
            metrics::kl_divergence(&pdf, &pdf)?.abs(),
            1e-12,
        ));
    }

    let opts = SweepOptions::default();
    let mut lowest = f64::INFINITY;
    for m in [1.0, 10.0] {
        let base = params(2, 1e-4, m, 1.0)?;
        let grid = metrics::rd_sweep_grid(&base, 30)?;
        for r in
            compute::deviation_sweep_par(&base, &grid, &BoundSelector::ALL, &[Metric::Kl], &opts)?
        {
            lowest = r.values().iter().copied().fold(lowest, f64::min);
        }
    }
    checks.push(Check::at_least(
        "metrics",
        "min KL over sweep".into(),
        lowest,
        -1e-9,
    ));

    let spec = IntegrationSpec::new(0.0, 80.0)?.with_tolerance(Tolerance::new(1e-14, 1e-12)?);
    let kl = metrics::kl_divergence_fn(
        |r| metrics::exponential_pdf(1.0, r),
        |r| metrics::exponential_pdf(0.5, r),
        &spec,
    )?;
    checks.push(Check::at_most(
        "metrics",
        "exponential pair KL error".into(),
        (kl - (2f64.ln() - 0.5)).abs(),
        1e-6,
    ));
    Ok(checks)
}

fn render_csv(t: &Table) -> AppResult<Vec<u8>> {
    let mut out = Vec::new();
    t.write_csv(&mut out)?;
    Ok(out)
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> AppResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| AppError::Parameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn determinism(seed: u64) -> AppResult<Vec<Check>> {
    let p = params(2, 1e-4, 5.0, 20.0)?;
    let grid = Grid::linear(0.0, 150.0, 50)?;
    let cfg = SimConfig::new(20_000, seed, 150.0, 1.0)?;
    let run = || -> AppResult<Vec<u8>> { render_csv(&compute::simulate_table(&p, &grid, &cfg)?.0) };
    let one = in_pool(1, run)??;
    let many = in_pool(4, run)??;
    let again = run()?;
    let sim_differs = one != many || one != again;
    let a = render_csv(&report_table(&scaling(seed)?, seed))?;
    let b = render_csv(&report_table(&scaling(seed)?, seed))?;
    let flag = |d: bool| f64::from(u8::from(d));
    Ok(vec![
        Check::at_most(
            "determinism",
            "simulate output across thread counts".into(),
            flag(sim_differs),
            0.0,
        ),
        Check::at_most(
            "determinism",
            "scaling report repeated".into(),
            flag(a != b),
            0.0,
        ),
    ])
}
