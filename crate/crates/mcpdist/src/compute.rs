//! Tables produced by each command.

use mcpdist_core::bounds::{self, BoundSelector, Certification, ClosedForm};
use mcpdist_core::metrics::{self, DeviationReport, Metric, SweepOptions};
use mcpdist_core::{analytic, CurveKind, DistributionCurve, Grid, McpParams, Quantity, Target};
use rayon::prelude::*;

use crate::error::AppResult;
use crate::simulate::{self, SimConfig};
use crate::table::{Cell, Table};

/// Level at which the default radius range ends.
pub const DEFAULT_RANGE_LEVEL: f64 = 0.999;

/// Radius where the exact CD CDF reaches [`DEFAULT_RANGE_LEVEL`].
pub fn default_r_max(p: &McpParams) -> AppResult<f64> {
    Ok(metrics::exact_quantile(
        p,
        Target::Contact,
        DEFAULT_RANGE_LEVEL,
    )?)
}

fn tabulate_par(
    p: &McpParams,
    target: Target,
    kind: CurveKind,
    quantity: Quantity,
    grid: &Grid,
) -> AppResult<DistributionCurve> {
    let values = grid
        .points()
        .par_iter()
        .map(|&r| mcpdist_core::curve::point_value(p, target, kind, quantity, r))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(DistributionCurve::assemble(
        target,
        kind,
        quantity,
        grid.clone(),
        values,
        *p,
    )?)
}

fn table_of(
    command: &str,
    p: &McpParams,
    grid: &Grid,
    curves: &[(String, &DistributionCurve)],
) -> Table {
    let mut columns = vec!["r".to_string()];
    columns.extend(curves.iter().map(|(name, _)| name.clone()));
    let mut t = Table::new(command, Some(*p), columns);
    for (i, &r) in grid.points().iter().enumerate() {
        let mut row = vec![Cell::Num(r)];
        row.extend(curves.iter().map(|(_, c)| Cell::Num(c.values()[i])));
        t.push(row);
    }
    t
}

/// Columns `r, F_CD, F_NND`.
pub fn cdf_table(p: &McpParams, grid: &Grid) -> AppResult<Table> {
    let cd = tabulate_par(p, Target::Contact, CurveKind::Exact, Quantity::Cdf, grid)?;
    let nnd = tabulate_par(
        p,
        Target::NearestNeighbor,
        CurveKind::Exact,
        Quantity::Cdf,
        grid,
    )?;
    Ok(table_of(
        "cdf",
        p,
        grid,
        &[("F_CD".into(), &cd), ("F_NND".into(), &nnd)],
    ))
}

/// Columns `r, f_CD, f_NND`.
pub fn pdf_table(p: &McpParams, grid: &Grid) -> AppResult<Table> {
    let cd = tabulate_par(p, Target::Contact, CurveKind::Exact, Quantity::Pdf, grid)?;
    let nnd = tabulate_par(
        p,
        Target::NearestNeighbor,
        CurveKind::Exact,
        Quantity::Pdf,
        grid,
    )?;
    Ok(table_of(
        "pdf",
        p,
        grid,
        &[("f_CD".into(), &cd), ("f_NND".into(), &nnd)],
    ))
}

/// Column name of a bound, such as `F_CD_ub1`.
pub fn bound_column(s: BoundSelector) -> String {
    format!("F_{}_{}", s.target().tag(), s.kind().tag())
}

/// Exact CDFs, every bound and both CD limits.
pub fn bounds_table(p: &McpParams, grid: &Grid) -> AppResult<Table> {
    let mut curves = Vec::new();
    for target in [Target::Contact, Target::NearestNeighbor] {
        curves.push((
            format!("F_{}", target.tag()),
            tabulate_par(p, target, CurveKind::Exact, Quantity::Cdf, grid)?,
        ));
        for s in BoundSelector::ALL.iter().filter(|s| s.target() == target) {
            curves.push((
                bound_column(*s),
                tabulate_par(p, target, s.kind(), Quantity::Cdf, grid)?,
            ));
        }
    }
    for kind in [CurveKind::LimitRdZero, CurveKind::LimitRdInf] {
        curves.push((
            format!("F_CD_{}", kind.tag()),
            tabulate_par(p, Target::Contact, kind, Quantity::Cdf, grid)?,
        ));
    }
    let named: Vec<(String, &DistributionCurve)> =
        curves.iter().map(|(n, c)| (n.clone(), c)).collect();
    Ok(table_of("bounds", p, grid, &named))
}

/// Empirical and exact CDFs side by side, with the DKW band in the header.
pub fn simulate_table(
    p: &McpParams,
    grid: &Grid,
    cfg: &SimConfig,
) -> AppResult<(Table, Vec<String>)> {
    let cd = simulate::empirical_contact_cdf(p, grid, cfg)?;
    let nnd = simulate::empirical_nnd_cdf(p, grid, cfg)?;
    let cd_exact = tabulate_par(p, Target::Contact, CurveKind::Exact, Quantity::Cdf, grid)?;
    let nnd_exact = tabulate_par(
        p,
        Target::NearestNeighbor,
        CurveKind::Exact,
        Quantity::Cdf,
        grid,
    )?;
    let mut t = table_of(
        "simulate",
        p,
        grid,
        &[
            ("F_CD_empirical".into(), &cd),
            ("F_NND_empirical".into(), &nnd),
            ("F_CD".into(), &cd_exact),
            ("F_NND".into(), &nnd_exact),
        ],
    );
    t.meta("samples", cfg.samples().to_string());
    t.meta("seed", cfg.seed().to_string());
    t.meta(
        "margin_factor",
        crate::table::format_number(cfg.margin_factor()),
    );
    t.meta("window_radius", crate::table::format_number(cfg.window(p)));
    t.meta(
        "dkw99",
        crate::table::format_number(simulate::dkw_bound(cfg.samples(), 0.01)),
    );
    let mut warnings = Vec::new();
    if cd.low_sample_warning() || nnd.low_sample_warning() {
        warnings.push(format!(
            "fewer than {} samples; empirical curves are unreliable",
            simulate::MIN_EFFECTIVE_SAMPLES
        ));
    }
    Ok((t, warnings))
}

/// Every (bound, metric) report over `r_d_grid`, evaluated in parallel over
/// all cells of the sweep.
pub fn deviation_sweep_par(
    base: &McpParams,
    r_d_grid: &Grid,
    selectors: &[BoundSelector],
    metric_list: &[Metric],
    opts: &SweepOptions,
) -> AppResult<Vec<DeviationReport>> {
    let cells: Vec<(BoundSelector, Metric, f64)> = selectors
        .iter()
        .flat_map(|&s| {
            metric_list
                .iter()
                .flat_map(move |&m| r_d_grid.points().iter().map(move |&rd| (s, m, rd)))
        })
        .collect();
    let values = cells
        .par_iter()
        .map(|&(s, m, rd)| metrics::deviation_at_rd(&base.with_rd(rd)?, s, m, opts))
        .collect::<Result<Vec<f64>, _>>()?;
    let per = r_d_grid.len();
    let mut reports = Vec::new();
    for (i, chunk) in values.chunks(per).enumerate() {
        let (s, m, _) = cells[i * per];
        reports.push(DeviationReport::new(
            s,
            m,
            r_d_grid.points().to_vec(),
            chunk.to_vec(),
            *base,
        )?);
    }
    Ok(reports)
}

/// Column name of a report, such as `CD_ub1_ks`.
pub fn report_column(r: &DeviationReport) -> String {
    format!(
        "{}_{}_{}",
        r.target().tag(),
        r.bound().kind().tag(),
        r.metric().tag()
    )
}

/// Sweep reports as a table with one column per report and the maxima in
/// the header.
pub fn deviation_table(base: &McpParams, r_d_grid: &Grid, reports: &[DeviationReport]) -> Table {
    let mut columns = vec!["r_d".to_string()];
    columns.extend(reports.iter().map(report_column));
    let mut t = Table::new("deviation", Some(*base), columns);
    t.meta("rd", "swept");
    for r in reports {
        t.meta(
            &format!("max_{}", report_column(r)),
            crate::table::format_number(r.max_over_rd()),
        );
    }
    for (i, &rd) in r_d_grid.points().iter().enumerate() {
        let mut row = vec![Cell::Num(rd)];
        row.extend(reports.iter().map(|r| Cell::Num(r.values()[i])));
        t.push(row);
    }
    t
}

/// Diagnostics for closed forms that failed certification in dimension `n`.
pub fn certification_warnings(n: u32) -> Vec<String> {
    ClosedForm::ALL
        .iter()
        .filter_map(|&form| match bounds::certification(form, n) {
            Certification::Rejected { max_error, at: (m, r_d, r) } => Some(format!(
                "closed form {form:?} rejected in dimension {n}: error {max_error:e} at m={m} r_d={r_d} r={r}; \
                 using quadrature of the bounded integrand"
            )),
            Certification::NotAttempted => {
                Some(format!("closed form {form:?} not certified in dimension {n}; using quadrature"))
            }
            Certification::Certified => None,
        })
        .collect()
}

/// Exact CDF of `target` at `r`.
pub fn exact_cdf(p: &McpParams, target: Target, r: f64) -> AppResult<f64> {
    Ok(match target {
        Target::Contact => analytic::contact_cdf(p, r)?,
        Target::NearestNeighbor => analytic::nnd_cdf(p, r)?,
    })
}
