//! Radius grids and tabulated distribution curves.

use alloc::vec::Vec;

use crate::analytic;
use crate::bounds::{BoundSelector, Side};
use crate::error::{Error, Result};
use crate::math::{exp_neg, ln, one_minus_exp_neg, powi};
use crate::params::McpParams;

/// Which distance a curve describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    /// Contact distance R_C.
    Contact,
    /// Nearest-neighbor distance R_N.
    NearestNeighbor,
}

impl Target {
    /// Short tag used in file formats.
    pub fn tag(&self) -> &'static str {
        match self {
            Target::Contact => "CD",
            Target::NearestNeighbor => "NND",
        }
    }
}

/// What produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveKind {
    /// Exact distribution.
    Exact,
    /// Tight upper bound.
    UpperTight,
    /// Tight lower bound.
    LowerTight,
    /// Simple upper bound.
    UpperSimple,
    /// Simple lower bound.
    LowerSimple,
    /// Extra nearest-neighbor upper bound.
    NndExtraUpper,
    /// Monte Carlo estimate.
    Empirical,
    /// Limit as `r_d → 0` at fixed `m`.
    LimitRdZero,
    /// Limit as `r_d → ∞` at fixed `m`.
    LimitRdInf,
}

impl CurveKind {
    /// Short tag used in file formats.
    pub fn tag(&self) -> &'static str {
        match self {
            CurveKind::Exact => "exact",
            CurveKind::UpperTight => "ub1",
            CurveKind::LowerTight => "lb1",
            CurveKind::UpperSimple => "ub2",
            CurveKind::LowerSimple => "lb2",
            CurveKind::NndExtraUpper => "nnd_extra_ub",
            CurveKind::Empirical => "empirical",
            CurveKind::LimitRdZero => "limit_rd_zero",
            CurveKind::LimitRdInf => "limit_rd_inf",
        }
    }

    fn bound_side(&self) -> Option<Side> {
        match self {
            CurveKind::UpperTight | CurveKind::UpperSimple | CurveKind::NndExtraUpper => {
                Some(Side::Upper)
            }
            CurveKind::LowerTight | CurveKind::LowerSimple => Some(Side::Lower),
            _ => None,
        }
    }
}

/// CDF or PDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// Cumulative distribution function.
    Cdf,
    /// Probability density function.
    Pdf,
}

/// Point placement for generated grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spacing {
    /// Equal steps.
    Linear,
    /// Equal ratios; needs a positive lower end.
    Geometric,
}

/// Strictly increasing, nonnegative radii.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    /// Wraps explicit points after checking the invariants.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("Grid", "grid is empty"));
        }
        if !points.iter().all(|r| r.is_finite() && *r >= 0.0) {
            return Err(Error::domain(
                "Grid",
                "radii must be finite and nonnegative",
            ));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("Grid", "radii must be strictly increasing"));
        }
        Ok(Self { points })
    }

    /// `steps` points from `min` to `max` inclusive.
    pub fn generate(min: f64, max: f64, steps: usize, spacing: Spacing) -> Result<Self> {
        if steps < 2 {
            return Err(Error::domain("Grid", "need at least two steps"));
        }
        if !(min >= 0.0 && min < max && max.is_finite()) {
            return Err(Error::domain("Grid", "need 0 <= r_min < r_max"));
        }
        let last = (steps - 1) as f64;
        let points = match spacing {
            Spacing::Linear => (0..steps)
                .map(|i| min + (max - min) * (i as f64 / last))
                .collect(),
            Spacing::Geometric => {
                if min == 0.0 {
                    return Err(Error::domain("Grid", "geometric spacing needs r_min > 0"));
                }
                let ratio = ln(max / min);
                (0..steps)
                    .map(|i| min * crate::math::exp(ratio * (i as f64 / last)))
                    .collect()
            }
        };
        let mut points: Vec<f64> = points;
        points[steps - 1] = max;
        Self::new(points)
    }

    /// Linear grid.
    pub fn linear(min: f64, max: f64, steps: usize) -> Result<Self> {
        Self::generate(min, max, steps, Spacing::Linear)
    }

    /// Geometric grid.
    pub fn geometric(min: f64, max: f64, steps: usize) -> Result<Self> {
        Self::generate(min, max, steps, Spacing::Geometric)
    }

    /// Radii.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of radii.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; grids are nonempty.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest radius.
    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// The grid with every interval halved.
    pub fn refined(&self) -> Self {
        let mut points = Vec::with_capacity(2 * self.points.len());
        for w in self.points.windows(2) {
            points.push(w[0]);
            let mid = 0.5 * (w[0] + w[1]);
            if mid > w[0] && mid < w[1] {
                points.push(mid);
            }
        }
        points.push(self.max());
        Self { points }
    }
}

/// Slack allowed on monotonicity and range checks of tabulated CDFs, which
/// carry quadrature error.
pub const CDF_SLACK: f64 = 1e-9;

/// A CDF or PDF tabulated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionCurve {
    target: Target,
    kind: CurveKind,
    quantity: Quantity,
    grid: Grid,
    values: Vec<f64>,
    params: McpParams,
    samples: Option<u64>,
    low_samples: bool,
}

impl DistributionCurve {
    /// Builds a curve from raw values. Bound CDFs are replaced by their
    /// monotone envelope (running max from the left for lower bounds, running
    /// min from the right for upper bounds), which is still a bound on a
    /// nondecreasing function.
    pub fn assemble(
        target: Target,
        kind: CurveKind,
        quantity: Quantity,
        grid: Grid,
        mut values: Vec<f64>,
        params: McpParams,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("DistributionCurve", "non-finite value"));
        }
        if quantity == Quantity::Cdf {
            match kind.bound_side() {
                Some(Side::Lower) => {
                    let mut best = 0.0f64;
                    for v in &mut values {
                        best = best.max(*v);
                        *v = best;
                    }
                }
                Some(Side::Upper) => {
                    let mut best = 1.0f64;
                    for v in values.iter_mut().rev() {
                        best = best.min(*v);
                        *v = best;
                    }
                }
                None => {}
            }
        }
        let curve = Self {
            target,
            kind,
            quantity,
            grid,
            values,
            params,
            samples: None,
            low_samples: false,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Marks the curve as a Monte Carlo estimate over `samples` draws.
    pub fn with_samples(mut self, samples: u64, low_samples: bool) -> Self {
        self.samples = Some(samples);
        self.low_samples = low_samples;
        self
    }

    fn validate(&self) -> Result<()> {
        match self.quantity {
            Quantity::Cdf => {
                if self
                    .values
                    .iter()
                    .any(|v| *v < -CDF_SLACK || *v > 1.0 + CDF_SLACK)
                {
                    return Err(Error::domain(
                        "DistributionCurve",
                        "CDF value outside [0, 1]",
                    ));
                }
                if self.values.windows(2).any(|w| w[1] < w[0] - CDF_SLACK) {
                    return Err(Error::domain("DistributionCurve", "CDF decreases"));
                }
            }
            Quantity::Pdf => {
                if self.values.iter().any(|v| *v < 0.0) {
                    return Err(Error::domain("DistributionCurve", "negative density"));
                }
            }
        }
        Ok(())
    }

    /// Evaluates and assembles a curve point by point.
    pub fn tabulate(
        p: &McpParams,
        target: Target,
        kind: CurveKind,
        quantity: Quantity,
        grid: Grid,
    ) -> Result<Self> {
        let values = grid
            .points()
            .iter()
            .map(|&r| point_value(p, target, kind, quantity, r))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(target, kind, quantity, grid, values, *p)
    }

    /// Tabulates a bound CDF.
    pub fn tabulate_bound(p: &McpParams, selector: BoundSelector, grid: Grid) -> Result<Self> {
        Self::tabulate(p, selector.target(), selector.kind(), Quantity::Cdf, grid)
    }

    /// Distance described.
    pub fn target(&self) -> Target {
        self.target
    }

    /// Producer tag.
    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    /// CDF or PDF.
    pub fn quantity(&self) -> Quantity {
        self.quantity
    }

    /// Radii.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Values at the radii.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Parameters the curve was computed for.
    pub fn params(&self) -> &McpParams {
        &self.params
    }

    /// Monte Carlo sample count, for empirical curves.
    pub fn samples(&self) -> Option<u64> {
        self.samples
    }

    /// Set when some grid point rests on fewer than 100 effective samples.
    pub fn low_sample_warning(&self) -> bool {
        self.low_samples
    }
}

/// One value of a curve that has a closed or quadrature form.
///
/// Bound PDFs and empirical curves have no pointwise form and give a domain
/// error.
pub fn point_value(
    p: &McpParams,
    target: Target,
    kind: CurveKind,
    quantity: Quantity,
    r: f64,
) -> Result<f64> {
    use CurveKind as K;
    match (kind, quantity) {
        (K::Exact, Quantity::Cdf) => match target {
            Target::Contact => analytic::contact_cdf(p, r),
            Target::NearestNeighbor => analytic::nnd_cdf(p, r),
        },
        (K::Exact, Quantity::Pdf) => match target {
            Target::Contact => analytic::contact_pdf(p, r),
            Target::NearestNeighbor => analytic::nnd_pdf(p, r),
        },
        (K::LimitRdZero | K::LimitRdInf, _) if target == Target::Contact => {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::domain(
                    "point_value",
                    "radius must be finite and nonnegative",
                ));
            }
            let rate = p.v_n()
                * p.lambda_p()
                * if kind == K::LimitRdZero {
                    one_minus_exp_neg(p.m())
                } else {
                    p.m()
                };
            let e = rate * powi(r, p.n());
            Ok(match quantity {
                Quantity::Cdf => one_minus_exp_neg(e),
                Quantity::Pdf => rate * f64::from(p.n()) * powi(r, p.n() - 1) * exp_neg(e),
            })
        }
        (K::Empirical, _) => Err(Error::domain(
            "point_value",
            "empirical curves come from simulation",
        )),
        (K::LimitRdZero | K::LimitRdInf, _) => Err(Error::domain(
            "point_value",
            "limit laws are defined for the contact distance",
        )),
        (_, Quantity::Pdf) => Err(Error::domain(
            "point_value",
            "bound densities are obtained by differencing",
        )),
        (_, Quantity::Cdf) => {
            let selector = BoundSelector::ALL
                .into_iter()
                .find(|s| s.target() == target && s.kind() == kind)
                .ok_or(Error::domain(
                    "point_value",
                    "no such bound for this target",
                ))?;
            selector.evaluate(p, r)
        }
    }
}
