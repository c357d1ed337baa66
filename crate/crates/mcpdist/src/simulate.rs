//! Monte Carlo sampling of the process and empirical distance CDFs.
//!
//! Every sample draws from its own ChaCha8 stream, selected by the sample
//! index, so results do not depend on the thread count.

use mcpdist_core::{CurveKind, DistributionCurve, Grid, McpParams, Quantity, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{AppError, AppResult};

/// Largest expected number of points in one simulated pattern.
pub const MAX_EXPECTED_POINTS: f64 = 1e8;

/// Sample counts below this flag the curve as unreliable.
pub const MIN_EFFECTIVE_SAMPLES: u64 = 100;

/// One realization: parents in the simulation ball and their daughters,
/// stored as offsets from the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    n: usize,
    parents: Vec<f64>,
    owners: Vec<usize>,
    offsets: Vec<f64>,
    region_radius: f64,
}

impl PointPattern {
    /// Dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Radius of the simulation ball around the origin.
    pub fn region_radius(&self) -> f64 {
        self.region_radius
    }

    /// Number of parents.
    pub fn parent_count(&self) -> usize {
        self.parents.len() / self.n
    }

    /// Location of parent `i`.
    pub fn parent(&self, i: usize) -> &[f64] {
        &self.parents[i * self.n..(i + 1) * self.n]
    }

    /// Number of daughters over all clusters.
    pub fn daughter_count(&self) -> usize {
        self.owners.len()
    }

    /// Parent index and offset of daughter `j`.
    pub fn daughter(&self, j: usize) -> (usize, &[f64]) {
        (self.owners[j], &self.offsets[j * self.n..(j + 1) * self.n])
    }

    /// Distance from the origin to the closest daughter, or infinity.
    pub fn nearest_to_origin(&self) -> f64 {
        let mut best = f64::INFINITY;
        for j in 0..self.daughter_count() {
            let (i, off) = self.daughter(j);
            let d2: f64 = self
                .parent(i)
                .iter()
                .zip(off)
                .map(|(c, o)| (c + o) * (c + o))
                .sum();
            best = best.min(d2);
        }
        best.sqrt()
    }
}

/// Sample count, seed and window sizing for the empirical CDFs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    samples: u64,
    seed: u64,
    r_max: f64,
    margin_factor: f64,
}

impl SimConfig {
    /// Checks `samples ≥ 1`, `r_max > 0` and `margin_factor ≥ 1`.
    pub fn new(samples: u64, seed: u64, r_max: f64, margin_factor: f64) -> AppResult<Self> {
        if samples == 0 {
            return Err(AppError::Parameter("samples must be at least 1".into()));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(AppError::Parameter(
                "r_max must be positive and finite".into(),
            ));
        }
        if !(margin_factor >= 1.0 && margin_factor.is_finite()) {
            return Err(AppError::Parameter(
                "margin factor must be at least 1".into(),
            ));
        }
        Ok(Self {
            samples,
            seed,
            r_max,
            margin_factor,
        })
    }

    /// Number of independent realizations.
    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Base seed; sample `i` uses stream `i` of it.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Largest radius probed.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Multiplier on the minimal window radius `r_max + r_d`.
    pub fn margin_factor(&self) -> f64 {
        self.margin_factor
    }

    /// Radius of the simulation ball for `p`.
    pub fn window(&self, p: &McpParams) -> f64 {
        self.margin_factor * (self.r_max + p.r_d())
    }
}

/// The generator for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("Poisson mean is positive and bounded by the sizing check");
    d.sample(rng) as u64
}

/// Writes a uniform point of the ball of radius `radius` into `out`:
/// a normalized Gaussian direction scaled by `radius U^{1/n}`.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, radius: f64, out: &mut [f64]) {
    let norm = loop {
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let s: f64 = out.iter().map(|v| v * v).sum();
        if s > 0.0 {
            break s.sqrt();
        }
    };
    let u: f64 = rng.random();
    let scale = radius * u.powf(1.0 / out.len() as f64) / norm;
    out.iter_mut().for_each(|v| *v *= scale);
}

fn expected_points(p: &McpParams, radius: f64) -> f64 {
    p.lambda_p() * p.v_n() * radius.powi(p.n() as i32) * (1.0 + p.m())
}

/// One realization of the process restricted to parents in `B(o, radius)`.
pub fn sample_mcp<R: Rng + ?Sized>(
    p: &McpParams,
    radius: f64,
    rng: &mut R,
) -> AppResult<PointPattern> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(AppError::Parameter(
            "simulation radius must be positive and finite".into(),
        ));
    }
    let expected = expected_points(p, radius);
    if !(expected <= MAX_EXPECTED_POINTS) {
        return Err(AppError::Parameter(format!(
            "simulation window of radius {radius:e} holds {expected:e} points on average (limit {MAX_EXPECTED_POINTS:e}); \
             lower r_max or the margin factor"
        )));
    }
    let n = p.n() as usize;
    let parent_mean = p.lambda_p() * p.v_n() * radius.powi(p.n() as i32);
    let count = poisson(rng, parent_mean) as usize;
    let mut parents = vec![0.0; count * n];
    let mut owners = Vec::new();
    let mut offsets = Vec::new();
    let mut buf = vec![0.0; n];
    for i in 0..count {
        uniform_in_ball(rng, radius, &mut parents[i * n..(i + 1) * n]);
        for _ in 0..poisson(rng, p.m()) {
            uniform_in_ball(rng, p.r_d(), &mut buf);
            owners.push(i);
            offsets.extend_from_slice(&buf);
        }
    }
    Ok(PointPattern {
        n,
        parents,
        owners,
        offsets,
        region_radius: radius,
    })
}

fn check_window(p: &McpParams, grid: &Grid, cfg: &SimConfig) -> AppResult<f64> {
    if grid.max() > cfg.r_max() {
        return Err(AppError::Parameter(format!(
            "grid reaches {} beyond r_max {}",
            grid.max(),
            cfg.r_max()
        )));
    }
    let radius = cfg.window(p);
    let expected = expected_points(p, radius);
    if !(expected <= MAX_EXPECTED_POINTS) {
        return Err(AppError::Parameter(format!(
            "simulation window of radius {radius:e} holds {expected:e} points on average (limit {MAX_EXPECTED_POINTS:e})"
        )));
    }
    Ok(radius)
}

/// Contact distance of one realization seen from the origin.
pub fn contact_distance_sample<R: Rng + ?Sized>(
    p: &McpParams,
    radius: f64,
    rng: &mut R,
) -> AppResult<f64> {
    Ok(sample_mcp(p, radius, rng)?.nearest_to_origin())
}

/// Nearest-neighbor distance of a typical point placed at the origin: its
/// parent is uniform in `B(o, r_d)`, its siblings are a PPP of intensity
/// `λ_d` on the parent's ball, and the rest of the process is an
/// independent copy.
pub fn nnd_sample<R: Rng + ?Sized>(p: &McpParams, radius: f64, rng: &mut R) -> AppResult<f64> {
    let n = p.n() as usize;
    let mut home = vec![0.0; n];
    uniform_in_ball(rng, p.r_d(), &mut home);
    let mut best = f64::INFINITY;
    let mut buf = vec![0.0; n];
    for _ in 0..poisson(rng, p.m()) {
        uniform_in_ball(rng, p.r_d(), &mut buf);
        let d2: f64 = home.iter().zip(&buf).map(|(c, o)| (c + o) * (c + o)).sum();
        best = best.min(d2);
    }
    Ok(best
        .sqrt()
        .min(sample_mcp(p, radius, rng)?.nearest_to_origin()))
}

/// Fraction of `distances` at or below each grid radius.
pub fn empirical_cdf(distances: &[f64], grid: &Grid) -> Vec<f64> {
    let mut sorted = distances.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total = sorted.len() as f64;
    grid.points()
        .iter()
        .map(|&r| sorted.partition_point(|d| *d <= r) as f64 / total)
        .collect()
}

fn empirical(
    p: &McpParams,
    grid: &Grid,
    cfg: &SimConfig,
    target: Target,
) -> AppResult<DistributionCurve> {
    let radius = check_window(p, grid, cfg)?;
    let distances = (0..cfg.samples())
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed(), i);
            match target {
                Target::Contact => contact_distance_sample(p, radius, &mut rng),
                Target::NearestNeighbor => nnd_sample(p, radius, &mut rng),
            }
        })
        .collect::<AppResult<Vec<f64>>>()?;
    let values = empirical_cdf(&distances, grid);
    let curve = DistributionCurve::assemble(
        target,
        CurveKind::Empirical,
        Quantity::Cdf,
        grid.clone(),
        values,
        *p,
    )?;
    Ok(curve.with_samples(cfg.samples(), cfg.samples() < MIN_EFFECTIVE_SAMPLES))
}

/// Empirical CDF of the contact distance from `cfg.samples()` realizations.
pub fn empirical_contact_cdf(
    p: &McpParams,
    grid: &Grid,
    cfg: &SimConfig,
) -> AppResult<DistributionCurve> {
    empirical(p, grid, cfg, Target::Contact)
}

/// Empirical CDF of the nearest-neighbor distance under the Palm
/// construction.
pub fn empirical_nnd_cdf(
    p: &McpParams,
    grid: &Grid,
    cfg: &SimConfig,
) -> AppResult<DistributionCurve> {
    empirical(p, grid, cfg, Target::NearestNeighbor)
}

/// Half-width of the two-sided DKW band at confidence `1 − alpha`.
pub fn dkw_bound(samples: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * samples as f64)).sqrt()
}
