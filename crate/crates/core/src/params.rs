use crate::error::{Error, Result};
use crate::geometry::unit_ball_volume_unchecked;
use crate::math::{powf, powi};

/// Parameters of a stationary Matérn cluster process in `n` dimensions.
///
/// Parents form a PPP of intensity `lambda_p`; each parent carries a PPP of
/// intensity `lambda_d` on the ball of radius `r_d` around it, so the mean
/// cluster size is `m = lambda_d * v_n * r_d^n`. Either `lambda_d` or `m`
/// is supplied and the other is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McpParams {
    n: u32,
    lambda_p: f64,
    lambda_d: f64,
    r_d: f64,
    m: f64,
    v_n: f64,
}

fn positive(op: &'static str, v: f64, reason: &'static str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(op, reason))
    }
}

impl McpParams {
    /// Builds parameters from the daughter intensity.
    pub fn with_lambda_d(n: u32, lambda_p: f64, lambda_d: f64, r_d: f64) -> Result<Self> {
        Self::check_common(n, lambda_p, r_d)?;
        positive(
            "McpParams",
            lambda_d,
            "lambda_d must be positive and finite",
        )?;
        let v_n = unit_ball_volume_unchecked(n);
        let m = lambda_d * v_n * powi(r_d, n);
        positive("McpParams", m, "mean cluster size is not representable")?;
        Ok(Self {
            n,
            lambda_p,
            lambda_d,
            r_d,
            m,
            v_n,
        })
    }

    /// Builds parameters from the mean number of daughters per parent.
    pub fn with_mean_points(n: u32, lambda_p: f64, m: f64, r_d: f64) -> Result<Self> {
        Self::check_common(n, lambda_p, r_d)?;
        positive(
            "McpParams",
            m,
            "mean cluster size must be positive and finite",
        )?;
        let v_n = unit_ball_volume_unchecked(n);
        let lambda_d = m / (v_n * powi(r_d, n));
        positive(
            "McpParams",
            lambda_d,
            "daughter intensity is not representable",
        )?;
        Ok(Self {
            n,
            lambda_p,
            lambda_d,
            r_d,
            m,
            v_n,
        })
    }

    fn check_common(n: u32, lambda_p: f64, r_d: f64) -> Result<()> {
        if n == 0 {
            return Err(Error::domain("McpParams", "dimension must be at least 1"));
        }
        positive(
            "McpParams",
            lambda_p,
            "lambda_p must be positive and finite",
        )?;
        positive("McpParams", r_d, "r_d must be positive and finite")
    }

    /// Dimension.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Parent intensity.
    pub fn lambda_p(&self) -> f64 {
        self.lambda_p
    }

    /// Daughter intensity inside the cluster ball.
    pub fn lambda_d(&self) -> f64 {
        self.lambda_d
    }

    /// Cluster radius.
    pub fn r_d(&self) -> f64 {
        self.r_d
    }

    /// Mean number of daughters per parent.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Volume of the unit ball in `n` dimensions.
    pub fn v_n(&self) -> f64 {
        self.v_n
    }

    /// β(r) = min(r, r_d).
    pub fn beta(&self, r: f64) -> f64 {
        r.min(self.r_d)
    }

    /// Same `n`, `lambda_p` and `m` with a different cluster radius.
    pub fn with_rd(&self, r_d: f64) -> Result<Self> {
        Self::with_mean_points(self.n, self.lambda_p, self.m, r_d)
    }

    /// Same `n`, `lambda_d` and `r_d` with a different parent intensity.
    pub fn with_lambda_p(&self, lambda_p: f64) -> Result<Self> {
        Self::with_lambda_d(self.n, lambda_p, self.lambda_d, self.r_d)
    }

    /// The reparameterization `(r_d / k, lambda_p * k^n, m)` under which every
    /// distribution evaluated at `r / k` is unchanged.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        positive("McpParams::scaled", k, "scale factor must be positive")?;
        Self::with_mean_points(
            self.n,
            self.lambda_p * powf(k, f64::from(self.n)),
            self.m,
            self.r_d / k,
        )
    }

    /// Characteristic inter-parent length `lambda_p^{-1/n}`.
    pub fn parent_length(&self) -> f64 {
        powf(self.lambda_p, -1.0 / f64::from(self.n))
    }
}
