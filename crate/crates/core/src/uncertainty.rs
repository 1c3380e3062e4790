//! Pose uncertainty, sigma points, and the weighted steering combination.

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Pose};

/// Diagonal covariance over (x, y, yaw).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Covariance3 {
    pub var_x: f64,
    pub var_y: f64,
    pub var_yaw: f64,
}

impl Covariance3 {
    pub const ZERO: Covariance3 = Covariance3 {
        var_x: 0.0,
        var_y: 0.0,
        var_yaw: 0.0,
    };

    pub const fn new(var_x: f64, var_y: f64, var_yaw: f64) -> Self {
        Self {
            var_x,
            var_y,
            var_yaw,
        }
    }

    /// Builds a covariance from per-axis standard deviations.
    pub fn from_std(sigma_x: f64, sigma_y: f64, sigma_yaw: f64) -> Self {
        Self::new(sigma_x * sigma_x, sigma_y * sigma_y, sigma_yaw * sigma_yaw)
    }

    pub fn std_devs(&self) -> [f64; 3] {
        [self.var_x.sqrt(), self.var_y.sqrt(), self.var_yaw.sqrt()]
    }

    pub fn is_zero(&self) -> bool {
        self.var_x == 0.0 && self.var_y == 0.0 && self.var_yaw == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("x", self.var_x), ("y", self.var_y), ("yaw", self.var_yaw)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::ConfigInvalid(format!(
                    "variance along {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Combines independent vehicle and road uncertainty into a single
/// covariance attributed to the vehicle pose.
pub fn compose_covariance(vehicle: &Covariance3, road: &Covariance3) -> Covariance3 {
    Covariance3::new(
        vehicle.var_x + road.var_x,
        vehicle.var_y + road.var_y,
        vehicle.var_yaw + road.var_yaw,
    )
}

/// Scaled unscented-transform constants and the derived weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtParams {
    pub dim: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub lambda: f64,
    /// Weight of the mean sigma point.
    pub w0: f64,
    /// Weight shared by every other sigma point.
    pub wi: f64,
}

impl UtParams {
    /// Number of sigma points, `2 * dim + 1`.
    pub fn num_points(&self) -> usize {
        2 * self.dim + 1
    }

    /// `dim + lambda`, evaluated as `alpha^2 (dim + kappa)` to avoid the
    /// cancellation in `dim + lambda` for small alpha.
    pub fn scale(&self) -> f64 {
        self.alpha * self.alpha * (self.dim as f64 + self.kappa)
    }

    /// `sqrt(dim + lambda)`, the spread factor applied to each standard deviation.
    pub fn spread(&self) -> f64 {
        self.scale().sqrt()
    }
}

impl Default for UtParams {
    fn default() -> Self {
        derive_ut_params(3, 1e-3, 0.0).expect("default unscented parameters are valid")
    }
}

/// Computes `lambda = alpha^2 (dim + kappa) - dim` and the weights
/// `w0 = lambda / (dim + lambda)`, `wi = 1 / (2 (dim + lambda))`.
pub fn derive_ut_params(dim: usize, alpha: f64, kappa: f64) -> Result<UtParams> {
    if dim == 0 {
        return Err(Error::ConfigInvalid("unscented dimension must be at least 1".into()));
    }
    if !alpha.is_finite() || !kappa.is_finite() {
        return Err(Error::ConfigInvalid("unscented alpha/kappa must be finite".into()));
    }
    let n = dim as f64;
    let scale = alpha * alpha * (n + kappa);
    let lambda = scale - n;
    if !(scale > 0.0) {
        return Err(Error::DegenerateScaling(scale));
    }
    Ok(UtParams {
        dim,
        alpha,
        kappa,
        lambda,
        w0: lambda / scale,
        wi: 1.0 / (2.0 * scale),
    })
}

/// `2 * dim + 1` poses; index 0 is the mean, followed by `+`/`-` pairs along
/// x, y, and yaw.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaPointSet {
    pub points: Vec<Pose>,
}

impl SigmaPointSet {
    pub fn mean(&self) -> &Pose {
        &self.points[0]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Weighted sample mean, accumulated as offsets from point 0 so the
    /// yaw wrap at ±π does not corrupt it.
    pub fn weighted_mean(&self, params: &UtParams) -> Pose {
        let origin = self.points[0];
        let (mut dx, mut dy, mut dyaw) = (0.0, 0.0, 0.0);
        for p in &self.points[1..] {
            dx += p.x - origin.x;
            dy += p.y - origin.y;
            dyaw += normalize_angle(p.yaw - origin.yaw);
        }
        Pose::new(
            origin.x + params.wi * dx,
            origin.y + params.wi * dy,
            origin.yaw + params.wi * dyaw,
        )
    }
}

pub fn generate_sigma_points(
    mean: &Pose,
    cov: &Covariance3,
    params: &UtParams,
) -> Result<SigmaPointSet> {
    cov.validate()?;
    if params.dim != 3 {
        return Err(Error::ConfigInvalid(format!(
            "pose sigma points need dim = 3, got {}",
            params.dim
        )));
    }
    let scale = params.scale();
    if !(scale > 0.0) {
        return Err(Error::DegenerateScaling(scale));
    }
    let spread = scale.sqrt();
    let [sx, sy, syaw] = cov.std_devs().map(|s| s * spread);

    let mut points = Vec::with_capacity(params.num_points());
    points.push(*mean);
    for (ox, oy, oyaw) in [(sx, 0.0, 0.0), (0.0, sy, 0.0), (0.0, 0.0, syaw)] {
        points.push(Pose::new(mean.x + ox, mean.y + oy, mean.yaw + oyaw));
        points.push(Pose::new(mean.x - ox, mean.y - oy, mean.yaw - oyaw));
    }
    Ok(SigmaPointSet { points })
}

/// Unscented combination of per-sigma-point steering angles, clamped to
/// `±steering_limit`.
///
/// Evaluated as `δ0 + wi * Σ(δi - δ0)`, which equals `w0 δ0 + wi Σ δi`
/// whenever `w0 + 2 dim wi = 1`. With small alpha the weights are of order
/// 1e6 and opposite in sign, so the direct sum would lose about ten digits
/// to cancellation.
pub fn weighted_steering(deltas: &[f64], params: &UtParams, steering_limit: f64) -> Result<f64> {
    if deltas.len() != params.num_points() {
        return Err(Error::ConfigInvalid(format!(
            "expected {} steering angles, got {}",
            params.num_points(),
            deltas.len()
        )));
    }
    if deltas.iter().any(|d| !d.is_finite()) {
        return Err(Error::ConfigInvalid("steering angles must be finite".into()));
    }
    let center = deltas[0];
    let spread: f64 = deltas[1..].iter().map(|d| d - center).sum();
    let combined = center + params.wi * spread;
    Ok(combined.clamp(-steering_limit, steering_limit))
}
