//! Kinematic bicycle plant and the noisy pose measurement fed to the
//! controller.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{vehicle_to_global, Point2, Pose};
use crate::road::RoadModel;
use crate::uncertainty::Covariance3;

/// Name of the pseudo-random generator used for pose noise, recorded in run
/// metadata.
pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed), stream = run index";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub true_pose: Pose,
    pub measured_pose: Pose,
    pub speed: f64,
    pub wheelbase: f64,
}

/// Advances the rear-axle pose by one update period.
///
/// The vehicle turns by `beta = v T tan(delta) / L` about its instantaneous
/// center of rotation. The body-frame displacement `v T (cos beta, sin beta)`
/// is mapped to the global frame with the heading held before the update.
pub fn advance_pose(pose: &Pose, delta: f64, speed: f64, dt: f64, wheelbase: f64) -> Pose {
    let travel = speed * dt;
    let beta = travel / wheelbase * delta.tan();
    let step = Point2::new(travel * beta.cos(), travel * beta.sin());
    let position = vehicle_to_global(step, pose);
    Pose::new(position.x, position.y, pose.yaw + beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub cov: Covariance3,
    /// Largest lateral deviation a measured pose may have from the road.
    pub max_lateral_dev: f64,
    pub rng_seed: u64,
    /// ChaCha stream; batch runs use the run index.
    pub stream: u64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        self.cov.validate()?;
        if !(self.max_lateral_dev > 0.0) {
            return Err(Error::ConfigInvalid(format!(
                "max_lateral_dev must be positive, got {}",
                self.max_lateral_dev
            )));
        }
        Ok(())
    }
}

/// Draws noisy poses around a true pose. Owns its generator, so identical
/// models yield identical sequences.
#[derive(Debug, Clone)]
pub struct PoseSampler {
    model: NoiseModel,
    std: [f64; 3],
    rng: ChaCha8Rng,
}

impl PoseSampler {
    pub fn new(model: NoiseModel) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(model.rng_seed);
        rng.set_stream(model.stream);
        Self {
            model,
            std: model.cov.std_devs(),
            rng,
        }
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    /// Independent Gaussian draw per axis, without the lateral clamp.
    pub fn draw(&mut self, mean: &Pose) -> Pose {
        let zx: f64 = self.rng.sample(StandardNormal);
        let zy: f64 = self.rng.sample(StandardNormal);
        let zyaw: f64 = self.rng.sample(StandardNormal);
        Pose::new(
            mean.x + self.std[0] * zx,
            mean.y + self.std[1] * zy,
            mean.yaw + self.std[2] * zyaw,
        )
    }

    /// Gaussian draw around `true_pose` whose lateral deviation from `road`
    /// is then limited to `max_lateral_dev`, or to the true pose's own
    /// deviation when that is larger. Yaw is not clamped.
    pub fn sample_measured_pose(&mut self, true_pose: &Pose, road: &RoadModel) -> Pose {
        let drawn = self.draw(true_pose);
        let bound = road
            .lateral_offset(true_pose.position())
            .abs()
            .max(self.model.max_lateral_dev);
        let p = road.clamp_lateral(drawn.position(), bound);
        Pose::new(p.x, p.y, drawn.yaw)
    }
}
