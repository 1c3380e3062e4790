//! Pure-pursuit cross-track error and steering for a road already expressed
//! in a vehicle frame.

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Circle, StraightLine};

/// Slopes below this magnitude use the horizontal-line branch.
const FLAT_SLOPE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PursuitConfig {
    /// Wheelbase, meters.
    pub wheelbase: f64,
    /// Look-ahead gain, seconds. The look-ahead distance is `gain * speed`.
    pub lookahead_gain: f64,
    /// Symmetric steering clamp, radians.
    pub steering_limit: f64,
}

impl PursuitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.wheelbase > 0.0 && self.wheelbase.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "wheelbase must be positive, got {}",
                self.wheelbase
            )));
        }
        if !(self.lookahead_gain > 0.0 && self.lookahead_gain.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "lookahead_gain must be positive, got {}",
                self.lookahead_gain
            )));
        }
        if !(self.steering_limit > 0.0 && self.steering_limit < std::f64::consts::FRAC_PI_2) {
            return Err(Error::ConfigInvalid(format!(
                "steering_limit must lie in (0, pi/2), got {}",
                self.steering_limit
            )));
        }
        Ok(())
    }
}

/// Look-ahead point in the vehicle frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTrack {
    /// Lateral offset (the cross-track error).
    pub y_e: f64,
    /// Longitudinal offset.
    pub x_e: f64,
}

pub fn lookahead_distance(speed: f64, cfg: &PursuitConfig) -> Result<f64> {
    if !(speed > 0.0) {
        return Err(Error::NonPositiveSpeed(speed));
    }
    Ok(cfg.lookahead_gain * speed)
}

/// Intersects the look-ahead circle of radius `d_l` with a vehicle-frame
/// line and returns the forward intersection.
pub fn cross_track_line(line: &StraightLine, d_l: f64) -> Result<CrossTrack> {
    let m = line.slope;
    let c = line.intercept;
    if m.abs() < FLAT_SLOPE_EPS {
        let radicand = d_l * d_l - c * c;
        if radicand < 0.0 {
            return Err(Error::PathOutOfReach);
        }
        return Ok(CrossTrack {
            y_e: c,
            x_e: radicand.sqrt(),
        });
    }
    let one_plus_m2 = 1.0 + m * m;
    let discriminant = one_plus_m2 * d_l * d_l - c * c;
    if discriminant < 0.0 {
        return Err(Error::PathOutOfReach);
    }
    let root = discriminant.sqrt();
    let y_e = (c + m * root) / one_plus_m2;
    // (y_e - c) / m reduces to (root - m c) / (1 + m^2), which avoids
    // dividing by a tiny slope. This is the forward-most root; if it is
    // behind the axle, so is the other one.
    let x_e = (root - m * c) / one_plus_m2;
    if x_e < 0.0 {
        return Err(Error::NoForwardIntersection);
    }
    Ok(CrossTrack { y_e, x_e })
}

/// Intersects the look-ahead circle with a vehicle-frame road circle and
/// picks the intersection that needs the smallest heading change.
pub fn cross_track_circle(circle: &Circle, d_l: f64) -> Result<CrossTrack> {
    let (xc, yc) = (circle.center_x, circle.center_y);
    let center_dist = xc.hypot(yc);
    if center_dist == 0.0 {
        return Err(Error::DegenerateCenter);
    }
    let cos_alpha1 = (center_dist * center_dist + d_l * d_l - circle.radius * circle.radius)
        / (2.0 * d_l * center_dist);
    if !(-1.0..=1.0).contains(&cos_alpha1) {
        return Err(Error::NoIntersection);
    }
    let alpha1 = cos_alpha1.acos();
    let alpha2 = yc.atan2(xc);

    let plus = normalize_angle(alpha2 + alpha1);
    let minus = normalize_angle(alpha2 - alpha1);
    let alpha_min = if plus.abs() < minus.abs() {
        plus
    } else if minus.abs() < plus.abs() {
        minus
    } else {
        if alpha1 != 0.0 {
            log::debug!("look-ahead candidates tie at |alpha| = {}; taking the positive one", plus.abs());
        }
        plus.max(minus)
    };

    let x_e = d_l * alpha_min.cos();
    if x_e < 0.0 {
        return Err(Error::NoForwardIntersection);
    }
    Ok(CrossTrack {
        y_e: d_l * alpha_min.sin(),
        x_e,
    })
}

/// Curvature-radius form of the pursuit arc, `d_l^2 / (2 y_e)`. Infinite for
/// `y_e = 0`.
pub fn turning_radius(y_e: f64, d_l: f64) -> f64 {
    d_l * d_l / (2.0 * y_e)
}

/// Steering angle of the pursuit arc before clamping.
pub fn raw_steering_angle(y_e: f64, d_l: f64, wheelbase: f64) -> f64 {
    (2.0 * y_e * wheelbase / (d_l * d_l)).atan()
}

pub fn steering_angle(y_e: f64, d_l: f64, cfg: &PursuitConfig) -> f64 {
    raw_steering_angle(y_e, d_l, cfg.wheelbase).clamp(-cfg.steering_limit, cfg.steering_limit)
}
