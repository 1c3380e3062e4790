//! Planar rigid-frame transforms between the global frame and a vehicle
//! frame anchored at the rear axle.
//!
//! The vehicle frame has its x-axis along the heading and its y-axis to the
//! left. Roads are kept in the global frame and mapped into the frame of each
//! pose (the measured pose or one of its sigma points) before the pursuit law
//! is evaluated.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this `|cos|` a line counts as perpendicular to the vehicle x-axis.
pub const PERPENDICULAR_COS_EPS: f64 = 1e-9;

/// Largest global slope accepted for a straight road (tan 89.9°).
pub fn max_global_slope() -> f64 {
    89.9_f64.to_radians().tan()
}

/// Wraps an angle into (-π, π].
///
/// Odd-symmetric apart from the ±π boundary, so mirrored geometry yields
/// exactly negated angles.
pub fn normalize_angle(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let wrapped = ((angle.abs() + PI).rem_euclid(2.0 * PI) - PI) * angle.signum();
    if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_squared(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Planar pose of the rear axle in the global frame. Also used for sigma
/// points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Heading, counter-clockwise from the global x-axis, in (-π, π].
    pub yaw: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: normalize_angle(yaw),
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Point2 {
        Point2::new(self.yaw.cos(), self.yaw.sin())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.yaw.is_finite()
    }
}

/// `y = slope * x + intercept`. The frame (global or vehicle) is implied by
/// context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StraightLine {
    pub slope: f64,
    pub intercept: f64,
}

impl StraightLine {
    pub const fn new(slope: f64, intercept: f64) -> Self {
        Self { slope, intercept }
    }

    /// Orientation of the line measured from the x-axis, in (-π/2, π/2).
    pub fn orientation(&self) -> f64 {
        self.slope.atan()
    }

    pub fn y_at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    /// Signed perpendicular distance of `p`; positive on the left of the
    /// line when walking towards increasing x.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        (p.y - self.y_at(p.x)) / (1.0 + self.slope * self.slope).sqrt()
    }

    /// Unit normal pointing to the positive side of [`Self::signed_distance`].
    pub fn unit_normal(&self) -> Point2 {
        let norm = (1.0 + self.slope * self.slope).sqrt();
        Point2::new(-self.slope / norm, 1.0 / norm)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.slope.is_finite() || !self.intercept.is_finite() {
            return Err(Error::ConfigInvalid(format!(
                "straight line has non-finite parameters ({}, {})",
                self.slope, self.intercept
            )));
        }
        if self.slope.abs() >= max_global_slope() {
            return Err(Error::SteepLine(self.slope));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
}

impl Circle {
    pub const fn new(center_x: f64, center_y: f64, radius: f64) -> Self {
        Self {
            center_x,
            center_y,
            radius,
        }
    }

    pub fn center(&self) -> Point2 {
        Point2::new(self.center_x, self.center_y)
    }

    /// Distance from `p` to the circle line; positive outside.
    pub fn radial_offset(&self, p: Point2) -> f64 {
        p.distance(&self.center()) - self.radius
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_x.is_finite() && self.center_y.is_finite() && self.radius.is_finite()) {
            return Err(Error::ConfigInvalid("circle has non-finite parameters".into()));
        }
        if self.radius <= 0.0 {
            return Err(Error::ConfigInvalid(format!(
                "circle radius must be positive, got {}",
                self.radius
            )));
        }
        Ok(())
    }
}

/// Maps a point given in the vehicle frame `frame` to the global frame.
pub fn vehicle_to_global(p: Point2, frame: &Pose) -> Point2 {
    let (sin, cos) = frame.yaw.sin_cos();
    Point2::new(
        cos * p.x - sin * p.y + frame.x,
        sin * p.x + cos * p.y + frame.y,
    )
}

/// Maps a global point into the vehicle frame `frame`.
pub fn global_to_vehicle(p: Point2, frame: &Pose) -> Point2 {
    let (sin, cos) = frame.yaw.sin_cos();
    let dx = p.x - frame.x;
    let dy = p.y - frame.y;
    Point2::new(cos * dx + sin * dy, -sin * dx + cos * dy)
}

/// Re-expresses a global straight line in the vehicle frame `frame`.
///
/// The vehicle-frame slope is `tan(ψ_m - ψ)` with `ψ_m = atan(m)`, and the
/// intercept follows from mapping the global y-intercept point into the
/// vehicle frame and collapsing the result with the angle-sum identities.
pub fn line_to_vehicle(line: &StraightLine, frame: &Pose) -> Result<StraightLine> {
    let orientation = line.orientation();
    let relative = orientation - frame.yaw;
    let cos_rel = relative.cos();
    if cos_rel.abs() < PERPENDICULAR_COS_EPS {
        return Err(Error::PerpendicularLine);
    }
    let slope = relative.sin() / cos_rel;
    let intercept = (frame.x * orientation.sin()
        + (line.intercept - frame.y) * orientation.cos())
        / cos_rel;
    Ok(StraightLine::new(slope, intercept))
}

/// Only the center moves; the radius is frame-invariant.
pub fn circle_to_vehicle(circle: &Circle, frame: &Pose) -> Circle {
    let center = global_to_vehicle(circle.center(), frame);
    Circle::new(center.x, center.y, circle.radius)
}
