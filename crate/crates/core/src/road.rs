//! Reference roads in the global frame.

use std::sync::Arc;

use crate::error::Result;
use crate::geometry::{Circle, Point2, Pose, StraightLine};
use crate::waypoints::{self, LocalRoad, SpatialIndex, WaypointPath};

/// A waypoint path together with its lookup index and the curvature below
/// which the local road is treated as straight.
#[derive(Debug, Clone)]
pub struct WaypointRoad {
    pub path: WaypointPath,
    pub index: SpatialIndex,
    pub straight_eps: f64,
}

impl WaypointRoad {
    pub fn new(path: WaypointPath, straight_eps: f64) -> Result<Self> {
        let index = waypoints::build_index(&path)?;
        Ok(Self {
            path,
            index,
            straight_eps,
        })
    }
}

#[derive(Debug, Clone)]
pub enum RoadModel {
    Line(StraightLine),
    Circle(Circle),
    Waypoints(Arc<WaypointRoad>),
}

impl RoadModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            RoadModel::Line(l) => l.validate(),
            RoadModel::Circle(c) => c.validate(),
            RoadModel::Waypoints(_) => Ok(()),
        }
    }

    /// Signed lateral deviation of `p` from the road. Lines: perpendicular
    /// distance, positive to the left. Circles: distance to the center minus
    /// the radius. Waypoints: offset from the polyline, positive to the left
    /// of the travel direction.
    pub fn lateral_offset(&self, p: Point2) -> f64 {
        match self {
            RoadModel::Line(l) => l.signed_distance(p),
            RoadModel::Circle(c) => c.radial_offset(p),
            RoadModel::Waypoints(w) => w.path.project(p).offset,
        }
    }

    /// Moves `p` along the lateral direction so that its deviation from the
    /// road is at most `max_dev`.
    pub fn clamp_lateral(&self, p: Point2, max_dev: f64) -> Point2 {
        match self {
            RoadModel::Line(l) => {
                let dev = l.signed_distance(p);
                if dev.abs() <= max_dev {
                    return p;
                }
                let n = l.unit_normal();
                let foot = Point2::new(p.x - dev * n.x, p.y - dev * n.y);
                let bound = max_dev.copysign(dev);
                Point2::new(foot.x + bound * n.x, foot.y + bound * n.y)
            }
            RoadModel::Circle(c) => {
                let center = c.center();
                let r = p.distance(&center);
                let dev = r - c.radius;
                if dev.abs() <= max_dev || r == 0.0 {
                    return p;
                }
                let target = (c.radius + max_dev.copysign(dev)).max(0.0);
                let scale = target / r;
                Point2::new(
                    center.x + (p.x - center.x) * scale,
                    center.y + (p.y - center.y) * scale,
                )
            }
            RoadModel::Waypoints(w) => {
                let proj = w.path.project(p);
                if proj.offset.abs() <= max_dev {
                    return p;
                }
                let bound = max_dev.copysign(proj.offset);
                Point2::new(
                    proj.foot.x + bound * proj.normal.x,
                    proj.foot.y + bound * proj.normal.y,
                )
            }
        }
    }

    /// Road geometry the pursuit law tracks from `pose`. Lines and circles
    /// are returned as-is; waypoint paths are reduced around the look-ahead
    /// waypoint.
    pub fn local_road(&self, pose: &Pose, d_l: f64) -> Result<LocalRoad> {
        match self {
            RoadModel::Line(l) => Ok(LocalRoad::Line(*l)),
            RoadModel::Circle(c) => Ok(LocalRoad::Circle(*c)),
            RoadModel::Waypoints(w) => {
                waypoints::reduce_to_local_road(&w.path, &w.index, pose, d_l, w.straight_eps)
            }
        }
    }
}
