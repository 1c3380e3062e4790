//! Pure-pursuit path tracking under Gaussian pose uncertainty.
//!
//! The unscented variant evaluates the pursuit law at the sigma points of
//! the pose distribution and combines the resulting steering angles with the
//! unscented weights. The conventional controller evaluates it once at the
//! measured pose.

pub mod error;
pub mod geometry;
pub mod pursuit;
pub mod road;
pub mod sim;
pub mod uncertainty;
pub mod vehicle;
pub mod waypoints;

pub use error::{Error, Result};
pub use geometry::{Circle, Point2, Pose, StraightLine};
pub use pursuit::{CrossTrack, PursuitConfig};
pub use road::{RoadModel, WaypointRoad};
pub use sim::{
    run, run_batch, BatchAggregate, BatchResult, Controller, Fault, RunSummary, Scenario,
    TrajectoryRecord,
};
pub use uncertainty::{Covariance3, SigmaPointSet, UtParams};
pub use vehicle::{NoiseModel, VehicleState};
pub use waypoints::{LocalRoad, SpatialIndex, WaypointPath};
