use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The road line is perpendicular to the vehicle x-axis, so it has no
    /// slope-intercept form in the vehicle frame.
    #[error("road line is perpendicular to the vehicle heading")]
    PerpendicularLine,
    #[error("road line lies beyond the look-ahead distance")]
    PathOutOfReach,
    #[error("look-ahead circle does not intersect the road circle")]
    NoIntersection,
    #[error("all intersections with the road lie behind the vehicle")]
    NoForwardIntersection,
    #[error("vehicle is located at the road circle center")]
    DegenerateCenter,
    #[error("degenerate unscented scaling: dim + lambda = {0} must be positive")]
    DegenerateScaling(f64),
    #[error("speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
    #[error("waypoint path needs at least 3 points, got {0}")]
    TooFewWaypoints(usize),
    #[error("curvature needs three pairwise distinct points")]
    CoincidentPoints,
    #[error("invalid waypoint path: {0}")]
    InvalidWaypoints(String),
    #[error("road line is too steep for slope-intercept form (slope {0})")]
    SteepLine(f64),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}
