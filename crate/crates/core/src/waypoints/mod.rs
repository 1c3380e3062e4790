//! Waypoint roads: nearest-waypoint lookup and reduction of the path around
//! the look-ahead point to a local circle or straight line.

mod kdtree;

use std::str::FromStr;

pub use kdtree::KdTree;

use crate::error::{Error, Result};
use crate::geometry::{Circle, Point2, Pose, StraightLine};

/// Minimum spacing between consecutive waypoints, meters.
pub const MIN_SPACING: f64 = 1e-9;

/// Curvature below which the local road is treated as straight, 1/m.
pub const DEFAULT_STRAIGHT_EPS: f64 = 1e-3;

/// Ordered waypoints in the global frame, in travel direction.
#[derive(Debug, Clone, PartialEq)]
pub struct WaypointPath {
    points: Vec<Point2>,
}

impl WaypointPath {
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::TooFewWaypoints(points.len()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidWaypoints(format!("waypoint {i} is not finite")));
        }
        for (i, pair) in points.windows(2).enumerate() {
            if pair[0].distance(&pair[1]) <= MIN_SPACING {
                return Err(Error::InvalidWaypoints(format!(
                    "waypoints {} and {} coincide",
                    i,
                    i + 1
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Closest point on the polyline to `p`, with the unit normal pointing to
    /// the left of the travel direction and the signed offset of `p` along it.
    pub fn project(&self, p: Point2) -> PolylineProjection {
        let mut best: Option<(f64, PolylineProjection)> = None;
        for seg in self.points.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len2 = dx * dx + dy * dy;
            let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
            let foot = Point2::new(a.x + t * dx, a.y + t * dy);
            let d2 = foot.distance_squared(&p);
            if best.as_ref().is_none_or(|(bd, _)| d2 < *bd) {
                let len = len2.sqrt();
                let normal = Point2::new(-dy / len, dx / len);
                let offset = (p.x - foot.x) * normal.x + (p.y - foot.y) * normal.y;
                best = Some((d2, PolylineProjection { foot, normal, offset }));
            }
        }
        best.expect("a valid path has at least one segment").1
    }
}

impl FromStr for WaypointPath {
    type Err = Error;

    /// Parses one `x,y` pair per line. Blank lines and `#` comments are
    /// skipped.
    fn from_str(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| Error::InvalidWaypoints(format!("line {}: {msg}", lineno + 1));
            let mut fields = line.split(',');
            let (Some(xs), Some(ys), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(bad("expected exactly two comma-separated values"));
            };
            let x: f64 = xs.trim().parse().map_err(|_| bad("x is not a number"))?;
            let y: f64 = ys.trim().parse().map_err(|_| bad("y is not a number"))?;
            if !x.is_finite() || !y.is_finite() {
                return Err(bad("coordinates must be finite"));
            }
            points.push(Point2::new(x, y));
        }
        WaypointPath::new(points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylineProjection {
    pub foot: Point2,
    pub normal: Point2,
    pub offset: f64,
}

/// Road geometry around the look-ahead waypoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalRoad {
    Circle(Circle),
    Line(StraightLine),
}

/// Exact nearest-waypoint lookup.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    tree: KdTree,
}

impl SpatialIndex {
    pub fn nearest(&self, query: Point2) -> usize {
        self.tree.nearest(query).expect("index is never empty")
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }
}

pub fn build_index(path: &WaypointPath) -> Result<SpatialIndex> {
    if path.len() < 3 {
        return Err(Error::TooFewWaypoints(path.len()));
    }
    Ok(SpatialIndex {
        tree: KdTree::new(path.points()),
    })
}

/// Nearest waypoint to the point `d_l` ahead of the rear axle, kept one step
/// away from either end so it always has a predecessor and a successor.
pub fn select_lookahead_waypoint(index: &SpatialIndex, pose: &Pose, d_l: f64) -> Result<usize> {
    let n = index.len();
    if n < 3 {
        return Err(Error::TooFewWaypoints(n));
    }
    let heading = pose.heading();
    let probe = Point2::new(pose.x + d_l * heading.x, pose.y + d_l * heading.y);
    Ok(index.nearest(probe).clamp(1, n - 2))
}

/// Signed Menger curvature: positive when `a -> b -> c` turns left.
pub fn menger_curvature(a: Point2, b: Point2, c: Point2) -> Result<f64> {
    let ab = a.distance(&b);
    let bc = b.distance(&c);
    let ca = c.distance(&a);
    if ab == 0.0 || bc == 0.0 || ca == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    // 4 * area = 2 * cross
    Ok(2.0 * cross / (ab * bc * ca))
}

/// Center of the circle through three non-collinear points.
pub fn circumcenter(a: Point2, b: Point2, c: Point2) -> Option<Point2> {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    if d == 0.0 {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Some(Point2::new(
        a.x + (cy * b2 - by * c2) / d,
        a.y + (bx * c2 - cx * b2) / d,
    ))
}

/// Ordinary least-squares fit `y = m x + c`.
fn fit_line(points: &[Point2]) -> Result<StraightLine> {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.x).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for p in points {
        sxx += (p.x - mean_x) * (p.x - mean_x);
        sxy += (p.x - mean_x) * (p.y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::SteepLine(f64::INFINITY));
    }
    let line = StraightLine::new(sxy / sxx, mean_y - sxy / sxx * mean_x);
    line.validate()?;
    Ok(line)
}

pub fn reduce_to_local_road(
    path: &WaypointPath,
    index: &SpatialIndex,
    pose: &Pose,
    d_l: f64,
    straight_eps: f64,
) -> Result<LocalRoad> {
    let i = select_lookahead_waypoint(index, pose, d_l)?;
    let pts = path.points();
    let (a, b, c) = (pts[i - 1], pts[i], pts[i + 1]);
    let kappa = menger_curvature(a, b, c)?;
    if kappa.abs() < straight_eps {
        return fit_line(&[a, b, c]).map(LocalRoad::Line);
    }
    let center = circumcenter(a, b, c).ok_or(Error::CoincidentPoints)?;
    Ok(LocalRoad::Circle(Circle::new(center.x, center.y, 1.0 / kappa.abs())))
}
