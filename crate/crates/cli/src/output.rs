//! CSV logs, run summaries and SVG plots.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use utpp::sim::{BatchAggregate, RunSummary, TrajectoryRecord};
use utpp::{Point2, RoadModel};

use crate::CliError;

pub const CSV_HEADER: &str =
    "step,time,x_true,y_true,psi_true,x_meas,y_meas,psi_meas,y_e,delta,lat_err,fault";

pub const SUMMARY_HEADER: &str =
    "controller,seed,stream,convergence_time,mean_abs_lateral_error,max_abs_delta,fault_count";

pub const AGGREGATE_HEADER: &str = "controller,n_runs,converged_runs,mean_convergence_time,\
median_convergence_time,mean_abs_lateral_error,total_faults";

/// 9 significant digits.
fn num(v: f64) -> String {
    format!("{v:.8e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn require_records(records: &[TrajectoryRecord]) -> Result<(), CliError> {
    if records.is_empty() {
        return Err(CliError::Config("no trajectory records to write".into()));
    }
    Ok(())
}

pub fn csv_string(records: &[TrajectoryRecord]) -> String {
    let mut out = String::with_capacity(160 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let fields = [
            r.true_pose.x,
            r.true_pose.y,
            r.true_pose.yaw,
            r.measured_pose.x,
            r.measured_pose.y,
            r.measured_pose.yaw,
            r.y_e,
            r.delta,
            r.lateral_error,
        ];
        let _ = write!(out, "{},{}", r.step, num(r.time));
        for v in fields {
            out.push(',');
            out.push_str(&num(v));
        }
        out.push(',');
        out.push_str(r.fault.map_or("", |f| f.tag()));
        out.push('\n');
    }
    out
}

pub fn emit_csv(records: &[TrajectoryRecord], path: &Path) -> Result<(), CliError> {
    require_records(records)?;
    write_file(path, &csv_string(records))
}

fn summary_row(s: &RunSummary) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        s.controller,
        s.seed,
        s.stream,
        opt_num(s.convergence_time),
        num(s.mean_abs_lateral_error),
        num(s.max_abs_delta),
        s.fault_count
    )
}

pub fn summaries_csv(summaries: &[RunSummary]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for s in summaries {
        out.push_str(&summary_row(s));
        out.push('\n');
    }
    out
}

pub fn emit_summaries(summaries: &[RunSummary], path: &Path) -> Result<(), CliError> {
    write_file(path, &summaries_csv(summaries))
}

pub fn aggregates_csv(aggregates: &[BatchAggregate]) -> String {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for a in aggregates {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            a.controller,
            a.n_runs,
            a.converged_runs,
            opt_num(a.mean_convergence_time),
            opt_num(a.median_convergence_time),
            num(a.mean_abs_lateral_error),
            a.total_faults
        );
    }
    out
}

pub fn emit_aggregates(aggregates: &[BatchAggregate], path: &Path) -> Result<(), CliError> {
    write_file(path, &aggregates_csv(aggregates))
}

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 360.0;
const MARGIN: f64 = 20.0;
const CIRCLE_SEGMENTS: usize = 360;

/// Maps a data rectangle into a panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelFrame {
    left: f64,
    top: f64,
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
}

impl PanelFrame {
    fn new(left: f64, (min, max): (Point2, Point2), equal_aspect: bool) -> Self {
        let w = PANEL_W - 2.0 * MARGIN;
        let h = PANEL_H - 2.0 * MARGIN;
        let span = |lo: f64, hi: f64| if hi - lo > 1e-12 { hi - lo } else { 1.0 };
        let (dx, dy) = (span(min.x, max.x), span(min.y, max.y));
        let (mut sx, mut sy) = (w / dx, h / dy);
        if equal_aspect {
            sx = sx.min(sy);
            sy = sx;
        }
        // Center the data in the panel.
        let x0 = min.x - (w / sx - dx) / 2.0;
        let y0 = min.y - (h / sy - dy) / 2.0;
        Self {
            left: left + MARGIN,
            top: MARGIN,
            x0,
            y0,
            sx,
            sy,
        }
    }

    /// SVG coordinates of a data point.
    pub fn map(&self, p: Point2) -> Point2 {
        Point2::new(
            self.left + (p.x - self.x0) * self.sx,
            self.top + PANEL_H - 2.0 * MARGIN - (p.y - self.y0) * self.sy,
        )
    }
}

fn bounds(points: impl IntoIterator<Item = Point2>) -> (Point2, Point2) {
    let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points.into_iter().filter(Point2::is_finite) {
        min = Point2::new(min.x.min(p.x), min.y.min(p.y));
        max = Point2::new(max.x.max(p.x), max.y.max(p.y));
    }
    if !min.is_finite() {
        return (Point2::default(), Point2::new(1.0, 1.0));
    }
    (min, max)
}

/// Reference road as a sampled polyline, limited to `x_range` for lines.
fn road_points(road: &RoadModel, x_range: (f64, f64)) -> Vec<Point2> {
    match road {
        RoadModel::Line(l) => vec![
            Point2::new(x_range.0, l.y_at(x_range.0)),
            Point2::new(x_range.1, l.y_at(x_range.1)),
        ],
        RoadModel::Circle(c) => (0..=CIRCLE_SEGMENTS)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / CIRCLE_SEGMENTS as f64;
                Point2::new(c.center_x + c.radius * a.cos(), c.center_y + c.radius * a.sin())
            })
            .collect(),
        RoadModel::Waypoints(w) => w.path.points().to_vec(),
    }
}

fn polyline(out: &mut String, id: &str, style: &str, frame: &PanelFrame, pts: &[Point2]) {
    let _ = write!(out, "<polyline id=\"{id}\" {style} points=\"");
    for (i, p) in pts.iter().enumerate() {
        let q = frame.map(*p);
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.3},{:.3}", q.x, q.y);
    }
    out.push_str("\"/>\n");
}

fn panel_border(out: &mut String, left: f64) {
    let (l, t) = (left + MARGIN, MARGIN);
    let (r, b) = (left + PANEL_W - MARGIN, PANEL_H - MARGIN);
    let _ = writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"#000\" stroke-width=\"1\" \
         points=\"{l:.3},{t:.3} {r:.3},{t:.3} {r:.3},{b:.3} {l:.3},{b:.3} {l:.3},{t:.3}\"/>"
    );
}

/// Frames used by [`svg_string`] for the path and steering panels.
pub fn svg_frames(records: &[TrajectoryRecord], road: &RoadModel) -> (PanelFrame, PanelFrame) {
    let (tmin, tmax) = path_bounds(records);
    let road_pts = road_points(road, (tmin.x, tmax.x));
    let path = PanelFrame::new(
        0.0,
        bounds(
            records
                .iter()
                .flat_map(|r| [r.true_pose.position(), r.measured_pose.position()])
                .chain(road_pts),
        ),
        true,
    );
    let (dmin, dmax) = bounds(records.iter().map(|r| Point2::new(r.time, r.delta)));
    // Keep zero steering in view.
    let steer = PanelFrame::new(
        PANEL_W,
        (Point2::new(dmin.x, dmin.y.min(0.0)), Point2::new(dmax.x, dmax.y.max(0.0))),
        false,
    );
    (path, steer)
}

fn path_bounds(records: &[TrajectoryRecord]) -> (Point2, Point2) {
    bounds(
        records
            .iter()
            .flat_map(|r| [r.true_pose.position(), r.measured_pose.position()]),
    )
}

/// Two panels side by side: the path in the plane over the reference road,
/// and the steering angle against time.
pub fn svg_string(records: &[TrajectoryRecord], road: &RoadModel) -> String {
    let (path, steer) = svg_frames(records, road);
    let (tmin, tmax) = path_bounds(records);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = 2.0 * PANEL_W,
        h = PANEL_H
    );
    out.push_str("<title>path (x, y) over the reference road; steering angle vs time</title>\n");

    panel_border(&mut out, 0.0);
    polyline(
        &mut out,
        "road",
        "fill=\"none\" stroke=\"#888\" stroke-width=\"2\" stroke-dasharray=\"6,4\"",
        &path,
        &road_points(road, (tmin.x, tmax.x)),
    );
    let measured: Vec<Point2> = records.iter().map(|r| r.measured_pose.position()).collect();
    polyline(
        &mut out,
        "measured-path",
        "fill=\"none\" stroke=\"#e69f00\" stroke-width=\"0.8\"",
        &path,
        &measured,
    );
    let truth: Vec<Point2> = records.iter().map(|r| r.true_pose.position()).collect();
    polyline(
        &mut out,
        "true-path",
        "fill=\"none\" stroke=\"#0072b2\" stroke-width=\"1.5\"",
        &path,
        &truth,
    );

    panel_border(&mut out, PANEL_W);
    if let (Some(first), Some(last)) = (records.first(), records.last()) {
        polyline(
            &mut out,
            "zero-steering",
            "fill=\"none\" stroke=\"#888\" stroke-width=\"1\"",
            &steer,
            &[Point2::new(first.time, 0.0), Point2::new(last.time, 0.0)],
        );
    }
    let delta: Vec<Point2> = records.iter().map(|r| Point2::new(r.time, r.delta)).collect();
    polyline(
        &mut out,
        "delta",
        "fill=\"none\" stroke=\"#d55e00\" stroke-width=\"1.5\"",
        &steer,
        &delta,
    );
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg(records: &[TrajectoryRecord], road: &RoadModel, path: &Path) -> Result<(), CliError> {
    require_records(records)?;
    write_file(path, &svg_string(records, road))
}

#[cfg(test)]
mod tests {
    use super::*;
    use utpp::sim::Fault;
    use utpp::{Circle, Pose, StraightLine};

    fn record(step: usize) -> TrajectoryRecord {
        TrajectoryRecord {
            step,
            time: step as f64 * 0.1,
            true_pose: Pose::new(step as f64 * 0.1, 0.5, 0.0),
            measured_pose: Pose::new(step as f64 * 0.1, 0.45, 0.01),
            y_e: -0.5,
            delta: -std::f64::consts::FRAC_PI_4,
            lateral_error: 0.5,
            fault: None,
        }
    }

    #[test]
    fn one_record_two_lines() {
        let csv = csv_string(&[record(0)]);
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().next(), Some(CSV_HEADER));
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "0,0.00000000e0,0.00000000e0,5.00000000e-1,0.00000000e0,0.00000000e0,\
             4.50000000e-1,1.00000000e-2,-5.00000000e-1,-7.85398163e-1,5.00000000e-1,"
        );
    }

    #[test]
    fn fault_rows() {
        let mut r = record(3);
        r.y_e = f64::NAN;
        r.fault = Some(Fault::PathOutOfReach);
        let csv = csv_string(&[r]);
        let row = csv.lines().nth(1).unwrap();
        assert!(row.ends_with(",NaN,-7.85398163e-1,5.00000000e-1,path_out_of_reach"), "{row}");
    }

    #[test]
    fn empty_records_rejected() {
        let dir = std::env::temp_dir();
        assert!(emit_csv(&[], &dir.join("never.csv")).is_err());
    }

    #[test]
    fn svg_draws_road() {
        let recs: Vec<_> = (0..5).map(record).collect();
        let line = svg_string(&recs, &RoadModel::Line(StraightLine::new(0.0, 0.0)));
        assert!(line.contains("id=\"road\""));
        let circle = svg_string(&recs, &RoadModel::Circle(Circle::new(0.0, 5.0, 5.0)));
        let road = circle.lines().find(|l| l.contains("id=\"road\"")).unwrap();
        let n = road.split("points=\"").nth(1).unwrap().split(' ').count();
        assert_eq!(n, CIRCLE_SEGMENTS + 1);
        for doc in [&line, &circle] {
            assert!(!doc.contains("NaN") && !doc.contains("inf"));
        }
    }

    #[test]
    fn frame_keeps_aspect() {
        let f = PanelFrame::new(0.0, (Point2::new(0.0, 0.0), Point2::new(10.0, 1.0)), true);
        let a = f.map(Point2::new(0.0, 0.0));
        let b = f.map(Point2::new(1.0, 1.0));
        assert!(((b.x - a.x) + (b.y - a.y)).abs() < 1e-9);
    }
}
