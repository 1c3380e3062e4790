//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use utpp::geometry::{circle_to_vehicle, global_to_vehicle, line_to_vehicle, vehicle_to_global};
use utpp::pursuit::{cross_track_circle, cross_track_line, steering_angle};
use utpp::sim::{self, Controller, TrajectoryRecord};
use utpp::uncertainty::{derive_ut_params, generate_sigma_points};
use utpp::waypoints::{build_index, reduce_to_local_road, KdTree, LocalRoad, WaypointPath};
use utpp::{Circle, Point2, Pose, RoadModel, Scenario, StraightLine};
use utpp_cli::{load_scenario, Overrides};

type Outcome = Result<String, String>;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn scenario(cfg: &str, controller: Controller, no_noise: bool) -> Scenario {
    let overrides = Overrides {
        controller: Some(controller),
        no_noise,
        ..Default::default()
    };
    load_scenario(&config(cfg), &overrides).expect("shipped config parses")
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + tag)
}

fn random_pose(r: &mut ChaCha8Rng) -> Pose {
    Pose::new(r.random_range(-50.0..50.0), r.random_range(-50.0..50.0), r.random_range(-PI..PI))
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

/// Angles `t` on `[lo, hi]` where `f` changes sign, by dense sampling and
/// bisection.
fn sampled_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let step = (hi - lo) / samples as f64;
    let (mut a, mut fa) = (lo, f(lo));
    for k in 1..=samples {
        let b = lo + k as f64 * step;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut l, mut r, mut fl) = (a, b, fa);
            for _ in 0..80 {
                let m = 0.5 * (l + r);
                let fm = f(m);
                if fl * fm <= 0.0 {
                    r = m;
                } else {
                    l = m;
                    fl = fm;
                }
            }
            roots.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    roots
}

fn c1_round_trip() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = Point2::new(r.random_range(-50.0..50.0), r.random_range(-50.0..50.0));
        let frame = random_pose(&mut r);
        let back = global_to_vehicle(vehicle_to_global(p, &frame), &frame);
        worst = worst.max((back.x - p.x).abs()).max((back.y - p.y).abs());
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    if worst < 1e-12 {
        Ok(format!("max error {worst:.1e}"))
    } else {
        Err(format!("max error {worst:.1e}"))
    }
}

fn c2_transform_oracles() -> Outcome {
    let mut r = rng(2);
    let mut worst_line: f64 = 0.0;
    let mut n_line = 0;
    while n_line < 1000 {
        let line = StraightLine::new(r.random_range(-5.0..5.0), r.random_range(-10.0..10.0));
        let frame = random_pose(&mut r);
        // Skip frames nearly perpendicular to the line, where the vehicle
        // frame slope is unbounded.
        if (line.orientation() - frame.yaw).cos().abs() < 0.05 {
            continue;
        }
        let local = line_to_vehicle(&line, &frame).map_err(|e| e.to_string())?;
        let x = r.random_range(-20.0..20.0);
        let q = global_to_vehicle(Point2::new(x, line.y_at(x)), &frame);
        let scale = 1.0 + q.x.abs() * (1.0 + local.slope.abs()) + local.intercept.abs();
        worst_line = worst_line.max((q.y - local.y_at(q.x)).abs() / scale);
        n_line += 1;
    }
    let mut worst_circle: f64 = 0.0;
    for _ in 0..1000 {
        let c = Circle::new(r.random_range(-20.0..20.0), r.random_range(-20.0..20.0), r.random_range(0.5..20.0));
        let frame = random_pose(&mut r);
        let local = circle_to_vehicle(&c, &frame);
        let t = r.random_range(-PI..PI);
        let on = Point2::new(c.center_x + c.radius * t.cos(), c.center_y + c.radius * t.sin());
        let q = global_to_vehicle(on, &frame);
        worst_circle = worst_circle.max((q.distance(&local.center()) - local.radius).abs());
    }
    let msg = format!("line residual {worst_line:.1e}, circle residual {worst_circle:.1e}");
    if worst_line < 1e-9 && worst_circle < 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c3_cross_track_oracles() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let d_l = r.random_range(0.5..3.0);
        let line = StraightLine::new(r.random_range(-5.0..5.0), r.random_range(-0.95..0.95) * d_l);
        let ct = cross_track_line(&line, d_l).map_err(|e| format!("line {line:?}: {e}"))?;
        let f = |t: f64| d_l * t.sin() - line.y_at(d_l * t.cos());
        let oracle = sampled_roots(f, -PI / 2.0, PI / 2.0, 20_000)
            .into_iter()
            .map(|t| (d_l * t.cos(), d_l * t.sin()))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .ok_or("oracle found no forward intersection")?;
        worst = worst.max((ct.y_e - oracle.1).abs());
    }
    let mut n_circle = 0;
    while n_circle < 1000 {
        let d_l: f64 = r.random_range(0.5..2.0);
        let dist: f64 = r.random_range(0.3..8.0);
        let bearing = r.random_range(-PI..PI);
        let (lo, hi) = ((dist - d_l).abs(), dist + d_l);
        let radius = lo + r.random_range(0.1..0.9) * (hi - lo);
        let circle = Circle::new(dist * bearing.cos(), dist * bearing.sin(), radius);
        let g = |t: f64| Point2::new(d_l * t.cos(), d_l * t.sin()).distance(&circle.center()) - radius;
        let forward: Vec<f64> = sampled_roots(g, -PI, PI, 20_000)
            .into_iter()
            .filter(|t| t.cos() >= 0.0)
            .collect();
        // In reach means the look-ahead circle crosses the road ahead.
        if forward.is_empty() {
            continue;
        }
        let ct = cross_track_circle(&circle, d_l).map_err(|e| format!("circle {circle:?}: {e}"))?;
        let best = forward.iter().copied().min_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap();
        worst = worst.max((ct.y_e - d_l * best.sin()).abs());
        n_circle += 1;
    }

    // Vehicle on the circle, heading along its tangent.
    let s = scenario("circle.cfg", Controller::PurePursuit, true);
    let RoadModel::Circle(road) = s.road else {
        return Err("circle.cfg is not a circle".into());
    };
    let d_l = s.lookahead().map_err(|e| e.to_string())?;
    let ct = cross_track_circle(&circle_to_vehicle(&road, &s.start_pose), d_l).map_err(|e| e.to_string())?;
    let delta = steering_angle(ct.y_e, d_l, &s.pursuit);
    let y_err = (ct.y_e - d_l * d_l / (2.0 * road.radius)).abs();
    let d_err = (delta - 0.2f64.atan()).abs();
    let msg = format!("max |y_e - oracle| {worst:.1e}; fixed point y_e err {y_err:.1e}, delta err {d_err:.1e}");
    if worst < 1e-6 && y_err < 1e-9 && d_err < 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_ut_weights() -> Outcome {
    let s = scenario("straight.cfg", Controller::UnscentedPurePursuit, false);
    let p = s.ut;
    let oracle = derive_ut_params(3, 1e-3, 0.0).map_err(|e| e.to_string())?;
    if p != oracle {
        return Err(format!("config ut params {p:?} differ from defaults"));
    }
    let sum = p.w0 + 6.0 * p.wi;
    let mut msg = format!("w0 = {:.6}, wi = {:.6}, w0 + 6 wi - 1 = {:.1e}", p.w0, p.wi, sum - 1.0);
    if (sum - 1.0).abs() > 1e-9 || (p.w0 + 999_999.0).abs() > 1e-3 || (p.wi - 166_666.667).abs() > 1e-3 {
        return Err(msg);
    }
    let mut r = rng(4);
    let cov = s.covariance();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mean = random_pose(&mut r);
        let set = generate_sigma_points(&mean, &cov, &p).map_err(|e| e.to_string())?;
        let m = set.weighted_mean(&p);
        let dyaw = utpp::geometry::normalize_angle(m.yaw - mean.yaw);
        worst = worst.max((m.x - mean.x).abs()).max((m.y - mean.y).abs()).max(dyaw.abs());
    }
    msg.push_str(&format!("; mean recovery error {worst:.1e}"));
    if worst < 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c5_degenerate_equivalence() -> Outcome {
    let mut parts = Vec::new();
    for cfg in ["straight.cfg", "circle.cfg"] {
        let pp = scenario(cfg, Controller::PurePursuit, true);
        let ut = scenario(cfg, Controller::UnscentedPurePursuit, true);
        if pp.steps != 300 {
            return Err(format!("{cfg}: {} steps", pp.steps));
        }
        let (a, _) = sim::run(&pp).map_err(|e| e.to_string())?;
        let (b, _) = sim::run(&ut).map_err(|e| e.to_string())?;
        let worst = a
            .iter()
            .zip(&b)
            .map(|(x, y)| {
                (x.true_pose.x - y.true_pose.x)
                    .abs()
                    .max((x.true_pose.y - y.true_pose.y).abs())
                    .max((x.true_pose.yaw - y.true_pose.yaw).abs())
                    .max((x.delta - y.delta).abs())
            })
            .fold(0.0, f64::max);
        if a.len() != b.len() || worst >= 1e-12 {
            return Err(format!("{cfg}: max difference {worst:.1e}"));
        }
        parts.push(format!("{cfg} max diff {worst:.1e}"));
    }
    Ok(parts.join(", "))
}

fn after(records: &[TrajectoryRecord], t: f64) -> impl Iterator<Item = &TrajectoryRecord> {
    records.iter().filter(move |r| r.time > t)
}

fn c6_straight_reproduction() -> Outcome {
    let start = Instant::now();
    let s = scenario("straight.cfg", Controller::PurePursuit, true);
    let (recs, _) = sim::run(&s).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let first = recs[0].delta;
    let worst = after(&recs, 15.0).map(|r| r.true_pose.y.abs()).fold(0.0, f64::max);
    let crossings = recs.windows(2).filter(|w| w[0].true_pose.y * w[1].true_pose.y < 0.0).count();
    let msg = format!(
        "first delta {first:.17} (-pi/4 = {:.17}), max |y| after 15 s {worst:.2e}, {crossings} crossings of y = 0",
        -FRAC_PI_4
    );
    within(elapsed, Duration::from_secs(1))?;
    if (first + FRAC_PI_4).abs() <= f64::EPSILON && worst < 0.02 && crossings >= 1 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_circle_reproduction() -> Outcome {
    let start = Instant::now();
    let s = scenario("circle.cfg", Controller::PurePursuit, true);
    let (recs, _) = sim::run(&s).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let center = Point2::new(0.0, 5.0);
    let tail: Vec<_> = after(&recs, 15.0).collect();
    let radial = tail
        .iter()
        .map(|r| (r.true_pose.position().distance(&center) - 5.0).abs())
        .fold(0.0, f64::max);
    let steer = tail.iter().map(|r| (r.delta - 0.2f64.atan()).abs()).fold(0.0, f64::max);
    let msg = format!("max |dist - 5| {radial:.2e} m, max |delta - atan(0.2)| {steer:.2e} rad");
    within(elapsed, Duration::from_secs(1))?;
    if !tail.is_empty() && radial < 0.05 && steer < 0.01 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c8_convergence_comparison() -> Outcome {
    let start = Instant::now();
    let base_seed = 1;
    let mut medians = Vec::new();
    for controller in [Controller::PurePursuit, Controller::UnscentedPurePursuit] {
        let s = scenario("straight.cfg", controller, false);
        let batch = sim::run_batch(&s, 100, base_seed).map_err(|e| e.to_string())?;
        medians.push(batch.aggregate.median_convergence_time);
    }
    let elapsed = start.elapsed();
    let show = |m: Option<f64>| m.map_or("never".to_string(), |t| format!("{t:.2} s"));
    let msg = format!(
        "median convergence PP {}, UTPP {} (100 paired runs, base seed {base_seed})",
        show(medians[0]),
        show(medians[1])
    );
    within(elapsed, Duration::from_secs(30))?;
    match (medians[0], medians[1]) {
        (Some(pp), Some(ut)) if ut <= 1.1 * pp => Ok(msg),
        (None, _) => Ok(msg),
        _ => Err(msg),
    }
}

fn c9_waypoint_reduction() -> Outcome {
    let n = 72;
    let pts: Vec<Point2> = (0..n)
        .map(|k| {
            let t = -PI / 2.0 + 2.0 * PI * k as f64 / n as f64;
            Point2::new(5.0 * t.cos(), 5.0 + 5.0 * t.sin())
        })
        .collect();
    let path = WaypointPath::new(pts.clone()).map_err(|e| e.to_string())?;
    let index = build_index(&path).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for k in 2..n - 2 {
        let t = -PI / 2.0 + 2.0 * PI * (k as f64 + 0.3) / n as f64;
        let pose = Pose::new(5.0 * t.cos(), 5.0 + 5.0 * t.sin(), t + PI / 2.0);
        match reduce_to_local_road(&path, &index, &pose, 1.0, 1e-3).map_err(|e| e.to_string())? {
            LocalRoad::Circle(c) => {
                worst = worst.max(c.center_x.abs()).max((c.center_y - 5.0).abs()).max((c.radius - 5.0).abs());
            }
            LocalRoad::Line(l) => return Err(format!("reduced to a line {l:?}")),
        }
    }

    let mut r = rng(9);
    let cloud: Vec<Point2> = (0..500)
        .map(|_| Point2::new(r.random_range(-10.0..10.0), r.random_range(-10.0..10.0)))
        .collect();
    let tree = KdTree::new(&cloud);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let q = Point2::new(r.random_range(-12.0..12.0), r.random_range(-12.0..12.0));
        let scan = (0..cloud.len())
            .min_by(|&a, &b| cloud[a].distance_squared(&q).total_cmp(&cloud[b].distance_squared(&q)))
            .unwrap();
        if tree.nearest(q) != Some(scan) {
            mismatches += 1;
        }
    }
    let msg = format!("max circle parameter error {worst:.1e}; k-d tree mismatches {mismatches}/1000");
    if worst < 1e-6 && mismatches == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c10_determinism() -> Outcome {
    let cfg = config("straight.cfg");
    let mut outputs = Vec::new();
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    for dir in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_utpp"))
            .args(["run", "--config", cfg.to_str().unwrap(), "--controller", "utpp", "--seed", "7", "--svg"])
            .arg("--out-dir")
            .arg(dir.path())
            .env("RUST_LOG", "off")
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("utpp run exited with {status}"));
        }
        let read = |name: &str| fs::read(dir.path().join(name)).map_err(|e| format!("{name}: {e}"));
        outputs.push([read("utpp_seed7_trajectory.csv")?, read("utpp_seed7_summary.csv")?, read("utpp_seed7.svg")?]);
    }
    let same = outputs[0] == outputs[1];
    let msg = format!(
        "two invocations: CSV {} bytes, SVG {} bytes, identical = {same}",
        outputs[0][0].len(),
        outputs[0][2].len()
    );
    if same {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("transform round trip", c1_round_trip),
        ("line/circle transform oracles", c2_transform_oracles),
        ("cross-track oracles and circle fixed point", c3_cross_track_oracles),
        ("unscented weights and mean recovery", c4_ut_weights),
        ("zero-covariance UTPP equals PP", c5_degenerate_equivalence),
        ("noise-free straight-road tracking", c6_straight_reproduction),
        ("noise-free circle tracking", c7_circle_reproduction),
        ("UTPP vs PP convergence time", c8_convergence_comparison),
        ("waypoint circle recovery and k-d tree", c9_waypoint_reduction),
        ("byte-identical CSV/SVG across invocations", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
