//! Scenario files.
//!
//! A scenario is a TOML document with the sections `[road]`, `[vehicle]`,
//! `[sim]`, `[noise]` and `[ut]`. Angles are written in degrees and converted
//! to radians here; nothing past this module sees degrees.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use utpp::uncertainty::{compose_covariance, derive_ut_params};
use utpp::{
    Circle, Controller, Covariance3, NoiseModel, Pose, PursuitConfig, RoadModel, Scenario,
    StraightLine, WaypointPath, WaypointRoad,
};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    road: RawRoad,
    vehicle: RawVehicle,
    sim: RawSim,
    #[serde(default)]
    noise: RawNoise,
    #[serde(default)]
    ut: RawUt,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawRoad {
    Line {
        slope: f64,
        intercept: f64,
    },
    Circle {
        center_x: f64,
        center_y: f64,
        radius: f64,
    },
    Waypoints {
        /// Relative paths are resolved against the config file's directory.
        file: PathBuf,
        #[serde(default = "default_straight_eps")]
        straight_eps: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVehicle {
    x: f64,
    y: f64,
    yaw_deg: f64,
    speed: f64,
    wheelbase: f64,
    lookahead_gain: f64,
    #[serde(default = "default_steering_limit_deg")]
    steering_limit_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: f64,
    #[serde(default = "default_steps")]
    steps: usize,
    #[serde(default = "default_controller")]
    controller: String,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    paper_literal: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawNoise {
    sigma_x: f64,
    sigma_y: f64,
    sigma_yaw_deg: f64,
    road_sigma_x: f64,
    road_sigma_y: f64,
    road_sigma_yaw_deg: f64,
    max_lateral_dev: f64,
}

impl Default for RawNoise {
    fn default() -> Self {
        Self {
            sigma_x: 0.0,
            sigma_y: 0.1,
            sigma_yaw_deg: 10.0,
            road_sigma_x: 0.0,
            road_sigma_y: 0.0,
            road_sigma_yaw_deg: 0.0,
            max_lateral_dev: 0.3,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawUt {
    dim: usize,
    alpha: f64,
    kappa: f64,
}

impl Default for RawUt {
    fn default() -> Self {
        Self {
            dim: 3,
            alpha: 1e-3,
            kappa: 0.0,
        }
    }
}

fn default_straight_eps() -> f64 {
    utpp::waypoints::DEFAULT_STRAIGHT_EPS
}

fn default_steering_limit_deg() -> f64 {
    70.0
}

fn default_steps() -> usize {
    300
}

fn default_controller() -> String {
    "utpp".into()
}

fn default_seed() -> u64 {
    1
}

/// Command-line adjustments applied on top of a parsed scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    /// `line:M,C`, `circle:X,Y,R` or `waypoints:FILE`.
    pub road: Option<String>,
    pub controller: Option<Controller>,
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    /// Zero the pose covariance. The lateral clamp stays in place.
    pub no_noise: bool,
}

/// Reads and validates a scenario file.
pub fn parse_config(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Parses scenario text; waypoint files are looked up relative to `base_dir`.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<Scenario, String> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| e.to_string().trim_end().to_string())?;

    let road = build_road(&raw.road, base_dir)?;
    let v = &raw.vehicle;
    let controller: Controller = raw
        .sim
        .controller
        .parse()
        .map_err(|e: utpp::Error| format!("sim.controller: {e}"))?;
    let ut = derive_ut_params(raw.ut.dim, raw.ut.alpha, raw.ut.kappa)
        .map_err(|e| format!("ut: {e}"))?;

    let n = &raw.noise;
    let sigma = [
        ("noise.sigma_x", n.sigma_x),
        ("noise.sigma_y", n.sigma_y),
        ("noise.sigma_yaw_deg", n.sigma_yaw_deg),
        ("noise.road_sigma_x", n.road_sigma_x),
        ("noise.road_sigma_y", n.road_sigma_y),
        ("noise.road_sigma_yaw_deg", n.road_sigma_yaw_deg),
    ];
    for (key, value) in sigma {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(format!("{key} must be a finite non-negative number, got {value}"));
        }
    }
    let cov = compose_covariance(
        &Covariance3::from_std(n.sigma_x, n.sigma_y, n.sigma_yaw_deg.to_radians()),
        &Covariance3::from_std(
            n.road_sigma_x,
            n.road_sigma_y,
            n.road_sigma_yaw_deg.to_radians(),
        ),
    );

    let scenario = Scenario {
        road,
        start_pose: Pose::new(v.x, v.y, v.yaw_deg.to_radians()),
        speed: v.speed,
        pursuit: PursuitConfig {
            wheelbase: v.wheelbase,
            lookahead_gain: v.lookahead_gain,
            steering_limit: v.steering_limit_deg.to_radians(),
        },
        dt: raw.sim.dt,
        steps: raw.sim.steps,
        noise: Some(NoiseModel {
            cov,
            max_lateral_dev: n.max_lateral_dev,
            rng_seed: raw.sim.seed,
            stream: 0,
        }),
        ut,
        controller,
        paper_literal: raw.sim.paper_literal,
    };
    scenario.validate().map_err(|e| e.to_string())?;
    Ok(scenario)
}

fn build_road(raw: &RawRoad, base_dir: &Path) -> Result<RoadModel, String> {
    let road = match raw {
        RawRoad::Line { slope, intercept } => RoadModel::Line(StraightLine::new(*slope, *intercept)),
        RawRoad::Circle {
            center_x,
            center_y,
            radius,
        } => RoadModel::Circle(Circle::new(*center_x, *center_y, *radius)),
        RawRoad::Waypoints { file, straight_eps } => {
            load_waypoints(&base_dir.join(file), *straight_eps)?
        }
    };
    road.validate().map_err(|e| format!("road: {e}"))?;
    Ok(road)
}

fn load_waypoints(path: &Path, straight_eps: f64) -> Result<RoadModel, String> {
    if !(straight_eps > 0.0 && straight_eps.is_finite()) {
        return Err(format!("road.straight_eps must be positive, got {straight_eps}"));
    }
    let text = fs::read_to_string(path)
        .map_err(|e| format!("road.file: cannot read {}: {e}", path.display()))?;
    let waypoints: WaypointPath = text
        .parse()
        .map_err(|e| format!("road.file {}: {e}", path.display()))?;
    let road = WaypointRoad::new(waypoints, straight_eps).map_err(|e| format!("road.file: {e}"))?;
    Ok(RoadModel::Waypoints(Arc::new(road)))
}

/// Parses a `--road` value. Waypoint paths are taken relative to the working
/// directory.
pub fn parse_road_spec(spec: &str) -> Result<RoadModel, String> {
    let (kind, args) = spec
        .split_once(':')
        .ok_or_else(|| format!("road `{spec}`: expected KIND:ARGS"))?;
    let numbers = || -> Result<Vec<f64>, String> {
        args.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("road `{spec}`: `{s}` is not a number"))
            })
            .collect()
    };
    let road = match kind {
        "line" => match numbers()?[..] {
            [m, c] => RoadModel::Line(StraightLine::new(m, c)),
            _ => return Err(format!("road `{spec}`: line takes SLOPE,INTERCEPT")),
        },
        "circle" => match numbers()?[..] {
            [x, y, r] => RoadModel::Circle(Circle::new(x, y, r)),
            _ => return Err(format!("road `{spec}`: circle takes X,Y,RADIUS")),
        },
        "waypoints" => load_waypoints(Path::new(args), default_straight_eps())?,
        other => return Err(format!("road `{spec}`: unknown kind `{other}`")),
    };
    road.validate().map_err(|e| format!("road `{spec}`: {e}"))?;
    Ok(road)
}

/// Applies `overrides` and re-validates the scenario.
pub fn apply_overrides(scenario: &mut Scenario, overrides: &Overrides) -> Result<(), CliError> {
    if let Some(spec) = &overrides.road {
        scenario.road = parse_road_spec(spec).map_err(CliError::Config)?;
    }
    if let Some(controller) = overrides.controller {
        scenario.controller = controller;
    }
    if let Some(steps) = overrides.steps {
        scenario.steps = steps;
    }
    if let Some(noise) = scenario.noise.as_mut() {
        if let Some(seed) = overrides.seed {
            noise.rng_seed = seed;
        }
        if overrides.no_noise {
            noise.cov = Covariance3::ZERO;
        }
    }
    scenario
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))
}
