//! Closed-loop simulation of the pure-pursuit (PP) and unscented-transform
//! pure-pursuit (UTPP) controllers.
//!
//! Each step the controller sees the measured pose, computes a steering
//! command, the true pose is advanced with the kinematic bicycle model, and a
//! new measurement is drawn around the advanced pose.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{circle_to_vehicle, line_to_vehicle, Pose};
use crate::pursuit::{self, CrossTrack, PursuitConfig};
use crate::road::RoadModel;
use crate::uncertainty::{generate_sigma_points, weighted_steering, Covariance3, UtParams};
use crate::vehicle::{advance_pose, NoiseModel, PoseSampler, VehicleState};
use crate::waypoints::LocalRoad;

/// Lateral error below which the vehicle counts as on the path, meters.
pub const CONVERGENCE_THRESHOLD: f64 = 0.05;
/// How long the error has to stay below the threshold, seconds.
pub const CONVERGENCE_HOLD: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Controller {
    PurePursuit,
    UnscentedPurePursuit,
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::PurePursuit => "pp",
            Controller::UnscentedPurePursuit => "utpp",
        }
    }
}

impl fmt::Display for Controller {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Controller {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pp" => Ok(Controller::PurePursuit),
            "utpp" => Ok(Controller::UnscentedPurePursuit),
            other => Err(Error::ConfigInvalid(format!(
                "unknown controller `{other}` (expected `pp` or `utpp`)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub road: RoadModel,
    pub start_pose: Pose,
    pub speed: f64,
    pub pursuit: PursuitConfig,
    pub dt: f64,
    pub steps: usize,
    pub noise: Option<NoiseModel>,
    pub ut: UtParams,
    pub controller: Controller,
    /// Overwrite the true pose with the Gaussian draw each step instead of
    /// only perturbing the measurement.
    pub paper_literal: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.steps < 1 {
            return invalid("steps must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return invalid(format!("speed must be positive, got {}", self.speed));
        }
        if !self.start_pose.is_finite() {
            return invalid("start pose must be finite".into());
        }
        self.road.validate()?;
        self.pursuit.validate()?;
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        if self.ut.dim != 3 {
            return invalid(format!("unscented dimension must be 3, got {}", self.ut.dim));
        }
        if self.controller == Controller::UnscentedPurePursuit && self.noise.is_none() {
            return invalid("the utpp controller needs a noise covariance (it may be zero)".into());
        }
        Ok(())
    }

    pub fn lookahead(&self) -> Result<f64> {
        pursuit::lookahead_distance(self.speed, &self.pursuit)
    }

    /// Covariance used for sigma points; zero when no noise is configured.
    pub fn covariance(&self) -> Covariance3 {
        self.noise.map_or(Covariance3::ZERO, |n| n.cov)
    }
}

/// Why a step's steering command could not be computed normally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fault {
    PerpendicularLine,
    PathOutOfReach,
    NoIntersection,
    NoForwardIntersection,
    DegenerateCenter,
    /// The waypoint road could not be reduced to a local line or circle.
    RoadReduction,
    /// One or more sigma points faulted and reused the mean point's angle.
    SigmaPointFallback,
}

impl Fault {
    pub fn tag(&self) -> &'static str {
        match self {
            Fault::PerpendicularLine => "perpendicular_line",
            Fault::PathOutOfReach => "path_out_of_reach",
            Fault::NoIntersection => "no_intersection",
            Fault::NoForwardIntersection => "no_forward_intersection",
            Fault::DegenerateCenter => "degenerate_center",
            Fault::RoadReduction => "road_reduction",
            Fault::SigmaPointFallback => "sigma_point_fallback",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Fault> {
        [
            Fault::PerpendicularLine,
            Fault::PathOutOfReach,
            Fault::NoIntersection,
            Fault::NoForwardIntersection,
            Fault::DegenerateCenter,
            Fault::RoadReduction,
            Fault::SigmaPointFallback,
        ]
        .into_iter()
        .find(|f| f.tag() == tag)
    }
}

impl From<&Error> for Fault {
    fn from(err: &Error) -> Self {
        match err {
            Error::PerpendicularLine => Fault::PerpendicularLine,
            Error::PathOutOfReach => Fault::PathOutOfReach,
            Error::NoIntersection => Fault::NoIntersection,
            Error::NoForwardIntersection => Fault::NoForwardIntersection,
            Error::DegenerateCenter => Fault::DegenerateCenter,
            _ => Fault::RoadReduction,
        }
    }
}

impl fmt::Display for Fault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub time: f64,
    pub true_pose: Pose,
    pub measured_pose: Pose,
    /// Cross-track error seen from the measured pose; NaN on a faulted step.
    pub y_e: f64,
    /// Applied steering command.
    pub delta: f64,
    /// Lateral deviation of the true pose from the road.
    pub lateral_error: f64,
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub controller: Controller,
    pub seed: u64,
    pub stream: u64,
    /// First time the true lateral error stays below
    /// [`CONVERGENCE_THRESHOLD`] for [`CONVERGENCE_HOLD`] seconds.
    pub convergence_time: Option<f64>,
    pub mean_abs_lateral_error: f64,
    pub max_abs_delta: f64,
    pub fault_count: usize,
}

/// Cross-track error of `road` seen from `pose`.
pub fn cross_track_from(pose: &Pose, road: &LocalRoad, d_l: f64) -> Result<CrossTrack> {
    match road {
        LocalRoad::Line(line) => pursuit::cross_track_line(&line_to_vehicle(line, pose)?, d_l),
        LocalRoad::Circle(circle) => pursuit::cross_track_circle(&circle_to_vehicle(circle, pose), d_l),
    }
}

/// Conventional pure pursuit from the measured pose.
pub fn step_pp(state: &VehicleState, scenario: &Scenario) -> Result<(f64, CrossTrack)> {
    let d_l = scenario.lookahead()?;
    let local = scenario.road.local_road(&state.measured_pose, d_l)?;
    let ct = cross_track_from(&state.measured_pose, &local, d_l)?;
    Ok((pursuit::steering_angle(ct.y_e, d_l, &scenario.pursuit), ct))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtppStep {
    pub delta: f64,
    /// Cross-track per sigma point; `None` where the point faulted.
    pub cross_tracks: Vec<Option<CrossTrack>>,
    pub fallbacks: usize,
}

/// Unscented pure pursuit: one steering angle per sigma point of the
/// measured pose, combined with the unscented weights.
///
/// Per-point angles are left unclamped so the combination stays smooth; only
/// the combined command is clamped.
pub fn step_utpp(state: &VehicleState, scenario: &Scenario) -> Result<UtppStep> {
    let Some(noise) = &scenario.noise else {
        return Err(Error::ConfigInvalid("utpp needs a noise covariance".into()));
    };
    let d_l = scenario.lookahead()?;
    let wheelbase = scenario.pursuit.wheelbase;
    let local = scenario.road.local_road(&state.measured_pose, d_l)?;
    let sigma = generate_sigma_points(&state.measured_pose, &noise.cov, &scenario.ut)?;

    let mean_ct = cross_track_from(sigma.mean(), &local, d_l)?;
    let mean_delta = pursuit::raw_steering_angle(mean_ct.y_e, d_l, wheelbase);

    let mut deltas = Vec::with_capacity(sigma.len());
    let mut cross_tracks = Vec::with_capacity(sigma.len());
    deltas.push(mean_delta);
    cross_tracks.push(Some(mean_ct));
    let mut fallbacks = 0;
    for point in &sigma.points[1..] {
        match cross_track_from(point, &local, d_l) {
            Ok(ct) => {
                deltas.push(pursuit::raw_steering_angle(ct.y_e, d_l, wheelbase));
                cross_tracks.push(Some(ct));
            }
            Err(err) => {
                log::debug!("sigma point {point:?} faulted ({err}); reusing the mean angle");
                deltas.push(mean_delta);
                cross_tracks.push(None);
                fallbacks += 1;
            }
        }
    }
    let delta = weighted_steering(&deltas, &scenario.ut, scenario.pursuit.steering_limit)?;
    Ok(UtppStep {
        delta,
        cross_tracks,
        fallbacks,
    })
}

/// Runs one closed-loop simulation and returns every step's record with the
/// run summary. Per-step faults hold the previous command and never abort
/// the run.
pub fn run(scenario: &Scenario) -> Result<(Vec<TrajectoryRecord>, RunSummary)> {
    scenario.validate()?;
    if matches!(scenario.road, RoadModel::Waypoints(_)) {
        log::info!("waypoint road: look-ahead waypoint is the one nearest to the point d_l ahead of the rear axle");
    }
    let mut sampler = scenario.noise.map(PoseSampler::new);
    let mut state = VehicleState {
        true_pose: scenario.start_pose,
        measured_pose: scenario.start_pose,
        speed: scenario.speed,
        wheelbase: scenario.pursuit.wheelbase,
    };
    if let (Some(s), false) = (sampler.as_mut(), scenario.paper_literal) {
        state.measured_pose = s.sample_measured_pose(&state.true_pose, &scenario.road);
    }

    let mut records = Vec::with_capacity(scenario.steps);
    let mut prev_delta = 0.0;
    for step in 0..scenario.steps {
        let outcome = match scenario.controller {
            Controller::PurePursuit => step_pp(&state, scenario).map(|(d, ct)| (d, ct.y_e, None)),
            Controller::UnscentedPurePursuit => step_utpp(&state, scenario).map(|s| {
                let y_e = s.cross_tracks[0].map_or(f64::NAN, |ct| ct.y_e);
                let fault = (s.fallbacks > 0).then_some(Fault::SigmaPointFallback);
                (s.delta, y_e, fault)
            }),
        };
        let (delta, y_e, fault) = match outcome {
            Ok(v) => v,
            Err(err) => (prev_delta, f64::NAN, Some(Fault::from(&err))),
        };
        records.push(TrajectoryRecord {
            step,
            time: step as f64 * scenario.dt,
            true_pose: state.true_pose,
            measured_pose: state.measured_pose,
            y_e,
            delta,
            lateral_error: scenario.road.lateral_offset(state.true_pose.position()),
            fault,
        });
        prev_delta = delta;

        let next = advance_pose(&state.true_pose, delta, state.speed, scenario.dt, state.wheelbase);
        match sampler.as_mut() {
            Some(s) if scenario.paper_literal => {
                state.true_pose = s.sample_measured_pose(&next, &scenario.road);
                state.measured_pose = state.true_pose;
            }
            Some(s) => {
                state.true_pose = next;
                state.measured_pose = s.sample_measured_pose(&next, &scenario.road);
            }
            None => {
                state.true_pose = next;
                state.measured_pose = next;
            }
        }
    }

    let (seed, stream) = scenario.noise.map_or((0, 0), |n| (n.rng_seed, n.stream));
    let summary = summarize(&records, scenario.dt, scenario.controller, seed, stream);
    Ok((records, summary))
}

/// First time from which the error stays below `threshold` for `hold`
/// seconds, with the full hold window inside the record range.
pub fn convergence_time(records: &[TrajectoryRecord], dt: f64, threshold: f64, hold: f64) -> Option<f64> {
    let window = (hold / dt).round() as usize;
    let mut run_start = None;
    for (k, r) in records.iter().enumerate() {
        if r.lateral_error.abs() < threshold {
            let start = *run_start.get_or_insert(k);
            if k - start >= window {
                return Some(records[start].time);
            }
        } else {
            run_start = None;
        }
    }
    None
}

pub fn summarize(
    records: &[TrajectoryRecord],
    dt: f64,
    controller: Controller,
    seed: u64,
    stream: u64,
) -> RunSummary {
    let n = records.len().max(1) as f64;
    RunSummary {
        controller,
        seed,
        stream,
        convergence_time: convergence_time(records, dt, CONVERGENCE_THRESHOLD, CONVERGENCE_HOLD),
        mean_abs_lateral_error: records.iter().map(|r| r.lateral_error.abs()).sum::<f64>() / n,
        max_abs_delta: records.iter().map(|r| r.delta.abs()).fold(0.0, f64::max),
        fault_count: records.iter().filter(|r| r.fault.is_some()).count(),
    }
}

/// Aggregate statistics over a batch of seeded runs of one controller.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchAggregate {
    pub controller: Controller,
    pub n_runs: usize,
    pub converged_runs: usize,
    /// Mean over the runs that converged.
    pub mean_convergence_time: Option<f64>,
    /// Median over all runs, non-converged runs counting as infinitely late.
    /// `None` when the median falls on a non-converged run.
    pub median_convergence_time: Option<f64>,
    pub mean_abs_lateral_error: f64,
    pub total_faults: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub summaries: Vec<RunSummary>,
    pub aggregate: BatchAggregate,
}

/// Median with `None` ordered after every value.
pub fn median_convergence(times: &[Option<f64>]) -> Option<f64> {
    if times.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = times.iter().map(|t| t.unwrap_or(f64::INFINITY)).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let m = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    m.is_finite().then_some(m)
}

pub fn aggregate(controller: Controller, summaries: &[RunSummary]) -> BatchAggregate {
    let times: Vec<Option<f64>> = summaries.iter().map(|s| s.convergence_time).collect();
    let converged: Vec<f64> = times.iter().flatten().copied().collect();
    let n = summaries.len();
    BatchAggregate {
        controller,
        n_runs: n,
        converged_runs: converged.len(),
        mean_convergence_time: (!converged.is_empty())
            .then(|| converged.iter().sum::<f64>() / converged.len() as f64),
        median_convergence_time: median_convergence(&times),
        mean_abs_lateral_error: summaries.iter().map(|s| s.mean_abs_lateral_error).sum::<f64>()
            / n.max(1) as f64,
        total_faults: summaries.iter().map(|s| s.fault_count).sum(),
    }
}

/// Runs `n_runs` independent simulations in parallel. Run `i` draws its
/// noise from stream `i` of the generator seeded with `base_seed`, so run 0
/// reproduces [`run`] with seed `base_seed`.
pub fn run_batch(scenario: &Scenario, n_runs: usize, base_seed: u64) -> Result<BatchResult> {
    if n_runs < 1 {
        return Err(Error::ConfigInvalid("batch needs at least one run".into()));
    }
    scenario.validate()?;
    let summaries = (0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = scenario.clone();
            if let Some(noise) = s.noise.as_mut() {
                noise.rng_seed = base_seed;
                noise.stream = i;
            }
            run(&s).map(|(_, summary)| summary)
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate(scenario.controller, &summaries);
    Ok(BatchResult {
        summaries,
        aggregate,
    })
}
