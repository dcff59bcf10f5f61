//! One landing attempt: plant, sensor channel, and a policy wired into a
//! fixed-rate loop with the standard start and stop rules.
//!
//! The vehicle starts in hover; the policy runs from the first tick but
//! its output is overridden to zero for the first second. The attempt
//! ends on touchdown (height under 5 cm), on leaving the 15 m ceiling, or
//! after 30 s.

use crate::controller::Controller;
use crate::error::{Error, Result};
use crate::plant::{step_dynamics, true_divergence, VehicleState};
use crate::rng;
use crate::sensor::{Observation, SensorChannel};
use crate::sim_params::SimParams;
use serde::{Deserialize, Serialize};

/// Touchdown threshold, m.
pub const H_LANDED: f64 = 0.05;
/// Ceiling, m.
pub const H_CEILING: f64 = 15.0;
/// Episode time limit, s.
pub const T_LIMIT: f64 = 30.0;
/// Policy output is forced to zero before this time, s.
pub const ACTIVATION_DELAY: f64 = 1.0;

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Landed,
    Ceiling,
    Timeout,
}

/// One control tick: the state seen at time `t` plus what the sensor and
/// policy produced at that tick. The closing record repeats the last
/// published observation and command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub t: f64,
    pub h: f64,
    pub v: f64,
    pub thrust: f64,
    pub thrust_sp: f64,
    pub d_true: f64,
    pub d_obs: f64,
    pub dd_obs: f64,
    pub missed: bool,
}

/// Full episode record.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    pub termination: Termination,
    /// Final time, s.
    pub elapsed: f64,
}

/// The three minimized objectives of an attempt: elapsed time, final
/// height, final speed magnitude. All components are non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector {
    /// Time to land, s.
    pub f1: f64,
    /// Final height, m.
    pub f2: f64,
    /// Final speed magnitude, m/s.
    pub f3: f64,
}

impl FitnessVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        FitnessVector {
            f1: a[0],
            f2: a[1],
            f3: a[2],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.f1.is_finite() && self.f2.is_finite() && self.f3.is_finite()
    }
}

/// Objectives read off the final record. Height is floored at zero: a
/// touchdown may overshoot the ground within one discrete step.
pub fn fitness(traj: &Trajectory) -> FitnessVector {
    let last = traj.steps.last().expect("trajectory has at least one record");
    FitnessVector {
        f1: traj.elapsed,
        f2: last.h.max(0.0),
        f3: last.v.abs(),
    }
}

fn check_termination(h: f64, t: f64) -> Option<Termination> {
    if h < H_LANDED {
        Some(Termination::Landed)
    } else if h > H_CEILING {
        Some(Termination::Ceiling)
    } else if t >= T_LIMIT - 1e-9 {
        Some(Termination::Timeout)
    } else {
        None
    }
}

/// Run one attempt from hover at `h0`. The policy is reset first; the
/// seed fixes the sensor noise stream. Guaranteed to halt by the time
/// limit.
pub fn run_episode<C: Controller + ?Sized>(
    controller: &mut C,
    h0: f64,
    params: &SimParams,
    seed: u64,
) -> Result<Trajectory> {
    if !h0.is_finite() || h0 <= H_LANDED || h0 >= H_CEILING {
        return Err(Error::AltitudeOutOfRange(h0));
    }
    params.validate_finite()?;
    controller.reset();
    let mut rng = rng::stream(seed, &[rng::TAG_RUN]);
    let mut channel = SensorChannel::new(params)?;
    let dt = params.dt();
    let mut state = VehicleState::hovering(h0);
    let mut steps = Vec::new();
    let mut last_obs = Observation {
        d_obs: 0.0,
        dd_obs: 0.0,
        missed: false,
    };
    let mut last_sp = 0.0;
    let mut i: u64 = 0;
    loop {
        let t = i as f64 / params.freq_hz;
        if let Some(reason) = check_termination(state.h, t) {
            let d_true = if state.h > 0.0 {
                true_divergence(state.h, state.v)?
            } else {
                f64::NAN
            };
            steps.push(Step {
                t,
                h: state.h,
                v: state.v,
                thrust: state.thrust,
                thrust_sp: last_sp,
                d_true,
                d_obs: last_obs.d_obs,
                dd_obs: last_obs.dd_obs,
                missed: last_obs.missed,
            });
            return Ok(Trajectory {
                steps,
                termination: reason,
                elapsed: t,
            });
        }
        let d_true = true_divergence(state.h, state.v)?;
        let obs = channel.observe(d_true, &mut rng);
        let raw = controller.command(obs.d_obs, obs.dd_obs, dt);
        // A policy is free-form; keep the plant defined if one misbehaves.
        let raw = if raw.is_finite() { raw } else { 0.0 };
        let thrust_sp = if t < ACTIVATION_DELAY { 0.0 } else { raw };
        steps.push(Step {
            t,
            h: state.h,
            v: state.v,
            thrust: state.thrust,
            thrust_sp,
            d_true,
            d_obs: obs.d_obs,
            dd_obs: obs.dd_obs,
            missed: obs.missed,
        });
        state = step_dynamics(state, thrust_sp, dt, params.tau_thrust_s)?;
        last_obs = obs;
        last_sp = thrust_sp;
        i += 1;
    }
}

pub(crate) fn fmt9(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{:.8e}", x)
    }
}

impl Trajectory {
    /// CSV export: one row per tick, nine significant digits, SI units.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.steps.len() * 120 + 64);
        out.push_str("t,h,v,T,T_sp,D_true,D_obs,dD_obs,missed\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                fmt9(s.t),
                fmt9(s.h),
                fmt9(s.v),
                fmt9(s.thrust),
                fmt9(s.thrust_sp),
                fmt9(s.d_true),
                fmt9(s.d_obs),
                fmt9(s.dd_obs),
                u8::from(s.missed),
            ));
        }
        out
    }
}

/// Sidecar metadata for a stored trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub termination: Termination,
    pub elapsed_s: f64,
    pub h0_m: f64,
    pub seed: u64,
    pub params: SimParams,
    pub fitness: FitnessVector,
    pub records: usize,
}

impl EpisodeSummary {
    pub fn of(traj: &Trajectory, h0: f64, params: &SimParams, seed: u64) -> Self {
        EpisodeSummary {
            termination: traj.termination,
            elapsed_s: traj.elapsed,
            h0_m: h0,
            seed,
            params: *params,
            fitness: fitness(traj),
            records: traj.steps.len(),
        }
    }
}
