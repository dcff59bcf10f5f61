//! Observation channel between the true divergence and the controller.
//!
//! The channel delays the signal by a whole number of samples, drops
//! frames at a fixed probability (holding the last published values), and
//! corrupts delivered samples with white noise plus noise proportional to
//! the delayed magnitude. It also publishes the finite-difference rate of
//! the observation, divided by the time since the last delivered frame.

use crate::error::{Error, Result};
use crate::sim_params::SimParams;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::VecDeque;

/// What the controller sees at one control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// Observed divergence, 1/s.
    pub d_obs: f64,
    /// Observed divergence rate, 1/s^2.
    pub dd_obs: f64,
    /// True if this tick delivered no new frame.
    pub missed: bool,
}

/// Stateful sensor pipeline for one episode.
#[derive(Debug, Clone)]
pub struct SensorChannel {
    delay_line: VecDeque<f64>,
    d_obs: f64,
    dd_obs: f64,
    since_last_frame: f64,
    dt: f64,
    jitter_prob: f64,
    white: Normal<f64>,
    proportional: Normal<f64>,
}

impl SensorChannel {
    pub fn new(params: &SimParams) -> Result<Self> {
        params.validate_finite()?;
        let white = Normal::new(0.0, params.sigma_w_per_s)
            .map_err(|_| Error::NonFinite("sigma_w_per_s"))?;
        let proportional = Normal::new(0.0, params.sigma_p_per_s)
            .map_err(|_| Error::NonFinite("sigma_p_per_s"))?;
        Ok(SensorChannel {
            delay_line: VecDeque::from(vec![0.0; params.delay_samples as usize]),
            d_obs: 0.0,
            dd_obs: 0.0,
            since_last_frame: 0.0,
            dt: params.dt(),
            jitter_prob: params.jitter_prob,
            white,
            proportional,
        })
    }

    /// Feed the current true divergence; returns what gets published this
    /// tick. The delay line always advances, whether or not the frame is
    /// delivered.
    pub fn observe(&mut self, d_true: f64, rng: &mut ChaCha8Rng) -> Observation {
        let missed = rng.gen::<f64>() < self.jitter_prob;
        self.ingest(d_true, missed, rng)
    }

    fn ingest(&mut self, d_true: f64, missed: bool, rng: &mut ChaCha8Rng) -> Observation {
        self.since_last_frame += self.dt;
        self.delay_line.push_back(d_true);
        let delayed = self.delay_line.pop_front().expect("delay line is never empty");
        if !missed {
            let noisy = delayed
                + self.white.sample(rng)
                + delayed.abs() * self.proportional.sample(rng);
            self.dd_obs = (noisy - self.d_obs) / self.since_last_frame;
            self.d_obs = noisy;
            self.since_last_frame = 0.0;
        }
        Observation {
            d_obs: self.d_obs,
            dd_obs: self.dd_obs,
            missed,
        }
    }
}
