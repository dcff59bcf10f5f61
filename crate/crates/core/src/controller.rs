//! Control policies mapping the observed divergence pair to a thrust
//! set-point. Policies are stateful (recurrent networks integrate), so an
//! episode always starts from [`Controller::reset`].

/// A landing policy. `command` is called once per control tick.
pub trait Controller {
    /// Return to the start-of-episode state.
    fn reset(&mut self) {}

    /// Thrust set-point (net acceleration, m/s^2, up positive) for the
    /// current observation.
    fn command(&mut self, d_obs: f64, dd_obs: f64, dt: f64) -> f64;
}

/// Proportional regulation of the observed divergence toward a set-point.
/// A divergence below the set-point (descending too slowly) commands a
/// downward acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineController {
    pub gain: f64,
    pub setpoint: f64,
}

/// Aggressive baseline gain: tracks tightly, oscillates under delay.
pub const BASELINE_HIGH_GAIN: f64 = 8.0;
/// Conservative baseline gain: smooth but slow to follow.
pub const BASELINE_LOW_GAIN: f64 = 1.5;
/// Default divergence set-point for baseline landings.
pub const BASELINE_SETPOINT: f64 = 0.5;

impl BaselineController {
    pub fn new(gain: f64, setpoint: f64) -> Self {
        BaselineController { gain, setpoint }
    }

    /// High-gain reference configuration.
    pub fn aggressive() -> Self {
        BaselineController::new(BASELINE_HIGH_GAIN, BASELINE_SETPOINT)
    }

    /// Low-gain reference configuration.
    pub fn smooth() -> Self {
        BaselineController::new(BASELINE_LOW_GAIN, BASELINE_SETPOINT)
    }
}

impl Controller for BaselineController {
    fn command(&mut self, d_obs: f64, _dd_obs: f64, _dt: f64) -> f64 {
        self.gain * (d_obs - self.setpoint)
    }
}

/// Fixed-output policy; `ConstantController(0.0)` hovers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantController(pub f64);

impl Controller for ConstantController {
    fn command(&mut self, _d_obs: f64, _dd_obs: f64, _dt: f64) -> f64 {
        self.0
    }
}
