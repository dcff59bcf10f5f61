//! Vertical-axis vehicle: a point mass whose net acceleration follows a
//! clamped first-order response to the commanded value.
//!
//! Thrust is expressed as net vertical acceleration with gravity already
//! compensated, so `thrust = 0` hovers. Positive values push up.

use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.81;
/// Lower net-acceleration limit: 0.8 g of the hover thrust can be shed.
pub const THRUST_MIN: f64 = -0.8 * GRAVITY;
/// Upper net-acceleration limit: half a g above hover.
pub const THRUST_MAX: f64 = 0.5 * GRAVITY;

/// Vehicle state: height and vertical speed (up positive), plus the net
/// thrust acceleration currently acting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// Height above ground, m.
    pub h: f64,
    /// Vertical speed, m/s, positive up.
    pub v: f64,
    /// Net thrust acceleration, m/s^2.
    pub thrust: f64,
}

impl VehicleState {
    /// At rest in hover at height `h`.
    pub fn hovering(h: f64) -> Self {
        VehicleState {
            h,
            v: 0.0,
            thrust: 0.0,
        }
    }
}

/// Advance one control interval: the thrust moves first-order toward the
/// clamped set-point, then speed and height integrate semi-implicitly
/// (new speed moves the height).
pub fn step_dynamics(
    state: VehicleState,
    thrust_sp: f64,
    dt: f64,
    tau_thrust: f64,
) -> Result<VehicleState> {
    if !(state.h.is_finite()
        && state.v.is_finite()
        && state.thrust.is_finite()
        && thrust_sp.is_finite()
        && dt.is_finite()
        && tau_thrust.is_finite())
    {
        return Err(Error::NonFinite("dynamics step input"));
    }
    if dt <= 0.0 {
        return Err(Error::NonPositiveDt(dt));
    }
    let sp = thrust_sp.clamp(THRUST_MIN, THRUST_MAX);
    let thrust = (state.thrust + dt * (sp - state.thrust) / (dt + tau_thrust))
        .clamp(THRUST_MIN, THRUST_MAX);
    let v = state.v + thrust * dt;
    let h = state.h + v * dt;
    Ok(VehicleState { h, v, thrust })
}

/// Flow-field divergence the scene presents to a camera at height `h`
/// moving at vertical speed `v`: positive while descending.
pub fn true_divergence(h: f64, v: f64) -> Result<f64> {
    if !(h.is_finite() && v.is_finite()) {
        return Err(Error::NonFinite("divergence input"));
    }
    if h <= 0.0 {
        return Err(Error::NonPositiveHeight(h));
    }
    Ok(-2.0 * v / h)
}
