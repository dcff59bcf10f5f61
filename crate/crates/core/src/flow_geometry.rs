//! Optical flow of a planar scene seen through a pinhole camera, and the
//! pair-size estimator that recovers flow-field divergence from tracked
//! feature points.
//!
//! Conventions: image coordinates are metric (focal length 1), the camera
//! Z axis points at the scene, and `(U, V, W)` is the camera-frame
//! velocity with `W > 0` approaching the scene. The canonical divergence
//! used by the rest of the crate is positive during descent; the raw
//! pair-size estimator yields the opposite sign and is flipped by
//! [`canonical_divergence`].

use crate::error::{Error, Result};
use crate::rng;
use rand::seq::index::sample as index_sample;

/// Camera pose and motion. Attitude is Euler angles (roll, pitch, yaw),
/// kept as frame bookkeeping; the flow equations consume only the
/// camera-frame velocity and the body rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraState {
    /// World position (X, Y, Z), m.
    pub position: [f64; 3],
    /// Euler angles (roll, pitch, yaw), rad.
    pub attitude: [f64; 3],
    /// Camera-frame velocity (U, V, W), m/s. W > 0 closes on the scene.
    pub velocity: [f64; 3],
    /// Body rotation rates (p, q, r), rad/s.
    pub rates: [f64; 3],
}

impl CameraState {
    /// Camera at rest at the origin.
    pub fn at_rest() -> Self {
        CameraState {
            position: [0.0; 3],
            attitude: [0.0; 3],
            velocity: [0.0; 3],
            rates: [0.0; 3],
        }
    }

    /// Pure approach along the optical axis at `w` m/s.
    pub fn descending(w: f64) -> Self {
        CameraState {
            velocity: [0.0, 0.0, w],
            ..CameraState::at_rest()
        }
    }
}

/// A planar scene in camera-frame coordinates: depth grows linearly with
/// lateral offset, `Z_C = z0 + slope_x * X_C + slope_y * Y_C`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarScene {
    /// Distance along the optical axis, m. Must be positive.
    pub z0: f64,
    pub slope_x: f64,
    pub slope_y: f64,
    /// Feature points on the plane, camera frame.
    pub points: Vec<[f64; 3]>,
}

/// Metric image-plane coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub x: f64,
    pub y: f64,
}

impl ImagePoint {
    pub fn new(x: f64, y: f64) -> Self {
        ImagePoint { x, y }
    }

    pub fn dist(self, other: ImagePoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

impl PlanarScene {
    /// Flat scene facing the camera at distance `z0`.
    pub fn flat(z0: f64) -> Result<Self> {
        PlanarScene::new(z0, 0.0, 0.0)
    }

    pub fn new(z0: f64, slope_x: f64, slope_y: f64) -> Result<Self> {
        if !(z0.is_finite() && slope_x.is_finite() && slope_y.is_finite()) {
            return Err(Error::NonFinite("scene parameters"));
        }
        if z0 <= 0.0 {
            return Err(Error::NonPositiveZ0(z0));
        }
        Ok(PlanarScene {
            z0,
            slope_x,
            slope_y,
            points: Vec::new(),
        })
    }

    /// Depth of the scene surface behind image point `pt`.
    pub fn depth_at(&self, pt: ImagePoint) -> Result<f64> {
        let k = 1.0 - self.slope_x * pt.x - self.slope_y * pt.y;
        let z = self.z0 / k;
        if k <= 0.0 || !z.is_finite() {
            return Err(Error::DegenerateDepth {
                x: pt.x,
                y: pt.y,
                z,
            });
        }
        Ok(z)
    }

    /// Scatter `n` feature points on the plane, uniform over the image
    /// square `[-half_fov, half_fov]^2` as seen from the camera origin.
    pub fn scatter(&mut self, n: usize, half_fov: f64, seed: u64) -> Result<()> {
        use rand::Rng;
        let mut rng = rng::stream(seed, &[]);
        self.points.clear();
        self.points.reserve(n);
        for _ in 0..n {
            let pt = ImagePoint::new(
                rng.gen_range(-half_fov..half_fov),
                rng.gen_range(-half_fov..half_fov),
            );
            let z = self.depth_at(pt)?;
            self.points.push([pt.x * z, pt.y * z, z]);
        }
        Ok(())
    }

    /// Largest violation of the plane equation over the feature points.
    pub fn max_plane_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (self.z0 + self.slope_x * p[0] + self.slope_y * p[1] - p[2]).abs())
            .fold(0.0, f64::max)
    }
}

/// Scene-scaled motion observables: ventral flow, velocity over distance,
/// and the flow-field divergence (positive while closing on the scene).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowObservables {
    /// Ventral flow (x, y), 1/s. Opposite in sign to the scaled velocity.
    pub ventral: [f64; 2],
    /// Camera velocity divided by scene distance, 1/s.
    pub scaled_velocity: [f64; 3],
    /// Flow-field divergence, 1/s; twice the scaled approach rate.
    pub divergence: f64,
}

/// Scaled observables for a camera above a planar scene.
pub fn observables(cam: &CameraState, scene: &PlanarScene) -> FlowObservables {
    let t = [
        cam.velocity[0] / scene.z0,
        cam.velocity[1] / scene.z0,
        cam.velocity[2] / scene.z0,
    ];
    FlowObservables {
        ventral: [-t[0], -t[1]],
        scaled_velocity: t,
        divergence: 2.0 * t[2],
    }
}

/// Flow vector at an image point for full six-degree camera motion over a
/// planar scene. Translation terms scale with the local inverse depth;
/// rotation terms depend on the image point alone.
pub fn flow_at_point(cam: &CameraState, scene: &PlanarScene, pt: ImagePoint) -> Result<[f64; 2]> {
    if !(pt.x.is_finite() && pt.y.is_finite()) {
        return Err(Error::NonFinite("image point"));
    }
    let z = scene.depth_at(pt)?;
    let [u_c, v_c, w_c] = cam.velocity;
    let [p, q, r] = cam.rates;
    let (x, y) = (pt.x, pt.y);
    let u = -u_c / z + (w_c / z) * x - q + r * y + p * x * y - q * x * x;
    let v = -v_c / z + (w_c / z) * y + p - r * x - q * x * y + p * y * y;
    Ok([u, v])
}

/// Rotation-induced part of the flow at an image point.
pub fn rotational_flow(rates: [f64; 3], pt: ImagePoint) -> [f64; 2] {
    let [p, q, r] = rates;
    let (x, y) = (pt.x, pt.y);
    [
        -q + r * y + p * x * y - q * x * x,
        p - r * x - q * x * y + p * y * y,
    ]
}

/// Remove the rotation-induced component from a measured flow vector.
pub fn derotate(flow: [f64; 2], rates: [f64; 3], pt: ImagePoint) -> [f64; 2] {
    let rot = rotational_flow(rates, pt);
    [flow[0] - rot[0], flow[1] - rot[1]]
}

/// Translational flow in scaled form: what is left after derotation,
/// written with the scaled velocity and the scene slopes.
pub fn translational_flow(
    cam: &CameraState,
    scene: &PlanarScene,
    pt: ImagePoint,
) -> Result<[f64; 2]> {
    // Evaluated directly from the scaled-velocity form; depth_at performs
    // the degeneracy check.
    scene.depth_at(pt)?;
    let obs = observables(cam, scene);
    let [tx, ty, tz] = obs.scaled_velocity;
    let k = 1.0 - scene.slope_x * pt.x - scene.slope_y * pt.y;
    Ok([(-tx + tz * pt.x) * k, (-ty + tz * pt.y) * k])
}

/// Relative shrink rate of the image distance between two tracked points:
/// `(l_prev - l_now) / (l_prev * dt)`. Negative while the image expands,
/// i.e. during descent.
pub fn size_divergence(l_prev: f64, l_now: f64, dt: f64) -> Result<f64> {
    if !(l_prev.is_finite() && l_now.is_finite() && dt.is_finite()) {
        return Err(Error::NonFinite("pair distances"));
    }
    if dt <= 0.0 {
        return Err(Error::NonPositiveDt(dt));
    }
    if l_prev == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((l_prev - l_now) / (l_prev * dt))
}

/// Image positions of the same features in two frames `dt` apart.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackedPointSet {
    /// Positions in the earlier frame.
    pub prev: Vec<ImagePoint>,
    /// Positions in the later frame, same order.
    pub now: Vec<ImagePoint>,
    /// Frame spacing, s.
    pub dt: f64,
}

impl TrackedPointSet {
    pub fn new(prev: Vec<ImagePoint>, now: Vec<ImagePoint>, dt: f64) -> Result<Self> {
        if prev.len() != now.len() {
            return Err(Error::PointCountMismatch(prev.len(), now.len()));
        }
        if prev.len() < 2 {
            return Err(Error::TooFewPoints(prev.len()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::NonPositiveDt(dt));
        }
        Ok(TrackedPointSet { prev, now, dt })
    }

    /// Observe the scene's feature points from a camera translating at
    /// `velocity` (camera frame) over one frame interval. The earlier
    /// frame is taken from the origin, the later one after the motion.
    pub fn from_translation(scene: &PlanarScene, velocity: [f64; 3], dt: f64) -> Result<Self> {
        let project = |p: [f64; 3]| -> Result<ImagePoint> {
            if p[2] <= 0.0 {
                return Err(Error::DegenerateDepth {
                    x: p[0],
                    y: p[1],
                    z: p[2],
                });
            }
            Ok(ImagePoint::new(p[0] / p[2], p[1] / p[2]))
        };
        let mut prev = Vec::with_capacity(scene.points.len());
        let mut now = Vec::with_capacity(scene.points.len());
        for p in &scene.points {
            prev.push(project(*p)?);
            now.push(project([
                p[0] - velocity[0] * dt,
                p[1] - velocity[1] * dt,
                p[2] - velocity[2] * dt,
            ])?);
        }
        TrackedPointSet::new(prev, now, dt)
    }

    fn pair_count(&self) -> usize {
        self.prev.len() * (self.prev.len() - 1) / 2
    }
}

/// Cap on the number of point pairs entering a divergence estimate.
pub const MAX_PAIRS: usize = 100;

fn pair_from_index(n: usize, mut k: usize) -> (usize, usize) {
    // Lexicographic pairs (0,1), (0,2), ..., (n-2, n-1).
    for i in 0..n - 1 {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
    }
    unreachable!("pair index out of range");
}

/// Per-pair divergence estimates: twice the relative size-change rate of
/// each selected pair (a 1-D scale rate seen in a 2-D field). At most
/// [`MAX_PAIRS`] distinct pairs are used, chosen without replacement by a
/// seeded draw; fewer candidates means all of them.
pub fn pair_divergences(pts: &TrackedPointSet, seed: u64) -> Result<Vec<f64>> {
    let n = pts.prev.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let candidates = pts.pair_count();
    let take = candidates.min(MAX_PAIRS);
    let mut rng = rng::stream(seed, &[]);
    let chosen: Vec<usize> = if take == candidates {
        (0..candidates).collect()
    } else {
        index_sample(&mut rng, candidates, take).into_vec()
    };
    let mut out = Vec::with_capacity(take);
    for k in chosen {
        let (i, j) = pair_from_index(n, k);
        let l_prev = pts.prev[i].dist(pts.prev[j]);
        let l_now = pts.now[i].dist(pts.now[j]);
        out.push(2.0 * size_divergence(l_prev, l_now, pts.dt)?);
    }
    Ok(out)
}

/// Divergence estimate from tracked points: the arithmetic mean of the
/// per-pair estimates. Keeps the raw estimator sign (negative during
/// descent); use [`canonical_divergence`] to compare against the
/// simulator's convention.
pub fn estimate_divergence(pts: &TrackedPointSet, seed: u64) -> Result<f64> {
    let divs = pair_divergences(pts, seed)?;
    Ok(divs.iter().sum::<f64>() / divs.len() as f64)
}

/// Adapter from the raw estimator sign to the canonical convention
/// (positive during descent).
pub fn canonical_divergence(raw_estimate: f64) -> f64 {
    -raw_estimate
}
