use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Frame a pose is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    /// Trunk base frame `F_B`: origin at the trunk center, x forward, y left, z up.
    Body,
    /// Fixed world frame.
    World,
}

/// Pose of an ankle node: position plus yaw about the frame z axis.
///
/// Foot pitch and roll are not control targets; the feet stay horizontal
/// with respect to the trunk transverse plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnklePose {
    pub position: Vector3<f64>,
    pub yaw: f64,
    pub frame: Frame,
}

impl AnklePose {
    pub fn in_body(position: Vector3<f64>, yaw: f64) -> Self {
        Self { position, yaw: wrap_angle(yaw), frame: Frame::Body }
    }

    pub fn in_world(position: Vector3<f64>, yaw: f64) -> Self {
        Self { position, yaw: wrap_angle(yaw), frame: Frame::World }
    }
}

/// Pose of the trunk node: position plus full orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrunkPose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    pub frame: Frame,
}

impl TrunkPose {
    pub fn in_body(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self { position, orientation, frame: Frame::Body }
    }

    pub fn in_world(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self { position, orientation, frame: Frame::World }
    }

    pub fn identity(frame: Frame) -> Self {
        Self { position: Vector3::zeros(), orientation: UnitQuaternion::identity(), frame }
    }

    /// Yaw component of the orientation (z-y-x convention).
    pub fn yaw(&self) -> f64 {
        yaw_of(&self.orientation)
    }
}

/// Yaw angle of a rotation (z-y-x Euler convention).
pub fn yaw_of(q: &UnitQuaternion<f64>) -> f64 {
    let r = q.to_rotation_matrix();
    r[(1, 0)].atan2(r[(0, 0)])
}

/// Wrap an angle to the interval (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = a % two_pi;
    if r <= -PI {
        r += two_pi;
    } else if r > PI {
        r -= two_pi;
    }
    r
}
