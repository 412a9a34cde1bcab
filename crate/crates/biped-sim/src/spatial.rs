//! Minimal spatial-vector algebra for the articulated dynamics: 6D motion
//! and force vectors in body (Plücker) coordinates plus compact spatial
//! inertias referred to the frame origin.

use nalgebra::{Matrix3, Rotation3, Vector3};

/// Spatial motion vector: angular part and the linear velocity of the
/// body-fixed point at the frame origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionVec {
    pub ang: Vector3<f64>,
    pub lin: Vector3<f64>,
}

impl MotionVec {
    pub const ZERO: MotionVec = MotionVec { ang: Vector3::new(0.0, 0.0, 0.0), lin: Vector3::new(0.0, 0.0, 0.0) };

    pub fn new(ang: Vector3<f64>, lin: Vector3<f64>) -> Self {
        Self { ang, lin }
    }

    /// Motion-by-motion cross product.
    pub fn cross_motion(&self, other: &MotionVec) -> MotionVec {
        MotionVec {
            ang: self.ang.cross(&other.ang),
            lin: self.ang.cross(&other.lin) + self.lin.cross(&other.ang),
        }
    }

    /// Motion-by-force cross product.
    pub fn cross_force(&self, f: &ForceVec) -> ForceVec {
        ForceVec {
            moment: self.ang.cross(&f.moment) + self.lin.cross(&f.force),
            force: self.ang.cross(&f.force),
        }
    }
}

impl std::ops::Add for MotionVec {
    type Output = MotionVec;
    fn add(self, rhs: MotionVec) -> MotionVec {
        MotionVec { ang: self.ang + rhs.ang, lin: self.lin + rhs.lin }
    }
}

/// Spatial force vector: moment about the frame origin and linear force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceVec {
    pub moment: Vector3<f64>,
    pub force: Vector3<f64>,
}

impl ForceVec {
    pub const ZERO: ForceVec = ForceVec { moment: Vector3::new(0.0, 0.0, 0.0), force: Vector3::new(0.0, 0.0, 0.0) };

    pub fn new(moment: Vector3<f64>, force: Vector3<f64>) -> Self {
        Self { moment, force }
    }
}

impl std::ops::Add for ForceVec {
    type Output = ForceVec;
    fn add(self, rhs: ForceVec) -> ForceVec {
        ForceVec { moment: self.moment + rhs.moment, force: self.force + rhs.force }
    }
}

impl std::ops::Sub for ForceVec {
    type Output = ForceVec;
    fn sub(self, rhs: ForceVec) -> ForceVec {
        ForceVec { moment: self.moment - rhs.moment, force: self.force - rhs.force }
    }
}

/// Rigid child-to-parent transform: `x_parent = rot * x_child + trans`.
#[derive(Debug, Clone, Copy)]
pub struct Xform {
    pub rot: Rotation3<f64>,
    pub trans: Vector3<f64>,
}

impl Xform {
    pub fn identity() -> Self {
        Self { rot: Rotation3::identity(), trans: Vector3::zeros() }
    }

    pub fn new(rot: Rotation3<f64>, trans: Vector3<f64>) -> Self {
        Self { rot, trans }
    }

    pub fn point_to_parent(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rot * p + self.trans
    }

    pub fn compose(&self, inner: &Xform) -> Xform {
        Xform { rot: self.rot * inner.rot, trans: self.trans + self.rot * inner.trans }
    }

    /// Motion vector from child coordinates to parent coordinates.
    pub fn motion_to_parent(&self, m: &MotionVec) -> MotionVec {
        let ang = self.rot * m.ang;
        MotionVec { ang, lin: self.rot * m.lin + self.trans.cross(&ang) }
    }

    /// Motion vector from parent coordinates to child coordinates.
    pub fn motion_to_child(&self, m: &MotionVec) -> MotionVec {
        let rt = self.rot.inverse();
        MotionVec { ang: rt * m.ang, lin: rt * (m.lin - self.trans.cross(&m.ang)) }
    }

    /// Force vector from child coordinates to parent coordinates.
    pub fn force_to_parent(&self, f: &ForceVec) -> ForceVec {
        let force = self.rot * f.force;
        ForceVec { moment: self.rot * f.moment + self.trans.cross(&force), force }
    }
}

/// Spatial inertia in compact form: mass, first moment `h = m c` and the
/// rotational inertia about the frame origin.
#[derive(Debug, Clone, Copy)]
pub struct SpatialInertia {
    pub mass: f64,
    pub h: Vector3<f64>,
    pub inertia_origin: Matrix3<f64>,
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

impl SpatialInertia {
    pub const ZERO: SpatialInertia = SpatialInertia {
        mass: 0.0,
        h: Vector3::new(0.0, 0.0, 0.0),
        inertia_origin: Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    };

    /// From mass, center of mass and rotational inertia about the com.
    pub fn from_com(mass: f64, com: Vector3<f64>, inertia_com: Matrix3<f64>) -> Self {
        let parallel = mass * (Matrix3::identity() * com.norm_squared() - com * com.transpose());
        Self { mass, h: mass * com, inertia_origin: inertia_com + parallel }
    }

    pub fn apply(&self, m: &MotionVec) -> ForceVec {
        ForceVec {
            moment: self.inertia_origin * m.ang + self.h.cross(&m.lin),
            force: self.mass * m.lin - self.h.cross(&m.ang),
        }
    }

    /// Re-expresses the inertia in the parent frame of `x`.
    pub fn to_parent(&self, x: &Xform) -> SpatialInertia {
        let r = x.rot.matrix();
        let h_rot = x.rot * self.h;
        let h_new = h_rot + self.mass * x.trans;
        let i_new = r * self.inertia_origin * r.transpose()
            - skew(&x.trans) * skew(&h_rot)
            - skew(&h_new) * skew(&x.trans);
        SpatialInertia { mass: self.mass, h: h_new, inertia_origin: i_new }
    }
}

impl std::ops::Add for SpatialInertia {
    type Output = SpatialInertia;
    fn add(self, rhs: SpatialInertia) -> SpatialInertia {
        SpatialInertia {
            mass: self.mass + rhs.mass,
            h: self.h + rhs.h,
            inertia_origin: self.inertia_origin + rhs.inertia_origin,
        }
    }
}
