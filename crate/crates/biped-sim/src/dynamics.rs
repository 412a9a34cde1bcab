//! Reduced-coordinate floating-base dynamics of the biped: a 13-body tree
//! (trunk plus six links per leg, three of them massless joint carriers)
//! with 6 base DOF and 12 revolute joints. The equations of motion are
//! assembled with a composite-rigid-body mass matrix and a recursive
//! Newton-Euler bias pass.

use crate::spatial::{ForceVec, MotionVec, SpatialInertia, Xform};
use biped_kinematics::{JointVector, RobotModel, Side, JOINT_COUNT};
use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

pub const NUM_LINKS: usize = 13;
pub const DOF: usize = 6 + JOINT_COUNT;

pub type GenVector = nalgebra::SVector<f64, DOF>;
pub type GenMatrix = nalgebra::SMatrix<f64, DOF, DOF>;

#[derive(Debug, Clone, Copy)]
pub struct Link {
    pub parent: usize,
    /// Index into the 12-joint vector; `None` for the base.
    pub joint: Option<usize>,
    /// Revolute axis in the link frame.
    pub axis: Vector3<f64>,
    /// Joint origin in the parent frame.
    pub offset: Vector3<f64>,
    pub inertia: SpatialInertia,
}

/// The assembled kinematic tree; immutable after construction.
#[derive(Debug, Clone)]
pub struct BipedTree {
    pub links: [Link; NUM_LINKS],
    /// Link indices of the two feet, [left, right].
    pub foot_links: [usize; 2],
}

impl BipedTree {
    pub fn new(model: &RobotModel) -> Self {
        let massless = SpatialInertia::ZERO;
        let trunk = SpatialInertia::from_com(
            model.trunk_mass,
            Vector3::zeros(),
            model.link_inertias.trunk,
        );
        let thigh = SpatialInertia::from_com(
            model.thigh_mass,
            Vector3::new(0.0, 0.0, -0.5 * model.thigh_length),
            model.link_inertias.thigh,
        );
        let shank = SpatialInertia::from_com(
            model.shank_mass,
            Vector3::new(0.0, 0.0, -0.5 * model.shank_length),
            model.link_inertias.shank,
        );
        let foot = SpatialInertia::from_com(
            model.foot_mass,
            Vector3::new(0.0, 0.0, -0.5 * model.sole_offset),
            model.link_inertias.foot,
        );

        let mut links = [Link {
            parent: usize::MAX,
            joint: None,
            axis: Vector3::z(),
            offset: Vector3::zeros(),
            inertia: trunk,
        }; NUM_LINKS];

        let mut idx = 1;
        for (leg, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            let hip = model.hip_offset(side);
            let base_joint = 6 * leg;
            // hip yaw (z), hip roll (x), hip pitch (y) share the hip point.
            links[idx] = Link { parent: 0, joint: Some(base_joint), axis: Vector3::z(), offset: hip, inertia: massless };
            links[idx + 1] = Link { parent: idx, joint: Some(base_joint + 1), axis: Vector3::x(), offset: Vector3::zeros(), inertia: massless };
            links[idx + 2] = Link { parent: idx + 1, joint: Some(base_joint + 2), axis: Vector3::y(), offset: Vector3::zeros(), inertia: thigh };
            links[idx + 3] = Link {
                parent: idx + 2,
                joint: Some(base_joint + 3),
                axis: Vector3::y(),
                offset: Vector3::new(0.0, 0.0, -model.thigh_length),
                inertia: shank,
            };
            links[idx + 4] = Link {
                parent: idx + 3,
                joint: Some(base_joint + 4),
                axis: Vector3::y(),
                offset: Vector3::new(0.0, 0.0, -model.shank_length),
                inertia: massless,
            };
            links[idx + 5] = Link { parent: idx + 4, joint: Some(base_joint + 5), axis: Vector3::x(), offset: Vector3::zeros(), inertia: foot };
            idx += 6;
        }
        BipedTree { links, foot_links: [6, 12] }
    }
}

/// Base pose plus joint configuration used by the recursive passes.
#[derive(Debug, Clone, Copy)]
pub struct TreeState {
    pub base_rotation: UnitQuaternion<f64>,
    pub base_position: Vector3<f64>,
    pub q: JointVector,
}

/// Per-link kinematics computed once per substep.
#[derive(Debug, Clone)]
pub struct TreeKinematics {
    /// Link-to-parent transforms (the base entry maps base to world).
    pub to_parent: [Xform; NUM_LINKS],
    /// Link-to-world transforms.
    pub to_world: [Xform; NUM_LINKS],
    /// Spatial velocities in link coordinates.
    pub velocity: [MotionVec; NUM_LINKS],
}

/// Velocity layout: [base angular (3), base linear (3), qdot (12)],
/// base parts in base coordinates.
pub fn link_kinematics(tree: &BipedTree, state: &TreeState, u: &GenVector) -> TreeKinematics {
    let mut to_parent = [Xform::identity(); NUM_LINKS];
    let mut to_world = [Xform::identity(); NUM_LINKS];
    let mut velocity = [MotionVec::ZERO; NUM_LINKS];

    to_parent[0] = Xform::new(state.base_rotation.to_rotation_matrix(), state.base_position);
    to_world[0] = to_parent[0];
    velocity[0] = MotionVec::new(
        Vector3::new(u[0], u[1], u[2]),
        Vector3::new(u[3], u[4], u[5]),
    );

    for i in 1..NUM_LINKS {
        let link = &tree.links[i];
        let j = link.joint.expect("non-base links are actuated");
        let rot = Rotation3::from_axis_angle(
            &nalgebra::Unit::new_normalize(link.axis),
            state.q.0[j],
        );
        to_parent[i] = Xform::new(rot, link.offset);
        to_world[i] = to_world[link.parent].compose(&to_parent[i]);
        let from_parent = to_parent[i].motion_to_child(&velocity[link.parent]);
        velocity[i] = from_parent + MotionVec::new(link.axis * u[6 + j], Vector3::zeros());
    }
    TreeKinematics { to_parent, to_world, velocity }
}

/// Bias force vector `C(q, u)` including gravity and external forces:
/// the generalized force needed to keep zero acceleration. External
/// forces are given per link in link coordinates.
pub fn bias_forces(
    tree: &BipedTree,
    kin: &TreeKinematics,
    u: &GenVector,
    gravity: f64,
    f_ext: &[ForceVec; NUM_LINKS],
) -> GenVector {
    // Gravity enters as a fictitious upward base acceleration.
    let g_base = kin.to_world[0].rot.inverse() * Vector3::new(0.0, 0.0, gravity);
    let mut accel = [MotionVec::ZERO; NUM_LINKS];
    accel[0] = MotionVec::new(Vector3::zeros(), g_base);

    let mut force = [ForceVec::ZERO; NUM_LINKS];
    for i in 0..NUM_LINKS {
        if i > 0 {
            let link = &tree.links[i];
            let j = link.joint.unwrap();
            let s_qdot = MotionVec::new(link.axis * u[6 + j], Vector3::zeros());
            accel[i] = kin.to_parent[i].motion_to_child(&accel[link.parent])
                + kin.velocity[i].cross_motion(&s_qdot);
        }
        let momentum = tree.links[i].inertia.apply(&kin.velocity[i]);
        force[i] = tree.links[i].inertia.apply(&accel[i])
            + kin.velocity[i].cross_force(&momentum)
            - f_ext[i];
    }

    let mut bias = GenVector::zeros();
    for i in (1..NUM_LINKS).rev() {
        let link = &tree.links[i];
        let j = link.joint.unwrap();
        bias[6 + j] = link.axis.dot(&force[i].moment);
        let to_parent = kin.to_parent[i].force_to_parent(&force[i]);
        force[link.parent] = force[link.parent] + to_parent;
    }
    for k in 0..3 {
        bias[k] = force[0].moment[k];
        bias[3 + k] = force[0].force[k];
    }
    bias
}

/// Composite-rigid-body mass matrix in the same velocity layout, with the
/// armature added to the joint diagonal.
pub fn mass_matrix(tree: &BipedTree, kin: &TreeKinematics, armature: f64) -> GenMatrix {
    let mut composite = [SpatialInertia::ZERO; NUM_LINKS];
    for i in 0..NUM_LINKS {
        composite[i] = tree.links[i].inertia;
    }
    for i in (1..NUM_LINKS).rev() {
        let parent = tree.links[i].parent;
        let lifted = composite[i].to_parent(&kin.to_parent[i]);
        composite[parent] = composite[parent] + lifted;
    }

    let mut m = GenMatrix::zeros();
    // Base block.
    let ib = &composite[0];
    let skew_h = Matrix3::new(0.0, -ib.h.z, ib.h.y, ib.h.z, 0.0, -ib.h.x, -ib.h.y, ib.h.x, 0.0);
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&ib.inertia_origin);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&skew_h);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&skew_h.transpose());
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&(Matrix3::identity() * ib.mass));

    for i in 1..NUM_LINKS {
        let link = &tree.links[i];
        let ji = link.joint.unwrap();
        // F = I^c_i S_i in link-i coordinates.
        let mut f = ForceVec::new(
            composite[i].inertia_origin * link.axis,
            -composite[i].h.cross(&link.axis),
        );
        m[(6 + ji, 6 + ji)] = link.axis.dot(&f.moment) + armature;

        let mut body = i;
        while tree.links[body].parent != usize::MAX {
            f = kin.to_parent[body].force_to_parent(&f);
            body = tree.links[body].parent;
            if body == 0 {
                for k in 0..3 {
                    m[(k, 6 + ji)] = f.moment[k];
                    m[(6 + ji, k)] = f.moment[k];
                    m[(3 + k, 6 + ji)] = f.force[k];
                    m[(6 + ji, 3 + k)] = f.force[k];
                }
            } else if let Some(jj) = tree.links[body].joint {
                let val = tree.links[body].axis.dot(&f.moment);
                m[(6 + jj, 6 + ji)] = val;
                m[(6 + ji, 6 + jj)] = val;
            }
        }
    }
    m
}

/// Sum of `m g z_com` over all links, world frame.
pub fn potential_energy(tree: &BipedTree, kin: &TreeKinematics, gravity: f64) -> f64 {
    let mut pe = 0.0;
    for i in 0..NUM_LINKS {
        let inertia = &tree.links[i].inertia;
        if inertia.mass == 0.0 {
            continue;
        }
        let com_local = inertia.h / inertia.mass;
        let com_world = kin.to_world[i].point_to_parent(&com_local);
        pe += inertia.mass * gravity * com_world.z;
    }
    pe
}

/// Kinetic energy `1/2 u^T M u` (with armature).
pub fn kinetic_energy(tree: &BipedTree, kin: &TreeKinematics, u: &GenVector, armature: f64) -> f64 {
    let m = mass_matrix(tree, kin, armature);
    0.5 * (u.transpose() * m * u)[(0, 0)]
}
