use crate::dynamics::{BipedTree, TreeKinematics, NUM_LINKS};
use crate::spatial::ForceVec;
use crate::terrain::TerrainModel;
use crate::world::SimConfig;
use biped_kinematics::RobotModel;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Contact readout of the last control step: per foot-corner contact
/// flags and normal forces.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactSnapshot {
    /// [left, right][corner]
    pub in_contact: [[bool; 4]; 2],
    pub corner_normal_force: [[f64; 4]; 2],
}

impl ContactSnapshot {
    pub fn foot_normal_force(&self, foot: usize) -> f64 {
        self.corner_normal_force[foot].iter().sum()
    }

    pub fn total_normal_force(&self) -> f64 {
        self.foot_normal_force(0) + self.foot_normal_force(1)
    }

    pub fn foot_in_contact(&self, foot: usize) -> bool {
        self.in_contact[foot].iter().any(|c| *c)
    }
}

/// Penalty contact at the foot sole corners: spring-damper normal force
/// plus velocity-regularized Coulomb friction, returned as external link
/// forces in link coordinates.
pub fn contact_forces(
    model: &RobotModel,
    tree: &BipedTree,
    kin: &TreeKinematics,
    terrain: &TerrainModel,
    cfg: &SimConfig,
) -> ([ForceVec; NUM_LINKS], ContactSnapshot) {
    let corners = model.foot_corners();
    let mut f_ext = [ForceVec::ZERO; NUM_LINKS];
    let mut snapshot = ContactSnapshot::default();

    for (foot, link_idx) in tree.foot_links.iter().copied().enumerate() {
        let xw = &kin.to_world[link_idx];
        let vel = &kin.velocity[link_idx];
        for (c, corner) in corners.iter().enumerate() {
            let p_world = xw.point_to_parent(corner);
            let ground = terrain.height_at(p_world.x, p_world.y);
            let depth = ground - p_world.z;
            if depth <= 0.0 {
                continue;
            }
            // Corner velocity in world coordinates.
            let v_local = vel.lin + vel.ang.cross(corner);
            let v_world = xw.rot * v_local;

            let normal = (cfg.contact_stiffness * depth - cfg.contact_damping * v_world.z).max(0.0);
            let tangent = Vector3::new(v_world.x, v_world.y, 0.0);
            let speed = tangent.norm();
            let friction = if speed > 1e-9 {
                let magnitude = (cfg.friction_damping * speed).min(cfg.friction * normal);
                -tangent * (magnitude / speed)
            } else {
                Vector3::zeros()
            };
            let f_world = Vector3::new(friction.x, friction.y, normal);
            let f_local = xw.rot.inverse() * f_world;
            f_ext[link_idx] = f_ext[link_idx]
                + ForceVec::new(corner.cross(&f_local), f_local);
            snapshot.in_contact[foot][c] = true;
            snapshot.corner_normal_force[foot][c] = normal;
        }
    }
    (f_ext, snapshot)
}
