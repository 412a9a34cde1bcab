//! Fixed-step articulated rigid-body simulation of the biped.
//!
//! The robot is integrated in reduced coordinates (6 floating-base DOF
//! plus 12 revolute joints) with semi-implicit Euler substeps. Ground
//! contact uses penalty springs with regularized Coulomb friction at the
//! four corner points of each foot sole.

pub mod contact;
pub mod dynamics;
pub mod spatial;
pub mod terrain;
pub mod world;

pub use contact::ContactSnapshot;
pub use terrain::TerrainModel;
pub use world::{
    measure_nodes, spawn_scenario, NodesMeasurement, NumericalFault, SimConfig, SimState,
    SimWorld, Termination,
};
