use biped_kinematics::RobotModel;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Closed interval used for lesson sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.hi <= self.lo {
            return self.lo;
        }
        rng.random_range(self.lo..self.hi)
    }

    /// Samples a magnitude from the range with a random sign.
    pub fn sample_signed(&self, rng: &mut impl Rng) -> f64 {
        let v = self.sample(rng);
        if rng.random_bool(0.5) {
            v
        } else {
            -v
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi
    }
}

/// One rung of a curriculum stage's difficulty ladder: the randomization
/// ranges the task-step sampler draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LessonParams {
    /// Forward/backward step length magnitude, m.
    pub step_length: Range,
    /// Sideways step magnitude, m.
    pub lateral: Range,
    /// Yaw change per turning step, rad.
    pub turn_yaw: Range,
    /// Stair rise magnitude, m.
    pub stair_rise: Range,
    /// Stair run (tread depth), m.
    pub stair_run: Range,
    /// Trunk center height above ground, m.
    pub trunk_height: Range,
    /// Swing apex height above the endpoints, m.
    pub apex_height: Range,
    /// Trunk xy posture offset magnitude for grounded steps, m.
    pub posture_offset: Range,
    /// Trunk yaw magnitude for grounded steps, rad.
    pub posture_yaw: Range,
    /// Trunk pitch/roll magnitude for grounded steps, rad.
    pub posture_tilt: Range,
}

impl Default for LessonParams {
    fn default() -> Self {
        Self {
            step_length: Range::new(0.05, 0.40),
            lateral: Range::new(0.05, 0.25),
            turn_yaw: Range::new(0.1, 0.5),
            stair_rise: Range::new(0.05, 0.17),
            stair_run: Range::new(0.25, 0.40),
            trunk_height: Range::new(0.55, 0.78),
            apex_height: Range::new(0.05, 0.25),
            posture_offset: Range::new(0.0, 0.05),
            posture_yaw: Range::new(0.0, 0.25),
            posture_tilt: Range::new(0.0, 0.10),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum InvalidLesson {
    #[error("lesson range {name} is empty or non-finite")]
    EmptyRange { name: &'static str },
    #[error("lesson range {name} leaves the leg workspace")]
    OutsideWorkspace { name: &'static str },
}

impl LessonParams {
    /// Difficulty-interpolated copy: `f = 0` shrinks every range to its
    /// easy end, `f = 1` is the full lesson.
    pub fn at_difficulty(&self, f: f64) -> LessonParams {
        let f = f.clamp(0.0, 1.0);
        // Upper bounds grow toward the full lesson; the easy end keeps the
        // shortest steps, lowest stairs and tallest trunk.
        let grow = |r: Range| Range::new(r.lo, r.lo + (r.hi - r.lo) * f);
        let mut out = *self;
        out.step_length = grow(self.step_length);
        out.lateral = grow(self.lateral);
        out.turn_yaw = grow(self.turn_yaw);
        out.stair_rise = grow(self.stair_rise);
        out.stair_run = self.stair_run;
        out.trunk_height = Range::new(
            self.trunk_height.hi - (self.trunk_height.hi - self.trunk_height.lo) * f,
            self.trunk_height.hi,
        );
        out.apex_height = grow(self.apex_height);
        out.posture_offset = grow(self.posture_offset);
        out.posture_yaw = grow(self.posture_yaw);
        out.posture_tilt = grow(self.posture_tilt);
        out
    }

    pub fn validate(&self, model: &RobotModel) -> Result<(), InvalidLesson> {
        let named: [(&'static str, Range); 10] = [
            ("step_length", self.step_length),
            ("lateral", self.lateral),
            ("turn_yaw", self.turn_yaw),
            ("stair_rise", self.stair_rise),
            ("stair_run", self.stair_run),
            ("trunk_height", self.trunk_height),
            ("apex_height", self.apex_height),
            ("posture_offset", self.posture_offset),
            ("posture_yaw", self.posture_yaw),
            ("posture_tilt", self.posture_tilt),
        ];
        for (name, r) in named {
            if !r.is_valid() {
                return Err(InvalidLesson::EmptyRange { name });
            }
        }
        // The deepest and tallest trunk targets must keep a straight-down
        // ankle inside the reachable shell.
        let hip_drop = -model.hip_offset(biped_kinematics::Side::Left).z;
        let min_ext = self.trunk_height.lo - model.sole_offset - hip_drop;
        let max_ext = self.trunk_height.hi - model.sole_offset - hip_drop;
        if min_ext < model.workspace_inner() || max_ext > model.workspace_outer() {
            return Err(InvalidLesson::OutsideWorkspace { name: "trunk_height" });
        }
        if self.step_length.hi * 0.5 > model.workspace_outer() {
            return Err(InvalidLesson::OutsideWorkspace { name: "step_length" });
        }
        Ok(())
    }
}
