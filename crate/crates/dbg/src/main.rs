use biped_control::ControlConfig;
use biped_kinematics::*;
use biped_planner::{LessonParams, StepClass};
use biped_rl::{BipedEnv, EpisodeConfig, RewardWeights};
use biped_sim::SimConfig;
use nalgebra::Vector3;

fn main() {
    for noise in [0.0, 0.03] {
        let mut episode = EpisodeConfig::default();
        episode.spawn_posture_noise = noise;
        let mut env = BipedEnv::new(
            RobotModel::default(), ControlConfig::default(), SimConfig::default(),
            RewardWeights::default(), episode, 17,
        );
        let lesson = LessonParams::default().at_difficulty(0.0);
        env.reset_with(StepClass::StandStill, &lesson);
        let mut fell = None;
        for step in 0..1200 {
            let out = env.step(&ActionVector::zeros());
            if step % 200 == 199 || out.done {
                let s = env.sim_state();
                let up = s.base_orientation * Vector3::z();
                println!("noise={noise} t={:.2} tilt={:.1} deg pos=({:+.3},{:+.3},{:.3}) err_trunk={:.3} done={} {:?}",
                    env.elapsed(), up.z.acos().to_degrees(),
                    s.base_position.x, s.base_position.y, s.base_position.z,
                    out.errors.trunk_pos, out.done, out.termination);
            }
            if out.done { fell = Some(step); break; }
        }
        println!("noise={noise}: fell at {:?}", fell);
    }
}
