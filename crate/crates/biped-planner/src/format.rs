use crate::bezier::BezierCurve;
use crate::step::{NodeState, StepClass, SwingLeg, TaskStep, NOMINAL_TRUNK_HEIGHT};
use biped_kinematics::RobotModel;
use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use thiserror::Error;

/// Line-oriented task-program format, one record per step:
///
/// ```text
/// class,period,swing,pTx,pTy,pTz,pLx,pLy,pLz,pRx,pRy,pRz,qw,qx,qy,qz,psiL,psiR[,15 curve floats]
/// ```
///
/// The end state is given in the step-start trunk frame; start states are
/// reconstructed by chaining from the nominal stance. Lines starting with
/// `#` and blank lines are skipped.
pub fn emit_program(steps: &[TaskStep]) -> String {
    let mut out = String::new();
    for step in steps {
        let e = &step.end;
        let q = e.trunk.orientation.quaternion();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            step.class.token(),
            step.period,
            step.swing.token(),
            e.trunk.position.x,
            e.trunk.position.y,
            e.trunk.position.z,
            e.left.position.x,
            e.left.position.y,
            e.left.position.z,
            e.right.position.x,
            e.right.position.y,
            e.right.position.z,
            q.w,
            q.i,
            q.j,
            q.k,
            e.left.yaw,
            e.right.yaw,
        ));
        if let Some(curve) = &step.swing_curve {
            for cp in &curve.control_points {
                out.push_str(&format!(",{},{},{}", cp.x, cp.y, cp.z));
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    InvalidStep {
        line: usize,
        #[source]
        source: crate::step::StepError,
    },
}

fn malformed(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Malformed { line, message: message.into() }
}

/// Parses a task program, chaining start states from the nominal stance.
pub fn parse_program(model: &RobotModel, text: &str) -> Result<Vec<TaskStep>, ParseError> {
    let mut steps: Vec<TaskStep> = Vec::new();
    let mut cursor = NodeState::nominal(model, NOMINAL_TRUNK_HEIGHT);
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 18 && fields.len() != 33 {
            return Err(malformed(line, format!("expected 18 or 33 fields, got {}", fields.len())));
        }
        let class = StepClass::from_token(fields[0])
            .ok_or_else(|| malformed(line, format!("unknown step class '{}'", fields[0])))?;
        let swing = SwingLeg::from_token(fields[2])
            .ok_or_else(|| malformed(line, format!("unknown swing leg '{}'", fields[2])))?;
        let mut nums = Vec::with_capacity(fields.len() - 3);
        for f in &fields[3..] {
            let v: f64 = f
                .parse()
                .map_err(|_| malformed(line, format!("bad float '{f}'")))?;
            if !v.is_finite() {
                return Err(malformed(line, format!("non-finite value '{f}'")));
            }
            nums.push(v);
        }
        let period: f64 = fields[1]
            .parse()
            .map_err(|_| malformed(line, format!("bad period '{}'", fields[1])))?;

        let quat = Quaternion::new(nums[9], nums[10], nums[11], nums[12]);
        if (quat.norm() - 1.0).abs() > 1e-6 {
            return Err(malformed(line, "trunk quaternion is not normalized"));
        }
        let mut end = cursor;
        end.trunk.position = Vector3::new(nums[0], nums[1], nums[2]);
        end.trunk.orientation = UnitQuaternion::new_normalize(quat);
        end.left.position = Vector3::new(nums[3], nums[4], nums[5]);
        end.left.yaw = nums[13];
        end.right.position = Vector3::new(nums[6], nums[7], nums[8]);
        end.right.yaw = nums[14];

        let curve = if fields.len() == 33 {
            let mut cps = [Vector3::zeros(); 5];
            for (k, cp) in cps.iter_mut().enumerate() {
                let base = 15 + 3 * k;
                *cp = Vector3::new(nums[base], nums[base + 1], nums[base + 2]);
            }
            Some(BezierCurve::new(cps))
        } else {
            None
        };

        let step = TaskStep::new(model, class, period, cursor, end, swing, curve)
            .map_err(|source| ParseError::InvalidStep { line, source })?;
        cursor = step.end.rebased();
        steps.push(step);
    }
    Ok(steps)
}
