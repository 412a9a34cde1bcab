use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Degree-4 Bezier curve over phase `s` in [0, 1], used for ankle swing
/// trajectories. The curve starts at the first control point, ends at the
/// last, and stays inside the convex hull of all five.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BezierCurve {
    pub control_points: [Vector3<f64>; 5],
}

impl BezierCurve {
    pub fn new(control_points: [Vector3<f64>; 5]) -> Self {
        Self { control_points }
    }

    /// Curve point at phase `s` (clamped to [0, 1]), Bernstein form.
    pub fn at(&self, s: f64) -> Vector3<f64> {
        let s = s.clamp(0.0, 1.0);
        let t = 1.0 - s;
        let b = [
            t * t * t * t,
            4.0 * t * t * t * s,
            6.0 * t * t * s * s,
            4.0 * t * s * s * s,
            s * s * s * s,
        ];
        let mut p = Vector3::zeros();
        for (w, cp) in b.iter().zip(self.control_points.iter()) {
            p += *w * cp;
        }
        p
    }

    /// Phase derivative dP/ds at `s`.
    pub fn derivative_at(&self, s: f64) -> Vector3<f64> {
        let s = s.clamp(0.0, 1.0);
        let t = 1.0 - s;
        let c = &self.control_points;
        let d = [c[1] - c[0], c[2] - c[1], c[3] - c[2], c[4] - c[3]];
        let b = [t * t * t, 3.0 * t * t * s, 3.0 * t * s * s, s * s * s];
        4.0 * (b[0] * d[0] + b[1] * d[1] + b[2] * d[2] + b[3] * d[3])
    }

    pub fn start(&self) -> Vector3<f64> {
        self.control_points[0]
    }

    pub fn end(&self) -> Vector3<f64> {
        self.control_points[4]
    }

    /// Highest z value over a dense phase sweep.
    pub fn max_height(&self, samples: usize) -> f64 {
        (0..=samples)
            .map(|i| self.at(i as f64 / samples as f64).z)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Swing-curve template: interior points sit at apex height `h` above the
/// endpoints, the middle point above the horizontal midpoint.
pub fn swing_curve(start: Vector3<f64>, end: Vector3<f64>, apex: f64) -> BezierCurve {
    let mid = 0.5 * (start + end);
    let top = start.z.max(end.z) + apex;
    BezierCurve::new([
        start,
        Vector3::new(start.x, start.y, start.z + apex),
        Vector3::new(mid.x, mid.y, top),
        Vector3::new(end.x, end.y, end.z + apex),
        end,
    ])
}
