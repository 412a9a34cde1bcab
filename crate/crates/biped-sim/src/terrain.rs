use serde::{Deserialize, Serialize};

/// Ground geometry: flat plane or an axis-aligned staircase along +x.
/// The height query is piecewise-constant and defined over the whole
/// plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TerrainModel {
    Flat,
    Staircase {
        /// x of the first riser.
        origin_x: f64,
        /// Signed height change per tread (negative descends).
        rise: f64,
        /// Tread depth, m.
        run: f64,
        count: usize,
    },
}

impl TerrainModel {
    pub fn height_at(&self, x: f64, _y: f64) -> f64 {
        match self {
            TerrainModel::Flat => 0.0,
            TerrainModel::Staircase { origin_x, rise, run, count } => {
                if x < *origin_x {
                    return 0.0;
                }
                let k = ((x - origin_x) / run).floor() as i64 + 1;
                let k = k.clamp(0, *count as i64);
                k as f64 * rise
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn staircase_heights() {
        let t = TerrainModel::Staircase { origin_x: 0.2, rise: 0.1, run: 0.3, count: 3 };
        assert_relative_eq!(t.height_at(-5.0, 0.0), 0.0);
        assert_relative_eq!(t.height_at(0.19, 0.0), 0.0);
        assert_relative_eq!(t.height_at(0.21, 0.0), 0.1);
        assert_relative_eq!(t.height_at(0.55, 0.0), 0.2);
        assert_relative_eq!(t.height_at(0.85, 0.0), 0.3);
        // Plateau past the last tread.
        assert_relative_eq!(t.height_at(100.0, 0.0), 0.3);
    }

    #[test]
    fn descending_staircase() {
        let t = TerrainModel::Staircase { origin_x: 0.0, rise: -0.12, run: 0.3, count: 2 };
        assert_relative_eq!(t.height_at(0.1, 0.0), -0.12);
        assert_relative_eq!(t.height_at(0.4, 0.0), -0.24);
        assert_relative_eq!(t.height_at(2.0, 0.0), -0.24);
    }
}
