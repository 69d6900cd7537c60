//! Geometric kernel: barrier segments and the distance, angle and side
//! queries the intensity model is built from.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::ids::{MaterialId, WallId};

/// Lower clamp on every node distance. Bounds `1/dist` at 10.
pub const MIN_DISTANCE: f64 = 0.1;

/// Perpendicular distance below which a node counts as lying on a barrier's line.
pub const SIDE_EPSILON: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).length()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        Vec2::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from((x, y): (f64, f64)) -> Self {
        Vec2::new(x, y)
    }
}

/// A short oriented segment of a wall; the unit the intensity model works on.
#[derive(Clone, Debug, PartialEq)]
pub struct Barrier {
    pub p0: Vec2,
    pub p1: Vec2,
    pub midpoint: Vec2,
    pub length: f64,
    pub material_id: MaterialId,
    pub wall_id: WallId,
}

impl Barrier {
    pub fn new(p0: Vec2, p1: Vec2, material_id: MaterialId, wall_id: WallId) -> Self {
        Self {
            p0,
            p1,
            midpoint: Vec2::new((p0.x + p1.x) * 0.5, (p0.y + p1.y) * 0.5),
            length: p0.distance(p1),
            material_id,
            wall_id,
        }
    }

    pub fn direction(&self) -> Vec2 {
        self.p1 - self.p0
    }

    /// The same segment with its endpoints swapped.
    pub fn reversed(&self) -> Self {
        Barrier::new(self.p1, self.p0, self.material_id.clone(), self.wall_id.clone())
    }
}

/// Which side of a barrier's infinite line a node lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Positive,
    Negative,
    Colinear,
}

impl Side {
    pub fn flipped(self) -> Side {
        match self {
            Side::Positive => Side::Negative,
            Side::Negative => Side::Positive,
            Side::Colinear => Side::Colinear,
        }
    }
}

/// Clamped node-to-node distance.
pub fn node_distance(a: Vec2, b: Vec2) -> f64 {
    a.distance(b).max(MIN_DISTANCE)
}

/// Distance from the barrier's midpoint to `n`, clamped below at [`MIN_DISTANCE`].
pub fn dist(b: &Barrier, n: Vec2) -> f64 {
    node_distance(b.midpoint, n)
}

/// Acute angle in `[0, π/2]` between the barrier's line and the line from
/// its midpoint to `n`. A node sitting exactly on the midpoint gets `π/2`.
pub fn angle(b: &Barrier, n: Vec2) -> f64 {
    let to_node = n - b.midpoint;
    if to_node.x == 0.0 && to_node.y == 0.0 {
        return FRAC_PI_2;
    }
    let dir = b.direction();
    dir.cross(to_node).abs().atan2(dir.dot(to_node).abs())
}

pub fn side(b: &Barrier, n: Vec2) -> Side {
    let cross = b.direction().cross(n - b.p0);
    if cross.abs() / b.length <= SIDE_EPSILON {
        Side::Colinear
    } else if cross > 0.0 {
        Side::Positive
    } else {
        Side::Negative
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn unit_barrier() -> Barrier {
        Barrier::new(Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), "m".into(), "w".into())
    }

    #[test]
    fn dist_examples() {
        let b = unit_barrier();
        assert_eq!(dist(&b, Vec2::new(1.0, 3.0)), 3.0);
        assert_eq!(dist(&b, Vec2::new(1.0, 0.0)), 0.1);
        assert_eq!(dist(&b, Vec2::new(4.0, 4.0)), 5.0);
    }

    #[test]
    fn angle_examples() {
        let b = unit_barrier();
        assert_relative_eq!(angle(&b, Vec2::new(1.0, 3.0)), FRAC_PI_2);
        assert_eq!(angle(&b, Vec2::new(3.0, 0.0)), 0.0);
        let a = angle(&b, Vec2::new(2.0, 1.0));
        assert_relative_eq!(a, FRAC_PI_4, epsilon = 1e-12);
        assert_relative_eq!(a.sin(), 0.70711, epsilon = 1e-5);
        assert_eq!(angle(&b, b.midpoint), FRAC_PI_2);
    }

    #[test]
    fn angle_folds_into_first_quadrant() {
        let b = unit_barrier();
        for k in 0..64 {
            let t = k as f64 / 64.0 * 2.0 * PI;
            let a = angle(&b, b.midpoint + Vec2::new(t.cos(), t.sin()));
            assert!((0.0..=FRAC_PI_2 + 1e-15).contains(&a), "{a}");
        }
    }

    #[test]
    fn side_examples() {
        let b = unit_barrier();
        assert_eq!(side(&b, Vec2::new(1.0, 1.0)), Side::Positive);
        assert_eq!(side(&b, Vec2::new(1.0, -1.0)), Side::Negative);
        assert_eq!(side(&b, Vec2::new(3.0, 0.0)), Side::Colinear);
    }

    #[test]
    fn side_flips_with_reversed_barrier() {
        let b = unit_barrier();
        let r = b.reversed();
        for n in [Vec2::new(0.3, 2.0), Vec2::new(-4.0, -0.1), Vec2::new(5.0, 0.0)] {
            assert_eq!(side(&r, n), side(&b, n).flipped());
        }
    }

    #[test]
    fn midpoint_is_exact() {
        let b = Barrier::new(Vec2::new(0.1, 0.7), Vec2::new(0.3, -0.2), "m".into(), "w".into());
        assert_eq!(b.midpoint, Vec2::new((0.1 + 0.3) * 0.5, (0.7 - 0.2) * 0.5));
    }
}
