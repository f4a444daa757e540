//! Points and axis-aligned boxes. All lengths are nondimensional.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Point3 {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn dist(&self, other: &Point3) -> f64 {
        let dx = self.x1 - other.x1;
        let dy = self.x2 - other.x2;
        let dz = self.x3 - other.x3;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3
    }

    pub fn sub(&self, other: &Point3) -> Point3 {
        Point3::new(self.x1 - other.x1, self.x2 - other.x2, self.x3 - other.x3)
    }

    pub fn add(&self, other: &Point3) -> Point3 {
        Point3::new(self.x1 + other.x1, self.x2 + other.x2, self.x3 + other.x3)
    }

    pub fn scale(&self, c: f64) -> Point3 {
        Point3::new(c * self.x1, c * self.x2, c * self.x3)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub lo: Point3,
    pub hi: Point3,
}

impl Box3 {
    pub fn new(lo: Point3, hi: Point3) -> Self {
        Self { lo, hi }
    }

    pub fn unit_cube() -> Self {
        Self::new(Point3::zero(), Point3::new(1.0, 1.0, 1.0))
    }

    pub fn sides(&self) -> [f64; 3] {
        [
            self.hi.x1 - self.lo.x1,
            self.hi.x2 - self.lo.x2,
            self.hi.x3 - self.lo.x3,
        ]
    }

    pub fn volume(&self) -> f64 {
        let s = self.sides();
        s[0] * s[1] * s[2]
    }

    pub fn center(&self) -> Point3 {
        Point3::new(
            0.5 * (self.lo.x1 + self.hi.x1),
            0.5 * (self.lo.x2 + self.hi.x2),
            0.5 * (self.lo.x3 + self.hi.x3),
        )
    }

    /// Closed-box containment.
    pub fn contains(&self, p: &Point3) -> bool {
        p.x1 >= self.lo.x1
            && p.x1 <= self.hi.x1
            && p.x2 >= self.lo.x2
            && p.x2 <= self.hi.x2
            && p.x3 >= self.lo.x3
            && p.x3 <= self.hi.x3
    }

    pub fn diameter(&self) -> f64 {
        let s = self.sides();
        (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_contains_boundary() {
        let b = Box3::unit_cube();
        assert!(b.contains(&Point3::new(0.0, 0.5, 1.0)));
        assert!(!b.contains(&Point3::new(-1e-12, 0.5, 0.5)));
        assert_eq!(b.volume(), 1.0);
    }
}
