//! Angles restricted to multiples of π/4, stored as an index mod 8.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};

use serde::{Deserialize, Serialize};

/// The angle `index · π/4`. Arithmetic is exact index arithmetic mod 8,
/// so π corresponds to `+4`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "i64", into = "u8")]
pub struct Angle8(u8);

impl Angle8 {
    pub const ZERO: Angle8 = Angle8(0);
    pub const PI: Angle8 = Angle8(4);

    /// Reduces any integer into `{0..7}`.
    pub fn new(index: i64) -> Self {
        Angle8(index.rem_euclid(8) as u8)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn radians(self) -> f64 {
        f64::from(self.0) * FRAC_PI_4
    }

    /// Adds π, i.e. maps `|+_a>` to the orthogonal `|-_a>`.
    pub fn flip(self) -> Self {
        self + Angle8::PI
    }

    /// Adds π when `bit` is set.
    pub fn flip_if(self, bit: bool) -> Self {
        if bit {
            self.flip()
        } else {
            self
        }
    }

    /// Negates when `bit` is set: `(-1)^bit · a`.
    pub fn negate_if(self, bit: bool) -> Self {
        if bit {
            -self
        } else {
            self
        }
    }

    /// All eight angles in index order.
    pub fn all() -> impl Iterator<Item = Angle8> + Clone {
        (0..8u8).map(Angle8)
    }
}

/// Modular addition of two angles.
pub fn angle_add(a: Angle8, b: Angle8) -> Angle8 {
    a + b
}

impl Add for Angle8 {
    type Output = Angle8;
    fn add(self, rhs: Angle8) -> Angle8 {
        Angle8((self.0 + rhs.0) % 8)
    }
}

impl AddAssign for Angle8 {
    fn add_assign(&mut self, rhs: Angle8) {
        *self = *self + rhs;
    }
}

impl Sub for Angle8 {
    type Output = Angle8;
    fn sub(self, rhs: Angle8) -> Angle8 {
        self + (-rhs)
    }
}

impl Neg for Angle8 {
    type Output = Angle8;
    fn neg(self) -> Angle8 {
        Angle8((8 - self.0) % 8)
    }
}

impl std::iter::Sum for Angle8 {
    fn sum<I: Iterator<Item = Angle8>>(iter: I) -> Angle8 {
        iter.fold(Angle8::ZERO, Add::add)
    }
}

impl From<i64> for Angle8 {
    fn from(index: i64) -> Self {
        Angle8::new(index)
    }
}

impl From<Angle8> for u8 {
    fn from(a: Angle8) -> u8 {
        a.0
    }
}

impl fmt::Display for Angle8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}π/4", self.0)
    }
}
