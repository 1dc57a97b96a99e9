use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// North-East-Down position or displacement in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Ned {
    pub n: f64,
    pub e: f64,
    pub d: f64,
}

impl Ned {
    pub const fn new(n: f64, e: f64, d: f64) -> Self {
        Self { n, e, d }
    }

    /// Height above the NED origin (`-d`).
    pub fn altitude(&self) -> f64 {
        -self.d
    }

    pub fn norm(&self) -> f64 {
        (self.n * self.n + self.e * self.e + self.d * self.d).sqrt()
    }

    pub fn horizontal_distance(&self, other: &Ned) -> f64 {
        (self.n - other.n).hypot(self.e - other.e)
    }
}

impl Add for Ned {
    type Output = Ned;
    fn add(self, o: Ned) -> Ned {
        Ned::new(self.n + o.n, self.e + o.e, self.d + o.d)
    }
}

impl Sub for Ned {
    type Output = Ned;
    fn sub(self, o: Ned) -> Ned {
        Ned::new(self.n - o.n, self.e - o.e, self.d - o.d)
    }
}

impl Mul<f64> for Ned {
    type Output = Ned;
    fn mul(self, k: f64) -> Ned {
        Ned::new(self.n * k, self.e * k, self.d * k)
    }
}
