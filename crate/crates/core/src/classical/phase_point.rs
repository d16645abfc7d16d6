use serde::{Deserialize, Serialize};

use crate::error::{LmgError, Result};

/// Point of the disc Q² + P² ≤ 4, with z = (Q²+P²)/2 − 1 and
/// φ = atan2(−P, Q). The boundary circle is the north pole z = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        if !(q.is_finite() && p.is_finite()) || q * q + p * p > 4.0 + 1e-12 {
            return Err(LmgError::InvalidArgument(format!("({q}, {p}) lies outside the disc Q²+P² ≤ 4")));
        }
        Ok(Self { q, p })
    }

    pub fn from_z_phi(z: f64, phi: f64) -> Self {
        let r = (2.0 * (1.0 + z.clamp(-1.0, 1.0))).sqrt();
        Self { q: r * phi.cos(), p: -r * phi.sin() }
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self::from_z_phi(-theta.cos(), phi)
    }

    /// From a unit vector (X, Y, Z) with Z = z.
    pub fn from_unit_vector(v: [f64; 3]) -> Self {
        let phi = v[1].atan2(v[0]);
        Self::from_z_phi(v[2], phi)
    }

    pub fn radius_sqr(&self) -> f64 {
        self.q * self.q + self.p * self.p
    }

    pub fn z(&self) -> f64 {
        (0.5 * self.radius_sqr() - 1.0).clamp(-1.0, 1.0)
    }

    pub fn phi(&self) -> f64 {
        (-self.p).atan2(self.q)
    }

    pub fn theta(&self) -> f64 {
        (-self.z()).acos()
    }

    /// (X, Y, Z) = (sinθ cosφ, sinθ sinφ, z).
    pub fn unit_vector(&self) -> [f64; 3] {
        let z = self.z();
        let s = (0.5 * (1.0 - z)).max(0.0).sqrt();
        [self.q * s, -self.p * s, z]
    }

    /// (Q, P) → (−Q, −P), the image under parity.
    pub fn parity_image(&self) -> Self {
        Self { q: -self.q, p: -self.p }
    }

    /// Great-circle angle to another point.
    pub fn sphere_angle(&self, other: &PhasePoint) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let cx = a[1] * b[2] - a[2] * b[1];
        let cy = a[2] * b[0] - a[0] * b[2];
        let cz = a[0] * b[1] - a[1] * b[0];
        (cx * cx + cy * cy + cz * cz).sqrt().atan2(dot)
    }
}
