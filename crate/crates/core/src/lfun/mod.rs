//! Extended-precision special functions: ζ, Dirichlet L-series of real
//! characters, digamma and Stieltjes constants, Γ, the AGM, and quadrature.
//!
//! Values carry an error bound ([`Approx`]) that accumulates truncation
//! estimates of the series involved plus a rounding allowance.

mod bernoulli;
mod dirichlet;
mod hurwitz;
mod kronecker;
pub mod quad;
mod special;

use serde::Serialize;

use crate::dd::{Dd, EPSILON};
use crate::error::{Error, Result};

pub use dirichlet::{dirichlet_l, dirichlet_l_pair, dirichlet_l_prime, l_log_deriv, l_log_deriv_at_1, LAtOne};
pub use hurwitz::{digamma, hurwitz_pair, stieltjes1, zeta, zeta_log_deriv, zeta_pair, DIRECT_SERIES_FROM};
pub use kronecker::{is_fundamental_discriminant, kronecker, QuadraticCharacter};
pub use special::{agm, euler_gamma, gamma_function, lemniscate_integral, ln_gamma, EULER_GAMMA_LITERAL};

/// Working precision for the extended-precision paths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrecisionContext {
    pub digits: u32,
    pub tolerance: f64,
}

impl PrecisionContext {
    pub const MIN_DIGITS: u32 = 15;
    /// The double-double format resolves about 31 decimal digits.
    pub const MAX_DIGITS: u32 = 31;

    pub fn new(digits: u32) -> Result<Self> {
        if !(Self::MIN_DIGITS..=Self::MAX_DIGITS).contains(&digits) {
            return Err(Error::domain("digits", digits, "15 <= digits <= 31"));
        }
        Ok(Self {
            digits,
            tolerance: 10f64.powi(-(digits as i32)),
        })
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self::new(30).expect("default precision is valid")
    }
}

/// A double-double value with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Approx {
    #[serde(serialize_with = "serialize_dd")]
    pub value: Dd,
    pub error: f64,
}

pub(crate) fn serialize_dd<S: serde::Serializer>(v: &Dd, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_sci(32))
}

impl Approx {
    pub fn new(value: Dd, error: f64) -> Self {
        Self { value, error }
    }

    pub fn exact(value: Dd) -> Self {
        Self {
            value,
            error: 2.0 * EPSILON * value.to_f64().abs(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    fn round(&self) -> f64 {
        4.0 * EPSILON * self.value.to_f64().abs()
    }

    pub fn add(&self, o: &Approx) -> Approx {
        let v = self.value + o.value;
        Approx::new(v, self.error + o.error + 4.0 * EPSILON * v.to_f64().abs())
    }

    pub fn sub(&self, o: &Approx) -> Approx {
        let v = self.value - o.value;
        Approx::new(v, self.error + o.error + 4.0 * EPSILON * v.to_f64().abs())
    }

    pub fn mul(&self, o: &Approx) -> Approx {
        let v = self.value * o.value;
        let e = self.error * o.value.to_f64().abs() + o.error * self.value.to_f64().abs() + self.error * o.error;
        Approx::new(v, e + 4.0 * EPSILON * v.to_f64().abs())
    }

    pub fn div(&self, o: &Approx) -> Approx {
        let v = self.value / o.value;
        let d = o.value.to_f64().abs();
        let e = (self.error + v.to_f64().abs() * o.error) / (d - o.error).max(d * 0.5);
        Approx::new(v, e + 4.0 * EPSILON * v.to_f64().abs())
    }

    pub fn scale(&self, k: f64) -> Approx {
        let v = self.value.mul_f64(k);
        Approx::new(v, self.error * k.abs() + self.round())
    }

    pub fn neg(&self) -> Approx {
        Approx::new(-self.value, self.error)
    }

    pub fn ln(&self) -> Approx {
        let x = self.value.to_f64();
        let v = self.value.ln();
        Approx::new(v, self.error / (x.abs() - self.error).max(x.abs() * 0.5) + 4.0 * EPSILON * v.to_f64().abs())
    }

    pub fn sqrt(&self) -> Approx {
        let v = self.value.sqrt();
        let e = self.error / (2.0 * v.to_f64().max(1e-300));
        Approx::new(v, e + 4.0 * EPSILON * v.to_f64())
    }

    pub fn exp(&self) -> Approx {
        let v = self.value.exp();
        let e = v.to_f64().abs() * (self.error.exp_m1()) + 8.0 * EPSILON * v.to_f64().abs();
        Approx::new(v, e)
    }
}
