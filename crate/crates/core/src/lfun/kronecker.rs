use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};

const TAB8: [i32; 8] = [0, 1, 0, -1, 0, -1, 0, 1];

/// Kronecker symbol (a/b) for arbitrary integers.
pub fn kronecker(a: i64, b: i64) -> i32 {
    let mut a = a as i128;
    let mut b = b as i128;
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    if a % 2 == 0 && b % 2 == 0 {
        return 0;
    }
    let v = b.trailing_zeros();
    b >>= v;
    let mut k = if v.is_multiple_of(2) { 1 } else { TAB8[(a & 7) as usize] };
    if b < 0 {
        b = -b;
        if a < 0 {
            k = -k;
        }
    }
    loop {
        if a == 0 {
            return if b == 1 { k } else { 0 };
        }
        let v = a.trailing_zeros();
        a >>= v;
        if v % 2 == 1 {
            k *= TAB8[(b & 7) as usize];
        }
        if a & b & 2 != 0 {
            k = -k;
        }
        let r = a.abs();
        a = b % r;
        b = r;
    }
}

fn is_squarefree(n: u64) -> bool {
    arith::factorize(n)
        .map(|f| f.iter().all(|&(_, e)| e == 1))
        .unwrap_or(false)
}

/// Whether `d` is a fundamental discriminant.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// The real character n -> (D/n) attached to a discriminant D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct QuadraticCharacter {
    d: i64,
}

impl QuadraticCharacter {
    /// Accepts any nonzero D with D = 0 or 1 (mod 4).
    pub fn new(d: i64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Discriminant { d, reason: "must be nonzero" });
        }
        if !matches!(d.rem_euclid(4), 0 | 1) {
            return Err(Error::Discriminant {
                d,
                reason: "must be congruent to 0 or 1 mod 4",
            });
        }
        Ok(Self { d })
    }

    /// Restricts to negative fundamental discriminants (odd primitive real characters).
    pub fn negative_fundamental(d: i64) -> Result<Self> {
        let chi = Self::new(d)?;
        if d >= 0 {
            return Err(Error::Discriminant { d, reason: "must be negative" });
        }
        if !is_fundamental_discriminant(d) {
            return Err(Error::Discriminant { d, reason: "must be fundamental" });
        }
        Ok(chi)
    }

    pub fn discriminant(&self) -> i64 {
        self.d
    }

    pub fn modulus(&self) -> u64 {
        self.d.unsigned_abs()
    }

    pub fn eval(&self, n: u64) -> i32 {
        kronecker(self.d, n as i64)
    }

    /// Primes dividing D.
    pub fn ramified_primes(&self) -> Vec<u64> {
        arith::prime_divisors(self.d)
    }
}
