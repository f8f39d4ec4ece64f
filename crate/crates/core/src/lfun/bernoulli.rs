//! Bernoulli numbers as exact rationals, rounded once to double-double.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::dd::Dd;

/// Highest index 2j for which coefficients are tabulated.
pub const MAX_INDEX: usize = 160;

pub struct BernoulliTable {
    /// `b2[j] = B_{2j}` for j = 0..=MAX_INDEX/2.
    pub b2: Vec<Dd>,
    /// `scaled[j] = B_{2j} / (2j)!`.
    pub scaled: Vec<Dd>,
}

fn big_to_dd(n: &BigInt) -> Dd {
    let hi = n.to_f64().unwrap_or(f64::NAN);
    if !hi.is_finite() {
        return Dd::new(hi);
    }
    // `hi` may exceed the i128 range; use the exact float decomposition then.
    let hi_exact = if hi.abs() < 1.0e37 {
        BigInt::from(hi as i128)
    } else {
        let (mantissa, exponent, sign) = num_traits::float::FloatCore::integer_decode(hi);
        let m = BigInt::from(mantissa) * i32::from(sign);
        if exponent >= 0 {
            m << exponent as usize
        } else {
            m >> (-exponent) as usize
        }
    };
    let rem = n - hi_exact;
    let lo = rem.to_f64().unwrap_or(0.0);
    Dd::new(hi) + Dd::new(lo)
}

fn rational_to_dd(r: &BigRational) -> Dd {
    big_to_dd(r.numer()) / big_to_dd(r.denom())
}

/// Exact B_0..B_n by the Akiyama-Tanigawa transform (B_1 = +1/2 convention, unused here).
fn bernoulli_exact(n: usize) -> Vec<BigRational> {
    let mut a: Vec<BigRational> = Vec::with_capacity(n + 1);
    let mut out = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(BigRational::new(BigInt::one(), BigInt::from(m as u64 + 1)));
        for j in (1..=m).rev() {
            let diff = &a[j - 1] - &a[j];
            a[j - 1] = diff * BigRational::from_integer(BigInt::from(j as u64));
        }
        out.push(a[0].clone());
    }
    out
}

pub fn table() -> &'static BernoulliTable {
    static TABLE: OnceLock<BernoulliTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let exact = bernoulli_exact(MAX_INDEX);
        let mut b2 = Vec::new();
        let mut scaled = Vec::new();
        let mut factorial = BigInt::one();
        for (k, b) in exact.iter().enumerate() {
            if k > 0 {
                factorial *= BigInt::from(k as u64);
            }
            if k % 2 == 0 {
                b2.push(rational_to_dd(b));
                let s = b / BigRational::from_integer(factorial.clone());
                debug_assert!(k == 0 || s.is_positive() == (k % 4 == 2));
                scaled.push(rational_to_dd(&s));
            }
        }
        BernoulliTable { b2, scaled }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let t = table();
        let expect = [(1usize, 1.0 / 6.0), (2, -1.0 / 30.0), (3, 1.0 / 42.0), (6, 691.0 / -2730.0)];
        for (j, v) in expect {
            assert!((t.b2[j].to_f64() - v).abs() < 1e-15 * v.abs(), "B_{}", 2 * j);
        }
        // B_12 = -691/2730 exactly, to double-double precision
        let b12 = Dd::from_ratio(-691, 2730);
        assert!((t.b2[6] - b12).abs().to_f64() < 1e-32);
        // B_{2j}/(2j)! ~ (-1)^{j+1} 2/(2 pi)^{2j} for large j
        let j = 40;
        let approx = 2.0 / (2.0 * std::f64::consts::PI).powi(2 * j as i32);
        assert!((t.scaled[j].to_f64().abs() / approx - 1.0).abs() < 1e-12);
    }
}
