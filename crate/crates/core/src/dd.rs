//! Double-double floating point.
//!
//! A value is the unevaluated sum `hi + lo` of two `f64` with `|lo| <= ulp(hi)/2`,
//! which gives about 106 bits (31-32 decimal digits) of significand. The
//! arithmetic follows the classical error-free transformations (Dekker, Knuth)
//! and is fully deterministic: no operation depends on evaluation order beyond
//! what is written here.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Relative precision of the format, 2^-104.
pub const EPSILON: f64 = 4.930_380_657_631_324e-32;

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const TWO: Dd = Dd { hi: 2.0, lo: 0.0 };
    pub const HALF: Dd = Dd { hi: 0.5, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.2246467991473532e-16,
    };
    pub const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.3190468138462996e-17,
    };
    pub const LN10: Dd = Dd {
        hi: std::f64::consts::LN_10,
        lo: -2.1707562233822494e-16,
    };
    pub const SQRT2: Dd = Dd {
        hi: std::f64::consts::SQRT_2,
        lo: -9.667293313452913e-17,
    };
    /// Euler's constant 0.57721566490153286060651209008240243104...
    pub const EULER_GAMMA: Dd = Dd {
        hi: 0.5772156649015329,
        lo: -4.942915152430645e-18,
    };

    pub const fn from_parts(hi: f64, lo: f64) -> Dd {
        Dd { hi, lo }
    }

    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact conversion of any integer with |n| < 2^106.
    pub fn from_i128(n: i128) -> Dd {
        let hi = n as f64;
        // `hi` is integral, and for |n| < 2^106 the remainder fits in an f64 exactly.
        let rem = n - hi as i128;
        let (s, e) = quick_two_sum(hi, rem as f64);
        Dd { hi: s, lo: e }
    }

    pub fn from_u64(n: u64) -> Dd {
        Dd::from_i128(n as i128)
    }

    pub fn from_i64(n: i64) -> Dd {
        Dd::from_i128(n as i128)
    }

    /// `num / den` rounded to double-double.
    pub fn from_ratio(num: i128, den: i128) -> Dd {
        Dd::from_i128(num) / Dd::from_i128(den)
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn is_nan(self) -> bool {
        self.hi.is_nan() || self.lo.is_nan()
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqr(self) -> Dd {
        let (p1, mut p2) = two_prod(self.hi, self.hi);
        p2 += 2.0 * self.hi * self.lo;
        p2 += self.lo * self.lo;
        let (s, e) = quick_two_sum(p1, p2);
        Dd { hi: s, lo: e }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p1, mut p2) = two_prod(self.hi, b);
        p2 += self.lo * b;
        let (s, e) = quick_two_sum(p1, p2);
        Dd { hi: s, lo: e }
    }

    /// Multiplication by a power of two; exact unless the result leaves the normal range.
    pub fn ldexp(self, k: i32) -> Dd {
        // Split the scaling so that intermediate factors stay representable.
        let mut out = self;
        let mut k = k;
        while k != 0 {
            let step = k.clamp(-1000, 1000);
            let f = 2f64.powi(step);
            out = Dd {
                hi: out.hi * f,
                lo: out.lo * f,
            };
            k -= step;
        }
        out
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn floor(self) -> Dd {
        let hi = self.hi.floor();
        if hi == self.hi {
            let lo = self.lo.floor();
            let (s, e) = quick_two_sum(hi, lo);
            Dd { hi: s, lo: e }
        } else {
            Dd { hi, lo: 0.0 }
        }
    }

    pub fn round(self) -> Dd {
        let hi = self.hi.round();
        if hi == self.hi {
            let lo = self.lo.round();
            let (s, e) = quick_two_sum(hi, lo);
            Dd { hi: s, lo: e }
        } else if (hi - self.hi).abs() == 0.5 {
            // tie on the leading word: the trailing word decides the direction
            let down = self.hi.floor();
            let candidate = if self.lo > 0.0 { down + 1.0 } else if self.lo < 0.0 { down } else { hi };
            Dd { hi: candidate, lo: 0.0 }
        } else {
            Dd { hi, lo: 0.0 }
        }
    }

    /// Integer value of an integral `Dd` with magnitude below 2^126.
    pub fn to_i128(self) -> i128 {
        self.hi as i128 + self.lo as i128
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        if self.hi < 0.0 {
            return Dd::new(f64::NAN);
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let ax_dd = Dd::new(ax);
        let diff = (self - ax_dd.sqr()).hi;
        let (s, e) = two_sum(ax, diff * x * 0.5);
        Dd { hi: s, lo: e }
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.78 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let r = self - Dd::LN2.mul_f64(k);
        // exp(r) = (1 + s)^(2^SQUARINGS) with s = expm1(r / 2^SQUARINGS)
        const SQUARINGS: i32 = 10;
        let r = r.ldexp(-SQUARINGS);
        let mut term = r;
        let mut s = r;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = (term * r) / Dd::new(n);
            s += term;
            if term.hi.abs() <= 1e-36 * s.hi.abs().max(1e-300) || n > 30.0 {
                break;
            }
        }
        for _ in 0..SQUARINGS {
            s = s.mul_f64(2.0) + s.sqr();
        }
        (s + Dd::ONE).ldexp(k as i32)
    }

    pub fn ln(self) -> Dd {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Dd::new(f64::NEG_INFINITY)
            } else {
                Dd::new(f64::NAN)
            };
        }
        if self == Dd::ONE {
            return Dd::ZERO;
        }
        // Newton on exp(y) = x; each step doubles the number of correct bits.
        let mut y = Dd::new(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Dd::ONE;
        }
        y
    }

    /// ln(1 + x), accurate for small x.
    pub fn ln_1p(self) -> Dd {
        if self.hi.abs() > 1e-3 {
            return (Dd::ONE + self).ln();
        }
        // atanh series: ln(1+x) = 2 atanh(x / (2 + x))
        let z = self / (Dd::TWO + self);
        let z2 = z.sqr();
        let mut term = z;
        let mut sum = z;
        let mut k = 1.0;
        loop {
            k += 2.0;
            term *= z2;
            let add = term / Dd::new(k);
            sum += add;
            if add.hi.abs() <= 1e-36 * sum.hi.abs() {
                break;
            }
        }
        sum.mul_f64(2.0)
    }

    pub fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// `self^y` for `self > 0`.
    pub fn powf(self, y: Dd) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        (y * self.ln()).exp()
    }

    /// Parses a plain decimal literal such as `-0.577215664901532860606512090082`.
    pub fn parse(text: &str) -> Option<Dd> {
        let text = text.trim();
        let (neg, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text.strip_prefix('+').unwrap_or(text)),
        };
        let (mantissa, exp10) = match body.find(['e', 'E']) {
            Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
            None => (body, 0),
        };
        let mut value = Dd::ZERO;
        let mut scale = 0i32;
        let mut seen_point = false;
        let mut digits = 0;
        for c in mantissa.chars() {
            match c {
                '.' if !seen_point => seen_point = true,
                '0'..='9' => {
                    if digits < 36 {
                        value = value.mul_f64(10.0) + Dd::new(f64::from(c as u8 - b'0'));
                        digits += 1;
                        if seen_point {
                            scale -= 1;
                        }
                    } else if !seen_point {
                        scale += 1;
                    }
                }
                '_' => {}
                _ => return None,
            }
        }
        if digits == 0 {
            return None;
        }
        let value = value * Dd::new(10.0).powi(scale + exp10);
        Some(if neg { -value } else { value })
    }

    /// Fixed-point rendering with `decimals` digits after the point (rounded).
    pub fn to_fixed(self, decimals: usize) -> String {
        if !self.is_finite() {
            return format!("{}", self.hi);
        }
        let neg = self.hi < 0.0;
        let scaled = (self.abs() * Dd::new(10.0).powi(decimals as i32)).round();
        let digits = if scaled.hi < 1e37 {
            scaled.to_i128().to_string()
        } else {
            return format!("{:e}", self.to_f64());
        };
        let digits = if digits.len() <= decimals {
            format!("{}{}", "0".repeat(decimals + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = digits.split_at(digits.len() - decimals);
        let mut out = String::new();
        if neg && scaled.hi != 0.0 {
            out.push('-');
        }
        out.push_str(int_part);
        if decimals > 0 {
            out.push('.');
            out.push_str(frac_part);
        }
        out
    }

    /// Scientific rendering with `sig` significant digits.
    pub fn to_sci(self, sig: usize) -> String {
        if self.hi == 0.0 || !self.is_finite() {
            return format!("{:e}", self.hi);
        }
        let sig = sig.clamp(1, 32);
        let mut e10 = self.hi.abs().log10().floor() as i32;
        let mut m = self.abs() / Dd::new(10.0).powi(e10);
        if m.hi >= 10.0 {
            m /= Dd::new(10.0);
            e10 += 1;
        } else if m.hi < 1.0 {
            m = m.mul_f64(10.0);
            e10 -= 1;
        }
        let mut text = m.to_fixed(sig - 1);
        if text.starts_with("10") {
            e10 += 1;
            text = (m / Dd::new(10.0)).to_fixed(sig - 1);
        }
        format!("{}{}e{}", if self.hi < 0.0 { "-" } else { "" }, text, e10)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::new(x)
    }
}

impl From<i64> for Dd {
    fn from(n: i64) -> Dd {
        Dd::from_i64(n)
    }
}

impl From<u64> for Dd {
    fn from(n: u64) -> Dd {
        Dd::from_u64(n)
    }
}

impl From<u32> for Dd {
    fn from(n: u32) -> Dd {
        Dd::new(f64::from(n))
    }
}

impl From<i32> for Dd {
    fn from(n: i32) -> Dd {
        Dd::new(f64::from(n))
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p1, mut p2) = two_prod(self.hi, b.hi);
        p2 += self.hi * b.lo + self.lo * b.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

macro_rules! scalar_ops {
    ($($trait:ident $method:ident),*) => {$(
        impl $trait<f64> for Dd {
            type Output = Dd;
            fn $method(self, b: f64) -> Dd {
                $trait::$method(self, Dd::new(b))
            }
        }
    )*};
}
scalar_ops!(Add add, Sub sub, Mul mul, Div div);

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, b: Dd) {
        *self = *self * b;
    }
}

impl DivAssign for Dd {
    fn div_assign(&mut self, b: Dd) {
        *self = *self / b;
    }
}

impl std::iter::Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_fixed(p)),
            None => f.write_str(&self.to_sci(32)),
        }
    }
}
