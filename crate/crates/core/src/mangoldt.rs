//! The generalised von Mangoldt function Λ_S, defined by
//! -L_S'(s)/L_S(s) = Σ Λ_S(n) n^{-s}.
//!
//! Λ_S vanishes off prime powers and Λ_S(p^e) = c_S(p^e) log p with integer
//! coefficients. Three evaluations of c_S are provided and compared exactly:
//! the recursion, the composition sum and the partition (multinomial) sum.

use num_rational::Ratio;
use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::setspec::SetDescriptor;
use crate::sieve;

/// Largest exponent accepted by the closed forms.
pub const CLOSED_FORM_MAX_E: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MangoldtValue {
    pub p: u64,
    pub e: u32,
    pub coeff: i64,
    pub value: f64,
}

impl MangoldtValue {
    fn new(p: u64, e: u32, coeff: i64) -> Self {
        Self { p, e, coeff, value: coeff as f64 * (p as f64).ln() }
    }
}

fn overflow(e: u32) -> Error {
    Error::Capacity { what: "Mangoldt coefficient exponent", value: u64::from(e), bound: 0 }
}

/// c_S(p^1..p^e) from a row χ_S(p^0..p^e) by
/// c(p^e) = e χ(p^e) - Σ_{j<e} c(p^j) χ(p^{e-j}).
pub fn coefficients_from_row(row: &[u8]) -> Result<Vec<i64>> {
    let e_max = row.len().saturating_sub(1);
    let mut c = vec![0i64; e_max + 1];
    for e in 1..=e_max {
        let mut v = e as i64 * i64::from(row[e]);
        for j in 1..e {
            if row[e - j] != 0 {
                v = v.checked_sub(c[j]).ok_or_else(|| overflow(e as u32))?;
            }
        }
        c[e] = v;
    }
    Ok(c)
}

/// Λ_S(p^e) by the recursion.
pub fn lambda_recursive(desc: &SetDescriptor, p: u64, e: u32) -> Result<MangoldtValue> {
    check_args(p, e)?;
    let row = desc.exponent_row(p, e)?;
    let c = coefficients_from_row(&row)?;
    Ok(MangoldtValue::new(p, e, c[e as usize]))
}

fn check_args(p: u64, e: u32) -> Result<()> {
    if !arith::is_prime(p) {
        return Err(Error::domain("p", p, "p prime"));
    }
    if e == 0 {
        return Err(Error::domain("e", e, "e >= 1"));
    }
    Ok(())
}

/// e Σ_m (-1)^{m-1}/m Σ_{k_1+...+k_m = e, k_i >= 1} χ(p^{k_1})···χ(p^{k_m}),
/// the inner sums counted exactly by dynamic programming over m.
pub fn composition_coefficient(row: &[u8], e: u32) -> Ratio<i128> {
    let e = e as usize;
    // ways[s] = weighted number of compositions of s into the current number of parts
    let mut ways = vec![0i128; e + 1];
    ways[0] = 1;
    let mut total = Ratio::from_integer(0i128);
    for m in 1..=e {
        let mut next = vec![0i128; e + 1];
        for s in 0..=e {
            if ways[s] == 0 {
                continue;
            }
            for k in 1..=e - s {
                if row[k] != 0 {
                    next[s + k] += ways[s];
                }
            }
        }
        ways = next;
        if ways[e] != 0 {
            let sign = if m % 2 == 1 { 1 } else { -1 };
            total += Ratio::new(sign * ways[e], m as i128);
        }
    }
    total * Ratio::from_integer(e as i128)
}

fn factorial(n: u32) -> i128 {
    (1..=i128::from(n)).product()
}

/// e·W with W = Σ_{l_1+2l_2+...+e l_e = e} (-1)^{L-1}/L · L!/(l_1!···l_e!) · Π χ(p^j)^{l_j},
/// L = l_1 + ... + l_e.
pub fn partition_coefficient(row: &[u8], e: u32) -> Ratio<i128> {
    fn walk(row: &[u8], part: u32, remaining: u32, ls: &mut Vec<u32>, acc: &mut Ratio<i128>) {
        if remaining == 0 {
            let l: u32 = ls.iter().sum();
            let mut weight = factorial(l);
            for (j, &lj) in ls.iter().enumerate() {
                if lj > 0 && row[j + 1] == 0 {
                    return;
                }
                weight /= factorial(lj);
            }
            let sign = if l % 2 == 1 { 1 } else { -1 };
            *acc += Ratio::new(sign * weight, i128::from(l));
            return;
        }
        if part == 0 {
            return;
        }
        for lj in (0..=remaining / part).rev() {
            ls[part as usize - 1] = lj;
            walk(row, part - 1, remaining - lj * part, ls, acc);
        }
        ls[part as usize - 1] = 0;
    }
    let mut ls = vec![0u32; e as usize];
    let mut acc = Ratio::from_integer(0i128);
    walk(row, e, e, &mut ls, &mut acc);
    acc * Ratio::from_integer(i128::from(e))
}

fn integral(r: Ratio<i128>, e: u32) -> Result<i64> {
    if !r.is_integer() {
        return Err(Error::Validation {
            name: "mangoldt".into(),
            message: format!("closed form gave the non-integer coefficient {r} at e = {e}"),
        });
    }
    i64::try_from(r.to_integer()).map_err(|_| overflow(e))
}

/// Λ_S(p^e) by the composition-sum closed form.
pub fn lambda_closed(desc: &SetDescriptor, p: u64, e: u32) -> Result<MangoldtValue> {
    check_args(p, e)?;
    if e > CLOSED_FORM_MAX_E {
        return Err(Error::Capacity { what: "closed-form exponent", value: u64::from(e), bound: u64::from(CLOSED_FORM_MAX_E) });
    }
    let row = desc.exponent_row(p, e)?;
    Ok(MangoldtValue::new(p, e, integral(composition_coefficient(&row, e), e)?))
}

/// Λ_S(p^e) by the partition-sum closed form.
pub fn lambda_partition(desc: &SetDescriptor, p: u64, e: u32) -> Result<MangoldtValue> {
    check_args(p, e)?;
    if e > CLOSED_FORM_MAX_E {
        return Err(Error::Capacity { what: "closed-form exponent", value: u64::from(e), bound: u64::from(CLOSED_FORM_MAX_E) });
    }
    let row = desc.exponent_row(p, e)?;
    Ok(MangoldtValue::new(p, e, integral(partition_coefficient(&row, e), e)?))
}

/// Λ_S(n) for any n >= 1 (zero off prime powers).
pub fn lambda(desc: &SetDescriptor, n: u64) -> Result<f64> {
    if n <= 1 {
        return Ok(0.0);
    }
    let f = arith::factorize(n)?;
    if f.len() != 1 {
        return Ok(0.0);
    }
    let (p, e) = f[0];
    Ok(lambda_recursive(desc, p, e)?.value)
}

const PRIME_BLOCK: usize = 1 << 14;

/// Σ_{p^e <= x} Λ_S(p^e)/p^e, summed in a fixed block order so the result
/// does not depend on the thread count.
pub fn mangoldt_partial_sum_with(desc: &SetDescriptor, x: u64, primes: &sieve::PrimeTable, exec: Exec) -> Result<f64> {
    if x < 2 {
        return Ok(0.0);
    }
    if x > primes.bound() {
        return Err(Error::Capacity { what: "x for the Mangoldt sum", value: x, bound: primes.bound() });
    }
    let ps = &primes.primes()[..primes.pi(x)];
    let nblocks = ps.len().div_ceil(PRIME_BLOCK);
    let parts = par::map_indexed(exec, nblocks, |b| -> Result<(f64, f64)> {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut add = |v: f64| {
            // Neumaier summation
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
        };
        for &p in &ps[b * PRIME_BLOCK..((b + 1) * PRIME_BLOCK).min(ps.len())] {
            let lp = (p as f64).ln();
            if p.saturating_mul(p) > x {
                if desc.allows(p, 1)? {
                    add(lp / p as f64);
                }
                continue;
            }
            let mut e_max = 1u32;
            let mut pe = p;
            while let Some(next) = pe.checked_mul(p).filter(|&n| n <= x) {
                pe = next;
                e_max += 1;
            }
            let row = desc.exponent_row(p, e_max)?;
            let c = coefficients_from_row(&row)?;
            let mut pe = 1f64;
            for &ce in c.iter().skip(1) {
                pe *= p as f64;
                if ce != 0 {
                    add(ce as f64 * lp / pe);
                }
            }
        }
        Ok((sum, comp))
    });
    let mut total = 0.0f64;
    let mut comp = 0.0f64;
    for part in parts {
        let (s, c) = part?;
        total += s;
        comp += c;
    }
    Ok(total + comp)
}

pub fn mangoldt_partial_sum(desc: &SetDescriptor, x: u64) -> Result<f64> {
    if x < 2 {
        return Ok(0.0);
    }
    let primes = sieve::primes_up_to(x)?;
    mangoldt_partial_sum_with(desc, x, &primes, Exec::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setspec::{builtin, chi};

    #[test]
    fn known_values() {
        let nat = builtin("naturals", None).unwrap();
        for (p, e) in [(2, 1), (2, 5), (3, 3), (101, 2)] {
            let v = lambda_recursive(&nat, p, e).unwrap();
            assert_eq!(v.coeff, 1);
            assert!((v.value - (p as f64).ln()).abs() < 1e-15);
        }
        let b = builtin("sum2sq", None).unwrap();
        let cs: Vec<i64> = (1..=4).map(|e| lambda_recursive(&b, 7, e).unwrap().coeff).collect();
        assert_eq!(cs, vec![0, 2, 0, 2]);
        assert_eq!(lambda_recursive(&b, 2, 3).unwrap().coeff, 1);
        assert!((lambda_closed(&nat, 2, 3).unwrap().value - 2f64.ln()).abs() < 1e-15);
        assert!((lambda_closed(&b, 3, 2).unwrap().value - 2.0 * 3f64.ln()).abs() < 1e-15);
        assert!(lambda_closed(&b, 3, 13).is_err());
    }

    #[test]
    fn closed_forms_match_recursion_on_fixed_rows() {
        // every 0/1 row of length 8 with χ(1) = 1
        for mask in 0u32..256 {
            let mut row = vec![1u8];
            row.extend((0..8).map(|i| ((mask >> i) & 1) as u8));
            let rec = coefficients_from_row(&row).unwrap();
            for e in 1..=8u32 {
                assert_eq!(composition_coefficient(&row, e), Ratio::from_integer(i128::from(rec[e as usize])), "row {row:?} e {e}");
                if e <= 6 {
                    assert_eq!(partition_coefficient(&row, e), Ratio::from_integer(i128::from(rec[e as usize])), "row {row:?} e {e}");
                }
            }
        }
    }

    #[test]
    fn partial_sum_small() {
        let nat = builtin("naturals", None).unwrap();
        let want = 2f64.ln() / 2.0 + 3f64.ln() / 3.0 + 2f64.ln() / 4.0 + 5f64.ln() / 5.0 + 7f64.ln() / 7.0 + 2f64.ln() / 8.0 + 3f64.ln() / 9.0;
        assert!((mangoldt_partial_sum(&nat, 10).unwrap() - want).abs() < 1e-14);
        assert!((want - 1.69465).abs() < 1e-5);
        assert_eq!(mangoldt_partial_sum(&nat, 1).unwrap(), 0.0);
    }

    #[test]
    fn convolution_identity_small() {
        for name in ["naturals", "sum2sq", "hex", "phi-nondiv:5"] {
            let d = builtin(name, None).unwrap();
            for n in 1..=300u64 {
                let lhs = f64::from(chi(&d, n).unwrap()) * (n as f64).ln();
                let mut rhs = 0.0;
                for k in (1..=n).filter(|k| n % k == 0) {
                    rhs += f64::from(chi(&d, n / k).unwrap()) * lambda(&d, k).unwrap();
                }
                assert!((lhs - rhs).abs() < 1e-9, "{name} n={n}");
            }
        }
    }

    #[test]
    fn deterministic_across_policies() {
        let d = builtin("quadsem:-7", None).unwrap();
        let primes = sieve::primes_up_to(2_000_000).unwrap();
        let a = mangoldt_partial_sum_with(&d, 2_000_000, &primes, Exec::Sequential).unwrap();
        let b = mangoldt_partial_sum_with(&d, 2_000_000, &primes, Exec::default()).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
