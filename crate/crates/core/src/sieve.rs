//! Prime tables, characteristic tables χ_S(n) for n <= N, and the log-lcm of
//! k² + 1.
//!
//! Characteristic tables are built multiplicatively: every entry starts at 1
//! and, for each prime p with a forbidden exponent e (p^e <= N), the integers
//! with v_p(n) = e exactly are cleared. Work is O(N log log N) and proceeds
//! in independent segments, which run in parallel.

use std::time::{Duration, Instant};

use crate::arith;
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::setspec::SetDescriptor;

/// Default segment length (entries).
pub const DEFAULT_SEGMENT: usize = 1 << 22;

/// Largest supported sieve bound.
pub const MAX_BOUND: u64 = 4_000_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// π(x) for x <= bound.
    pub fn pi(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }
}

fn small_primes(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut is = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if is[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                is[j] = false;
                j += i;
            }
        }
    }
    out
}

/// Primes in [lo, hi) given all primes up to √hi.
fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let len = (hi - lo) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p >= hi {
            break;
        }
        let mut m = (lo.div_ceil(p) * p).max(p * p);
        while m < hi {
            composite[(m - lo) as usize] = true;
            m += p;
        }
    }
    (0..len)
        .filter(|&i| !composite[i] && lo + i as u64 >= 2)
        .map(|i| lo + i as u64)
        .collect()
}

pub fn primes_up_to_with(n: u64, exec: Exec, segment: usize) -> Result<PrimeTable> {
    if n < 2 {
        return Err(Error::domain("N", n, "N >= 2"));
    }
    if n > MAX_BOUND {
        return Err(Error::Capacity { what: "prime table bound", value: n, bound: MAX_BOUND });
    }
    let base = small_primes((n as f64).sqrt() as u64 + 1);
    let seg = segment.max(1024) as u64;
    let nseg = (n / seg + 1) as usize;
    let parts = par::map_indexed(exec, nseg, |i| {
        let lo = i as u64 * seg;
        let hi = (lo + seg).min(n + 1);
        sieve_segment(lo, hi, &base)
    });
    Ok(PrimeTable { bound: n, primes: parts.concat() })
}

/// Exact table of primes <= N.
pub fn primes_up_to(n: u64) -> Result<PrimeTable> {
    primes_up_to_with(n, Exec::default(), DEFAULT_SEGMENT)
}

// ---------------------------------------------------------------- χ tables

/// Construction statistics of a characteristic table.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuildStats {
    pub segment: usize,
    pub wall_time: Duration,
}

/// χ_S(n) for 1 <= n <= N, one bit per entry, with per-word prefix counts.
#[derive(Clone, Debug)]
pub struct CharTable {
    name: String,
    bound: u64,
    /// Bit n of the stream is χ_S(n); bit 0 is 0.
    words: Vec<u64>,
    /// `prefix[w]` = number of set bits in words[..w].
    prefix: Vec<u64>,
    pub stats: BuildStats,
}

impl PartialEq for CharTable {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.bound == other.bound && self.words == other.words
    }
}

impl CharTable {
    pub(crate) fn from_words(name: &str, bound: u64, mut words: Vec<u64>, stats: BuildStats) -> Self {
        let need = (bound / 64 + 1) as usize;
        words.truncate(need);
        words.resize(need, 0);
        // clear bit 0 and everything above `bound`
        words[0] &= !1;
        let last_bits = (bound % 64) + 1;
        if last_bits < 64 {
            words[need - 1] &= (1u64 << last_bits) - 1;
        }
        let mut prefix = Vec::with_capacity(need + 1);
        let mut acc = 0u64;
        prefix.push(0);
        for w in &words {
            acc += u64::from(w.count_ones());
            prefix.push(acc);
        }
        Self { name: name.to_string(), bound, words, prefix, stats }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// χ_S(n).
    pub fn get(&self, n: u64) -> Result<u8> {
        if n == 0 || n > self.bound {
            return Err(Error::domain("n", n, "1 <= n <= table bound"));
        }
        Ok(((self.words[(n / 64) as usize] >> (n % 64)) & 1) as u8)
    }

    /// S(n) for integer n <= N.
    pub fn count_upto(&self, n: u64) -> u64 {
        let n = n.min(self.bound);
        let w = (n / 64) as usize;
        let bits = n % 64 + 1;
        let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
        self.prefix[w] + u64::from((self.words[w] & mask).count_ones())
    }

    /// S(x) = #{n <= x : n ∈ S} for real 0 <= x <= N.
    pub fn count(&self, x: f64) -> Result<u64> {
        if !(x >= 0.0) || x.floor() > self.bound as f64 {
            return Err(Error::domain("x", x, "0 <= x <= table bound"));
        }
        Ok(self.count_upto(x.floor() as u64))
    }

    /// Members in ascending order (for small tables and tests).
    pub fn members(&self) -> Vec<u64> {
        (1..=self.bound).filter(|&n| self.get(n).unwrap_or(0) == 1).collect()
    }
}

/// A prime with the exponents e >= 1 (p^e <= N) that are forbidden for it,
/// as a bit mask over e.
#[derive(Clone, Copy, Debug)]
struct Forbidden {
    p: u64,
    mask: u64,
}

/// Precomputed sieving plan: primes with at least one forbidden exponent.
pub struct CharSieve<'a> {
    desc: &'a SetDescriptor,
    bound: u64,
    segment: usize,
    forbidden: Vec<Forbidden>,
}

impl<'a> CharSieve<'a> {
    pub fn new(desc: &'a SetDescriptor, bound: u64, segment: usize, exec: Exec) -> Result<Self> {
        if bound == 0 {
            return Err(Error::domain("N", bound, "N >= 1"));
        }
        if bound > MAX_BOUND {
            return Err(Error::Capacity { what: "characteristic table bound", value: bound, bound: MAX_BOUND });
        }
        let segment = (segment.max(64) / 64) * 64;
        let mut forbidden = Vec::new();
        if let Some(q) = desc.tau_modulus() {
            if desc.backing_bound() < bound {
                return Err(Error::BackingBound { q, bound: desc.backing_bound(), n: bound });
            }
        } else if bound >= 2 {
            let primes = primes_up_to_with(bound, exec, DEFAULT_SEGMENT)?;
            for &p in primes.primes() {
                let mut mask = 0u64;
                let mut pe = p;
                let mut e = 1u32;
                loop {
                    if !desc.allows(p, e)? {
                        mask |= 1 << e;
                    }
                    match pe.checked_mul(p) {
                        Some(next) if next <= bound => {
                            pe = next;
                            e += 1;
                        }
                        _ => break,
                    }
                }
                if mask != 0 {
                    forbidden.push(Forbidden { p, mask });
                }
            }
        }
        Ok(Self { desc, bound, segment, forbidden })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn segment_len(&self) -> usize {
        self.segment
    }

    pub fn segment_count(&self) -> usize {
        (self.bound / self.segment as u64 + 1) as usize
    }

    /// Packed bits of segment i, covering n in [i·L, (i+1)·L).
    pub fn segment(&self, i: usize) -> Vec<u64> {
        let lo = i as u64 * self.segment as u64;
        let hi = (lo + self.segment as u64).min(self.bound + 1);
        let nwords = self.segment / 64;
        if let (Some(_), Some(table)) = (self.desc.tau_modulus(), self.desc.tau_table()) {
            let mut words = vec![0u64; nwords];
            for n in lo.max(1)..hi {
                if table.get(n).map(|v| v != 0).unwrap_or(false) {
                    let off = n - lo;
                    words[(off / 64) as usize] |= 1 << (off % 64);
                }
            }
            return words;
        }
        let mut words = vec![u64::MAX; nwords];
        let clear = |words: &mut [u64], n: u64| {
            let off = n - lo;
            words[(off / 64) as usize] &= !(1u64 << (off % 64));
        };
        for f in &self.forbidden {
            if f.p >= hi {
                break;
            }
            let mut pe = f.p;
            let mut e = 1u32;
            loop {
                if f.mask & (1 << e) != 0 {
                    // multiples of p^e in [lo, hi) not divisible by p^{e+1}
                    let mut m = lo.div_ceil(pe).max(1) * pe;
                    let mut k = m / pe;
                    while m < hi {
                        if k % f.p != 0 {
                            clear(&mut words, m);
                        }
                        m += pe;
                        k += 1;
                    }
                }
                match pe.checked_mul(f.p) {
                    Some(next) if next < hi => {
                        pe = next;
                        e += 1;
                    }
                    _ => break,
                }
            }
        }
        words
    }
}

/// χ_S(n) for all n <= N.
pub fn build_char_table_with(desc: &SetDescriptor, n: u64, exec: Exec, segment: usize) -> Result<CharTable> {
    let start = Instant::now();
    let plan = CharSieve::new(desc, n, segment, exec)?;
    let parts = par::map_indexed(exec, plan.segment_count(), |i| plan.segment(i));
    let words = parts.concat();
    let stats = BuildStats { segment: plan.segment_len(), wall_time: start.elapsed() };
    Ok(CharTable::from_words(&desc.name, n, words, stats))
}

pub fn build_char_table(desc: &SetDescriptor, n: u64) -> Result<CharTable> {
    build_char_table_with(desc, n, Exec::default(), DEFAULT_SEGMENT)
}

/// S(x) from a table.
pub fn count(table: &CharTable, x: f64) -> Result<u64> {
    table.count(x)
}

/// π_S(x) = #{p <= x : p ∈ S} using a prime table covering x.
pub fn pi_s_with(desc: &SetDescriptor, x: f64, primes: &PrimeTable) -> Result<u64> {
    if !(x >= 0.0) {
        return Err(Error::domain("x", x, "x >= 0"));
    }
    let x = x.floor() as u64;
    if x > primes.bound() {
        return Err(Error::Capacity { what: "x for pi_S", value: x, bound: primes.bound() });
    }
    let mut c = 0;
    for &p in &primes.primes()[..primes.pi(x)] {
        if desc.allows(p, 1)? {
            c += 1;
        }
    }
    Ok(c)
}

pub fn pi_s(desc: &SetDescriptor, x: f64) -> Result<u64> {
    if x < 2.0 {
        return if x >= 0.0 { Ok(0) } else { Err(Error::domain("x", x, "x >= 0")) };
    }
    let primes = primes_up_to(x.floor() as u64)?;
    pi_s_with(desc, x, &primes)
}

// ---------------------------------------------------------------- lcm(k²+1)

/// Largest n accepted by [`log_lcm_f`].
pub const LCM_MAX_N: u64 = 100_000_000;

/// A square root of -1 modulo the prime p ≡ 1 (mod 4).
fn sqrt_minus_one(p: u64) -> u64 {
    for c in 2..p {
        // c^((p-1)/4) squares to c^((p-1)/2) = -1 for a non-residue c
        let r = arith::pow_mod(c, (p - 1) / 4, p);
        if arith::mul_mod(r, r, p) == p - 1 {
            return r;
        }
    }
    unreachable!("p ≡ 1 (mod 4) has a non-residue")
}

/// log lcm(1²+1, 2²+1, ..., n²+1) = Σ_p max_k v_p(k²+1) log p.
///
/// Primes up to n are divided out along the residue classes of the roots
/// of x² ≡ -1 (mod p); what is left of each k²+1 is 1 or a single prime
/// larger than n (a product of two such primes would exceed (n+1)²).
pub fn log_lcm_f(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n", n, "n >= 1"));
    }
    if n > LCM_MAX_N {
        return Err(Error::Capacity { what: "n for log lcm", value: n, bound: LCM_MAX_N });
    }
    let mut rest: Vec<u64> = (0..=n).map(|k| k * k + 1).collect();
    let mut total = 0.0f64;
    let primes = if n >= 2 { primes_up_to(n)?.primes().to_vec() } else { Vec::new() };
    for p in primes {
        let roots: Vec<u64> = match p {
            2 => vec![1],
            _ if p % 4 == 1 => {
                let r = sqrt_minus_one(p);
                vec![r, p - r]
            }
            _ => continue,
        };
        let mut max_e = 0u32;
        for r in roots {
            let mut k = r;
            while k <= n {
                let mut e = 0;
                while rest[k as usize].is_multiple_of(p) {
                    rest[k as usize] /= p;
                    e += 1;
                }
                max_e = max_e.max(e);
                k += p;
            }
        }
        total += f64::from(max_e) * (p as f64).ln();
    }
    let mut big: Vec<u64> = rest[1..].iter().copied().filter(|&r| r > 1).collect();
    big.sort_unstable();
    big.dedup();
    total += big.iter().map(|&q| (q as f64).ln()).sum::<f64>();
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setspec::{builtin, chi};

    #[test]
    fn prime_counts() {
        assert_eq!(primes_up_to(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert!(primes_up_to(1).is_err());
        let t = primes_up_to_with(1_000_000, Exec::default(), 1 << 16).unwrap();
        assert_eq!(t.len(), 78498);
        // trial-division oracle at small scale
        let small = (2..=5000u64).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).count();
        assert_eq!(t.pi(5000), small);
    }

    #[test]
    fn small_tables() {
        let b = builtin("sum2sq", None).unwrap();
        let t = build_char_table(&b, 20).unwrap();
        assert_eq!(t.members(), vec![1, 2, 4, 5, 8, 9, 10, 13, 16, 17, 18, 20]);
        assert_eq!(t.count(20.0).unwrap(), 12);
        assert_eq!(t.count(10.0).unwrap(), 7);
        assert_eq!(t.count(0.5).unwrap(), 0);
        assert!(t.count(21.0).is_err());
        let h = build_char_table(&builtin("hex", None).unwrap(), 12).unwrap();
        assert_eq!(h.members(), vec![1, 3, 4, 7, 9, 12]);
        let nat = build_char_table(&builtin("naturals", None).unwrap(), 5).unwrap();
        assert_eq!(nat.members(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn table_agrees_with_chi_for_every_builtin() {
        let names = ["naturals", "sum2sq", "hex", "nonhyp", "quadsem:-3", "quadsem:-7", "sprime:-4", "progsem:4:3", "phi-nondiv:7"];
        for name in names {
            let d = builtin(name, None).unwrap();
            let t = build_char_table_with(&d, 5000, Exec::default(), 256).unwrap();
            for n in 1..=5000u64 {
                assert_eq!(t.get(n).unwrap(), chi(&d, n).unwrap(), "{name} n={n}");
            }
        }
    }

    #[test]
    fn segmentation_and_policies_do_not_change_tables() {
        let d = builtin("hex", None).unwrap();
        let a = build_char_table_with(&d, 100_003, Exec::Sequential, 64).unwrap();
        let b = build_char_table_with(&d, 100_003, Exec::default(), DEFAULT_SEGMENT).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pi_s_examples() {
        let b = builtin("sum2sq", None).unwrap();
        assert_eq!(pi_s(&b, 20.0).unwrap(), 4);
        // 7, 13 and 19
        assert_eq!(pi_s(&builtin("progsem:3:1", None).unwrap(), 20.0).unwrap(), 3);
        assert_eq!(pi_s(&builtin("progsem:3:1", None).unwrap(), 18.0).unwrap(), 2);
        assert_eq!(pi_s(&b, 1.0).unwrap(), 0);
    }

    #[test]
    fn log_lcm_small() {
        assert!((log_lcm_f(1).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((log_lcm_f(3).unwrap() - 10f64.ln()).abs() < 1e-12);
        // direct big-integer lcm oracle
        use num_bigint::BigUint;
        use num_integer::Integer;
        let mut l = BigUint::from(1u32);
        for k in 1..=200u64 {
            l = l.lcm(&BigUint::from(k * k + 1));
            let shift = l.bits().saturating_sub(60);
            let top: BigUint = &l >> shift;
            let top = top.to_u64_digits().first().copied().unwrap_or(0) as f64;
            let want = top.ln() + shift as f64 * 2f64.ln();
            let got = log_lcm_f(k).unwrap();
            assert!((got - want).abs() < 1e-9 * want.max(1.0), "k={k} got={got} want={want}");
        }
    }
}
