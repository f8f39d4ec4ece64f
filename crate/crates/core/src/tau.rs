//! Ramanujan's τ(n) modulo small moduli, from Δ = x ∏(1-x^m)^24.
//!
//! ∏(1-x^m)^3 = Σ_k (-1)^k (2k+1) x^{k(k+1)/2} (Jacobi) is supported on the
//! triangular numbers, so the 24th power is built as one sparse×sparse
//! square followed by six dense×sparse products, each O(N√N). Products are
//! accumulated in i64 and reduced once per output coefficient.
//!
//! All five classical moduli 3, 5, 7, 23, 691 are served by a single pass
//! modulo their product.

use std::sync::Arc;

use num_rational::Ratio;

use crate::arith;
use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Moduli with classical congruences for τ; their product is small enough
/// to run one expansion for all of them.
pub const CLASSICAL_MODULI: [u64; 5] = [3, 5, 7, 23, 691];

/// Largest supported bound; the i64 accumulator argument below needs
/// m · (2√(2N)+1) · √(2N) < 2^62.
pub const MAX_BOUND: u64 = 200_000_000;

const OUTPUT_CHUNK: usize = 1 << 14;

/// τ(n) mod q for 1 <= n <= N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TauTable {
    q: u64,
    /// `values[n]` = τ(n) mod q; index 0 unused.
    values: Vec<u32>,
}

impl TauTable {
    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn bound(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    /// τ(n) mod q in [0, q).
    pub fn get(&self, n: u64) -> Result<u64> {
        if n == 0 || n > self.bound() {
            return Err(Error::BackingBound { q: self.q, bound: self.bound(), n });
        }
        Ok(u64::from(self.values[n as usize]))
    }

    /// 1 iff q ∤ τ(n).
    pub fn nondiv_chi(&self, n: u64) -> Result<u8> {
        Ok(u8::from(self.get(n)? != 0))
    }

    pub fn values(&self) -> &[u32] {
        &self.values[1..]
    }

    pub(crate) fn from_raw(q: u64, values: Vec<u32>) -> Self {
        Self { q, values }
    }
}

/// Density of primes p with q ∤ τ(p) for the classical moduli (so the
/// density of the set {n : q ∤ τ(n)} in the sense of Condition A).
///
/// Ramanujan's exponent δ_q in Σ t_k ~ Cn/log^{δ_q} n is one minus this:
/// δ_3 = δ_7 = δ_23 = 1/2, δ_5 = 1/4, δ_691 = 1/690.
pub fn known_nondiv_density(q: u64) -> Option<Ratio<u64>> {
    match q {
        3 | 7 | 23 => Some(Ratio::new(1, 2)),
        5 => Some(Ratio::new(3, 4)),
        691 => Some(Ratio::new(689, 690)),
        _ => None,
    }
}

/// Ramanujan's δ_q: the density of primes p with q | τ(p).
pub fn ramanujan_delta(q: u64) -> Option<Ratio<u64>> {
    known_nondiv_density(q).map(|d| Ratio::from_integer(1) - d)
}

fn check_modulus(m: u64, n: u64) -> Result<()> {
    if m < 2 {
        return Err(Error::domain("q", m, "q >= 2"));
    }
    if n > MAX_BOUND {
        return Err(Error::Capacity { what: "tau bound N", value: n, bound: MAX_BOUND });
    }
    let terms = (2.0 * n as f64).sqrt() + 2.0;
    if (m as f64) * (2.0 * terms + 1.0) * terms >= 2f64.powi(62) {
        return Err(Error::Capacity { what: "tau modulus", value: m, bound: (2f64.powi(62) / (2.0 * terms * terms)) as u64 });
    }
    Ok(())
}

/// The sparse series Σ (-1)^k (2k+1) x^{k(k+1)/2} truncated at degree < len.
fn eta_cubed(len: usize) -> Vec<(usize, i64)> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let t = k * (k + 1) / 2;
        if t >= len {
            return out;
        }
        let c = (2 * k + 1) as i64;
        out.push((t, if k.is_multiple_of(2) { c } else { -c }));
        k += 1;
    }
}

fn square_sparse(sparse: &[(usize, i64)], len: usize, m: i64) -> Vec<i64> {
    let mut out = vec![0i64; len];
    for (i, &(ti, ci)) in sparse.iter().enumerate() {
        for &(tj, cj) in &sparse[i..] {
            let t = ti + tj;
            if t >= len {
                break;
            }
            let prod = ci * cj * if ti == tj { 1 } else { 2 };
            out[t] = (out[t] + prod) % m;
        }
    }
    out.iter_mut().for_each(|v| *v = v.rem_euclid(m));
    out
}

fn mul_dense_sparse(exec: Exec, dense: &[i64], sparse: &[(usize, i64)], m: i64) -> Vec<i64> {
    let len = dense.len();
    let mut out = vec![0i64; len];
    par::for_each_chunk_mut(exec, &mut out, OUTPUT_CHUNK, |idx, chunk| {
        let lo = idx * OUTPUT_CHUNK;
        let hi = lo + chunk.len();
        for &(t, c) in sparse {
            if t >= hi {
                break;
            }
            let start = lo.max(t);
            let src = &dense[start - t..hi - t];
            let dst = &mut chunk[start - lo..];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += c * s;
            }
        }
        for v in chunk.iter_mut() {
            *v = v.rem_euclid(m);
        }
    });
    out
}

/// Coefficients of ∏(1-x^m)^24 mod `m` up to degree len-1.
fn delta_series(exec: Exec, len: usize, m: u64) -> Vec<i64> {
    let m = m as i64;
    let e3 = eta_cubed(len);
    let mut acc = square_sparse(&e3, len, m);
    for _ in 0..6 {
        acc = mul_dense_sparse(exec, &acc, &e3, m);
    }
    acc
}

fn project(series: &[i64], q: u64) -> TauTable {
    let mut values = Vec::with_capacity(series.len() + 1);
    values.push(0);
    values.extend(series.iter().map(|&v| (v as u64 % q) as u32));
    TauTable::from_raw(q, values)
}

/// τ(n) mod q for n <= N.
pub fn tau_mod_sieve(q: u64, n: u64, exec: Exec) -> Result<TauTable> {
    if !arith::is_prime(q) {
        return Err(Error::domain("q", q, "q prime"));
    }
    Ok(tau_mod_many(&[q], n, exec)?.pop().expect("one table"))
}

/// One expansion modulo the product of `moduli`, projected onto each.
pub fn tau_mod_many(moduli: &[u64], n: u64, exec: Exec) -> Result<Vec<TauTable>> {
    if n == 0 {
        return Err(Error::domain("N", n, "N >= 1"));
    }
    if moduli.is_empty() {
        return Ok(Vec::new());
    }
    let mut m = 1u64;
    for &q in moduli {
        if q < 2 {
            return Err(Error::domain("q", q, "q >= 2"));
        }
        m = arith::lcm(m, q);
    }
    check_modulus(m, n)?;
    let series = delta_series(exec, n as usize, m);
    Ok(moduli.iter().map(|&q| project(&series, q)).collect())
}

/// Shared tables for the classical moduli, in the order of [`CLASSICAL_MODULI`].
pub fn classical_tables(n: u64, exec: Exec) -> Result<Vec<Arc<TauTable>>> {
    Ok(tau_mod_many(&CLASSICAL_MODULI, n, exec)?.into_iter().map(Arc::new).collect())
}

/// 1 iff q ∤ τ(n).
pub fn tau_nondiv_chi(table: &TauTable, n: u64) -> Result<u8> {
    table.nondiv_chi(n)
}

/// #{p <= x : q ∤ τ(p)} / π(x).
pub fn delta_empirical(table: &TauTable, x: u64) -> Result<f64> {
    if x > table.bound() {
        return Err(Error::BackingBound { q: table.q, bound: table.bound(), n: x });
    }
    if x < 2 {
        return Err(Error::domain("x", x, "x >= 2"));
    }
    let primes = crate::sieve::primes_up_to(x)?;
    let mut hit = 0u64;
    for &p in primes.primes() {
        if table.get(p)? != 0 {
            hit += 1;
        }
    }
    Ok(hit as f64 / primes.len() as f64)
}

/// σ₁₁(n) mod 691 for 1 <= n <= N by a divisor sieve; index 0 unused.
pub fn sigma11_mod691(n: u64) -> Vec<u32> {
    let mut s = vec![0u32; n as usize + 1];
    for d in 1..=n {
        let v = arith::pow_mod(d, 11, 691) as u32;
        for m in (d..=n).step_by(d as usize) {
            let slot = &mut s[m as usize];
            *slot = (*slot + v) % 691;
        }
    }
    s
}

/// First n <= N with τ(n) ≢ σ₁₁(n) (mod 691), if any.
pub fn sigma11_mismatch(table: &TauTable, n: u64) -> Result<Option<u64>> {
    if table.q != 691 {
        return Err(Error::domain("q", table.q, "691"));
    }
    if n > table.bound() {
        return Err(Error::BackingBound { q: 691, bound: table.bound(), n });
    }
    let s = sigma11_mod691(n);
    Ok((1..=n).find(|&k| table.values[k as usize] != s[k as usize]))
}

/// τ(p^e) mod q from τ(p) by the Hecke recursion
/// τ(p^{e+1}) = τ(p)τ(p^e) - p^11 τ(p^{e-1}).
pub fn hecke_prime_power(tau_p: u64, p: u64, e: u32, q: u64) -> u64 {
    let p11 = arith::pow_mod(p % q, 11, q);
    let mut prev = 1 % q;
    let mut cur = tau_p % q;
    if e == 0 {
        return prev;
    }
    for _ in 1..e {
        let next = (arith::mul_mod(tau_p % q, cur, q) + q - arith::mul_mod(p11, prev, q)) % q;
        prev = cur;
        cur = next;
    }
    cur
}
