//! Euler–Kronecker constants γ_S.
//!
//! Two routes: truncated partial sums (any set, heuristic error) and exact
//! L-function identities for the quadratic semigroups S_D and their relatives
//! (rigorous error bounds in double-double arithmetic).
//!
//! For a negative fundamental discriminant D,
//!
//!   2γ_{S_D} = γ + L'/L(1, χ_D) - Σ_{(D/p)=-1} 2 log p/(p²-1) + Σ_{p|D} log p/(p-1),
//!
//! and the inert prime sum is evaluated through the doubling identity
//!
//!   Σ_{(D/p)=-1} 2 log p/(p²-1) = Σ_{k≥1} T(2^k),
//!   T(s) = L'/L(s, χ_D) - ζ'/ζ(s) - Σ_{p|D} log p/(p^s - 1),
//!
//! which telescopes because p^s/(p^{2s}-1) = 1/(p^s-1) - 1/(p^{2s}-1).

use serde::Serialize;

use crate::arith;
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::lfun::{
    agm, euler_gamma, l_log_deriv, l_log_deriv_at_1, zeta_log_deriv, Approx, PrecisionContext, QuadraticCharacter,
};
use crate::mangoldt;
use crate::par::{self, Exec};
use crate::setspec::{builtin, ExponentRule, Family, SetDescriptor};
use crate::sieve::{self, PrimeTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    PartialSum,
    Lfunction,
    Derived,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::PartialSum => "partial-sum",
            Method::Lfunction => "lfunction",
            Method::Derived => "derived",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Truncation {
    /// Partial sum over n <= x.
    X { x: u64 },
    /// Number of identity-(9) terms summed.
    Depth { depth: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Rigorous,
    /// c/log x with an unknown constant c; reported with c = 1.
    Heuristic,
}

#[derive(Clone, Debug, Serialize)]
pub struct EkEstimate {
    pub set: String,
    #[serde(serialize_with = "crate::lfun::serialize_dd")]
    pub value: Dd,
    pub error: f64,
    pub error_kind: ErrorKind,
    pub method: Method,
    pub truncation: Truncation,
}

impl EkEstimate {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }

    fn exact_path(set: &str, a: Approx, method: Method, depth: u32) -> Self {
        Self {
            set: set.to_string(),
            value: a.value,
            error: a.error,
            error_kind: ErrorKind::Rigorous,
            method,
            truncation: Truncation::Depth { depth },
        }
    }

    pub fn approx(&self) -> Approx {
        Approx::new(self.value, self.error)
    }
}

// ---------------------------------------------------------------------------
// partial sums

const PRIME_BLOCK: usize = 1 << 14;

fn blocked_sum<F>(exec: Exec, ps: &[u64], f: F) -> Result<f64>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    let nblocks = ps.len().div_ceil(PRIME_BLOCK);
    let parts = par::map_indexed(exec, nblocks, |b| -> Result<(f64, f64)> {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for &p in &ps[b * PRIME_BLOCK..((b + 1) * PRIME_BLOCK).min(ps.len())] {
            let v = f(p)?;
            let t = sum + v;
            comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
        }
        Ok((sum, comp))
    });
    let (mut total, mut comp) = (0.0f64, 0.0f64);
    for part in parts {
        let (s, c) = part?;
        total += s;
        comp += c;
    }
    Ok(total + comp)
}

/// Whether every exponent rule is All, Even or None, i.e. the set is the free
/// semigroup on generators p (All) and p² (Even).
fn free_generators(desc: &SetDescriptor) -> bool {
    desc.rules.iter().all(|r| matches!(r.exp, ExponentRule::All | ExponentRule::Even | ExponentRule::None))
}

/// Partial-sum estimate with a caller-supplied prime table covering x.
pub fn ek_partial_sum_with(desc: &SetDescriptor, x: u64, primes: &PrimeTable, exec: Exec) -> Result<EkEstimate> {
    if x < 100 {
        return Err(Error::domain("x", x, "x >= 100"));
    }
    if x > primes.bound() {
        return Err(Error::Capacity { what: "x for the partial sum", value: x, bound: primes.bound() });
    }
    if let Some(q) = desc.tau_modulus() {
        let bound = desc.backing_bound();
        if bound < x {
            return Err(Error::BackingBound { q, bound, n: x });
        }
    }
    let delta = desc.delta_f64();
    let lx = (x as f64).ln();
    let ps = &primes.primes()[..primes.pi(x)];
    let sum = if free_generators(desc) {
        // δ log x - Σ_{q_i <= x} log q_i/(q_i - 1)
        blocked_sum(exec, ps, |p| {
            let pf = p as f64;
            Ok(match desc.classify_prime(p) {
                ExponentRule::All => pf.ln() / (pf - 1.0),
                ExponentRule::Even if p.saturating_mul(p) <= x => 2.0 * pf.ln() / (pf * pf - 1.0),
                _ => 0.0,
            })
        })?
    } else {
        mangoldt::mangoldt_partial_sum_with(desc, x, primes, exec)?
    };
    let value = delta * lx - sum;
    Ok(EkEstimate {
        set: desc.name.clone(),
        value: Dd::new(value),
        error: 1.0 / lx,
        error_kind: ErrorKind::Heuristic,
        method: Method::PartialSum,
        truncation: Truncation::X { x },
    })
}

/// δ log x - Σ_{n<=x} Λ_S(n)/n (generator form for free semigroups).
pub fn ek_partial_sum(desc: &SetDescriptor, x: u64) -> Result<EkEstimate> {
    let primes = sieve::primes_up_to(x)?;
    ek_partial_sum_with(desc, x, &primes, Exec::default())
}

// ---------------------------------------------------------------------------
// the inert prime sum

fn ramified_sum(chi: &QuadraticCharacter, s: f64) -> Approx {
    let mut acc = Approx::exact(Dd::ZERO);
    for p in chi.ramified_primes() {
        let pd = Dd::from(p);
        let t = pd.ln() / ((Dd::new(s) * pd.ln()).exp() - Dd::ONE);
        acc = acc.add(&Approx::exact(t));
    }
    acc
}

/// T(2^k) for k = 1..=depth.
pub fn doubling_terms(d: i64, depth: u32, ctx: &PrecisionContext) -> Result<Vec<Approx>> {
    let chi = QuadraticCharacter::negative_fundamental(d)?;
    (1..=depth)
        .map(|k| {
            let s = 2f64.powi(k as i32);
            let l = l_log_deriv(s, &chi, ctx)?;
            let z = zeta_log_deriv(s, ctx)?;
            Ok(l.sub(&z).sub(&ramified_sum(&chi, s)))
        })
        .collect()
}

/// Smallest prime p with (D/p) = -1.
fn least_inert_prime(chi: &QuadraticCharacter) -> u64 {
    (2u64..).find(|&p| arith::is_prime(p) && chi.eval(p) == -1).expect("an inert prime exists")
}

/// Upper bound for Σ_{p>=q0} 2 log p p^s/(p^{2s}-1) <= 4 Σ_{n>=q0} log n n^{-s}.
fn inert_tail_bound(q0: u64, s: f64) -> f64 {
    let q = q0 as f64;
    let l = q.ln();
    4.0 * q.powf(-s) * (l + q * (l / (s - 1.0) + 1.0 / (s - 1.0).powi(2)))
}

/// Bound on Σ_{j>k} T(2^j).
pub fn doubling_tail_bound(d: i64, k: u32) -> Result<f64> {
    let chi = QuadraticCharacter::negative_fundamental(d)?;
    let q0 = least_inert_prime(&chi);
    // the terms decay doubly exponentially, so twice the first omitted bound covers the rest
    Ok(2.0 * inert_tail_bound(q0, 2f64.powi(k as i32 + 1)))
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeSquareSum {
    pub d: i64,
    pub value: Approx,
    pub depth: u32,
    pub tail_bound: f64,
}

const MAX_DEPTH: u32 = 10;

/// Σ_{(D/p)=-1} 2 log p/(p²-1) via the doubling identity, truncated adaptively.
pub fn prime_square_sum(d: i64, ctx: &PrecisionContext) -> Result<PrimeSquareSum> {
    let chi = QuadraticCharacter::negative_fundamental(d)?;
    let q0 = least_inert_prime(&chi);
    let mut depth = 1;
    while 2.0 * inert_tail_bound(q0, 2f64.powi(depth as i32 + 1)) > ctx.tolerance * 1e-2 {
        depth += 1;
        if depth > MAX_DEPTH {
            return Err(Error::NonConvergence {
                context: "doubling identity series",
                tolerance: ctx.tolerance,
                achieved: inert_tail_bound(q0, 2f64.powi(depth as i32)),
            });
        }
    }
    prime_square_sum_depth(d, depth, ctx)
}

/// The doubling identity summed to a fixed depth.
pub fn prime_square_sum_depth(d: i64, depth: u32, ctx: &PrecisionContext) -> Result<PrimeSquareSum> {
    let terms = doubling_terms(d, depth, ctx)?;
    let tail_bound = doubling_tail_bound(d, depth)?;
    let mut acc = Approx::exact(Dd::ZERO);
    for t in &terms {
        acc = acc.add(t);
    }
    acc.error += tail_bound;
    Ok(PrimeSquareSum { d, value: acc, depth, tail_bound })
}

/// The same sum evaluated independently: primes p <= P explicitly, and the
/// tail Σ_{p>P} by the doubling identity applied to the Euler products with the
/// factors p <= P removed.
pub fn prime_square_sum_split(d: i64, ctx: &PrecisionContext) -> Result<Approx> {
    let chi = QuadraticCharacter::negative_fundamental(d)?;
    let cut = chi.modulus().max(100);
    let small: Vec<u64> = (2..=cut).filter(|&p| arith::is_prime(p)).collect();
    let mut acc = Approx::exact(Dd::ZERO);
    for &p in &small {
        if chi.eval(p) == -1 {
            let pd = Dd::from(p);
            acc = acc.add(&Approx::exact(Dd::TWO * pd.ln() / (pd * pd - Dd::ONE)));
        }
    }
    let mut k = 1;
    loop {
        let s = 2f64.powi(k);
        let sd = Dd::new(s);
        // Σ_{p>P} log p/(p^s-1) - χ(p) log p/(p^s-χ(p))
        let mut zeta_tail = zeta_log_deriv(s, ctx)?.neg();
        let mut l_tail = l_log_deriv(s, &chi, ctx)?.neg();
        for &p in &small {
            let pd = Dd::from(p);
            let ps = (sd * pd.ln()).exp();
            zeta_tail = zeta_tail.sub(&Approx::exact(pd.ln() / (ps - Dd::ONE)));
            let c = chi.eval(p);
            if c != 0 {
                let cd = Dd::from(c);
                l_tail = l_tail.sub(&Approx::exact(cd * pd.ln() / (ps - cd)));
            }
        }
        acc = acc.add(&zeta_tail.sub(&l_tail));
        let bound = 2.0 * inert_tail_bound(cut + 1, 2.0 * s);
        if bound < ctx.tolerance * 1e-2 {
            acc.error += bound;
            return Ok(acc);
        }
        k += 1;
        if k > MAX_DEPTH as i32 {
            return Err(Error::NonConvergence {
                context: "split inert prime sum",
                tolerance: ctx.tolerance,
                achieved: bound,
            });
        }
    }
}

/// Direct summation over primes p <= x with the tail estimated as
/// (1/2)·2 ∫_x^∞ dt/t² = 1/x (half the primes are inert).
pub fn prime_square_sum_direct(d: i64, primes: &PrimeTable) -> Result<f64> {
    let chi = QuadraticCharacter::negative_fundamental(d)?;
    let ps = primes.primes();
    let sum = blocked_sum(Exec::default(), ps, |p| {
        Ok(if chi.eval(p) == -1 {
            let pf = p as f64;
            2.0 * pf.ln() / (pf * pf - 1.0)
        } else {
            0.0
        })
    })?;
    Ok(sum + 1.0 / primes.bound() as f64)
}

// ---------------------------------------------------------------------------
// χ-weighted prime sums

fn ramified_weight(d: i64) -> Approx {
    let mut acc = Approx::exact(Dd::ZERO);
    for p in arith::prime_divisors(d) {
        let pd = Dd::from(p);
        acc = acc.add(&Approx::exact(pd.ln() / (pd - Dd::ONE)));
    }
    acc
}

/// Σ_p (D/p) log p/(p-1) = -L'/L(1, χ_D) - Σ_k T(2^k).
pub fn chi_prime_sum_series(d: i64, ctx: &PrecisionContext) -> Result<Approx> {
    let l1 = l_log_deriv_at_1(d, ctx)?;
    let pss = prime_square_sum(d, ctx)?;
    Ok(l1.log_deriv.neg().sub(&pss.value))
}

/// Σ_p (D/p) log p/(p-1) = -L'/L(1, χ_D) - Σ_{(D/p)=-1} 2 log p/(p²-1), the
/// inert sum taken from the split evaluation.
pub fn chi_prime_sum_product(d: i64, ctx: &PrecisionContext) -> Result<Approx> {
    let l1 = l_log_deriv_at_1(d, ctx)?;
    let inert = prime_square_sum_split(d, ctx)?;
    Ok(l1.log_deriv.neg().sub(&inert))
}

// ---------------------------------------------------------------------------
// quadratic semigroups and relatives

fn gamma_approx() -> Approx {
    Approx::exact(euler_gamma())
}

fn quadratic_approx(d: i64, ctx: &PrecisionContext) -> Result<(Approx, u32)> {
    let l1 = l_log_deriv_at_1(d, ctx)?;
    let pss = prime_square_sum(d, ctx)?;
    let two_gamma = gamma_approx().add(&l1.log_deriv).sub(&pss.value).add(&ramified_weight(d));
    Ok((two_gamma.scale(0.5), pss.depth))
}

/// γ_{S_D} for the semigroup of integers coprime to D represented by forms of
/// discriminant D.
pub fn ek_quadratic(d: i64, ctx: &PrecisionContext) -> Result<EkEstimate> {
    let (g, depth) = quadratic_approx(d, ctx)?;
    Ok(EkEstimate::exact_path(&format!("quadsem:{d}"), g, Method::Lfunction, depth))
}

/// L'/L(1, χ_{-4}) = log(M(1, √2)² e^γ / 2).
pub fn l_log_deriv_minus4_agm(ctx: &PrecisionContext) -> Result<Approx> {
    let m = agm(Dd::ONE, Dd::SQRT2, ctx)?;
    Ok(m.ln().scale(2.0).add(&gamma_approx()).sub(&Approx::exact(Dd::LN2)))
}

/// The two evaluations of γ_{S_B}.
#[derive(Clone, Debug, Serialize)]
pub struct TwoSquaresPaths {
    /// γ_{S_{-4}} - log 2
    pub quadsem: Approx,
    /// γ/2 + L'/L(1,χ_{-4})/2 - log 2/2 - Σ_{p≡3 (4)} log p/(p²-1), with the AGM value
    pub agm: Approx,
}

pub fn sum_two_squares_paths(ctx: &PrecisionContext) -> Result<TwoSquaresPaths> {
    let (g4, _) = quadratic_approx(-4, ctx)?;
    let quadsem = g4.sub(&Approx::exact(Dd::LN2));
    let inert = prime_square_sum_split(-4, ctx)?.scale(0.5);
    let agm = gamma_approx()
        .add(&l_log_deriv_minus4_agm(ctx)?)
        .sub(&Approx::exact(Dd::LN2))
        .scale(0.5)
        .sub(&inert);
    Ok(TwoSquaresPaths { quadsem, agm })
}

/// Agreement demanded between independent exact paths.
pub const PATH_AGREEMENT: f64 = 1e-12;

fn check_agreement(context: &'static str, a: &Approx, b: &Approx, tol: f64) -> Result<()> {
    let diff = (a.value - b.value).to_f64().abs();
    if diff > tol.max(a.error + b.error) {
        return Err(Error::NonConvergence { context, tolerance: tol, achieved: diff });
    }
    Ok(())
}

/// γ_{S_B}, B = sums of two squares.
pub fn ek_sum_two_squares(ctx: &PrecisionContext) -> Result<EkEstimate> {
    let paths = sum_two_squares_paths(ctx)?;
    check_agreement("sum of two squares paths", &paths.quadsem, &paths.agm, PATH_AGREEMENT)?;
    let (_, depth) = quadratic_approx(-4, ctx)?;
    Ok(EkEstimate::exact_path("sum2sq", paths.quadsem, Method::Lfunction, depth))
}

/// γ_{NH} = γ_{S_B} - L'/L(1, χ_{-4}).
pub fn ek_nonhypotenuse(ctx: &PrecisionContext) -> Result<EkEstimate> {
    let sb = ek_sum_two_squares(ctx)?;
    let l1 = l_log_deriv_at_1(-4, ctx)?;
    let g = sb.approx().sub(&l1.log_deriv);
    Ok(EkEstimate::exact_path("nonhyp", g, Method::Derived, depth_of(&sb)))
}

/// γ_{NH} = (γ - log 2 + Σ_{p>2} (-1/p) log p/(p-1))/2.
pub fn nonhypotenuse_prime_sum_form(ctx: &PrecisionContext) -> Result<Approx> {
    let s = chi_prime_sum_series(-4, ctx)?;
    Ok(gamma_approx().sub(&Approx::exact(Dd::LN2)).add(&s).scale(0.5))
}

fn depth_of(e: &EkEstimate) -> u32 {
    match e.truncation {
        Truncation::Depth { depth } => depth,
        Truncation::X { .. } => 0,
    }
}

/// The three expressions for 2γ_{S'_D}, S'_D generated by the primes with (D/p) = -1.
#[derive(Clone, Debug, Serialize)]
pub struct SPrimeForms {
    /// 2γ_{S_D} - 2 L'/L(1, χ_D)
    pub from_quadratic: Approx,
    /// γ - L'/L(1, χ_D) - Σ_{(D/p)=-1} 2 log p/(p²-1) + Σ_{p|D} log p/(p-1)
    pub from_inert_sum: Approx,
    /// γ + Σ_p (D/p) log p/(p-1) + Σ_{p|D} log p/(p-1)
    pub from_chi_sum: Approx,
}

pub fn sprime_forms(d: i64, ctx: &PrecisionContext) -> Result<SPrimeForms> {
    let (g, _) = quadratic_approx(d, ctx)?;
    let l1 = l_log_deriv_at_1(d, ctx)?;
    let ram = ramified_weight(d);
    let from_quadratic = g.scale(2.0).sub(&l1.log_deriv.scale(2.0));
    let from_inert_sum = gamma_approx().sub(&l1.log_deriv).sub(&prime_square_sum_split(d, ctx)?).add(&ram);
    let from_chi_sum = gamma_approx().add(&chi_prime_sum_product(d, ctx)?).add(&ram);
    Ok(SPrimeForms { from_quadratic, from_inert_sum, from_chi_sum })
}

/// γ_{S'_D}; all three expressions must agree within 1e-10.
pub fn ek_sprime_quadratic(d: i64, ctx: &PrecisionContext) -> Result<EkEstimate> {
    let f = sprime_forms(d, ctx)?;
    check_agreement("S'_D expressions", &f.from_quadratic, &f.from_inert_sum, 1e-10)?;
    check_agreement("S'_D expressions", &f.from_quadratic, &f.from_chi_sum, 1e-10)?;
    let depth = prime_square_sum(d, ctx)?.depth;
    Ok(EkEstimate::exact_path(&format!("sprime:{d}"), f.from_quadratic.scale(0.5), Method::Lfunction, depth))
}

/// J in log lcm(1²+1, ..., n²+1) = n log n + J n + o(n), via
/// J = 2γ - 1 - (3/2) log 2 - 2γ_{NH}.
pub fn cilleruelo_j(ctx: &PrecisionContext) -> Result<Approx> {
    let nh = ek_nonhypotenuse(ctx)?.approx();
    Ok(gamma_approx()
        .scale(2.0)
        .sub(&Approx::exact(Dd::ONE))
        .sub(&Approx::exact(Dd::LN2.mul_f64(1.5)))
        .sub(&nh.scale(2.0)))
}

/// J = γ - 1 - (log 2)/2 - Σ_{p>2} (-1/p) log p/(p-1).
pub fn cilleruelo_j_direct(ctx: &PrecisionContext) -> Result<Approx> {
    let s = chi_prime_sum_product(-4, ctx)?;
    Ok(gamma_approx().sub(&Approx::exact(Dd::ONE)).sub(&Approx::exact(Dd::LN2.mul_f64(0.5))).sub(&s))
}

/// (log lcm(k²+1, k <= n) - n log n)/n.
pub fn lcm_slope(n: u64) -> Result<f64> {
    let nf = n as f64;
    Ok((sieve::log_lcm_f(n)? - nf * nf.ln()) / nf)
}

/// γ_S through an exact identity when the set has one: ℕ, S_B, S_H, S_NH,
/// S_D and S'_D. S_H = {3^e}·S_{-3}, so γ_{S_H} = γ_{S_{-3}} - (log 3)/2.
pub fn ek_lfunction(desc: &SetDescriptor, ctx: &PrecisionContext) -> Result<Option<EkEstimate>> {
    let named = |mut e: EkEstimate| {
        e.set = desc.name.clone();
        Some(e)
    };
    Ok(match desc.family {
        Family::Naturals => named(EkEstimate::exact_path("", gamma_approx(), Method::Lfunction, 0)),
        Family::SumTwoSquares => named(ek_sum_two_squares(ctx)?),
        Family::NonHypotenuse => named(ek_nonhypotenuse(ctx)?),
        Family::QuadSemigroup(d) => named(ek_quadratic(d, ctx)?),
        Family::SPrime(d) => named(ek_sprime_quadratic(d, ctx)?),
        Family::Hexagonal => {
            let (g3, depth) = quadratic_approx(-3, ctx)?;
            let g = g3.sub(&Approx::exact(Dd::from(3u64).ln().mul_f64(0.5)));
            named(EkEstimate::exact_path("", g, Method::Derived, depth))
        }
        _ => None,
    })
}

// ---------------------------------------------------------------------------
// S'_{q;1} against S'_{φ;q}

#[derive(Clone, Debug, Serialize)]
pub struct ComplementReport {
    pub q: u64,
    pub x: u64,
    pub progression: EkEstimate,
    pub phi: EkEstimate,
    pub sum: f64,
    /// γ + 2 log q/(q² - 1)
    pub target: f64,
    pub residual: f64,
}

/// Partial-sum estimates of γ_{S'_{q;1}} and γ_{S'_{φ;q}}; their sum should
/// approach γ + 2 log q/(q²-1) because L_{S'_{φ;q}} L_{S'_{q;1}} = ζ(s)(1-q^{-2s}).
pub fn consistency_complement_with(q: u64, x: u64, primes: &PrimeTable, exec: Exec) -> Result<ComplementReport> {
    if q < 3 || !arith::is_prime(q) {
        return Err(Error::domain("q", q, "an odd prime"));
    }
    let prog = builtin(&format!("progsem:{q}:1"), None)?;
    let phi = builtin(&format!("phi-nondiv:{q}"), None)?;
    let progression = ek_partial_sum_with(&prog, x, primes, exec)?;
    let phi = ek_partial_sum_with(&phi, x, primes, exec)?;
    let qf = q as f64;
    let target = euler_gamma().to_f64() + 2.0 * qf.ln() / (qf * qf - 1.0);
    let sum = progression.value_f64() + phi.value_f64();
    Ok(ComplementReport { q, x, progression, phi, sum, target, residual: sum - target })
}

pub fn consistency_complement(q: u64, x: u64) -> Result<ComplementReport> {
    let primes = sieve::primes_up_to(x)?;
    consistency_complement_with(q, x, &primes, Exec::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    const GAMMA_SB: &str = "-0.1638973186345815958";

    #[test]
    fn sum_two_squares_value_and_paths() {
        let e = ek_sum_two_squares(&ctx()).unwrap();
        let want = Dd::parse(GAMMA_SB).unwrap();
        assert!((e.value - want).to_f64().abs() < 1e-12, "{}", e.value.to_sci(25));
        let p = sum_two_squares_paths(&ctx()).unwrap();
        assert!((p.quadsem.value - p.agm.value).to_f64().abs() < 1e-25);
        assert!(e.value_f64() < 0.5);
    }

    #[test]
    fn quadsem_minus4() {
        let e = ek_quadratic(-4, &ctx()).unwrap();
        let want = Dd::parse(GAMMA_SB).unwrap() + Dd::LN2;
        assert!((e.value - want).to_f64().abs() < 1e-12);
        assert_eq!(e.method, Method::Lfunction);
        assert!(matches!(e.truncation, Truncation::Depth { .. }));
    }

    #[test]
    fn agm_log_derivative() {
        let a = l_log_deriv_minus4_agm(&ctx()).unwrap();
        let b = l_log_deriv_at_1(-4, &ctx()).unwrap().log_deriv;
        assert!((a.value - b.value).to_f64().abs() < 1e-25);
        assert!((a.to_f64() - 0.245_609_584_777_314_17).abs() < 1e-15);
    }

    #[test]
    fn doubling_depths_agree() {
        for d in [-3i64, -4, -7, -8, -23] {
            let a = prime_square_sum_depth(d, 5, &ctx()).unwrap();
            let b = prime_square_sum_depth(d, 6, &ctx()).unwrap();
            let diff = (a.value.value - b.value.value).to_f64().abs();
            let allowed = a.tail_bound + a.value.error + b.value.error;
            assert!(diff <= allowed, "D={d}: {diff:e} > {allowed:e}");
            assert!(a.value.to_f64() > 0.0);
        }
    }

    #[test]
    fn doubling_seventh_term() {
        let t = doubling_terms(-4, 7, &ctx()).unwrap();
        assert!(t[6].value.to_f64().abs() < 1e-40);
        // D = -3: 2 is inert, the seventh term is about 2 log 2 · 2^-128
        let t = doubling_terms(-3, 7, &ctx()).unwrap();
        let v = t[6].value.to_f64();
        assert!(v > 1e-39 && v < 1e-38, "{v:e}");
        // D = -3 first term dominates
        assert!(t[0].to_f64() > 3.0 * t[1].to_f64());
    }

    #[test]
    fn prime_square_sum_direct_oracle() {
        let primes = sieve::primes_up_to(10_000_000).unwrap();
        for d in [-4i64, -3] {
            let direct = prime_square_sum_direct(d, &primes).unwrap();
            let exact = prime_square_sum(d, &ctx()).unwrap().value.to_f64();
            assert!((direct - exact).abs() < 1e-8, "D={d}: {direct} vs {exact}");
        }
    }

    #[test]
    fn split_matches_series() {
        for d in [-3i64, -4, -7, -8, -23, -163] {
            let a = prime_square_sum(d, &ctx()).unwrap().value;
            let b = prime_square_sum_split(d, &ctx()).unwrap();
            assert!((a.value - b.value).to_f64().abs() < 1e-25, "D={d}");
        }
    }

    #[test]
    fn chi_sum_two_forms() {
        for d in [-3i64, -4, -7, -8, -23] {
            let a = chi_prime_sum_series(d, &ctx()).unwrap();
            let b = chi_prime_sum_product(d, &ctx()).unwrap();
            assert!((a.value - b.value).to_f64().abs() < 1e-10);
        }
    }

    #[test]
    fn nonhypotenuse() {
        let nh = ek_nonhypotenuse(&ctx()).unwrap();
        assert!((nh.value_f64() - (-0.4095)).abs() < 1.5e-4);
        let alt = nonhypotenuse_prime_sum_form(&ctx()).unwrap();
        assert!((nh.value - alt.value).to_f64().abs() < 1e-10);
        let sb = ek_sum_two_squares(&ctx()).unwrap();
        assert!(nh.value_f64() < sb.value_f64());
    }

    #[test]
    fn j_constant() {
        let a = cilleruelo_j(&ctx()).unwrap().to_f64();
        let b = cilleruelo_j_direct(&ctx()).unwrap().to_f64();
        assert!((a - (-0.066_275_634_2)).abs() < 1e-9, "{a}");
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn sprime_forms_agree() {
        for d in [-3i64, -4, -7, -8] {
            let e = ek_sprime_quadratic(d, &ctx()).unwrap();
            assert!(e.value_f64().is_finite());
            assert_eq!(e.method, Method::Lfunction);
        }
    }

    #[test]
    fn partial_sum_small() {
        let nat = builtin("naturals", None).unwrap();
        let e = ek_partial_sum(&nat, 1_000_000).unwrap();
        assert!((e.value_f64() - 0.5772).abs() < 0.02, "{}", e.value_f64());
        assert_eq!(e.method, Method::PartialSum);
        assert_eq!(e.error_kind, ErrorKind::Heuristic);
        assert!(ek_partial_sum(&nat, 99).is_err());
    }

    #[test]
    fn generator_form_matches_mangoldt_form() {
        // the two forms differ only by prime powers beyond x
        let x = 200_000;
        let primes = sieve::primes_up_to(x).unwrap();
        for name in ["quadsem:-4", "sum2sq", "progsem:4:3", "nonhyp"] {
            let d = builtin(name, None).unwrap();
            let a = ek_partial_sum_with(&d, x, &primes, Exec::Sequential).unwrap().value_f64();
            let b = d.delta_f64() * (x as f64).ln()
                - mangoldt::mangoldt_partial_sum_with(&d, x, &primes, Exec::Sequential).unwrap();
            assert!((a - b).abs() < 1e-2, "{name}: {a} vs {b}");
        }
    }

    #[test]
    fn lfunction_dispatch_against_partial_sums() {
        let x = 2_000_000;
        let primes = sieve::primes_up_to(x).unwrap();
        for name in ["naturals", "sum2sq", "hex", "nonhyp", "quadsem:-7", "sprime:-3"] {
            let d = builtin(name, None).unwrap();
            let exact = ek_lfunction(&d, &ctx()).unwrap().unwrap();
            assert_eq!(exact.set, name);
            let ps = ek_partial_sum_with(&d, x, &primes, Exec::default()).unwrap();
            assert!((exact.value_f64() - ps.value_f64()).abs() < 0.01, "{name}");
        }
        assert!(ek_lfunction(&builtin("progsem:4:1", None).unwrap(), &ctx()).unwrap().is_none());
    }

    #[test]
    fn complement_small() {
        let r = consistency_complement(3, 1_000_000).unwrap();
        assert!(r.residual.abs() < 0.2, "{r:?}");
        assert!(consistency_complement(4, 1000).is_err());
    }
}
