//! Hurwitz zeta, its s-derivative, the digamma function and the first
//! generalized Stieltjes constant, all by Euler-Maclaurin summation.
//!
//! Every routine sums a head of `N` terms exactly and replaces the rest by the
//! integral, the half end-point term and the Bernoulli corrections at
//! `x = N + a`. The corrections are added until they fall below the requested
//! relative tolerance; the last correction added is reported as the
//! truncation error (the corrections decrease monotonically in the range of
//! indices used here).

use super::bernoulli;
use super::{Approx, PrecisionContext};
use crate::dd::{Dd, EPSILON};
use crate::error::{Error, Result};

fn head_len(ctx: &PrecisionContext) -> usize {
    (ctx.digits as usize + 10).max(20)
}

fn rounding(scale: f64) -> f64 {
    64.0 * EPSILON * scale
}

/// ζ(s, a) and ∂ζ/∂s(s, a) for real s > 1 and a > 0.
pub fn hurwitz_pair(s: Dd, a: Dd, ctx: &PrecisionContext) -> Result<(Approx, Approx)> {
    if s.to_f64() <= 1.0 {
        return Err(Error::domain("s", s.to_f64(), "s > 1"));
    }
    if a.to_f64() <= 0.0 {
        return Err(Error::domain("a", a.to_f64(), "a > 0"));
    }
    let n = head_len(ctx);
    let mut val = Dd::ZERO;
    let mut der = Dd::ZERO;
    let mut abs_sum = 0.0;
    for k in 0..n {
        let t = a + Dd::from(k as u64);
        let lt = t.ln();
        let p = (-(s * lt)).exp();
        val += p;
        der -= lt * p;
        abs_sum += p.to_f64() * (1.0 + lt.to_f64().abs());
    }
    let x = a + Dd::from(n as u64);
    let ln_x = x.ln();
    let sm1 = s - Dd::ONE;
    let x_ms = (-(s * ln_x)).exp();
    let x_1ms = x_ms * x;
    val += x_1ms / sm1 + x_ms * Dd::HALF;
    der -= x_1ms * ln_x / sm1 + x_1ms / sm1.sqr() + ln_x * x_ms * Dd::HALF;

    let table = bernoulli::table();
    let inv_x2 = (x * x).recip();
    let mut poch = s;
    let mut xp = x_ms / x;
    let mut harm = s.recip();
    let mut last = f64::INFINITY;
    let mut converged = false;
    for j in 1..table.scaled.len() {
        let term = table.scaled[j] * poch * xp;
        let dterm = term * (harm - ln_x);
        val += term;
        der += dterm;
        last = term.to_f64().abs().max(dterm.to_f64().abs());
        let target = ctx.tolerance * 1e-2 * val.to_f64().abs().min(der.to_f64().abs().max(1e-300));
        if last < target {
            converged = true;
            break;
        }
        let i = Dd::from(2 * j as u64 - 1);
        poch = poch * (s + i) * (s + i + Dd::ONE);
        xp *= inv_x2;
        harm += (s + i).recip() + (s + i + Dd::ONE).recip();
    }
    if !converged {
        return Err(Error::NonConvergence {
            context: "Hurwitz zeta Euler-Maclaurin tail",
            tolerance: ctx.tolerance,
            achieved: last,
        });
    }
    let err = last + rounding(abs_sum + val.to_f64().abs());
    Ok((Approx::new(val, err), Approx::new(der, err)))
}

/// ψ(a) for a > 0.
pub fn digamma(a: Dd, ctx: &PrecisionContext) -> Result<Approx> {
    if a.to_f64() <= 0.0 {
        return Err(Error::domain("a", a.to_f64(), "a > 0"));
    }
    let n = head_len(ctx);
    let mut head = Dd::ZERO;
    let mut abs_sum = 0.0;
    for k in 0..n {
        let t = (a + Dd::from(k as u64)).recip();
        head += t;
        abs_sum += t.to_f64();
    }
    let x = a + Dd::from(n as u64);
    let ln_x = x.ln();
    let mut val = ln_x - head - (x.mul_f64(2.0)).recip();
    let table = bernoulli::table();
    let inv_x2 = (x * x).recip();
    let mut xp = inv_x2;
    let mut last = f64::INFINITY;
    for j in 1..table.b2.len() {
        let term = table.b2[j] / Dd::from(2 * j as u64) * xp;
        val -= term;
        last = term.to_f64().abs();
        if last < ctx.tolerance * 1e-2 * val.to_f64().abs().max(1e-300) {
            return Ok(Approx::new(val, last + rounding(abs_sum + ln_x.to_f64())));
        }
        xp *= inv_x2;
    }
    Err(Error::NonConvergence {
        context: "digamma Euler-Maclaurin tail",
        tolerance: ctx.tolerance,
        achieved: last,
    })
}

/// First generalized Stieltjes constant γ₁(a), defined by
/// ζ(s, a) = 1/(s-1) - ψ(a) - γ₁(a)(s-1) + O((s-1)²).
pub fn stieltjes1(a: Dd, ctx: &PrecisionContext) -> Result<Approx> {
    if a.to_f64() <= 0.0 {
        return Err(Error::domain("a", a.to_f64(), "a > 0"));
    }
    let n = head_len(ctx);
    let mut val = Dd::ZERO;
    let mut abs_sum = 0.0;
    for k in 0..n {
        let t = a + Dd::from(k as u64);
        let term = t.ln() / t;
        val += term;
        abs_sum += term.to_f64().abs();
    }
    let x = a + Dd::from(n as u64);
    let ln_x = x.ln();
    val = val - ln_x.sqr() * Dd::HALF + ln_x / x.mul_f64(2.0);
    let table = bernoulli::table();
    let inv_x2 = (x * x).recip();
    let mut xp = inv_x2;
    // H_{2j-1}
    let mut harm = Dd::ONE;
    let mut last = f64::INFINITY;
    for j in 1..table.b2.len() {
        let term = table.b2[j] / Dd::from(2 * j as u64) * xp * (ln_x - harm);
        val += term;
        last = term.to_f64().abs();
        if last < ctx.tolerance * 1e-2 * val.to_f64().abs().max(1e-300) {
            return Ok(Approx::new(val, last + rounding(abs_sum + ln_x.to_f64().powi(2))));
        }
        xp *= inv_x2;
        harm += Dd::from(2 * j as u64).recip() + Dd::from(2 * j as u64 + 1).recip();
    }
    Err(Error::NonConvergence {
        context: "Stieltjes constant Euler-Maclaurin tail",
        tolerance: ctx.tolerance,
        achieved: last,
    })
}

/// Exponent from which Dirichlet series are summed directly rather than by
/// Euler-Maclaurin; there the terms past n = 1 are tiny and must keep their
/// relative accuracy.
pub const DIRECT_SERIES_FROM: f64 = 16.0;

/// Σ w(n) n^{-s} and -Σ w(n) log n n^{-s} summed directly, for s >= DIRECT_SERIES_FROM.
///
/// Terms are added until the tail bound drops below the tolerance relative to
/// the first nonzero term beyond n = 1, so the deviation from the leading term
/// is resolved to full relative precision.
pub(crate) fn direct_pair(
    s: Dd,
    weight: impl Fn(u64) -> i32,
    ctx: &PrecisionContext,
) -> (Approx, Approx) {
    let sf = s.to_f64();
    let mut val = Dd::ZERO;
    let mut der = Dd::ZERO;
    let mut scale: Option<f64> = None;
    let mut n: u64 = 1;
    loop {
        let w = weight(n);
        if n == 1 {
            val += Dd::from(w);
        } else {
            if w != 0 {
                let ln_n = Dd::from(n).ln();
                let p = (-(s * ln_n)).exp();
                let t = p.mul_f64(f64::from(w));
                val += t;
                der -= ln_n * t;
                if scale.is_none() {
                    scale = Some((p * ln_n).to_f64());
                }
            }
            let nf = n as f64;
            let ln_n = nf.ln();
            let tail = (nf.powf(1.0 - sf)) * (ln_n / (sf - 1.0) + 1.0 / (sf - 1.0).powi(2));
            // no termination before the first nonzero term has fixed the scale
            let target = scale.map_or(0.0, |sc| ctx.tolerance * 1e-2 * sc);
            if tail < target || n > 10_000_000 {
                let err = tail + 64.0 * EPSILON * val.to_f64().abs();
                return (Approx::new(val, err), Approx::new(der, tail + 64.0 * EPSILON * der.to_f64().abs()));
            }
        }
        n += 1;
    }
}

/// ζ(s) and ζ'(s) for real s > 1.
pub fn zeta_pair(s: f64, ctx: &PrecisionContext) -> Result<(Approx, Approx)> {
    if s <= 1.0 {
        return Err(Error::domain("s", s, "s > 1"));
    }
    if s >= DIRECT_SERIES_FROM {
        return Ok(direct_pair(Dd::new(s), |_| 1, ctx));
    }
    hurwitz_pair(Dd::new(s), Dd::ONE, ctx)
}

pub fn zeta(s: f64, ctx: &PrecisionContext) -> Result<Approx> {
    Ok(zeta_pair(s, ctx)?.0)
}

/// ζ'(s)/ζ(s) for real s > 1.
pub fn zeta_log_deriv(s: f64, ctx: &PrecisionContext) -> Result<Approx> {
    let (z, dz) = zeta_pair(s, ctx)?;
    Ok(dz.div(&z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn zeta_two_against_slow_series() {
        // Independent oracle: partial sum to N plus the first two tail terms,
        // remainder below 1/(6 N^3).
        let n = 200_000u64;
        let mut s = 0.0f64;
        for k in (1..=n).rev() {
            s += 1.0 / (k as f64 * k as f64);
        }
        let nf = n as f64;
        let oracle = s + 1.0 / nf - 1.0 / (2.0 * nf * nf);
        let z = zeta(2.0, &ctx()).unwrap();
        assert!((z.value.to_f64() - oracle).abs() < 1e-14);
        let pi2_6 = Dd::PI.sqr() / Dd::new(6.0);
        assert!((z.value - pi2_6).abs().to_f64() < 1e-30);
        assert!(z.error <= 1e-28);
    }

    #[test]
    fn zeta_tends_to_one() {
        let z = zeta(50.0, &ctx()).unwrap();
        let excess = (z.value - Dd::ONE).to_f64();
        assert!(excess > 0.0 && excess < 2f64.powi(-49) * 1.01);
    }

    #[test]
    fn zeta_four_closed_form() {
        let z = zeta(4.0, &ctx()).unwrap();
        let expect = Dd::PI.powi(4) / Dd::new(90.0);
        assert!((z.value - expect).abs().to_f64() < 1e-30);
    }

    #[test]
    fn digamma_and_stieltjes_reference_values() {
        let c = ctx();
        let psi1 = digamma(Dd::ONE, &c).unwrap();
        assert!((psi1.value + Dd::EULER_GAMMA).abs().to_f64() < 1e-30);
        // ψ(1/2) = -γ - 2 log 2
        let psi_half = digamma(Dd::HALF, &c).unwrap();
        let expect = -Dd::EULER_GAMMA - Dd::LN2.mul_f64(2.0);
        assert!((psi_half.value - expect).abs().to_f64() < 1e-30);
        // γ₁ = -0.0728158454836767248605863758749547...
        let g1 = stieltjes1(Dd::ONE, &c).unwrap();
        let expect = Dd::parse("-0.0728158454836767248605863758749547").unwrap();
        assert!((g1.value - expect).abs().to_f64() < 1e-30);
    }

    #[test]
    fn hurwitz_derivative_matches_finite_difference() {
        let c = ctx();
        let a = Dd::from_ratio(1, 3);
        let s = 2.5;
        let h = 1e-6;
        let (_, d) = hurwitz_pair(Dd::new(s), a, &c).unwrap();
        let (p, _) = hurwitz_pair(Dd::new(s + h), a, &c).unwrap();
        let (m, _) = hurwitz_pair(Dd::new(s - h), a, &c).unwrap();
        let fd = (p.value - m.value).to_f64() / (2.0 * h);
        assert!((fd - d.value.to_f64()).abs() < 1e-8 * fd.abs());
    }

    #[test]
    fn direct_and_euler_maclaurin_agree_at_moderate_s() {
        let c = ctx();
        let (v1, d1) = hurwitz_pair(Dd::new(16.0), Dd::ONE, &c).unwrap();
        let (v2, d2) = direct_pair(Dd::new(16.0), |_| 1, &c);
        assert!((v1.value - v2.value).abs().to_f64() < 1e-30);
        assert!((d1.value - d2.value).abs().to_f64() < 1e-30);
    }
}
