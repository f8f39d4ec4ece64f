//! L(s, χ_D) and L'(s, χ_D) for real s >= 1.
//!
//! For 1 < s < 16 the series is split over residue classes modulo |D| into
//! Hurwitz zeta values. At s = 1 the poles of the Hurwitz pieces cancel
//! because Σ χ(a) = 0, leaving
//!
//! L(1, χ) = A / k,  L'(1, χ) = (B - A log k) / k,  k = |D|,
//!
//! with A = -Σ χ(a) ψ(a/k) and B = -Σ χ(a) γ₁(a/k). For large s the Dirichlet
//! series is summed directly.

use serde::Serialize;

use super::hurwitz::{digamma, direct_pair, hurwitz_pair, stieltjes1, DIRECT_SERIES_FROM};
use super::{Approx, PrecisionContext, QuadraticCharacter};
use crate::dd::Dd;
use crate::error::{Error, Result};

/// L(1, χ), L'(1, χ) and their ratio.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LAtOne {
    pub value: Approx,
    pub deriv: Approx,
    pub log_deriv: Approx,
}

fn character_sum(chi: &QuadraticCharacter) -> i64 {
    (1..=chi.modulus()).map(|a| i64::from(chi.eval(a))).sum()
}

fn at_one(chi: &QuadraticCharacter, ctx: &PrecisionContext) -> Result<LAtOne> {
    if character_sum(chi) != 0 {
        return Err(Error::domain("s", 1, "s > 1 for a principal character"));
    }
    let k = chi.modulus();
    let kd = Dd::from(k);
    let mut a_sum = Approx::exact(Dd::ZERO);
    let mut b_sum = Approx::exact(Dd::ZERO);
    for a in 1..=k {
        let c = chi.eval(a);
        if c == 0 {
            continue;
        }
        let frac = Dd::from_ratio(a as i128, k as i128);
        let psi = digamma(frac, ctx)?;
        let g1 = stieltjes1(frac, ctx)?;
        a_sum = a_sum.sub(&psi.scale(f64::from(c)));
        b_sum = b_sum.sub(&g1.scale(f64::from(c)));
    }
    let kk = Approx::exact(kd);
    let value = a_sum.div(&kk);
    let deriv = b_sum.sub(&a_sum.mul(&Approx::exact(kd.ln()))).div(&kk);
    let log_deriv = deriv.div(&value);
    Ok(LAtOne { value, deriv, log_deriv })
}

/// L(1, χ_D) together with L'(1, χ_D) and the logarithmic derivative.
pub fn l_log_deriv_at_1(d: i64, ctx: &PrecisionContext) -> Result<LAtOne> {
    let chi = QuadraticCharacter::negative_fundamental(d)?;
    at_one(&chi, ctx)
}

/// (L(s, χ), L'(s, χ)) for real s >= 1.
pub fn dirichlet_l_pair(s: f64, chi: &QuadraticCharacter, ctx: &PrecisionContext) -> Result<(Approx, Approx)> {
    if !(s >= 1.0) {
        return Err(Error::domain("s", s, "s >= 1"));
    }
    if s == 1.0 {
        let v = at_one(chi, ctx)?;
        return Ok((v.value, v.deriv));
    }
    let sd = Dd::new(s);
    if s >= DIRECT_SERIES_FROM {
        return Ok(direct_pair(sd, |n| chi.eval(n), ctx));
    }
    let k = chi.modulus();
    let kd = Dd::from(k);
    let mut val = Approx::exact(Dd::ZERO);
    let mut der = Approx::exact(Dd::ZERO);
    for a in 1..=k {
        let c = chi.eval(a);
        if c == 0 {
            continue;
        }
        let (z, dz) = hurwitz_pair(sd, Dd::from_ratio(a as i128, k as i128), ctx)?;
        val = val.add(&z.scale(f64::from(c)));
        der = der.add(&dz.scale(f64::from(c)));
    }
    let ln_k = Approx::exact(kd.ln());
    let k_ms = Approx::exact((-(sd * kd.ln())).exp());
    let l = val.mul(&k_ms);
    let dl = der.mul(&k_ms).sub(&ln_k.mul(&l));
    Ok((l, dl))
}

pub fn dirichlet_l(s: f64, chi: &QuadraticCharacter, ctx: &PrecisionContext) -> Result<Approx> {
    Ok(dirichlet_l_pair(s, chi, ctx)?.0)
}

pub fn dirichlet_l_prime(s: f64, chi: &QuadraticCharacter, ctx: &PrecisionContext) -> Result<Approx> {
    Ok(dirichlet_l_pair(s, chi, ctx)?.1)
}

/// L'(s, χ)/L(s, χ).
pub fn l_log_deriv(s: f64, chi: &QuadraticCharacter, ctx: &PrecisionContext) -> Result<Approx> {
    let (l, dl) = dirichlet_l_pair(s, chi, ctx)?;
    Ok(dl.div(&l))
}
