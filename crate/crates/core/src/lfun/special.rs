use super::bernoulli;
use super::quad;
use super::{Approx, PrecisionContext};
use crate::dd::{Dd, EPSILON};
use crate::error::{Error, Result};

/// Euler's constant to 50 decimals.
pub const EULER_GAMMA_LITERAL: &str = "0.57721566490153286060651209008240243104215933593992";

pub fn euler_gamma() -> Dd {
    Dd::EULER_GAMMA
}

/// Shift applied before the Stirling series; beyond it the series converges
/// to well under the double-double epsilon within the tabulated Bernoulli numbers.
const STIRLING_FROM: f64 = 40.0;

fn stirling(z: Dd) -> Dd {
    let half_ln_2pi = (Dd::PI.mul_f64(2.0)).ln() * Dd::HALF;
    let mut val = (z - Dd::HALF) * z.ln() - z + half_ln_2pi;
    let table = bernoulli::table();
    let inv_z2 = (z * z).recip();
    let mut zp = z.recip();
    for j in 1..table.b2.len() {
        let denom = Dd::from((2 * j * (2 * j - 1)) as u64);
        let term = table.b2[j] / denom * zp;
        val += term;
        if term.to_f64().abs() < 1e-34 * val.to_f64().abs() {
            break;
        }
        zp *= inv_z2;
    }
    val
}

/// log Γ(x) for x > 0.
pub fn ln_gamma(x: Dd) -> Result<Dd> {
    if !(x.to_f64() > 0.0) {
        return Err(Error::domain("x", x.to_f64(), "x > 0"));
    }
    let mut z = x;
    let mut prod = Dd::ONE;
    while z.to_f64() < STIRLING_FROM {
        prod *= z;
        z += Dd::ONE;
    }
    Ok(stirling(z) - prod.ln())
}

/// Γ(x) for x > 0.
pub fn gamma_function(x: Dd, _ctx: &PrecisionContext) -> Result<Approx> {
    if !(x.to_f64() > 0.0) {
        return Err(Error::domain("x", x.to_f64(), "x > 0"));
    }
    let mut z = x;
    let mut prod = Dd::ONE;
    while z.to_f64() < STIRLING_FROM {
        prod *= z;
        z += Dd::ONE;
    }
    let lg = stirling(z);
    let v = lg.exp() / prod;
    // relative error of exp(lg) is about |lg| ulp(1)
    let err = v.to_f64().abs() * EPSILON * (64.0 + 8.0 * lg.to_f64().abs());
    Ok(Approx::new(v, err))
}

/// Arithmetic-geometric mean of a, b > 0.
pub fn agm(a: Dd, b: Dd, ctx: &PrecisionContext) -> Result<Approx> {
    if !(a.to_f64() > 0.0 && b.to_f64() > 0.0) {
        return Err(Error::domain("a, b", format!("{}, {}", a.to_f64(), b.to_f64()), "a > 0 and b > 0"));
    }
    let mut a = a;
    let mut b = b;
    for _ in 0..100 {
        let gap = (a - b).abs().to_f64();
        if gap <= 4.0 * EPSILON * a.to_f64() {
            return Ok(Approx::new(a, gap + 8.0 * EPSILON * a.to_f64()));
        }
        let next_a = (a + b) * Dd::HALF;
        let next_b = (a * b).sqrt();
        a = next_a;
        b = next_b;
    }
    Err(Error::NonConvergence {
        context: "AGM iteration",
        tolerance: ctx.tolerance,
        achieved: (a - b).abs().to_f64(),
    })
}

/// ∫₀¹ dx/√(1-x⁴) by adaptive Gauss-Kronrod after the substitution
/// x = 1 - u², which removes the square-root singularity at x = 1.
pub fn lemniscate_integral(tolerance: f64) -> Result<f64> {
    let f = |u: f64| {
        let x = 1.0 - u * u;
        // (1 - x⁴) = u² (1 + x)(1 + x²), dx = -2u du
        2.0 / ((1.0 + x) * (1.0 + x * x)).sqrt()
    };
    quad::integrate(f, 0.0, 1.0, tolerance, tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    #[test]
    fn embedded_gamma_matches_literal() {
        let lit = Dd::parse(EULER_GAMMA_LITERAL).unwrap();
        assert!((lit - euler_gamma()).abs().to_f64() < 1e-31);
        assert!(EULER_GAMMA_LITERAL.starts_with("0.57721566"));
        assert!(EULER_GAMMA_LITERAL.len() >= 42);
    }

    #[test]
    fn gamma_exact_identities() {
        let c = ctx();
        let g1 = gamma_function(Dd::ONE, &c).unwrap();
        assert!((g1.value - Dd::ONE).abs().to_f64() < 1e-28);
        let gh = gamma_function(Dd::HALF, &c).unwrap();
        assert!((gh.value - Dd::PI.sqrt()).abs().to_f64() < 1e-28);
        let g5 = gamma_function(Dd::new(5.0), &c).unwrap();
        assert!((g5.value - Dd::new(24.0)).abs().to_f64() < 1e-28);
    }

    #[test]
    fn gamma_reflection_at_quarter() {
        let c = ctx();
        let a = gamma_function(Dd::new(0.25), &c).unwrap();
        let b = gamma_function(Dd::new(0.75), &c).unwrap();
        // π / sin(π/4) = π √2
        let expect = Dd::PI * Dd::SQRT2;
        assert!(((a.value * b.value) - expect).abs().to_f64() < 1e-12);
        assert!(((a.value * b.value) - expect).abs().to_f64() < 1e-29);
    }

    #[test]
    fn agm_examples() {
        let c = ctx();
        let one = agm(Dd::ONE, Dd::ONE, &c).unwrap();
        assert_eq!(one.value, Dd::ONE);
        let m = agm(Dd::ONE, Dd::SQRT2, &c).unwrap();
        let quad = lemniscate_integral(1e-13).unwrap();
        let gauss = 2.0 / std::f64::consts::PI * quad;
        assert!((1.0 / m.to_f64() - gauss).abs() < 1e-10);
        let lemniscate = Dd::PI / m.value;
        assert!(lemniscate.to_f64() > 0.0);
        assert!((lemniscate.to_f64() - 2.0 * quad).abs() < 1e-3);
        assert!((lemniscate.to_f64() - 2.622).abs() < 1e-3);
        assert!(agm(Dd::ZERO, Dd::ONE, &c).is_err());
    }
}
