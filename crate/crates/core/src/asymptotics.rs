//! Wirsing constants, the Landau and Ramanujan approximants, and winners.
//!
//! S(x) ~ C₀ x log^{δ-1} x. If L_S(s) ~ A (s-1)^{-δ} as s -> 1 then
//! C₀ = A/Γ(δ). For the quadratic families A follows from
//!
//!   L_{S_D}(s)² = ζ(s) L(s, χ_D) Q(s) Π_{p|D} (1 - p^{-s}),
//!   Q(s) = Π_{(D/p)=-1} (1 - p^{-2s})^{-1},
//!
//! and Q(2) is computed by doubling: with R(s) = ζ(s) Π_{p|D}(1-p^{-s}) / L(s, χ_D)
//! one has R(s) = Q(s)²/Q(2s), so log Q(2) = Σ_{k≥1} 2^{-k} log R(2^k).

use serde::Serialize;

use crate::dd::Dd;
use crate::ek::EkEstimate;
use crate::error::{Error, Result};
use crate::lfun::{dirichlet_l, gamma_function, quad, zeta, Approx, PrecisionContext, QuadraticCharacter};
use crate::par::{self, Exec};
use crate::setspec::{ExponentRule, Family, SetDescriptor};
use crate::sieve::{self, CharTable, PrimeTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum C0Method {
    Direct,
    Accelerated,
}

#[derive(Clone, Debug, Serialize)]
pub struct WirsingConstant {
    pub set: String,
    pub value: f64,
    pub error: f64,
    pub method: C0Method,
    /// Partial products (P, C₀ truncated at P) for the direct path.
    pub partials: Vec<(u64, f64)>,
    /// Whether the direct value is the extrapolated one.
    pub extrapolated: bool,
}

/// Γ(δ) for rational δ in (0, 1].
fn gamma_of_delta(desc: &SetDescriptor, ctx: &PrecisionContext) -> Result<Approx> {
    let d = desc.delta;
    if *d.numer() == 0 {
        return Err(Error::domain("delta", 0, "delta > 0"));
    }
    gamma_function(Dd::from_ratio(i128::from(*d.numer()), i128::from(*d.denom())), ctx)
}

// ---------------------------------------------------------------------------
// accelerated path

/// Q(2) = Π_{(D/p)=-1} (1 - p^{-2})^{-1} by the doubling device.
pub fn inert_euler_product(d: i64, ctx: &PrecisionContext) -> Result<Approx> {
    let chi = QuadraticCharacter::negative_fundamental(d)?;
    let ram = chi.ramified_primes();
    let mut log_q = Approx::exact(Dd::ZERO);
    let mut k = 1;
    loop {
        let s = 2f64.powi(k);
        let sd = Dd::new(s);
        let mut r = zeta(s, ctx)?.div(&dirichlet_l(s, &chi, ctx)?);
        for &p in &ram {
            let f = Dd::ONE - (-(sd * Dd::from(p).ln())).exp();
            r = r.mul(&Approx::exact(f));
        }
        let term = r.ln().scale(0.5f64.powi(k));
        log_q = log_q.add(&term);
        // log R(s) ≈ 2 Σ_{inert} p^{-s}, so the remaining terms sum to < the last one
        if term.to_f64().abs() < ctx.tolerance * 1e-2 || k >= 12 {
            log_q.error += term.to_f64().abs();
            return Ok(log_q.exp());
        }
        k += 1;
    }
}

/// A = lim (s-1)^{1/2} L_{S_D}(s) for the quadratic semigroup S_D.
fn quadratic_residue_constant(d: i64, ctx: &PrecisionContext) -> Result<Approx> {
    let chi = QuadraticCharacter::negative_fundamental(d)?;
    let mut sq = dirichlet_l(1.0, &chi, ctx)?.mul(&inert_euler_product(d, ctx)?);
    for p in chi.ramified_primes() {
        sq = sq.mul(&Approx::exact(Dd::ONE - Dd::from(p).recip()));
    }
    Ok(sq.sqrt())
}

/// The residue constant A for the families with a closed factorization.
fn accelerated_residue(desc: &SetDescriptor, ctx: &PrecisionContext) -> Result<Option<Approx>> {
    let euler_factor = |p: u64| Approx::exact((Dd::ONE - Dd::from(p).recip()).recip());
    let l1 = |d: i64| -> Result<Approx> { dirichlet_l(1.0, &QuadraticCharacter::negative_fundamental(d)?, ctx) };
    Ok(Some(match desc.family {
        Family::QuadSemigroup(d) => quadratic_residue_constant(d, ctx)?,
        // S_B = {2^e} · S_{-4}
        Family::SumTwoSquares => quadratic_residue_constant(-4, ctx)?.mul(&euler_factor(2)),
        // S_H = {3^e} · S_{-3}
        Family::Hexagonal => quadratic_residue_constant(-3, ctx)?.mul(&euler_factor(3)),
        // L_{S'_D} = L_{S_D}/L(s, χ_D)
        Family::SPrime(d) => quadratic_residue_constant(d, ctx)?.div(&l1(d)?),
        // L_{NH} = L_{S_B}/L(s, χ_{-4})
        Family::NonHypotenuse => quadratic_residue_constant(-4, ctx)?.mul(&euler_factor(2)).div(&l1(-4)?),
        _ => return Ok(None),
    }))
}

/// C₀ through the L-function factorization; None for sets without one.
pub fn wirsing_c0_accelerated(desc: &SetDescriptor, ctx: &PrecisionContext) -> Result<Option<WirsingConstant>> {
    if desc.family == Family::Naturals {
        return Ok(Some(WirsingConstant {
            set: desc.name.clone(),
            value: 1.0,
            error: 0.0,
            method: C0Method::Accelerated,
            partials: Vec::new(),
            extrapolated: false,
        }));
    }
    let Some(a) = accelerated_residue(desc, ctx)? else {
        return Ok(None);
    };
    let c0 = a.div(&gamma_of_delta(desc, ctx)?);
    Ok(Some(WirsingConstant {
        set: desc.name.clone(),
        value: c0.to_f64(),
        error: c0.error,
        method: C0Method::Accelerated,
        partials: Vec::new(),
        extrapolated: false,
    }))
}

// ---------------------------------------------------------------------------
// direct path

const PRIME_BLOCK: usize = 1 << 14;

/// log of (Σ_e χ_S(p^e) p^{-e}) (1 - 1/p)^δ.
fn log_local_factor(desc: &SetDescriptor, p: u64, delta: f64) -> Result<f64> {
    let pf = p as f64;
    let x = 1.0 / pf;
    let lf = match desc.classify_prime(p) {
        ExponentRule::All => -(-x).ln_1p(),
        ExponentRule::Even => -(-x * x).ln_1p(),
        ExponentRule::None => 0.0,
        _ => {
            let mut sum = 0.0f64;
            let mut pe = 1.0f64;
            let mut e = 1u32;
            while pe * x > 1e-19 {
                pe *= x;
                if desc.allows(p, e)? {
                    sum += pe;
                }
                e += 1;
            }
            sum.ln_1p()
        }
    };
    Ok(lf + delta * (-x).ln_1p())
}

fn log_product(desc: &SetDescriptor, ps: &[u64], delta: f64, exec: Exec) -> Result<f64> {
    let nblocks = ps.len().div_ceil(PRIME_BLOCK);
    let parts = par::map_indexed(exec, nblocks, |b| -> Result<(f64, f64)> {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for &p in &ps[b * PRIME_BLOCK..((b + 1) * PRIME_BLOCK).min(ps.len())] {
            let v = log_local_factor(desc, p, delta)?;
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

/// Fit v(P) = C + a/log P + b/log² P through three points and return C.
pub fn extrapolate_log_p(points: &[(u64, f64); 3]) -> f64 {
    // linear in (C, a, b) with t = 1/log P; solve the 3x3 Vandermonde system
    let t: Vec<f64> = points.iter().map(|&(p, _)| 1.0 / (p as f64).ln()).collect();
    let v: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    // Lagrange interpolation in t evaluated at t = 0
    let mut c = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= (0.0 - t[j]) / (t[i] - t[j]);
            }
        }
        c += w * v[i];
    }
    c
}

/// Direct Euler product over p < P for P in `cutoffs` (ascending, three values
/// when extrapolating), using a prime table covering the largest cutoff.
pub fn wirsing_c0_direct_with(
    desc: &SetDescriptor,
    cutoffs: &[u64],
    primes: &PrimeTable,
    extrapolate: bool,
    ctx: &PrecisionContext,
    exec: Exec,
) -> Result<WirsingConstant> {
    let Some(&last) = cutoffs.last() else {
        return Err(Error::domain("cutoffs", "[]", "at least one cutoff"));
    };
    if last > primes.bound() {
        return Err(Error::Capacity { what: "C0 product cutoff", value: last, bound: primes.bound() });
    }
    if desc.tau_modulus().is_some() && desc.backing_bound() < last {
        return Err(Error::BackingBound { q: desc.tau_modulus().unwrap_or(0), bound: desc.backing_bound(), n: last });
    }
    let delta = desc.delta_f64();
    let gamma = gamma_of_delta(desc, ctx)?.to_f64();
    let mut partials = Vec::with_capacity(cutoffs.len());
    let mut acc = 0.0f64;
    let mut from = 0usize;
    for &cut in cutoffs {
        let to = primes.pi(cut.saturating_sub(1));
        acc += log_product(desc, &primes.primes()[from..to.max(from)], delta, exec)?;
        from = to.max(from);
        partials.push((cut, acc.exp() / gamma));
    }
    let raw = partials[partials.len() - 1].1;
    let spread = if partials.len() > 1 { (raw - partials[partials.len() - 2].1).abs() } else { f64::NAN };
    let (value, error, extrapolated) = if extrapolate && partials.len() == 3 {
        let arr = [partials[0], partials[1], partials[2]];
        let c = extrapolate_log_p(&arr);
        (c, (c - raw).abs().max(spread), true)
    } else {
        (raw, spread, false)
    };
    Ok(WirsingConstant { set: desc.name.clone(), value, error, method: C0Method::Direct, partials, extrapolated })
}

/// Default cutoffs for the direct product.
pub const DIRECT_CUTOFFS: [u64; 3] = [1_000_000, 10_000_000, 100_000_000];

pub fn wirsing_c0_direct(desc: &SetDescriptor, ctx: &PrecisionContext) -> Result<WirsingConstant> {
    let primes = sieve::primes_up_to(DIRECT_CUTOFFS[2])?;
    wirsing_c0_direct_with(desc, &DIRECT_CUTOFFS, &primes, false, ctx, Exec::default())
}

/// C₀(S): the accelerated path when the set has one, otherwise the direct product.
pub fn wirsing_c0(desc: &SetDescriptor, ctx: &PrecisionContext) -> Result<WirsingConstant> {
    match wirsing_c0_accelerated(desc, ctx)? {
        Some(c) => Ok(c),
        None => wirsing_c0_direct(desc, ctx),
    }
}

// ---------------------------------------------------------------------------
// approximants

/// C₁(S) = (1 - δ)(1 - γ_S).
pub fn c1(desc: &SetDescriptor, gamma_s: &EkEstimate) -> f64 {
    (1.0 - desc.delta_f64()) * (1.0 - gamma_s.value_f64())
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 2.0) || !x.is_finite() {
        return Err(Error::domain("x", x, "x > 2"));
    }
    Ok(())
}

/// C₀ x log^{δ-1} x.
pub fn landau_approx(delta: f64, c0: f64, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(c0 * x * x.ln().powf(delta - 1.0))
}

/// Relative tolerance of the approximant quadrature.
pub const QUAD_REL_TOL: f64 = 1e-10;

/// ∫_2^x log^{δ-1} t dt, computed as x ∫_{log 2}^{log x} e^{u - log x} u^{δ-1} du.
pub fn log_integral(delta: f64, x: f64) -> Result<f64> {
    check_x(x)?;
    if delta == 1.0 {
        return Ok(x - 2.0);
    }
    let big_u = x.ln();
    let f = |u: f64| (u - big_u).exp() * u.powf(delta - 1.0);
    Ok(x * quad::integrate(f, std::f64::consts::LN_2, big_u, 0.0, QUAD_REL_TOL)?)
}

/// C₀ ∫_2^x log^{δ-1} t dt.
pub fn ramanujan_approx(delta: f64, c0: f64, x: f64) -> Result<f64> {
    Ok(c0 * log_integral(delta, x)?)
}

/// (∫_2^x log^{δ-1} - x log^{δ-1} x (1 + (1-δ)/log x)) / (x log^{δ-1} x) · log² x,
/// the observed constant of the O(1/log² x) remainder.
pub fn expansion_constant(delta: f64, x: f64) -> Result<f64> {
    let lx = x.ln();
    let lead = x * lx.powf(delta - 1.0);
    let two_term = lead * (1.0 + (1.0 - delta) / lx);
    Ok((log_integral(delta, x)? - two_term) / lead * lx * lx)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Winner {
    Landau,
    Ramanujan,
    Undecided,
}

impl Winner {
    pub fn as_str(self) -> &'static str {
        match self {
            Winner::Landau => "Landau",
            Winner::Ramanujan => "Ramanujan",
            Winner::Undecided => "undecided",
        }
    }
}

/// Asymptotic winner from γ_S: the error interval must clear 1/2.
pub fn winner(gamma_s: &EkEstimate) -> Winner {
    winner_from(gamma_s.value_f64(), gamma_s.error)
}

pub fn winner_from(value: f64, error: f64) -> Winner {
    if value + error < 0.5 {
        Winner::Ramanujan
    } else if value - error > 0.5 {
        Winner::Landau
    } else {
        Winner::Undecided
    }
}

// ---------------------------------------------------------------------------
// empirical comparison

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonPoint {
    pub x: u64,
    pub s: u64,
    pub landau: f64,
    pub ramanujan: f64,
    pub err_l: f64,
    pub err_r: f64,
    /// S(x) minus the Ramanujan approximant.
    pub theta: f64,
    /// The approximant closer to S(x) at this point.
    pub closer: Winner,
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxComparison {
    pub set: String,
    pub delta: f64,
    pub c0: f64,
    pub points: Vec<ComparisonPoint>,
    /// Declared from γ_S when supplied.
    pub winner: Option<Winner>,
    /// Least-squares slope of log|θ| against log x.
    pub theta_exponent: Option<f64>,
}

pub const CSV_HEADER: &str = "x,S,landau,ramanujan,err_l,err_r,theta,closer";

impl ApproxComparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
                p.x,
                p.s,
                p.landau,
                p.ramanujan,
                p.err_l,
                p.err_r,
                p.theta,
                p.closer.as_str()
            ));
        }
        out
    }
}

fn growth_exponent(points: &[ComparisonPoint]) -> Option<f64> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.theta != 0.0)
        .map(|p| ((p.x as f64).ln(), p.theta.abs().ln()))
        .collect();
    if data.len() < 2 {
        return None;
    }
    let n = data.len() as f64;
    let mx = data.iter().map(|d| d.0).sum::<f64>() / n;
    let my = data.iter().map(|d| d.1).sum::<f64>() / n;
    let sxx: f64 = data.iter().map(|d| (d.0 - mx).powi(2)).sum();
    let sxy: f64 = data.iter().map(|d| (d.0 - mx) * (d.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Counts against both approximants at each x.
pub fn empirical_compare(
    desc: &SetDescriptor,
    xs: &[u64],
    table: &CharTable,
    c0: f64,
    gamma_s: Option<&EkEstimate>,
) -> Result<ApproxComparison> {
    let delta = desc.delta_f64();
    let mut points = Vec::with_capacity(xs.len());
    for &x in xs {
        if x > table.bound() {
            return Err(Error::Capacity { what: "comparison point", value: x, bound: table.bound() });
        }
        let s = table.count_upto(x);
        let xf = x as f64;
        let landau = landau_approx(delta, c0, xf)?;
        let ramanujan = ramanujan_approx(delta, c0, xf)?;
        let (err_l, err_r) = ((s as f64 - landau).abs(), (s as f64 - ramanujan).abs());
        let closer = if err_r < err_l {
            Winner::Ramanujan
        } else if err_l < err_r {
            Winner::Landau
        } else {
            Winner::Undecided
        };
        points.push(ComparisonPoint { x, s, landau, ramanujan, err_l, err_r, theta: s as f64 - ramanujan, closer });
    }
    let theta_exponent = growth_exponent(&points);
    Ok(ApproxComparison {
        set: desc.name.clone(),
        delta,
        c0,
        points,
        winner: gamma_s.map(winner),
        theta_exponent,
    })
}

/// γ_S rows reported by the literature for sets whose exact constants are out
/// of reach here; shown beside estimates, never asserted.
pub const LITERATURE_ROWS: [(&str, &str, &str); 11] = [
    ("sum2sq", "-0.1638", "Ramanujan"),
    ("nonhyp", "-0.4095", "Ramanujan"),
    ("tau-nondiv:3", "+0.5349", "Landau"),
    ("tau-nondiv:5", "+0.3995", "Ramanujan"),
    ("tau-nondiv:7", "+0.2316", "Ramanujan"),
    ("tau-nondiv:23", "+0.2166", "Ramanujan"),
    ("tau-nondiv:691", "+0.5717", "Landau"),
    ("phi-nondiv:q, q<=67", "<0.4977", "Ramanujan"),
    ("phi-nondiv:q, q>=71", ">0.5023", "Landau"),
    ("progsem:q:1, q<=7", ">0.5247", "Landau"),
    ("progsem:q:1, q>7", "<0.2862", "Ramanujan"),
];
