//! Declarative multiplicative sets.
//!
//! A set is described by an ordered list of rules `(prime condition,
//! exponent rule)`; the first rule whose condition matches p decides the
//! allowed exponents E(p). The last rule must be the catch-all `any`.
//!
//! Document format (one field per line, `#` starts a comment):
//!
//! ```text
//! name  = sum2sq-like
//! delta = 1/2            # optional when derivable from the rules
//! rule  = cond=prime 2; exp=all
//! rule  = cond=residue 4 1; exp=all
//! rule  = cond=any; exp=even
//! ```
//!
//! Conditions: `residue d a`, `kronecker D v`, `prime p`, `predicate KEY`,
//! `any`. Exponent rules: `all`, `none`, `even`, `set:[e1,e2,...]` with an
//! optional `,tail>=k`, and `computed` (only with a predicate).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use sha2::{Digest, Sha256};

use crate::arith;
use crate::error::{Error, Result};
use crate::lfun::{kronecker, QuadraticCharacter};
use crate::tau::{self, TauTable};

/// Largest combined modulus over which densities are derived by enumeration.
const MAX_DENSITY_MODULUS: u64 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    /// E(p) = {e : q ∤ τ(p^e)}.
    TauNondiv(u64),
    /// E(p) = {e : q ∤ φ(p^e)} = {e : q ∤ p^{e-1}(p-1)}.
    PhiNondiv(u64),
}

impl Predicate {
    fn key(&self) -> String {
        match self {
            Predicate::TauNondiv(q) => format!("tau-nondiv:{q}"),
            Predicate::PhiNondiv(q) => format!("phi-nondiv:{q}"),
        }
    }

    fn parse(s: &str) -> Option<Predicate> {
        let (head, q) = s.split_once(':')?;
        let q: u64 = q.trim().parse().ok()?;
        match head.trim() {
            "tau-nondiv" => Some(Predicate::TauNondiv(q)),
            "phi-nondiv" => Some(Predicate::PhiNondiv(q)),
            _ => None,
        }
    }

    fn modulus(&self) -> u64 {
        match *self {
            Predicate::TauNondiv(q) | Predicate::PhiNondiv(q) => q,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PrimeCondition {
    Residue { modulus: u64, residue: u64 },
    Kronecker { d: i64, value: i32 },
    Prime(u64),
    Predicate(Predicate),
    Any,
}

impl PrimeCondition {
    /// Predicates classify every prime; they act as a catch-all for matching.
    fn matches(&self, p: u64) -> bool {
        match *self {
            PrimeCondition::Residue { modulus, residue } => p % modulus == residue,
            PrimeCondition::Kronecker { d, value } => kronecker(d, p as i64) == value,
            PrimeCondition::Prime(p0) => p == p0,
            PrimeCondition::Predicate(_) | PrimeCondition::Any => true,
        }
    }
}

impl fmt::Display for PrimeCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeCondition::Residue { modulus, residue } => write!(f, "residue {modulus} {residue}"),
            PrimeCondition::Kronecker { d, value } => write!(f, "kronecker {d} {value}"),
            PrimeCondition::Prime(p) => write!(f, "prime {p}"),
            PrimeCondition::Predicate(k) => write!(f, "predicate {}", k.key()),
            PrimeCondition::Any => write!(f, "any"),
        }
    }
}

/// Allowed exponents E(p) ⊆ {1, 2, ...}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExponentRule {
    All,
    None,
    /// {2, 4, 6, ...}
    Even,
    /// A finite list plus optionally every exponent >= `tail`.
    Set { finite: Vec<u32>, tail: Option<u32> },
    /// Decided by the rule's predicate.
    Computed,
}

impl ExponentRule {
    /// Membership for the non-computed rules; `None` for `Computed`.
    pub fn allows(&self, e: u32) -> Option<bool> {
        if e == 0 {
            return Some(true);
        }
        match self {
            ExponentRule::All => Some(true),
            ExponentRule::None => Some(false),
            ExponentRule::Even => Some(e.is_multiple_of(2)),
            ExponentRule::Set { finite, tail } => Some(finite.contains(&e) || tail.is_some_and(|k| e >= k)),
            ExponentRule::Computed => None,
        }
    }

    /// E(p) closed under addition (so the set is a semigroup in p).
    fn additively_closed(&self) -> bool {
        match self {
            ExponentRule::All | ExponentRule::None | ExponentRule::Even => true,
            ExponentRule::Set { finite, tail } => {
                let probe = 2 * (finite.iter().copied().max().unwrap_or(0).max(tail.unwrap_or(0))) + 2;
                (1..=probe).all(|a| {
                    (1..=probe).all(|b| {
                        let ok = |e: u32| self.allows(e).unwrap_or(false);
                        !(ok(a) && ok(b)) || ok(a + b)
                    })
                })
            }
            ExponentRule::Computed => false,
        }
    }
}

impl fmt::Display for ExponentRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentRule::All => write!(f, "all"),
            ExponentRule::None => write!(f, "none"),
            ExponentRule::Even => write!(f, "even"),
            ExponentRule::Computed => write!(f, "computed"),
            ExponentRule::Set { finite, tail } => {
                let list: Vec<String> = finite.iter().map(|e| e.to_string()).collect();
                write!(f, "set:[{}]", list.join(","))?;
                if let Some(k) = tail {
                    write!(f, ",tail>={k}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub cond: PrimeCondition,
    pub exp: ExponentRule,
}

/// Recognised families with specialised (accelerated) algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Naturals,
    SumTwoSquares,
    Hexagonal,
    /// Generated by primes with (D/p) = 1 and squares of primes with (D/p) = -1.
    QuadSemigroup(i64),
    /// Generated by primes with (D/p) = -1.
    SPrime(i64),
    /// Integers composed of primes p ≡ a (mod d).
    Progression { d: u64, a: u64 },
    NonHypotenuse,
    PhiNondiv(u64),
    TauNondiv(u64),
    Custom,
}

#[derive(Clone)]
pub struct SetDescriptor {
    pub name: String,
    pub rules: Vec<Rule>,
    pub delta: Ratio<u64>,
    pub rho_hint: Option<f64>,
    pub family: Family,
    tau: Option<Arc<TauTable>>,
}

impl fmt::Debug for SetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetDescriptor")
            .field("name", &self.name)
            .field("rules", &self.rules)
            .field("delta", &self.delta)
            .field("family", &self.family)
            .field("tau_bound", &self.tau.as_ref().map(|t| t.bound()))
            .finish()
    }
}

impl PartialEq for SetDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.rules == other.rules && self.delta == other.delta
    }
}

fn validation(name: &str, message: impl Into<String>) -> Error {
    Error::Validation { name: name.to_string(), message: message.into() }
}

impl SetDescriptor {
    /// Validate rules and derive (or check) δ.
    pub fn new(name: &str, rules: Vec<Rule>, delta: Option<Ratio<u64>>, rho_hint: Option<f64>) -> Result<Self> {
        if rules.is_empty() {
            return Err(validation(name, "no rules"));
        }
        match rules.last().map(|r| &r.cond) {
            Some(PrimeCondition::Any) | Some(PrimeCondition::Predicate(_)) => {}
            _ => return Err(validation(name, "rules leave primes unclassified: the last rule must be the catch-all `any`")),
        }
        for (i, r) in rules.iter().enumerate() {
            check_rule(name, r)?;
            if i + 1 < rules.len() && matches!(r.cond, PrimeCondition::Any | PrimeCondition::Predicate(_)) {
                return Err(validation(name, format!("rule {} matches every prime; later rules are unreachable", i + 1)));
            }
        }
        if let Some(rho) = rho_hint {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(validation(name, "rho must be positive"));
            }
        }
        let derived = derive_delta(&rules);
        let delta = match (delta, derived) {
            (Some(given), Some(d)) if given != d => {
                return Err(validation(name, format!("declared delta {given} disagrees with the rules, which give {d}")));
            }
            (Some(given), _) => given,
            (None, Some(d)) => d,
            (None, None) => return Err(Error::MissingDelta { name: name.to_string() }),
        };
        if *delta.numer() == 0 || delta > Ratio::from_integer(1) {
            return Err(validation(name, format!("delta {delta} outside (0, 1]")));
        }
        Ok(Self {
            name: name.to_string(),
            rules,
            delta,
            rho_hint,
            family: Family::Custom,
            tau: None,
        })
    }

    fn with_family(mut self, family: Family) -> Self {
        self.family = family;
        self
    }

    pub fn delta_f64(&self) -> f64 {
        *self.delta.numer() as f64 / *self.delta.denom() as f64
    }

    /// The τ predicate modulus, if this set is defined through τ.
    pub fn tau_modulus(&self) -> Option<u64> {
        self.rules.iter().find_map(|r| match r.cond {
            PrimeCondition::Predicate(Predicate::TauNondiv(q)) => Some(q),
            _ => None,
        })
    }

    /// Attach the τ table backing a `tau-nondiv` predicate.
    pub fn attach_tau(&mut self, table: Arc<TauTable>) -> Result<()> {
        match self.tau_modulus() {
            Some(q) if q == table.modulus() => {
                self.tau = Some(table);
                Ok(())
            }
            Some(q) => Err(validation(&self.name, format!("tau table is modulo {}, expected {q}", table.modulus()))),
            None => Err(validation(&self.name, "set has no tau predicate")),
        }
    }

    pub fn tau_table(&self) -> Option<&Arc<TauTable>> {
        self.tau.as_ref()
    }

    /// Largest n for which χ_S(n) is available (u64::MAX when unrestricted).
    pub fn backing_bound(&self) -> u64 {
        match (self.tau_modulus(), &self.tau) {
            (Some(_), Some(t)) => t.bound(),
            (Some(_), None) => 0,
            _ => u64::MAX,
        }
    }

    /// The first rule matching the prime p.
    pub fn rule_for(&self, p: u64) -> &Rule {
        self.rules
            .iter()
            .find(|r| r.cond.matches(p))
            .expect("validated descriptors end in a catch-all")
    }

    /// The exponent rule governing p.
    pub fn classify_prime(&self, p: u64) -> &ExponentRule {
        &self.rule_for(p).exp
    }

    /// Whether e ∈ E(p).
    pub fn allows(&self, p: u64, e: u32) -> Result<bool> {
        let rule = self.rule_for(p);
        if let Some(b) = rule.exp.allows(e) {
            return Ok(b);
        }
        match rule.cond {
            PrimeCondition::Predicate(Predicate::PhiNondiv(q)) => Ok(phi_allows(q, p, e)),
            PrimeCondition::Predicate(Predicate::TauNondiv(q)) => {
                let table = self.tau.as_ref().ok_or(Error::BackingBound { q, bound: 0, n: p })?;
                let pe = arith::checked_pow(p, e).unwrap_or(u64::MAX);
                if pe <= table.bound() {
                    Ok(table.get(pe)? != 0)
                } else {
                    // beyond the table, the Hecke recursion from τ(p)
                    Ok(tau::hecke_prime_power(table.get(p)?, p, e, q) != 0)
                }
            }
            _ => unreachable!("computed exponent rules require a predicate"),
        }
    }

    /// E(p) ∩ [1, max_e] as a 0/1 row indexed by e (index 0 is χ(1) = 1).
    pub fn exponent_row(&self, p: u64, max_e: u32) -> Result<Vec<u8>> {
        (0..=max_e).map(|e| self.allows(p, e).map(u8::from)).collect()
    }

    /// Whether the set is a multiplicative semigroup (every E(p) closed under addition).
    pub fn is_semigroup(&self) -> bool {
        self.rules.iter().all(|r| r.exp.additively_closed())
    }

    /// Stable digest of the rules, used to key caches.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.to_document().as_bytes());
        h.finalize().into()
    }

    /// Canonical document text; parsing it returns an equal descriptor.
    pub fn to_document(&self) -> String {
        let mut out = format!("name = {}\ndelta = {}\n", self.name, self.delta);
        if let Some(rho) = self.rho_hint {
            out.push_str(&format!("rho = {rho}\n"));
        }
        for r in &self.rules {
            out.push_str(&format!("rule = cond={}; exp={}\n", r.cond, r.exp));
        }
        out
    }
}

fn phi_allows(q: u64, p: u64, e: u32) -> bool {
    if e == 0 {
        return true;
    }
    // q | p^{e-1}(p-1) iff (p = q and e >= 2) or q | p-1
    if p == q {
        return e == 1;
    }
    !(p - 1).is_multiple_of(q)
}

fn check_rule(name: &str, r: &Rule) -> Result<()> {
    match &r.cond {
        PrimeCondition::Residue { modulus, residue } => {
            if *modulus == 0 || residue >= modulus {
                return Err(validation(name, format!("residue condition needs 0 <= a < d, got {residue} mod {modulus}")));
            }
        }
        PrimeCondition::Kronecker { d, value } => {
            QuadraticCharacter::new(*d)?;
            if !(-1..=1).contains(value) {
                return Err(validation(name, "Kronecker value must be -1, 0 or 1"));
            }
        }
        PrimeCondition::Prime(p) => {
            if !arith::is_prime(*p) {
                return Err(validation(name, format!("{p} is not prime")));
            }
        }
        PrimeCondition::Predicate(k) => {
            if !arith::is_prime(k.modulus()) || k.modulus() == 2 {
                return Err(validation(name, format!("predicate {} needs an odd prime modulus", k.key())));
            }
        }
        PrimeCondition::Any => {}
    }
    let is_pred = matches!(r.cond, PrimeCondition::Predicate(_));
    if is_pred != (r.exp == ExponentRule::Computed) {
        return Err(validation(name, "`exp=computed` goes with `cond=predicate ...` and only there"));
    }
    if let ExponentRule::Set { finite, tail } = &r.exp {
        if finite.contains(&0) || *tail == Some(0) {
            return Err(validation(name, "exponent sets contain positive exponents only"));
        }
    }
    Ok(())
}

/// Dirichlet density of {p : 1 ∈ E(p)}, by counting reduced residues modulo
/// the lcm of all moduli occurring in the rules. `None` when a τ predicate
/// (whose density is not determined by congruences) is involved.
fn derive_delta(rules: &[Rule]) -> Option<Ratio<u64>> {
    let mut m = 1u64;
    for r in rules {
        let k = match &r.cond {
            PrimeCondition::Residue { modulus, .. } => *modulus,
            PrimeCondition::Kronecker { d, .. } => d.unsigned_abs(),
            PrimeCondition::Predicate(Predicate::PhiNondiv(q)) => *q,
            PrimeCondition::Predicate(Predicate::TauNondiv(q)) => return tau::known_nondiv_density(*q),
            PrimeCondition::Prime(_) | PrimeCondition::Any => 1,
        };
        m = m.lcm(&k);
        if m > MAX_DENSITY_MODULUS {
            return None;
        }
    }
    let mut hits = 0u64;
    let mut total = 0u64;
    for a in 1..=m {
        if a.gcd(&m) != 1 {
            continue;
        }
        total += 1;
        // A representative prime-like residue: explicit primes are finitely many
        // and do not affect densities.
        let rule = rules
            .iter()
            .find(|r| match &r.cond {
                PrimeCondition::Residue { modulus, residue } => a % modulus == *residue,
                // χ_D(p) depends only on p mod |D| for p ∤ D
                PrimeCondition::Kronecker { d, value } => kronecker(*d, a as i64) == *value,
                PrimeCondition::Prime(_) => false,
                PrimeCondition::Predicate(_) | PrimeCondition::Any => true,
            })
            .expect("catch-all");
        let allowed = match (&rule.cond, &rule.exp) {
            (PrimeCondition::Predicate(Predicate::PhiNondiv(q)), _) => a % q != 1 % q,
            (_, exp) => exp.allows(1).unwrap_or(false),
        };
        if allowed {
            hits += 1;
        }
    }
    Some(Ratio::new(hits, total))
}

// ---------------------------------------------------------------- parsing

fn parse_err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Parse { line, field: field.to_string(), message: message.into() }
}

fn parse_u64(line: usize, field: &str, s: &str) -> Result<u64> {
    s.trim().parse().map_err(|_| parse_err(line, field, format!("expected a non-negative integer, got `{s}`")))
}

/// Parse a density given as `a/b` or as a terminating decimal.
pub fn parse_ratio(s: &str) -> Option<Ratio<u64>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: u64 = a.trim().parse().ok()?;
        let b: u64 = b.trim().parse().ok()?;
        return (b != 0).then(|| Ratio::new(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().ok()? };
    let den = 10u64.pow(frac.len() as u32);
    let f: u64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some(Ratio::new(int.checked_mul(den)?.checked_add(f)?, den))
}

fn parse_condition(line: usize, s: &str) -> Result<PrimeCondition> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    match parts.as_slice() {
        ["any"] => Ok(PrimeCondition::Any),
        ["residue", d, a] => {
            let modulus = parse_u64(line, "cond", d)?;
            let residue = parse_u64(line, "cond", a)?;
            if modulus == 0 {
                return Err(parse_err(line, "cond", "modulus must be positive"));
            }
            Ok(PrimeCondition::Residue { modulus, residue: residue % modulus })
        }
        ["kronecker", d, v] => {
            let d: i64 = d.parse().map_err(|_| parse_err(line, "cond", format!("bad discriminant `{d}`")))?;
            let value: i32 = v.parse().map_err(|_| parse_err(line, "cond", format!("bad Kronecker value `{v}`")))?;
            Ok(PrimeCondition::Kronecker { d, value })
        }
        ["prime", p] => Ok(PrimeCondition::Prime(parse_u64(line, "cond", p)?)),
        ["predicate", key] => Predicate::parse(key)
            .map(PrimeCondition::Predicate)
            .ok_or_else(|| parse_err(line, "cond", format!("unknown predicate `{key}`"))),
        _ => Err(parse_err(line, "cond", format!("unrecognised condition `{s}`"))),
    }
}

fn parse_exponent(line: usize, s: &str) -> Result<ExponentRule> {
    let s = s.trim();
    match s {
        "all" => return Ok(ExponentRule::All),
        "none" => return Ok(ExponentRule::None),
        "even" => return Ok(ExponentRule::Even),
        "computed" => return Ok(ExponentRule::Computed),
        _ => {}
    }
    let body = s
        .strip_prefix("set:")
        .ok_or_else(|| parse_err(line, "exp", format!("unrecognised exponent rule `{s}`")))?;
    let body = body.trim();
    let close = body
        .find(']')
        .filter(|_| body.starts_with('['))
        .ok_or_else(|| parse_err(line, "exp", "expected `set:[...]`"))?;
    let inner = &body[1..close];
    let mut finite = Vec::new();
    for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let e: u32 = tok.parse().map_err(|_| parse_err(line, "exp", format!("bad exponent `{tok}`")))?;
        finite.push(e);
    }
    finite.sort_unstable();
    finite.dedup();
    let rest = body[close + 1..].trim();
    let tail = if rest.is_empty() {
        None
    } else {
        let k = rest
            .strip_prefix(',')
            .map(str::trim)
            .and_then(|r| r.strip_prefix("tail>="))
            .ok_or_else(|| parse_err(line, "exp", format!("expected `,tail>=k`, got `{rest}`")))?;
        Some(k.trim().parse().map_err(|_| parse_err(line, "exp", format!("bad tail `{k}`")))?)
    };
    Ok(ExponentRule::Set { finite, tail })
}

fn parse_rule(line: usize, s: &str) -> Result<Rule> {
    let mut cond = None;
    let mut exp = None;
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| parse_err(line, "rule", format!("expected key=value, got `{part}`")))?;
        match k.trim() {
            "cond" => cond = Some(parse_condition(line, v)?),
            "exp" => exp = Some(parse_exponent(line, v)?),
            other => return Err(parse_err(line, "rule", format!("unknown rule key `{other}`"))),
        }
    }
    Ok(Rule {
        cond: cond.ok_or_else(|| parse_err(line, "rule", "missing cond="))?,
        exp: exp.ok_or_else(|| parse_err(line, "rule", "missing exp="))?,
    })
}

/// Parse a descriptor document.
pub fn parse_document(text: &str) -> Result<SetDescriptor> {
    let mut name = None;
    let mut delta = None;
    let mut rho = None;
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, "", format!("expected `field = value`, got `{content}`")))?;
        let v = v.trim();
        match k.trim() {
            "name" => {
                if v.is_empty() || v.chars().any(char::is_whitespace) {
                    return Err(parse_err(line, "name", "name must be a non-empty identifier"));
                }
                name = Some(v.to_string());
            }
            "delta" => delta = Some(parse_ratio(v).ok_or_else(|| parse_err(line, "delta", format!("bad density `{v}`")))?),
            "rho" => rho = Some(v.parse::<f64>().map_err(|_| parse_err(line, "rho", format!("bad number `{v}`")))?),
            "rule" => rules.push(parse_rule(line, v)?),
            other => return Err(parse_err(line, other, "unknown field")),
        }
    }
    let name = name.ok_or_else(|| parse_err(0, "name", "missing `name`"))?;
    SetDescriptor::new(&name, rules, delta, rho)
}

/// Parse either a builtin specifier (`sum2sq`, `quadsem:-4`, ...) or a document.
pub fn parse_descriptor(text: &str) -> Result<SetDescriptor> {
    if text.contains('\n') || text.contains('=') {
        parse_document(text)
    } else {
        builtin(text.trim(), None)
    }
}

// ---------------------------------------------------------------- catalog

fn rule(cond: PrimeCondition, exp: ExponentRule) -> Rule {
    Rule { cond, exp }
}

fn param<T: FromStr>(spec: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::UnknownBuiltin(spec.to_string()))
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 9] = [
    "naturals",
    "sum2sq",
    "hex",
    "nonhyp",
    "quadsem:D",
    "sprime:D",
    "progsem:d:a",
    "phi-nondiv:q",
    "tau-nondiv:q",
];

/// Resolve a builtin specifier. `delta` overrides the density where the set
/// has no known one (τ predicates for q outside 3, 5, 7, 23, 691).
pub fn builtin(spec: &str, delta: Option<Ratio<u64>>) -> Result<SetDescriptor> {
    use ExponentRule as E;
    use PrimeCondition as C;
    let parts: Vec<&str> = spec.split(':').collect();
    let d = match parts.as_slice() {
        ["naturals"] => SetDescriptor::new(spec, vec![rule(C::Any, E::All)], delta, None)?.with_family(Family::Naturals),
        ["sum2sq"] => SetDescriptor::new(
            spec,
            vec![
                rule(C::Prime(2), E::All),
                rule(C::Residue { modulus: 4, residue: 1 }, E::All),
                rule(C::Any, E::Even),
            ],
            delta,
            None,
        )?
        .with_family(Family::SumTwoSquares),
        ["hex"] => SetDescriptor::new(
            spec,
            vec![
                rule(C::Prime(3), E::All),
                rule(C::Residue { modulus: 3, residue: 1 }, E::All),
                rule(C::Any, E::Even),
            ],
            delta,
            None,
        )?
        .with_family(Family::Hexagonal),
        ["nonhyp"] => SetDescriptor::new(
            spec,
            vec![
                rule(C::Prime(2), E::All),
                rule(C::Residue { modulus: 4, residue: 3 }, E::All),
                rule(C::Any, E::None),
            ],
            delta,
            None,
        )?
        .with_family(Family::NonHypotenuse),
        ["quadsem", d] => {
            let d: i64 = param(spec, d)?;
            QuadraticCharacter::new(d)?;
            SetDescriptor::new(
                spec,
                vec![
                    rule(C::Kronecker { d, value: 1 }, E::All),
                    rule(C::Kronecker { d, value: -1 }, E::Even),
                    rule(C::Any, E::None),
                ],
                delta,
                None,
            )?
            .with_family(Family::QuadSemigroup(d))
        }
        ["sprime", d] => {
            let d: i64 = param(spec, d)?;
            QuadraticCharacter::new(d)?;
            SetDescriptor::new(spec, vec![rule(C::Kronecker { d, value: -1 }, E::All), rule(C::Any, E::None)], delta, None)?
                .with_family(Family::SPrime(d))
        }
        ["progsem", d, a] => {
            let d: u64 = param(spec, d)?;
            let a: u64 = param(spec, a)?;
            if d == 0 || arith::gcd(a % d, d) != 1 {
                return Err(validation(spec, "progsem:d:a needs d >= 1 and gcd(a, d) = 1"));
            }
            SetDescriptor::new(
                spec,
                vec![rule(C::Residue { modulus: d, residue: a % d }, E::All), rule(C::Any, E::None)],
                delta,
                None,
            )?
            .with_family(Family::Progression { d, a: a % d })
        }
        ["phi-nondiv", q] => {
            let q: u64 = param(spec, q)?;
            if q == 2 || !arith::is_prime(q) {
                return Err(validation(spec, "phi-nondiv:q needs an odd prime q"));
            }
            // E(q) = {1}: q ∤ q^{e-1}(q-1) only for e = 1.
            SetDescriptor::new(
                spec,
                vec![
                    rule(C::Prime(q), E::Set { finite: vec![1], tail: None }),
                    rule(C::Residue { modulus: q, residue: 1 }, E::None),
                    rule(C::Any, E::All),
                ],
                delta,
                None,
            )?
            .with_family(Family::PhiNondiv(q))
        }
        ["tau-nondiv", q] => {
            let q: u64 = param(spec, q)?;
            SetDescriptor::new(spec, vec![rule(C::Predicate(Predicate::TauNondiv(q)), E::Computed)], delta, None)?
                .with_family(Family::TauNondiv(q))
        }
        _ => return Err(Error::UnknownBuiltin(spec.to_string())),
    };
    Ok(d)
}

// ---------------------------------------------------------------- χ_S

/// χ_S(n) by factorisation.
pub fn chi(desc: &SetDescriptor, n: u64) -> Result<u8> {
    if n == 0 {
        return Err(Error::domain("n", n, "n >= 1"));
    }
    if n == 1 {
        return Ok(1);
    }
    if let Some(q) = desc.tau_modulus() {
        let table = desc.tau.as_ref().ok_or(Error::BackingBound { q, bound: 0, n })?;
        return table.nondiv_chi(n);
    }
    for (p, e) in arith::factorize(n)? {
        if !desc.allows(p, e)? {
            return Ok(0);
        }
    }
    Ok(1)
}

/// Exponent rule of the prime p.
pub fn classify_prime(desc: &SetDescriptor, p: u64) -> Result<&ExponentRule> {
    if !arith::is_prime(p) {
        return Err(Error::domain("p", p, "p prime"));
    }
    Ok(desc.classify_prime(p))
}

/// Prime density δ of the set.
pub fn delta_of(desc: &SetDescriptor) -> Ratio<u64> {
    desc.delta
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_squares(n: u64) -> bool {
        let mut u = 0u64;
        while u * u <= n {
            let r = n - u * u;
            let v = (r as f64).sqrt() as u64;
            if (v.saturating_sub(1)..=v + 1).any(|w| w * w == r) {
                return true;
            }
            u += 1;
        }
        false
    }

    #[test]
    fn catalog_deltas() {
        assert_eq!(builtin("sum2sq", None).unwrap().delta, Ratio::new(1, 2));
        assert_eq!(builtin("naturals", None).unwrap().delta, Ratio::new(1, 1));
        assert_eq!(builtin("hex", None).unwrap().delta, Ratio::new(1, 2));
        assert_eq!(builtin("nonhyp", None).unwrap().delta, Ratio::new(1, 2));
        assert_eq!(builtin("quadsem:-23", None).unwrap().delta, Ratio::new(1, 2));
        assert_eq!(builtin("sprime:-4", None).unwrap().delta, Ratio::new(1, 2));
        for q in [3u64, 5, 7, 11, 13] {
            assert_eq!(builtin(&format!("progsem:{q}:1"), None).unwrap().delta, Ratio::new(1, q - 1));
            assert_eq!(builtin(&format!("phi-nondiv:{q}"), None).unwrap().delta, Ratio::new(q - 2, q - 1));
        }
        assert_eq!(builtin("progsem:12:5", None).unwrap().delta, Ratio::new(1, 4));
        assert_eq!(builtin("tau-nondiv:5", None).unwrap().delta, Ratio::new(3, 4));
        assert!(matches!(builtin("tau-nondiv:13", None), Err(Error::MissingDelta { .. })));
        assert!(builtin("tau-nondiv:13", Some(Ratio::new(1, 2))).is_ok());
        assert!(matches!(builtin("cubes", None), Err(Error::UnknownBuiltin(_))));
        assert!(builtin("progsem:4:2", None).is_err());
    }

    #[test]
    fn known_values() {
        let b = builtin("sum2sq", None).unwrap();
        assert_eq!(chi(&b, 9).unwrap(), 1);
        assert_eq!(chi(&b, 3).unwrap(), 0);
        assert_eq!(chi(&b, 1).unwrap(), 1);
        assert_eq!(classify_prime(&b, 7).unwrap(), &ExponentRule::Even);
        assert_eq!(classify_prime(&b, 5).unwrap(), &ExponentRule::All);
        let nh = builtin("nonhyp", None).unwrap();
        assert_eq!(classify_prime(&nh, 2).unwrap(), &ExponentRule::All);
        assert_eq!(b.rules.len(), 3);
    }

    #[test]
    fn sum_of_two_squares_cross_check() {
        let b = builtin("sum2sq", None).unwrap();
        for n in 1..=20_000u64 {
            assert_eq!(chi(&b, n).unwrap() == 1, two_squares(n), "n = {n}");
        }
    }

    #[test]
    fn document_round_trip() {
        for name in ["sum2sq", "hex", "quadsem:-7", "progsem:4:3", "phi-nondiv:7", "nonhyp", "naturals"] {
            let d = builtin(name, None).unwrap();
            let doc = d.to_document();
            let back = parse_document(&doc).unwrap();
            assert_eq!(back, d, "{doc}");
        }
    }

    #[test]
    fn document_errors() {
        let overlap = "name = bad\nrule = cond=residue 4 1; exp=all\nrule = cond=residue 4 1; exp=even\n";
        assert!(matches!(parse_document(overlap), Err(Error::Validation { .. })));
        let wrong_delta = "name = w\ndelta = 1/3\nrule = cond=residue 4 1; exp=all\nrule = cond=any; exp=none\n";
        assert!(matches!(parse_document(wrong_delta), Err(Error::Validation { .. })));
        let bad_field = "name = w\nrule = cond=residue 4; exp=all\n";
        match parse_document(bad_field) {
            Err(Error::Parse { line, field, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(field, "cond");
            }
            other => panic!("{other:?}"),
        }
        let computed_without_predicate = "name = w\nrule = cond=any; exp=computed\n";
        assert!(parse_document(computed_without_predicate).is_err());
        let zero_density = "name = w\nrule = cond=any; exp=set:[2],tail>=4\n";
        assert!(parse_document(zero_density).is_err());
    }

    #[test]
    fn exponent_sets() {
        let doc = "name = sq-free-ish\nrule = cond=prime 2; exp=set:[1,3],tail>=6\nrule = cond=any; exp=set:[1]\n";
        let d = parse_document(doc).unwrap();
        assert_eq!(d.delta, Ratio::new(1, 1));
        let row = d.exponent_row(2, 8).unwrap();
        assert_eq!(row, vec![1, 1, 0, 1, 0, 0, 1, 1, 1]);
        assert_eq!(chi(&d, 8).unwrap(), 1);
        assert_eq!(chi(&d, 4).unwrap(), 0);
        assert_eq!(chi(&d, 9).unwrap(), 0);
        assert!(!d.is_semigroup());
        assert!(builtin("sum2sq", None).unwrap().is_semigroup());
        assert_eq!(ExponentRule::Even.allows(3), Some(false));
        assert_eq!(ExponentRule::Even.allows(4), Some(true));
    }

    #[test]
    fn phi_nondiv_rule() {
        let d = builtin("phi-nondiv:5", None).unwrap();
        for n in 1..=3000u64 {
            let want = !arith::totient(n).is_multiple_of(5);
            assert_eq!(chi(&d, n).unwrap() == 1, want, "n = {n}");
        }
        let pred = parse_document("name = p\nrule = cond=predicate phi-nondiv:5; exp=computed\n").unwrap();
        assert_eq!(pred.delta, Ratio::new(3, 4));
        for n in 1..=3000u64 {
            assert_eq!(chi(&pred, n).unwrap(), chi(&d, n).unwrap());
        }
    }

    #[test]
    fn tau_sets_need_backing() {
        let mut d = builtin("tau-nondiv:691", None).unwrap();
        assert!(matches!(chi(&d, 2), Err(Error::BackingBound { .. })));
        let t = Arc::new(tau::tau_mod_sieve(691, 500, crate::par::Exec::Sequential).unwrap());
        d.attach_tau(t).unwrap();
        assert_eq!(chi(&d, 1).unwrap(), 1);
        assert!(chi(&d, 501).is_err());
        // Hecke recursion beyond the table agrees with the table below it
        assert_eq!(d.allows(2, 8).unwrap(), chi(&d, 256).unwrap() == 1);
        assert!(d.allows(2, 12).is_ok());
    }

    #[test]
    fn ratio_parser() {
        assert_eq!(parse_ratio("1/2"), Some(Ratio::new(1, 2)));
        assert_eq!(parse_ratio("0.75"), Some(Ratio::new(3, 4)));
        assert_eq!(parse_ratio("1"), Some(Ratio::new(1, 1)));
        assert_eq!(parse_ratio("x"), None);
        assert_eq!(parse_ratio("1/0"), None);
    }
}
