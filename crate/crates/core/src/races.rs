//! Pointwise races A(x) >= B(x) between counting functions over a finite range.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::setspec::{builtin, chi, SetDescriptor};
use crate::sieve::{self, CharSieve, DEFAULT_SEGMENT};

/// Spacing of recorded checkpoints.
pub const CHECKPOINT_EVERY: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RaceKind {
    /// S_A(x) against S_B(x)
    Sets,
    /// π_A(x) against π_B(x)
    Primes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum Verdict {
    NoViolation,
    /// First x with A(x) < B(x).
    ViolationAt { x: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Checkpoint {
    pub x: u64,
    pub a: u64,
    pub b: u64,
}

/// Running state of a race; a checkpoint can be resumed from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RaceState {
    pub x: u64,
    pub a: u64,
    pub b: u64,
    pub min_margin: i64,
    pub min_margin_at: u64,
    pub first_violation: Option<u64>,
}

impl RaceState {
    pub fn start() -> Self {
        Self { x: 0, a: 0, b: 0, min_margin: 0, min_margin_at: 0, first_violation: None }
    }

    #[inline]
    fn step(&mut self, n: u64, in_a: bool, in_b: bool) {
        self.a += u64::from(in_a);
        self.b += u64::from(in_b);
        self.x = n;
        let margin = self.a as i64 - self.b as i64;
        if margin < self.min_margin {
            self.min_margin = margin;
            self.min_margin_at = n;
        }
        if margin < 0 && self.first_violation.is_none() {
            self.first_violation = Some(n);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RaceReport {
    pub a: String,
    pub b: String,
    pub kind: RaceKind,
    pub limit: u64,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub min_margin: i64,
    pub min_margin_at: u64,
    pub final_a: u64,
    pub final_b: u64,
    pub checkpoints: Vec<Checkpoint>,
}

impl RaceReport {
    fn finish(a: &SetDescriptor, b: &SetDescriptor, kind: RaceKind, limit: u64, st: RaceState, checkpoints: Vec<Checkpoint>) -> Self {
        Self {
            a: a.name.clone(),
            b: b.name.clone(),
            kind,
            limit,
            verdict: st.first_violation.map_or(Verdict::NoViolation, |x| Verdict::ViolationAt { x }),
            min_margin: st.min_margin,
            min_margin_at: st.min_margin_at,
            final_a: st.a,
            final_b: st.b,
            checkpoints,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::NoViolation
    }
}

fn checkpoint(st: &RaceState, cps: &mut Vec<Checkpoint>) {
    if st.x > 0 && st.x.is_multiple_of(CHECKPOINT_EVERY) {
        cps.push(Checkpoint { x: st.x, a: st.a, b: st.b });
    }
}

/// Continue a set race from `state` up to `limit`.
pub fn race_from(
    a: &SetDescriptor,
    b: &SetDescriptor,
    limit: u64,
    state: RaceState,
    exec: Exec,
    segment: usize,
) -> Result<RaceReport> {
    let mut st = state;
    let mut cps = Vec::new();
    if limit <= st.x {
        return Ok(RaceReport::finish(a, b, RaceKind::Sets, limit, st, cps));
    }
    if limit < 2 {
        // n = 1 is in every multiplicative set
        for n in st.x + 1..=limit {
            st.step(n, chi(a, n)? == 1, chi(b, n)? == 1);
        }
        return Ok(RaceReport::finish(a, b, RaceKind::Sets, limit, st, cps));
    }
    let sa = CharSieve::new(a, limit, segment, exec)?;
    let sb = CharSieve::new(b, limit, segment, exec)?;
    let len = sa.segment_len() as u64;
    let first = ((st.x + 1) / len) as usize;
    let last = sa.segment_count();
    // segments are built a window at a time, in parallel, and scanned in order
    let window = par::worker_count().max(1) * if exec.is_parallel() { 2 } else { 1 };
    let mut i = first;
    while i < last {
        let hi = (i + window).min(last);
        let built = par::map_indexed(exec, hi - i, |k| (sa.segment(i + k), sb.segment(i + k)));
        for (k, (wa, wb)) in built.into_iter().enumerate() {
            let lo = (i + k) as u64 * len;
            let start = (st.x + 1).max(lo).max(1);
            let end = (lo + len).min(limit + 1);
            for n in start..end {
                let off = (n - lo) as usize;
                let bit = |w: &[u64]| w[off / 64] >> (off % 64) & 1 == 1;
                st.step(n, bit(&wa), bit(&wb));
                checkpoint(&st, &mut cps);
            }
        }
        i = hi;
    }
    Ok(RaceReport::finish(a, b, RaceKind::Sets, limit, st, cps))
}

/// Whether A(x) >= B(x) for every x <= limit.
pub fn race_with(a: &SetDescriptor, b: &SetDescriptor, limit: u64, exec: Exec) -> Result<RaceReport> {
    race_from(a, b, limit, RaceState::start(), exec, DEFAULT_SEGMENT)
}

pub fn race(a: &SetDescriptor, b: &SetDescriptor, limit: u64) -> Result<RaceReport> {
    race_with(a, b, limit, Exec::default())
}

/// The four progression semigroup races S'_{d1;a1} >= S'_{d2;a2}.
pub const PROGRESSION_RACES: [(&str, &str); 4] = [
    ("progsem:3:2", "progsem:3:1"),
    ("progsem:4:3", "progsem:3:1"),
    ("progsem:3:2", "progsem:4:1"),
    ("progsem:4:3", "progsem:4:1"),
];

pub fn progression_race_suite_with(limit: u64, exec: Exec) -> Result<Vec<RaceReport>> {
    PROGRESSION_RACES
        .iter()
        .map(|(a, b)| race_with(&builtin(a, None)?, &builtin(b, None)?, limit, exec))
        .collect()
}

pub fn progression_race_suite(limit: u64) -> Result<Vec<RaceReport>> {
    progression_race_suite_with(limit, Exec::default())
}

/// The same comparison on prime counts π_A(x) against π_B(x).
pub fn prime_race(a: &SetDescriptor, b: &SetDescriptor, limit: u64) -> Result<RaceReport> {
    let mut st = RaceState::start();
    let mut cps = Vec::new();
    if limit >= 2 {
        if limit > sieve::MAX_BOUND {
            return Err(Error::Capacity { what: "prime race limit", value: limit, bound: sieve::MAX_BOUND });
        }
        let primes = sieve::primes_up_to(limit)?;
        let mut next_cp = CHECKPOINT_EVERY;
        for &p in primes.primes() {
            while next_cp < p {
                cps.push(Checkpoint { x: next_cp, a: st.a, b: st.b });
                next_cp += CHECKPOINT_EVERY;
            }
            st.step(p, a.allows(p, 1)?, b.allows(p, 1)?);
        }
        while next_cp <= limit {
            cps.push(Checkpoint { x: next_cp, a: st.a, b: st.b });
            next_cp += CHECKPOINT_EVERY;
        }
    }
    st.x = limit;
    Ok(RaceReport::finish(a, b, RaceKind::Primes, limit, st, cps))
}
