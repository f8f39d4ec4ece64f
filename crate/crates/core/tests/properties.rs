use std::sync::Arc;

use num_integer::Integer;
use proptest::prelude::*;

use mulsets::arith::is_prime;
use mulsets::ek;
use mulsets::lfun::{kronecker, l_log_deriv_at_1, PrecisionContext};
use mulsets::mangoldt::{lambda, lambda_closed, lambda_partition, lambda_recursive, CLOSED_FORM_MAX_E};
use mulsets::par::Exec;
use mulsets::setspec::{builtin, chi, SetDescriptor};
use mulsets::sieve::{build_char_table_with, primes_up_to_with};
use mulsets::tau::{tau_mod_many, TauTable};

const SETS: [&str; 19] = [
    "naturals",
    "sum2sq",
    "hex",
    "nonhyp",
    "quadsem:-3",
    "quadsem:-4",
    "quadsem:-7",
    "quadsem:-8",
    "quadsem:-23",
    "sprime:-4",
    "sprime:-3",
    "progsem:3:1",
    "progsem:4:3",
    "progsem:5:2",
    "phi-nondiv:5",
    "phi-nondiv:3",
    "tau-nondiv:3",
    "tau-nondiv:5",
    "tau-nondiv:691",
];

const TAU_BOUND: u64 = 1 << 20;

fn tau_tables() -> &'static [TauTable] {
    use std::sync::OnceLock;
    static T: OnceLock<Vec<TauTable>> = OnceLock::new();
    T.get_or_init(|| tau_mod_many(&[3, 5, 691], TAU_BOUND, Exec::default()).unwrap())
}

fn set(name: &str) -> SetDescriptor {
    let mut d = builtin(name, None).unwrap();
    if let Some(q) = d.tau_modulus() {
        let t = tau_tables().iter().find(|t| t.modulus() == q).unwrap();
        d.attach_tau(Arc::new(t.clone())).unwrap();
    }
    d
}

fn all_sets() -> Vec<SetDescriptor> {
    SETS.iter().map(|n| set(n)).collect()
}

fn small_primes() -> Vec<u64> {
    (2..200).filter(|&p| is_prime(p)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    // exact integer coefficients on both sides
    #[test]
    fn closed_form_equals_recursion(s in 0..SETS.len(), pi in 0usize..46, e in 1..=CLOSED_FORM_MAX_E) {
        let d = set(SETS[s]);
        let p = small_primes()[pi];
        prop_assume!((p as f64).powi(e as i32) <= TAU_BOUND as f64 || d.tau_modulus().is_none());
        let rec = lambda_recursive(&d, p, e).unwrap();
        let closed = lambda_closed(&d, p, e).unwrap();
        prop_assert_eq!(rec.coeff, closed.coeff, "{} p={} e={}", SETS[s], p, e);
        if e <= 8 {
            prop_assert_eq!(rec.coeff, lambda_partition(&d, p, e).unwrap().coeff);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn multiplicative(s in 0..SETS.len(), m in 1u64..1000, n in 1u64..1000) {
        prop_assume!(m.gcd(&n) == 1);
        let d = set(SETS[s]);
        prop_assert_eq!(chi(&d, m * n).unwrap(), chi(&d, m).unwrap() * chi(&d, n).unwrap());
    }

    // semigroups are closed under products, coprime or not
    #[test]
    fn semigroup_closure(s in 0..14usize, m in 1u64..1000, n in 1u64..1000) {
        let d = set(SETS[s]);
        prop_assert!(d.is_semigroup());
        if chi(&d, m).unwrap() == 1 && chi(&d, n).unwrap() == 1 {
            prop_assert_eq!(chi(&d, m * n).unwrap(), 1);
        }
    }

    #[test]
    fn kronecker_completely_multiplicative(di in 0usize..5, m in 1u64..5000, n in 1u64..5000) {
        let dd = [-3i64, -4, -7, -8, -23][di];
        prop_assert_eq!(kronecker(dd, (m * n) as i64), kronecker(dd, m as i64) * kronecker(dd, n as i64));
    }

    #[test]
    fn sieve_policy_and_segment_invariant(s in 0..SETS.len(), n in 1u64..200_000, seg in 6u32..16) {
        let d = set(SETS[s]);
        let a = build_char_table_with(&d, n, Exec::Sequential, 1 << 16).unwrap();
        let b = build_char_table_with(&d, n, Exec::Parallel, 1usize << seg).unwrap();
        prop_assert_eq!(a.words(), b.words());
        let p1 = primes_up_to_with(n, Exec::Sequential, 1 << 12).unwrap();
        let p2 = primes_up_to_with(n, Exec::Parallel, 1usize << seg).unwrap();
        prop_assert_eq!(p1.primes(), p2.primes());
    }
}

/// χ_S(n) log n = Σ_{k | n} χ_S(n/k) Λ_S(k).
#[test]
fn convolution_identity_all_builtins() {
    for d in all_sets() {
        for n in 1..=2000u64 {
            let lhs = f64::from(chi(&d, n).unwrap()) * (n as f64).ln();
            let mut rhs = 0.0;
            for k in (1..=n).filter(|k| n % k == 0) {
                let c = chi(&d, n / k).unwrap();
                if c != 0 {
                    rhs += lambda(&d, k).unwrap();
                }
            }
            assert!((lhs - rhs).abs() < 1e-9, "{} n={n}: {lhs} vs {rhs}", d.name);
        }
    }
}

#[test]
fn chi_prime_sum_two_forms_agree() {
    let ctx = PrecisionContext::new(30).unwrap();
    for d in [-3i64, -4, -7, -8, -23] {
        let a = ek::chi_prime_sum_series(d, &ctx).unwrap();
        let b = ek::chi_prime_sum_product(d, &ctx).unwrap();
        assert!((a.to_f64() - b.to_f64()).abs() <= 1e-10, "D={d}: {} vs {}", a.to_f64(), b.to_f64());
    }
}

#[test]
fn agm_closed_form() {
    let ctx = PrecisionContext::new(30).unwrap();
    let agm = ek::l_log_deriv_minus4_agm(&ctx).unwrap();
    let series = l_log_deriv_at_1(-4, &ctx).unwrap().log_deriv;
    assert!((agm.to_f64() - series.to_f64()).abs() <= 1e-12);
    assert!((agm.value - series.value).to_f64().abs() <= 1e-25);
}
