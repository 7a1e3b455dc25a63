//! Multiplicative arithmetic functions over factored integers, and the
//! prime-exponent criteria for σ(n) to be nonzero modulo 3 and modulo 2, 4, 8.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, Pow};
use serde::Serialize;
use thiserror::Error;

/// Default sieve bound; integers up to its square can be factored.
pub const DEFAULT_SIEVE_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("cannot factor 0")]
    Zero,
    #[error("{n} exceeds the factorization limit {limit}")]
    TooLarge { n: u64, limit: u64 },
    #[error("{n} is divisible by 3")]
    DivisibleByThree { n: u64 },
    #[error("{n} is even")]
    Even { n: u64 },
}

/// A positive integer together with its prime factorization.
///
/// Primes are strictly increasing and every exponent is at least one; the
/// empty factor list is the integer 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredInt {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInt {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Exponent of `p` in the factorization (the p-adic valuation).
    pub fn valuation(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_square(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e % 2 == 0)
    }

    /// Builds from an explicit factorization, checking the invariants.
    pub fn from_factors(factors: Vec<(u64, u32)>) -> Option<Self> {
        let mut value: u64 = 1;
        for (i, &(p, e)) in factors.iter().enumerate() {
            if e == 0 || p < 2 || !is_prime_trial(p) {
                return None;
            }
            if i > 0 && factors[i - 1].0 >= p {
                return None;
            }
            value = value.checked_mul(p.checked_pow(e)?)?;
        }
        Some(Self { value, factors })
    }
}

fn is_prime_trial(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Trial-division factorizer backed by a prime sieve.
#[derive(Debug, Clone)]
pub struct Factorizer {
    bound: u64,
    primes: Vec<u64>,
}

impl Factorizer {
    pub fn new(bound: u64) -> Self {
        let bound = bound.max(2);
        let size = bound as usize + 1;
        let mut composite = vec![false; size];
        let mut primes = Vec::new();
        for i in 2..size {
            if !composite[i] {
                primes.push(i as u64);
                let mut j = i * i;
                while j < size {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        Self { bound, primes }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Largest integer this factorizer accepts.
    pub fn limit(&self) -> u64 {
        self.bound.saturating_mul(self.bound)
    }

    pub fn factorize(&self, n: u64) -> Result<FactoredInt, ArithError> {
        if n == 0 {
            return Err(ArithError::Zero);
        }
        if n > self.limit() {
            return Err(ArithError::TooLarge {
                n,
                limit: self.limit(),
            });
        }
        let mut rest = n;
        let mut factors = Vec::new();
        for &p in &self.primes {
            if p * p > rest {
                break;
            }
            if rest % p == 0 {
                let mut e = 0;
                while rest % p == 0 {
                    rest /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
        }
        if rest > 1 {
            factors.push((rest, 1));
        }
        Ok(FactoredInt { value: n, factors })
    }
}

fn default_factorizer() -> &'static Factorizer {
    static INSTANCE: OnceLock<Factorizer> = OnceLock::new();
    INSTANCE.get_or_init(|| Factorizer::new(DEFAULT_SIEVE_BOUND))
}

/// Factors `n` with the shared default factorizer.
pub fn factorize(n: u64) -> Result<FactoredInt, ArithError> {
    default_factorizer().factorize(n)
}

/// Divisor power sum σ_k(n) = Σ_{d|n} d^k.
pub fn sigma_k(n: &FactoredInt, k: u32) -> BigUint {
    let mut acc = BigUint::one();
    for &(p, e) in &n.factors {
        let pk: BigUint = Pow::pow(BigUint::from(p), k);
        // 1 + p^k + ... + p^{ek}
        let mut term = BigUint::one();
        let mut local = BigUint::one();
        for _ in 0..e {
            term *= &pk;
            local += &term;
        }
        acc *= local;
    }
    acc
}

/// All positive divisors, ascending.
pub fn divisors(n: &FactoredInt) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in &n.factors {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// The ordinary divisor sum σ(n).
pub fn sigma(n: &FactoredInt) -> u64 {
    n.factors
        .iter()
        .map(|&(p, e)| (0..=e).map(|j| p.pow(j)).sum::<u64>())
        .product()
}

pub fn euler_phi(n: &FactoredInt) -> u64 {
    n.factors
        .iter()
        .map(|&(p, e)| p.pow(e) - p.pow(e - 1))
        .product()
}

/// Dedekind ψ: multiplicative with ψ(p^e) = p^e + p^{e-1}.
pub fn dedekind_psi(n: &FactoredInt) -> u64 {
    n.factors
        .iter()
        .map(|&(p, e)| p.pow(e) + p.pow(e - 1))
        .product()
}

/// Whether σ(n) is nonzero modulo 3, decided from the exponents alone.
///
/// For a prime ℓ ≡ 1 (mod 3) the exponent must be 0, 1, 3 or 4 mod 6; for
/// ℓ ≡ 2 (mod 3) it must be even.
pub fn sigma_nonzero_mod3(n: &FactoredInt) -> Result<bool, ArithError> {
    if n.value % 3 == 0 {
        return Err(ArithError::DivisibleByThree { n: n.value });
    }
    Ok(n.factors.iter().all(|&(p, e)| match p % 3 {
        1 => matches!(e % 6, 0 | 1 | 3 | 4),
        _ => e % 2 == 0,
    }))
}

/// Nonvanishing of σ(n) modulo 2, 4 and 8 for odd n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SigmaMod2Class {
    pub nonzero_mod8: bool,
    pub nonzero_mod4: bool,
    pub nonzero_mod2: bool,
}

/// Classifies σ(n) modulo 2, 4, 8 from the factorization of odd `n`.
///
/// Primes with even exponent contribute odd factors σ(ℓ^e). A prime with odd
/// exponent contributes exactly 2-adic valuation 1 when ℓ ≡ e ≡ 1 (mod 4),
/// and exactly 2 when ℓ ≡ 1 (mod 4), e ≡ 3 (mod 8) or ℓ ≡ 3 (mod 8),
/// e ≡ 1 (mod 4). Everything else is divisible by 8.
pub fn sigma_mod2_class(n: &FactoredInt) -> Result<SigmaMod2Class, ArithError> {
    if n.value % 2 == 0 {
        return Err(ArithError::Even { n: n.value });
    }
    let odd: Vec<(u64, u32)> = n
        .factors
        .iter()
        .copied()
        .filter(|&(_, e)| e % 2 == 1)
        .collect();
    let valuation_one = |&(p, e): &(u64, u32)| p % 4 == 1 && e % 4 == 1;
    let valuation_two =
        |&(p, e): &(u64, u32)| (p % 4 == 1 && e % 8 == 3) || (p % 8 == 3 && e % 4 == 1);

    let nonzero_mod2 = odd.is_empty();
    let nonzero_mod4 = odd.len() <= 1 && odd.iter().all(valuation_one);
    let case_a = odd.len() <= 2 && odd.iter().all(valuation_one);
    let case_b = odd.len() == 1 && valuation_two(&odd[0]);
    Ok(SigmaMod2Class {
        nonzero_mod8: case_a || case_b,
        nonzero_mod4,
        nonzero_mod2,
    })
}

/// Divisor sums σ(0..=n) by an additive sieve; entry 0 is 0.
pub fn sigma_table(n: usize) -> Vec<u64> {
    let mut table = vec![0u64; n + 1];
    for d in 1..=n {
        let mut m = d;
        while m <= n {
            table[m] += d as u64;
            m += d;
        }
    }
    table
}
