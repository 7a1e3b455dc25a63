//! Hecke matrices on cusp spaces, their characteristic polynomials, and
//! certificates that such a polynomial is irreducible with full symmetric
//! Galois group.
//!
//! Certification reads Frobenius cycle types off distinct-degree
//! factorizations modulo consecutive primes. A transitive subgroup of S_D
//! containing a transposition and a cycle of prime length q > D/2 is S_D:
//! the long cycle makes the group primitive, and a primitive group with a
//! transposition is symmetric. A factor pattern with one quadratic and
//! otherwise odd degrees powers to a transposition; a pattern containing a
//! prime q > D/2 powers to a q-cycle.

mod fp;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith;
use crate::hecke::{self, HeckeError};
use crate::modforms::{self, ModFormError};
use crate::qseries::{CoeffRing, RingElem};

use fp::{DdfOutcome, FpPoly};

/// Default number of primes sampled by [`certify_maeda`].
pub const DEFAULT_PRIME_BUDGET: usize = 200;

/// Default ceiling on the Δ-power precision used to build a Hecke matrix.
pub const DEFAULT_MATRIX_BUDGET: u64 = 1_000_000;

pub type IntMatrix = Vec<Vec<BigInt>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaloisError {
    #[error("cusp space dimension must be positive")]
    EmptySpace,
    #[error("matrix is not square")]
    NotSquare,
    #[error("T_n image has a nonzero Eisenstein component")]
    NotCuspidal,
    #[error("{required} coefficients exceed the budget of {budget}")]
    ResourceLimit { required: u64, budget: u64 },
    #[error("prime {0} divides the leading coefficient")]
    BadPrime(u64),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
    #[error(transparent)]
    ModForm(#[from] ModFormError),
}

/// Integer polynomial, coefficients ascending, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coefficients: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coefficients: Vec<BigInt>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    pub fn from_i64s(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coefficients
    }

    /// Degree; the zero polynomial has degree 0 as well.
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn leading(&self) -> BigInt {
        self.coefficients.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coefficients
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// p(A) by Horner's rule.
    pub fn eval_matrix(&self, a: &IntMatrix) -> IntMatrix {
        let n = a.len();
        let mut acc = zero_matrix(n);
        for c in self.coefficients.iter().rev() {
            acc = mat_mul(&acc, a);
            for (i, row) in acc.iter_mut().enumerate() {
                row[i] += c;
            }
        }
        acc
    }

    /// disc(f) = (−1)^{D(D−1)/2} Res(f, f′) / lc(f).
    pub fn discriminant(&self) -> BigInt {
        let d = self.degree();
        if d == 0 {
            return BigInt::zero();
        }
        if d == 1 {
            return BigInt::one();
        }
        let res = resultant(self, &self.derivative());
        let signed = if (d * (d - 1) / 2) % 2 == 1 {
            -res
        } else {
            res
        };
        signed / self.leading()
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coefficients.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let a = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mono = match i {
                0 => String::new(),
                1 => "X".to_string(),
                _ => format!("X^{i}"),
            };
            match (a.is_one(), i) {
                (true, 0) | (false, 0) => write!(f, "{a}")?,
                (true, _) => write!(f, "{mono}")?,
                (false, _) => write!(f, "{a}*{mono}")?,
            }
            first = false;
        }
        Ok(())
    }
}

fn zero_matrix(n: usize) -> IntMatrix {
    vec![vec![BigInt::zero(); n]; n]
}

pub fn identity_matrix(n: usize) -> IntMatrix {
    let mut m = zero_matrix(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigInt::one();
    }
    m
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![BigInt::zero(); m]; n];
    for i in 0..n {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] += &a[i][t] * &b[t][j];
            }
        }
    }
    out
}

/// Determinant by Bareiss fraction-free elimination.
pub fn determinant(a: &IntMatrix) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Resultant via the Sylvester matrix.
fn resultant(f: &IntPolynomial, g: &IntPolynomial) -> BigInt {
    let (m, n) = (f.degree(), g.degree());
    let size = m + n;
    let mut s = zero_matrix(size);
    let fc: Vec<&BigInt> = f.coefficients.iter().rev().collect();
    let gc: Vec<&BigInt> = g.coefficients.iter().rev().collect();
    for r in 0..n {
        for (j, c) in fc.iter().enumerate() {
            s[r][r + j] = (*c).clone();
        }
    }
    for r in 0..m {
        for (j, c) in gc.iter().enumerate() {
            s[n + r][r + j] = (*c).clone();
        }
    }
    determinant(&s)
}

/// det(X·I − A) by Berkowitz's division-free algorithm.
pub fn char_poly(a: &IntMatrix) -> Result<IntPolynomial, GaloisError> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return Err(GaloisError::NotSquare);
    }
    if n == 0 {
        return Ok(IntPolynomial::from_i64s(&[1]));
    }
    // coefficients descending
    let mut vect = vec![BigInt::one(), -a[0][0].clone()];
    for r in 1..n {
        let col: Vec<BigInt> = (0..r).map(|i| a[i][r].clone()).collect();
        let row = &a[r][..r];
        let mut q = vec![BigInt::one(), -a[r][r].clone()];
        let mut v = col;
        for _ in 0..r {
            let dot: BigInt = row.iter().zip(&v).map(|(x, y)| x * y).sum();
            q.push(-dot);
            v = (0..r)
                .map(|i| (0..r).map(|j| &a[i][j] * &v[j]).sum())
                .collect();
        }
        // (r+2)×(r+1) lower-triangular Toeplitz matrix with first column q
        vect = (0..r + 2)
            .map(|i| (0..=i.min(r)).map(|j| &q[i - j] * &vect[j]).sum())
            .collect();
    }
    vect.reverse();
    Ok(IntPolynomial::new(vect))
}

/// Matrix of T_n on S_{12d} in the basis [Δ^d, c₄³Δ^{d−1}, …, c₄^{3d−3}Δ];
/// column j holds the coordinates of T_n applied to the j-th basis form.
pub fn hecke_matrix(n: u64, d: u32) -> Result<IntMatrix, GaloisError> {
    hecke_matrix_with_budget(n, d, DEFAULT_MATRIX_BUDGET)
}

pub fn hecke_matrix_with_budget(n: u64, d: u32, budget: u64) -> Result<IntMatrix, GaloisError> {
    if d == 0 {
        return Err(GaloisError::EmptySpace);
    }
    if n == 0 {
        return Err(HeckeError::ZeroIndex.into());
    }
    let required = d as u64 * n + 1;
    if required > budget {
        return Err(GaloisError::ResourceLimit { required, budget });
    }
    let basis = modforms::basis_b(d, required as usize, CoeffRing::BigInt)?;
    let size = d as usize;
    let mut m = zero_matrix(size);
    for j in 0..size {
        let i = size - j;
        let image = hecke::hecke_apply(&basis[i], n, size + 1)?;
        let dec = modforms::decompose_with(&image, &basis)?;
        if !dec.coefficients[0].is_zero() {
            return Err(GaloisError::NotCuspidal);
        }
        for (row, slot) in m.iter_mut().enumerate() {
            slot[j] = match &dec.coefficients[size - row] {
                RingElem::Int(v) => v.clone(),
                _ => unreachable!("integer basis"),
            };
        }
    }
    Ok(m)
}

/// Multiset of irreducible-factor degrees of f mod p, or `None` when the
/// reduction has a repeated factor.
pub fn ddf_degrees(f: &IntPolynomial, p: u64) -> Result<Option<Vec<usize>>, GaloisError> {
    if (f.leading() % BigInt::from(p)).is_zero() {
        return Err(GaloisError::BadPrime(p));
    }
    Ok(match fp::ddf(&FpPoly::from_ints(p, &f.coefficients)) {
        DdfOutcome::Degrees(d) => Some(d),
        DdfOutcome::NotSquarefree => None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Certified,
    Refuted,
    Inconclusive,
}

/// A prime and the factor degrees of the reduction there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub prime: u64,
    pub degrees: Vec<usize>,
    /// What this pattern certifies: "irreducible", "transposition",
    /// "long prime cycle", or "sample".
    pub role: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub degree: usize,
    pub witnesses: Vec<Witness>,
    /// Primes examined, including those with non-squarefree reductions.
    pub budget_used: usize,
    /// Reason for a refutation.
    pub obstruction: Option<String>,
}

fn primes_from(start: u64) -> impl Iterator<Item = u64> {
    (start..).filter(|&n| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0))
}

fn is_square(n: &BigInt) -> bool {
    !n.is_negative() && {
        let r = n.sqrt();
        &r * &r == *n
    }
}

/// Integer roots of a monic polynomial, searched among divisors of the
/// constant term when it is small enough to factor.
fn integer_root(f: &IntPolynomial) -> Option<BigInt> {
    let c0 = f.coefficients.first()?;
    if c0.is_zero() {
        return Some(BigInt::zero());
    }
    let a = u64::try_from(c0.abs()).ok()?;
    let fac = arith::factorize(a).ok()?;
    arith::divisors(&fac)
        .into_iter()
        .flat_map(|d| [BigInt::from(d), -BigInt::from(d)])
        .find(|r| f.eval(r).is_zero())
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn is_transposition_type(degrees: &[usize]) -> bool {
    degrees.iter().filter(|&&k| k == 2).count() == 1
        && degrees.iter().all(|&k| k == 2 || k % 2 == 1)
}

fn has_long_prime_cycle(degrees: &[usize], d: usize) -> bool {
    degrees.iter().any(|&k| 2 * k > d && is_prime(k))
}

/// Decides whether monic `f` is irreducible with Galois group S_D, sampling
/// at most `prime_budget` primes from 5 upward. Inconclusive is never
/// promoted.
pub fn certify_maeda(f: &IntPolynomial, prime_budget: usize) -> Verdict {
    let d = f.degree();
    let mut verdict = Verdict {
        status: Status::Inconclusive,
        degree: d,
        witnesses: vec![],
        budget_used: 0,
        obstruction: None,
    };
    if f.is_zero() || d == 0 || !f.is_monic() {
        verdict.obstruction = Some("not a monic polynomial of positive degree".into());
        return verdict;
    }
    if d >= 2 {
        if let Some(r) = integer_root(f) {
            verdict.status = Status::Refuted;
            verdict.obstruction = Some(format!("rational root {r}"));
        } else if is_square(&f.discriminant()) {
            verdict.status = Status::Refuted;
            verdict.obstruction =
                Some("square discriminant: Galois group lies in the alternating group".into());
        }
    }

    let mut irreducible: Option<Witness> = None;
    let mut transposition: Option<Witness> = None;
    let mut long_cycle: Option<Witness> = None;
    let mut sample: Option<Witness> = None;
    let done = |irr: &Option<Witness>,
                tr: &Option<Witness>,
                lc: &Option<Witness>,
                s: &Option<Witness>| match d {
        1 => s.is_some(),
        2 | 3 => irr.is_some(),
        _ => irr.is_some() && tr.is_some() && lc.is_some(),
    };

    let primes: Vec<u64> = primes_from(5).take(prime_budget).collect();
    'outer: for chunk in primes.chunks(16) {
        let patterns: Vec<Option<Vec<usize>>> = chunk
            .par_iter()
            .map(|&p| ddf_degrees(f, p).expect("monic"))
            .collect();
        for (&p, pattern) in chunk.iter().zip(patterns) {
            verdict.budget_used += 1;
            let Some(degrees) = pattern else { continue };
            let witness = |role| Witness {
                prime: p,
                degrees: degrees.clone(),
                role,
            };
            if sample.is_none() {
                sample = Some(witness("sample"));
            }
            if irreducible.is_none() && degrees == [d] {
                irreducible = Some(witness("irreducible"));
            }
            if d >= 4 {
                if transposition.is_none() && is_transposition_type(&degrees) {
                    transposition = Some(witness("transposition"));
                }
                if long_cycle.is_none() && has_long_prime_cycle(&degrees, d) {
                    long_cycle = Some(witness("long prime cycle"));
                }
            }
            if verdict.status == Status::Refuted
                || done(&irreducible, &transposition, &long_cycle, &sample)
            {
                break 'outer;
            }
        }
    }

    let key: Vec<Witness> = [
        irreducible.clone(),
        transposition.clone(),
        long_cycle.clone(),
    ]
    .into_iter()
    .flatten()
    .collect();
    if verdict.status == Status::Refuted {
        verdict.witnesses = sample.into_iter().chain(key).collect();
        return verdict;
    }
    if done(&irreducible, &transposition, &long_cycle, &sample) {
        verdict.status = Status::Certified;
        verdict.witnesses = if d == 1 {
            sample.into_iter().collect()
        } else {
            key
        };
    } else {
        verdict.witnesses = key;
    }
    verdict
}

/// Frequencies of factor-degree patterns over the first `count` primes
/// from 5, skipping non-squarefree reductions. Used for reporting.
pub fn cycle_type_histogram(f: &IntPolynomial, count: usize) -> BTreeMap<Vec<usize>, usize> {
    let mut hist = BTreeMap::new();
    for p in primes_from(5).take(count) {
        if let Ok(Some(d)) = ddf_degrees(f, p) {
            *hist.entry(d).or_insert(0) += 1;
        }
    }
    hist
}

/// Σ of the diagonal.
pub fn trace(a: &IntMatrix) -> BigInt {
    a.iter().enumerate().map(|(i, row)| row[i].clone()).sum()
}
