//! Truncated power series in q with exact coefficients.
//!
//! A [`QSeries`] of precision N knows the coefficients of q^0 .. q^{N-1};
//! everything from q^N on is unknown. Binary operations take the minimum of
//! the operand precisions, so an unknown coefficient is never read.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Output length above which convolutions are split across the rayon pool.
const PARALLEL_THRESHOLD: usize = 1024;
const BLOCK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CoeffRing {
    BigInt,
    BigRational,
    /// Integers modulo M, M ≥ 2.
    ModM(u64),
}

impl CoeffRing {
    pub fn modulo(m: u64) -> Result<Self, QSeriesError> {
        if m < 2 {
            return Err(QSeriesError::InvalidModulus(m));
        }
        Ok(CoeffRing::ModM(m))
    }
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffRing::BigInt => write!(f, "ZZ"),
            CoeffRing::BigRational => write!(f, "QQ"),
            CoeffRing::ModM(m) => write!(f, "ZZ/{m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QSeriesError {
    #[error("coefficient rings differ: {left} vs {right}")]
    RingMismatch { left: CoeffRing, right: CoeffRing },
    #[error("coefficient at index {index} is not divisible by {divisor}")]
    NotDivisible { index: usize, divisor: BigInt },
    #[error("operation requires integer coefficients, found {0}")]
    NotIntegral(CoeffRing),
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),
    #[error("precision must be positive")]
    ZeroPrecision,
    #[error("division by zero")]
    DivisionByZero,
}

/// A single element of one of the coefficient rings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingElem {
    Int(BigInt),
    Rat(BigRational),
    Mod { value: u64, modulus: u64 },
}

impl RingElem {
    pub fn ring(&self) -> CoeffRing {
        match self {
            RingElem::Int(_) => CoeffRing::BigInt,
            RingElem::Rat(_) => CoeffRing::BigRational,
            RingElem::Mod { modulus, .. } => CoeffRing::ModM(*modulus),
        }
    }

    /// Image of an integer in `ring`.
    pub fn from_int(ring: CoeffRing, value: &BigInt) -> Self {
        match ring {
            CoeffRing::BigInt => RingElem::Int(value.clone()),
            CoeffRing::BigRational => RingElem::Rat(BigRational::from_integer(value.clone())),
            CoeffRing::ModM(m) => RingElem::Mod {
                value: reduce_big(value, m),
                modulus: m,
            },
        }
    }

    pub fn zero(ring: CoeffRing) -> Self {
        Self::from_int(ring, &BigInt::zero())
    }

    pub fn one(ring: CoeffRing) -> Self {
        Self::from_int(ring, &BigInt::one())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RingElem::Int(v) => v.is_zero(),
            RingElem::Rat(v) => v.is_zero(),
            RingElem::Mod { value, .. } => *value == 0,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            RingElem::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            RingElem::Rat(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_residue(&self) -> Option<u64> {
        match self {
            RingElem::Mod { value, .. } => Some(*value),
            _ => None,
        }
    }

    fn check(&self, other: &Self) -> Result<(), QSeriesError> {
        if self.ring() != other.ring() {
            return Err(QSeriesError::RingMismatch {
                left: self.ring(),
                right: other.ring(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, QSeriesError> {
        self.check(other)?;
        Ok(match (self, other) {
            (RingElem::Int(a), RingElem::Int(b)) => RingElem::Int(a + b),
            (RingElem::Rat(a), RingElem::Rat(b)) => RingElem::Rat(a + b),
            (RingElem::Mod { value: a, modulus }, RingElem::Mod { value: b, .. }) => {
                RingElem::Mod {
                    value: add_mod(*a, *b, *modulus),
                    modulus: *modulus,
                }
            }
            _ => unreachable!(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, QSeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        match self {
            RingElem::Int(a) => RingElem::Int(-a),
            RingElem::Rat(a) => RingElem::Rat(-a),
            RingElem::Mod { value, modulus } => RingElem::Mod {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, QSeriesError> {
        self.check(other)?;
        Ok(match (self, other) {
            (RingElem::Int(a), RingElem::Int(b)) => RingElem::Int(a * b),
            (RingElem::Rat(a), RingElem::Rat(b)) => RingElem::Rat(a * b),
            (RingElem::Mod { value: a, modulus }, RingElem::Mod { value: b, .. }) => {
                RingElem::Mod {
                    value: mul_mod(*a, *b, *modulus),
                    modulus: *modulus,
                }
            }
            _ => unreachable!(),
        })
    }

    /// Multiplies by an integer scalar.
    pub fn scale(&self, k: &BigInt) -> Self {
        match self {
            RingElem::Int(a) => RingElem::Int(a * k),
            RingElem::Rat(a) => RingElem::Rat(a * BigRational::from_integer(k.clone())),
            RingElem::Mod { value, modulus } => RingElem::Mod {
                value: mul_mod(*value, reduce_big(k, *modulus), *modulus),
                modulus: *modulus,
            },
        }
    }

    /// Exact quotient `self / other` where it is defined: rationals divide by
    /// any nonzero element, integers only when the division is exact.
    pub fn div_exact(&self, other: &Self) -> Result<Self, QSeriesError> {
        self.check(other)?;
        if other.is_zero() {
            return Err(QSeriesError::DivisionByZero);
        }
        match (self, other) {
            (RingElem::Int(a), RingElem::Int(b)) => {
                let (q, r) = a.div_rem(b);
                if r.is_zero() {
                    Ok(RingElem::Int(q))
                } else {
                    Err(QSeriesError::NotDivisible {
                        index: 0,
                        divisor: b.clone(),
                    })
                }
            }
            (RingElem::Rat(a), RingElem::Rat(b)) => Ok(RingElem::Rat(a / b)),
            (RingElem::Mod { value: a, modulus }, RingElem::Mod { value: b, .. }) => {
                let inv = inverse_mod(*b, *modulus).ok_or(QSeriesError::NotDivisible {
                    index: 0,
                    divisor: BigInt::from(*b),
                })?;
                Ok(RingElem::Mod {
                    value: mul_mod(*a, inv, *modulus),
                    modulus: *modulus,
                })
            }
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingElem::Int(v) => write!(f, "{v}"),
            RingElem::Rat(v) => write!(f, "{v}"),
            RingElem::Mod { value, .. } => write!(f, "{value}"),
        }
    }
}

pub(crate) fn reduce_big(v: &BigInt, m: u64) -> u64 {
    v.mod_floor(&BigInt::from(m))
        .to_u64()
        .expect("residue fits in u64")
}

pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn inverse_mod(a: u64, m: u64) -> Option<u64> {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(m));
    if !e.gcd.is_one() {
        return None;
    }
    Some(reduce_big(&e.x, m))
}

/// Dense coefficient storage, one variant per ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coefficients {
    Int(Vec<BigInt>),
    Rat(Vec<BigRational>),
    Mod { modulus: u64, values: Vec<u64> },
}

impl Coefficients {
    fn len(&self) -> usize {
        match self {
            Coefficients::Int(v) => v.len(),
            Coefficients::Rat(v) => v.len(),
            Coefficients::Mod { values, .. } => values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Coefficients,
}

impl QSeries {
    pub fn from_ints(coeffs: Vec<BigInt>) -> Result<Self, QSeriesError> {
        Self::build(Coefficients::Int(coeffs))
    }

    pub fn from_rationals(coeffs: Vec<BigRational>) -> Result<Self, QSeriesError> {
        Self::build(Coefficients::Rat(coeffs))
    }

    /// Residues are reduced into [0, m).
    pub fn from_residues(modulus: u64, mut values: Vec<u64>) -> Result<Self, QSeriesError> {
        if modulus < 2 {
            return Err(QSeriesError::InvalidModulus(modulus));
        }
        values.iter_mut().for_each(|v| *v %= modulus);
        Self::build(Coefficients::Mod { modulus, values })
    }

    /// Series in `ring` from integer coefficients. `coeffs` shorter than
    /// `precision` is padded with zeros; longer is truncated.
    pub fn from_i64s(
        ring: CoeffRing,
        coeffs: &[i64],
        precision: usize,
    ) -> Result<Self, QSeriesError> {
        let ints: Vec<BigInt> = (0..precision)
            .map(|i| BigInt::from(coeffs.get(i).copied().unwrap_or(0)))
            .collect();
        Self::from_ints(ints)?.into_ring(ring)
    }

    fn build(coeffs: Coefficients) -> Result<Self, QSeriesError> {
        if coeffs.len() == 0 {
            return Err(QSeriesError::ZeroPrecision);
        }
        Ok(Self { coeffs })
    }

    pub fn zero(ring: CoeffRing, precision: usize) -> Result<Self, QSeriesError> {
        Self::from_i64s(ring, &[], precision)
    }

    pub fn one(ring: CoeffRing, precision: usize) -> Result<Self, QSeriesError> {
        Self::from_i64s(ring, &[1], precision)
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn ring(&self) -> CoeffRing {
        match &self.coeffs {
            Coefficients::Int(_) => CoeffRing::BigInt,
            Coefficients::Rat(_) => CoeffRing::BigRational,
            Coefficients::Mod { modulus, .. } => CoeffRing::ModM(*modulus),
        }
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Option<RingElem> {
        match &self.coeffs {
            Coefficients::Int(v) => v.get(i).cloned().map(RingElem::Int),
            Coefficients::Rat(v) => v.get(i).cloned().map(RingElem::Rat),
            Coefficients::Mod { modulus, values } => values.get(i).map(|&value| RingElem::Mod {
                value,
                modulus: *modulus,
            }),
        }
    }

    pub fn int_coeffs(&self) -> Option<&[BigInt]> {
        match &self.coeffs {
            Coefficients::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn rational_coeffs(&self) -> Option<&[BigRational]> {
        match &self.coeffs {
            Coefficients::Rat(v) => Some(v),
            _ => None,
        }
    }

    pub fn residues(&self) -> Option<&[u64]> {
        match &self.coeffs {
            Coefficients::Mod { values, .. } => Some(values),
            _ => None,
        }
    }

    /// Index of the first nonzero coefficient, if any is known.
    pub fn order(&self) -> Option<usize> {
        (0..self.precision()).find(|&i| !self.coeff(i).is_some_and(|c| c.is_zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.order().is_none()
    }

    pub fn truncate(&self, precision: usize) -> Result<Self, QSeriesError> {
        let n = precision.min(self.precision());
        Self::build(match &self.coeffs {
            Coefficients::Int(v) => Coefficients::Int(v[..n].to_vec()),
            Coefficients::Rat(v) => Coefficients::Rat(v[..n].to_vec()),
            Coefficients::Mod { modulus, values } => Coefficients::Mod {
                modulus: *modulus,
                values: values[..n].to_vec(),
            },
        })
    }

    /// Multiplies by q^k. The result knows k more coefficients than `self`.
    pub fn shift(&self, k: usize) -> Self {
        let coeffs = match &self.coeffs {
            Coefficients::Int(v) => Coefficients::Int(
                std::iter::repeat_n(BigInt::zero(), k)
                    .chain(v.iter().cloned())
                    .collect(),
            ),
            Coefficients::Rat(v) => Coefficients::Rat(
                std::iter::repeat_n(BigRational::zero(), k)
                    .chain(v.iter().cloned())
                    .collect(),
            ),
            Coefficients::Mod { modulus, values } => Coefficients::Mod {
                modulus: *modulus,
                values: std::iter::repeat_n(0, k)
                    .chain(values.iter().copied())
                    .collect(),
            },
        };
        Self { coeffs }
    }

    /// Reinterprets integer coefficients in another ring.
    pub fn into_ring(self, ring: CoeffRing) -> Result<Self, QSeriesError> {
        if self.ring() == ring {
            return Ok(self);
        }
        let Coefficients::Int(v) = &self.coeffs else {
            return Err(QSeriesError::NotIntegral(self.ring()));
        };
        Self::build(match ring {
            CoeffRing::BigInt => unreachable!(),
            CoeffRing::BigRational => {
                Coefficients::Rat(v.iter().cloned().map(BigRational::from_integer).collect())
            }
            CoeffRing::ModM(m) => {
                if m < 2 {
                    return Err(QSeriesError::InvalidModulus(m));
                }
                Coefficients::Mod {
                    modulus: m,
                    values: v.iter().map(|c| reduce_big(c, m)).collect(),
                }
            }
        })
    }

    /// Coefficientwise reduction of an integer series modulo `m`.
    pub fn reduce_mod(&self, m: u64) -> Result<Self, QSeriesError> {
        if m < 2 {
            return Err(QSeriesError::InvalidModulus(m));
        }
        match &self.coeffs {
            Coefficients::Int(_) => self.clone().into_ring(CoeffRing::ModM(m)),
            // Reducing Z/M further is well defined when m | M.
            Coefficients::Mod { modulus, values } if modulus % m == 0 => {
                Self::from_residues(m, values.clone())
            }
            _ => Err(QSeriesError::NotIntegral(self.ring())),
        }
    }

    fn check_ring(&self, other: &Self) -> Result<(), QSeriesError> {
        if self.ring() != other.ring() {
            return Err(QSeriesError::RingMismatch {
                left: self.ring(),
                right: other.ring(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, QSeriesError> {
        self.check_ring(other)?;
        let n = self.precision().min(other.precision());
        Self::build(match (&self.coeffs, &other.coeffs) {
            (Coefficients::Int(a), Coefficients::Int(b)) => {
                Coefficients::Int(a[..n].iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Coefficients::Rat(a), Coefficients::Rat(b)) => {
                Coefficients::Rat(a[..n].iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Coefficients::Mod { modulus, values: a }, Coefficients::Mod { values: b, .. }) => {
                Coefficients::Mod {
                    modulus: *modulus,
                    values: a[..n]
                        .iter()
                        .zip(b)
                        .map(|(&x, &y)| add_mod(x, y, *modulus))
                        .collect(),
                }
            }
            _ => unreachable!(),
        })
    }

    pub fn neg(&self) -> Self {
        let coeffs = match &self.coeffs {
            Coefficients::Int(a) => Coefficients::Int(a.iter().map(|x| -x).collect()),
            Coefficients::Rat(a) => Coefficients::Rat(a.iter().map(|x| -x).collect()),
            Coefficients::Mod { modulus, values } => Coefficients::Mod {
                modulus: *modulus,
                values: values.iter().map(|&x| (modulus - x) % modulus).collect(),
            },
        };
        Self { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, QSeriesError> {
        self.add(&other.neg())
    }

    /// Multiplies every coefficient by the integer `k`.
    pub fn scale(&self, k: &BigInt) -> Self {
        let coeffs = match &self.coeffs {
            Coefficients::Int(a) => Coefficients::Int(a.iter().map(|x| x * k).collect()),
            Coefficients::Rat(a) => {
                let k = BigRational::from_integer(k.clone());
                Coefficients::Rat(a.iter().map(|x| x * &k).collect())
            }
            Coefficients::Mod { modulus, values } => {
                let k = reduce_big(k, *modulus);
                Coefficients::Mod {
                    modulus: *modulus,
                    values: values.iter().map(|&x| mul_mod(x, k, *modulus)).collect(),
                }
            }
        };
        Self { coeffs }
    }

    /// Multiplies every coefficient by a ring element of the same ring.
    pub fn scale_by(&self, c: &RingElem) -> Result<Self, QSeriesError> {
        if c.ring() != self.ring() {
            return Err(QSeriesError::RingMismatch {
                left: self.ring(),
                right: c.ring(),
            });
        }
        Ok(match c {
            RingElem::Int(k) => self.scale(k),
            RingElem::Mod { value, .. } => self.scale(&BigInt::from(*value)),
            RingElem::Rat(k) => {
                let a = self.rational_coeffs().expect("ring checked");
                Self {
                    coeffs: Coefficients::Rat(a.iter().map(|x| x * k).collect()),
                }
            }
        })
    }

    /// Exact coefficientwise division of an integer series by `c`.
    pub fn scalar_div_exact(&self, c: &BigInt) -> Result<Self, QSeriesError> {
        let Coefficients::Int(a) = &self.coeffs else {
            return Err(QSeriesError::NotIntegral(self.ring()));
        };
        if c.is_zero() {
            return Err(QSeriesError::DivisionByZero);
        }
        let mut out = Vec::with_capacity(a.len());
        for (index, x) in a.iter().enumerate() {
            let (q, r) = x.div_rem(c);
            if !r.is_zero() {
                return Err(QSeriesError::NotDivisible {
                    index,
                    divisor: c.clone(),
                });
            }
            out.push(q);
        }
        Self::from_ints(out)
    }

    /// Truncated Cauchy product at the smaller of the two precisions.
    pub fn mul(&self, other: &Self) -> Result<Self, QSeriesError> {
        self.check_ring(other)?;
        let n = self.precision().min(other.precision());
        Self::build(match (&self.coeffs, &other.coeffs) {
            (Coefficients::Int(a), Coefficients::Int(b)) => {
                Coefficients::Int(mul_int(&a[..n], &b[..n]))
            }
            (Coefficients::Rat(a), Coefficients::Rat(b)) => {
                Coefficients::Rat(mul_rat(&a[..n], &b[..n]))
            }
            (Coefficients::Mod { modulus, values: a }, Coefficients::Mod { values: b, .. }) => {
                Coefficients::Mod {
                    modulus: *modulus,
                    values: mul_mod_series(&a[..n], &b[..n], *modulus),
                }
            }
            _ => unreachable!(),
        })
    }

    /// Powering by repeated squaring; `pow(0)` is 1 at the same precision.
    pub fn pow(&self, mut k: u64) -> Result<Self, QSeriesError> {
        let mut acc = Self::one(self.ring(), self.precision())?;
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Number of nonzero coefficients.
    pub fn support_size(&self) -> usize {
        match &self.coeffs {
            Coefficients::Int(v) => v.iter().filter(|x| !x.is_zero()).count(),
            Coefficients::Rat(v) => v.iter().filter(|x| !x.is_zero()).count(),
            Coefficients::Mod { values, .. } => values.iter().filter(|&&x| x != 0).count(),
        }
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in 0..self.precision() {
            let c = self.coeff(i).expect("in range");
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*q")?,
                _ => write!(f, "({c})*q^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.precision())
    }
}

/// Output blocks for a convolution of length `n`.
fn blocks(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .step_by(BLOCK)
        .map(|lo| (lo, (lo + BLOCK).min(n)))
        .collect()
}

/// Orders the operands so the one with fewer nonzero terms drives the outer loop.
fn sparse_first<'a, T>(
    a: &'a [T],
    b: &'a [T],
    is_zero: impl Fn(&T) -> bool,
) -> (Vec<usize>, &'a [T], &'a [T]) {
    let za = a.iter().filter(|x| !is_zero(x)).count();
    let zb = b.iter().filter(|x| !is_zero(x)).count();
    let (outer, inner) = if za <= zb { (a, b) } else { (b, a) };
    let support = outer
        .iter()
        .enumerate()
        .filter(|(_, x)| !is_zero(x))
        .map(|(i, _)| i)
        .collect();
    (support, outer, inner)
}

fn run_blocks<T: Send, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize, usize) -> Vec<T> + Sync,
{
    let parts: Vec<Vec<T>> = if n >= PARALLEL_THRESHOLD {
        blocks(n)
            .into_par_iter()
            .map(|(lo, hi)| f(lo, hi))
            .collect()
    } else {
        vec![f(0, n)]
    };
    parts.into_iter().flatten().collect()
}

fn mul_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len();
    let (support, outer, inner) = sparse_first(a, b, |x: &BigInt| x.is_zero());
    let max_bits = |v: &[BigInt]| v.iter().map(|x| x.bits()).max().unwrap_or(0);
    let len_bits = 64 - (n as u64).leading_zeros() as u64;
    if max_bits(a) + max_bits(b) + len_bits < 126 {
        // Every partial sum fits in i128.
        let outer_small: Vec<i128> = outer.iter().map(|x| x.to_i128().unwrap_or(0)).collect();
        let inner_small: Vec<i128> = inner.iter().map(|x| x.to_i128().unwrap_or(0)).collect();
        return run_blocks(n, |lo, hi| {
            let mut acc = vec![0i128; hi - lo];
            for &i in support.iter().take_while(|&&i| i < hi) {
                let x = outer_small[i];
                let start = lo.saturating_sub(i);
                for j in start..hi - i {
                    acc[i + j - lo] += x * inner_small[j];
                }
            }
            acc.into_iter().map(BigInt::from).collect()
        });
    }
    run_blocks(n, |lo, hi| {
        let mut acc = vec![BigInt::zero(); hi - lo];
        for &i in support.iter().take_while(|&&i| i < hi) {
            let x = &outer[i];
            let start = lo.saturating_sub(i);
            for j in start..hi - i {
                if !inner[j].is_zero() {
                    acc[i + j - lo] += x * &inner[j];
                }
            }
        }
        acc
    })
}

fn mul_rat(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len();
    let (support, outer, inner) = sparse_first(a, b, |x: &BigRational| x.is_zero());
    run_blocks(n, |lo, hi| {
        let mut acc = vec![BigRational::zero(); hi - lo];
        for &i in support.iter().take_while(|&&i| i < hi) {
            let start = lo.saturating_sub(i);
            for j in start..hi - i {
                if !inner[j].is_zero() {
                    acc[i + j - lo] += &outer[i] * &inner[j];
                }
            }
        }
        acc
    })
}

fn mul_mod_series(a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
    let n = a.len();
    let (support, outer, inner) = sparse_first(a, b, |&x: &u64| x == 0);
    if m <= 1 << 32 {
        // Products are below 2^64, so a u128 accumulator absorbs any n terms.
        return run_blocks(n, |lo, hi| {
            let mut acc = vec![0u128; hi - lo];
            for &i in support.iter().take_while(|&&i| i < hi) {
                let x = outer[i] as u128;
                let start = lo.saturating_sub(i);
                for j in start..hi - i {
                    acc[i + j - lo] += x * inner[j] as u128;
                }
            }
            acc.into_iter().map(|v| (v % m as u128) as u64).collect()
        });
    }
    run_blocks(n, |lo, hi| {
        let mut acc = vec![0u64; hi - lo];
        for &i in support.iter().take_while(|&&i| i < hi) {
            let x = outer[i];
            let start = lo.saturating_sub(i);
            for j in start..hi - i {
                let slot = &mut acc[i + j - lo];
                *slot = add_mod(*slot, mul_mod(x, inner[j], m), m);
            }
        }
        acc
    })
}

/// Integer coefficients as signed display strings, for error messages and reports.
pub fn format_int_coeffs(v: &[BigInt]) -> Vec<String> {
    v.iter()
        .map(|x| {
            if x.is_negative() {
                format!("{x}")
            } else {
                x.to_string()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zz(c: &[i64], n: usize) -> QSeries {
        QSeries::from_i64s(CoeffRing::BigInt, c, n).unwrap()
    }

    // τ(1..=5) padded into Δ.
    const DELTA: [i64; 6] = [0, 1, -24, 252, -1472, 4830];

    #[test]
    fn add_examples() {
        assert_eq!(zz(&[1, 1], 4).add(&zz(&[1, -1], 4)).unwrap(), zz(&[2], 4));
        let f = zz(&[3, 1, 4, 1], 4);
        assert_eq!(
            QSeries::zero(CoeffRing::BigInt, 4)
                .unwrap()
                .add(&f)
                .unwrap(),
            f
        );
        let s = zz(&[0, 1, -24], 3).add(&zz(&[0, 0, 24, 7], 4)).unwrap();
        assert_eq!(s, zz(&[0, 1], 3));
        assert_eq!(s.precision(), 3);
    }

    #[test]
    fn ring_mismatch_is_rejected() {
        let a = zz(&[1], 3);
        let b = a.reduce_mod(5).unwrap();
        assert!(matches!(a.add(&b), Err(QSeriesError::RingMismatch { .. })));
        assert!(matches!(a.mul(&b), Err(QSeriesError::RingMismatch { .. })));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(
            zz(&[0, 1], 4).mul(&zz(&[0, 1], 4)).unwrap(),
            zz(&[0, 0, 1], 4)
        );
        assert_eq!(
            zz(&[1, 1], 5).mul(&zz(&[1, -1], 5)).unwrap(),
            zz(&[1, 0, -1], 5)
        );
        let d = zz(&DELTA, 4);
        assert_eq!(d.mul(&d).unwrap(), zz(&[0, 0, 1, -48], 4));
    }

    #[test]
    fn pow_examples() {
        let f = zz(&[2, 3, 5], 5);
        assert_eq!(f.pow(0).unwrap(), zz(&[1], 5));
        assert_eq!(f.pow(1).unwrap(), f);
        let d2 = zz(&DELTA, 6).pow(2).unwrap();
        assert_eq!(d2.coeff(3), Some(RingElem::Int(BigInt::from(-48))));
    }

    #[test]
    fn scalar_div_examples() {
        assert_eq!(
            zz(&[0, 1728], 3)
                .scalar_div_exact(&BigInt::from(1728))
                .unwrap(),
            zz(&[0, 1], 3)
        );
        assert!(matches!(
            zz(&[0, 2], 2).scalar_div_exact(&BigInt::from(4)),
            Err(QSeriesError::NotDivisible { index: 1, .. })
        ));
        assert!(matches!(
            zz(&[1], 1)
                .reduce_mod(3)
                .unwrap()
                .scalar_div_exact(&BigInt::from(1)),
            Err(QSeriesError::NotIntegral(_))
        ));
    }

    #[test]
    fn reduce_examples() {
        let d = zz(&DELTA, 4);
        assert_eq!(d.reduce_mod(3).unwrap().residues().unwrap(), &[0, 1, 0, 0]);
        assert_eq!(
            zz(&DELTA, 6).reduce_mod(8).unwrap().residues().unwrap()[2],
            0
        );
        assert_eq!(zz(&[1], 1).reduce_mod(2).unwrap().residues().unwrap(), &[1]);
        assert_eq!(d.reduce_mod(1), Err(QSeriesError::InvalidModulus(1)));
        assert_eq!(
            QSeries::from_residues(5, vec![7, 12])
                .unwrap()
                .residues()
                .unwrap(),
            &[2, 2]
        );
    }

    #[test]
    fn rationals_stay_reduced() {
        let half = BigRational::new(BigInt::from(2), BigInt::from(4));
        let s = QSeries::from_rationals(vec![half.clone(), half]).unwrap();
        let sq = s.mul(&s).unwrap();
        let c = sq.rational_coeffs().unwrap();
        assert_eq!(c[0], BigRational::new(BigInt::from(1), BigInt::from(4)));
        assert_eq!(c[1].denom(), &BigInt::from(2));
    }

    #[test]
    fn zero_precision_rejected() {
        assert_eq!(
            QSeries::from_ints(vec![]).unwrap_err(),
            QSeriesError::ZeroPrecision
        );
    }

    #[test]
    fn wide_coefficients_take_bigint_path() {
        let big: BigInt = BigInt::from(1) << 100;
        let f = QSeries::from_ints(vec![big.clone(), big.clone()]).unwrap();
        let sq = f.mul(&f).unwrap();
        assert_eq!(sq.int_coeffs().unwrap(), &[&big * &big, &big * &big * 2]);
    }

    #[test]
    fn large_modulus_kernel() {
        let m = (1u64 << 61) - 1;
        let f = QSeries::from_residues(m, vec![m - 1, m - 2, 3]).unwrap();
        let g = f.mul(&f).unwrap();
        let expect = zz(&[-1, -2, 3], 3)
            .mul(&zz(&[-1, -2, 3], 3))
            .unwrap()
            .reduce_mod(m)
            .unwrap();
        assert_eq!(g, expect);
    }

    #[test]
    fn parallel_blocks_match_serial() {
        let n = 3000;
        let a: Vec<i64> = (0..n).map(|i| (i as i64 * 7919) % 1009 - 500).collect();
        let b: Vec<i64> = (0..n).map(|i| (i as i64 * 104_729) % 997 - 400).collect();
        let fa = zz(&a, n);
        let fb = zz(&b, n);
        let prod = fa.mul(&fb).unwrap();
        let coeffs = prod.int_coeffs().unwrap();
        for &k in &[0usize, 1, 255, 256, 1023, 1024, 2999] {
            let direct: i64 = (0..=k).map(|i| a[i] * b[k - i]).sum();
            assert_eq!(coeffs[k], BigInt::from(direct));
        }
        let pm = fa
            .reduce_mod(97)
            .unwrap()
            .mul(&fb.reduce_mod(97).unwrap())
            .unwrap();
        assert_eq!(pm, prod.reduce_mod(97).unwrap());
    }

    fn series(ring: CoeffRing) -> impl Strategy<Value = QSeries> {
        (1usize..=64).prop_flat_map(move |n| {
            proptest::collection::vec(-1000i64..1000, n)
                .prop_map(move |c| QSeries::from_i64s(ring, &c, c.len()).unwrap())
        })
    }

    fn triple() -> impl Strategy<Value = (QSeries, QSeries, QSeries)> {
        (
            series(CoeffRing::BigInt),
            series(CoeffRing::BigInt),
            series(CoeffRing::BigInt),
        )
    }

    proptest! {
        #[test]
        fn ring_axioms((a, b, c) in triple()) {
            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            prop_assert_eq!(a.add(&b).unwrap().add(&c).unwrap(), a.add(&b.add(&c).unwrap()).unwrap());
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert_eq!(
                a.mul(&b.add(&c).unwrap()).unwrap(),
                a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
            );
        }

        #[test]
        fn truncation_commutes_with_mul((a, b, _c) in triple(), cut in 1usize..64) {
            let n = cut.min(a.precision()).min(b.precision());
            prop_assert_eq!(
                a.mul(&b).unwrap().truncate(n).unwrap(),
                a.truncate(n).unwrap().mul(&b.truncate(n).unwrap()).unwrap()
            );
        }

        #[test]
        fn reduction_is_a_ring_map((a, b, _c) in triple(), m in 2u64..50, k in 0u64..6) {
            let r = |s: &QSeries| s.reduce_mod(m).unwrap();
            prop_assert_eq!(r(&a.add(&b).unwrap()), r(&a).add(&r(&b)).unwrap());
            prop_assert_eq!(r(&a.mul(&b).unwrap()), r(&a).mul(&r(&b)).unwrap());
            prop_assert_eq!(r(&a.pow(k).unwrap()), r(&a).pow(k).unwrap());
        }

        #[test]
        fn squaring_matches_iterated_product(a in series(CoeffRing::ModM(1_000_003)), k in 0u64..9) {
            let mut iter = QSeries::one(a.ring(), a.precision()).unwrap();
            for _ in 0..k {
                iter = iter.mul(&a).unwrap();
            }
            prop_assert_eq!(a.pow(k).unwrap(), iter);
        }
    }
}
