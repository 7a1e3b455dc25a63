//! Dense polynomials over a prime field F_p (p < 2³²) and distinct-degree
//! factorization.

use num_bigint::BigInt;
use num_integer::Integer;

/// Coefficients ascending, always trimmed so the last entry is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct FpPoly {
    p: u64,
    c: Vec<u64>,
}

fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv(a: u64, p: u64) -> u64 {
    let (mut base, mut exp, mut acc) = (a % p, p - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulm(acc, base, p);
        }
        base = mulm(base, base, p);
        exp >>= 1;
    }
    acc
}

impl FpPoly {
    pub(crate) fn new(p: u64, mut c: Vec<u64>) -> Self {
        for x in c.iter_mut() {
            *x %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        Self { p, c }
    }

    pub(crate) fn from_ints(p: u64, coeffs: &[BigInt]) -> Self {
        let pb = BigInt::from(p);
        let c = coeffs
            .iter()
            .map(|a| u64::try_from(a.mod_floor(&pb)).expect("reduced below p"))
            .collect();
        Self::new(p, c)
    }

    fn x(p: u64) -> Self {
        Self::new(p, vec![0, 1])
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub(crate) fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.c.len().max(other.c.len());
        let c = (0..n)
            .map(|i| {
                let a = self.c.get(i).copied().unwrap_or(0);
                let b = other.c.get(i).copied().unwrap_or(0);
                (a + self.p - b) % self.p
            })
            .collect();
        Self::new(self.p, c)
    }

    fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::new(self.p, vec![]);
        }
        let p = self.p;
        let mut acc = vec![0u128; self.c.len() + other.c.len() - 1];
        let modulus = (p as u128) * (p as u128);
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in other.c.iter().enumerate() {
                let slot = &mut acc[i + j];
                *slot += a as u128 * b as u128;
                if *slot >= modulus << 32 {
                    *slot %= p as u128;
                }
            }
        }
        Self::new(p, acc.into_iter().map(|x| (x % p as u128) as u64).collect())
    }

    fn divrem(&self, d: &Self) -> (Self, Self) {
        let p = self.p;
        let dd = d.degree().expect("division by zero polynomial");
        let lead_inv = inv(d.c[dd], p);
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Self::new(p, vec![]), self.clone());
        }
        let mut q = vec![0u64; r.len() - dd];
        for k in (0..q.len()).rev() {
            let coef = mulm(r[k + dd], lead_inv, p);
            q[k] = coef;
            if coef != 0 {
                for (j, &dj) in d.c.iter().enumerate() {
                    r[k + j] = (r[k + j] + p - mulm(coef, dj, p)) % p;
                }
            }
        }
        r.truncate(dd);
        (Self::new(p, q), Self::new(p, r))
    }

    fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    fn monic(&self) -> Self {
        match self.c.last() {
            None => self.clone(),
            Some(&l) => {
                let li = inv(l, self.p);
                Self::new(
                    self.p,
                    self.c.iter().map(|&a| mulm(a, li, self.p)).collect(),
                )
            }
        }
    }

    fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    fn derivative(&self) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &a)| mulm(a, i as u64 % self.p, self.p))
            .collect();
        Self::new(self.p, c)
    }

    fn powmod(&self, mut e: u64, f: &Self) -> Self {
        let mut base = self.rem(f);
        let mut acc = Self::new(self.p, vec![1]).rem(f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(f);
            }
            base = base.mul(&base).rem(f);
            e >>= 1;
        }
        acc
    }
}

/// Result of [`ddf`]: either the factor degrees or a repeated factor mod p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum DdfOutcome {
    Degrees(Vec<usize>),
    NotSquarefree,
}

/// Distinct-degree factorization of a polynomial of positive degree.
pub(crate) fn ddf(f: &FpPoly) -> DdfOutcome {
    let p = f.p;
    let mut f = f.monic();
    if f.deg() == 0 {
        return DdfOutcome::Degrees(vec![]);
    }
    let df = f.derivative();
    if df.is_zero() || f.gcd(&df).deg() > 0 {
        return DdfOutcome::NotSquarefree;
    }
    let x = FpPoly::x(p);
    let mut h = x.rem(&f);
    let mut degrees = Vec::new();
    let mut i = 1;
    while f.deg() >= 2 * i {
        h = h.powmod(p, &f);
        let g = f.gcd(&h.sub(&x));
        if g.deg() > 0 {
            degrees.extend(std::iter::repeat_n(i, g.deg() / i));
            f = f.divrem(&g).0;
            h = h.rem(&f);
        }
        i += 1;
    }
    if f.deg() > 0 {
        degrees.push(f.deg());
    }
    degrees.sort_unstable();
    DdfOutcome::Degrees(degrees)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(p: u64, c: &[i64]) -> FpPoly {
        let big: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
        FpPoly::from_ints(p, &big)
    }

    /// Irreducible-factor degrees by brute force: strip monic irreducibles
    /// of each degree found by exhaustive search.
    fn brute_degrees(f: &FpPoly) -> Option<Vec<usize>> {
        let p = f.p;
        let mut f = f.monic();
        let mut out = Vec::new();
        let mut deg = 1;
        while f.deg() > 0 {
            if deg > f.deg() {
                break;
            }
            let mut found = false;
            let count = p.pow(deg as u32);
            for code in 0..count {
                let mut c = Vec::with_capacity(deg + 1);
                let mut x = code;
                for _ in 0..deg {
                    c.push(x % p);
                    x /= p;
                }
                c.push(1);
                let g = FpPoly::new(p, c);
                let (q, r) = f.divrem(&g);
                if r.is_zero() {
                    // repeated factors are rejected like the real routine does
                    if q.divrem(&g).1.is_zero() {
                        return None;
                    }
                    out.push(deg);
                    f = q;
                    found = true;
                    break;
                }
            }
            if !found {
                deg += 1;
            }
        }
        out.sort_unstable();
        Some(out)
    }

    #[test]
    fn examples() {
        assert_eq!(ddf(&poly(3, &[1, 0, 1])), DdfOutcome::Degrees(vec![2]));
        assert_eq!(ddf(&poly(3, &[-1, 0, 1])), DdfOutcome::Degrees(vec![1, 1]));
        assert_eq!(ddf(&poly(2, &[1, 1, 0, 1])), DdfOutcome::Degrees(vec![3]));
        assert_eq!(ddf(&poly(5, &[1, 2, 1])), DdfOutcome::NotSquarefree);
    }

    #[test]
    fn matches_brute_force() {
        let mut state = 12345u64;
        for p in [2u64, 3, 5, 7] {
            for _ in 0..150 {
                let deg = 1 + (state % 6) as usize;
                let mut c = Vec::new();
                for _ in 0..deg {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    c.push((state >> 33) % p);
                }
                c.push(1);
                let f = FpPoly::new(p, c);
                let expect = match brute_degrees(&f) {
                    Some(d) => DdfOutcome::Degrees(d),
                    None => DdfOutcome::NotSquarefree,
                };
                if let DdfOutcome::Degrees(d) = ddf(&f) {
                    assert_eq!(d.iter().sum::<usize>(), f.deg());
                    assert_eq!(DdfOutcome::Degrees(d), expect, "p={p} f={f:?}");
                } else {
                    assert_eq!(expect, DdfOutcome::NotSquarefree, "p={p} f={f:?}");
                }
            }
        }
    }
}
