//! Subgroups of finite abelian groups: a brute-force census, the closed
//! counts c_{m,n}(d,e) of subgroups of type C_d × C_{m/d} inside
//! C_e × C_{mn/e}, and the generating-polynomial identity they satisfy.
//!
//! The census works on each Sylow subgroup separately (every subgroup of a
//! finite abelian group is the product of its Sylow parts) and, inside a
//! p-group, closes the trivial subgroup under joins with cyclic subgroups,
//! deduplicating by element bitset.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use crate::arith::{self, ArithError};

/// Default ceiling on the order of a group handed to the census.
pub const DEFAULT_CENSUS_BOUND: u64 = 5000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubgroupError {
    #[error("cyclic factor of order 0")]
    ZeroFactor,
    #[error("group order {order} exceeds the census bound {bound}")]
    BoundExceeded { order: u64, bound: u64 },
    #[error("(m, n, d, e) = ({m}, {n}, {d}, {e}) violates {reason}")]
    Hypothesis {
        m: u64,
        n: u64,
        d: u64,
        e: u64,
        reason: &'static str,
    },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// A finite abelian group C_{d₁} × … × C_{d_r} with d₁ | d₂ | … | d_r and
/// every dᵢ > 1. The trivial group has no factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AbelianType {
    invariant_factors: Vec<u64>,
}

impl AbelianType {
    /// Normalizes an arbitrary product of cyclic groups to invariant factors.
    pub fn new(cyclic_orders: impl IntoIterator<Item = u64>) -> Result<Self, SubgroupError> {
        let mut by_prime: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
        for c in cyclic_orders {
            if c == 0 {
                return Err(SubgroupError::ZeroFactor);
            }
            for &(p, e) in arith::factorize(c)?.factors() {
                by_prime.entry(p).or_default().push(e);
            }
        }
        let rank = by_prime.values().map(Vec::len).max().unwrap_or(0);
        let mut factors = vec![1u64; rank];
        for (p, mut exps) in by_prime {
            exps.sort_unstable();
            // smallest exponents go to the smallest factors
            let offset = rank - exps.len();
            for (j, e) in exps.into_iter().enumerate() {
                factors[offset + j] *= p.pow(e);
            }
        }
        Ok(Self {
            invariant_factors: factors,
        })
    }

    pub fn trivial() -> Self {
        Self {
            invariant_factors: Vec::new(),
        }
    }

    pub fn cyclic(n: u64) -> Result<Self, SubgroupError> {
        Self::new([n])
    }

    /// C_a × C_b in normal form.
    pub fn rank_two(a: u64, b: u64) -> Result<Self, SubgroupError> {
        Self::new([a, b])
    }

    /// Recovers the type of a group from the orders of all its elements.
    ///
    /// For each prime p the counts |H[p^k]| = p^{Σᵢ min(k, λᵢ)} determine the
    /// partition λ of the Sylow p-part.
    pub fn from_element_orders(orders: &[u64]) -> Result<Self, SubgroupError> {
        let total = orders.len() as u64;
        if total == 0 {
            return Err(SubgroupError::ZeroFactor);
        }
        let mut pieces = Vec::new();
        for &(p, top) in arith::factorize(total)?.factors() {
            let log_count = |k: u32| -> u32 {
                let pk = p.pow(k);
                let c = orders.iter().filter(|&&o| pk % o == 0).count() as u64;
                let mut l = 0;
                let mut v = 1;
                while v < c {
                    v *= p;
                    l += 1;
                }
                l
            };
            // conjugate partition: at_least[k-1] = #{i : λᵢ ≥ k}
            let mut at_least = Vec::new();
            let mut prev = 0;
            for k in 1..=top {
                let s = log_count(k);
                if s == prev {
                    break;
                }
                at_least.push(s - prev);
                prev = s;
            }
            let parts = at_least.first().copied().unwrap_or(0);
            for j in 0..parts {
                let lambda = at_least.iter().filter(|&&c| c > j).count() as u32;
                pieces.push(p.pow(lambda));
            }
        }
        Self::new(pieces)
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn order(&self) -> u64 {
        self.invariant_factors.iter().product()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    pub fn is_cyclic(&self) -> bool {
        self.rank() <= 1
    }

    /// Type of the direct product.
    pub fn product(&self, other: &Self) -> Self {
        Self::new(
            self.invariant_factors
                .iter()
                .chain(&other.invariant_factors)
                .copied(),
        )
        .expect("factors are positive")
    }

    /// The Sylow p-subgroup's type.
    pub fn primary_part(&self, p: u64) -> Self {
        Self::new(
            self.invariant_factors
                .iter()
                .map(|&d| p.pow(valuation(d, p))),
        )
        .expect("factors are positive")
    }

    fn primes(&self) -> Vec<u64> {
        arith::factorize(self.order())
            .map(|f| f.factors().iter().map(|&(p, _)| p).collect())
            .unwrap_or_default()
    }
}

fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

impl fmt::Display for AbelianType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariant_factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .invariant_factors
            .iter()
            .map(|d| format!("C{d}"))
            .collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// One subgroup found by the census.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubgroupRecord {
    pub ambient: AbelianType,
    /// Coordinates in the ambient's invariant factors.
    pub generators: Vec<Vec<u64>>,
    #[serde(rename = "type")]
    pub subgroup_type: AbelianType,
    pub order: u64,
}

impl SubgroupRecord {
    /// Every element of the generated subgroup, sorted.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let group = Ambient::new(&self.ambient);
        let gens: Vec<usize> = self.generators.iter().map(|g| group.encode(g)).collect();
        let mut elems: Vec<usize> = group.span(&gens).into_iter().collect();
        elems.sort_unstable();
        elems.into_iter().map(|x| group.decode(x)).collect()
    }
}

/// Mixed-radix encoding of C_{d₁} × … × C_{d_r}.
struct Ambient {
    moduli: Vec<u64>,
    order: usize,
}

impl Ambient {
    fn new(t: &AbelianType) -> Self {
        Self {
            moduli: t.invariant_factors.clone(),
            order: t.order() as usize,
        }
    }

    fn encode(&self, coords: &[u64]) -> usize {
        self.moduli
            .iter()
            .zip(coords)
            .fold(0usize, |acc, (&m, &c)| acc * m as usize + (c % m) as usize)
    }

    fn decode(&self, mut x: usize) -> Vec<u64> {
        let mut out = vec![0u64; self.moduli.len()];
        for (slot, &m) in out.iter_mut().zip(&self.moduli).rev() {
            *slot = (x % m as usize) as u64;
            x /= m as usize;
        }
        out
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        let mut out = 0usize;
        let mut place = 1usize;
        for &m in self.moduli.iter().rev() {
            let m = m as usize;
            out += ((a % m + b % m) % m) * place;
            a /= m;
            b /= m;
            place *= m;
        }
        out
    }

    fn element_order(&self, x: usize) -> u64 {
        self.decode(x)
            .iter()
            .zip(&self.moduli)
            .fold(1u64, |acc, (&c, &m)| {
                num_integer::lcm(acc, m / num_integer::gcd(c, m))
            })
    }

    fn span(&self, gens: &[usize]) -> HashSet<usize> {
        let mut set: HashSet<usize> = HashSet::from([0]);
        let mut elems = vec![0usize];
        for &g in gens {
            let base = elems.clone();
            let mut x = g;
            while !set.contains(&x) {
                let coset: Vec<usize> = base.iter().map(|&h| self.add(h, x)).collect();
                for y in &coset {
                    set.insert(*y);
                }
                elems.extend(coset);
                x = self.add(x, g);
            }
        }
        set
    }
}

struct Found {
    elements: Vec<usize>,
    generators: Vec<usize>,
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
}

/// Every subgroup of `group`, found by closing under joins with cyclic
/// subgroups.
fn closure_census(group: &Ambient) -> Vec<Found> {
    let n = group.order;
    let mut cyclic_keys = HashSet::new();
    let mut cyclic_gens = Vec::new();
    for g in 1..n {
        let mut bits = Bits::new(n);
        let mut x = g;
        bits.set(0);
        while x != 0 {
            bits.set(x);
            x = group.add(x, g);
        }
        if cyclic_keys.insert(bits.0) {
            cyclic_gens.push(g);
        }
    }

    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut trivial = Bits::new(n);
    trivial.set(0);
    seen.insert(trivial.0.clone());
    let mut out = vec![Found {
        elements: vec![0],
        generators: vec![],
    }];
    let mut queue = VecDeque::from([(0usize, trivial)]);
    while let Some((idx, bits)) = queue.pop_front() {
        for &c in &cyclic_gens {
            if bits.get(c) {
                continue;
            }
            let base = out[idx].elements.clone();
            let mut joined = Bits(bits.0.clone());
            let mut elements = base.clone();
            let mut x = c;
            while !joined.get(x) {
                for &h in &base {
                    let y = group.add(h, x);
                    joined.set(y);
                    elements.push(y);
                }
                x = group.add(x, c);
            }
            if seen.insert(joined.0.clone()) {
                let mut generators = out[idx].generators.clone();
                generators.push(c);
                out.push(Found {
                    elements,
                    generators,
                });
                queue.push_back((out.len() - 1, joined));
            }
        }
    }
    out
}

fn check_bound(g: &AbelianType, bound: u64) -> Result<(), SubgroupError> {
    if g.order() > bound {
        return Err(SubgroupError::BoundExceeded {
            order: g.order(),
            bound,
        });
    }
    Ok(())
}

/// Whole-group census without splitting into Sylow parts.
pub fn enumerate_subgroups_direct(
    g: &AbelianType,
    bound: u64,
) -> Result<Vec<SubgroupRecord>, SubgroupError> {
    check_bound(g, bound)?;
    let group = Ambient::new(g);
    let mut out: Vec<SubgroupRecord> = closure_census(&group)
        .into_iter()
        .map(|f| {
            let orders: Vec<u64> = f.elements.iter().map(|&x| group.element_order(x)).collect();
            SubgroupRecord {
                ambient: g.clone(),
                generators: f.generators.iter().map(|&x| group.decode(x)).collect(),
                subgroup_type: AbelianType::from_element_orders(&orders).expect("nonempty"),
                order: f.elements.len() as u64,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        (a.order, &a.subgroup_type, &a.generators).cmp(&(b.order, &b.subgroup_type, &b.generators))
    });
    Ok(out)
}

/// Every subgroup of `g` exactly once, with the default bound.
pub fn enumerate_subgroups(g: &AbelianType) -> Result<Vec<SubgroupRecord>, SubgroupError> {
    enumerate_subgroups_with_bound(g, DEFAULT_CENSUS_BOUND)
}

pub fn enumerate_subgroups_with_bound(
    g: &AbelianType,
    bound: u64,
) -> Result<Vec<SubgroupRecord>, SubgroupError> {
    check_bound(g, bound)?;
    let mut partial: Vec<(Vec<Vec<u64>>, AbelianType)> = vec![(vec![], AbelianType::trivial())];
    for p in g.primes() {
        let part = g.primary_part(p);
        let local = enumerate_subgroups_direct(&part, bound)?;
        // embed Sylow coordinates: a p-part factor of order p^v sits inside
        // C_{dᵢ} as the multiples of dᵢ / p^v
        let padded = pad_factors(&part, g.rank());
        let mut next = Vec::with_capacity(partial.len() * local.len());
        for (gens, t) in &partial {
            for rec in &local {
                let mut all = gens.clone();
                for x in &rec.generators {
                    let x = pad_coords(x, g.rank());
                    all.push(
                        x.iter()
                            .zip(&padded)
                            .zip(g.invariant_factors())
                            .map(|((&c, &pv), &d)| c * (d / pv))
                            .collect(),
                    );
                }
                next.push((all, t.product(&rec.subgroup_type)));
            }
        }
        partial = next;
    }
    let mut out: Vec<SubgroupRecord> = partial
        .into_iter()
        .map(|(generators, t)| SubgroupRecord {
            ambient: g.clone(),
            generators,
            order: t.order(),
            subgroup_type: t,
        })
        .collect();
    out.sort_by(|a, b| {
        (a.order, &a.subgroup_type, &a.generators).cmp(&(b.order, &b.subgroup_type, &b.generators))
    });
    Ok(out)
}

fn pad_factors(part: &AbelianType, rank: usize) -> Vec<u64> {
    let mut f = vec![1u64; rank - part.rank()];
    f.extend_from_slice(part.invariant_factors());
    f
}

fn pad_coords(x: &[u64], rank: usize) -> Vec<u64> {
    let mut c = vec![0u64; rank - x.len()];
    c.extend_from_slice(x);
    c
}

/// Number of subgroups of each type, memoized per Sylow type.
#[derive(Debug)]
pub struct SubgroupCensus {
    bound: u64,
    primary: Mutex<HashMap<AbelianType, Arc<BTreeMap<AbelianType, u64>>>>,
}

impl Default for SubgroupCensus {
    fn default() -> Self {
        Self::new(DEFAULT_CENSUS_BOUND)
    }
}

impl SubgroupCensus {
    pub fn new(bound: u64) -> Self {
        Self {
            bound,
            primary: Mutex::new(HashMap::new()),
        }
    }

    fn primary_counts(
        &self,
        part: &AbelianType,
    ) -> Result<Arc<BTreeMap<AbelianType, u64>>, SubgroupError> {
        if let Some(c) = self.primary.lock().expect("census poisoned").get(part) {
            return Ok(Arc::clone(c));
        }
        let mut counts = BTreeMap::new();
        for rec in enumerate_subgroups_direct(part, self.bound)? {
            *counts.entry(rec.subgroup_type).or_insert(0) += 1;
        }
        let counts = Arc::new(counts);
        self.primary
            .lock()
            .expect("census poisoned")
            .insert(part.clone(), Arc::clone(&counts));
        Ok(counts)
    }

    pub fn type_counts(
        &self,
        g: &AbelianType,
    ) -> Result<BTreeMap<AbelianType, u64>, SubgroupError> {
        check_bound(g, self.bound)?;
        let mut acc = BTreeMap::from([(AbelianType::trivial(), 1u64)]);
        for p in g.primes() {
            let local = self.primary_counts(&g.primary_part(p))?;
            let mut next = BTreeMap::new();
            for (t, c) in &acc {
                for (u, k) in local.iter() {
                    *next.entry(t.product(u)).or_insert(0) += c * k;
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    pub fn count(&self, g: &AbelianType, t: &AbelianType) -> Result<u64, SubgroupError> {
        Ok(self.type_counts(g)?.get(t).copied().unwrap_or(0))
    }
}

/// Number of subgroups of `g` of type `t`.
pub fn count_by_type(g: &AbelianType, t: &AbelianType) -> Result<u64, SubgroupError> {
    SubgroupCensus::default().count(g, t)
}

fn check_hypotheses(m: u64, n: u64, d: u64, e: u64) -> Result<(), SubgroupError> {
    let err = |reason| SubgroupError::Hypothesis { m, n, d, e, reason };
    if m == 0 || n == 0 || d == 0 || e == 0 {
        return Err(err("positivity"));
    }
    if m % (d * d) != 0 {
        return Err(err("d² | m"));
    }
    if (m * n) % (e * e) != 0 {
        return Err(err("e² | mn"));
    }
    Ok(())
}

/// c at a single prime ℓ in exponent form: the number of subgroups of type
/// C_{ℓ^d} × C_{ℓ^{m−d}} in C_{ℓ^e} × C_{ℓ^{m+n−e}}, as
/// Σ φ(ℓ^{a+b−m}) over 0 ≤ a ≤ e, 0 ≤ b ≤ m+n−e, a+b ≥ m, max(a,b) = m−d.
pub fn c_prime_power(l: u64, m: u32, n: u32, d: u32, e: u32) -> u64 {
    prime_power_terms(m, n, d, e)
        .map(|k| phi_prime_power(l, k))
        .sum()
}

fn prime_power_terms(m: u32, n: u32, d: u32, e: u32) -> impl Iterator<Item = u32> {
    let top = m as i64 - d as i64;
    let bmax = (m + n) as i64 - e as i64;
    (0..=e as i64).flat_map(move |a| {
        (0..=bmax.max(-1))
            .filter(move |&b| a + b >= m as i64 && a.max(b) == top)
            .map(move |b| (a + b - m as i64) as u32)
    })
}

fn phi_prime_power(l: u64, k: u32) -> u64 {
    if k == 0 {
        1
    } else {
        l.pow(k) - l.pow(k - 1)
    }
}

/// c_{m,n}(d,e), multiplied out over the primes of mn.
pub fn c_formula(m: u64, n: u64, d: u64, e: u64) -> Result<u64, SubgroupError> {
    check_hypotheses(m, n, d, e)?;
    let mut acc = 1u64;
    for &(l, _) in arith::factorize(m * n)?.factors() {
        acc *= c_prime_power(
            l,
            valuation(m, l),
            valuation(n, l),
            valuation(d, l),
            valuation(e, l),
        );
    }
    Ok(acc)
}

/// The three-case closed form 0, ℓ^{e−d} or ψ(ℓ^{m−2d}), applied at each
/// prime and multiplied out.
///
/// The cases must be decided prime by prime: with global divisibility the
/// middle case can misfire, e.g. (m, n, d, e) = (3, 4, 1, 2) satisfies
/// d | e | dn and m ∤ de, yet C₂ × C₆ has one subgroup of order 3, not e/d = 2.
pub fn c_closed_form(m: u64, n: u64, d: u64, e: u64) -> Result<u64, SubgroupError> {
    check_hypotheses(m, n, d, e)?;
    let mut acc = 1u64;
    for &(l, _) in arith::factorize(m * n)?.factors() {
        let (m, n, d, e) = (
            valuation(m, l),
            valuation(n, l),
            valuation(d, l),
            valuation(e, l),
        );
        acc *= if d > e || (m > d + e && e > d + n) {
            0
        } else if m > d + e {
            l.pow(e - d)
        } else if m == 2 * d {
            1
        } else {
            l.pow(m - 2 * d) + l.pow(m - 2 * d - 1)
        };
    }
    Ok(acc)
}

/// Parts 2 and 3 read with global divisibility conditions; see
/// [`c_closed_form`] for why this is only correct at prime powers.
pub fn c_closed_form_global(m: u64, n: u64, d: u64, e: u64) -> Result<u64, SubgroupError> {
    check_hypotheses(m, n, d, e)?;
    if !fibre_product_index(m, n, d, e) {
        return Ok(0);
    }
    if (d * e) % m != 0 {
        return Ok(e / d);
    }
    Ok(arith::dedekind_psi(&arith::factorize(m / (d * d))?))
}

/// The index set d | e and (m | de or e | dn).
pub fn fibre_product_index(m: u64, n: u64, d: u64, e: u64) -> bool {
    e % d == 0 && ((d * e) % m == 0 || (d * n) % e == 0)
}

/// A polynomial in ℓ with integer coefficients, keyed by exponent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EllPolynomial(BTreeMap<u32, i64>);

impl EllPolynomial {
    fn add_monomial(&mut self, k: u32, c: i64) {
        let slot = self.0.entry(k).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.0.remove(&k);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, l: u64) -> i128 {
        self.0
            .iter()
            .map(|(&k, &c)| c as i128 * (l as i128).pow(k))
            .sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, i64)> + '_ {
        self.0.iter().rev().map(|(&k, &c)| (k, c))
    }
}

impl fmt::Display for EllPolynomial {
    /// Exponents joined by `+`, largest first: ℓ⁸+ℓ⁷ is `8+7`, 1 is `0`, and
    /// the zero polynomial is empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.terms() {
            let sep = if first { "" } else { "+" };
            match c {
                1 => write!(f, "{sep}{k}")?,
                -1 => write!(f, "-{k}")?,
                c if c < 0 => write!(f, "{c}*{k}")?,
                c => write!(f, "{sep}{c}*{k}")?,
            }
            first = false;
        }
        Ok(())
    }
}

/// c^ℓ(d,e) as a polynomial in ℓ, from the same sum as [`c_prime_power`]
/// with φ(ℓ^k) = ℓ^k − ℓ^{k−1}.
pub fn c_ell_polynomial(m: u32, n: u32, d: u32, e: u32) -> EllPolynomial {
    let mut p = EllPolynomial::default();
    for k in prime_power_terms(m, n, d, e) {
        p.add_monomial(k, 1);
        if k > 0 {
            p.add_monomial(k - 1, -1);
        }
    }
    p
}

/// The table of c^ℓ(d,e) for 0 ≤ 2d ≤ m, 0 ≤ 2e ≤ m+n; rows run from the
/// largest e down to 0 and columns over d from 0.
pub fn c_ell_table(m: u32, n: u32) -> Vec<Vec<EllPolynomial>> {
    (0..=(m + n) / 2)
        .rev()
        .map(|e| (0..=m / 2).map(|d| c_ell_polynomial(m, n, d, e)).collect())
        .collect()
}

/// [`c_ell_table`] rendered one row per line, cells separated by `|`.
pub fn format_c_ell_table(m: u32, n: u32) -> Vec<String> {
    c_ell_table(m, n)
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join("|")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonomialMismatch {
    pub exponent: u64,
    pub lhs: u64,
    pub rhs: u64,
}

/// Both sides of Σ_{d²|m, e²|mn} c(d,e)Xᵉ = Σ_{b|gcd(m,n), a²|mn/b²} b·X^{ab}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolynomialIdentityReport {
    pub m: u64,
    pub n: u64,
    /// (exponent, coefficient) pairs, ascending.
    pub lhs: Vec<(u64, u64)>,
    pub rhs: Vec<(u64, u64)>,
    pub mismatches: Vec<MonomialMismatch>,
}

impl PolynomialIdentityReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn divisors_of(n: u64) -> Vec<u64> {
    arith::divisors(&arith::factorize(n).expect("positive and within the factorizer's range"))
}

pub fn c_polynomial_identity(m: u64, n: u64) -> Result<PolynomialIdentityReport, SubgroupError> {
    if m == 0 || n == 0 {
        return Err(SubgroupError::Hypothesis {
            m,
            n,
            d: 1,
            e: 1,
            reason: "positivity",
        });
    }
    let mn = m * n;
    let mut lhs: BTreeMap<u64, u64> = BTreeMap::new();
    for d in divisors_of(m).into_iter().filter(|d| m % (d * d) == 0) {
        for e in divisors_of(mn).into_iter().filter(|e| mn % (e * e) == 0) {
            let c = c_formula(m, n, d, e)?;
            if c > 0 {
                *lhs.entry(e).or_insert(0) += c;
            }
        }
    }
    let mut rhs: BTreeMap<u64, u64> = BTreeMap::new();
    for b in divisors_of(num_integer::gcd(m, n)) {
        let rest = mn / (b * b);
        for a in divisors_of(rest)
            .into_iter()
            .filter(|a| rest % (a * a) == 0)
        {
            *rhs.entry(a * b).or_insert(0) += b;
        }
    }
    let exponents: std::collections::BTreeSet<u64> =
        lhs.keys().chain(rhs.keys()).copied().collect();
    let mismatches = exponents
        .into_iter()
        .filter_map(|x| {
            let (l, r) = (
                lhs.get(&x).copied().unwrap_or(0),
                rhs.get(&x).copied().unwrap_or(0),
            );
            (l != r).then_some(MonomialMismatch {
                exponent: x,
                lhs: l,
                rhs: r,
            })
        })
        .collect();
    Ok(PolynomialIdentityReport {
        m,
        n,
        lhs: lhs.into_iter().collect(),
        rhs: rhs.into_iter().collect(),
        mismatches,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexMismatch {
    pub d: u64,
    pub e: u64,
    pub census: u64,
    pub formula: u64,
    pub in_index_set: bool,
}

/// Census checks inside C_n × C_n and the ambients C_e × C_{n²/e}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusIdentityReport {
    pub n: u64,
    pub subgroups_of_order_n: u64,
    pub sigma: u64,
    pub cyclic_of_order_n: u64,
    pub psi: u64,
    pub pairs_checked: usize,
    /// (d, e) where census, c_formula and the index set disagree about
    /// c_{n,n}(d,e) or its vanishing.
    pub index_mismatches: Vec<IndexMismatch>,
}

impl CensusIdentityReport {
    pub fn passed(&self) -> bool {
        self.subgroups_of_order_n == self.sigma
            && self.cyclic_of_order_n == self.psi
            && self.index_mismatches.is_empty()
    }
}

pub fn census_identities(n: u64) -> Result<CensusIdentityReport, SubgroupError> {
    census_identities_with(&SubgroupCensus::default(), n)
}

pub fn census_identities_with(
    census: &SubgroupCensus,
    n: u64,
) -> Result<CensusIdentityReport, SubgroupError> {
    if n == 0 {
        return Err(SubgroupError::ZeroFactor);
    }
    let square = AbelianType::rank_two(n, n)?;
    let counts = census.type_counts(&square)?;
    let subgroups_of_order_n = counts
        .iter()
        .filter(|(t, _)| t.order() == n)
        .map(|(_, c)| c)
        .sum();
    let cyclic_of_order_n = counts.get(&AbelianType::cyclic(n)?).copied().unwrap_or(0);
    let f = arith::factorize(n)?;
    let mut index_mismatches = Vec::new();
    let mut pairs_checked = 0;
    for d in divisors_of(n).into_iter().filter(|d| n % (d * d) == 0) {
        let t = AbelianType::rank_two(d, n / d)?;
        for e in divisors_of(n) {
            let ambient = AbelianType::rank_two(e, n * n / e)?;
            let c = census.count(&ambient, &t)?;
            let formula = c_formula(n, n, d, e)?;
            let in_index_set = fibre_product_index(n, n, d, e);
            pairs_checked += 1;
            if c != formula || (c > 0) != in_index_set {
                index_mismatches.push(IndexMismatch {
                    d,
                    e,
                    census: c,
                    formula,
                    in_index_set,
                });
            }
        }
    }
    Ok(CensusIdentityReport {
        n,
        subgroups_of_order_n,
        sigma: arith::sigma(&f),
        cyclic_of_order_n,
        psi: arith::dedekind_psi(&f),
        pairs_checked,
        index_mismatches,
    })
}
