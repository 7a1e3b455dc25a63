//! Level-one modular forms as q-expansions: the Eisenstein series c₄ and c₆,
//! the discriminant Δ, Ramanujan's τ, and the basis
//! 𝔟₁₂d = {c₄^{3(d−i)}Δ^i : 0 ≤ i ≤ d} of weight-12d forms.
//!
//! Throughout, basis index `i` is the exponent of Δ. The form with index `i`
//! has q-expansion q^i + O(q^{i+1}), so decomposition against 𝔟₁₂d is a
//! unitriangular forward substitution and works over every coefficient ring.

use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Pow};
use thiserror::Error;

use crate::arith;
use crate::qseries::{CoeffRing, QSeries, QSeriesError, RingElem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModFormError {
    #[error("weight {0} is odd")]
    OddWeight(u32),
    #[error("expected weight {expected}, found {found}")]
    WeightMismatch { expected: u32, found: u32 },
    #[error("precision {have} is too small, need at least {need}")]
    InsufficientPrecision { have: usize, need: usize },
    #[error("decomposition has {have} coefficients, expected {expected}")]
    LengthMismatch { have: usize, expected: usize },
    #[error(transparent)]
    Series(#[from] QSeriesError),
}

/// A q-expansion tagged with its (even) weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularForm {
    weight: u32,
    series: QSeries,
}

impl ModularForm {
    pub fn new(weight: u32, series: QSeries) -> Result<Self, ModFormError> {
        if weight % 2 == 1 {
            return Err(ModFormError::OddWeight(weight));
        }
        Ok(Self { weight, series })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn series(&self) -> &QSeries {
        &self.series
    }

    pub fn into_series(self) -> QSeries {
        self.series
    }

    pub fn precision(&self) -> usize {
        self.series.precision()
    }

    pub fn ring(&self) -> CoeffRing {
        self.series.ring()
    }

    pub fn coeff(&self, i: usize) -> Option<RingElem> {
        self.series.coeff(i)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ModFormError> {
        Ok(Self {
            weight: self.weight + other.weight,
            series: self.series.mul(&other.series)?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, ModFormError> {
        self.same_weight(other)?;
        Ok(Self {
            weight: self.weight,
            series: self.series.add(&other.series)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ModFormError> {
        self.same_weight(other)?;
        Ok(Self {
            weight: self.weight,
            series: self.series.sub(&other.series)?,
        })
    }

    pub fn pow(&self, k: u32) -> Result<Self, ModFormError> {
        Ok(Self {
            weight: self.weight * k,
            series: self.series.pow(k as u64)?,
        })
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self {
            weight: self.weight,
            series: self.series.scale(k),
        }
    }

    pub fn truncate(&self, precision: usize) -> Result<Self, ModFormError> {
        Ok(Self {
            weight: self.weight,
            series: self.series.truncate(precision)?,
        })
    }

    pub fn reduce_mod(&self, m: u64) -> Result<Self, ModFormError> {
        Ok(Self {
            weight: self.weight,
            series: self.series.reduce_mod(m)?,
        })
    }

    pub fn into_ring(self, ring: CoeffRing) -> Result<Self, ModFormError> {
        Ok(Self {
            weight: self.weight,
            series: self.series.into_ring(ring)?,
        })
    }

    fn same_weight(&self, other: &Self) -> Result<(), ModFormError> {
        if self.weight != other.weight {
            return Err(ModFormError::WeightMismatch {
                expected: self.weight,
                found: other.weight,
            });
        }
        Ok(())
    }
}

fn check_precision(n: usize) -> Result<(), ModFormError> {
    if n == 0 {
        return Err(QSeriesError::ZeroPrecision.into());
    }
    Ok(())
}

/// 1 + c·Σ_{n≥1} σ_k(n) qⁿ.
fn eisenstein(
    n: usize,
    k: u32,
    c: i64,
    weight: u32,
    ring: CoeffRing,
) -> Result<ModularForm, ModFormError> {
    check_precision(n)?;
    let mut coeffs = Vec::with_capacity(n);
    coeffs.push(BigInt::one());
    for m in 1..n {
        let f = arith::factorize(m as u64).expect("index is positive and small");
        coeffs.push(BigInt::from(arith::sigma_k(&f, k)) * c);
    }
    ModularForm::new(weight, QSeries::from_ints(coeffs)?.into_ring(ring)?)
}

pub fn c4(n: usize) -> Result<ModularForm, ModFormError> {
    c4_in(n, CoeffRing::BigInt)
}

pub fn c4_in(n: usize, ring: CoeffRing) -> Result<ModularForm, ModFormError> {
    eisenstein(n, 3, 240, 4, ring)
}

pub fn c6(n: usize) -> Result<ModularForm, ModFormError> {
    c6_in(n, CoeffRing::BigInt)
}

pub fn c6_in(n: usize, ring: CoeffRing) -> Result<ModularForm, ModFormError> {
    eisenstein(n, 5, -504, 6, ring)
}

/// ∏_{n≥1}(1 − qⁿ) to precision `n`, expanded by the pentagonal number theorem.
pub fn euler_product(n: usize, ring: CoeffRing) -> Result<QSeries, ModFormError> {
    check_precision(n)?;
    let mut c = vec![0i64; n];
    c[0] = 1;
    for k in 1i64.. {
        let first = (k * (3 * k - 1) / 2) as usize;
        if first >= n {
            break;
        }
        let sign = if k % 2 == 0 { 1 } else { -1 };
        c[first] += sign;
        let second = (k * (3 * k + 1) / 2) as usize;
        if second < n {
            c[second] += sign;
        }
    }
    Ok(QSeries::from_i64s(ring, &c, n)?)
}

/// The discriminant Δ = q·∏(1 − qⁿ)²⁴ over the integers.
pub fn delta(n: usize) -> Result<ModularForm, ModFormError> {
    delta_in(n, CoeffRing::BigInt)
}

/// Δ in any coefficient ring, computed as q·(E³)⁸ with E = ∏(1 − qⁿ).
///
/// E and E³ have O(√n) nonzero terms, so each of the seven products against
/// E³ costs O(n√n) rather than a dense O(n²) squaring.
pub fn delta_in(n: usize, ring: CoeffRing) -> Result<ModularForm, ModFormError> {
    check_precision(n)?;
    if n == 1 {
        return ModularForm::new(12, QSeries::zero(ring, 1)?);
    }
    let e = euler_product(n - 1, ring)?;
    let e3 = e.mul(&e)?.mul(&e)?;
    let mut acc = e3.clone();
    for _ in 0..7 {
        acc = acc.mul(&e3)?;
    }
    ModularForm::new(12, acc.shift(1))
}

fn tau_cache() -> &'static RwLock<Arc<Vec<BigInt>>> {
    static CACHE: OnceLock<RwLock<Arc<Vec<BigInt>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(Arc::new(Vec::new())))
}

/// Coefficients of Δ up to and including q^nmax, index = exponent.
///
/// Backed by a process-wide table that grows by doubling; readers only ever
/// see completed tables.
pub fn tau_table(nmax: usize) -> Arc<Vec<BigInt>> {
    {
        let table = tau_cache().read().expect("tau cache poisoned");
        if table.len() > nmax {
            return Arc::clone(&table);
        }
    }
    let mut table = tau_cache().write().expect("tau cache poisoned");
    if table.len() <= nmax {
        let target = (nmax + 1).max(2 * table.len()).max(512);
        let d = delta(target).expect("positive precision");
        *table = Arc::new(d.series.int_coeffs().expect("integer ring").to_vec());
    }
    Arc::clone(&table)
}

/// Ramanujan's τ(n), the qⁿ coefficient of Δ.
pub fn tau(n: u64) -> BigInt {
    let n = n as usize;
    tau_table(n)[n].clone()
}

/// Incrementally computed powers Δ, Δ², … in a fixed ring and precision.
///
/// Δ^{i+1} is formed as Δ^i·Δ. Powers are appended under a write lock and
/// handed out as shared snapshots, so concurrent readers never observe a
/// partially written coefficient array.
#[derive(Debug)]
pub struct DeltaPowers {
    ring: CoeffRing,
    precision: usize,
    delta: Arc<QSeries>,
    powers: RwLock<Vec<Arc<QSeries>>>,
}

impl DeltaPowers {
    pub fn new(precision: usize, ring: CoeffRing) -> Result<Self, ModFormError> {
        let delta = Arc::new(delta_in(precision, ring)?.into_series());
        let one = Arc::new(QSeries::one(ring, precision)?);
        Ok(Self {
            ring,
            precision,
            delta: Arc::clone(&delta),
            powers: RwLock::new(vec![one, delta]),
        })
    }

    pub fn ring(&self) -> CoeffRing {
        self.ring
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    /// Number of powers computed so far (Δ⁰ included).
    pub fn computed(&self) -> usize {
        self.powers.read().expect("delta powers poisoned").len()
    }

    /// Δ^i (Δ⁰ = 1).
    pub fn get(&self, i: usize) -> Arc<QSeries> {
        if let Some(p) = self.powers.read().expect("delta powers poisoned").get(i) {
            return Arc::clone(p);
        }
        let mut powers = self.powers.write().expect("delta powers poisoned");
        while powers.len() <= i {
            let next = powers
                .last()
                .expect("nonempty")
                .mul(&self.delta)
                .expect("same ring");
            powers.push(Arc::new(next));
        }
        Arc::clone(&powers[i])
    }
}

/// Δ^i as a modular form of weight 12i.
pub fn delta_power(i: u32, n: usize, ring: CoeffRing) -> Result<ModularForm, ModFormError> {
    let powers = DeltaPowers::new(n, ring)?;
    ModularForm::new(12 * i, powers.get(i as usize).as_ref().clone())
}

/// The basis 𝔟₁₂d, indexed by the exponent of Δ: entry i is c₄^{3(d−i)}Δ^i.
pub fn basis_b(d: u32, n: usize, ring: CoeffRing) -> Result<Vec<ModularForm>, ModFormError> {
    let need = d as usize + 1;
    if n < need {
        return Err(ModFormError::InsufficientPrecision { have: n, need });
    }
    let c4_cubed = c4_in(n, ring)?.pow(3)?;
    let delta = delta_in(n, ring)?;
    let mut c_pows = vec![ModularForm::new(0, QSeries::one(ring, n)?)?];
    let mut d_pows = vec![ModularForm::new(0, QSeries::one(ring, n)?)?];
    for _ in 0..d {
        c_pows.push(c_pows.last().expect("nonempty").mul(&c4_cubed)?);
        d_pows.push(d_pows.last().expect("nonempty").mul(&delta)?);
    }
    (0..=d as usize)
        .map(|i| c_pows[d as usize - i].mul(&d_pows[i]))
        .collect()
}

/// Coordinates of a weight-12d form in 𝔟₁₂d; `coefficients[i]` multiplies
/// c₄^{3(d−i)}Δ^i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisDecomposition {
    pub d: u32,
    pub coefficients: Vec<RingElem>,
}

impl BasisDecomposition {
    /// Coefficient of Δ^d.
    pub fn delta_power_coefficient(&self) -> &RingElem {
        &self.coefficients[self.d as usize]
    }
}

/// Decomposes `f` against a precomputed basis (as returned by [`basis_b`]).
pub fn decompose_with(
    f: &ModularForm,
    basis: &[ModularForm],
) -> Result<BasisDecomposition, ModFormError> {
    let d = basis.len() as u32 - 1;
    if f.weight != 12 * d {
        return Err(ModFormError::WeightMismatch {
            expected: 12 * d,
            found: f.weight,
        });
    }
    let need = d as usize + 1;
    if f.precision() < need {
        return Err(ModFormError::InsufficientPrecision {
            have: f.precision(),
            need,
        });
    }
    let mut rest = f.series.truncate(need)?;
    let mut coefficients = Vec::with_capacity(need);
    for (i, b) in basis.iter().enumerate() {
        let c = rest.coeff(i).expect("within precision");
        if !c.is_zero() {
            rest = rest.sub(&b.series.truncate(need)?.scale_by(&c)?)?;
        }
        coefficients.push(c);
    }
    Ok(BasisDecomposition { d, coefficients })
}

pub fn decompose(f: &ModularForm, d: u32) -> Result<BasisDecomposition, ModFormError> {
    if f.weight != 12 * d {
        return Err(ModFormError::WeightMismatch {
            expected: 12 * d,
            found: f.weight,
        });
    }
    if f.precision() < d as usize + 1 {
        return Err(ModFormError::InsufficientPrecision {
            have: f.precision(),
            need: d as usize + 1,
        });
    }
    let basis = basis_b(d, d as usize + 1, f.ring())?;
    decompose_with(f, &basis)
}

/// Σ coefficients[i]·c₄^{3(d−i)}Δ^i at precision `n`.
pub fn reassemble(
    decomposition: &BasisDecomposition,
    n: usize,
    ring: CoeffRing,
) -> Result<ModularForm, ModFormError> {
    let d = decomposition.d;
    if decomposition.coefficients.len() != d as usize + 1 {
        return Err(ModFormError::LengthMismatch {
            have: decomposition.coefficients.len(),
            expected: d as usize + 1,
        });
    }
    let basis = basis_b(d, n, ring)?;
    let mut acc = QSeries::zero(ring, n)?;
    for (c, b) in decomposition.coefficients.iter().zip(&basis) {
        acc = acc.add(&b.series.scale_by(c)?)?;
    }
    ModularForm::new(12 * d, acc)
}

/// Classical shadow of the stable Adams operation ψ^k: a form of weight w is
/// multiplied by k^w. The exponent is the power of ω the form is a section
/// of, which for level-one forms is the classical weight (Δ ↦ k¹²Δ).
pub fn adams_scale(f: &ModularForm, k: i64) -> ModularForm {
    let factor: BigInt = Pow::pow(BigInt::from(k), f.weight);
    f.scale(&factor)
}

/// Whether every coefficient of q^0 is zero, i.e. `f` is a cusp form to the
/// precision available.
pub fn is_cuspidal(f: &ModularForm) -> bool {
    f.coeff(0).is_some_and(|c| c.is_zero())
}

/// Integer coefficient convenience used throughout the tests and reports.
pub fn int_coeff(f: &ModularForm, i: usize) -> Option<BigInt> {
    match f.coeff(i)? {
        RingElem::Int(v) => Some(v),
        RingElem::Mod { value, .. } => Some(BigInt::from(value)),
        RingElem::Rat(v) => v.is_integer().then(|| v.to_integer()),
    }
}

/// Zero-padded integer vector, handy for building decompositions.
pub fn int_elems(ring: CoeffRing, values: &[i64]) -> Vec<RingElem> {
    values
        .iter()
        .map(|&v| RingElem::from_int(ring, &BigInt::from(v)))
        .collect()
}
