//! Classical Hecke operators T_n on level-one q-expansions.
//!
//! The single coefficient rule
//!
//! ```text
//! a_m(T_n f) = Σ_{e | gcd(m, n)} e^{k−1} a_{mn/e²}(f),    gcd(0, n) = n,
//! ```
//!
//! covers the constant term (σ_{k−1}(n)·a₀) and weight zero, where e^{−1}
//! forces rational coefficients and T_n(1) = σ(n)/n.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith;
use crate::modforms::{self, ModFormError, ModularForm};
use crate::qseries::{pow_mod, CoeffRing, Coefficients, QSeries, QSeriesError, RingElem};

/// Default ceiling on the number of q-expansion coefficients computed for a
/// single b-coefficient request.
pub const DEFAULT_COEFFICIENT_BUDGET: u64 = 4_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeckeError {
    #[error("Hecke index must be positive")]
    ZeroIndex,
    #[error("weight 0 Hecke operators need rational coefficients, got {0}")]
    RationalRequired(CoeffRing),
    #[error("input precision {have} is too small, need at least {need}")]
    InsufficientPrecision { have: usize, need: usize },
    #[error("weight {0} is not a positive multiple of 12")]
    InvalidWeight(u32),
    #[error("the zero form has no eigenvalue")]
    ZeroForm,
    #[error("form is not an eigenform: coefficient {index} is not proportional")]
    NotEigenform { index: usize },
    #[error("{required} coefficients exceed the budget of {budget}")]
    ResourceLimit { required: u64, budget: u64 },
    #[error(transparent)]
    Arith(#[from] arith::ArithError),
    #[error(transparent)]
    ModForm(#[from] ModFormError),
    #[error(transparent)]
    Series(#[from] QSeriesError),
}

/// Operator index together with the weight it acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HeckeParams {
    n: u64,
    weight: u32,
}

impl HeckeParams {
    pub fn new(n: u64, weight: u32, ring: CoeffRing) -> Result<Self, HeckeError> {
        if n == 0 {
            return Err(HeckeError::ZeroIndex);
        }
        if weight % 2 == 1 {
            return Err(ModFormError::OddWeight(weight).into());
        }
        if weight == 0 && ring != CoeffRing::BigRational {
            return Err(HeckeError::RationalRequired(ring));
        }
        Ok(Self { n, weight })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// Input precision needed for `output` coefficients of T_n f: the top
    /// coefficient reads a_{(output−1)·n}.
    pub fn required_precision(&self, output: usize) -> usize {
        required_precision(self.n, output)
    }
}

fn required_precision(n: u64, output: usize) -> usize {
    if output == 0 {
        0
    } else {
        (output - 1) * n as usize + 1
    }
}

fn apply_rule<T, F>(n: u64, out: usize, divisors: &[u64], weights: &[T], read: F) -> Vec<T>
where
    T: Clone + Send + Sync + Zero,
    F: Fn(&T, usize, &mut T) + Sync,
{
    let coeff = |m: usize| {
        let mut acc = T::zero();
        for (e, w) in divisors.iter().zip(weights) {
            let e = *e as usize;
            if m % e == 0 {
                read(w, m * n as usize / (e * e), &mut acc);
            }
        }
        acc
    };
    if out >= 256 {
        (0..out).into_par_iter().map(coeff).collect()
    } else {
        (0..out).map(coeff).collect()
    }
}

/// T_n f to `precision` coefficients.
pub fn hecke_apply(f: &ModularForm, n: u64, precision: usize) -> Result<ModularForm, HeckeError> {
    let params = HeckeParams::new(n, f.weight(), f.ring())?;
    if precision == 0 {
        return Err(QSeriesError::ZeroPrecision.into());
    }
    let need = params.required_precision(precision);
    if f.precision() < need {
        return Err(HeckeError::InsufficientPrecision {
            have: f.precision(),
            need,
        });
    }
    let divisors = arith::divisors(&arith::factorize(n)?);
    let k1 = f.weight().saturating_sub(1);
    let series = match f.series().coefficients() {
        Coefficients::Int(v) => {
            let weights: Vec<BigInt> = divisors
                .iter()
                .map(|&e| Pow::pow(BigInt::from(e), k1))
                .collect();
            QSeries::from_ints(apply_rule(
                n,
                precision,
                &divisors,
                &weights,
                |w, i, acc| *acc += w * &v[i],
            ))?
        }
        Coefficients::Rat(v) => {
            let weights: Vec<BigRational> = divisors
                .iter()
                .map(|&e| {
                    let e = BigInt::from(e);
                    if f.weight() == 0 {
                        BigRational::new(BigInt::one(), e)
                    } else {
                        BigRational::from_integer(Pow::pow(e, k1))
                    }
                })
                .collect();
            QSeries::from_rationals(apply_rule(
                n,
                precision,
                &divisors,
                &weights,
                |w, i, acc| *acc += w * &v[i],
            ))?
        }
        Coefficients::Mod { modulus, values } => {
            let m = *modulus;
            let weights: Vec<ModAcc> = divisors
                .iter()
                .map(|&e| ModAcc(pow_mod(e % m, k1 as u64, m) as u128))
                .collect();
            let raw = apply_rule(n, precision, &divisors, &weights, |w, i, acc| {
                acc.0 = (acc.0 + w.0 * values[i] as u128) % m as u128;
            });
            QSeries::from_residues(m, raw.into_iter().map(|r| r.0 as u64).collect())?
        }
    };
    Ok(ModularForm::new(f.weight(), series)?)
}

/// u128 accumulator for residues; only `Zero` is needed by the kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ModAcc(u128);

impl Zero for ModAcc {
    fn zero() -> Self {
        ModAcc(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl std::ops::Add for ModAcc {
    type Output = Self;
    fn add(self, other: Self) -> Self {
        ModAcc(self.0 + other.0)
    }
}

/// A coefficient where the two sides of a checked identity disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoefficientMismatch {
    pub basis_index: usize,
    pub coefficient: usize,
    pub lhs: String,
    pub rhs: String,
}

/// Outcome of checking T_m∘T_n = Σ_{d | gcd(m,n)} d^{k−1} T_{mn/d²}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompositionReport {
    pub m: u64,
    pub n: u64,
    pub weight: u32,
    pub precision: usize,
    pub forms_checked: usize,
    pub mismatches: Vec<CoefficientMismatch>,
}

impl CompositionReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Input precision needed by [`composition_check_with`].
pub fn composition_required_precision(m: u64, n: u64, precision: usize) -> usize {
    required_precision(m * n, precision)
}

/// Checks the composition identity on every form of 𝔟_k.
pub fn composition_check(
    m: u64,
    n: u64,
    k: u32,
    precision: usize,
) -> Result<CompositionReport, HeckeError> {
    if k < 12 || k % 12 != 0 {
        return Err(HeckeError::InvalidWeight(k));
    }
    let basis = modforms::basis_b(
        k / 12,
        composition_required_precision(m, n, precision),
        CoeffRing::BigInt,
    )?;
    composition_check_with(&basis, m, n, precision)
}

/// Checks the composition identity on each of `forms`, which must share a
/// weight and carry enough precision.
pub fn composition_check_with(
    forms: &[ModularForm],
    m: u64,
    n: u64,
    precision: usize,
) -> Result<CompositionReport, HeckeError> {
    let weight = forms.first().map_or(0, |f| f.weight());
    let g = num_integer::gcd(m, n);
    let mut mismatches = Vec::new();
    for (idx, f) in forms.iter().enumerate() {
        let inner = hecke_apply(f, n, required_precision(m, precision))?;
        let lhs = hecke_apply(&inner, m, precision)?;
        let mut rhs = ModularForm::new(f.weight(), QSeries::zero(f.ring(), precision)?)?;
        for d in arith::divisors(&arith::factorize(g).expect("gcd is small")) {
            let term = hecke_apply(f, m * n / (d * d), precision)?;
            let scale: BigInt = Pow::pow(BigInt::from(d), f.weight().saturating_sub(1));
            rhs = rhs.add(&term.scale(&scale))?;
        }
        for i in 0..precision {
            let (a, b) = (
                lhs.coeff(i).expect("in range"),
                rhs.coeff(i).expect("in range"),
            );
            if a != b {
                mismatches.push(CoefficientMismatch {
                    basis_index: idx,
                    coefficient: i,
                    lhs: a.to_string(),
                    rhs: b.to_string(),
                });
            }
        }
    }
    Ok(CompositionReport {
        m,
        n,
        weight,
        precision,
        forms_checked: forms.len(),
        mismatches,
    })
}

/// λ with T_n f = λ f, checked on every coefficient the precision allows.
pub fn eigenvalue(f: &ModularForm, n: u64) -> Result<RingElem, HeckeError> {
    if n == 0 {
        return Err(HeckeError::ZeroIndex);
    }
    let lead = f.series().order().ok_or(HeckeError::ZeroForm)?;
    let need = n as usize * (lead + 1);
    if f.precision() < need {
        return Err(HeckeError::InsufficientPrecision {
            have: f.precision(),
            need,
        });
    }
    let out = (f.precision() - 1) / n as usize + 1;
    let g = hecke_apply(f, n, out)?;
    let a = f.coeff(lead).expect("in range");
    let lambda = g
        .coeff(lead)
        .expect("in range")
        .div_exact(&a)
        .map_err(|_| HeckeError::NotEigenform { index: lead })?;
    for i in 0..out {
        let expect = f.coeff(i).expect("in range").mul(&lambda)?;
        if g.coeff(i).expect("in range") != expect {
            return Err(HeckeError::NotEigenform { index: i });
        }
    }
    Ok(lambda)
}

fn ring_for(modulus: u64) -> Result<CoeffRing, HeckeError> {
    if modulus == 0 {
        Ok(CoeffRing::BigInt)
    } else {
        Ok(CoeffRing::modulo(modulus)?)
    }
}

/// b_nᵉ: the Δᵉ coordinate of T_n(Δᵉ) in 𝔟₁₂ₑ, over ℤ (`modulus` 0) or ℤ/M.
pub fn b_coefficient(n: u64, e: u32, modulus: u64) -> Result<RingElem, HeckeError> {
    b_coefficient_with_budget(n, e, modulus, DEFAULT_COEFFICIENT_BUDGET)
}

pub fn b_coefficient_with_budget(
    n: u64,
    e: u32,
    modulus: u64,
    budget: u64,
) -> Result<RingElem, HeckeError> {
    Ok(b_coefficients(e, &[n], modulus, budget)?.remove(0))
}

/// b_nᵉ for several n sharing one computation of Δᵉ and 𝔟₁₂ₑ.
pub fn b_coefficients(
    e: u32,
    ns: &[u64],
    modulus: u64,
    budget: u64,
) -> Result<Vec<RingElem>, HeckeError> {
    if e == 0 {
        return Err(ModFormError::InsufficientPrecision { have: 0, need: 1 }.into());
    }
    if ns.contains(&0) {
        return Err(HeckeError::ZeroIndex);
    }
    let ring = ring_for(modulus)?;
    let nmax = ns.iter().copied().max().unwrap_or(1);
    let required = e as u64 * nmax + 1;
    if required > budget {
        return Err(HeckeError::ResourceLimit { required, budget });
    }
    let power = modforms::delta_in(required as usize, ring)?.pow(e)?;
    let basis = modforms::basis_b(e, e as usize + 1, ring)?;
    ns.par_iter()
        .map(|&n| {
            let g = hecke_apply(&power, n, e as usize + 1)?;
            let dec = modforms::decompose_with(&g, &basis)?;
            Ok(dec.delta_power_coefficient().clone())
        })
        .collect()
}

/// n·x: converts a classical Hecke value to the stable normalization.
pub fn stable_normalize(value: &RingElem, n: u64) -> RingElem {
    value.scale(&BigInt::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modforms::{basis_b, c4, delta, delta_power, tau};
    use proptest::prelude::*;

    fn int(v: i64) -> RingElem {
        RingElem::Int(BigInt::from(v))
    }

    #[test]
    fn identity_and_delta_eigen() {
        let d = delta(40).unwrap();
        assert_eq!(hecke_apply(&d, 1, 40).unwrap(), d);
        let t2 = hecke_apply(&d, 2, 20).unwrap();
        assert_eq!(t2, d.truncate(20).unwrap().scale(&BigInt::from(-24)));
    }

    #[test]
    fn weight_zero_constant() {
        let one = ModularForm::new(0, QSeries::one(CoeffRing::BigRational, 5).unwrap()).unwrap();
        let t2 = hecke_apply(&one, 2, 1).unwrap();
        let half = BigRational::new(BigInt::from(3), BigInt::from(2));
        assert_eq!(t2.coeff(0), Some(RingElem::Rat(half)));
        for n in 1..30u64 {
            let t = hecke_apply(&one, n, 1).unwrap();
            let s = arith::sigma(&arith::factorize(n).unwrap());
            let expect = BigRational::new(BigInt::from(s), BigInt::from(n));
            assert_eq!(t.coeff(0), Some(RingElem::Rat(expect.clone())));
            assert_eq!(
                stable_normalize(&t.coeff(0).unwrap(), n),
                RingElem::Rat(BigRational::from_integer(BigInt::from(s)))
            );
        }
        let zint = ModularForm::new(0, QSeries::one(CoeffRing::BigInt, 5).unwrap()).unwrap();
        assert_eq!(
            hecke_apply(&zint, 2, 1).unwrap_err(),
            HeckeError::RationalRequired(CoeffRing::BigInt)
        );
    }

    #[test]
    fn constant_term_is_divisor_power_sum() {
        let e4 = c4(40).unwrap();
        let t = hecke_apply(&e4, 6, 5).unwrap();
        assert_eq!(t.coeff(0), Some(int(1 + 8 + 27 + 216)));
    }

    #[test]
    fn precision_contract() {
        let d = delta(10).unwrap();
        assert_eq!(
            hecke_apply(&d, 2, 6).unwrap_err(),
            HeckeError::InsufficientPrecision { have: 10, need: 11 }
        );
        assert!(hecke_apply(&d, 2, 5).is_ok());
        assert_eq!(hecke_apply(&d, 0, 5).unwrap_err(), HeckeError::ZeroIndex);
        assert_eq!(
            hecke_apply(&d, 3, 0).unwrap_err(),
            HeckeError::Series(QSeriesError::ZeroPrecision)
        );
        assert_eq!(hecke_apply(&d, 3, 4).unwrap().precision(), 4);
    }

    #[test]
    fn composition_examples() {
        let r = composition_check(2, 2, 12, 10).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.forms_checked, 2);
        assert_eq!(tau(2) * tau(2), tau(4) + BigInt::from(2048));
        assert!(composition_check(2, 3, 12, 10).unwrap().passed());
        assert_eq!(tau(6), tau(2) * tau(3));
        for n in 1..=6 {
            assert!(composition_check(1, n, 24, 8).unwrap().passed());
        }
        assert_eq!(
            composition_check(2, 2, 18, 5).unwrap_err(),
            HeckeError::InvalidWeight(18)
        );
    }

    #[test]
    fn composition_detects_wrong_exponent() {
        // T_2∘T_2 on c₄³ (weight 12) checked against weight-24 exponents must fail.
        let f = basis_b(1, 200, CoeffRing::BigInt).unwrap()[0].clone();
        let lhs = hecke_apply(&hecke_apply(&f, 2, 40).unwrap(), 2, 20).unwrap();
        let wrong = hecke_apply(&f, 4, 20)
            .unwrap()
            .add(&f.truncate(20).unwrap().scale(&BigInt::from(2).pow(23u32)))
            .unwrap();
        assert_ne!(lhs, wrong);
    }

    #[test]
    fn composition_small_range() {
        for k in [12, 24] {
            let basis = basis_b(
                k / 12,
                composition_required_precision(6, 6, 12),
                CoeffRing::BigInt,
            )
            .unwrap();
            for m in 1..=6 {
                for n in 1..=6 {
                    let r = composition_check_with(&basis, m, n, 12).unwrap();
                    assert!(r.passed(), "m={m} n={n} k={k}: {:?}", r.mismatches.first());
                }
            }
        }
    }

    #[test]
    fn eigenvalue_examples() {
        let d = delta(40).unwrap();
        assert_eq!(eigenvalue(&d, 2).unwrap(), int(-24));
        assert_eq!(eigenvalue(&d, 1).unwrap(), int(1));
        assert_eq!(eigenvalue(&d, 6).unwrap(), int(-6048));
        assert_eq!(eigenvalue(&c4(30).unwrap(), 2).unwrap(), int(9));
    }

    #[test]
    fn eigenvalue_errors() {
        let f = basis_b(1, 30, CoeffRing::BigInt).unwrap()[0]
            .add(&delta(30).unwrap())
            .unwrap();
        assert!(matches!(
            eigenvalue(&f, 2),
            Err(HeckeError::NotEigenform { .. })
        ));
        let zero = ModularForm::new(12, QSeries::zero(CoeffRing::BigInt, 10).unwrap()).unwrap();
        assert_eq!(eigenvalue(&zero, 2).unwrap_err(), HeckeError::ZeroForm);
        assert_eq!(
            eigenvalue(&delta(5).unwrap(), 3).unwrap_err(),
            HeckeError::InsufficientPrecision { have: 5, need: 6 }
        );
    }

    #[test]
    fn b_coefficient_examples() {
        assert_eq!(b_coefficient(2, 1, 0).unwrap(), int(-24));
        assert_eq!(b_coefficient(5, 1, 0).unwrap(), int(4830));
        for e in 1..=6 {
            assert_eq!(b_coefficient(1, e, 0).unwrap(), int(1));
        }
        let ns: Vec<u64> = (1..=40).collect();
        let b = b_coefficients(1, &ns, 0, DEFAULT_COEFFICIENT_BUDGET).unwrap();
        for (n, v) in ns.iter().zip(b) {
            assert_eq!(v, RingElem::Int(tau(*n)));
        }
        assert_eq!(
            b_coefficient_with_budget(100, 10, 0, 500).unwrap_err(),
            HeckeError::ResourceLimit {
                required: 1001,
                budget: 500
            }
        );
    }

    /// Rational Gaussian elimination of T_n(Δᵉ) against the basis, solving
    /// the full square system on coefficients 0..=e instead of relying on
    /// triangularity.
    fn b_by_elimination(n: u64, e: u32) -> BigRational {
        let size = e as usize + 1;
        let basis = basis_b(e, size, CoeffRing::BigInt).unwrap();
        let power = delta_power(e, e as usize * n as usize + 1, CoeffRing::BigInt).unwrap();
        let g = hecke_apply(&power, n, size).unwrap();
        let q = |v: BigInt| BigRational::from_integer(v);
        // rows = coefficient index, columns = basis index, last column = target
        let mut a: Vec<Vec<BigRational>> = (0..size)
            .map(|r| {
                let mut row: Vec<_> = basis
                    .iter()
                    .map(|b| q(b.series().int_coeffs().unwrap()[r].clone()))
                    .collect();
                row.push(q(g.series().int_coeffs().unwrap()[r].clone()));
                row
            })
            .collect();
        for col in 0..size {
            let piv = (col..size).find(|&r| !a[r][col].is_zero()).unwrap();
            a.swap(col, piv);
            let p = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x = &*x / &p;
            }
            for r in 0..size {
                if r != col && !a[r][col].is_zero() {
                    let factor = a[r][col].clone();
                    let pivot_row = a[col].clone();
                    for (x, y) in a[r].iter_mut().zip(pivot_row) {
                        *x -= &factor * y;
                    }
                }
            }
        }
        a[e as usize][size].clone()
    }

    #[test]
    fn b_coefficient_matches_elimination() {
        for e in 1..=4 {
            for n in 1..=7 {
                let b = b_coefficient(n, e, 0).unwrap();
                assert_eq!(
                    b,
                    RingElem::Int(b_by_elimination(n, e).to_integer()),
                    "n={n} e={e}"
                );
                assert!(b_by_elimination(n, e).is_integer());
            }
        }
    }

    #[test]
    fn b_coefficient_mod_matches_reduction() {
        for e in 1..=6 {
            for n in [2u64, 3, 5, 7, 9] {
                let exact = b_coefficient(n, e, 0).unwrap();
                let reduced = b_coefficient(n, e, 24).unwrap();
                let expect = exact.as_int().unwrap().mod_floor_u64(24);
                assert_eq!(reduced.as_residue(), Some(expect));
            }
        }
    }

    trait ModFloor {
        fn mod_floor_u64(&self, m: u64) -> u64;
    }

    impl ModFloor for BigInt {
        fn mod_floor_u64(&self, m: u64) -> u64 {
            use num_integer::Integer;
            u64::try_from(self.mod_floor(&BigInt::from(m))).unwrap()
        }
    }

    #[test]
    fn stable_normalize_examples() {
        assert_eq!(stable_normalize(&RingElem::Int(tau(5)), 5), int(24150));
        assert_eq!(stable_normalize(&int(17), 1), int(17));
    }

    fn small_form(k: u32, coeffs: &[i64]) -> ModularForm {
        let d = k / 12;
        let basis = basis_b(d, 80, CoeffRing::BigInt).unwrap();
        let mut acc = QSeries::zero(CoeffRing::BigInt, 80).unwrap();
        for (c, b) in coeffs.iter().zip(&basis) {
            acc = acc.add(&b.series().scale(&BigInt::from(*c))).unwrap();
        }
        ModularForm::new(k, acc).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn linearity(a in -20i64..20, b in -20i64..20, n in 1u64..8,
                     x in proptest::collection::vec(-9i64..9, 3), y in proptest::collection::vec(-9i64..9, 3)) {
            let f = small_form(24, &x);
            let g = small_form(24, &y);
            let comb = f.scale(&BigInt::from(a)).add(&g.scale(&BigInt::from(b))).unwrap();
            let lhs = hecke_apply(&comb, n, 10).unwrap();
            let rhs = hecke_apply(&f, n, 10).unwrap().scale(&BigInt::from(a))
                .add(&hecke_apply(&g, n, 10).unwrap().scale(&BigInt::from(b))).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn coprime_commutation(m in 1u64..=10, n in 1u64..=10, k in prop_oneof![Just(12u32), Just(24u32)], idx in 0usize..3) {
            prop_assume!(num_integer::gcd(m, n) == 1);
            let basis = basis_b(k / 12, composition_required_precision(m, n, 20), CoeffRing::BigInt).unwrap();
            let f = &basis[idx.min(basis.len() - 1)];
            let mn = hecke_apply(&hecke_apply(f, n, required_precision(m, 20)).unwrap(), m, 20).unwrap();
            let nm = hecke_apply(&hecke_apply(f, m, required_precision(n, 20)).unwrap(), n, 20).unwrap();
            let direct = hecke_apply(f, m * n, 20).unwrap();
            prop_assert_eq!(&mn, &nm);
            prop_assert_eq!(&mn, &direct);
        }

        #[test]
        fn commutes_with_reduction(x in proptest::collection::vec(-1000i64..1000, 3), n in 1u64..8, m in 2u64..500) {
            let f = small_form(24, &x);
            let lhs = hecke_apply(&f, n, 10).unwrap().reduce_mod(m).unwrap();
            let rhs = hecke_apply(&f.reduce_mod(m).unwrap(), n, 10).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn integral_output(x in proptest::collection::vec(-1000i64..1000, 2), n in 1u64..12) {
            let f = small_form(12, &x);
            let g = hecke_apply(&f, n, 6).unwrap();
            prop_assert!(g.series().int_coeffs().is_some());
            let as_q = hecke_apply(&f.clone().into_ring(CoeffRing::BigRational).unwrap(), n, 6).unwrap();
            prop_assert!(as_q.series().rational_coeffs().unwrap().iter().all(|c| c.is_integer()));
        }
    }
}
