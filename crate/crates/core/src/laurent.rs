//! Sparse exact Laurent polynomials in one variable `z`, the space every
//! operator acts on, together with the substitutions and the exact division
//! the operators need.
//!
//! A polynomial is a map from integer exponent to nonzero rational
//! coefficient, held in a `BTreeMap` so iteration order, equality and the
//! canonical JSON form are all structural.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use serde::Serialize;

use crate::coeff::{Coef, ParamPack};
use crate::error::{Error, Result};

/// A Laurent polynomial `sum c_k z^k` with exact rational coefficients.
/// Zero coefficients are never stored; the zero polynomial has empty support.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, Coef>,
}

/// Variable substitutions used by the difference-reflection operators.
/// `SZ`/`SInvZ` scale by `s = q^(1/2)`, needed by the shifted families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substitution {
    /// z -> qz
    QZ,
    /// z -> q^-1 z
    QInvZ,
    /// z -> z^-1
    ZInv,
    /// z -> q z^-1
    QZInv,
    /// z -> q^(-1/2) z
    SInvZ,
    /// z -> q^(1/2) z
    SZ,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, Coef::one())
    }

    pub fn constant(c: Coef) -> Self {
        Self::monomial(0, c)
    }

    /// The single term `c z^exp` (or zero if `c = 0`).
    pub fn monomial(exp: i64, c: Coef) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        LaurentPoly { terms }
    }

    /// The variable `z`.
    pub fn var() -> Self {
        Self::monomial(1, Coef::one())
    }

    /// Builds from `(exponent, coefficient)` pairs, merging duplicates.
    pub fn from_terms<I: IntoIterator<Item = (i64, Coef)>>(iter: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in iter {
            p.add_term(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&i64, &Coef)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of `z^k` (zero if absent).
    pub fn coeff(&self, k: i64) -> Coef {
        self.terms.get(&k).cloned().unwrap_or_else(Coef::zero)
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Adds `c z^e` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, e: i64, c: Coef) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(*e, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Coef) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in self.terms() {
            for (e2, c2) in rhs.terms() {
                out.add_term(e1 + e2, c1 * c2);
            }
        }
        out
    }

    /// Multiplies by `z^k`, shifting every exponent.
    pub fn mul_z_pow(&self, k: i64) -> Self {
        LaurentPoly {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Applies a variable substitution with exact exponent bookkeeping.
    pub fn substitute(&self, kind: Substitution, pack: &ParamPack) -> Self {
        let mut out = Self::zero();
        for (e, c) in self.terms() {
            match kind {
                Substitution::QZ => out.add_term(*e, c * pack.q_pow(*e)),
                Substitution::QInvZ => out.add_term(*e, c * pack.q_pow(-e)),
                Substitution::ZInv => out.add_term(-e, c.clone()),
                Substitution::QZInv => out.add_term(-e, c * pack.q_pow(*e)),
                Substitution::SInvZ => out.add_term(*e, c * pack.s_pow(-e)),
                Substitution::SZ => out.add_term(*e, c * pack.s_pow(*e)),
            }
        }
        out
    }

    /// True iff `c_k = c_-k` for all `k`, i.e. invariant under `z -> z^-1`.
    pub fn is_symmetric(&self) -> bool {
        self.terms.iter().all(|(e, c)| self.terms.get(&-e) == Some(c))
    }

    /// Exact division: returns `h` with `h * den = self`, or
    /// [`Error::NotDivisible`] if no Laurent polynomial quotient exists.
    /// A failure here means an operator was applied outside its
    /// guaranteed-polynomial range.
    pub fn divide_exact(&self, den: &Self) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::NotDivisible("division by the zero polynomial".into()));
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let dmax = den.max_exp().unwrap();
        let dlead = den.coeff(dmax);
        // a Laurent quotient, if it exists, has min exponent num.min - den.min
        let qmin = self.min_exp().unwrap() - den.min_exp().unwrap();
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while !rem.is_zero() {
            let e = rem.max_exp().unwrap() - dmax;
            if e < qmin {
                return Err(Error::NotDivisible(format!(
                    "remainder {rem} after dividing {self} by {den}"
                )));
            }
            let c = rem.coeff(e + dmax) / &dlead;
            for (de, dc) in den.terms() {
                rem.add_term(e + de, -(&c * dc));
            }
            quot.add_term(e, c);
        }
        Ok(quot)
    }

    /// Canonical JSON form: terms ascending by exponent, coefficients as
    /// decimal strings.
    pub fn to_json_terms(&self) -> Vec<LaurentTermJson> {
        self.terms
            .iter()
            .map(|(e, c)| LaurentTermJson {
                exp: *e,
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect()
    }
}

/// One JSON term of a Laurent polynomial.
#[derive(Debug, Clone, Serialize)]
pub struct LaurentTermJson {
    pub exp: i64,
    pub num: String,
    pub den: String,
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match e {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*z")?,
                _ => write!(f, "({c})*z^{e}")?,
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: Self) -> LaurentPoly {
        LaurentPoly::add(self, rhs)
    }
}

impl std::ops::Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: Self) -> LaurentPoly {
        LaurentPoly::sub(self, rhs)
    }
}

impl std::ops::Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: Self) -> LaurentPoly {
        LaurentPoly::mul(self, rhs)
    }
}

impl std::ops::Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly::neg(self)
    }
}

/// A quotient of Laurent polynomials, used transiently while an operator's
/// terms are combined over a common denominator before one exact division.
#[derive(Debug, Clone)]
pub struct RatLaurent {
    pub num: LaurentPoly,
    pub den: LaurentPoly,
}

impl RatLaurent {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Self {
        assert!(!den.is_zero(), "RatLaurent denominator must be nonzero");
        RatLaurent { num, den }
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        RatLaurent { num: p, den: LaurentPoly::one() }
    }

    /// Cross-multiplied sum.
    pub fn add(&self, rhs: &Self) -> Self {
        RatLaurent {
            num: &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            den: &self.den * &rhs.den,
        }
    }

    /// Collapses to a Laurent polynomial by exact division. Failure signals
    /// application outside the guaranteed-polynomial range.
    pub fn into_poly(self) -> Result<LaurentPoly> {
        self.num.divide_exact(&self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{coef_frac, coef_int};
    use proptest::prelude::*;

    fn pack() -> ParamPack {
        ParamPack::new(coef_frac(1, 2), coef_int(2), coef_int(3), coef_int(5), coef_int(7), 12, false).unwrap()
    }

    fn zsym() -> LaurentPoly {
        LaurentPoly::from_terms([(1, coef_int(1)), (-1, coef_int(1))])
    }

    #[test]
    fn ring_ops_basics() {
        let f = zsym();
        let sq = f.mul(&f);
        assert_eq!(
            sq,
            LaurentPoly::from_terms([(2, coef_int(1)), (0, coef_int(2)), (-2, coef_int(1))])
        );
        assert!(f.sub(&f).is_zero());
        let z = LaurentPoly::var();
        let zi = LaurentPoly::monomial(-1, coef_int(1));
        assert_eq!(z.mul(&zi), LaurentPoly::one());
    }

    #[test]
    fn substitution_examples() {
        let p = pack();
        let z2 = LaurentPoly::monomial(2, coef_int(1));
        assert_eq!(
            z2.substitute(Substitution::QZ, &p),
            LaurentPoly::monomial(2, coef_frac(1, 16))
        );
        let f = zsym();
        assert_eq!(f.substitute(Substitution::ZInv, &p), f);
        let z = LaurentPoly::var();
        assert_eq!(
            z.substitute(Substitution::QZInv, &p),
            LaurentPoly::monomial(-1, coef_frac(1, 4))
        );
    }

    #[test]
    fn symmetry_detection() {
        assert!(zsym().is_symmetric());
        assert!(!LaurentPoly::var().is_symmetric());
        assert!(LaurentPoly::zero().is_symmetric());
    }

    #[test]
    fn divide_exact_examples() {
        // (z^2 - 1) / (z - 1) = z + 1
        let num = LaurentPoly::from_terms([(2, coef_int(1)), (0, coef_int(-1))]);
        let den = LaurentPoly::from_terms([(1, coef_int(1)), (0, coef_int(-1))]);
        assert_eq!(
            num.divide_exact(&den).unwrap(),
            LaurentPoly::from_terms([(1, coef_int(1)), (0, coef_int(1))])
        );

        // ab (z^2 - 1) / (1 - z^2) = -ab, the constant cancellation in T1
        let ab = coef_int(6);
        let num = LaurentPoly::from_terms([(2, ab.clone()), (0, -ab.clone())]);
        let den = LaurentPoly::from_terms([(0, coef_int(1)), (2, coef_int(-1))]);
        assert_eq!(num.divide_exact(&den).unwrap(), LaurentPoly::constant(-ab));

        // (z^2 + 1) / (z - 1) leaves a remainder
        let num = LaurentPoly::from_terms([(2, coef_int(1)), (0, coef_int(1))]);
        let den = LaurentPoly::from_terms([(1, coef_int(1)), (0, coef_int(-1))]);
        assert!(matches!(num.divide_exact(&den), Err(Error::NotDivisible(_))));
    }

    #[test]
    fn inspect_zero_poly() {
        let z = LaurentPoly::zero();
        assert_eq!(z.min_exp(), None);
        assert_eq!(z.max_exp(), None);
        assert_eq!(z.coeff(3), Coef::zero());
    }

    #[test]
    fn json_terms_sorted() {
        let f = LaurentPoly::from_terms([(2, coef_int(1)), (-1, coef_frac(3, 4))]);
        let terms = f.to_json_terms();
        assert_eq!(terms.len(), 2);
        assert_eq!((terms[0].exp, terms[0].num.as_str(), terms[0].den.as_str()), (-1, "3", "4"));
        assert_eq!((terms[1].exp, terms[1].num.as_str(), terms[1].den.as_str()), (2, "1", "1"));
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPoly> {
        proptest::collection::vec(((-6i64..=6), (-9i64..=9), (1i64..=9)), 0..6).prop_map(|v| {
            LaurentPoly::from_terms(v.into_iter().map(|(e, n, d)| (e, coef_frac(n, d))))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn substitution_involution_and_inverse(f in arb_poly()) {
            let p = pack();
            let back = f.substitute(Substitution::ZInv, &p).substitute(Substitution::ZInv, &p);
            prop_assert_eq!(&back, &f);
            let back = f.substitute(Substitution::QZ, &p).substitute(Substitution::QInvZ, &p);
            prop_assert_eq!(&back, &f);
            let back = f.substitute(Substitution::SZ, &p).substitute(Substitution::SInvZ, &p);
            prop_assert_eq!(&back, &f);
        }

        #[test]
        fn divide_round_trip(f in arb_poly(), g in arb_poly()) {
            prop_assume!(!g.is_zero());
            let prod = f.mul(&g);
            prop_assert_eq!(prod.divide_exact(&g).unwrap(), f);
        }

        #[test]
        fn symmetry_matches_substitution(f in arb_poly()) {
            let p = pack();
            prop_assert_eq!(f.is_symmetric(), f.substitute(Substitution::ZInv, &p) == f);
        }
    }
}
