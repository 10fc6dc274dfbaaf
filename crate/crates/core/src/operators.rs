//! The atomic operators of the basic representations and their compositions.
//!
//! Every atomic operator has a closed-form action on Laurent polynomials.
//! Reflection-type operators are rational expressions in `z`: their terms
//! are combined over a common denominator as a [`RatLaurent`] and collapsed
//! by one exact division. The theory guarantees the result is again a
//! Laurent polynomial, so the division doubles as a perpetual runtime check.
//!
//! `Y` is defined operationally as the composition `T1 ∘ T0` and `D` as
//! `Y + q^-1 abcd Y^-1`; the independent closed forms
//! [`apply_y_closed`] and [`apply_d_closed`] exist as cross-check oracles
//! and are compared against the compositions in the verification suites.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use num::{One, Zero};

use crate::coeff::{Coef, ParamPack};
use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, RatLaurent, Substitution};

/// The atomic operators of the basic representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomicOp {
    /// Multiplication by `z`.
    Z,
    /// Multiplication by `z^-1`.
    Zinv,
    /// Multiplication by `z + z^-1`.
    Zsym,
    /// Hecke generator acting by reflection `z -> z^-1`.
    T1,
    /// Affine Hecke generator acting by reflection `z -> q z^-1`.
    T0,
    T1inv,
    T0inv,
    /// `T1 ∘ T0`.
    Y,
    /// `T0^-1 ∘ T1^-1`.
    Yinv,
    /// `Y + q^-1 abcd Y^-1`, the operator with the whole polynomial space
    /// as eigenspaces.
    D,
    /// The second-order q-difference operator on symmetric polynomials.
    /// Only guaranteed to produce polynomials on symmetric input.
    Dsym,
    Identity,
}

impl AtomicOp {
    pub fn name(self) -> &'static str {
        match self {
            AtomicOp::Z => "Z",
            AtomicOp::Zinv => "Zi",
            AtomicOp::Zsym => "Zs",
            AtomicOp::T1 => "T1",
            AtomicOp::T0 => "T0",
            AtomicOp::T1inv => "T1i",
            AtomicOp::T0inv => "T0i",
            AtomicOp::Y => "Y",
            AtomicOp::Yinv => "Yi",
            AtomicOp::D => "D",
            AtomicOp::Dsym => "Ds",
            AtomicOp::Identity => "I",
        }
    }

    pub fn parse(s: &str) -> Result<AtomicOp> {
        Ok(match s {
            "Z" => AtomicOp::Z,
            "Zi" => AtomicOp::Zinv,
            "Zs" => AtomicOp::Zsym,
            "T1" => AtomicOp::T1,
            "T0" => AtomicOp::T0,
            "T1i" => AtomicOp::T1inv,
            "T0i" => AtomicOp::T0inv,
            "Y" => AtomicOp::Y,
            "Yi" => AtomicOp::Yinv,
            "D" => AtomicOp::D,
            "Ds" => AtomicOp::Dsym,
            "I" => AtomicOp::Identity,
            other => return Err(Error::Parse(format!("unknown operator atom {other:?}"))),
        })
    }
}

/// An operator expression: atoms combined by scaling, sums and composition.
/// Products compose right-to-left, i.e. `Product([A, B])` applies `B` first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpExpr {
    Atom(AtomicOp),
    Scale(Coef, Box<OpExpr>),
    Sum(Vec<OpExpr>),
    Product(Vec<OpExpr>),
}

impl OpExpr {
    pub fn atom(a: AtomicOp) -> Self {
        OpExpr::Atom(a)
    }

    pub fn identity() -> Self {
        OpExpr::Atom(AtomicOp::Identity)
    }

    /// The scalar operator `c * Identity`.
    pub fn scalar(c: Coef) -> Self {
        OpExpr::Scale(c, Box::new(Self::identity()))
    }

    pub fn scaled(self, c: Coef) -> Self {
        OpExpr::Scale(c, Box::new(self))
    }

    pub fn product(factors: Vec<OpExpr>) -> Self {
        match factors.len() {
            0 => Self::identity(),
            1 => factors.into_iter().next().unwrap(),
            _ => OpExpr::Product(factors),
        }
    }

    pub fn sum(terms: Vec<OpExpr>) -> Self {
        match terms.len() {
            0 => Self::scalar(Coef::zero()),
            1 => terms.into_iter().next().unwrap(),
            _ => OpExpr::Sum(terms),
        }
    }

    /// `self` composed with itself `n` times; `n = 0` is the identity.
    pub fn pow(&self, n: u32) -> Self {
        Self::product(std::iter::repeat_n(self.clone(), n as usize).collect())
    }

    /// Number of atomic factors along the deepest composition path; each
    /// atom grows the exponent window by at most 2.
    pub fn growth_depth(&self) -> i64 {
        match self {
            OpExpr::Atom(AtomicOp::Identity) => 0,
            OpExpr::Atom(_) => 1,
            OpExpr::Scale(_, inner) => inner.growth_depth(),
            OpExpr::Sum(terms) => terms.iter().map(|t| t.growth_depth()).max().unwrap_or(0),
            OpExpr::Product(factors) => factors.iter().map(|f| f.growth_depth()).sum(),
        }
    }

    /// Exact action on a Laurent polynomial.
    pub fn apply(&self, f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
        match self {
            OpExpr::Atom(a) => apply_atomic(*a, f, p),
            OpExpr::Scale(c, inner) => Ok(inner.apply(f, p)?.scale(c)),
            OpExpr::Sum(terms) => {
                let mut acc = LaurentPoly::zero();
                for t in terms {
                    acc = acc.add(&t.apply(f, p)?);
                }
                Ok(acc)
            }
            OpExpr::Product(factors) => {
                let mut g = f.clone();
                for factor in factors.iter().rev() {
                    g = factor.apply(&g, p)?;
                }
                Ok(g)
            }
        }
    }
}

impl std::ops::Add for OpExpr {
    type Output = OpExpr;
    fn add(self, rhs: OpExpr) -> OpExpr {
        match self {
            OpExpr::Sum(mut terms) => {
                terms.push(rhs);
                OpExpr::Sum(terms)
            }
            lhs => OpExpr::Sum(vec![lhs, rhs]),
        }
    }
}

impl std::ops::Sub for OpExpr {
    type Output = OpExpr;
    fn sub(self, rhs: OpExpr) -> OpExpr {
        self + rhs.scaled(-Coef::one())
    }
}

impl std::ops::Mul for OpExpr {
    type Output = OpExpr;
    fn mul(self, rhs: OpExpr) -> OpExpr {
        match self {
            OpExpr::Product(mut factors) => {
                factors.push(rhs);
                OpExpr::Product(factors)
            }
            lhs => OpExpr::Product(vec![lhs, rhs]),
        }
    }
}

/// `c0 + c1 z`
fn lin(c0: Coef, c1: Coef) -> LaurentPoly {
    LaurentPoly::from_terms([(0, c0), (1, c1)])
}

/// `1 - k z`
fn one_minus(k: &Coef) -> LaurentPoly {
    lin(Coef::one(), -k.clone())
}

/// `k - z`
fn minus_z(k: &Coef) -> LaurentPoly {
    lin(k.clone(), -Coef::one())
}

/// `1 - z^2`
fn den_sym() -> LaurentPoly {
    LaurentPoly::from_terms([(0, Coef::one()), (2, -Coef::one())])
}

/// `q - z^2`
fn den_aff(p: &ParamPack) -> LaurentPoly {
    LaurentPoly::from_terms([(0, p.q().clone()), (2, -Coef::one())])
}

/// `1 - q z^2`
fn den_qsq(p: &ParamPack) -> LaurentPoly {
    LaurentPoly::from_terms([(0, Coef::one()), (2, -p.q().clone())])
}

/// `q^2 - z^2`
fn den_qq(p: &ParamPack) -> LaurentPoly {
    LaurentPoly::from_terms([(0, p.q_pow(2)), (2, -Coef::one())])
}

fn apply_t1(f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
    let (a, b) = (p.a(), p.b());
    let finv = f.substitute(Substitution::ZInv, p);
    // ((a+b)z - (1+ab)) f + (1-az)(1-bz) f[z^-1], all over 1 - z^2
    let num = &lin(-(Coef::one() + p.ab()), a + b).mul(f)
        + &one_minus(a).mul(&one_minus(b)).mul(&finv);
    num.divide_exact(&den_sym())
}

fn apply_t0(f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
    let (c, d, q) = (p.c(), p.d(), p.q());
    let frefl = f.substitute(Substitution::QZInv, p);
    // q^-1 z ((cd+q)z - (c+d)q) f - (c-z)(d-z) f[qz^-1], all over q - z^2
    let poly = LaurentPoly::from_terms([(2, (p.cd() + q) * p.q_pow(-1)), (1, -(c + d))]);
    let num = &poly.mul(f) - &minus_z(c).mul(&minus_z(d)).mul(&frefl);
    num.divide_exact(&den_aff(p))
}

fn apply_t1inv(f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
    // T1^-1 = -(ab)^-1 T1 - (1 + (ab)^-1)
    let abinv = p.ab().recip();
    let t1f = apply_t1(f, p)?;
    Ok(t1f.scale(&-abinv.clone()).sub(&f.scale(&(Coef::one() + abinv))))
}

fn apply_t0inv(f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
    // T0^-1 = -q(cd)^-1 T0 - (1 + q(cd)^-1)
    let qcdinv = p.q() * &p.cd().recip();
    let t0f = apply_t0(f, p)?;
    Ok(t0f.scale(&-qcdinv.clone()).sub(&f.scale(&(Coef::one() + qcdinv))))
}

fn apply_y(f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
    apply_t1(&apply_t0(f, p)?, p)
}

fn apply_yinv(f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
    apply_t0inv(&apply_t1inv(f, p)?, p)
}

fn apply_d(f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
    let scale = p.abcd() * p.q_pow(-1);
    Ok(apply_y(f, p)?.add(&apply_yinv(f, p)?.scale(&scale)))
}

/// The second-order q-difference operator. On non-symmetric input the
/// defining rational expression need not collapse to a polynomial; the
/// resulting `NotDivisible` error is the out-of-domain signal.
fn apply_dsym(f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
    let (a, b, c, d) = (p.a(), p.b(), p.c(), p.d());
    let fq = f.substitute(Substitution::QZ, p);
    let fqi = f.substitute(Substitution::QInvZ, p);

    let fwd = one_minus(a).mul(&one_minus(b)).mul(&one_minus(c)).mul(&one_minus(d));
    let t1 = RatLaurent::new(fwd.mul(&fq.sub(f)), den_sym().mul(&den_qsq(p)));
    let bwd = minus_z(a).mul(&minus_z(b)).mul(&minus_z(c)).mul(&minus_z(d));
    let t2 = RatLaurent::new(bwd.mul(&fqi.sub(f)), den_sym().mul(&den_aff(p)));
    let t3 = RatLaurent::from_poly(f.scale(&(Coef::one() + p.abcd() * p.q_pow(-1))));

    t1.add(&t2).add(&t3).into_poly()
}

/// Closed form of `Y` as a single four-term difference-reflection operator,
/// independent of the `T1 ∘ T0` composition. Oracle only.
pub fn apply_y_closed(f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
    let (a, b, c, d, q) = (p.a(), p.b(), p.c(), p.d(), p.q());
    let one = Coef::one();
    let ab1 = &one + &p.ab();
    let cdq = p.cd() + q;
    let cdsum_q = (c + d) * q;

    let fz = f;
    let fq = f.substitute(Substitution::QZ, p);
    let finv = f.substitute(Substitution::ZInv, p);
    let frefl = f.substitute(Substitution::QZInv, p);

    let qden = LaurentPoly::constant(q.clone());

    // z (1+ab-(a+b)z) ((c+d)q-(cd+q)z) / (q (1-z^2)(q-z^2)) * f[z]
    let n1 = LaurentPoly::var()
        .mul(&lin(ab1.clone(), -(a + b)))
        .mul(&lin(cdsum_q.clone(), -cdq.clone()))
        .mul(fz);
    let t1 = RatLaurent::new(n1, qden.mul(&den_sym()).mul(&den_aff(p)));

    // (1-az)(1-bz)(1-cz)(1-dz) / ((1-z^2)(1-qz^2)) * f[qz]
    let n2 = one_minus(a).mul(&one_minus(b)).mul(&one_minus(c)).mul(&one_minus(d)).mul(&fq);
    let t2 = RatLaurent::new(n2, den_sym().mul(&den_qsq(p)));

    // (1-az)(1-bz)((c+d)qz-(cd+q)) / (q (1-z^2)(1-qz^2)) * f[z^-1]
    let n3 = one_minus(a).mul(&one_minus(b)).mul(&lin(-cdq.clone(), cdsum_q)).mul(&finv);
    let t3 = RatLaurent::new(n3, qden.mul(&den_sym()).mul(&den_qsq(p)));

    // (c-z)(d-z)(1+ab-(a+b)z) / ((1-z^2)(q-z^2)) * f[qz^-1]
    let n4 = minus_z(c).mul(&minus_z(d)).mul(&lin(ab1, -(a + b))).mul(&frefl);
    let t4 = RatLaurent::new(n4, den_sym().mul(&den_aff(p)));

    t1.add(&t2).add(&t3).add(&t4).into_poly()
}

/// Closed form of `D` as a single five-term difference-reflection operator,
/// independent of the composition route. Oracle only.
pub fn apply_d_closed(f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
    let (a, b, c, d, q) = (p.a(), p.b(), p.c(), p.d(), p.q());
    let one = Coef::one();
    let ab = p.ab();
    let cd = p.cd();
    let one_m_q = &one - q;
    let q_p_one = q + &one;

    let fz = f;
    let fq = f.substitute(Substitution::QZ, p);
    let fqi = f.substitute(Substitution::QInvZ, p);
    let finv = f.substitute(Substitution::ZInv, p);
    let frefl = f.substitute(Substitution::QZInv, p);

    let qden = LaurentPoly::constant(q.clone());
    let one_p_z2 = LaurentPoly::from_terms([(0, one.clone()), (2, one.clone())]);
    let q_p_z2 = LaurentPoly::from_terms([(0, q.clone()), (2, one.clone())]);

    // (1-q) z (1-az)(1-bz) ((q+1)(cd+q)z - q(c+d)(1+z^2))
    //   / (q (1-z^2)(q-z^2)(1-qz^2)) * f[z^-1]
    let inner1 = LaurentPoly::monomial(1, &q_p_one * &(&cd + q)).sub(&one_p_z2.scale(&(q * &(c + d))));
    let n1 = LaurentPoly::monomial(1, one_m_q.clone())
        .mul(&one_minus(a))
        .mul(&one_minus(b))
        .mul(&inner1)
        .mul(&finv);
    let t1 = RatLaurent::new(n1, qden.mul(&den_sym()).mul(&den_aff(p)).mul(&den_qsq(p)));

    // (1-q) z (c-z)(d-z) ((a+b)(q+z^2) - (ab+1)(q+1)z)
    //   / ((1-z^2)(q-z^2)(q^2-z^2)) * f[qz^-1]
    let inner2 = q_p_z2.scale(&(a + b)).sub(&LaurentPoly::monomial(1, (&ab + &one) * &q_p_one));
    let n2 = LaurentPoly::monomial(1, one_m_q.clone())
        .mul(&minus_z(c))
        .mul(&minus_z(d))
        .mul(&inner2)
        .mul(&frefl);
    let t2 = RatLaurent::new(n2, den_sym().mul(&den_aff(p)).mul(&den_qq(p)));

    // [ (a+b)(cd+q)(q+z^2) + q(ab+1)(c+d)(1+z^2)
    //   - ((q+1)(cd+q)(ab+1) + 2q(a+b)(c+d)) z ] * z / (q (1-z^2)(q-z^2)) * f[z]
    let big = q_p_z2
        .scale(&((a + b) * &(&cd + q)))
        .add(&one_p_z2.scale(&(q * &(&ab + &one) * (c + d))))
        .sub(&LaurentPoly::monomial(
            1,
            &q_p_one * &(&cd + q) * (&ab + &one) + (q + q) * (a + b) * (c + d),
        ));
    let n3 = big.mul_z_pow(1).mul(fz);
    let t3 = RatLaurent::new(n3, qden.mul(&den_sym()).mul(&den_aff(p)));

    // (c-z)(d-z)(aq-z)(bq-z) / ((q-z^2)(q^2-z^2)) * f[q^-1 z]
    let n4 = minus_z(c).mul(&minus_z(d)).mul(&minus_z(&(a * q))).mul(&minus_z(&(b * q))).mul(&fqi);
    let t4 = RatLaurent::new(n4, den_aff(p).mul(&den_qq(p)));

    // (1-az)(1-bz)(1-cz)(1-dz) / ((1-z^2)(1-qz^2)) * f[qz]
    let n5 = one_minus(a).mul(&one_minus(b)).mul(&one_minus(c)).mul(&one_minus(d)).mul(&fq);
    let t5 = RatLaurent::new(n5, den_sym().mul(&den_qsq(p)));

    t1.add(&t2).add(&t3).add(&t4).add(&t5).into_poly()
}

/// Exact action of one atomic operator.
pub fn apply_atomic(op: AtomicOp, f: &LaurentPoly, p: &ParamPack) -> Result<LaurentPoly> {
    match op {
        AtomicOp::Z => Ok(f.mul_z_pow(1)),
        AtomicOp::Zinv => Ok(f.mul_z_pow(-1)),
        AtomicOp::Zsym => Ok(f.mul_z_pow(1).add(&f.mul_z_pow(-1))),
        AtomicOp::T1 => apply_t1(f, p),
        AtomicOp::T0 => apply_t0(f, p),
        AtomicOp::T1inv => apply_t1inv(f, p),
        AtomicOp::T0inv => apply_t0inv(f, p),
        AtomicOp::Y => apply_y(f, p),
        AtomicOp::Yinv => apply_yinv(f, p),
        AtomicOp::D => apply_d(f, p),
        AtomicOp::Dsym => apply_dsym(f, p),
        AtomicOp::Identity => Ok(f.clone()),
    }
}

/// Memoizes each atomic operator's action on monomials `z^e`, so repeated
/// applications (word enumeration, matrix assembly) become sparse linear
/// combinations instead of fresh rational-function evaluations. Entries are
/// computed through [`apply_atomic`], so the honest path is still what is
/// exercised, once per `(atom, exponent)`.
///
/// `Dsym` is the one atom without a polynomial action on single monomials,
/// so it is memoized on the symmetric combinations `z^k + z^-k` instead and
/// requires symmetric input (non-symmetric input falls through to the
/// direct path, which reports the failed cancellation).
pub struct ActionCache<'a> {
    pack: &'a ParamPack,
    memo: RefCell<HashMap<(AtomicOp, i64), Rc<LaurentPoly>>>,
}

impl<'a> ActionCache<'a> {
    pub fn new(pack: &'a ParamPack) -> Self {
        ActionCache { pack, memo: RefCell::new(HashMap::new()) }
    }

    pub fn pack(&self) -> &ParamPack {
        self.pack
    }

    fn image(&self, op: AtomicOp, e: i64) -> Result<Rc<LaurentPoly>> {
        if let Some(hit) = self.memo.borrow().get(&(op, e)) {
            return Ok(Rc::clone(hit));
        }
        let input = if op == AtomicOp::Dsym {
            // keyed by k >= 0: the image of z^k + z^-k (of 1 for k = 0)
            if e == 0 {
                LaurentPoly::one()
            } else {
                LaurentPoly::from_terms([(e, Coef::one()), (-e, Coef::one())])
            }
        } else {
            LaurentPoly::monomial(e, Coef::one())
        };
        let img = Rc::new(apply_atomic(op, &input, self.pack)?);
        self.memo.borrow_mut().insert((op, e), Rc::clone(&img));
        Ok(img)
    }

    /// Atomic action as a cached linear combination of monomial images.
    pub fn apply_atom(&self, op: AtomicOp, f: &LaurentPoly) -> Result<LaurentPoly> {
        if op == AtomicOp::Dsym {
            if !f.is_symmetric() {
                return apply_atomic(op, f, self.pack);
            }
            let mut acc = LaurentPoly::zero();
            for (e, c) in f.terms() {
                if *e < 0 {
                    continue;
                }
                let img = self.image(op, *e)?;
                for (ie, ic) in img.terms() {
                    acc.add_term(*ie, ic * c);
                }
            }
            return Ok(acc);
        }
        let mut acc = LaurentPoly::zero();
        for (e, c) in f.terms() {
            let img = self.image(op, *e)?;
            for (ie, ic) in img.terms() {
                acc.add_term(*ie, ic * c);
            }
        }
        Ok(acc)
    }

    /// Full expression application routed through the cache.
    pub fn apply_expr(&self, op: &OpExpr, f: &LaurentPoly) -> Result<LaurentPoly> {
        match op {
            OpExpr::Atom(a) => self.apply_atom(*a, f),
            OpExpr::Scale(c, inner) => Ok(self.apply_expr(inner, f)?.scale(c)),
            OpExpr::Sum(terms) => {
                let mut acc = LaurentPoly::zero();
                for t in terms {
                    acc = acc.add(&self.apply_expr(t, f)?);
                }
                Ok(acc)
            }
            OpExpr::Product(factors) => {
                let mut g = f.clone();
                for factor in factors.iter().rev() {
                    g = self.apply_expr(factor, &g)?;
                }
                Ok(g)
            }
        }
    }
}

/// Basis of an exponent window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Monomials `z^k` for `|k| <= N`.
    Full,
    /// Symmetric combinations `1, z^k + z^-k` for `1 <= k <= N`.
    Symmetric,
}

/// Truncation window `{z^k : |k| <= n}` with the conservative growth bound
/// of two exponent units per atomic factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationWindow {
    pub n: i64,
}

impl TruncationWindow {
    pub fn new(n: i64) -> Self {
        assert!(n >= 0);
        TruncationWindow { n }
    }

    /// Output window bound for applying `op` to this window.
    pub fn output_bound(&self, op: &OpExpr) -> i64 {
        self.n + 2 * op.growth_depth()
    }
}

/// Monomial basis `z^-n ... z^n`.
pub fn full_basis(n: i64) -> Vec<LaurentPoly> {
    (-n..=n).map(|e| LaurentPoly::monomial(e, Coef::one())).collect()
}

/// Symmetric basis `1, z+z^-1, ..., z^n + z^-n`.
pub fn sym_basis(n: i64) -> Vec<LaurentPoly> {
    (0..=n)
        .map(|k| {
            if k == 0 {
                LaurentPoly::one()
            } else {
                LaurentPoly::from_terms([(k, Coef::one()), (-k, Coef::one())])
            }
        })
        .collect()
}

fn full_components(g: &LaurentPoly, bound: i64) -> Result<Vec<Coef>> {
    if let (Some(lo), Some(hi)) = (g.min_exp(), g.max_exp()) {
        if lo < -bound || hi > bound {
            return Err(Error::NotDivisible(format!(
                "operator output escaped the window |k| <= {bound}: support [{lo}, {hi}]"
            )));
        }
    }
    Ok((-bound..=bound).map(|e| g.coeff(e)).collect())
}

/// Coordinates of a symmetric polynomial in the symmetric basis.
fn sym_components(g: &LaurentPoly, bound: i64) -> Result<Vec<Coef>> {
    if !g.is_symmetric() {
        return Err(Error::NotDivisible(format!(
            "expected a symmetric polynomial on the symmetric window, got {g}"
        )));
    }
    if let Some(hi) = g.max_exp() {
        if hi > bound {
            return Err(Error::NotDivisible(format!(
                "operator output escaped the symmetric window k <= {bound}: degree {hi}"
            )));
        }
    }
    Ok((0..=bound).map(|k| g.coeff(k)).collect())
}

/// True iff `lhs` and `rhs` act identically on every `z^k` with `|k| <= n`.
pub fn equal_on_truncation(lhs: &OpExpr, rhs: &OpExpr, p: &ParamPack, n: i64) -> Result<bool> {
    let cache = ActionCache::new(p);
    for f in full_basis(n) {
        if cache.apply_expr(lhs, &f)? != cache.apply_expr(rhs, &f)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact matrix of `op` from the window basis to the enlarged output basis.
/// Row `i`, column `j` holds the `i`-th output coordinate of `op` applied to
/// the `j`-th basis vector; output coordinates run over the window enlarged
/// by the growth bound.
pub fn matrix_on_truncation(
    op: &OpExpr,
    p: &ParamPack,
    window: TruncationWindow,
    basis: BasisKind,
) -> Result<Vec<Vec<Coef>>> {
    let cache = ActionCache::new(p);
    matrix_on_truncation_cached(&cache, op, window, basis)
}

/// Same as [`matrix_on_truncation`] but reusing a shared atom cache.
pub fn matrix_on_truncation_cached(
    cache: &ActionCache,
    op: &OpExpr,
    window: TruncationWindow,
    basis: BasisKind,
) -> Result<Vec<Vec<Coef>>> {
    matrix_with_output_bound(cache, op, window.n, window.output_bound(op), basis)
}

/// Matrix of `op` with an explicit output window bound, so matrices of
/// several operators can share one coordinate system (needed when stacking
/// them for rank computations).
pub fn matrix_with_output_bound(
    cache: &ActionCache,
    op: &OpExpr,
    n: i64,
    out_bound: i64,
    basis: BasisKind,
) -> Result<Vec<Vec<Coef>>> {
    let inputs = match basis {
        BasisKind::Full => full_basis(n),
        BasisKind::Symmetric => sym_basis(n),
    };
    let mut cols = Vec::with_capacity(inputs.len());
    for f in &inputs {
        let g = cache.apply_expr(op, f)?;
        cols.push(match basis {
            BasisKind::Full => full_components(&g, out_bound)?,
            BasisKind::Symmetric => sym_components(&g, out_bound)?,
        });
    }
    let rows = cols[0].len();
    Ok((0..rows)
        .map(|r| cols.iter().map(|col| col[r].clone()).collect())
        .collect())
}

impl fmt::Display for OpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpExpr::Atom(a) => f.write_str(a.name()),
            OpExpr::Scale(c, inner) => write!(f, "({c})*{inner}"),
            OpExpr::Sum(terms) => {
                let parts: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
                write!(f, "{}", parts.join(" + "))
            }
            OpExpr::Product(factors) => {
                let parts: Vec<String> = factors.iter().map(|t| t.to_string()).collect();
                write!(f, "{}", parts.join("*"))
            }
        }
    }
}

/// Parses the textual operator grammar: atoms
/// `Z Zi Zs T1 T0 T1i T0i Y Yi D Ds I`, composition with `*`, sums with
/// `+`, rational scalars in parentheses, e.g. `"T1*T0 + (1/4)*Yi"`.
pub fn parse_op_expr(src: &str) -> Result<OpExpr> {
    #[derive(Debug, PartialEq)]
    enum Tok {
        Atom(AtomicOp),
        Scalar(Coef),
        Plus,
        Star,
    }

    let bytes: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch == '+' {
            toks.push(Tok::Plus);
            i += 1;
        } else if ch == '*' {
            toks.push(Tok::Star);
            i += 1;
        } else if ch == '(' {
            let close = bytes[i..]
                .iter()
                .position(|&c| c == ')')
                .ok_or_else(|| Error::Parse(format!("unclosed scalar in {src:?}")))?;
            let body: String = bytes[i + 1..i + close].iter().collect();
            toks.push(Tok::Scalar(crate::coeff::parse_coef(&body)?));
            i += close + 1;
        } else if ch.is_ascii_alphanumeric() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_alphanumeric() {
                j += 1;
            }
            let name: String = bytes[i..j].iter().collect();
            toks.push(Tok::Atom(AtomicOp::parse(&name)?));
            i = j;
        } else {
            return Err(Error::Parse(format!("unexpected character {ch:?} in {src:?}")));
        }
    }

    let mut terms: Vec<OpExpr> = Vec::new();
    let mut factors: Vec<OpExpr> = Vec::new();
    let mut scalar = Coef::one();
    let mut expect_factor = true;

    let flush = |factors: &mut Vec<OpExpr>, scalar: &mut Coef, terms: &mut Vec<OpExpr>| {
        let base = OpExpr::product(std::mem::take(factors));
        let c = std::mem::replace(scalar, Coef::one());
        terms.push(if c.is_one() { base } else { base.scaled(c) });
    };

    for tok in toks {
        match tok {
            Tok::Plus => {
                if expect_factor {
                    return Err(Error::Parse(format!("dangling '+' in {src:?}")));
                }
                flush(&mut factors, &mut scalar, &mut terms);
                expect_factor = true;
            }
            Tok::Star => {
                if expect_factor {
                    return Err(Error::Parse(format!("dangling '*' in {src:?}")));
                }
                expect_factor = true;
            }
            Tok::Atom(a) => {
                if !expect_factor {
                    return Err(Error::Parse(format!("missing operator between factors in {src:?}")));
                }
                factors.push(OpExpr::atom(a));
                expect_factor = false;
            }
            Tok::Scalar(c) => {
                if !expect_factor {
                    return Err(Error::Parse(format!("missing operator between factors in {src:?}")));
                }
                scalar *= c;
                expect_factor = false;
            }
        }
    }
    if expect_factor {
        return Err(Error::Parse(format!("incomplete expression {src:?}")));
    }
    flush(&mut factors, &mut scalar, &mut terms);
    Ok(OpExpr::sum(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{coef_frac, coef_int, lambda_n};
    use proptest::prelude::*;

    fn pack() -> ParamPack {
        ParamPack::new(coef_frac(1, 2), coef_int(2), coef_int(3), coef_int(5), coef_int(7), 16, false).unwrap()
    }

    #[test]
    fn t1_on_constants_and_z() {
        let p = pack();
        let one = LaurentPoly::one();
        assert_eq!(apply_atomic(AtomicOp::T1, &one, &p).unwrap(), LaurentPoly::constant(-p.ab()));
        let z = LaurentPoly::var();
        let expect = LaurentPoly::from_terms([(-1, coef_int(1)), (0, -(p.a() + p.b()))]);
        assert_eq!(apply_atomic(AtomicOp::T1, &z, &p).unwrap(), expect);
    }

    #[test]
    fn t0_on_constant() {
        let p = pack();
        let one = LaurentPoly::one();
        let expect = LaurentPoly::constant(-(p.cd() * p.q_pow(-1)));
        assert_eq!(apply_atomic(AtomicOp::T0, &one, &p).unwrap(), expect);
    }

    #[test]
    fn y_and_d_on_constant() {
        let p = pack();
        let one = LaurentPoly::one();
        let y1 = apply_atomic(AtomicOp::Y, &one, &p).unwrap();
        assert_eq!(y1, LaurentPoly::constant(p.abcd() * p.q_pow(-1)));
        let d1 = apply_atomic(AtomicOp::D, &one, &p).unwrap();
        assert_eq!(d1, LaurentPoly::constant(lambda_n(&p, 0).unwrap()));
    }

    #[test]
    fn inverses_compose_to_identity() {
        let p = pack();
        for k in -4..=4i64 {
            let f = LaurentPoly::monomial(k, coef_frac(3, 5));
            let g = apply_atomic(AtomicOp::T1inv, &apply_atomic(AtomicOp::T1, &f, &p).unwrap(), &p).unwrap();
            assert_eq!(g, f);
            let g = apply_atomic(AtomicOp::T0, &apply_atomic(AtomicOp::T0inv, &f, &p).unwrap(), &p).unwrap();
            assert_eq!(g, f);
            let g = apply_atomic(AtomicOp::Yinv, &apply_atomic(AtomicOp::Y, &f, &p).unwrap(), &p).unwrap();
            assert_eq!(g, f);
        }
    }

    #[test]
    fn closed_forms_match_compositions() {
        let p = pack();
        for k in -5..=5i64 {
            let f = LaurentPoly::monomial(k, Coef::one());
            assert_eq!(apply_y_closed(&f, &p).unwrap(), apply_atomic(AtomicOp::Y, &f, &p).unwrap());
            assert_eq!(apply_d_closed(&f, &p).unwrap(), apply_atomic(AtomicOp::D, &f, &p).unwrap());
        }
    }

    #[test]
    fn d_equals_dsym_on_symmetric_input() {
        let p = pack();
        for f in sym_basis(6) {
            let lhs = apply_atomic(AtomicOp::D, &f, &p).unwrap();
            let rhs = apply_atomic(AtomicOp::Dsym, &f, &p).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn z_zinv_is_identity_on_window() {
        let p = pack();
        let composed = OpExpr::atom(AtomicOp::Z) * OpExpr::atom(AtomicOp::Zinv);
        assert!(equal_on_truncation(&composed, &OpExpr::identity(), &p, 6).unwrap());
    }

    #[test]
    fn hecke_quadratic_relation_on_window() {
        // (T1 + ab)(T1 + 1) = 0
        let p = pack();
        let t1 = OpExpr::atom(AtomicOp::T1);
        let rel = (t1.clone() + OpExpr::scalar(p.ab())) * (t1 + OpExpr::scalar(Coef::one()));
        let zero = OpExpr::scalar(Coef::zero());
        assert!(equal_on_truncation(&rel, &zero, &p, 6).unwrap());
    }

    #[test]
    fn identity_matrix_shape() {
        let p = pack();
        let m = matrix_on_truncation(&OpExpr::identity(), &p, TruncationWindow::new(2), BasisKind::Full).unwrap();
        assert_eq!(m.len(), 5);
        for (r, row) in m.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                assert_eq!(v.is_zero(), r != c);
            }
        }
    }

    #[test]
    fn zsym_matrix_is_super_sub_diagonal() {
        let p = pack();
        let m = matrix_on_truncation(&OpExpr::atom(AtomicOp::Zsym), &p, TruncationWindow::new(1), BasisKind::Full)
            .unwrap();
        // inputs z^-1, 1, z; outputs z^-3 .. z^3 (growth bound 2)
        assert_eq!(m.len(), 7);
        for (r, row) in m.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let out_exp = r as i64 - 3;
                let in_exp = c as i64 - 1;
                let expect = (out_exp - in_exp).abs() == 1;
                assert_eq!(!v.is_zero(), expect, "row {r} col {c}");
            }
        }
    }

    #[test]
    fn parser_round_trip() {
        let p = pack();
        let parsed = parse_op_expr("T1*T0 + (1/4)*Yi").unwrap();
        let direct = OpExpr::atom(AtomicOp::T1) * OpExpr::atom(AtomicOp::T0)
            + (OpExpr::atom(AtomicOp::Yinv)).scaled(coef_frac(1, 4));
        for k in -3..=3i64 {
            let f = LaurentPoly::monomial(k, Coef::one());
            assert_eq!(parsed.apply(&f, &p).unwrap(), direct.apply(&f, &p).unwrap());
        }
        assert!(parse_op_expr("T1*").is_err());
        assert!(parse_op_expr("Q").is_err());
        assert!(parse_op_expr("(1/0)").is_err());
    }

    #[test]
    fn cache_matches_direct_application() {
        let p = pack();
        let cache = ActionCache::new(&p);
        let op = parse_op_expr("D*Zs + (3/2)*T1i*Z").unwrap();
        for k in -4..=4i64 {
            let f = LaurentPoly::monomial(k, coef_frac(-2, 7));
            assert_eq!(cache.apply_expr(&op, &f).unwrap(), op.apply(&f, &p).unwrap());
        }
    }

    fn arb_sym_poly() -> impl Strategy<Value = LaurentPoly> {
        proptest::collection::vec(((0i64..=5), (-9i64..=9), (1i64..=9)), 1..5).prop_map(|v| {
            let mut f = LaurentPoly::zero();
            for (e, n, d) in v {
                let c = coef_frac(n, d);
                f.add_term(e, c.clone());
                if e != 0 {
                    f.add_term(-e, c);
                }
            }
            f
        })
    }

    fn arb_poly() -> impl Strategy<Value = LaurentPoly> {
        proptest::collection::vec(((-5i64..=5), (-9i64..=9), (1i64..=9)), 1..6).prop_map(|v| {
            LaurentPoly::from_terms(v.into_iter().map(|(e, n, d)| (e, coef_frac(n, d))))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        // spectral projections of T1: the (-ab)-eigenspace is exactly the
        // symmetric polynomials, the (-1)-eigenspace is
        // z^-1 (1-az)(1-bz) * (symmetric)
        #[test]
        fn t1_eigenspace_characterization(f in arb_poly()) {
            let p = pack();
            let t1f = apply_atomic(AtomicOp::T1, &f, &p).unwrap();
            let one = Coef::one();
            // u = (T1 + 1) f / (1 - ab) lies in the (-ab)-eigenspace
            let u = t1f.add(&f).scale(&(&one - &p.ab()).recip());
            let t1u = apply_atomic(AtomicOp::T1, &u, &p).unwrap();
            prop_assert_eq!(&t1u, &u.scale(&-p.ab()));
            prop_assert!(u.is_symmetric());
            // v = (T1 + ab) f / (ab - 1) lies in the (-1)-eigenspace
            let v = t1f.add(&f.scale(&p.ab())).scale(&(p.ab() - &one).recip());
            let t1v = apply_atomic(AtomicOp::T1, &v, &p).unwrap();
            prop_assert_eq!(&t1v, &v.neg());
            if !v.is_zero() {
                let shape = LaurentPoly::from_terms([(0, one.clone()), (1, -p.a().clone())])
                    .mul(&LaurentPoly::from_terms([(0, one, ), (1, -p.b().clone())]));
                let g = v.mul_z_pow(1).divide_exact(&shape).unwrap();
                prop_assert!(g.is_symmetric());
            }
        }

        #[test]
        fn t0_eigenspace_characterization(f in arb_poly()) {
            let p = pack();
            let t0f = apply_atomic(AtomicOp::T0, &f, &p).unwrap();
            let one = Coef::one();
            let qicd = p.cd() * p.q_pow(-1);
            // u = (T0 + 1) f / (1 - q^-1 cd): eigenvalue -q^-1 cd, fixed by z -> qz^-1
            let u = t0f.add(&f).scale(&(&one - &qicd).recip());
            let t0u = apply_atomic(AtomicOp::T0, &u, &p).unwrap();
            prop_assert_eq!(&t0u, &u.scale(&-qicd.clone()));
            prop_assert_eq!(u.substitute(Substitution::QZInv, &p), u);
            // v = (T0 + q^-1 cd) f / (q^-1 cd - 1): eigenvalue -1,
            // of the form z^-1 (c-z)(d-z) g with g fixed by z -> qz^-1
            let v = t0f.add(&f.scale(&qicd)).scale(&(&qicd - &one).recip());
            let t0v = apply_atomic(AtomicOp::T0, &v, &p).unwrap();
            prop_assert_eq!(&t0v, &v.neg());
            if !v.is_zero() {
                let shape = LaurentPoly::from_terms([(0, p.c().clone()), (1, -one.clone())])
                    .mul(&LaurentPoly::from_terms([(0, p.d().clone()), (1, -one)]));
                let g = v.mul_z_pow(1).divide_exact(&shape).unwrap();
                prop_assert_eq!(g.substitute(Substitution::QZInv, &p), g);
            }
        }

        #[test]
        fn dsym_is_polynomial_on_symmetric_input(f in arb_sym_poly()) {
            let p = pack();
            let g = apply_atomic(AtomicOp::Dsym, &f, &p).unwrap();
            prop_assert!(g.is_symmetric());
        }
    }
}
