//! Construction of the polynomial families: the monic symmetric family
//! `P_n` (explicit q-hypergeometric sum and three-term recurrence, two
//! independent routes), the shifted eigenfunction families `Q_n`, `Pdag_n`,
//! `Qdag_n`, and the non-symmetric family `E_n` indexed by all integers
//! (again through two independent routes).
//!
//! Shifted parameter packs (`qa, qb` and the `q^(1/2)`-shifts realized by
//! `s`) are derived with [`ParamPack::shifted`] and re-validated, since the
//! shifts are not automatically nondegenerate.

use num::{One, Zero};

use crate::coeff::{qpochhammer, recurrence_coeffs, Coef, ParamPack};
use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, Substitution};

/// Construction route for the monic symmetric family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PMode {
    /// The explicit terminating sum with Laurent factors `(az, az^-1; q)_k`.
    Hypergeometric,
    /// The three-term recurrence.
    Recurrence,
}

/// Construction route for the non-symmetric family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EMode {
    /// Combination of `P_n` and `Qdag_n` (uses `q^(1/2)`-shifted packs).
    ViaQdag,
    /// Combination of `P_n` and `Q_n` (uses the `qa, qb` shift only).
    ViaQ,
}

/// Monic symmetric Laurent polynomial of degree `n`.
pub fn aw_p(p: &ParamPack, n: u64, mode: PMode) -> Result<LaurentPoly> {
    p.ensure_depth(n)?;
    match mode {
        PMode::Hypergeometric => aw_p_sum(p, n),
        PMode::Recurrence => aw_p_recurrence(p, n),
    }
}

/// Default route for internal consumers; cross-route agreement is a suite
/// check, so any single route is safe to build on.
pub(crate) fn aw_p_default(p: &ParamPack, n: u64) -> Result<LaurentPoly> {
    aw_p(p, n, PMode::Recurrence)
}

fn aw_p_recurrence(p: &ParamPack, n: u64) -> Result<LaurentPoly> {
    let mut prev = LaurentPoly::one();
    if n == 0 {
        return Ok(prev);
    }
    let zsym = LaurentPoly::from_terms([(1, Coef::one()), (-1, Coef::one())]);
    let (beta0, _) = recurrence_coeffs(p, 0)?;
    let mut cur = zsym.sub(&LaurentPoly::constant(beta0));
    for m in 1..n {
        let (beta, gamma) = recurrence_coeffs(p, m)?;
        let gamma = gamma.expect("gamma defined for m >= 1");
        let next = zsym.sub(&LaurentPoly::constant(beta)).mul(&cur).sub(&prev.scale(&gamma));
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

fn aw_p_sum(p: &ParamPack, n: u64) -> Result<LaurentPoly> {
    let (a, q) = (p.a(), p.q());
    let e4 = p.abcd();
    let ab = p.ab();
    let ac = p.a() * p.c();
    let ad = p.a() * p.d();
    let q_inv_n = p.q_pow(-(n as i64));

    // the scalar Pochhammer in the denominator can vanish below the
    // certified range, so check its factors by name
    let e4_poch = |k: u64| -> Result<Coef> {
        let mut acc = Coef::one();
        let mut x = &e4 * &p.q_pow(n as i64 + k as i64 - 1);
        for j in 0..(n - k) {
            let f = Coef::one() - &x;
            if f.is_zero() {
                return Err(Error::DegenerateParams(format!(
                    "abcd = q^{}",
                    -(n as i64 + k as i64 - 1 + j as i64)
                )));
            }
            acc *= f;
            x *= q;
        }
        Ok(acc)
    };

    let mut acc = LaurentPoly::zero();
    // running product of (1 - a q^j z)(1 - a q^j z^-1) over j < k
    let mut zfactor = LaurentPoly::one();
    let mut qk = Coef::one();
    for k in 0..=n {
        if k > 0 {
            let aqj = a * &p.q_pow(k as i64 - 1);
            let fwd = LaurentPoly::from_terms([(0, Coef::one()), (1, -aqj.clone())]);
            let bwd = LaurentPoly::from_terms([(0, Coef::one()), (-1, -aqj)]);
            zfactor = zfactor.mul(&fwd).mul(&bwd);
            qk *= q;
        }
        let qk_shift = p.q_pow(k as i64);
        let num = qpochhammer(&q_inv_n, p, k)
            * &qk
            * qpochhammer(&(&ab * &qk_shift), p, n - k)
            * qpochhammer(&(&ac * &qk_shift), p, n - k)
            * qpochhammer(&(&ad * &qk_shift), p, n - k);
        let den = qpochhammer(q, p, k) * e4_poch(k)?;
        acc = acc.add(&zfactor.scale(&(num / den)));
    }
    Ok(acc.scale(&crate::coeff::pow_i(a, -(n as i64))))
}

/// `Q_n = (ab)^-1 z^-1 (1-az)(1-bz) P_(n-1)[z; qa, qb, c, d]`, the
/// `T1`-eigenvalue `-1` companion of `P_n`. Requires `n >= 1`.
pub fn family_q(p: &ParamPack, n: u64) -> Result<LaurentPoly> {
    assert!(n >= 1, "family Q starts at n = 1");
    let one = Coef::one();
    let child = p.shifted(p.q(), p.q(), &one, &one)?;
    let inner = aw_p_default(&child, n - 1)?;
    let prefactor = LaurentPoly::from_terms([(0, one.clone()), (1, -p.a().clone())])
        .mul(&LaurentPoly::from_terms([(0, one, ), (1, -p.b().clone())]))
        .mul_z_pow(-1);
    Ok(prefactor.mul(&inner).scale(&p.ab().recip()))
}

/// `Pdag_n = q^(n/2) P_n[q^(-1/2) z; q^(1/2)a, q^(1/2)b, q^(-1/2)c,
/// q^(-1/2)d]`, the `T0`-eigenvalue `-q^-1 cd` companion. Requires `n >= 1`.
pub fn family_pdag(p: &ParamPack, n: u64) -> Result<LaurentPoly> {
    assert!(n >= 1, "family Pdag starts at n = 1");
    let s = p.s().clone();
    let sinv = p.s_pow(-1);
    let child = p.shifted(&s, &s, &sinv, &sinv)?;
    let inner = aw_p_default(&child, n)?;
    Ok(inner.substitute(Substitution::SInvZ, p).scale(&p.s_pow(n as i64)))
}

/// `Qdag_n = q^((n-1)/2) z^-1 (c-z)(d-z) P_(n-1)[q^(-1/2) z; q^(1/2)a,
/// q^(1/2)b, q^(1/2)c, q^(1/2)d]`, the `T0`-eigenvalue `-1` companion.
/// Requires `n >= 1`.
pub fn family_qdag(p: &ParamPack, n: u64) -> Result<LaurentPoly> {
    assert!(n >= 1, "family Qdag starts at n = 1");
    let s = p.s().clone();
    let child = p.shifted(&s, &s, &s, &s)?;
    let inner = aw_p_default(&child, n - 1)?.substitute(Substitution::SInvZ, p);
    let one = Coef::one();
    let prefactor = LaurentPoly::from_terms([(0, p.c().clone()), (1, -one.clone())])
        .mul(&LaurentPoly::from_terms([(0, p.d().clone()), (1, -one)]))
        .mul_z_pow(-1);
    Ok(prefactor.mul(&inner).scale(&p.s_pow(n as i64 - 1)))
}

/// Non-symmetric polynomial `E_n` for any integer `n`; `E_0 = 1`. The two
/// modes are independent constructions and must agree exactly.
pub fn e_nonsym(p: &ParamPack, n: i64, mode: EMode) -> Result<LaurentPoly> {
    if n == 0 {
        return Ok(LaurentPoly::one());
    }
    let m = n.unsigned_abs();
    let one = Coef::one();
    let pn = aw_p_default(p, m)?;
    let e4 = p.abcd();

    // 1 - q^(2m-1) abcd, the denominator shared by both positive-index forms
    let pos_denom = || -> Result<Coef> {
        let f = &one - &(p.q_pow(2 * m as i64 - 1) * &e4);
        if f.is_zero() {
            return Err(Error::DegenerateParams(format!("abcd = q^{}", 1 - 2 * m as i64)));
        }
        Ok(f)
    };

    match mode {
        EMode::ViaQdag => {
            let qdag = family_qdag(p, m)?;
            if n < 0 {
                let f = &one - &(p.q_pow(m as i64 - 1) * &p.cd());
                if f.is_zero() {
                    return Err(Error::DegenerateParams(format!("cd = q^{}", 1 - m as i64)));
                }
                Ok(pn.sub(&qdag).scale(&f.recip()))
            } else {
                let den = pos_denom()?;
                let cp = p.q_pow(m as i64) * (&one - &(p.q_pow(m as i64 - 1) * &e4)) / &den;
                let cq = (&one - &p.q_pow(m as i64)) / &den;
                Ok(pn.scale(&cp).add(&qdag.scale(&cq)))
            }
        }
        EMode::ViaQ => {
            let ab = p.ab();
            if ab.is_one() {
                return Err(Error::DegenerateParams("ab = 1".into()));
            }
            let qn = family_q(p, m)?;
            if n < 0 {
                let c = &ab / &(&ab - &one);
                Ok(pn.sub(&qn).scale(&c))
            } else {
                let den = (&one - &ab) * pos_denom()?;
                let cp = (&one - &(p.q_pow(m as i64) * &ab)) * (&one - &(p.q_pow(m as i64 - 1) * &e4)) / &den;
                let cq = &ab * &(&one - &p.q_pow(m as i64)) * (&one - &(p.q_pow(m as i64 - 1) * &p.cd())) / &den;
                Ok(pn.scale(&cp).sub(&qn.scale(&cq)))
            }
        }
    }
}

/// The five families addressable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    P,
    Q,
    Pdag,
    Qdag,
    E,
}

/// A family name plus index, e.g. `P:3` or `E:-2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyTag {
    pub family: Family,
    pub index: i64,
}

impl FamilyTag {
    /// Parses `"P:3"`, `"Q:1"`, `"Pdag:2"`, `"Qdag:2"`, `"E:-2"`.
    pub fn parse(src: &str) -> Result<FamilyTag> {
        let (name, idx) = src
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("family tag {src:?} must look like P:3 or E:-2")))?;
        let index: i64 = idx
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("invalid family index {idx:?}")))?;
        let family = match name.trim() {
            "P" => Family::P,
            "Q" => Family::Q,
            "Pdag" => Family::Pdag,
            "Qdag" => Family::Qdag,
            "E" => Family::E,
            other => return Err(Error::Parse(format!("unknown family {other:?}"))),
        };
        let tag = FamilyTag { family, index };
        tag.validate()?;
        Ok(tag)
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.family {
            Family::P => self.index >= 0,
            Family::Q | Family::Pdag | Family::Qdag => self.index >= 1,
            Family::E => true,
        };
        if !ok {
            return Err(Error::Parse(format!(
                "index {} out of range for family {:?}",
                self.index, self.family
            )));
        }
        Ok(())
    }

    /// Builds the polynomial (canonical routes: recurrence for `P`, the
    /// `ViaQ` combination for `E`).
    pub fn build(&self, p: &ParamPack) -> Result<LaurentPoly> {
        match self.family {
            Family::P => aw_p(p, self.index as u64, PMode::Recurrence),
            Family::Q => family_q(p, self.index as u64),
            Family::Pdag => family_pdag(p, self.index as u64),
            Family::Qdag => family_qdag(p, self.index as u64),
            Family::E => e_nonsym(p, self.index, EMode::ViaQ),
        }
    }
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self.family {
            Family::P => "P",
            Family::Q => "Q",
            Family::Pdag => "Pdag",
            Family::Qdag => "Qdag",
            Family::E => "E",
        };
        write!(f, "{}:{}", name, self.index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{coef_frac, coef_int, lambda_n};
    use crate::operators::{apply_atomic, AtomicOp};

    fn pack() -> ParamPack {
        ParamPack::new(coef_frac(1, 2), coef_int(1), coef_int(2), coef_int(3), coef_int(4), 24, false).unwrap()
    }

    #[test]
    fn p0_and_p1() {
        let p = pack();
        assert_eq!(aw_p(&p, 0, PMode::Hypergeometric).unwrap(), LaurentPoly::one());
        assert_eq!(aw_p(&p, 0, PMode::Recurrence).unwrap(), LaurentPoly::one());
        let (beta0, _) = recurrence_coeffs(&p, 0).unwrap();
        let expect = LaurentPoly::from_terms([(1, Coef::one()), (-1, Coef::one()), (0, -beta0)]);
        assert_eq!(aw_p(&p, 1, PMode::Recurrence).unwrap(), expect);
        assert_eq!(aw_p(&p, 1, PMode::Hypergeometric).unwrap(), expect);
    }

    #[test]
    fn p_routes_agree_and_are_monic_symmetric() {
        let p = pack();
        for n in 0..=8u64 {
            let h = aw_p(&p, n, PMode::Hypergeometric).unwrap();
            let r = aw_p(&p, n, PMode::Recurrence).unwrap();
            assert_eq!(h, r, "routes disagree at n = {n}");
            assert!(h.is_symmetric());
            assert_eq!(h.max_exp(), Some(n as i64));
            assert_eq!(h.coeff(n as i64), Coef::one());
            assert_eq!(h.coeff(-(n as i64)), Coef::one());
        }
    }

    #[test]
    fn recurrence_coeffs_against_sum_route() {
        // derive beta_1, gamma_1 from the explicit-sum polynomials alone and
        // compare with the closed forms
        let p = pack();
        let p0 = aw_p(&p, 0, PMode::Hypergeometric).unwrap();
        let p1 = aw_p(&p, 1, PMode::Hypergeometric).unwrap();
        let p2 = aw_p(&p, 2, PMode::Hypergeometric).unwrap();
        let zsym = LaurentPoly::from_terms([(1, Coef::one()), (-1, Coef::one())]);
        // (z + z^-1) P1 - P2 = beta_1 P1 + gamma_1 P0
        assert_eq!(p0, LaurentPoly::one());
        let rest = zsym.mul(&p1).sub(&p2);
        let beta1 = rest.coeff(1);
        let gamma1 = rest.coeff(0) - &beta1 * &p1.coeff(0);
        let (b, g) = recurrence_coeffs(&p, 1).unwrap();
        assert_eq!(b, beta1);
        assert_eq!(g.unwrap(), gamma1);
        // frozen values computed by the sum-route oracle above at this pack
        assert_eq!(beta1, coef_frac(415, 92));
        assert_eq!(gamma1, coef_frac(-693, 1058));
    }

    #[test]
    fn q1_expansion() {
        let p = pack();
        let q1 = family_q(&p, 1).unwrap();
        let abinv = p.ab().recip();
        let expect = LaurentPoly::from_terms([
            (1, Coef::one()),
            (0, -(p.a().recip() + p.b().recip())),
            (-1, abinv),
        ]);
        assert_eq!(q1, expect);
    }

    #[test]
    fn qdag1_expansion() {
        let p = pack();
        let qd1 = family_qdag(&p, 1).unwrap();
        let expect = LaurentPoly::from_terms([
            (1, Coef::one()),
            (0, -(p.c() + p.d())),
            (-1, p.cd()),
        ]);
        assert_eq!(qd1, expect);
    }

    #[test]
    fn trailing_coefficients_of_all_families() {
        let p = pack();
        for n in 1..=6u64 {
            let ni = n as i64;
            let pn = aw_p_default(&p, n).unwrap();
            assert_eq!(pn.coeff(-ni), Coef::one());
            let qn = family_q(&p, n).unwrap();
            assert_eq!(qn.coeff(ni), Coef::one());
            assert_eq!(qn.coeff(-ni), p.ab().recip());
            let pd = family_pdag(&p, n).unwrap();
            assert_eq!(pd.coeff(ni), Coef::one());
            assert_eq!(pd.coeff(-ni), p.q_pow(ni));
            let qd = family_qdag(&p, n).unwrap();
            assert_eq!(qd.coeff(ni), Coef::one());
            assert_eq!(qd.coeff(-ni), p.q_pow(ni - 1) * p.cd());
        }
    }

    #[test]
    fn families_are_d_eigenvectors() {
        let p = pack();
        for n in 1..=5u64 {
            let lam = lambda_n(&p, n).unwrap();
            for f in [
                aw_p_default(&p, n).unwrap(),
                family_q(&p, n).unwrap(),
                family_pdag(&p, n).unwrap(),
                family_qdag(&p, n).unwrap(),
            ] {
                let df = apply_atomic(AtomicOp::D, &f, &p).unwrap();
                assert_eq!(df, f.scale(&lam), "n = {n}");
            }
        }
    }

    #[test]
    fn e_modes_agree() {
        let p = pack();
        for n in 1..=6i64 {
            for idx in [n, -n] {
                let via_q = e_nonsym(&p, idx, EMode::ViaQ).unwrap();
                let via_qdag = e_nonsym(&p, idx, EMode::ViaQdag).unwrap();
                assert_eq!(via_q, via_qdag, "modes disagree at index {idx}");
            }
        }
        assert_eq!(e_nonsym(&p, 0, EMode::ViaQ).unwrap(), LaurentPoly::one());
        assert_eq!(e_nonsym(&p, 0, EMode::ViaQdag).unwrap(), LaurentPoly::one());
    }

    #[test]
    fn e_window_and_leading_coefficients() {
        let p = pack();
        let one = Coef::one();
        for n in 1..=6i64 {
            let em = e_nonsym(&p, -n, EMode::ViaQ).unwrap();
            assert_eq!(em.min_exp(), Some(-n));
            assert_eq!(em.coeff(-n), one);
            assert!(em.max_exp().unwrap() <= n - 1);

            let ep = e_nonsym(&p, n, EMode::ViaQ).unwrap();
            assert_eq!(ep.max_exp(), Some(n));
            assert_eq!(ep.coeff(n), one);
            let denom = &one - &(p.q_pow(2 * n - 1) * &p.abcd());
            let expect = &one - &((&one - &p.q_pow(n)) * (&one - &(p.q_pow(n - 1) * &p.cd())) / denom);
            assert_eq!(ep.coeff(-n), expect);
        }
    }

    #[test]
    fn via_q_rejects_ab_equal_one() {
        // a = 2, b = 1/2 gives ab = 1: fine for the pack itself, fatal for
        // the ViaQ combination
        let p = ParamPack::new(coef_frac(1, 2), coef_int(2), coef_frac(1, 2), coef_int(3), coef_int(5), 12, false)
            .unwrap();
        let err = e_nonsym(&p, -1, EMode::ViaQ).unwrap_err();
        assert_eq!(err, Error::DegenerateParams("ab = 1".into()));
        // the other route still works
        assert!(e_nonsym(&p, -1, EMode::ViaQdag).is_ok());
    }

    #[test]
    fn family_tags() {
        let p = pack();
        let tag = FamilyTag::parse("P:0").unwrap();
        assert_eq!(tag.build(&p).unwrap(), LaurentPoly::one());
        let tag = FamilyTag::parse("E:-2").unwrap();
        let e = tag.build(&p).unwrap();
        assert_eq!(e.min_exp(), Some(-2));
        assert!(e.max_exp().unwrap() <= 1);
        assert!(FamilyTag::parse("Q:0").is_err());
        assert!(FamilyTag::parse("X:1").is_err());
        assert!(FamilyTag::parse("P").is_err());
    }
}
