//! Exact rational parameters and every scalar constant of the theory:
//! parameter validation, elementary symmetric polynomials, q-Pochhammer
//! products, the structure constants of the quadratic algebras, the Casimir
//! constant, eigenvalues and three-term recurrence coefficients.
//!
//! The scalar field everywhere is [`Coef`], an arbitrary-precision rational.
//! There is no floating point anywhere in this crate.
//!
//! A [`ParamPack`] stores `s` with `q = s^2`, so every occurrence of
//! `q^(1/2)` stays inside exact rational arithmetic. Nondegeneracy
//! conditions are infinite families (`q^m != 1`, `abcd != q^-m`, ...); a
//! pack certifies them up to a caller-chosen depth and records that depth.
//! Conditions needed beyond the certified depth are re-checked lazily by the
//! operation that needs them, with a named error.

use num::{BigInt, BigRational, One, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Arbitrary-precision exact rational number, always in lowest terms.
pub type Coef = BigRational;

/// Rational from an integer.
pub fn coef_int(n: i64) -> Coef {
    Coef::from_integer(BigInt::from(n))
}

/// Rational `num/den`. Panics if `den == 0`.
pub fn coef_frac(num: i64, den: i64) -> Coef {
    Coef::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p"`, `"p/q"` or `"-p/q"` into an exact rational.
pub fn parse_coef(input: &str) -> Result<Coef> {
    input
        .trim()
        .parse::<Coef>()
        .map_err(|e| Error::Parse(format!("invalid rational {input:?}: {e}")))
}

/// `x^k` for any integer `k`; `x` must be nonzero when `k < 0`.
pub fn pow_i(x: &Coef, k: i64) -> Coef {
    if k == 0 {
        return Coef::one();
    }
    let mut acc = Coef::one();
    let base = if k > 0 {
        x.clone()
    } else {
        assert!(!x.is_zero(), "negative power of zero");
        x.recip()
    };
    for _ in 0..k.unsigned_abs() {
        acc *= &base;
    }
    acc
}

/// Validated parameter pack `(s, a, b, c, d)` with `q = s^2`.
///
/// Immutable after construction; cheap to clone and safe to share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamPack {
    s: Coef,
    q: Coef,
    a: Coef,
    b: Coef,
    c: Coef,
    d: Coef,
    max_degree_certified: u64,
    strict: bool,
}

impl ParamPack {
    /// Builds a pack, checking the nondegeneracy conditions up to `depth`:
    /// `q != 0`, `q^m != 1` for `m = 1..=depth`, `a,b,c,d != 0`, and
    /// `abcd != q^-m` for `m = 0..=depth`. With `strict` additionally none
    /// of the six pairwise products `ab, ..., cd` may equal `q^-m`.
    pub fn new(s: Coef, a: Coef, b: Coef, c: Coef, d: Coef, depth: u64, strict: bool) -> Result<Self> {
        if s.is_zero() {
            return Err(Error::DegenerateParams("s = 0".into()));
        }
        let q = &s * &s;
        for (name, v) in [("a", &a), ("b", &b), ("c", &c), ("d", &d)] {
            if v.is_zero() {
                return Err(Error::DegenerateParams(format!("{name} = 0")));
            }
        }
        let mut qm = Coef::one();
        for m in 1..=depth {
            qm *= &q;
            if qm.is_one() {
                return Err(Error::DegenerateParams(if m == 1 {
                    "q = 1".into()
                } else {
                    format!("q^{m} = 1")
                }));
            }
        }
        let e4 = &(&a * &b) * &(&c * &d);
        let mut qm = Coef::one();
        for m in 0..=depth {
            if (&e4 * &qm).is_one() {
                return Err(Error::DegenerateParams(format!("abcd = q^-{m}")));
            }
            qm *= &q;
        }
        if strict {
            let pairs = [
                ("ab", &a * &b),
                ("ac", &a * &c),
                ("ad", &a * &d),
                ("bc", &b * &c),
                ("bd", &b * &d),
                ("cd", &c * &d),
            ];
            for (name, prod) in &pairs {
                let mut qm = Coef::one();
                for m in 0..=depth {
                    if (prod * &qm).is_one() {
                        return Err(Error::DegenerateParams(format!("{name} = q^-{m} under strict")));
                    }
                    qm *= &q;
                }
            }
        }
        Ok(ParamPack { s, q, a, b, c, d, max_degree_certified: depth, strict })
    }

    pub fn s(&self) -> &Coef {
        &self.s
    }
    pub fn q(&self) -> &Coef {
        &self.q
    }
    pub fn a(&self) -> &Coef {
        &self.a
    }
    pub fn b(&self) -> &Coef {
        &self.b
    }
    pub fn c(&self) -> &Coef {
        &self.c
    }
    pub fn d(&self) -> &Coef {
        &self.d
    }
    pub fn max_degree_certified(&self) -> u64 {
        self.max_degree_certified
    }
    pub fn strict(&self) -> bool {
        self.strict
    }

    /// `q^k` for any integer `k`.
    pub fn q_pow(&self, k: i64) -> Coef {
        pow_i(&self.q, k)
    }

    /// `s^k = q^(k/2)` for any integer `k`.
    pub fn s_pow(&self, k: i64) -> Coef {
        pow_i(&self.s, k)
    }

    /// `abcd`, the fourth elementary symmetric polynomial.
    pub fn abcd(&self) -> Coef {
        &(&self.a * &self.b) * &(&self.c * &self.d)
    }

    /// `ab` and `cd`, used all over the Hecke relations.
    pub fn ab(&self) -> Coef {
        &self.a * &self.b
    }
    pub fn cd(&self) -> Coef {
        &self.c * &self.d
    }

    /// Errors if the pack's certified depth is below `needed`.
    pub fn ensure_depth(&self, needed: u64) -> Result<()> {
        if self.max_degree_certified < needed {
            return Err(Error::DegenerateParams(format!(
                "operation needs nondegeneracy certified to depth {needed}, pack certifies {}",
                self.max_degree_certified
            )));
        }
        Ok(())
    }

    /// Derives a child pack with parameters `(fa*a, fb*b, fc*c, fd*d)` and
    /// unchanged `s`. Shifted parameters are re-validated at the same depth;
    /// the shifts used by the polynomial families are not guaranteed to stay
    /// nondegenerate, so this can fail.
    pub fn shifted(&self, fa: &Coef, fb: &Coef, fc: &Coef, fd: &Coef) -> Result<Self> {
        ParamPack::new(
            self.s.clone(),
            &self.a * fa,
            &self.b * fb,
            &self.c * fc,
            &self.d * fd,
            self.max_degree_certified,
            false,
        )
    }

    /// True if the pack has the q-ultraspherical shape `c = -d = ±s`, `a = -b`.
    pub fn is_ultraspherical(&self) -> bool {
        self.a == -self.b.clone() && self.c == -self.d.clone() && (self.c == self.s || self.c == -self.s.clone())
    }
}

/// Elementary symmetric polynomials `(e1, e2, e3, e4)` in `a, b, c, d`.
pub fn elem_sym(p: &ParamPack) -> (Coef, Coef, Coef, Coef) {
    elem_sym_of(p.a(), p.b(), p.c(), p.d())
}

/// Elementary symmetric polynomials of four arbitrary rationals.
pub fn elem_sym_of(a: &Coef, b: &Coef, c: &Coef, d: &Coef) -> (Coef, Coef, Coef, Coef) {
    let e1 = a + b + c + d;
    let e2 = a * b + a * c + b * c + a * d + b * d + c * d;
    let e3 = a * b * c.clone() + a * b * d.clone() + a * c * d.clone() + b * c * d.clone();
    let e4 = a * b * c.clone() * d.clone();
    (e1, e2, e3, e4)
}

/// q-Pochhammer symbol: the product of `(1 - x q^j)` for `j = 0..k`.
pub fn qpochhammer(x: &Coef, p: &ParamPack, k: u64) -> Coef {
    let mut acc = Coef::one();
    let mut xq = x.clone();
    for _ in 0..k {
        acc *= Coef::one() - &xq;
        xq *= p.q();
    }
    acc
}

/// Structure constants of the quadratic algebra on `K0, K1`, plus the
/// scalar value of its Casimir element in the basic representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Aw3Constants {
    pub b: Coef,
    pub c0: Coef,
    pub c1: Coef,
    pub d0: Coef,
    pub d1: Coef,
    pub q0: Coef,
}

/// Evaluates the structure constants exactly from the pack.
pub fn aw3_constants(p: &ParamPack) -> Aw3Constants {
    let (e1, e2, e3, e4) = elem_sym(p);
    let q = p.q();
    let qi = p.q_pow(-1);
    let one = Coef::one();
    let one_m_qi = &one - &qi; // 1 - q^-1
    let q_m_qi = q - &qi; // q - q^-1
    let one_m_q = &one - q; // 1 - q

    let b = &one_m_qi * &one_m_qi * (&e3 + &(q * &e1));
    let c0 = &q_m_qi * &q_m_qi;
    let c1 = &qi * &c0 * &e4;
    let d0 = -(p.q_pow(-3) * &one_m_q * &one_m_q * (&one + q) * (&e4 + &(q * &e2) + &(q * q)));
    let d1 = -(p.q_pow(-3) * &one_m_q * &one_m_q * (&one + q) * (&e1 * &e4 + &(q * &e3)));
    let q0 = p.q_pow(-4)
        * &one_m_q
        * &one_m_q
        * (p.q_pow(4) * (&e4 - &e2)
            + p.q_pow(3) * (&e1 * &e1 - &e1 * &e3 - (&e2 + &e2))
            - p.q_pow(2) * (&e2 * &e4 + &e4 + &e4 + &e2)
            + q * (&e3 * &e3 - (&e2 * &e4 + &e2 * &e4) - &e1 * &e3)
            + &e4 * (&one - &e2));
    Aw3Constants { b, c0, c1, d0, d1, q0 }
}

/// Extra structure constants of the centrally extended algebra on
/// `K0, K1, T1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtConstants {
    pub e: Coef,
    pub f0: Coef,
    pub f1: Coef,
    pub g: Coef,
}

/// Evaluates the extension constants exactly from the pack.
pub fn ext_constants(p: &ParamPack) -> ExtConstants {
    let (_e1, e2, _e3, e4) = elem_sym(p);
    let (a, b, c, d) = (p.a(), p.b(), p.c(), p.d());
    let q = p.q();
    let one = Coef::one();
    let one_m_q = &one - q;
    let cube = &one_m_q * &one_m_q * &one_m_q;
    let ab = p.ab();
    let cd = p.cd();

    let e = -(p.q_pow(-2) * &cube * (c + d));
    let f0 = p.q_pow(-3) * &cube * (&one + q) * (&cd + q);
    let f1 = p.q_pow(-3) * &cube * (&one + q) * (a + b) * &cd;
    let g = -(p.q_pow(-4)
        * &cube
        * ((a + b) * (c + d) * (&cd * &(p.q_pow(2) + &one) + q)
            - q * (&ab + &one) * ((c * c + d * d) * (q + &one) - &cd)
            + (&cd + &e4) * (p.q_pow(2) + &one)
            + (&e2 + &e4 - &ab) * p.q_pow(3)));
    ExtConstants { e, f0, f1, g }
}

/// Eigenvalue `q^-n + abcd q^(n-1)` of the second-order operator on the
/// degree-`n` polynomial.
pub fn lambda_n(p: &ParamPack, n: u64) -> Result<Coef> {
    p.ensure_depth(n)?;
    Ok(p.q_pow(-(n as i64)) + p.abcd() * p.q_pow(n as i64 - 1))
}

/// Three-term recurrence coefficients `(beta_n, gamma_n)` for the monic
/// symmetric family. `gamma_0` is undefined, so the second component is
/// `None` at `n = 0`.
///
/// The denominators `(1 - q^(2n-3) e4) ... (1 - q^(2n) e4)` can vanish for
/// exponents below the certified range; each factor is checked and a
/// vanishing one is reported by name.
pub fn recurrence_coeffs(p: &ParamPack, n: u64) -> Result<(Coef, Option<Coef>)> {
    p.ensure_depth(n)?;
    let (e1, _e2, e3, e4) = elem_sym(p);
    let q = p.q();
    let one = Coef::one();
    let n = n as i64;

    let denom_factor = |m: i64| -> Result<Coef> {
        let f = &one - &(p.q_pow(m) * &e4);
        if f.is_zero() {
            return Err(Error::DegenerateParams(format!("abcd = q^{}", -m)));
        }
        Ok(f)
    };

    // beta_n
    let num = p.q_pow(n - 1)
        * ((&one - &p.q_pow(n) - &p.q_pow(n + 1)) * &e3
            + q * &e1
            + p.q_pow(2 * n - 1) * &e3 * &e4
            - p.q_pow(n - 1) * (&one + q - &p.q_pow(n + 1)) * &e1 * &e4);
    let beta = num / (denom_factor(2 * n - 2)? * denom_factor(2 * n)?);

    if n == 0 {
        return Ok((beta, None));
    }

    // gamma_n; the (1 - q^(n-2) e4) factor sits in the numerator, so it may vanish
    let mut num = (&one - &p.q_pow(n)) * (&one - &(p.q_pow(n - 2) * &e4));
    let qn1 = p.q_pow(n - 1);
    for pair in [p.ab(), p.a() * p.c(), p.a() * p.d(), p.b() * p.c(), p.b() * p.d(), p.cd()] {
        num *= &one - &(&qn1 * &pair);
    }
    let d22 = denom_factor(2 * n - 2)?;
    let gamma = num / (denom_factor(2 * n - 3)? * &d22 * &d22 * denom_factor(2 * n - 1)?);
    Ok((beta, Some(gamma)))
}

fn nonzero_small(rng: &mut impl Rng) -> i64 {
    loop {
        let v = rng.gen_range(-9i64..=9);
        if v != 0 {
            return v;
        }
    }
}

/// Draws a nonzero rational with numerator and denominator uniform in
/// `[-9, 9] \ {0}`.
fn small_rational(rng: &mut impl Rng) -> Coef {
    let num = nonzero_small(rng);
    let den = nonzero_small(rng);
    coef_frac(num, den)
}

/// Samples a random pack from small rationals, rejecting until the pack is
/// generic enough for every identity suite. Beyond the strict validation in
/// [`ParamPack::new`] this also rejects the isolated special points the
/// suites touch lazily: `a^2 = 1`, `b^2 = 1`, `c^2 = q`, `d^2 = q`,
/// `cd = q`, and `abcd` in `{q, q^2, q^3}`.
pub fn random_pack(rng: &mut impl Rng, depth: u64) -> ParamPack {
    for _ in 0..100_000 {
        let s = small_rational(rng);
        let a = small_rational(rng);
        let b = small_rational(rng);
        let c = small_rational(rng);
        let d = small_rational(rng);
        let pack = match ParamPack::new(s, a, b, c, d, depth, true) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let q = pack.q();
        if (pack.a() * pack.a()).is_one() || (pack.b() * pack.b()).is_one() {
            continue;
        }
        if &(pack.c() * pack.c()) == q || &(pack.d() * pack.d()) == q || &pack.cd() == q {
            continue;
        }
        let e4 = pack.abcd();
        if [1i64, 2, 3].iter().any(|&m| e4 == pack.q_pow(m)) {
            continue;
        }
        return pack;
    }
    panic!("random pack sampling failed to find a generic pack");
}

/// Samples a random pack of q-ultraspherical shape `(s, a, -a, s, -s)`,
/// rejecting degenerate draws and `a = ±1`.
pub fn random_ultraspherical_pack(rng: &mut impl Rng, depth: u64) -> ParamPack {
    for _ in 0..100_000 {
        let s = small_rational(rng);
        let a = small_rational(rng);
        if (&a * &a).is_one() {
            continue;
        }
        if let Ok(pack) = ParamPack::new(s.clone(), a.clone(), -a.clone(), s.clone(), -s.clone(), depth, false) {
            return pack;
        }
    }
    panic!("random ultraspherical sampling failed to find a valid pack");
}
